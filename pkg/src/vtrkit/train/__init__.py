from .config import TrainConfig, learning_rate, train_preset
from .data import (VideoSample, collate, isolate_pairs, load_record_video, load_video_samples, raw_shots_sample,
                   transition_clip_dataset, video_sample)
from .losses import DEFAULT_MARGIN, batch_loss, sample_loss, triplet_loss_from_scores, triplet_term
from .loops import (PreparedSamples, build_embedding_table, build_recommender, classifier_accuracy,
                    classifier_embeddings, predict_scores, pretrain_transition_classifier, seed_everything,
                    train_classification_baseline, train_recommender)
from .report import LossReport
