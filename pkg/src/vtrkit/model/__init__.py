from .checkpoint import load_checkpoint, model_config_digest, save_checkpoint
from .classifier import TransitionClassifier, classifier_forward, sample_clip
from .config import FREEZE_POLICIES, MODALITIES, ModelConfig
from .encoders import (AudioEncoder, VisualEncoder, audio_window, encode_audio_point, encode_visual_shot,
                       frozen_stage_count, mel_filterbank, sample_frame_indices)
from .presets import PRESETS, model_preset
from .recommender import RankedRecommendation, Recommender, ShotBatch, rank_scores, score_and_rank
from .table import TransitionEmbeddingTable, aggregate_category_embeddings, random_table, three_sigma_keep

__all__ = [
    "AudioEncoder", "FREEZE_POLICIES", "MODALITIES", "ModelConfig", "PRESETS", "RankedRecommendation",
    "Recommender", "ShotBatch", "TransitionClassifier", "TransitionEmbeddingTable", "VisualEncoder",
    "aggregate_category_embeddings", "audio_window", "classifier_forward", "encode_audio_point",
    "encode_visual_shot", "frozen_stage_count", "load_checkpoint", "mel_filterbank", "model_config_digest",
    "model_preset", "random_table", "rank_scores", "sample_clip", "sample_frame_indices", "save_checkpoint",
    "score_and_rank", "three_sigma_keep",
]
