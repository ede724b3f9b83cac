"""Training loops: transition classifier pre-training, the triplet-loss recommender
and the cross-entropy classification baseline."""
import random
from typing import Callable, List, Optional, Sequence

import numpy as np
import torch
from torch.nn import functional as F

from ..model.classifier import TransitionClassifier
from ..model.config import ModelConfig
from ..model.recommender import Recommender
from ..model.table import TransitionEmbeddingTable, aggregate_category_embeddings, random_table
from .config import TrainConfig, learning_rate
from .data import VideoSample, collate, isolate_pairs
from .losses import triplet_loss_from_scores
from .report import LossReport


def seed_everything(seed):
    random.seed(seed)
    np.random.seed(seed % 2**32)
    torch.manual_seed(seed)


def _set_lr(optimizer, lr):
    for group in optimizer.param_groups:
        group["lr"] = lr


def _step(model, optimizer, loss, config: TrainConfig):
    optimizer.zero_grad(set_to_none=True)
    loss.backward()
    params = [p for p in model.parameters() if p.grad is not None]
    norm = torch.linalg.vector_norm(torch.stack([p.grad.detach().norm() for p in params])) if params else torch.tensor(0.0)
    if config.grad_clip is not None:
        torch.nn.utils.clip_grad_norm_(params, config.grad_clip)
    optimizer.step()
    return float(norm)


def _optimizer(model, config: TrainConfig):
    params = [p for p in model.parameters() if p.requires_grad]
    return torch.optim.Adam(params, lr=config.initial_lr, weight_decay=config.weight_decay)


# -- stage 1: transition classifier ------------------------------------------

def pretrain_transition_classifier(clips, labels, model_config: ModelConfig, config: TrainConfig,
                                   n_categories: Optional[int] = None, log: Optional[Callable] = None,
                                   on_epoch: Optional[Callable] = None):
    """Cross-entropy training of :class:`TransitionClassifier` on uint8 clips ``(M, n, H, W, 3)``.

    Returns ``(model, report)``; the model holds last-epoch parameters.
    ``on_epoch(epoch, model)`` is called after every epoch, e.g. for tracing.
    """
    config.validate()
    if len(clips) == 0:
        raise ValueError("empty clip dataset")
    clips = torch.as_tensor(clips)
    labels = torch.as_tensor(labels, dtype=torch.long)
    seed_everything(config.seed)
    model = TransitionClassifier(model_config, n_categories)
    if int(labels.max()) >= model.n_categories:
        raise ValueError("clip label outside the classifier's categories")
    opt = _optimizer(model, config)
    rng = np.random.default_rng(config.seed)
    report = LossReport()
    for epoch in range(config.epochs):
        lr = learning_rate(config, epoch)
        _set_lr(opt, lr)
        report.learning_rates.append(lr)
        model.train()
        order = rng.permutation(len(clips))
        losses, correct = [], 0
        for i in range(0, len(order), config.batch_size):
            idx = torch.from_numpy(order[i:i + config.batch_size])
            _, logits = model(clips[idx])
            loss = F.cross_entropy(logits, labels[idx])
            report.grad_norms.append(_step(model, opt, loss, config))
            losses.append(loss.item())
            correct += int((logits.argmax(1) == labels[idx]).sum())
        report.step_losses += losses
        report.epoch_losses.append(float(np.mean(losses)))
        report.epoch_metrics.append({"train_accuracy": correct / len(clips)})
        if log:
            log(f"pretrain epoch {epoch}: loss {report.epoch_losses[-1]:.4f} lr {lr:.2e} "
                f"acc {correct / len(clips):.3f}")
        if on_epoch:
            on_epoch(epoch, model)
            model.train()
    model.eval()
    return model, report


@torch.no_grad()
def classifier_embeddings(model: TransitionClassifier, clips, batch_size=64):
    """Unit embeddings and logits of every clip, in eval mode."""
    model.eval()
    clips = torch.as_tensor(clips)
    embs, logits = [], []
    for i in range(0, len(clips), batch_size):
        e, l = model(clips[i:i + batch_size])
        embs.append(e)
        logits.append(l)
    return torch.cat(embs).double().numpy(), torch.cat(logits).numpy()


def classifier_accuracy(model, clips, labels):
    _, logits = classifier_embeddings(model, clips)
    return float((logits.argmax(1) == np.asarray(labels)).mean())


def build_embedding_table(model: TransitionClassifier, clips, labels, names=None, n_sigma=3.0,
                          min_count=10) -> TransitionEmbeddingTable:
    emb, _ = classifier_embeddings(model, clips)
    return aggregate_category_embeddings(emb, labels, model.n_categories, n_sigma, min_count, names)


# -- stage 2: recommender ----------------------------------------------------

class PreparedSamples:
    """Samples plus their frozen-prefix encoder caches, computed once per model."""

    def __init__(self, model: Recommender, samples: Sequence[VideoSample], context=True, chunk=64):
        per_boundary = model.config.audio_token == "per_boundary"
        self.samples = list(samples) if context else isolate_pairs(samples, per_boundary)
        self.per_boundary = per_boundary
        self.visual = self.audio = None
        self.visual_cached = self.audio_cached = False
        if "visual" in model.modalities and model.visual_encoder.frozen_stages > 0:
            self.visual = self._cache(model.visual_encoder, [s.visual for s in self.samples], chunk)
            self.visual_cached = True
        if "audio" in model.modalities:
            self.audio = self._cache(model.audio_encoder, [s.audio for s in self.samples], chunk)
            self.audio_cached = True

    @staticmethod
    def _cache(encoder, arrays, chunk):
        lengths = [len(a) for a in arrays]
        flat = np.concatenate(arrays)
        out = []
        for i in range(0, len(flat), chunk):
            out.append(encoder.cache(torch.from_numpy(flat[i:i + chunk])))
        flat_cache = torch.cat(out)
        return list(torch.split(flat_cache, lengths))

    def __len__(self):
        return len(self.samples)

    def batch(self, indices, pad_to=None):
        pick = lambda xs: None if xs is None else [xs[i] for i in indices]
        return collate([self.samples[i] for i in indices], pad_to, pick(self.visual), pick(self.audio),
                       self.visual_cached, self.audio_cached, self.per_boundary)


def build_recommender(model_config: ModelConfig, table: Optional[TransitionEmbeddingTable], objective="retrieval",
                      backbone_state=None, seed=0):
    seed_everything(seed)
    model = Recommender(model_config, table, objective)
    if backbone_state is not None and "visual" in model.modalities:
        model.visual_encoder.load_state_dict(backbone_state)
    return model


@torch.no_grad()
def predict_scores(model: Recommender, prepared: PreparedSamples, batch_size=32):
    """``(scores (V, N), labels (V,), provenance)`` over every transition in ``prepared``."""
    model.eval()
    scores, labels, prov = [], [], []
    for i in range(0, len(prepared), batch_size):
        batch = prepared.batch(list(range(i, min(i + batch_size, len(prepared)))))
        scores.append(model(batch)["scores"].double())
        labels.append(batch.labels)
        prov += batch.provenance
    return torch.cat(scores).numpy(), torch.cat(labels).numpy(), prov


def _fit(model: Recommender, train: PreparedSamples, config: TrainConfig, loss_fn, test=None,
         log=None, metric_fn=None):
    opt = _optimizer(model, config)
    rng = np.random.default_rng(config.seed)
    report = LossReport()
    for epoch in range(config.epochs):
        lr = learning_rate(config, epoch)
        _set_lr(opt, lr)
        report.learning_rates.append(lr)
        model.train()
        order = rng.permutation(len(train))
        losses = []
        for i in range(0, len(order), config.batch_size):
            batch = train.batch(order[i:i + config.batch_size].tolist())
            loss = loss_fn(model(batch)["scores"], batch.labels)
            report.grad_norms.append(_step(model, opt, loss, config))
            losses.append(loss.item())
        report.step_losses += losses
        report.epoch_losses.append(float(np.mean(losses)))
        metrics = {}
        if test is not None and metric_fn is not None:
            s, l, _ = predict_scores(model, test)
            metrics = metric_fn(s, l)
        report.epoch_metrics.append(metrics)
        if log:
            extra = " ".join(f"{k} {v:.4f}" for k, v in metrics.items())
            log(f"epoch {epoch}: loss {report.epoch_losses[-1]:.4f} lr {lr:.2e} {extra}")
    model.eval()
    return report


def _default_metrics(scores, labels):
    from ..eval.metrics import metrics_from_scores
    return metrics_from_scores(scores, labels).summary()


def train_recommender(train_samples: Sequence[VideoSample], table: Optional[TransitionEmbeddingTable],
                      model_config: ModelConfig, config: TrainConfig, test_samples=None, context=True,
                      random_embedding=False, backbone_state=None, log=None):
    """Optimise the triplet objective; the embedding table stays frozen.

    With ``random_embedding`` the table is replaced by normalised Gaussian rows of
    the same shape. ``context=False`` trains on isolated 2-shot sequences.
    Returns ``(model, report)``.
    """
    config.validate()
    if not train_samples:
        raise ValueError("no training samples")
    if random_embedding:
        names = table.names if table is not None else None
        table = random_table(model_config.n_categories, model_config.d_transition, config.seed, names)
    if table is None:
        raise ValueError("a transition embedding table is required unless random_embedding is set")
    model = build_recommender(model_config, table, "retrieval", backbone_state, config.seed)
    train = PreparedSamples(model, train_samples, context)
    test = PreparedSamples(model, test_samples, context) if test_samples else None
    loss_fn = lambda s, l: triplet_loss_from_scores(s, l, config.margin, config.literal_triplet)
    report = _fit(model, train, config, loss_fn, test, log, _default_metrics)
    return model, report


def train_classification_baseline(train_samples: Sequence[VideoSample], model_config: ModelConfig,
                                  config: TrainConfig, test_samples=None, context=True, backbone_state=None,
                                  log=None):
    """Same token pipeline, N-way linear head and cross-entropy instead of matching."""
    config.validate()
    if not train_samples:
        raise ValueError("no training samples")
    model = build_recommender(model_config, None, "classification", backbone_state, config.seed)
    train = PreparedSamples(model, train_samples, context)
    test = PreparedSamples(model, test_samples, context) if test_samples else None
    report = _fit(model, train, config, F.cross_entropy, test, log, _default_metrics)
    return model, report
