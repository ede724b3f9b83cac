"""Evaluate checkpoints on a corpus split."""
from pathlib import Path
from typing import Optional

import numpy as np
import torch

from ..fx import list_categories
from ..model.checkpoint import load_checkpoint, model_config_digest, save_checkpoint
from ..model.config import ModelConfig
from ..model.recommender import Recommender
from ..model.table import TransitionEmbeddingTable
from ..synthgen.corpus import CorpusManifest
from ..synthgen.policy import deterministic_labels
from ..train.data import load_video_samples
from ..train.loops import PreparedSamples, predict_scores
from .metrics import MetricsReport, metrics_from_scores


def table_to_extra(table: Optional[TransitionEmbeddingTable]):
    if table is None:
        return None
    return {"embeddings": table.embeddings.tolist(), "category_ids": list(table.category_ids),
            "names": table.names, "kind": table.kind}


def table_from_extra(d) -> Optional[TransitionEmbeddingTable]:
    if d is None:
        return None
    return TransitionEmbeddingTable(np.array(d["embeddings"]), d["category_ids"], d.get("names"), d.get("kind", "pretrained"))


def save_model_checkpoint(path, model: Recommender, table: Optional[TransitionEmbeddingTable] = None,
                          context=True, extra=None):
    """Checkpoint a recommender (retrieval) or classification baseline with everything needed to reload it."""
    kind = "recommender" if model.objective == "retrieval" else "baseline"
    meta = dict(extra or {})
    meta.update({"objective": model.objective, "context": bool(context), "table": table_to_extra(table)})
    return save_checkpoint(path, kind, model.config, model.state_dict(), meta)


def save_oracle_checkpoint(path, config: ModelConfig):
    """A checkpoint that recomputes the planted deterministic labels from the manifest's scene specs."""
    return save_checkpoint(path, "oracle", config, {}, {})


def model_from_checkpoint(payload) -> Recommender:
    if payload["kind"] not in ("recommender", "baseline"):
        raise ValueError(f"checkpoint kind {payload['kind']!r} does not hold a recommender")
    extra = payload["extra"]
    table = table_from_extra(extra.get("table"))
    model = Recommender(payload["model_config"], table, extra.get("objective", "retrieval"))
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model


def _check_compatible(config: ModelConfig, manifest: CorpusManifest):
    if config.n_categories != manifest.category_count:
        raise ValueError(f"checkpoint expects {config.n_categories} categories, corpus has "
                         f"{manifest.category_count}")


def oracle_scores(manifest: CorpusManifest, records):
    """One-hot scores of the deterministic planted labels, plus labels and provenance."""
    sequential = bool(manifest.config.get("sequential", False))
    cats = list_categories(manifest.category_count - int(manifest.direct_cut), manifest.direct_cut)
    scores, labels, prov = [], [], []
    for r in records:
        pred = deterministic_labels(r.scene_specs, r.audio["mood"], cats, sequential)
        for k, (c, truth) in enumerate(zip(pred, r.labels)):
            row = np.zeros(len(cats))
            row[c.id] = 1.0
            scores.append(row)
            labels.append(truth)
            prov.append((r.video_id, k))
    return np.array(scores), np.array(labels), prov


def evaluate_model(checkpoint, corpus_dir, split="test", ks=(1, 5), samples=None) -> MetricsReport:
    """Recall@K and Mean Rank of ``checkpoint`` (path or loaded payload) on ``split`` of a corpus."""
    payload = load_checkpoint(checkpoint) if isinstance(checkpoint, (str, Path)) else checkpoint
    config = payload["model_config"]
    manifest = CorpusManifest.load(Path(corpus_dir) / "manifest.jsonl")
    _check_compatible(config, manifest)
    records = manifest.split(split) if split else manifest.records
    if not records:
        raise ValueError(f"corpus split {split!r} is empty")
    digest = model_config_digest(config)
    if payload["kind"] == "oracle":
        scores, labels, _ = oracle_scores(manifest, records)
        return metrics_from_scores(scores, labels, ks, digest)
    model = model_from_checkpoint(payload)
    if samples is None:
        samples = load_video_samples(corpus_dir, records, config)
    prepared = PreparedSamples(model, samples, payload["extra"].get("context", True))
    with torch.no_grad():
        scores, labels, _ = predict_scores(model, prepared)
    return metrics_from_scores(scores, labels, ks, digest)
