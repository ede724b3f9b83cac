"""Pre-trained transition embedding table and its aggregation from per-clip embeddings."""
import csv
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np


@dataclass
class TransitionEmbeddingTable:
    embeddings: np.ndarray  # (N, d), unit rows
    category_ids: List[int]
    names: Optional[List[str]] = None
    kind: str = "pretrained"

    def __post_init__(self):
        self.embeddings = np.asarray(self.embeddings, dtype=np.float64)
        if self.embeddings.ndim != 2 or len(self.embeddings) != len(self.category_ids):
            raise ValueError("need one embedding row per category id")
        if len(set(self.category_ids)) != len(self.category_ids):
            raise ValueError("duplicate category ids in table")

    @property
    def n_categories(self):
        return len(self.category_ids)

    @property
    def dim(self):
        return self.embeddings.shape[1]

    def save(self, path):
        """CSV with header ``category_id,name,e0..e{d-1}``; one row per category."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["category_id", "name"] + [f"e{j}" for j in range(self.dim)])
            for i, cid in enumerate(self.category_ids):
                name = self.names[i] if self.names else ""
                w.writerow([cid, name] + [repr(float(v)) for v in self.embeddings[i]])

    @classmethod
    def load(cls, path):
        with Path(path).open(newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][:2] != ["category_id", "name"]:
            raise ValueError(f"{path} is not a transition embedding table")
        body = rows[1:]
        ids = [int(r[0]) for r in body]
        names = [r[1] for r in body]
        emb = np.array([[float(v) for v in r[2:]] for r in body])
        return cls(emb, ids, names if any(names) else None)


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def three_sigma_keep(embeddings, n_sigma=3.0, min_count=10):
    """Boolean mask of rows whose every coordinate lies within mean +- n_sigma * std.

    Below ``min_count`` rows nothing is dropped.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    if len(x) < min_count:
        return np.ones(len(x), dtype=bool)
    mean, std = x.mean(axis=0), x.std(axis=0)
    return np.all(np.abs(x - mean) <= n_sigma * std + 1e-12, axis=1)


def aggregate_category_embeddings(embeddings, labels, n_categories: int, n_sigma: float = 3.0,
                                  min_count: int = 10, names: Optional[Sequence[str]] = None
                                  ) -> TransitionEmbeddingTable:
    """Per category: drop three-sigma outliers, average the survivors, renormalise."""
    x = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels)
    rows = []
    for c in range(n_categories):
        group = x[labels == c]
        if len(group) == 0:
            raise ValueError(f"category {c} has no embeddings to aggregate")
        keep = three_sigma_keep(group, n_sigma, min_count)
        rows.append(_unit(group[keep].mean(axis=0)))
    return TransitionEmbeddingTable(np.stack(rows), list(range(n_categories)),
                                    list(names) if names is not None else None)


def random_table(n_categories, dim, seed=0, names=None) -> TransitionEmbeddingTable:
    """Normalised Gaussian rows, the random-initialisation replacement for a pre-trained table."""
    rng = np.random.default_rng(seed)
    return TransitionEmbeddingTable(_unit(rng.standard_normal((n_categories, dim))),
                                    list(range(n_categories)), names, kind="random")
