"""Ranking metrics over full category permutations. Ranks are 1-based."""
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from ..model.recommender import rank_scores

REPORT_COLUMNS = ("Recall@1", "Recall@5", "Mean Rank")


def _check_rankings(rankings, ground_truths):
    r = np.asarray(rankings)
    g = np.asarray(ground_truths)
    if r.ndim != 2 or len(r) == 0:
        raise ValueError("rankings must be a non-empty (S, N) array")
    if len(g) != len(r):
        raise ValueError("one ground truth per ranking is required")
    N = r.shape[1]
    if not np.array_equal(np.sort(r, axis=1), np.broadcast_to(np.arange(N), r.shape)):
        raise ValueError("every ranking must be a permutation of all category ids")
    if np.any((g < 0) | (g >= N)):
        raise ValueError("ground truth outside the category range")
    return r, g


def ground_truth_ranks(rankings, ground_truths):
    r, g = _check_rankings(rankings, ground_truths)
    return np.argmax(r == g[:, None], axis=1) + 1


def recall_at_k(rankings, ground_truths, k):
    if k < 1:
        raise ValueError("k must be at least 1")
    return float(np.mean(ground_truth_ranks(rankings, ground_truths) <= k))


def mean_rank(rankings, ground_truths):
    return float(np.mean(ground_truth_ranks(rankings, ground_truths)))


@dataclass
class MetricsReport:
    recall_at: Dict[int, float]
    mean_rank: float
    n_samples: int
    n_categories: int
    config_digest: Optional[str] = None
    extra: Dict = field(default_factory=dict)

    def summary(self):
        row = {f"Recall@{k}": v for k, v in sorted(self.recall_at.items())}
        row["Mean Rank"] = self.mean_rank
        return row

    def row(self):
        """The three report columns, in order."""
        s = self.summary()
        return {c: s[c] for c in REPORT_COLUMNS if c in s}

    def to_dict(self):
        d = asdict(self)
        d["recall_at"] = {str(k): v for k, v in self.recall_at.items()}
        return d


def metrics_from_rankings(rankings, ground_truths, ks: Sequence[int] = (1, 5), config_digest=None):
    ranks = ground_truth_ranks(rankings, ground_truths)
    N = np.asarray(rankings).shape[1]
    recall = {int(k): float(np.mean(ranks <= k)) for k in ks}
    return MetricsReport(recall, float(ranks.mean()), len(ranks), N, config_digest)


def metrics_from_scores(scores, labels, ks=(1, 5), config_digest=None):
    return metrics_from_rankings(rank_scores(scores), labels, ks, config_digest)
