"""Triplet margin retrieval objective with dot-product similarity.

The triplet term penalises a negative whose similarity comes within ``margin``
of the positive's: ``max(phi(a, n) - phi(a, p) + margin, 0)``. Passing
``literal=True`` flips the two similarities, which reproduces a sign variant
of the formula that pushes positives away; it exists only for inspection.
"""
import torch

DEFAULT_MARGIN = 0.3


def _check_margin(margin):
    if not margin > 0:
        raise ValueError(f"margin must be positive, got {margin}")


def triplet_term(a, p, n, margin=DEFAULT_MARGIN, literal=False):
    a, p, n = (torch.as_tensor(x, dtype=torch.float64) if not torch.is_tensor(x) else x for x in (a, p, n))
    if not (a.shape[-1] == p.shape[-1] == n.shape[-1]):
        raise ValueError(f"dimension mismatch: {a.shape[-1]}, {p.shape[-1]}, {n.shape[-1]}")
    _check_margin(margin)
    pos, neg = (a * p).sum(-1), (a * n).sum(-1)
    gap = pos - neg if literal else neg - pos
    return torch.clamp(gap + margin, min=0.0)


def triplet_loss_from_scores(scores, labels, margin=DEFAULT_MARGIN, literal=False, reduction="mean"):
    """Per-sample mean over the ``N - 1`` negatives of the triplet term.

    ``scores`` is ``(V, N)`` with entry ``[v, k] = phi(e_v, t_k)``.
    """
    if scores.ndim != 2:
        raise ValueError("scores must be a (V, N) matrix")
    V, N = scores.shape
    if V == 0:
        raise ValueError("empty batch")
    if N < 2:
        raise ValueError("need at least two categories for a triplet loss")
    _check_margin(margin)
    labels = torch.as_tensor(labels, dtype=torch.long, device=scores.device)
    if bool(((labels < 0) | (labels >= N)).any()):
        raise ValueError("label outside the table")
    pos = scores.gather(1, labels[:, None])
    gap = pos - scores if literal else scores - pos
    terms = torch.clamp(gap + margin, min=0.0)
    negative = torch.ones_like(scores, dtype=torch.bool)
    negative[torch.arange(V), labels] = False
    per_sample = (terms * negative).sum(1) / (N - 1)
    if reduction == "none":
        return per_sample
    return per_sample.mean()


def sample_loss(e_video, table, c, margin=DEFAULT_MARGIN, literal=False):
    e_video = torch.as_tensor(e_video, dtype=torch.float64) if not torch.is_tensor(e_video) else e_video
    table = torch.as_tensor(table, dtype=e_video.dtype) if not torch.is_tensor(table) else table
    if e_video.shape[-1] != table.shape[-1]:
        raise ValueError("query and table dimensions differ")
    scores = (table @ e_video)[None]
    return triplet_loss_from_scores(scores, [c], margin, literal)


def batch_loss(queries, table, labels, margin=DEFAULT_MARGIN, literal=False):
    """Mean of :func:`sample_loss` over a ``(V, d)`` batch of query embeddings."""
    queries = torch.as_tensor(queries, dtype=torch.float64) if not torch.is_tensor(queries) else queries
    table = torch.as_tensor(table, dtype=queries.dtype) if not torch.is_tensor(table) else table
    if queries.ndim != 2 or len(queries) == 0:
        raise ValueError("batch_loss needs a non-empty (V, d) batch")
    if queries.shape[-1] != table.shape[-1]:
        raise ValueError("query and table dimensions differ")
    return triplet_loss_from_scores(queries @ table.T, labels, margin, literal)
