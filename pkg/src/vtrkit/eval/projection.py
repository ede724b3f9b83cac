"""2-D projections of transition embeddings under cosine distance, plus family-similarity summaries."""
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..model.table import three_sigma_keep


@dataclass
class ProjectionReport:
    coords: np.ndarray  # (M, 2) for the kept points
    labels: np.ndarray  # (M,)
    kept: np.ndarray  # boolean mask over the input points
    method: str
    paths: Dict[str, Path] = field(default_factory=dict)


def cosine_distances(x):
    x = np.asarray(x, dtype=np.float64)
    u = x / np.maximum(np.linalg.norm(x, axis=1, keepdims=True), 1e-12)
    return np.clip(1.0 - u @ u.T, 0.0, 2.0)


def classical_mds(distances, dim=2):
    """Torgerson scaling: coordinates whose Euclidean distances best match ``distances``."""
    d2 = np.asarray(distances, dtype=np.float64) ** 2
    n = len(d2)
    centre = np.eye(n) - np.full((n, n), 1.0 / n)
    gram = -0.5 * centre @ d2 @ centre
    vals, vecs = np.linalg.eigh(gram)
    order = np.argsort(vals)[::-1][:dim]
    coords = vecs[:, order] * np.sqrt(np.clip(vals[order], 0.0, None))
    if coords.shape[1] < dim:
        coords = np.pad(coords, ((0, 0), (0, dim - coords.shape[1])))
    return coords


def project_2d(embeddings, method="auto", seed=0):
    """t-SNE with cosine distance; classical MDS on the same distances for very small sets."""
    x = np.asarray(embeddings, dtype=np.float64)
    n = len(x)
    if method == "auto":
        method = "tsne" if n >= 8 else "mds"
    if method == "tsne":
        from sklearn.manifold import TSNE
        perplexity = float(min(30.0, max(2.0, (n - 1) / 3.0)))
        model = TSNE(n_components=2, metric="cosine", perplexity=perplexity, init="random", random_state=seed)
        return model.fit_transform(x), method
    if method == "mds":
        return classical_mds(cosine_distances(x)), method
    raise ValueError(f"unknown projection method {method!r}")


def embedding_projection_report(embeddings, labels=None, names: Optional[Sequence[str]] = None,
                                out_dir=None, stem="projection", method="auto", seed=0, n_sigma=3.0,
                                min_count=10) -> ProjectionReport:
    """Drop three-sigma outliers per label, project to 2-D and optionally write CSV + PNG.

    Without ``labels`` every point is its own label (e.g. one row per category of a table).
    """
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or len(x) < 2:
        raise ValueError("need at least two embeddings to project")
    labels = np.arange(len(x)) if labels is None else np.asarray(labels)
    kept = np.ones(len(x), dtype=bool)
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        kept[idx] = three_sigma_keep(x[idx], n_sigma, min_count)
    coords, used = project_2d(x[kept], method, seed)
    report = ProjectionReport(coords, labels[kept], kept, used)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        report.paths["csv"] = _write_csv(out_dir / f"{stem}.csv", report, names)
        report.paths["png"] = _write_png(out_dir / f"{stem}.png", report, names)
    return report


def _name(names, label):
    return names[int(label)] if names is not None and 0 <= int(label) < len(names) else str(label)


def _write_csv(path, report, names):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["point", "label", "name", "x", "y"])
        for i, (lab, (x, y)) in enumerate(zip(report.labels, report.coords)):
            w.writerow([i, int(lab), _name(names, lab), f"{x:.6f}", f"{y:.6f}"])
    return path


def _write_png(path, report, names):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 7))
    cmap = plt.get_cmap("tab20")
    for j, lab in enumerate(np.unique(report.labels)):
        pts = report.coords[report.labels == lab]
        ax.scatter(pts[:, 0], pts[:, 1], s=14, color=cmap(j % 20), alpha=0.8)
        cx, cy = pts.mean(axis=0)
        ax.annotate(_name(names, lab), (cx, cy), fontsize=8, ha="center")
    ax.set_title(f"transition embeddings ({report.method}, cosine distance)")
    ax.set_xticks([])
    ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def family_cosine_gap(embeddings, ids_in_family: Sequence[int], ids_outside: Sequence[int]):
    """Mean pairwise cosine within a family, mean cosine from the family to outsiders, and their gap."""
    u = np.asarray(embeddings, dtype=np.float64)
    u = u / np.linalg.norm(u, axis=1, keepdims=True)
    s = u @ u.T
    fam = list(ids_in_family)
    if len(fam) < 2 or not ids_outside:
        raise ValueError("need two family members and at least one outsider")
    intra = float(np.mean([s[i, j] for a, i in enumerate(fam) for j in fam[a + 1:]]))
    cross = float(np.mean([s[i, j] for i in fam for j in ids_outside]))
    return {"intra": intra, "cross": cross, "gap": intra - cross}
