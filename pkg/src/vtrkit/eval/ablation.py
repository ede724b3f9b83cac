"""Ablation grid: train and evaluate one run per (spec, seed) and lay the results out
like the comparison tables of the reference work."""
import csv
import io
import traceback
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from ..model.config import FREEZE_POLICIES, MODALITIES, ModelConfig
from ..model.table import TransitionEmbeddingTable
from ..synthgen.corpus import CorpusManifest
from ..train.config import TrainConfig
from ..train.data import load_video_samples
from ..train.loops import PreparedSamples, predict_scores, train_classification_baseline, train_recommender
from .metrics import REPORT_COLUMNS, MetricsReport, metrics_from_scores


@dataclass
class AblationSpec:
    name: str = ""
    context: bool = True
    modalities: List[str] = field(default_factory=lambda: ["visual", "audio"])
    embedding_init: str = "pretrained"
    projection: bool = True
    objective: str = "retrieval"
    freeze: str = "early"
    direct_cut: bool = False
    n_layers: Optional[int] = None
    d_model: Optional[int] = None
    d_matching: Optional[int] = None

    def validate(self):
        mods = list(self.modalities)
        if not mods or any(m not in MODALITIES for m in mods):
            raise ValueError(f"spec {self.name!r}: choose at least one modality from {MODALITIES}")
        if self.embedding_init not in ("random", "pretrained"):
            raise ValueError(f"spec {self.name!r}: embedding_init must be random or pretrained")
        if self.objective not in ("retrieval", "classification"):
            raise ValueError(f"spec {self.name!r}: objective must be retrieval or classification")
        if self.freeze not in FREEZE_POLICIES:
            raise ValueError(f"spec {self.name!r}: freeze must be one of {FREEZE_POLICIES}")
        return self

    @property
    def label(self):
        return self.name or "-".join([
            "ctx" if self.context else "noctx", "+".join(self.modalities), self.embedding_init,
            "proj" if self.projection else "noproj", self.objective, self.freeze] +
            (["cut"] if self.direct_cut else []))

    def model_config(self, base: ModelConfig, n_categories: int) -> ModelConfig:
        cfg = replace(base, modalities=list(self.modalities), freeze_stages=self.freeze,
                      use_projection=self.projection, n_categories=n_categories)
        if self.n_layers is not None:
            cfg = replace(cfg, n_layers=self.n_layers)
        if self.d_model is not None:
            cfg = replace(cfg, d_model=self.d_model, dim_feedforward=2 * self.d_model)
        if self.d_matching is not None:
            cfg = replace(cfg, d_matching=self.d_matching)
        if not self.projection:
            cfg = replace(cfg, d_matching=cfg.d_transition)
        return cfg.validate()

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown ablation keys: {sorted(unknown)}")
        return cls(**d).validate()


@dataclass
class AblationData:
    """A prepared corpus plus the pre-trained table and backbone that go with it."""
    corpus_dir: Union[str, Path]
    table: Optional[TransitionEmbeddingTable] = None
    backbone_state: Optional[dict] = None

    def __post_init__(self):
        self.manifest = CorpusManifest.load(Path(self.corpus_dir) / "manifest.jsonl")
        self._samples = {}

    def samples(self, split, config: ModelConfig):
        key = (split, config.n_frames, config.audio_token, config.audio_anchor, config.audio_window_s,
               config.max_transitions)
        if key not in self._samples:
            self._samples[key] = load_video_samples(self.corpus_dir, self.manifest.split(split), config)
        return self._samples[key]


@dataclass
class AblationRow:
    spec: AblationSpec
    seed: int
    report: Optional[MetricsReport] = None
    error: Optional[str] = None

    @property
    def ok(self):
        return self.report is not None


def run_single(spec: AblationSpec, data: AblationData, base: ModelConfig, train_config: TrainConfig,
               log: Optional[Callable] = None) -> MetricsReport:
    spec.validate()
    cfg = spec.model_config(base, data.manifest.category_count)
    train = data.samples("train", cfg)
    test = data.samples("test", cfg)
    if spec.objective == "classification":
        model, _ = train_classification_baseline(train, cfg, train_config, context=spec.context,
                                                 backbone_state=data.backbone_state, log=log)
    else:
        model, _ = train_recommender(train, data.table, cfg, train_config, context=spec.context,
                                     random_embedding=spec.embedding_init == "random",
                                     backbone_state=data.backbone_state, log=log)
    scores, labels, _ = predict_scores(model, PreparedSamples(model, test, spec.context))
    report = metrics_from_scores(scores, labels)
    report.extra = {"spec": spec.label, "seed": train_config.seed}
    return report


def run_ablation_grid(specs: Sequence[AblationSpec], data: Union[AblationData, Dict[bool, AblationData]],
                      base: ModelConfig, train_config: TrainConfig, seeds: Sequence[int] = (0,),
                      log: Optional[Callable] = None) -> List[AblationRow]:
    """Train and evaluate every spec under every seed.

    ``data`` maps the ``direct_cut`` flag to its corpus (a single value serves
    both). A failing run is recorded with its error and the grid continues.
    """
    rows = []
    for spec in specs:
        for seed in seeds:
            try:
                source = data[spec.direct_cut] if isinstance(data, dict) else data
                report = run_single(spec, source, base, replace(train_config, seed=seed))
                rows.append(AblationRow(spec, seed, report))
                if log:
                    log(f"{spec.label} seed {seed}: " + ", ".join(f"{k} {v:.4f}" for k, v in report.row().items()))
            except Exception as exc:  # keep the grid going; the row records the failure
                rows.append(AblationRow(spec, seed, error=f"{type(exc).__name__}: {exc}"))
                if log:
                    log(f"{spec.label} seed {seed} FAILED\n{traceback.format_exc()}")
    return rows


def aggregate(rows: Sequence[AblationRow]) -> Dict[str, Dict]:
    """Per spec label: seed-mean of each report column, run count and failures."""
    groups: Dict[str, List[AblationRow]] = {}
    for r in rows:
        groups.setdefault(r.spec.label, []).append(r)
    out = {}
    for label, group in groups.items():
        good = [r.report.row() for r in group if r.ok]
        mean = {c: float(np.mean([g[c] for g in good])) for c in REPORT_COLUMNS} if good else None
        out[label] = {"spec": group[0].spec, "mean": mean, "runs": len(group),
                      "failures": [r.error for r in group if not r.ok]}
    return out


# -- table layouts -------------------------------------------------------------

def _check(flag):
    return "x" if flag else ""


# Each layout: descriptor columns, a row formatter and the reference numbers
# (Recall@1, Recall@5, Mean Rank) reported for the analogous row at full scale.
LAYOUTS = {
    "context_modality": {
        "title": "Context and modalities",
        "columns": ["Sequential (Context)", "Visual", "Audio"],
        "describe": lambda s: [_check(s.context), _check("visual" in s.modalities), _check("audio" in s.modalities)],
        "specs": [AblationSpec("noctx-visual", context=False, modalities=["visual"]),
                  AblationSpec("ctx-audio", modalities=["audio"]),
                  AblationSpec("ctx-visual", modalities=["visual"]),
                  AblationSpec("ctx-visual+audio")],
        "reference": [(0.2412, 0.6625, 5.758), (0.1939, 0.5661, 7.012), (0.2540, 0.6633, 5.665),
                      (0.2806, 0.6685, 5.480)],
    },
    "embedding": {
        "title": "Transition embedding initialisation",
        "columns": ["Transition Embedding", "Projection"],
        "describe": lambda s: ["Random initialization" if s.embedding_init == "random" else
                               "Pre-trained transition embedding", _check(s.projection)],
        "specs": [AblationSpec("random-noproj", embedding_init="random", projection=False),
                  AblationSpec("pretrained-noproj", projection=False),
                  AblationSpec("pretrained-proj")],
        "reference": [(0.2567, 0.663, 5.646), (0.2624, 0.6603, 5.623), (0.2806, 0.6685, 5.480)],
    },
    "objective": {
        "title": "Classification versus matching",
        "columns": ["Method"],
        "describe": lambda s: ["Classification" if s.objective == "classification"
                               else "Matching with pre-trained transition embedding"],
        "specs": [AblationSpec("classification", objective="classification"), AblationSpec("matching")],
        "reference": [(0.2227, 0.6182, 6.099), (0.2806, 0.6685, 5.480)],
    },
    "freeze": {
        "title": "Visual backbone freezing (visual only)",
        "columns": ["Freezing"],
        "describe": lambda s: [{"all": "Freeze all parameters", "early": "Freeze early stages",
                                "none": "No freezing"}[s.freeze]],
        "specs": [AblationSpec(f"freeze-{f}", modalities=["visual"], freeze=f) for f in ("all", "early", "none")],
        "reference": [(0.2239, 0.2653, 6.097), (0.2540, 0.6633, 5.665), (0.2597, 0.6695, 5.579)],
    },
    "model_size": {
        "title": "Model size",
        "columns": ["N", "d_model", "d_matching"],
        "describe": None,  # filled from the resolved config, see format_comparison
        "specs": [AblationSpec("base"),
                  AblationSpec("a-dmatch-half", d_matching=32), AblationSpec("a-dmatch-quarter", d_matching=16),
                  AblationSpec("b-dmodel-half", d_model=64), AblationSpec("b-dmodel-double", d_model=256),
                  AblationSpec("c-layers-1", n_layers=1), AblationSpec("c-layers-4", n_layers=4)],
        "reference": [(0.2806, 0.6685, 5.480), (0.2659, 0.6709, 5.493), (0.2640, 0.6707, 5.499),
                      (0.2552, 0.6671, 5.598), (0.2693, 0.6655, 5.541), (0.2577, 0.6645, 5.623),
                      (0.2726, 0.6647, 5.528)],
    },
    "direct_cut": {
        "title": "Direct cut extension",
        "columns": ["Modal", "with direct cut"],
        "describe": lambda s: ["+".join(m.capitalize() for m in s.modalities), _check(s.direct_cut)],
        "specs": [AblationSpec("without-cut"), AblationSpec("with-cut", direct_cut=True)],
        "reference": [(0.2806, 0.6685, 5.480), (0.3057, 0.6798, 5.347)],
    },
}


def layout_specs(name) -> List[AblationSpec]:
    if name not in LAYOUTS:
        raise ValueError(f"unknown layout {name!r}; choose from {sorted(LAYOUTS)}")
    return [replace(s) for s in LAYOUTS[name]["specs"]]


def comparison_rows(rows: Sequence[AblationRow], layout: str, base: Optional[ModelConfig] = None):
    """Header and body of a comparison table; metric cells are seed means, references are annotations."""
    lay = LAYOUTS[layout]
    refs = {s.label: r for s, r in zip(lay["specs"], lay["reference"])}
    header = lay["columns"] + list(REPORT_COLUMNS) + ["Seeds", "Status"] + [f"Reference {c}" for c in REPORT_COLUMNS]
    body = []
    for label, agg in aggregate(rows).items():
        spec = agg["spec"]
        if lay["describe"] is not None:
            desc = lay["describe"](spec)
        else:
            cfg = spec.model_config(base or ModelConfig(), base.n_categories if base else 8)
            desc = [cfg.n_layers, cfg.d_model, cfg.d_matching]
        mean = agg["mean"]
        metrics = [f"{mean[c]:.4f}" for c in REPORT_COLUMNS] if mean else ["", "", ""]
        status = "ok" if not agg["failures"] else f"failed {len(agg['failures'])}/{agg['runs']}: {agg['failures'][0]}"
        ref = refs.get(label)
        body.append(desc + metrics + [agg["runs"], status] + (list(ref) if ref else ["", "", ""]))
    return header, body


def format_comparison(rows, layout, base=None) -> str:
    header, body = comparison_rows(rows, layout, base)
    cells = [[str(c) for c in header]] + [[str(c) for c in r] for r in body]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    line = lambda r: " | ".join(c.ljust(w) for c, w in zip(r, widths))
    out = [LAYOUTS[layout]["title"], line(cells[0]), "-+-".join("-" * w for w in widths)]
    out += [line(r) for r in cells[1:]]
    out.append("Reference columns are full-scale figures, shown for orientation only.")
    return "\n".join(out) + "\n"


def write_comparison(rows, layout, out_dir, base=None):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header, body = comparison_rows(rows, layout, base)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(body)
    (out_dir / f"{layout}.csv").write_text(buf.getvalue())
    (out_dir / f"{layout}.txt").write_text(format_comparison(rows, layout, base))
    return out_dir / f"{layout}.csv"
