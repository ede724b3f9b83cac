"""Synthetic corpus construction, filtering, splitting and statistics.

A corpus directory holds ``manifest.jsonl`` (one header line, then one line
per video), ``config.yaml`` (the generation config) and ``media/`` with one
``.npz`` + ``.json`` pair per video.
"""
import hashlib
import json
import logging
import os
import shutil
from collections import Counter
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import yaml

from ..fx import (Annotation, compose_edited_video, list_categories, save_edited_video)
from ..fx.video import transition_frame_count
from .audio import generate_audio
from .policy import category_prior, sample_transition_labels
from .scenes import BRIGHTNESS, MOTIONS, SceneSpec, generate_shot

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"
MEDIA_DIR = "media"


@dataclass
class CorpusConfig:
    n_videos: int = 100
    shots_min: int = 3
    shots_max: int = 6
    shot_duration_min_s: float = 1.5
    shot_duration_max_s: float = 2.5
    fps: float = 16.0
    height: int = 64
    width: int = 64
    transition_duration_s: float = 0.5
    n_categories: int = 8
    direct_cut: bool = False
    policy: str = "deterministic"
    sequential: bool = False
    category_prior: str = "uniform"
    zipf_exponent: float = 1.2
    soft_fraction: float = 0.5
    motion_persistence: float = 0.45
    brightness_weights: List[float] = field(default_factory=lambda: [0.45, 0.35, 0.2])
    pan_velocity: int = 2
    zoom_rate: float = 0.02
    sample_rate: int = 8000
    max_duration_s: Optional[float] = 60.0
    enforce_filter_rules: bool = False
    distinct_types_threshold: int = 2
    max_same_type: int = 6
    write_media: bool = True
    seed: int = 0

    def validate(self):
        if self.n_videos < 1:
            raise ValueError("n_videos must be positive")
        if not 2 <= self.shots_min <= self.shots_max:
            raise ValueError("need 2 <= shots_min <= shots_max")
        if not 0 < self.shot_duration_min_s <= self.shot_duration_max_s:
            raise ValueError("invalid shot duration range")
        n_t = transition_frame_count(self.transition_duration_s, self.fps)
        if int(round(self.shot_duration_min_s * self.fps)) < 2 * n_t + 2:
            raise ValueError("shots too short for two transitions plus an uncontaminated segment")
        if self.fps <= 0 or self.height < 1 or self.width < 1:
            raise ValueError("fps and frame size must be positive")
        if len(self.brightness_weights) != len(BRIGHTNESS):
            raise ValueError(f"brightness_weights needs {len(BRIGHTNESS)} entries")
        return self

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown corpus config keys: {sorted(unknown)}")
        return cls(**d).validate()

    def to_dict(self):
        return asdict(self)

    def digest(self):
        return config_digest(self.to_dict())


def config_digest(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class SampleRecord:
    video_id: str
    shot_frames: List[int]
    shots: List[List[float]]  # uncontaminated [start_s, end_s] per shot
    annotations: List[Annotation]
    scene_specs: List[SceneSpec]
    audio: Dict
    duration_s: float
    fps: float
    media: Optional[str] = None
    split: Optional[str] = None

    @property
    def labels(self):
        return [a.label for a in self.annotations]

    def to_dict(self):
        return {
            "video_id": self.video_id,
            "shot_frames": list(self.shot_frames),
            "shots": [list(s) for s in self.shots],
            "annotations": [{"category_id": a.label, "start_s": a.start_s, "end_s": a.end_s}
                            for a in self.annotations],
            "scene_specs": [s.to_dict() for s in self.scene_specs],
            "audio": dict(self.audio),
            "duration_s": self.duration_s,
            "fps": self.fps,
            "media": self.media,
            "split": self.split,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            video_id=d["video_id"],
            shot_frames=list(d["shot_frames"]),
            shots=[list(s) for s in d["shots"]],
            annotations=[Annotation(a["category_id"], a["start_s"], a["end_s"]) for a in d["annotations"]],
            scene_specs=[SceneSpec.from_dict(s) for s in d["scene_specs"]],
            audio=dict(d["audio"]),
            duration_s=d["duration_s"],
            fps=d["fps"],
            media=d.get("media"),
            split=d.get("split"),
        )


@dataclass
class CorpusManifest:
    records: List[SampleRecord]
    category_count: int
    config_digest: str
    categories: List[str] = field(default_factory=list)
    direct_cut: bool = False
    config: Dict = field(default_factory=dict)

    def header(self):
        return {"kind": "header", "category_count": self.category_count, "categories": self.categories,
                "direct_cut": self.direct_cut, "config_digest": self.config_digest, "config": self.config}

    def with_records(self, records):
        return replace(self, records=list(records))

    def split(self, name):
        return [r for r in self.records if r.split == name]

    def dumps(self):
        lines = [json.dumps(self.header(), sort_keys=True)]
        lines += [json.dumps(r.to_dict(), sort_keys=True) for r in self.records]
        return "\n".join(lines) + "\n"

    def save(self, path):
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(self.dumps())
        os.replace(tmp, path)

    @classmethod
    def load(cls, path):
        lines = Path(path).read_text().splitlines()
        if not lines:
            raise ValueError(f"empty manifest {path}")
        head = json.loads(lines[0])
        if head.get("kind") != "header":
            raise ValueError(f"{path} does not start with a manifest header")
        records = [SampleRecord.from_dict(json.loads(l)) for l in lines[1:] if l.strip()]
        return cls(records, head["category_count"], head["config_digest"], head.get("categories", []),
                   head.get("direct_cut", False), head.get("config", {}))


def timeline(shot_frames, labels_are_cut, fps, n_t):
    """Uncontaminated shot bounds, annotation times and duration for a composed video.

    Mirrors ``fx.compose_edited_video`` without rendering any pixels.
    """
    consumed = [0 if cut else n_t for cut in labels_are_cut]
    bounds, spans = [], []
    cursor = 0
    for k, n in enumerate(shot_frames):
        head = consumed[k - 1] if k > 0 else 0
        tail = consumed[k] if k < len(consumed) else 0
        body = n - head - tail
        bounds.append([cursor / fps, (cursor + body) / fps])
        cursor += body
        if k < len(consumed):
            spans.append((cursor / fps, (cursor + consumed[k]) / fps))
            cursor += consumed[k]
    return bounds, spans, cursor / fps


def record_violations(record: SampleRecord, category_count: int, distinct_types_threshold: int = 2,
                      max_same_type: int = 6, max_duration_s: Optional[float] = 60.0) -> List[str]:
    """Names of the data-filtering rules ``record`` breaks (empty when it passes)."""
    labels = record.labels
    problems = []
    if not labels:
        problems.append("no transitions")
    if len(set(labels)) < distinct_types_threshold:
        problems.append("too few distinct types")
    if labels and max(Counter(labels).values()) > max_same_type:
        problems.append("type used too often")
    if max_duration_s is not None and record.duration_s > max_duration_s + 1e-9:
        problems.append("too long")
    if any(not 0 <= l < category_count for l in labels):
        problems.append("label outside registered categories")
    return problems


def _sample_video(cfg: CorpusConfig, index: int, attempt: int, categories):
    rng = np.random.default_rng([cfg.seed, index, attempt])
    n_shots = int(rng.integers(cfg.shots_min, cfg.shots_max + 1))
    lo = int(round(cfg.shot_duration_min_s * cfg.fps))
    hi = int(round(cfg.shot_duration_max_s * cfg.fps))
    shot_frames = [int(x) for x in rng.integers(lo, hi + 1, size=n_shots)]
    specs = []
    for k in range(n_shots):
        if k > 0 and rng.random() < cfg.motion_persistence:
            motion = specs[-1].motion
        else:
            motion = MOTIONS[int(rng.integers(len(MOTIONS)))]
        bright = BRIGHTNESS[int(rng.choice(len(BRIGHTNESS), p=np.asarray(cfg.brightness_weights) / sum(cfg.brightness_weights)))]
        specs.append(SceneSpec(motion, bright, int(rng.integers(2**31 - 1))))
    mood = "soft" if rng.random() < cfg.soft_fraction else "energetic"
    tempo = float(rng.uniform(60.0, 90.0) if mood == "soft" else rng.uniform(90.0, 150.0))
    audio_seed = int(rng.integers(2**31 - 1))
    label_seed = int(rng.integers(2**31 - 1))
    prior = category_prior(len(categories), cfg.category_prior, cfg.zipf_exponent)
    labels = sample_transition_labels(specs, mood, cfg.policy, label_seed, categories,
                                      cfg.sequential, prior=prior)
    n_t = transition_frame_count(cfg.transition_duration_s, cfg.fps)
    bounds, spans, duration = timeline(shot_frames, [c.is_cut for c in labels], cfg.fps, n_t)
    record = SampleRecord(
        video_id=f"v{index:05d}",
        shot_frames=shot_frames,
        shots=bounds,
        annotations=[Annotation(c.id, s, e) for c, (s, e) in zip(labels, spans)],
        scene_specs=specs,
        audio={"mood": mood, "tempo_bpm": tempo, "sample_rate": cfg.sample_rate, "seed": audio_seed},
        duration_s=duration,
        fps=cfg.fps,
    )
    return record, labels


def render_record(record: SampleRecord, cfg: CorpusConfig, categories):
    """Render the edited video described by ``record``."""
    shots = [generate_shot(spec, n / cfg.fps, cfg.fps, (cfg.height, cfg.width), cfg.pan_velocity, cfg.zoom_rate)
             for spec, n in zip(record.scene_specs, record.shot_frames)]
    a = record.audio
    audio = generate_audio(a["mood"], a["tempo_bpm"], record.duration_s, a["sample_rate"], a["seed"])
    labels = [categories[l] for l in record.labels]
    return compose_edited_video(shots, labels, audio, cfg.transition_duration_s)


def build_corpus(config: CorpusConfig, out_dir) -> CorpusManifest:
    """Generate, render and write a corpus under ``out_dir``; deterministic per seed."""
    cfg = config.validate()
    out_dir = Path(out_dir)
    categories = list_categories(cfg.n_categories, cfg.direct_cut)
    created_dir = not out_dir.exists()
    media_dir = out_dir / MEDIA_DIR
    written: List[Path] = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        records = []
        for i in range(cfg.n_videos):
            for attempt in range(1000):
                record, _ = _sample_video(cfg, i, attempt, categories)
                if cfg.max_duration_s is not None and record.duration_s > cfg.max_duration_s:
                    continue
                if cfg.enforce_filter_rules and record_violations(
                        record, len(categories), cfg.distinct_types_threshold, cfg.max_same_type,
                        cfg.max_duration_s):
                    continue
                break
            else:
                raise RuntimeError(f"could not sample a valid video {i} after 1000 attempts")
            if cfg.write_media:
                video = render_record(record, cfg, categories)
                side = save_edited_video(video, media_dir, record.video_id)
                written += [side, side.with_suffix(".npz")]
                record.media = f"{MEDIA_DIR}/{record.video_id}"
            records.append(record)
        manifest = CorpusManifest(records, len(categories), cfg.digest(), [c.name for c in categories],
                                  cfg.direct_cut, cfg.to_dict())
        (out_dir / "config.yaml").write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=True))
        manifest.save(out_dir / MANIFEST_NAME)
        return manifest
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        if created_dir:
            shutil.rmtree(out_dir, ignore_errors=True)
        raise


def filter_corpus(manifest: CorpusManifest, distinct_types_threshold: int = 2, max_same_type: int = 6,
                  max_duration_s: Optional[float] = 60.0) -> CorpusManifest:
    """Keep only records that satisfy every data-filtering rule."""
    kept = [r for r in manifest.records
            if not record_violations(r, manifest.category_count, distinct_types_threshold,
                                     max_same_type, max_duration_s)]
    return manifest.with_records(kept)


def split_corpus(manifest: CorpusManifest, test_fraction: float, seed: int = 0) -> CorpusManifest:
    """Assign every record to ``train`` or ``test``; ``round(n * test_fraction)`` go to test."""
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    n = len(manifest.records)
    n_test = int(round(n * test_fraction))
    order = np.random.default_rng(seed).permutation(n)
    test_idx = set(int(i) for i in order[:n_test])
    records = [replace(r, split="test" if i in test_idx else "train") for i, r in enumerate(manifest.records)]
    return manifest.with_records(records)


def corpus_stats(manifest: CorpusManifest) -> Dict:
    """Per-split video/transition counts, transitions per video, mean length and label histogram."""
    if not manifest.records:
        raise ValueError("cannot compute statistics of an empty manifest")
    groups = {"all": manifest.records}
    for name in ("train", "test"):
        recs = manifest.split(name)
        if recs:
            groups[name] = recs
    stats = {}
    for name, recs in groups.items():
        labels = [l for r in recs for l in r.labels]
        hist = Counter(labels)
        stats[name] = {
            "videos": len(recs),
            "transitions": len(labels),
            "transitions_per_video": len(labels) / len(recs),
            "average_length_s": float(np.mean([r.duration_s for r in recs])),
            "histogram": {int(k): int(hist.get(k, 0)) for k in range(manifest.category_count)},
        }
    return stats


def format_stats(stats: Dict, categories: Optional[List[str]] = None) -> str:
    cols = [c for c in ("train", "test", "all") if c in stats]
    rows = [("Number of videos", "videos", "{:d}"), ("Number of transitions", "transitions", "{:d}"),
            ("Transitions per video", "transitions_per_video", "{:.3f}"),
            ("Average video length", "average_length_s", "{:.2f} secs")]
    width = 24
    out = ["Dataset".ljust(width) + "".join(c.rjust(14) for c in cols)]
    for title, key, fmt in rows:
        out.append(title.ljust(width) + "".join(fmt.format(stats[c][key]).rjust(14) for c in cols))
    out.append("")
    out.append("Label histogram (all)")
    for k, v in stats["all"]["histogram"].items():
        name = categories[k] if categories and k < len(categories) else str(k)
        out.append(f"  {k:3d} {name:<24s} {v}")
    return "\n".join(out) + "\n"


def load_config(path) -> CorpusConfig:
    data = yaml.safe_load(Path(path).read_text()) or {}
    return CorpusConfig.from_dict(data.get("corpus", data))
