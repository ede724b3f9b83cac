from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

FREEZE_POLICIES = ("all", "early", "none")
MODALITIES = ("visual", "audio")


@dataclass
class ModelConfig:
    """Dimensions and switches of the encoders, transformer and matching head.

    ``d_transition`` is the width of the pre-trained transition embedding and of
    the pooled query; both are linearly mapped to ``d_matching`` before scoring
    unless ``use_projection`` is off, in which case the two widths must match.
    """
    n_categories: int = 8
    n_frames: int = 8
    clip_frames: int = 8
    frame_size: int = 64
    visual_channels: List[int] = field(default_factory=lambda: [16, 32, 64])
    d_visual: int = 64
    d_audio: int = 100
    d_model: int = 128
    n_head: int = 4
    n_layers: int = 2
    dim_feedforward: int = 256
    dropout: float = 0.1
    d_matching: int = 64
    d_transition: Optional[int] = None
    max_transitions: int = 8
    freeze_stages: str = "early"
    audio_freeze_stages: str = "none"
    modalities: List[str] = field(default_factory=lambda: ["visual", "audio"])
    use_projection: bool = True
    sample_rate: int = 8000
    n_mels: int = 40
    audio_window_s: float = 1.0
    audio_anchor: str = "center"
    audio_token: str = "per_shot"

    def __post_init__(self):
        if self.d_transition is None:
            self.d_transition = self.d_matching

    def validate(self):
        if self.d_model % self.n_head:
            raise ValueError(f"d_model={self.d_model} is not divisible by n_head={self.n_head}")
        if self.max_transitions < 1:
            raise ValueError("max_transitions must be at least 1")
        for name in ("n_frames", "clip_frames", "frame_size", "d_visual", "d_audio", "d_model",
                     "n_layers", "d_matching", "d_transition", "n_categories"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.freeze_stages not in FREEZE_POLICIES or self.audio_freeze_stages not in FREEZE_POLICIES:
            raise ValueError(f"freeze policy must be one of {FREEZE_POLICIES}")
        mods = list(self.modalities)
        if not mods or any(m not in MODALITIES for m in mods) or len(set(mods)) != len(mods):
            raise ValueError(f"modalities must be a non-empty subset of {MODALITIES}")
        if not self.use_projection and self.d_matching != self.d_transition:
            raise ValueError("without projection d_matching must equal d_transition")
        if self.audio_anchor not in ("center", "start", "end"):
            raise ValueError("audio_anchor must be center, start or end")
        if self.audio_token not in ("per_shot", "per_boundary"):
            raise ValueError("audio_token must be per_shot or per_boundary")
        return self

    @property
    def max_shots(self):
        return self.max_transitions + 1

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**d).validate()
