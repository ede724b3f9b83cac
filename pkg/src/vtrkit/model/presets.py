"""Scale presets. ``desk`` runs in minutes on a CPU; ``paper`` holds the full-scale constants."""
from .config import ModelConfig

PRESETS = ("desk", "paper")


def model_preset(name, **overrides) -> ModelConfig:
    if name == "desk":
        base = dict(n_categories=8, n_frames=8, clip_frames=8, frame_size=64, d_model=128, n_head=4,
                    n_layers=2, dim_feedforward=256, d_matching=64, max_transitions=8, d_audio=100)
    elif name == "paper":
        base = dict(n_categories=30, n_frames=16, clip_frames=16, frame_size=224,
                    visual_channels=[64, 128, 256], d_visual=256, d_model=2048, n_head=8, n_layers=2,
                    dim_feedforward=2048, d_matching=2048, max_transitions=8, d_audio=100)
    else:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
    base.update(overrides)
    return ModelConfig(**base).validate()
