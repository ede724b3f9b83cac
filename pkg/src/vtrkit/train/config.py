from dataclasses import asdict, dataclass, fields
from typing import Optional


@dataclass
class TrainConfig:
    """Optimisation settings shared by both training stages.

    The learning rate ramps linearly from ``warmup_start_lr`` to ``initial_lr``
    over ``warmup_epochs``, then drops by ``lr_decay_factor`` every
    ``lr_decay_every_epochs`` epochs counted from the end of warmup.
    """
    margin: float = 0.3
    batch_size: int = 16
    epochs: int = 30
    warmup_epochs: int = 0
    warmup_start_lr: float = 1e-6
    initial_lr: float = 1e-5
    lr_decay_factor: float = 0.1
    lr_decay_every_epochs: int = 10
    weight_decay: float = 0.0
    grad_clip: Optional[float] = None
    literal_triplet: bool = False
    seed: int = 0

    def validate(self):
        if not self.margin > 0:
            raise ValueError("margin must be positive")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be positive")
        if self.warmup_epochs < 0:
            raise ValueError("warmup_epochs must be non-negative")
        if not (self.initial_lr > 0 and self.warmup_start_lr > 0 and self.lr_decay_factor > 0
                and self.lr_decay_every_epochs > 0):
            raise ValueError("learning-rate schedule parameters must be positive")
        return self

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown train config keys: {sorted(unknown)}")
        return cls(**d).validate()


def learning_rate(config: TrainConfig, epoch: int) -> float:
    """Learning rate used throughout 0-based ``epoch``."""
    if epoch < config.warmup_epochs:
        frac = epoch / config.warmup_epochs
        return config.warmup_start_lr + (config.initial_lr - config.warmup_start_lr) * frac
    steps = (epoch - config.warmup_epochs) // config.lr_decay_every_epochs
    return config.initial_lr * config.lr_decay_factor ** steps


def train_preset(scale: str, stage: str, **overrides) -> TrainConfig:
    """Schedules for ``stage`` in {"pretrain", "recommender"} at ``scale`` in {"desk", "paper"}."""
    table = {
        ("paper", "pretrain"): dict(epochs=30, warmup_epochs=5, warmup_start_lr=1e-6, initial_lr=1e-3,
                                    lr_decay_factor=0.1, lr_decay_every_epochs=10, batch_size=256),
        ("paper", "recommender"): dict(epochs=30, warmup_epochs=0, initial_lr=1e-5, lr_decay_factor=0.1,
                                       lr_decay_every_epochs=10, batch_size=32),
        ("desk", "pretrain"): dict(epochs=15, warmup_epochs=5, warmup_start_lr=1e-6, initial_lr=1e-3,
                                   lr_decay_factor=0.1, lr_decay_every_epochs=10, batch_size=32),
        ("desk", "recommender"): dict(epochs=30, warmup_epochs=0, initial_lr=1e-3, lr_decay_factor=0.1,
                                      lr_decay_every_epochs=22, batch_size=16),
    }
    try:
        base = dict(table[(scale, stage)])
    except KeyError:
        raise ValueError(f"no train preset for scale={scale!r}, stage={stage!r}") from None
    base.update(overrides)
    return TrainConfig(**base).validate()
