import json
from dataclasses import asdict, dataclass, field
from typing import Dict, List


@dataclass
class LossReport:
    """Loss, learning-rate and gradient-norm traces of one training run."""
    step_losses: List[float] = field(default_factory=list)
    epoch_losses: List[float] = field(default_factory=list)
    grad_norms: List[float] = field(default_factory=list)
    learning_rates: List[float] = field(default_factory=list)
    epoch_metrics: List[Dict] = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    def write_jsonl(self, path):
        """One JSON object per epoch: loss, lr, mean grad-norm and any logged metrics."""
        steps_per_epoch = len(self.step_losses) // max(1, len(self.epoch_losses))
        with open(path, "w") as fh:
            for e, loss in enumerate(self.epoch_losses):
                norms = self.grad_norms[e * steps_per_epoch:(e + 1) * steps_per_epoch]
                row = {"epoch": e, "loss": loss, "lr": self.learning_rates[e],
                       "grad_norm": sum(norms) / len(norms) if norms else None}
                if e < len(self.epoch_metrics):
                    row.update(self.epoch_metrics[e])
                fh.write(json.dumps(row, sort_keys=True) + "\n")
