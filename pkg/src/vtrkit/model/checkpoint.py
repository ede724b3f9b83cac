"""Versioned checkpoint files: parameters plus the model config and its digest."""
import hashlib
import json
import os
from pathlib import Path

import torch

from .config import ModelConfig

FORMAT_VERSION = 1
KINDS = ("classifier", "recommender", "baseline", "oracle")


def model_config_digest(config: ModelConfig):
    blob = json.dumps(config.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def save_checkpoint(path, kind, config: ModelConfig, state_dict, extra=None):
    """Write atomically (temporary file + rename) so readers never see a partial file."""
    if kind not in KINDS:
        raise ValueError(f"unknown checkpoint kind {kind!r}")
    path = Path(path)
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "model_config": config.to_dict(),
        "config_digest": model_config_digest(config),
        "state_dict": state_dict,
        "extra": extra or {},
    }
    tmp = path.with_name(path.name + ".tmp")
    torch.save(payload, tmp)
    os.replace(tmp, path)
    return path


def load_checkpoint(path):
    payload = torch.load(Path(path), map_location="cpu", weights_only=False)
    if not isinstance(payload, dict) or payload.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"{path} is not a version-{FORMAT_VERSION} checkpoint")
    config = ModelConfig.from_dict(payload["model_config"])
    if model_config_digest(config) != payload["config_digest"]:
        raise ValueError(f"{path}: config digest mismatch")
    payload["model_config"] = config
    return payload
