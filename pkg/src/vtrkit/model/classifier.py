"""Transition classification network used to learn the transition embedding."""
import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from .config import ModelConfig
from .encoders import VisualEncoder, sample_frame_indices


class TransitionClassifier(nn.Module):
    """Backbone -> linear -> L2 normalisation (the embedding) -> linear (the logits)."""

    def __init__(self, config: ModelConfig, n_categories=None):
        super().__init__()
        self.config = config
        self.n_categories = n_categories or config.n_categories
        self.backbone = VisualEncoder(config.visual_channels, config.d_visual)
        self.embed = nn.Linear(config.d_visual, config.d_transition)
        self.classify = nn.Linear(config.d_transition, self.n_categories)

    def forward(self, clips):
        """``clips``: ``(B, T, H, W, 3)``. Returns ``(unit embeddings, logits)``."""
        emb = F.normalize(self.embed(self.backbone(clips)), dim=-1)
        return emb, self.classify(emb)


def sample_clip(frames, n_frames):
    """Uniformly sample ``n_frames`` from a transition clip's frames."""
    frames = np.asarray(frames)
    if len(frames) < 2:
        raise ValueError(f"transition clip has {len(frames)} frame(s); at least 2 are needed")
    return frames[sample_frame_indices(len(frames), n_frames)]


def classifier_forward(model: TransitionClassifier, clip_frames):
    """Embedding and logits of a single clip (``(T, H, W, 3)`` frames of any length >= 2)."""
    x = torch.as_tensor(sample_clip(clip_frames, model.config.clip_frames)).unsqueeze(0)
    if x.dtype != torch.uint8:
        x = x.float()
    emb, logits = model(x)
    return emb[0], logits[0]
