"""Lightweight visual and audio backbones.

Both are three-stage networks so that stage-wise freezing can be expressed;
the output of the frozen prefix can be cached and reused across epochs.
"""
import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from .config import ModelConfig

_FROZEN_STAGES = {"all": 3, "early": 1, "none": 0}


def frozen_stage_count(policy):
    return _FROZEN_STAGES[policy]


class _StagedEncoder(nn.Module):
    """Three stages between a fixed ``prepare`` front end and a pooling head.

    ``cache(raw)`` runs the front end and the frozen stages once without
    gradients; ``forward_cached`` finishes the computation from there, which
    equals ``forward(raw)``.
    """
    stages: nn.ModuleList
    head: nn.Module

    def freeze(self, policy):
        n = frozen_stage_count(policy)
        for i, stage in enumerate(self.stages):
            for p in stage.parameters():
                p.requires_grad_(i >= n)
        for p in self.head.parameters():
            p.requires_grad_(n < len(self.stages))
        self.frozen_stages = n
        return self

    def prepare(self, raw):
        raise NotImplementedError

    def pool(self, x):
        raise NotImplementedError

    def forward(self, raw):
        x = self.prepare(raw)
        for stage in self.stages:
            x = stage(x)
        return self.head(self.pool(x))

    @torch.no_grad()
    def cache(self, raw):
        x = self.prepare(raw)
        for stage in self.stages[:self.frozen_stages]:
            x = stage(x)
        return x

    def forward_cached(self, x):
        for stage in self.stages[self.frozen_stages:]:
            x = stage(x)
        return self.head(self.pool(x))


class VisualEncoder(_StagedEncoder):
    """Spatio-temporal conv stack; input ``(B, T, H, W, 3)`` in [0, 1] (or uint8).

    The head sees a coarse ``grid`` of pooled cells rather than one global
    mean, so where and when something happens in the frame survives pooling.
    """

    def __init__(self, channels=(16, 32, 64), d_out=64, grid=(2, 2, 2)):
        super().__init__()
        c1, c2, c3 = channels
        self.stages = nn.ModuleList([
            nn.Sequential(nn.Conv3d(3, c1, (3, 4, 4), stride=(1, 4, 4), padding=(1, 0, 0)), nn.ReLU()),
            nn.Sequential(nn.Conv3d(c1, c2, 3, stride=(1, 2, 2), padding=1), nn.GroupNorm(4, c2), nn.ReLU()),
            nn.Sequential(nn.Conv3d(c2, c3, 3, stride=(2, 2, 2), padding=1), nn.GroupNorm(4, c3), nn.ReLU()),
        ])
        self.grid = tuple(grid)
        self.head = nn.Linear(c3 * int(np.prod(self.grid)), d_out)
        self.d_out = d_out
        self.frozen_stages = 0

    def prepare(self, frames):
        if frames.dtype == torch.uint8:
            frames = frames.float() / 255.0
        return frames.permute(0, 4, 1, 2, 3) - 0.5

    def pool(self, x):
        return F.adaptive_avg_pool3d(x, self.grid).flatten(1)


def mel_filterbank(sample_rate, n_fft, n_mels, f_min=0.0, f_max=None):
    """Triangular HTK-style mel filters, shape ``(n_mels, n_fft // 2 + 1)``."""
    f_max = sample_rate / 2 if f_max is None else f_max

    def hz_to_mel(f):
        return 2595.0 * np.log10(1.0 + f / 700.0)

    def mel_to_hz(m):
        return 700.0 * (10 ** (m / 2595.0) - 1.0)

    freqs = np.linspace(0, sample_rate / 2, n_fft // 2 + 1)
    edges = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2))
    fb = np.zeros((n_mels, len(freqs)))
    for i in range(n_mels):
        lo, mid, hi = edges[i], edges[i + 1], edges[i + 2]
        up = (freqs - lo) / max(mid - lo, 1e-9)
        down = (hi - freqs) / max(hi - mid, 1e-9)
        fb[i] = np.maximum(0.0, np.minimum(up, down))
    return fb.astype(np.float32)


class AudioEncoder(_StagedEncoder):
    """Log-mel front end followed by a 1-D conv stack; input ``(B, L)`` waveforms."""

    def __init__(self, sample_rate=8000, n_mels=40, d_out=100, channels=(64, 64, 128)):
        super().__init__()
        self.n_fft = 256
        self.hop = max(1, sample_rate // 100)
        self.register_buffer("window", torch.hann_window(self.n_fft), persistent=False)
        self.register_buffer("mel", torch.from_numpy(mel_filterbank(sample_rate, self.n_fft, n_mels)),
                             persistent=False)
        c1, c2, c3 = channels
        self.stages = nn.ModuleList([
            nn.Sequential(nn.Conv1d(n_mels, c1, 3, padding=1), nn.ReLU()),
            nn.Sequential(nn.Conv1d(c1, c2, 3, stride=2, padding=1), nn.GroupNorm(4, c2), nn.ReLU()),
            nn.Sequential(nn.Conv1d(c2, c3, 3, stride=2, padding=1), nn.GroupNorm(4, c3), nn.ReLU()),
        ])
        self.head = nn.Linear(2 * c3, d_out)
        self.d_out = d_out
        self.frozen_stages = 0

    def prepare(self, wave):
        spec = torch.stft(wave, self.n_fft, self.hop, window=self.window, center=True, return_complex=True)
        return torch.log(self.mel @ (spec.abs() ** 2) + 1e-6)

    def pool(self, x):
        return torch.cat([x.mean(dim=-1), x.amax(dim=-1)], dim=-1)


def audio_window(samples, sample_rate, t_center_s, window_s=1.0):
    """Samples in ``[t - window/2, t + window/2]``, zero-padded past the track ends."""
    duration = len(samples) / sample_rate
    if not 0.0 <= t_center_s <= duration + 1e-9:
        raise ValueError(f"time {t_center_s:.3f}s lies outside the {duration:.3f}s track")
    n = int(round(window_s * sample_rate))
    start = int(round((t_center_s - window_s / 2) * sample_rate))
    out = np.zeros(n, dtype=np.float32)
    lo, hi = max(0, start), min(len(samples), start + n)
    if hi > lo:
        out[lo - start:hi - start] = samples[lo:hi]
    return out


def sample_frame_indices(n_available, n):
    """``n`` indices spread uniformly over ``n_available`` frames (repeats allowed)."""
    if n_available < 1:
        raise ValueError("no frames to sample from")
    return np.rint(np.linspace(0, n_available - 1, n)).astype(int)


def encode_visual_shot(encoder: VisualEncoder, frames, config: ModelConfig):
    """Feature of one stack of ``config.n_frames`` sampled frames."""
    frames = torch.as_tensor(np.asarray(frames))
    expected = (config.n_frames, config.frame_size, config.frame_size, 3)
    if tuple(frames.shape) != expected:
        raise ValueError(f"expected frames of shape {expected}, got {tuple(frames.shape)}")
    return encoder(frames.float().unsqueeze(0))[0]


def encode_audio_point(encoder: AudioEncoder, audio, t_center_s, window_s=1.0):
    wave = audio_window(audio.samples, audio.sample_rate, t_center_s, window_s)
    return encoder(torch.from_numpy(wave).unsqueeze(0))[0]
