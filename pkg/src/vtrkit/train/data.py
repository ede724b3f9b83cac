"""Turn a corpus into training tensors.

Each video becomes a :class:`VideoSample`: per shot ``n_frames`` uint8 frames
sampled uniformly over the shot's uncontaminated segment plus a one-second
audio window, and one label per boundary. Frames stay uint8 in memory.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import torch

from ..fx.io import load_edited_video, quantize
from ..model.config import ModelConfig
from ..model.encoders import audio_window, sample_frame_indices
from ..model.classifier import sample_clip
from ..model.recommender import ShotBatch
from ..synthgen.corpus import SampleRecord


@dataclass
class VideoSample:
    video_id: str
    visual: np.ndarray  # (S, n, H, W, 3) uint8
    audio: np.ndarray  # (S, L) float32, one window per shot (or per boundary, last slot empty)
    labels: np.ndarray  # (S - 1,) int64
    first_index: int = 0  # index of this sample's boundary 0 in the source video

    @property
    def n_shots(self):
        return len(self.visual)


def load_record_video(corpus_dir, record: SampleRecord):
    if not record.media:
        raise ValueError(f"record {record.video_id} has no rendered media")
    path = Path(corpus_dir) / record.media
    return load_edited_video(path.parent, path.name)


def _anchor(seg_start, seg_end, how):
    if how == "start":
        return seg_start
    if how == "end":
        return seg_end
    return 0.5 * (seg_start + seg_end)


def video_sample(video, video_id, config: ModelConfig) -> VideoSample:
    """Sample tokens' raw inputs from a loaded edited video, truncated to ``max_shots`` shots."""
    segments = video.shot_segments[:config.max_shots]
    if len(segments) < 2:
        raise ValueError(f"video {video_id} has fewer than two shots")
    if video.audio is None:
        raise ValueError(f"video {video_id} has no audio track")
    frames, audio = [], []
    for seg in segments:
        idx = sample_frame_indices(len(seg.frames), config.n_frames)
        frames.append(quantize(seg.frames[idx]))
    samples, sr = video.audio.samples, video.audio.sample_rate
    anns = video.annotations[:len(segments) - 1]
    if config.audio_token == "per_boundary":
        for a in anns:
            audio.append(audio_window(samples, sr, 0.5 * (a.start_s + a.end_s), config.audio_window_s))
        audio.append(np.zeros_like(audio[0]))
    else:
        for seg in segments:
            t = min(_anchor(seg.start_s, seg.end_s, config.audio_anchor), len(samples) / sr)
            audio.append(audio_window(samples, sr, t, config.audio_window_s))
    labels = np.array([a.label for a in anns], dtype=np.int64)
    return VideoSample(video_id, np.stack(frames), np.stack(audio).astype(np.float32), labels)


def load_video_samples(corpus_dir, records: Sequence[SampleRecord], config: ModelConfig) -> List[VideoSample]:
    return [video_sample(load_record_video(corpus_dir, r), r.video_id, config) for r in records]


def isolate_pairs(samples: Sequence[VideoSample], per_boundary=False) -> List[VideoSample]:
    """Split every video into 2-shot sequences, one per boundary (context off)."""
    out = []
    for s in samples:
        for k in range(s.n_shots - 1):
            audio = s.audio[k:k + 2].copy()
            if per_boundary:
                audio[1] = 0.0
            out.append(VideoSample(s.video_id, s.visual[k:k + 2], audio, s.labels[k:k + 1], s.first_index + k))
    return out


def _pad_stack(arrays, length):
    first = arrays[0]
    out = torch.zeros((len(arrays), length) + tuple(first.shape[1:]), dtype=first.dtype)
    for i, a in enumerate(arrays):
        out[i, :len(a)] = a
    return out


def collate(samples: Sequence[VideoSample], pad_to: Optional[int] = None, visual=None, audio=None,
            visual_cached=False, audio_cached=False, per_boundary=False) -> ShotBatch:
    """Pad a list of samples into one :class:`ShotBatch`.

    ``visual``/``audio`` may supply per-sample precomputed tensors (frozen-prefix
    caches) in place of the raw arrays.
    """
    if not samples:
        raise ValueError("cannot collate an empty list of samples")
    S = max(s.n_shots for s in samples)
    if pad_to is not None:
        if pad_to < S:
            raise ValueError(f"pad_to={pad_to} is shorter than the longest sequence ({S})")
        S = pad_to
    if visual is None:
        visual = [torch.from_numpy(s.visual) for s in samples]
    if audio is None:
        audio = [torch.from_numpy(s.audio) for s in samples]
    shot_mask = torch.zeros(len(samples), S, dtype=torch.bool)
    for i, s in enumerate(samples):
        shot_mask[i, :s.n_shots] = True
    audio_mask = shot_mask.clone()
    if per_boundary:
        for i, s in enumerate(samples):
            audio_mask[i, s.n_shots - 1] = False
    pairs, labels, prov = [], [], []
    for i, s in enumerate(samples):
        for k, c in enumerate(s.labels):
            pairs.append((i, k))
            labels.append(int(c))
            prov.append((s.video_id, s.first_index + k))
    return ShotBatch(shot_mask=shot_mask, transitions=torch.tensor(pairs, dtype=torch.long),
                     labels=torch.tensor(labels, dtype=torch.long), visual=_pad_stack(visual, S),
                     audio=_pad_stack(audio, S), audio_mask=audio_mask, visual_cached=visual_cached,
                     audio_cached=audio_cached, provenance=prov)


def transition_clip_dataset(corpus_dir, records: Sequence[SampleRecord], clip_frames: int):
    """All transition clips of ``records`` as ``(uint8 (M, n, H, W, 3), labels (M,), provenance)``."""
    clips, labels, prov = [], [], []
    for r in records:
        video = load_record_video(corpus_dir, r)
        for k, clip in enumerate(video.clips):
            clips.append(quantize(sample_clip(clip.frames, clip_frames)))
            labels.append(clip.label)
            prov.append((r.video_id, k))
    if not clips:
        raise ValueError("no transition clips in the given records")
    return np.stack(clips), np.array(labels, dtype=np.int64), prov


def raw_shots_sample(shots: Sequence[np.ndarray], audio_samples, sample_rate, fps, config: ModelConfig,
                     video_id="input") -> VideoSample:
    """A sample built from unedited shots laid end to end, with one audio track spanning them.

    Each shot is used whole as its own uncontaminated segment; boundary ``k``
    sits at the end of shot ``k``. Labels are unknown and set to ``-1``.
    """
    if len(shots) < 2:
        raise ValueError("need at least two shots to recommend a transition")
    size = config.frame_size
    frames, audio = [], []
    bounds, cursor = [], 0.0
    for i, shot in enumerate(shots[:config.max_shots]):
        shot = np.asarray(shot)
        if shot.ndim != 4 or shot.shape[1:] != (size, size, 3):
            raise ValueError(f"shot {i} has shape {shot.shape}; expected (T, {size}, {size}, 3)")
        picked = shot[sample_frame_indices(len(shot), config.n_frames)]
        frames.append(picked if picked.dtype == np.uint8 else quantize(picked))
        bounds.append((cursor, cursor + len(shot) / fps))
        cursor += len(shot) / fps
    samples = np.asarray(audio_samples, dtype=np.float32)
    end = len(samples) / sample_rate
    if config.audio_token == "per_boundary":
        for _, b in bounds[:-1]:
            audio.append(audio_window(samples, sample_rate, min(b, end), config.audio_window_s))
        audio.append(np.zeros_like(audio[0]))
    else:
        for a, b in bounds:
            t = min(_anchor(a, b, config.audio_anchor), end)
            audio.append(audio_window(samples, sample_rate, t, config.audio_window_s))
    labels = -np.ones(len(frames) - 1, dtype=np.int64)
    return VideoSample(video_id, np.stack(frames), np.stack(audio), labels)
