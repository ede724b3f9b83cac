"""Shots, transition clips and edited-video composition.

Timeline convention: a transition of ``n = round(duration_s * fps)`` frames
blends the last ``n`` frames of the outgoing shot with the first ``n`` frames
of the incoming shot, so each adjacent shot gives up ``n`` frames and the
edited video is ``n`` frames shorter than the shots laid end to end. A direct
cut occupies no timeline frames; its training clip is the ``window`` frames on
either side of the cut.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .blend import blend_frame
from .taxonomy import TransitionCategory

DEFAULT_TRANSITION_S = 0.5
CUT_WINDOW = 4


@dataclass
class Shot:
    frames: np.ndarray  # (T, H, W, 3) float32 in [0, 1]
    fps: float

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float32)
        if self.frames.ndim != 4 or self.frames.shape[-1] != 3:
            raise ValueError(f"shot frames must be (T, H, W, 3), got {self.frames.shape}")
        if len(self.frames) < 2:
            raise ValueError("a shot needs at least 2 frames")
        if self.fps <= 0:
            raise ValueError("fps must be positive")

    @property
    def duration_s(self):
        return len(self.frames) / self.fps

    @property
    def dims(self):
        return self.frames.shape[1:3]


@dataclass
class TransitionClip:
    frames: np.ndarray
    label: int
    start_s: float = 0.0
    end_s: float = 0.0

    @property
    def duration_s(self):
        return self.end_s - self.start_s

    @property
    def in_timeline(self):
        return self.end_s > self.start_s


@dataclass
class ShotSegment:
    """The uncontaminated part of a shot inside an edited video."""
    frames: np.ndarray
    start_s: float
    end_s: float
    shot_index: int


class Annotation(NamedTuple):
    label: int
    start_s: float
    end_s: float


@dataclass
class EditedVideo:
    segments: List[Any]  # ShotSegment, TransitionClip, ShotSegment, ...
    fps: float
    audio: Any = None
    annotations: List[Annotation] = field(default_factory=list)

    @cached_property
    def frames(self):
        parts = [s.frames for s in self.segments
                 if isinstance(s, ShotSegment) or s.in_timeline]
        return np.concatenate(parts, axis=0)

    @property
    def shot_segments(self):
        return [s for s in self.segments if isinstance(s, ShotSegment)]

    @property
    def clips(self):
        return [s for s in self.segments if isinstance(s, TransitionClip)]

    @property
    def duration_s(self):
        return len(self.frames) / self.fps

    @classmethod
    def from_timeline(cls, frames, fps, annotations, audio=None, cut_window=CUT_WINDOW):
        """Rebuild segments from a flat frame array and its annotations."""
        frames = np.asarray(frames, dtype=np.float32)
        anns = [Annotation(int(l), float(s), float(e)) for l, s, e in annotations]
        spans = _frame_spans(anns, fps, len(frames))
        segments: List[Any] = []
        cursor = 0
        for k, (ann, (i0, i1)) in enumerate(zip(anns, spans)):
            segments.append(ShotSegment(frames[cursor:i0], cursor / fps, i0 / fps, k))
            if i1 > i0:
                clip_frames = frames[i0:i1]
            else:
                clip_frames = frames[max(0, i0 - cut_window):i0 + cut_window]
            segments.append(TransitionClip(clip_frames, ann.label, ann.start_s, ann.end_s))
            cursor = i1
        segments.append(ShotSegment(frames[cursor:], cursor / fps, len(frames) / fps, len(anns)))
        video = cls(segments, fps, audio, anns)
        video.__dict__["frames"] = frames
        return video


def _frame_spans(annotations, fps, n_frames):
    spans = []
    prev_end = 0
    for ann in annotations:
        i0 = int(round(ann.start_s * fps))
        i1 = int(round(ann.end_s * fps))
        if i1 < i0:
            raise ValueError(f"annotation ends before it starts: {ann}")
        if i0 < prev_end:
            raise ValueError(f"overlapping transition annotations near {ann.start_s:.3f}s")
        if i1 > n_frames:
            raise ValueError(f"annotation {ann} extends past the end of the video")
        spans.append((i0, i1))
        prev_end = i1
    return spans


def _check_compatible(shot_a: Shot, shot_b: Shot):
    if shot_a.frames.shape[1:] != shot_b.frames.shape[1:]:
        raise ValueError("shots differ in frame dimensions")
    if shot_a.fps != shot_b.fps:
        raise ValueError("shots differ in fps")


def transition_frame_count(duration_s, fps):
    return int(round(duration_s * fps))


def render_transition(shot_a: Shot, shot_b: Shot, category: TransitionCategory,
                      duration_s: float = DEFAULT_TRANSITION_S, cut_window: int = CUT_WINDOW) -> TransitionClip:
    """Blend the tail of ``shot_a`` into the head of ``shot_b``.

    Progress advances linearly from 0 on the first clip frame to 1 on the last.
    For a direct cut the clip is ``cut_window`` tail frames of ``shot_a``
    followed by ``cut_window`` head frames of ``shot_b`` and has zero
    annotated duration.
    """
    _check_compatible(shot_a, shot_b)
    if category.is_cut:
        w = int(category.params.get("window", cut_window))
        if len(shot_a.frames) < w or len(shot_b.frames) < w:
            raise ValueError(f"direct cut needs {w} frames on each side")
        frames = np.concatenate([shot_a.frames[-w:], shot_b.frames[:w]], axis=0)
        return TransitionClip(frames, category.id, 0.0, 0.0)
    eps = 1e-9
    if duration_s > min(shot_a.duration_s, shot_b.duration_s) + eps:
        raise ValueError(f"transition of {duration_s}s exceeds a shot "
                         f"({shot_a.duration_s:.3f}s, {shot_b.duration_s:.3f}s)")
    n = transition_frame_count(duration_s, shot_a.fps)
    if n < 2:
        raise ValueError(f"transition of {duration_s}s at {shot_a.fps} fps spans fewer than 2 frames")
    tail = shot_a.frames[len(shot_a.frames) - n:]
    frames = np.stack([blend_frame(tail[j], shot_b.frames[j], category, j / (n - 1)) for j in range(n)])
    return TransitionClip(frames, category.id, 0.0, n / shot_a.fps)


def compose_edited_video(shots: Sequence[Shot], labels: Sequence[TransitionCategory], audio=None,
                         transition_duration_s: float = DEFAULT_TRANSITION_S) -> EditedVideo:
    """Join ``shots`` with one transition per boundary into an edited video."""
    if len(shots) < 1:
        raise ValueError("need at least one shot")
    if len(labels) != len(shots) - 1:
        raise ValueError(f"{len(shots)} shots need {len(shots) - 1} labels, got {len(labels)}")
    for s in shots[1:]:
        _check_compatible(shots[0], s)
    fps = shots[0].fps
    clips = [render_transition(shots[k], shots[k + 1], labels[k], transition_duration_s)
             for k in range(len(labels))]
    consumed = [int(round(c.duration_s * fps)) for c in clips]

    segments: List[Any] = []
    annotations: List[Annotation] = []
    cursor = 0
    for k, shot in enumerate(shots):
        head = consumed[k - 1] if k > 0 else 0
        tail = consumed[k] if k < len(clips) else 0
        body = shot.frames[head:len(shot.frames) - tail]
        if len(body) < 1:
            raise ValueError(f"shot {k} is fully consumed by its transitions")
        segments.append(ShotSegment(body, cursor / fps, (cursor + len(body)) / fps, k))
        cursor += len(body)
        if k < len(clips):
            clip = clips[k]
            n = consumed[k]
            clip.start_s, clip.end_s = cursor / fps, (cursor + n) / fps
            annotations.append(Annotation(clip.label, clip.start_s, clip.end_s))
            segments.append(clip)
            cursor += n
    return EditedVideo(segments, fps, audio, annotations)


def extract_uncontaminated_segments(video: EditedVideo) -> List[Tuple[ShotSegment, Tuple[Optional[int], Optional[int]]]]:
    """Return each shot segment lying outside every transition span, with the
    labels of the transitions on its left and right (``None`` at the ends)."""
    frames = video.frames
    spans = _frame_spans(video.annotations, video.fps, len(frames))
    out = []
    cursor = 0
    bounds = spans + [(len(frames), len(frames))]
    for k, (i0, i1) in enumerate(bounds):
        seg = ShotSegment(frames[cursor:i0], cursor / video.fps, i0 / video.fps, k)
        left = video.annotations[k - 1].label if k > 0 else None
        right = video.annotations[k].label if k < len(video.annotations) else None
        out.append((seg, (left, right)))
        cursor = i1
    return out
