"""On-disk media layout: one compressed array file plus one JSON sidecar per video.

``<id>.npz`` holds ``frames`` (uint8, T x H x W x 3) and, when present,
``audio`` (int16). ``<id>.json`` records fps, dimensions and the transition
annotations as ``{"category_id", "start_s", "end_s"}`` objects.
"""
import json
import os
from pathlib import Path

import numpy as np

from .video import EditedVideo


def quantize(frames):
    return np.rint(np.clip(frames, 0.0, 1.0) * 255.0).astype(np.uint8)


def dequantize(frames):
    return frames.astype(np.float32) / 255.0


def save_edited_video(video: EditedVideo, directory, video_id):
    """Write ``video`` under ``directory``; returns the sidecar path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    frames = video.frames
    arrays = {"frames": quantize(frames)}
    sidecar = {
        "video_id": video_id,
        "fps": video.fps,
        "n_frames": int(len(frames)),
        "height": int(frames.shape[1]),
        "width": int(frames.shape[2]),
        "annotations": [{"category_id": int(a.label), "start_s": a.start_s, "end_s": a.end_s}
                        for a in video.annotations],
    }
    audio = video.audio
    if audio is not None:
        arrays["audio"] = np.rint(np.clip(audio.samples, -1.0, 1.0) * 32767.0).astype(np.int16)
        sidecar["audio"] = {"sample_rate": audio.sample_rate, "mood": audio.mood,
                            "tempo_bpm": audio.tempo_bpm, "n_samples": int(len(audio.samples))}
    media_path = directory / f"{video_id}.npz"
    tmp = directory / f".{video_id}.tmp.npz"
    np.savez_compressed(tmp, **arrays)
    os.replace(tmp, media_path)
    side_path = directory / f"{video_id}.json"
    side_path.write_text(json.dumps(sidecar, indent=1, sort_keys=True))
    return side_path


def load_edited_video(directory, video_id) -> EditedVideo:
    from ..synthgen.audio import AudioTrack

    directory = Path(directory)
    sidecar = json.loads((directory / f"{video_id}.json").read_text())
    with np.load(directory / f"{video_id}.npz") as data:
        frames = dequantize(data["frames"])
        audio = None
        if "audio" in data and "audio" in sidecar:
            meta = sidecar["audio"]
            audio = AudioTrack(data["audio"].astype(np.float32) / 32767.0, meta["sample_rate"],
                               meta["mood"], meta["tempo_bpm"])
    anns = [(a["category_id"], a["start_s"], a["end_s"]) for a in sidecar["annotations"]]
    return EditedVideo.from_timeline(frames, sidecar["fps"], anns, audio)
