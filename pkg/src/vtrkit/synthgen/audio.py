"""Procedural companion audio with a mood and a tempo."""
from dataclasses import dataclass

import numpy as np

MOODS = ("soft", "energetic")
SOFT_PEAK = 0.3


@dataclass
class AudioTrack:
    samples: np.ndarray
    sample_rate: int
    mood: str
    tempo_bpm: float

    @property
    def duration_s(self):
        return len(self.samples) / self.sample_rate


def generate_audio(mood: str, tempo_bpm: float, duration_s: float, sample_rate: int = 8000,
                   seed: int = 0, soft_peak: float = SOFT_PEAK) -> AudioTrack:
    """Soft mood: quiet sustained chord with a slow swell. Energetic: decaying
    percussive bursts on every beat over a faint pad."""
    if mood not in MOODS:
        raise ValueError(f"mood must be one of {MOODS}, got {mood!r}")
    if tempo_bpm <= 0 or duration_s <= 0 or sample_rate <= 0:
        raise ValueError("tempo, duration and sample rate must be positive")
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate
    root = rng.uniform(180.0, 360.0)
    chord = root * np.array([1.0, 1.25, 1.5])
    phases = rng.uniform(0, 2 * np.pi, size=3)
    pad = sum(np.sin(2 * np.pi * f * t + ph) for f, ph in zip(chord, phases)) / 3.0

    if mood == "soft":
        swell = 0.75 + 0.25 * np.sin(2 * np.pi * (tempo_bpm / 240.0) * t)
        x = pad * swell
        x = x / max(np.abs(x).max(), 1e-12) * soft_peak * 0.95
    else:
        beat = 60.0 / tempo_bpm
        x = 0.08 * pad
        onsets = np.arange(0.0, duration_s - 1e-9, beat)
        burst_len = int(min(0.12, beat * 0.8) * sample_rate)
        tb = np.arange(burst_len) / sample_rate
        env = np.exp(-tb / 0.025)
        for onset in onsets:
            i = int(round(onset * sample_rate))
            m = min(burst_len, n - i)
            if m <= 0:
                continue
            noise = rng.standard_normal(m)
            thump = np.sin(2 * np.pi * 70.0 * tb[:m])
            x[i:i + m] += env[:m] * (0.55 * thump + 0.3 * noise)
    return AudioTrack(np.clip(x, -1.0, 1.0).astype(np.float32), sample_rate, mood, float(tempo_bpm))


def beat_onsets(tempo_bpm, duration_s):
    """Nominal beat times of an energetic track."""
    return np.arange(0.0, duration_s - 1e-9, 60.0 / tempo_bpm)


def estimate_tempo(audio: AudioTrack, hop_s: float = 0.004, bpm_range=(40.0, 240.0),
                   smooth_s: float = 0.012) -> float:
    """Tempo from the autocorrelation of the half-wave rectified energy flux."""
    sr = audio.sample_rate
    hop = max(1, int(round(hop_s * sr)))
    x = audio.samples.astype(np.float64)
    n_frames = len(x) // hop
    energy = (x[:n_frames * hop].reshape(n_frames, hop) ** 2).sum(axis=1)
    flux = np.maximum(np.diff(np.log1p(1e3 * energy)), 0.0)
    # smooth so that onsets falling between hops still correlate
    width = max(1, int(round(smooth_s / hop_s)))
    kernel = np.exp(-0.5 * (np.arange(-3 * width, 3 * width + 1) / width) ** 2)
    flux = np.convolve(flux, kernel / kernel.sum(), mode="same")
    flux -= flux.mean()
    ac = np.correlate(flux, flux, mode="full")[len(flux) - 1:]
    hop_dt = hop / sr
    lo = int(np.floor(60.0 / bpm_range[1] / hop_dt))
    hi = min(int(np.ceil(60.0 / bpm_range[0] / hop_dt)), len(ac) - 2)
    window = ac[lo:hi + 1]
    best = int(np.argmax(window))
    # prefer the shortest lag that is nearly as strong as the global peak (avoids octave errors)
    peaks = [i for i in range(1, len(window) - 1)
             if window[i] >= window[i - 1] and window[i] >= window[i + 1] and window[i] >= 0.9 * window[best]]
    k = (peaks[0] if peaks else best) + lo
    y0, y1, y2 = ac[k - 1], ac[k], ac[k + 1]
    denom = y0 - 2 * y1 + y2
    shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
    return 60.0 / ((k + shift) * hop_dt)
