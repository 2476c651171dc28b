"""Mono WAV reading/writing and deterministic rational resampling."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly


@dataclass(eq=False)
class Waveform:
    """A mono audio buffer: float32 samples nominally in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate

    def __len__(self) -> int:
        return len(self.samples)


# Integer PCM is scaled symmetrically by the full positive range so that a
# write/read cycle of values in [-1, 1] is a plain round().
_INT_SCALE = {
    np.dtype(np.int16): 32767.0,
    np.dtype(np.int32): 2147483647.0,
}


def time_to_samples(t_s: float, sample_rate: int) -> int:
    """Half-up rounding of a time in seconds to a sample index."""
    return int(math.floor(t_s * sample_rate + 0.5))


def read_wav(path) -> Waveform:
    """Read a WAV file into a float32 mono :class:`Waveform`.

    16/32-bit integer PCM is scaled to [-1, 1]; float PCM is taken as-is
    (float64 is narrowed to float32). Multi-channel files keep the first
    channel with a warning.

    Raises:
        FileNotFoundError: the path does not exist.
        ValueError: empty file or unsupported sample encoding.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"audio file not found: {path}")
    try:
        rate, data = wavfile.read(str(path))
    except Exception as exc:
        raise ValueError(f"unsupported or corrupt WAV file {path}: {exc}") from exc
    if data.size == 0:
        raise ValueError(f"empty WAV file: {path}")
    if data.ndim > 1:
        warnings.warn(f"{path}: {data.shape[1]} channels, keeping only channel 0")
        data = data[:, 0]
    dtype = data.dtype
    if dtype in _INT_SCALE:
        samples = data.astype(np.float32) / _INT_SCALE[dtype]
    elif dtype == np.float32:
        samples = data
    elif dtype == np.float64:
        samples = data.astype(np.float32)
    else:
        raise ValueError(f"unsupported WAV sample format {dtype} in {path}")
    if not np.isfinite(samples).all():
        raise ValueError(f"non-finite samples in {path}")
    return Waveform(samples=np.ascontiguousarray(samples), sample_rate=int(rate))


def write_wav(path, wave: Waveform, encoding: str = "float32") -> None:
    """Write a mono waveform as 32-bit float (default) or 16-bit integer PCM.

    The 16-bit path multiplies by 32767 and rounds; no dithering is applied,
    so output bytes depend only on the input samples.
    """
    samples = np.asarray(wave.samples)
    if encoding == "float32":
        data = samples.astype(np.float32)
    elif encoding == "int16":
        data = np.clip(np.round(samples * 32767.0), -32768, 32767).astype(np.int16)
    else:
        raise ValueError(f"unsupported WAV encoding {encoding!r} (use 'float32' or 'int16')")
    wavfile.write(str(path), int(wave.sample_rate), data)


def resample(wave: Waveform, target_rate: int) -> Waveform:
    """Resample with a linear-phase polyphase filter.

    Output length is ceil(n * target_rate / source_rate) up to one sample,
    matching the plain rational-resampling length formula.
    """
    if target_rate <= 0:
        raise ValueError(f"target sample rate must be positive, got {target_rate}")
    if wave.sample_rate == target_rate:
        return wave
    g = math.gcd(int(wave.sample_rate), int(target_rate))
    up = target_rate // g
    down = wave.sample_rate // g
    out = resample_poly(wave.samples.astype(np.float64), up, down).astype(np.float32)
    return Waveform(samples=out, sample_rate=int(target_rate))
