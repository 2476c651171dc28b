"""Render conversation plans to waveforms and mix background noise at an SNR.

Speech power for SNR scaling is measured over speech-labeled samples only,
never over silence, so sparse conversations still get the requested ratio.
No-speech conversations are pure noise scaled to an RMS of 0.05 full-scale.
If a mix peaks above 1.0 the whole signal is rescaled, which keeps the SNR
exact. Noise clips shorter than the conversation are tiled with a 10 ms
linear crossfade at each seam.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .pools import ROLE_NOISE, iter_manifest_rows, _resolve_audio
from .simulate import ConversationPlan, render_rng
from .wavio import Waveform, read_wav, resample, time_to_samples

NO_SPEECH_NOISE_RMS = 0.05
_CROSSFADE_S = 0.010


@dataclass(eq=False)
class NoisePool:
    """Background noise clips with their source ids."""

    clips: list[Waveform]
    ids: list[str]

    def __post_init__(self) -> None:
        if len(self.clips) != len(self.ids):
            raise ValueError("clips and ids must have equal length")
        if not self.clips:
            raise ValueError("noise pool is empty")

    def choose(self, rng: np.random.Generator) -> tuple[str, Waveform]:
        idx = int(rng.integers(0, len(self.clips)))
        return self.ids[idx], self.clips[idx]


def load_noise_manifest(path, sample_rate: int = 16000) -> NoisePool:
    """Load a noise manifest (same row format as speech, role column 'noise')."""
    path = Path(path)
    manifest_dir = path.parent
    cache: dict[Path, Waveform] = {}
    clips: list[Waveform] = []
    ids: list[str] = []
    for line_no, audio_path, source_id, role, start_s, end_s in iter_manifest_rows(path):
        if role != ROLE_NOISE:
            raise ValueError(
                f"{path}:{line_no}: noise manifest rows must have role 'noise', got {role!r}"
            )
        if end_s <= start_s:
            raise ValueError(f"{path}:{line_no}: end_s must exceed start_s")
        resolved = _resolve_audio(audio_path, manifest_dir)
        if resolved not in cache:
            cache[resolved] = resample(read_wav(resolved), sample_rate)
        wave = cache[resolved]
        lo = time_to_samples(start_s, sample_rate)
        hi = time_to_samples(end_s, sample_rate)
        if lo < 0 or hi > len(wave.samples):
            raise ValueError(
                f"{path}:{line_no}: [{start_s}, {end_s}) exceeds {resolved}"
            )
        clips.append(Waveform(samples=wave.samples[lo:hi].copy(), sample_rate=sample_rate))
        ids.append(source_id)
    if not clips:
        raise ValueError(f"{path}: noise manifest lists no clips")
    return NoisePool(clips=clips, ids=ids)


def render(plan: ConversationPlan, sample_rate: int) -> Waveform:
    """Sum the plan's placed utterances into a clean waveform.

    Output length is exactly round(total_duration_s * sample_rate); silence
    is exact zeros; overlapping placements add sample-wise.
    """
    n = time_to_samples(plan.total_duration_s, sample_rate)
    buf = np.zeros(n, dtype=np.float64)
    for p in plan.placed:
        if p.segment is None:
            raise ValueError(
                f"placement of {p.segment_source_id!r} has no loaded segment; "
                "attach speaker pools before rendering"
            )
        start_idx = time_to_samples(p.start_s, sample_rate)
        end_idx = time_to_samples(p.end_s, sample_rate)
        if start_idx < 0 or end_idx > n:
            raise RuntimeError(
                f"placement [{p.start_s}, {p.end_s}) exceeds the output buffer; "
                "the plan violates its truncation contract"
            )
        src = p.segment.samples
        src_start = time_to_samples(p.source_offset_s, p.segment.sample_rate)
        length = min(end_idx - start_idx, len(src) - src_start)
        if length > 0:
            buf[start_idx : start_idx + length] += src[src_start : src_start + length]
    return Waveform(samples=buf.astype(np.float32), sample_rate=sample_rate)


def speech_sample_mask(plan: ConversationPlan, sample_rate: int) -> np.ndarray:
    """Boolean mask of samples covered by at least one placed utterance."""
    n = time_to_samples(plan.total_duration_s, sample_rate)
    mask = np.zeros(n, dtype=bool)
    for p in plan.placed:
        mask[time_to_samples(p.start_s, sample_rate) : time_to_samples(p.end_s, sample_rate)] = True
    return mask


def _tile_with_crossfade(noise: np.ndarray, target_len: int, fade: int) -> np.ndarray:
    """Repeat a clip up to target_len, linearly crossfading ``fade`` samples
    at each seam to avoid clicks."""
    m = len(noise)
    fade = max(0, min(fade, m - 1))
    out = noise.copy()
    while len(out) < target_len:
        if fade > 0:
            ramp = (np.arange(1, fade + 1)) / (fade + 1)
            seam = out[-fade:] * (1.0 - ramp) + noise[:fade] * ramp
            out = np.concatenate([out[:-fade], seam, noise[fade:]])
        else:
            out = np.concatenate([out, noise])
    return out


def mix_noise(
    clean: Waveform,
    noise: Waveform,
    snr_db: float | None,
    rng: np.random.Generator,
    speech_mask: np.ndarray | None = None,
    noise_id: str | None = None,
) -> Waveform:
    """Add noise scaled so speech power over noise power hits ``snr_db``.

    A random contiguous noise window is selected with ``rng`` (tiling first
    if the clip is short). Speech power is the mean square of ``clean`` over
    ``speech_mask`` (nonzero samples when no mask is given); noise power is
    the mean square of the selected window over the whole clip extent. When
    the clean signal has no speech power the output is noise alone at RMS
    0.05 and ``snr_db`` is ignored.
    """
    if clean.sample_rate != noise.sample_rate:
        raise ValueError(
            f"sample rate mismatch: clean {clean.sample_rate} Hz, noise {noise.sample_rate} Hz"
        )
    n = len(clean)
    m = len(noise)
    label = noise_id if noise_id is not None else "<noise>"
    if m == 0:
        raise ValueError(f"noise clip {label} is empty")
    noise64 = noise.samples.astype(np.float64)
    if m >= n:
        offset = int(rng.integers(0, m - n + 1))
        window = noise64[offset : offset + n]
    else:
        offset = int(rng.integers(0, m))
        fade = time_to_samples(_CROSSFADE_S, clean.sample_rate)
        tiled = _tile_with_crossfade(noise64, offset + n, fade)
        window = tiled[offset : offset + n]

    noise_power = float(np.mean(window**2))
    if noise_power <= 0.0:
        raise ValueError(f"noise clip {label} has zero power over the selected window")

    clean64 = clean.samples.astype(np.float64)
    if speech_mask is None:
        speech_mask = clean64 != 0.0
    speech_power = float(np.mean(clean64[speech_mask] ** 2)) if speech_mask.any() else 0.0

    if speech_power > 0.0:
        if snr_db is None:
            raise ValueError("snr_db is required when the clean signal contains speech")
        gain = float(np.sqrt(speech_power / (noise_power * 10.0 ** (snr_db / 10.0))))
        out = clean64 + gain * window
    else:
        out = window * (NO_SPEECH_NOISE_RMS / np.sqrt(noise_power))

    peak = float(np.max(np.abs(out))) if n else 0.0
    if peak > 1.0:
        out = out / peak
    return Waveform(samples=out.astype(np.float32), sample_rate=clean.sample_rate)


def render_plan_audio(
    plan: ConversationPlan,
    sample_rate: int,
    noise_pool: NoisePool | None = None,
    rng: np.random.Generator | None = None,
) -> Waveform:
    """Render a plan and, when a noise pool is given, mix noise at the plan's SNR.

    Without an explicit ``rng`` the noise selection stream is re-derived from
    the plan's (seed, index), so re-rendering from a saved plan is bit-exact.
    """
    clean = render(plan, sample_rate)
    if noise_pool is None:
        return clean
    if rng is None:
        if plan.seed is None or plan.index is None:
            raise ValueError("plan has no (seed, index); pass an rng for noise selection")
        rng = render_rng(plan.seed, plan.index)
    noise_id, noise = noise_pool.choose(rng)
    return mix_noise(
        clean,
        noise,
        plan.snr_db,
        rng,
        speech_mask=speech_sample_mask(plan, sample_rate),
        noise_id=noise_id,
    )
