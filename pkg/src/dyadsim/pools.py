"""Speaker pools: manifest loading and replenishing without-replacement sampling.

A speech manifest is a tab-separated text file with one row per segment::

    audio_path<TAB>speaker_id<TAB>role<TAB>start_s<TAB>end_s

where role is one of ``child``, ``adult_male``, ``adult_female`` (noise
manifests use ``noise`` instead). Blank lines and lines starting with ``#``
are skipped. Relative audio paths are resolved against the manifest's
directory. Segments are the half-open clip ``[start_s, end_s)`` of the
referenced file, resampled to the configured rate when needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .wavio import Waveform, read_wav, resample, time_to_samples

ROLE_CHILD = "child"
ROLE_ADULT_MALE = "adult_male"
ROLE_ADULT_FEMALE = "adult_female"
ROLE_NOISE = "noise"

SPEAKER_ROLES = (ROLE_CHILD, ROLE_ADULT_MALE, ROLE_ADULT_FEMALE)
ADULT_ROLES = (ROLE_ADULT_FEMALE, ROLE_ADULT_MALE)

DEFAULT_SAMPLE_RATE = 16000


@dataclass(eq=False)
class SpeechSegment:
    """One single-speaker clip: float32 samples plus its provenance id."""

    source_id: str
    samples: np.ndarray
    sample_rate: int

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate

    def __post_init__(self) -> None:
        if len(self.samples) <= 0:
            raise ValueError(f"segment {self.source_id}: empty sample buffer")


@dataclass(eq=False)
class Speaker:
    """A role-tagged speaker with an ordered utterance inventory."""

    speaker_id: str
    role: str
    utterances: list[SpeechSegment] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.role not in SPEAKER_ROLES:
            raise ValueError(
                f"speaker {self.speaker_id}: unknown role {self.role!r}, "
                f"expected one of {SPEAKER_ROLES}"
            )


class PoolSampler:
    """Without-replacement draw state over one speaker's utterance indices.

    Draws remove a uniformly chosen index from ``remaining``; an exhausted
    index set is replenished to the full inventory before the next draw.
    Samplers are cheap and meant to be confined to a single simulation job.
    """

    def __init__(self, n_utterances: int, rng: np.random.Generator):
        if n_utterances <= 0:
            raise ValueError("sampler needs at least one utterance")
        self._n = n_utterances
        self.remaining: list[int] = list(range(n_utterances))
        self.rng = rng

    def draw_index(self) -> int:
        if not self.remaining:
            self.remaining = list(range(self._n))
        pos = int(self.rng.integers(0, len(self.remaining)))
        return self.remaining.pop(pos)


def draw_utterance(sampler: PoolSampler, speaker: Speaker) -> SpeechSegment:
    """Draw one utterance without replacement, replenishing when exhausted."""
    if not speaker.utterances:
        raise ValueError(f"speaker {speaker.speaker_id} has no utterances")
    return speaker.utterances[sampler.draw_index()]


def iter_manifest_rows(path):
    """Yield (line_no, audio_path, speaker_id, role, start_s, end_s) rows.

    Raises ValueError naming the offending line for malformed rows.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"manifest not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise ValueError(
                    f"{path}:{line_no}: expected 5 tab-separated fields, got {len(parts)}"
                )
            audio_path, speaker_id, role, start_txt, end_txt = (p.strip() for p in parts)
            try:
                start_s = float(start_txt)
                end_s = float(end_txt)
            except ValueError:
                raise ValueError(
                    f"{path}:{line_no}: start_s/end_s must be numbers, "
                    f"got {start_txt!r}/{end_txt!r}"
                ) from None
            yield line_no, audio_path, speaker_id, role, start_s, end_s


def _resolve_audio(audio_path: str, manifest_dir: Path) -> Path:
    p = Path(audio_path)
    return p if p.is_absolute() else manifest_dir / p


def load_manifest(path, sample_rate: int = DEFAULT_SAMPLE_RATE) -> list[Speaker]:
    """Load a speech manifest into role-tagged speakers.

    Each referenced audio file is decoded once, resampled to ``sample_rate``
    if needed, and sliced into the listed segments. Speakers keep manifest
    order; a speaker's utterances keep row order.

    Raises:
        FileNotFoundError: manifest or a referenced audio file is missing.
        ValueError: malformed rows, bad roles, inconsistent speaker roles,
            or segment bounds outside the audio file.
    """
    path = Path(path)
    manifest_dir = path.parent
    audio_cache: dict[Path, Waveform] = {}
    speakers: dict[str, Speaker] = {}

    for line_no, audio_path, speaker_id, role, start_s, end_s in iter_manifest_rows(path):
        if role not in SPEAKER_ROLES:
            raise ValueError(
                f"{path}:{line_no}: role {role!r} not allowed in a speech manifest "
                f"(expected one of {SPEAKER_ROLES})"
            )
        resolved = _resolve_audio(audio_path, manifest_dir)
        if resolved not in audio_cache:
            audio_cache[resolved] = resample(read_wav(resolved), sample_rate)
        wave = audio_cache[resolved]

        speaker = speakers.get(speaker_id)
        if speaker is None:
            speaker = Speaker(speaker_id=speaker_id, role=role, utterances=[])
            speakers[speaker_id] = speaker
        elif speaker.role != role:
            raise ValueError(
                f"{path}:{line_no}: speaker {speaker_id} listed with role {role!r} "
                f"but earlier rows say {speaker.role!r}"
            )

        seg_index = len(speaker.utterances)
        if end_s <= start_s:
            raise ValueError(
                f"{path}:{line_no}: speaker {speaker_id} segment {seg_index}: "
                f"end_s ({end_s}) must be greater than start_s ({start_s})"
            )
        start_idx = time_to_samples(start_s, sample_rate)
        end_idx = time_to_samples(end_s, sample_rate)
        if start_idx < 0 or end_idx > len(wave.samples):
            raise ValueError(
                f"{path}:{line_no}: speaker {speaker_id} segment {seg_index}: "
                f"[{start_s}, {end_s}) exceeds {resolved} "
                f"({wave.duration_s:.3f} s at {sample_rate} Hz)"
            )
        speaker.utterances.append(
            SpeechSegment(
                source_id=f"{speaker_id}#{seg_index}",
                samples=wave.samples[start_idx:end_idx].copy(),
                sample_rate=sample_rate,
            )
        )

    result = list(speakers.values())
    for speaker in result:
        if not speaker.utterances:
            raise ValueError(f"{path}: speaker {speaker.speaker_id} has no segments")
    if not result:
        raise ValueError(f"{path}: manifest lists no segments")
    return result


@dataclass
class RoleStats:
    """Per-role pool summary; means are None when the role has no speakers."""

    speakers: int
    mean_utterances: float | None
    mean_duration_s: float | None


def _stats_from_counts(per_role: dict[str, tuple[int, int, float]]) -> dict[str, RoleStats]:
    out: dict[str, RoleStats] = {}
    for role in SPEAKER_ROLES:
        n_speakers, n_utts, total_dur = per_role.get(role, (0, 0, 0.0))
        if n_speakers == 0:
            out[role] = RoleStats(speakers=0, mean_utterances=None, mean_duration_s=None)
        else:
            out[role] = RoleStats(
                speakers=n_speakers,
                mean_utterances=n_utts / n_speakers,
                mean_duration_s=total_dur / n_utts,
            )
    return out


def pool_stats(speakers: list[Speaker]) -> dict[str, RoleStats]:
    """Per-role speaker count, mean utterances per speaker, mean duration.

    The mean duration pools every utterance of the role together.
    """
    if not speakers:
        raise ValueError("pool_stats needs at least one speaker")
    per_role: dict[str, tuple[int, int, float]] = {}
    for speaker in speakers:
        n, u, d = per_role.get(speaker.role, (0, 0, 0.0))
        per_role[speaker.role] = (
            n + 1,
            u + len(speaker.utterances),
            d + sum(seg.duration_s for seg in speaker.utterances),
        )
    return _stats_from_counts(per_role)


def manifest_stats(path) -> dict[str, RoleStats]:
    """pool_stats computed from manifest rows alone, without decoding audio.

    Durations come from the listed intervals, so this is fast enough for
    large manifests and still validates row syntax.
    """
    seen_roles: dict[str, str] = {}
    counts: dict[str, int] = {}
    durs: dict[str, float] = {}
    per_role: dict[str, set] = {}
    path = Path(path)
    any_rows = False
    for line_no, _audio, speaker_id, role, start_s, end_s in iter_manifest_rows(path):
        any_rows = True
        if role not in SPEAKER_ROLES:
            raise ValueError(f"{path}:{line_no}: role {role!r} not allowed in a speech manifest")
        if seen_roles.setdefault(speaker_id, role) != role:
            raise ValueError(
                f"{path}:{line_no}: speaker {speaker_id} listed with conflicting roles"
            )
        if end_s <= start_s:
            raise ValueError(
                f"{path}:{line_no}: segment end_s ({end_s}) must exceed start_s ({start_s})"
            )
        per_role.setdefault(role, set()).add(speaker_id)
        counts[role] = counts.get(role, 0) + 1
        durs[role] = durs.get(role, 0.0) + (end_s - start_s)
    if not any_rows:
        raise ValueError(f"{path}: manifest lists no segments")
    return _stats_from_counts(
        {
            role: (len(per_role[role]), counts[role], durs[role])
            for role in per_role
        }
    )
