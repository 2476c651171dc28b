from __future__ import annotations

import numpy as np
import pytest

from dyadsim.pools import Speaker, SpeechSegment
from dyadsim.wavio import Waveform, write_wav

SR = 16000


def make_segment(source_id: str, duration_s: float, amplitude: float = 0.1,
                 kind: str = "const") -> SpeechSegment:
    n = int(round(duration_s * SR))
    if kind == "const":
        samples = np.full(n, amplitude, dtype=np.float32)
    elif kind == "tone":
        t = np.arange(n) / SR
        samples = (amplitude * np.sin(2 * np.pi * 220.0 * t)).astype(np.float32)
    else:
        raise ValueError(kind)
    return SpeechSegment(source_id=source_id, samples=samples, sample_rate=SR)


def make_speaker(speaker_id: str, role: str, durations: list[float],
                 amplitude: float = 0.1, kind: str = "const") -> Speaker:
    utts = [
        make_segment(f"{speaker_id}#{j}", d, amplitude=amplitude, kind=kind)
        for j, d in enumerate(durations)
    ]
    return Speaker(speaker_id=speaker_id, role=role, utterances=utts)


def build_pool(seed: int = 77, amplitude: float = 0.1, kind: str = "const") -> list[Speaker]:
    """A small in-memory speaker pool with varied utterance inventories."""
    rng = np.random.default_rng(seed)
    speakers: list[Speaker] = []

    def add(role: str, count: int, dur_lo: float, dur_hi: float) -> None:
        for k in range(count):
            sid = f"{role}_{k:02d}"
            n_utts = int(rng.integers(3, 7))
            durations = [float(rng.uniform(dur_lo, dur_hi)) for _ in range(n_utts)]
            speakers.append(make_speaker(sid, role, durations, amplitude=amplitude, kind=kind))

    add("child", 5, 0.4, 1.6)
    add("adult_female", 4, 0.8, 2.2)
    add("adult_male", 3, 0.8, 2.2)
    return speakers


@pytest.fixture(scope="session")
def pool() -> list[Speaker]:
    return build_pool()


@pytest.fixture()
def speech_manifest(tmp_path):
    """Write small WAVs plus a TSV manifest; returns the manifest path."""
    rng = np.random.default_rng(11)
    rows = []
    specs = [
        ("child_a", "child", 3),
        ("child_b", "child", 2),
        ("mom_a", "adult_female", 3),
        ("mom_b", "adult_female", 2),
        ("dad_a", "adult_male", 2),
    ]
    clips = tmp_path / "clips"
    clips.mkdir()
    for sid, role, n_segs in specs:
        # Millisecond-aligned so the manifest's 3-decimal times match the files.
        seg_durs = [round(float(rng.uniform(0.5, 1.5)), 3) for _ in range(n_segs)]
        total = sum(seg_durs)
        n = int(round(total * SR))
        t = np.arange(n) / SR
        freq = float(rng.uniform(150, 400))
        samples = (0.2 * np.sin(2 * np.pi * freq * t)).astype(np.float32)
        wav_path = clips / f"{sid}.wav"
        write_wav(wav_path, Waveform(samples=samples, sample_rate=SR))
        at = 0.0
        for d in seg_durs:
            rows.append(f"clips/{sid}.wav\t{sid}\t{role}\t{at:.3f}\t{at + d:.3f}")
            at += d
    manifest = tmp_path / "speech.tsv"
    manifest.write_text("# audio_path\tspeaker_id\trole\tstart_s\tend_s\n" + "\n".join(rows) + "\n")
    return manifest


@pytest.fixture()
def noise_manifest(tmp_path):
    rng = np.random.default_rng(22)
    clips = tmp_path / "noise"
    clips.mkdir()
    rows = []
    for k, dur in enumerate([12.0, 4.0]):
        n = int(round(dur * SR))
        samples = (0.3 * rng.uniform(-1.0, 1.0, size=n)).astype(np.float32)
        wav_path = clips / f"bg_{k}.wav"
        write_wav(wav_path, Waveform(samples=samples, sample_rate=SR))
        rows.append(f"noise/bg_{k}.wav\tbg_{k}\tnoise\t0.000\t{dur:.3f}")
    manifest = tmp_path / "noise.tsv"
    manifest.write_text("\n".join(rows) + "\n")
    return manifest
