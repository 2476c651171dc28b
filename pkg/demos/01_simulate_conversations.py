#!/usr/bin/env python3
"""Walk through conversation simulation: one plan in detail, then batch statistics.

Builds a small in-memory speaker pool (constant-amplitude clips stand in for
real speech), simulates a single dyadic conversation and prints its timeline,
then generates a few thousand conversations and compares the empirical rates
with the configured probabilities.
"""

import numpy as np

from dyadsim import SimulationConfig, Speaker, SpeechSegment, simulate_indexed
from dyadsim.simulate import SimulationTrace

SR = 16000


def make_pool(seed: int = 7) -> list[Speaker]:
    rng = np.random.default_rng(seed)
    speakers = []
    for role, count, lo, hi in [
        ("child", 4, 0.4, 1.6),
        ("adult_female", 3, 0.8, 2.2),
        ("adult_male", 2, 0.8, 2.2),
    ]:
        for k in range(count):
            sid = f"{role}_{k}"
            utts = []
            for j in range(int(rng.integers(3, 7))):
                n = int(rng.uniform(lo, hi) * SR)
                utts.append(
                    SpeechSegment(
                        source_id=f"{sid}#{j}",
                        samples=np.full(n, 0.1, dtype=np.float32),
                        sample_rate=SR,
                    )
                )
            speakers.append(Speaker(speaker_id=sid, role=role, utterances=utts))
    return speakers


def main() -> None:
    pool = make_pool()
    config = SimulationConfig(seed=42)

    print("== one conversation in detail ==")
    plan = simulate_indexed(config, pool, index=3)
    print(f"child={plan.child_speaker_id}  adult={plan.adult_speaker_id} "
          f"({plan.adult_role})  snr={plan.snr_db} dB  no_speech={plan.is_no_speech}")
    for p in plan.placed:
        bar_start = int(p.start_s * 6)
        bar_len = max(1, int((p.end_s - p.start_s) * 6))
        lane = " " * bar_start + "#" * bar_len
        print(f"  {p.role:<5} [{p.start_s:6.2f}, {p.end_s:6.2f})  |{lane}")

    print("\n== batch statistics over 5000 conversations ==")
    n = 5000
    no_speech = female = speech = 0
    child = total = changes = overlaps = 0
    inter = []
    for i in range(n):
        trace = SimulationTrace()
        p = simulate_indexed(config, pool, i, trace=trace)
        if p.is_no_speech:
            no_speech += 1
            continue
        speech += 1
        female += p.adult_role == "adult_female"
        child += sum(1 for r in trace.role_draws if r == "child")
        total += len(trace.role_draws)
        changes += trace.speaker_changes
        overlaps += trace.overlaps
        inter.extend(trace.inter_silences_s)
    print(f"no-speech fraction      {no_speech / n:.3f}   (configured {config.p_no_speech})")
    print(f"female-adult fraction   {female / speech:.3f}   (configured {config.p_female_adult})")
    print(f"child utterance draws   {child / total:.3f}   (configured {config.p_child})")
    print(f"overlap at turn change  {overlaps / changes:.3f}   (configured {config.p_overlap})")
    print(f"mean between-turn gap   {np.mean(inter):.3f} s (configured {config.beta_inter_s} s)")


if __name__ == "__main__":
    main()
