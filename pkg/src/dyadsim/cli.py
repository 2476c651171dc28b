"""Command-line entry points: generate corpora, score hypotheses, pool stats.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import labels as lb
from . import metrics as mt
from .audio import load_noise_manifest, render_plan_audio
from .pools import load_manifest, manifest_stats, SPEAKER_ROLES, ROLE_ADULT_FEMALE
from .simulate import (
    SimulationConfig,
    save_plan,
    simulate_indexed,
    validate_pools_for_batch,
)
from .wavio import write_wav

SESSION_PATTERN = "sim_{:06d}"
INCOMPLETE_MARKER = "INCOMPLETE"


def _load_config(args) -> SimulationConfig:
    data = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    if args.seed is not None:
        data["seed"] = args.seed
    return SimulationConfig.from_dict(data)


def _generate_range(
    config_dict: dict,
    manifest: str,
    noise_manifest: str | None,
    out_dir: str,
    lo: int,
    hi: int,
    write_audio: bool,
) -> list[dict]:
    """Worker entry: load pools, then generate conversations lo..hi-1."""
    config = SimulationConfig.from_dict(config_dict)
    speakers = load_manifest(manifest, sample_rate=config.sample_rate)
    noise_pool = (
        load_noise_manifest(noise_manifest, sample_rate=config.sample_rate)
        if noise_manifest
        else None
    )
    return _generate_range_loaded(config, speakers, noise_pool, out_dir, lo, hi, write_audio)


def _generate_range_loaded(
    config: SimulationConfig,
    speakers,
    noise_pool,
    out_dir: str,
    lo: int,
    hi: int,
    write_audio: bool,
) -> list[dict]:
    """Generate conversations lo..hi-1; every output depends only on
    (config, index), never on chunking or worker count."""
    out = Path(out_dir)
    stats = []
    for index in range(lo, hi):
        plan = simulate_indexed(config, speakers, index)
        session = SESSION_PATTERN.format(index)
        timeline = lb.plan_to_timeline(plan, session_id=session)
        frames = lb.timeline_to_frames(timeline, config.frame_step_s)

        save_plan(plan, out / f"{session}.plan")
        lb.write_rttm(timeline, out / f"{session}.rttm")
        lb.write_frames(frames, out / f"{session}.frames")
        if write_audio:
            wave = render_plan_audio(plan, config.sample_rate, noise_pool=noise_pool)
            write_wav(out / f"{session}.wav", wave)

        counts = {c: frames.labels.count(c) for c in lb.FRAME_LABELS}
        stats.append(
            {
                "index": index,
                "no_speech": plan.is_no_speech,
                "started_with_speech": plan.started_with_speech(),
                "female_adult": plan.adult_role == ROLE_ADULT_FEMALE,
                "frames": counts,
            }
        )
    return stats


def cmd_generate(args) -> int:
    config = _load_config(args)
    n = args.count
    if n is None or n < 0:
        raise ValueError("--count must be a non-negative integer")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    # Validate inputs before writing anything.
    speakers = load_manifest(args.manifest, sample_rate=config.sample_rate)
    validate_pools_for_batch(config, speakers)
    noise_pool = None
    if args.noise_manifest:
        noise_pool = load_noise_manifest(args.noise_manifest, sample_rate=config.sample_rate)
    write_audio = not args.no_audio

    # The marker stays behind if generation dies partway, flagging the
    # output tree as incomplete.
    marker = out / INCOMPLETE_MARKER
    marker.write_text("generation in progress\n", encoding="utf-8")

    workers = max(1, args.workers)
    if workers == 1 or n <= 1:
        stats = _generate_range_loaded(config, speakers, noise_pool, str(out), 0, n, write_audio)
    else:
        chunk = max(1, (n + workers - 1) // workers)
        bounds = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
        stats = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(
                    _generate_range,
                    config.to_dict(),
                    args.manifest,
                    args.noise_manifest,
                    str(out),
                    lo,
                    hi,
                    write_audio,
                )
                for lo, hi in bounds
            ]
            for fut in futures:
                stats.extend(fut.result())
    stats.sort(key=lambda s: s["index"])

    no_speech = sum(1 for s in stats if s["no_speech"])
    speech = n - no_speech
    female = sum(1 for s in stats if not s["no_speech"] and s["female_adult"])
    started = sum(1 for s in stats if s["started_with_speech"])
    frame_totals = {c: sum(s["frames"][c] for s in stats) for c in lb.FRAME_LABELS}
    summary = {
        "schema": "corpus-summary/1",
        "count": n,
        "no_speech": no_speech,
        "no_speech_fraction": (no_speech / n) if n else None,
        "speech": speech,
        "started_with_speech": started,
        "female_adult_among_speech": female,
        "female_adult_fraction": (female / speech) if speech else None,
        "frame_label_totals": frame_totals,
        "audio_written": write_audio,
        "config": config.to_dict(),
    }
    with open(out / "corpus_summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    marker.unlink()
    print(f"generated {n} conversations in {out}")
    return 0


def _collect_timelines(path_arg: str) -> dict[str, lb.Timeline]:
    path = Path(path_arg)
    if path.is_dir():
        files = sorted(path.glob("*.rttm"))
        if not files:
            raise ValueError(f"{path}: no .rttm files found")
    elif path.exists():
        files = [path]
    else:
        raise FileNotFoundError(f"RTTM path not found: {path}")
    sessions: dict[str, lb.Timeline] = {}
    for f in files:
        parsed = lb.parse_rttm(f)
        if not parsed:
            # A file with no SPEAKER records still names a session (a
            # conversation with no speech); key it by the file stem. The
            # nominal extent is replaced when pairing with the other side.
            parsed = [lb.Timeline(intervals=[], session_id=f.stem, extent_s=1.0)]
        for tl in parsed:
            if tl.session_id in sessions:
                prev = sessions[tl.session_id]
                merged = lb.Timeline(
                    intervals=prev.intervals + tl.intervals,
                    session_id=tl.session_id,
                    extent_s=max(prev.extent_s, tl.extent_s),
                )
                sessions[tl.session_id] = merged
            else:
                sessions[tl.session_id] = tl
    return sessions


def _with_extent(tl: lb.Timeline, extent_s: float) -> lb.Timeline:
    return lb.Timeline(intervals=list(tl.intervals), session_id=tl.session_id, extent_s=extent_s)


def cmd_score(args) -> int:
    cfg = mt.ScoringConfig(collar_s=args.collar, mapping=args.mapping)
    refs = _collect_timelines(args.ref)
    hyps = _collect_timelines(args.hyp)
    ref_only = sorted(set(refs) - set(hyps))
    hyp_only = sorted(set(hyps) - set(refs))
    common = sorted(set(refs) & set(hyps))
    if (ref_only or hyp_only) and not args.allow_missing:
        if ref_only:
            print(f"sessions missing from hypothesis: {', '.join(ref_only)}", file=sys.stderr)
        if hyp_only:
            print(f"sessions missing from reference: {', '.join(hyp_only)}", file=sys.stderr)
        return 1
    if not common:
        print("no common sessions to score", file=sys.stderr)
        return 1

    rows = []
    for sid in common:
        extent = max(refs[sid].extent_s, hyps[sid].extent_s)
        ref, hyp = _with_extent(refs[sid], extent), _with_extent(hyps[sid], extent)
        rows.append((sid, mt.score_session(ref, hyp, cfg)))
    corpus = mt.combine_scores([score for _, score in rows])
    print(mt.format_report(rows, corpus))
    if args.json:
        report = {
            "sessions": [mt.score_to_record(sid, score) for sid, score in rows],
            "corpus": mt.score_to_record("TOTAL", corpus),
            "collar_s": cfg.collar_s,
            "mapping": cfg.mapping,
        }
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_stats(args) -> int:
    stats = manifest_stats(args.manifest)
    width = max(len(r) for r in SPEAKER_ROLES)
    print(f"{'role':<{width}}  {'speakers':>8}  {'mean_utts':>9}  {'mean_dur_s':>10}")
    for role in SPEAKER_ROLES:
        rs = stats[role]
        mu = "-" if rs.mean_utterances is None else f"{rs.mean_utterances:.2f}"
        md = "-" if rs.mean_duration_s is None else f"{rs.mean_duration_s:.2f}"
        print(f"{role:<{width}}  {rs.speakers:>8}  {mu:>9}  {md:>10}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyadsim",
        description="Simulate labeled child-adult conversations and score diarization output.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="simulate a corpus: audio, RTTM, frame labels, plans")
    gen.add_argument("--manifest", required=True, help="speech manifest (TSV)")
    gen.add_argument("--noise-manifest", default=None, help="noise manifest (TSV, role=noise)")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--count", type=int, required=True, help="number of conversations")
    gen.add_argument("--config", default=None, help="JSON file with simulation parameters")
    gen.add_argument("--seed", type=int, default=None, help="override the config seed")
    gen.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    gen.add_argument("--no-audio", action="store_true", help="skip WAV rendering")
    gen.set_defaults(func=cmd_generate)

    sc = sub.add_parser("score", help="score hypothesis RTTM(s) against reference RTTM(s)")
    sc.add_argument("ref", help="reference RTTM file or directory")
    sc.add_argument("hyp", help="hypothesis RTTM file or directory")
    sc.add_argument("--collar", type=float, default=0.1, help="forgiveness collar in seconds")
    sc.add_argument(
        "--mapping",
        choices=[mt.MAPPING_IDENTITY, mt.MAPPING_OPTIMAL],
        default=mt.MAPPING_IDENTITY,
        help="hypothesis label handling",
    )
    sc.add_argument(
        "--allow-missing",
        action="store_true",
        help="score the common sessions instead of failing on unmatched ids",
    )
    sc.add_argument("--json", default=None, help="also write the report as JSON records")
    sc.set_defaults(func=cmd_score)

    st = sub.add_parser("stats", help="per-role summary of a speech manifest")
    st.add_argument("manifest", help="speech manifest (TSV)")
    st.set_defaults(func=cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
