"""Reference and hypothesis annotations: interval timelines, frame labels, RTTM.

Frame labeling uses four classes: ``s`` silence/noise, ``c`` child speech,
``a`` adult speech, ``o`` overlapping speech. A frame's class is decided at
its center time, so a 10 s conversation at a 20 ms step yields exactly 500
labels. Frame-label files store one character per frame on a single line.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

CHILD = "child"
ADULT = "adult"

LABEL_SILENCE = "s"
LABEL_CHILD = "c"
LABEL_ADULT = "a"
LABEL_OVERLAP = "o"
FRAME_LABELS = (LABEL_SILENCE, LABEL_CHILD, LABEL_ADULT, LABEL_OVERLAP)

_TIME_EPS = 1e-9


def merge_intervals(intervals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Union of half-open intervals; abutting intervals are merged."""
    merged: list[tuple[float, float]] = []
    for s, e in sorted(intervals):
        if merged and s <= merged[-1][1]:
            if e > merged[-1][1]:
                merged[-1] = (merged[-1][0], e)
        else:
            merged.append((s, e))
    return merged


@dataclass
class Timeline:
    """Labeled speech intervals for one session.

    ``intervals`` holds (start_s, end_s, label) triples. Reference timelines
    label with :data:`CHILD` / :data:`ADULT`; hypothesis timelines may carry
    arbitrary speaker labels (e.g. anonymous clusters). Intervals of one
    label are kept disjoint and sorted; labels may overlap each other.
    """

    intervals: list[tuple[float, float, str]]
    session_id: str
    extent_s: float

    def __post_init__(self) -> None:
        if self.extent_s <= 0:
            raise ValueError(f"extent_s must be positive, got {self.extent_s}")
        per_label: dict[str, list[tuple[float, float]]] = {}
        for s, e, label in self.intervals:
            if not (0.0 - _TIME_EPS <= s < e <= self.extent_s + _TIME_EPS):
                raise ValueError(
                    f"session {self.session_id}: interval [{s}, {e}) with label "
                    f"{label!r} outside [0, {self.extent_s}]"
                )
            per_label.setdefault(label, []).append((max(s, 0.0), min(e, self.extent_s)))
        normalized = []
        for label in sorted(per_label):
            for s, e in merge_intervals(per_label[label]):
                normalized.append((s, e, label))
        normalized.sort(key=lambda t: (t[0], t[1], t[2]))
        self.intervals = normalized

    def labels(self) -> list[str]:
        return sorted({label for _, _, label in self.intervals})

    def label_intervals(self, label: str) -> list[tuple[float, float]]:
        return [(s, e) for s, e, lb in self.intervals if lb == label]

    def boundaries(self) -> list[float]:
        points = set()
        for s, e, _ in self.intervals:
            points.add(s)
            points.add(e)
        return sorted(points)

    def total_speech_s(self) -> float:
        return sum(e - s for s, e, _ in self.intervals)


@dataclass
class FrameLabelSequence:
    """Fixed-step frame classes for one session, stored as a character string."""

    labels: str
    frame_step_s: float

    def __post_init__(self) -> None:
        bad = set(self.labels) - set(FRAME_LABELS)
        if bad:
            raise ValueError(f"unknown frame labels: {sorted(bad)}")
        if self.frame_step_s <= 0:
            raise ValueError("frame_step_s must be positive")

    @property
    def extent_s(self) -> float:
        return len(self.labels) * self.frame_step_s

    def __len__(self) -> int:
        return len(self.labels)


def plan_to_timeline(plan, session_id: str | None = None) -> Timeline:
    """Ground-truth timeline of a plan: one interval per placement, with
    same-role abutting or overlapping intervals merged."""
    intervals = [(p.start_s, p.end_s, p.role) for p in plan.placed]
    return Timeline(
        intervals=intervals,
        session_id=session_id if session_id is not None else plan.session_id(),
        extent_s=plan.total_duration_s,
    )


def _active_at(points: np.ndarray, intervals: list[tuple[float, float]]) -> np.ndarray:
    mask = np.zeros(len(points), dtype=bool)
    for s, e in intervals:
        mask |= (points >= s) & (points < e)
    return mask


def timeline_to_frames(tl: Timeline, frame_step_s: float) -> FrameLabelSequence:
    """Sample a child/adult timeline into frame classes at frame centers.

    Frame ``t`` covers [t*step, (t+1)*step); its class is read at the center
    (t + 0.5) * step: overlap if both roles are active there, child/adult if
    exactly one is, silence otherwise.
    """
    unknown = set(tl.labels()) - {CHILD, ADULT}
    if unknown:
        raise ValueError(f"timeline has non-role labels {sorted(unknown)}, cannot frame-label")
    n = round(tl.extent_s / frame_step_s)
    if n <= 0 or abs(n * frame_step_s - tl.extent_s) > 1e-6 * max(1.0, tl.extent_s):
        raise ValueError(
            f"extent {tl.extent_s} is not an integer multiple of frame step {frame_step_s}"
        )
    centers = (np.arange(n) + 0.5) * frame_step_s
    child = _active_at(centers, tl.label_intervals(CHILD))
    adult = _active_at(centers, tl.label_intervals(ADULT))
    chars = np.full(n, LABEL_SILENCE, dtype="<U1")
    chars[child & ~adult] = LABEL_CHILD
    chars[adult & ~child] = LABEL_ADULT
    chars[child & adult] = LABEL_OVERLAP
    return FrameLabelSequence(labels="".join(chars), frame_step_s=frame_step_s)


def _mask_runs(mask: np.ndarray, step: float) -> list[tuple[float, float]]:
    padded = np.concatenate(([False], mask, [False]))
    delta = np.diff(padded.astype(np.int8))
    starts = np.flatnonzero(delta == 1)
    ends = np.flatnonzero(delta == -1)
    return [(float(s * step), float(e * step)) for s, e in zip(starts, ends)]


def frames_to_timeline(fr: FrameLabelSequence, session_id: str = "session") -> Timeline:
    """Decode frame classes back into a role timeline.

    Maximal runs where the child is active (classes ``c`` or ``o``) become
    child intervals spanning the full frames of the run, likewise for the
    adult; silence decodes to nothing. Inverse of :func:`timeline_to_frames`
    up to frame quantization.
    """
    arr = np.frombuffer(fr.labels.encode("ascii"), dtype="S1")
    child = (arr == b"c") | (arr == b"o")
    adult = (arr == b"a") | (arr == b"o")
    intervals = [(s, e, CHILD) for s, e in _mask_runs(child, fr.frame_step_s)]
    intervals += [(s, e, ADULT) for s, e in _mask_runs(adult, fr.frame_step_s)]
    return Timeline(intervals=intervals, session_id=session_id, extent_s=fr.extent_s)


def write_frames(fr: FrameLabelSequence, sink) -> None:
    """Write a frame-label file: all frame characters on one line."""
    if hasattr(sink, "write"):
        sink.write(fr.labels + "\n")
    else:
        with open(sink, "w", encoding="ascii") as fh:
            fh.write(fr.labels + "\n")


def read_frames(source, frame_step_s: float) -> FrameLabelSequence:
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="ascii") as fh:
            text = fh.read()
    return FrameLabelSequence(labels=text.strip(), frame_step_s=frame_step_s)


def write_rttm(timelines, sink) -> None:
    """Write SPEAKER records, one line per interval, onsets to 1 ms.

    ``timelines`` may be a single Timeline or a list of them.
    """
    if isinstance(timelines, Timeline):
        timelines = [timelines]
    lines = []
    for tl in timelines:
        for s, e, label in sorted(tl.intervals, key=lambda t: (t[0], t[1], t[2])):
            if f"{e - s:.3f}" == "0.000":
                continue  # below the format's 1 ms resolution
            lines.append(
                f"SPEAKER {tl.session_id} 1 {s:.3f} {e - s:.3f} <NA> <NA> {label} <NA> <NA>\n"
            )
    text = "".join(lines)
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)


def parse_rttm(source, extent_s: float | None = None) -> list[Timeline]:
    """Parse SPEAKER records into one Timeline per session, sorted by id.

    Unknown record types are skipped with a warning; malformed SPEAKER lines
    raise with their line number. When ``extent_s`` is not given, each
    session's extent is the maximum interval end seen for it.
    """
    if hasattr(source, "read"):
        text = source.read()
        origin = getattr(source, "name", "<rttm>")
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
        origin = str(source)
    sessions: dict[str, list[tuple[float, float, str]]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        rec_type = parts[0].upper()
        if rec_type != "SPEAKER":
            warnings.warn(f"{origin}:{line_no}: skipping record type {parts[0]!r}")
            continue
        if len(parts) < 8:
            raise ValueError(
                f"{origin}:{line_no}: SPEAKER record has {len(parts)} fields, expected >= 8"
            )
        session_id = parts[1]
        try:
            onset = float(parts[3])
            dur = float(parts[4])
        except ValueError:
            raise ValueError(
                f"{origin}:{line_no}: onset/duration must be numbers, "
                f"got {parts[3]!r}/{parts[4]!r}"
            ) from None
        if dur <= 0 or onset < 0:
            raise ValueError(
                f"{origin}:{line_no}: bad onset/duration ({onset}, {dur})"
            )
        label = parts[7]
        sessions.setdefault(session_id, []).append((onset, onset + dur, label))
    out = []
    for session_id in sorted(sessions):
        intervals = sessions[session_id]
        extent = extent_s if extent_s is not None else max(e for _, e, _ in intervals)
        out.append(Timeline(intervals=intervals, session_id=session_id, extent_s=extent))
    return out
