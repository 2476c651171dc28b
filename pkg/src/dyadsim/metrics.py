"""Diarization scoring: false alarm, missed detection, speaker confusion, DER.

The scorer removes a forgiveness collar around every reference boundary,
partitions the remaining extent into sub-intervals on which both reference
and hypothesis speaker sets are constant, and accumulates, per sub-interval
of length d with reference set R and (mapped) hypothesis set H::

    FA += d * max(0, |H| - |R|)
    MD += d * max(0, |R| - |H|)
    SC += d * (min(|R|, |H|) - |correctly matched speakers|)

Reference speech counts overlap regions with multiplicity, and DER is the
sum of the three rates. Under identity mapping hypothesis labels stand for
themselves, so labels outside {child, adult} simply never match; optimal
mapping exhaustively assigns hypothesis labels one-to-one onto the two roles
to maximize correctly attributed time.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .labels import ADULT, CHILD, Timeline, merge_intervals

ROLES = (CHILD, ADULT)

MAPPING_IDENTITY = "identity"
MAPPING_OPTIMAL = "optimal"

_MAX_HYP_LABELS = 8
_EXTENT_TOL = 1e-9


@dataclass(frozen=True)
class ScoringConfig:
    collar_s: float = 0.1
    score_overlap: bool = True
    mapping: str = MAPPING_IDENTITY

    def __post_init__(self) -> None:
        if not (self.collar_s >= 0 and math.isfinite(self.collar_s)):
            raise ValueError(f"collar_s must be finite and >= 0, got {self.collar_s}")
        if self.mapping not in (MAPPING_IDENTITY, MAPPING_OPTIMAL):
            raise ValueError(f"mapping must be 'identity' or 'optimal', got {self.mapping!r}")


@dataclass(frozen=True)
class DiarizationScore:
    """Error durations in seconds plus rates over scored reference speech.

    Rates are None when the scored reference speech is zero (nothing to
    normalize by); they are never NaN or infinite.
    """

    fa_s: float
    md_s: float
    sc_s: float
    ref_speech_s: float
    fa_rate: float | None
    md_rate: float | None
    sc_rate: float | None
    der: float | None

    @classmethod
    def from_durations(
        cls, fa_s: float, md_s: float, sc_s: float, ref_speech_s: float
    ) -> "DiarizationScore":
        if ref_speech_s > 0:
            fa = fa_s / ref_speech_s
            md = md_s / ref_speech_s
            sc = sc_s / ref_speech_s
            der = fa + md + sc
        else:
            fa = md = sc = der = None
        return cls(fa_s, md_s, sc_s, ref_speech_s, fa, md, sc, der)


def _scored_region(ref: Timeline, collar_s: float, score_overlap: bool) -> list[tuple[float, float]]:
    """Extent minus collars around reference boundaries (and, optionally,
    minus regions where the reference itself overlaps)."""
    cuts: list[tuple[float, float]] = []
    if collar_s > 0:
        for b in ref.boundaries():
            cuts.append((b - collar_s, b + collar_s))
    if not score_overlap:
        child = ref.label_intervals(CHILD)
        adult = ref.label_intervals(ADULT)
        for cs, ce in child:
            for as_, ae in adult:
                lo, hi = max(cs, as_), min(ce, ae)
                if lo < hi:
                    cuts.append((lo, hi))
    region = [(0.0, ref.extent_s)]
    for cs, ce in merge_intervals(cuts):
        next_region = []
        for s, e in region:
            if ce <= s or cs >= e:
                next_region.append((s, e))
                continue
            if s < cs:
                next_region.append((s, cs))
            if ce < e:
                next_region.append((ce, e))
        region = next_region
    return region


def _covered(region: list[tuple[float, float]], t: float) -> bool:
    idx = bisect_right(region, (t, float("inf"))) - 1
    return idx >= 0 and region[idx][0] <= t < region[idx][1]


def _cells(
    ref: Timeline, hyp: Timeline, region: list[tuple[float, float]]
) -> list[tuple[float, frozenset, frozenset]]:
    """Homogeneous sub-intervals of the scored region as (length, R, H)."""
    points = set()
    for s, e in region:
        points.update((s, e))
    for s, e, _ in ref.intervals:
        points.update((s, e))
    for s, e, _ in hyp.intervals:
        points.update((s, e))
    pts = sorted(points)
    cells = []
    for t1, t2 in zip(pts, pts[1:]):
        if t2 <= t1:
            continue
        mid = 0.5 * (t1 + t2)
        if not _covered(region, mid):
            continue
        r_set = frozenset(lb for s, e, lb in ref.intervals if s <= mid < e)
        h_set = frozenset(lb for s, e, lb in hyp.intervals if s <= mid < e)
        cells.append((t2 - t1, r_set, h_set))
    return cells


def _enumerate_best_mapping(joint: dict, labels: list[str]) -> dict[str, str]:
    """Injective label-to-role assignment maximizing summed correct time.

    ``joint[(label, role)]`` is the co-active time of a hypothesis label and
    a reference role over the scored region. Exhaustive over the two roles.
    """
    best_map: dict[str, str] = {}
    best_time = -1.0
    options = [None] + labels
    for lc in options:
        for la in options:
            if lc is not None and lc == la:
                continue
            total = joint.get((lc, CHILD), 0.0) + joint.get((la, ADULT), 0.0)
            if total > best_time:
                best_time = total
                best_map = {}
                if lc is not None:
                    best_map[lc] = CHILD
                if la is not None:
                    best_map[la] = ADULT
    return best_map


def _check_labels(ref: Timeline, hyp: Timeline, cfg: ScoringConfig) -> None:
    bad_ref = set(ref.labels()) - set(ROLES)
    if bad_ref:
        raise ValueError(
            f"session {ref.session_id}: reference labels must be child/adult, "
            f"found {sorted(bad_ref)}"
        )
    if cfg.mapping == MAPPING_OPTIMAL and len(hyp.labels()) > _MAX_HYP_LABELS:
        raise ValueError(
            f"session {hyp.session_id}: optimal mapping supports at most "
            f"{_MAX_HYP_LABELS} hypothesis labels, found {len(hyp.labels())}"
        )


def score_session(ref: Timeline, hyp: Timeline, cfg: ScoringConfig) -> DiarizationScore:
    """Score one hypothesis timeline against its reference."""
    if abs(ref.extent_s - hyp.extent_s) > _EXTENT_TOL:
        raise ValueError(
            f"session {ref.session_id}: extent mismatch "
            f"(ref {ref.extent_s} s, hyp {hyp.extent_s} s)"
        )
    _check_labels(ref, hyp, cfg)
    region = _scored_region(ref, cfg.collar_s, cfg.score_overlap)
    cells = _cells(ref, hyp, region)

    if cfg.mapping == MAPPING_OPTIMAL:
        joint: dict = {}
        for d, r_set, h_set in cells:
            for lb in h_set:
                for role in r_set:
                    joint[(lb, role)] = joint.get((lb, role), 0.0) + d
        mapping = _enumerate_best_mapping(joint, sorted({lb for _, _, h in cells for lb in h}))
    else:
        mapping = None  # labels stand for themselves

    fa = md = sc = ref_speech = 0.0
    for d, r_set, h_set in cells:
        n_ref = len(r_set)
        n_hyp = len(h_set)
        if mapping is None:
            mapped = h_set
        else:
            mapped = {mapping[lb] for lb in h_set if lb in mapping}
        matched = len(r_set & mapped)
        fa += d * max(0, n_hyp - n_ref)
        md += d * max(0, n_ref - n_hyp)
        sc += d * (min(n_ref, n_hyp) - matched)
        ref_speech += d * n_ref
    return DiarizationScore.from_durations(fa, md, sc, ref_speech)


def combine_scores(scores: list[DiarizationScore]) -> DiarizationScore:
    """Micro-average: sum durations across sessions, then form rates.

    Sums use exactly rounded accumulation, so the result does not depend on
    session order.
    """
    if not scores:
        raise ValueError("combine_scores needs at least one score")
    return DiarizationScore.from_durations(
        math.fsum(s.fa_s for s in scores),
        math.fsum(s.md_s for s in scores),
        math.fsum(s.sc_s for s in scores),
        math.fsum(s.ref_speech_s for s in scores),
    )


def score_corpus(pairs: list[tuple[Timeline, Timeline]], cfg: ScoringConfig) -> DiarizationScore:
    """Aggregate scoring over (reference, hypothesis) session pairs."""
    if not pairs:
        raise ValueError("score_corpus needs at least one session pair")
    scores = []
    for ref, hyp in pairs:
        try:
            scores.append(score_session(ref, hyp, cfg))
        except ValueError as exc:
            raise ValueError(f"session {ref.session_id}: {exc}") from exc
    return combine_scores(scores)


def brute_force_score(
    ref: Timeline, hyp: Timeline, cfg: ScoringConfig, grid_s: float = 0.001
) -> DiarizationScore:
    """Grid oracle: evaluate the scoring rules cell-by-cell on a uniform grid.

    Grid cells whose center lies within the collar of any reference boundary
    are excluded. Intended for tests as an independent check of
    :func:`score_session`; it shares no interval arithmetic with it.
    """
    if abs(ref.extent_s - hyp.extent_s) > _EXTENT_TOL:
        raise ValueError("extent mismatch between reference and hypothesis")
    _check_labels(ref, hyp, cfg)
    n = int(round(ref.extent_s / grid_s))
    centers = (np.arange(n) + 0.5) * grid_s

    keep = np.ones(n, dtype=bool)
    if cfg.collar_s > 0:
        for b in ref.boundaries():
            keep &= np.abs(centers - b) >= cfg.collar_s

    def active(tl: Timeline, label: str) -> np.ndarray:
        mask = np.zeros(n, dtype=bool)
        for s, e in tl.label_intervals(label):
            mask |= (centers >= s) & (centers < e)
        return mask

    ref_masks = {role: active(ref, role) for role in ROLES}
    hyp_masks = {lb: active(hyp, lb) for lb in hyp.labels()}
    n_ref = sum(m.astype(np.int32) for m in ref_masks.values()) if ref_masks else np.zeros(n, np.int32)
    n_hyp = sum(m.astype(np.int32) for m in hyp_masks.values()) if hyp_masks else np.zeros(n, np.int32)
    if not cfg.score_overlap:
        keep &= n_ref < 2

    def correct_cells(child_label: str | None, adult_label: str | None) -> np.ndarray:
        total = np.zeros(n, dtype=np.int32)
        if child_label is not None and child_label in hyp_masks:
            total += (ref_masks[CHILD] & hyp_masks[child_label]).astype(np.int32)
        if adult_label is not None and adult_label in hyp_masks:
            total += (ref_masks[ADULT] & hyp_masks[adult_label]).astype(np.int32)
        return total

    if cfg.mapping == MAPPING_OPTIMAL:
        # Exhaustive assignment search done directly on the grid, without the
        # interval scorer's helper, so the two routes stay independent.
        options: list[str | None] = [None] + sorted(hyp_masks)
        matched = np.zeros(n, dtype=np.int32)
        best = -1
        for lc in options:
            for la in options:
                if lc is not None and lc == la:
                    continue
                candidate = correct_cells(lc, la)
                score = int(candidate[keep].sum())
                if score > best:
                    best = score
                    matched = candidate
    else:
        matched = correct_cells(CHILD, ADULT)

    fa = float(np.sum(np.maximum(n_hyp - n_ref, 0)[keep])) * grid_s
    md = float(np.sum(np.maximum(n_ref - n_hyp, 0)[keep])) * grid_s
    sc = float(np.sum((np.minimum(n_ref, n_hyp) - matched)[keep])) * grid_s
    ref_speech = float(np.sum(n_ref[keep])) * grid_s
    return DiarizationScore.from_durations(fa, md, sc, ref_speech)


def _fmt_rate(rate: float | None) -> str:
    return "-" if rate is None else f"{100.0 * rate:.1f}"


def score_to_record(session_id: str, score: DiarizationScore) -> dict:
    """Structured form of one score row (durations in seconds, rates as fractions)."""
    return {
        "session_id": session_id,
        "fa_s": score.fa_s,
        "md_s": score.md_s,
        "sc_s": score.sc_s,
        "ref_speech_s": score.ref_speech_s,
        "fa_rate": score.fa_rate,
        "md_rate": score.md_rate,
        "sc_rate": score.sc_rate,
        "der": score.der,
    }


def format_report(
    session_scores: list[tuple[str, DiarizationScore]], corpus: DiarizationScore | None = None
) -> str:
    """Aligned text table of FA/MD/SC/DER percentages with one decimal."""
    width = max([len("session")] + [len(sid) for sid, _ in session_scores] + [len("TOTAL")])
    header = f"{'session':<{width}}  {'FA':>6}  {'MD':>6}  {'SC':>6}  {'DER':>6}"
    lines = [header]
    for sid, score in session_scores:
        lines.append(
            f"{sid:<{width}}  {_fmt_rate(score.fa_rate):>6}  {_fmt_rate(score.md_rate):>6}  "
            f"{_fmt_rate(score.sc_rate):>6}  {_fmt_rate(score.der):>6}"
        )
    if corpus is not None:
        lines.append(
            f"{'TOTAL':<{width}}  {_fmt_rate(corpus.fa_rate):>6}  {_fmt_rate(corpus.md_rate):>6}  "
            f"{_fmt_rate(corpus.sc_rate):>6}  {_fmt_rate(corpus.der):>6}"
        )
    return "\n".join(lines)
