"""Dyadic conversation simulation.

Builds a timestamped conversation plan from one child and one adult speaker by
incrementally placing sampled utterances, separated by exponentially
distributed silences, with occasional overlap at speaker changes. A plan
records placements only; rendering to audio lives in :mod:`dyadsim.audio`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .pools import (
    ADULT_ROLES,
    ROLE_ADULT_FEMALE,
    ROLE_ADULT_MALE,
    ROLE_CHILD,
    PoolSampler,
    Speaker,
    SpeechSegment,
    draw_utterance,
)

# Sub-stream tags so that planning and rendering can be re-derived
# independently from (seed, conversation index).
STREAM_PLAN = 0
STREAM_RENDER = 1

PLAN_SCHEMA = "conversation-plan/1"


@dataclass(frozen=True)
class SimulationConfig:
    """Hyper-parameters and audio parameters for one simulation batch.

    Probabilities: ``p_overlap`` (overlap at a speaker change), ``p_child``
    (each utterance draw picks the child), ``p_start`` (conversation starts
    mid-utterance), ``p_no_speech`` (conversation is pure noise) and
    ``p_female_adult`` (adult speaker drawn from the female pool).
    ``beta_intra_s`` / ``beta_inter_s`` are the exponential silence scales
    (means) within and across speakers.
    """

    p_overlap: float = 0.1
    p_child: float = 0.4
    p_start: float = 0.5
    beta_intra_s: float = 1.0
    beta_inter_s: float = 0.8
    duration_s: float = 10.0
    p_no_speech: float = 0.2
    p_female_adult: float = 0.85
    snr_choices_db: tuple = (5.0, 10.0, 15.0, 20.0)
    sample_rate: int = 16000
    frame_step_s: float = 0.02
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("p_overlap", "p_child", "p_start", "p_no_speech", "p_female_adult"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        for name in ("beta_intra_s", "beta_inter_s", "duration_s", "frame_step_s"):
            v = getattr(self, name)
            if not v > 0:
                raise ValueError(f"{name} must be positive, got {v}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not self.snr_choices_db:
            raise ValueError("snr_choices_db must not be empty")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a non-negative 64-bit integer")
        n = round(self.duration_s / self.frame_step_s)
        if n <= 0 or abs(n * self.frame_step_s - self.duration_s) > 1e-9:
            raise ValueError(
                f"duration_s ({self.duration_s}) must be an integer multiple of "
                f"frame_step_s ({self.frame_step_s})"
            )
        object.__setattr__(self, "snr_choices_db", tuple(float(x) for x in self.snr_choices_db))

    @property
    def n_frames(self) -> int:
        return round(self.duration_s / self.frame_step_s)

    def to_dict(self) -> dict:
        return {
            "p_overlap": self.p_overlap,
            "p_child": self.p_child,
            "p_start": self.p_start,
            "beta_intra_s": self.beta_intra_s,
            "beta_inter_s": self.beta_inter_s,
            "duration_s": self.duration_s,
            "p_no_speech": self.p_no_speech,
            "p_female_adult": self.p_female_adult,
            "snr_choices_db": list(self.snr_choices_db),
            "sample_rate": self.sample_rate,
            "frame_step_s": self.frame_step_s,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimulationConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(eq=False)
class PlacedUtterance:
    """One utterance laid onto the conversation timeline.

    ``source_offset_s`` is nonzero only for a truncated conversation-start
    utterance, whose suffix begins that far into the source segment.
    """

    role: str  # "child" or "adult"
    start_s: float
    end_s: float
    segment: SpeechSegment | None
    source_offset_s: float = 0.0
    segment_source_id: str = ""

    def __post_init__(self) -> None:
        if self.segment is not None and not self.segment_source_id:
            self.segment_source_id = self.segment.source_id


@dataclass(eq=False)
class ConversationPlan:
    """A fully specified conversation: placements plus mixing metadata."""

    placed: list[PlacedUtterance]
    total_duration_s: float
    child_speaker_id: str
    adult_speaker_id: str
    adult_role: str
    snr_db: float | None
    is_no_speech: bool
    seed: int | None = None
    index: int | None = None

    def session_id(self) -> str:
        if self.index is None:
            return "session"
        return f"sim_{self.index:06d}"

    def started_with_speech(self) -> bool:
        return bool(self.placed) and self.placed[0].start_s == 0.0


def draw_silence(rng: np.random.Generator, beta_s: float) -> float:
    """One silence duration from an exponential with mean ``beta_s``."""
    if not beta_s > 0:
        raise ValueError(f"beta_s must be positive, got {beta_s}")
    return float(rng.exponential(beta_s))


@dataclass
class SimulationTrace:
    """Record of one simulation's internal draws.

    Plans drop placements past the duration limit, which right-censors any
    statistic read off the finished timeline; the trace keeps the raw draws
    so their distributions can be validated directly. Rendering never reads
    it.
    """

    role_draws: list[str] = field(default_factory=list)
    initial_silence_s: float | None = None
    intra_silences_s: list[float] = field(default_factory=list)
    inter_silences_s: list[float] = field(default_factory=list)
    speaker_changes: int = 0
    overlaps: int = 0


def simulate_plan(
    config: SimulationConfig,
    child: Speaker,
    adult: Speaker,
    rng: np.random.Generator,
    trace: SimulationTrace | None = None,
) -> ConversationPlan:
    """Build one conversation plan from a child and an adult speaker.

    The construction, with all randomness drawn from ``rng`` in a fixed
    order so that identical inputs give identical plans:

    1. With probability ``p_no_speech`` the plan is empty (pure noise).
    2. With probability ``p_start`` the conversation opens mid-utterance: a
       role is drawn (child with probability ``p_child``), an utterance is
       sampled, and its suffix from a uniform offset is placed at time 0.
    3. An initial silence drawn from Exp(beta_intra_s) follows; the first
       looped utterance lands directly after it.
    4. While the conversation end is short of ``duration_s``: draw a role and
       an utterance; if the role matches the previous placement, insert an
       Exp(beta_intra_s) silence before it; on a speaker change, either
       overlap it (probability ``p_overlap``) starting uniformly within the
       previous utterance, or insert an Exp(beta_inter_s) silence.
    5. Placements are clipped to ``duration_s``; placements starting at or
       past the end are dropped.

    Overlap starts are clipped so no instant ever carries more than two
    active utterances; when an anchor is entirely covered by a still-running
    earlier utterance, the overlap falls back to a silence-separated append.

    Utterances are drawn without replacement per speaker and the inventory is
    replenished once exhausted. The SNR is drawn uniformly from
    ``snr_choices_db`` for every conversation, no-speech ones included.
    """
    if child.role != ROLE_CHILD:
        raise ValueError(f"child speaker {child.speaker_id} has role {child.role!r}")
    if adult.role not in ADULT_ROLES:
        raise ValueError(f"adult speaker {adult.speaker_id} has role {adult.role!r}")

    no_speech = bool(rng.random() < config.p_no_speech)
    snr_db = float(config.snr_choices_db[int(rng.integers(0, len(config.snr_choices_db)))])

    if no_speech:
        return ConversationPlan(
            placed=[],
            total_duration_s=config.duration_s,
            child_speaker_id=child.speaker_id,
            adult_speaker_id=adult.speaker_id,
            adult_role=adult.role,
            snr_db=snr_db,
            is_no_speech=True,
        )

    samplers = {
        "child": PoolSampler(len(child.utterances), rng),
        "adult": PoolSampler(len(adult.utterances), rng),
    }
    speakers = {"child": child, "adult": adult}

    placed: list[PlacedUtterance] = []
    cursor = 0.0  # current end of the conversation, silences included
    frontier = 0.0  # max end over all placements
    frontier_prev = 0.0  # max end over all placements except the latest
    last: PlacedUtterance | None = None

    def _draw_role() -> str:
        role = "child" if rng.random() < config.p_child else "adult"
        if trace is not None:
            trace.role_draws.append(role)
        return role

    def _place(role: str, start: float, seg: SpeechSegment, offset: float) -> PlacedUtterance:
        nonlocal cursor, frontier, frontier_prev, last
        end = start + (seg.duration_s - offset)
        p = PlacedUtterance(
            role=role, start_s=start, end_s=end, segment=seg, source_offset_s=offset
        )
        placed.append(p)
        frontier_prev = frontier
        frontier = max(frontier, end)
        cursor = max(cursor, end)
        last = p
        return p

    if rng.random() < config.p_start:
        role = _draw_role()
        seg = draw_utterance(samplers[role], speakers[role])
        offset = float(rng.uniform(0.0, seg.duration_s))
        _place(role, 0.0, seg, offset)

    initial_silence = draw_silence(rng, config.beta_intra_s)
    cursor += initial_silence
    if trace is not None:
        trace.initial_silence_s = initial_silence

    def _silence(kind: str, sink: list[float] | None) -> float:
        value = draw_silence(rng, config.beta_intra_s if kind == "intra" else config.beta_inter_s)
        if sink is not None:
            sink.append(value)
        return value

    first_loop_placement = True
    while cursor < config.duration_s:
        role = _draw_role()
        seg = draw_utterance(samplers[role], speakers[role])
        if last is None:
            start = cursor
        elif role == last.role:
            if not first_loop_placement:
                cursor += _silence("intra", trace.intra_silences_s if trace else None)
            start = cursor
        else:
            if trace is not None:
                trace.speaker_changes += 1
            if rng.random() < config.p_overlap:
                lo = max(last.start_s, frontier_prev)
                hi = last.end_s
                if lo < hi:
                    start = float(rng.uniform(lo, hi))
                    if trace is not None:
                        trace.overlaps += 1
                else:
                    # Anchor fully covered by a still-running earlier
                    # utterance: overlapping it would put three utterances
                    # on one instant, so fall back to an appended turn.
                    if not first_loop_placement:
                        cursor += _silence("inter", trace.inter_silences_s if trace else None)
                    start = cursor
            else:
                if not first_loop_placement:
                    cursor += _silence("inter", trace.inter_silences_s if trace else None)
                start = cursor
        _place(role, start, seg, 0.0)
        first_loop_placement = False

    kept = []
    for p in placed:
        if p.start_s >= config.duration_s:
            continue
        if p.end_s > config.duration_s:
            p.end_s = config.duration_s
        kept.append(p)
    kept.sort(key=lambda p: p.start_s)

    return ConversationPlan(
        placed=kept,
        total_duration_s=config.duration_s,
        child_speaker_id=child.speaker_id,
        adult_speaker_id=adult.speaker_id,
        adult_role=adult.role,
        snr_db=snr_db,
        is_no_speech=False,
    )


def _split_pools(speakers: list[Speaker]) -> dict[str, list[Speaker]]:
    pools: dict[str, list[Speaker]] = {ROLE_CHILD: [], ROLE_ADULT_FEMALE: [], ROLE_ADULT_MALE: []}
    for s in speakers:
        pools[s.role].append(s)
    return pools


def validate_pools_for_batch(config: SimulationConfig, speakers: list[Speaker]) -> None:
    pools = _split_pools(speakers)
    if not pools[ROLE_CHILD]:
        raise ValueError("speaker pool has no child speakers")
    if config.p_female_adult > 0.0 and not pools[ROLE_ADULT_FEMALE]:
        raise ValueError("speaker pool has no adult_female speakers but p_female_adult > 0")
    if config.p_female_adult < 1.0 and not pools[ROLE_ADULT_MALE]:
        raise ValueError("speaker pool has no adult_male speakers but p_female_adult < 1")


def plan_rng(seed: int, index: int) -> np.random.Generator:
    """The planning PRNG sub-stream for conversation ``index``."""
    return np.random.default_rng([int(seed), int(index), STREAM_PLAN])


def render_rng(seed: int, index: int) -> np.random.Generator:
    """The rendering (noise selection) PRNG sub-stream for conversation ``index``."""
    return np.random.default_rng([int(seed), int(index), STREAM_RENDER])


def simulate_indexed(
    config: SimulationConfig,
    speakers: list[Speaker],
    index: int,
    trace: SimulationTrace | None = None,
) -> ConversationPlan:
    """Simulate conversation ``index`` of the batch keyed by ``config.seed``.

    Speaker selection and plan construction use a PRNG sub-stream derived
    from (seed, index), so any single conversation is reproducible without
    generating the ones before it.
    """
    pools = _split_pools(speakers)
    rng = plan_rng(config.seed, index)
    adult_pool = pools[ROLE_ADULT_FEMALE] if rng.random() < config.p_female_adult else pools[ROLE_ADULT_MALE]
    if not adult_pool or not pools[ROLE_CHILD]:
        raise ValueError("speaker pool is missing a required role")
    adult = adult_pool[int(rng.integers(0, len(adult_pool)))]
    child = pools[ROLE_CHILD][int(rng.integers(0, len(pools[ROLE_CHILD])))]
    plan = simulate_plan(config, child, adult, rng, trace=trace)
    plan.seed = config.seed
    plan.index = index
    return plan


def generate_batch(
    config: SimulationConfig, speakers: list[Speaker], n: int
) -> Iterator[ConversationPlan]:
    """Yield ``n`` conversation plans in index order.

    Child and adult speakers are drawn uniformly with replacement across
    conversations; the adult comes from the female pool with probability
    ``p_female_adult``. Pool requirements are validated before any plan is
    produced.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    validate_pools_for_batch(config, speakers)

    def _iter() -> Iterator[ConversationPlan]:
        for i in range(n):
            yield simulate_indexed(config, speakers, i)

    return _iter()


def plan_to_dict(plan: ConversationPlan) -> dict:
    """JSON-ready form of a plan; enough to re-render the audio bit-exactly."""
    return {
        "schema": PLAN_SCHEMA,
        "total_duration_s": plan.total_duration_s,
        "child_speaker_id": plan.child_speaker_id,
        "adult_speaker_id": plan.adult_speaker_id,
        "adult_role": plan.adult_role,
        "snr_db": None if plan.is_no_speech else plan.snr_db,
        "is_no_speech": plan.is_no_speech,
        "seed": plan.seed,
        "index": plan.index,
        "placements": [
            {
                "role": p.role,
                "start_s": p.start_s,
                "end_s": p.end_s,
                "source_offset_s": p.source_offset_s,
                "segment_source_id": p.segment_source_id,
            }
            for p in plan.placed
        ],
    }


def plan_from_dict(
    data: dict, speakers_by_id: dict[str, Speaker] | None = None
) -> ConversationPlan:
    """Rebuild a plan from its serialized form.

    When ``speakers_by_id`` is given, placements are re-attached to the
    loaded segments (required before rendering).
    """
    if data.get("schema") != PLAN_SCHEMA:
        raise ValueError(f"unknown plan schema {data.get('schema')!r}")
    segment_lookup: dict[str, SpeechSegment] = {}
    if speakers_by_id is not None:
        for spk in speakers_by_id.values():
            for seg in spk.utterances:
                segment_lookup[seg.source_id] = seg
    placed = []
    for rec in data["placements"]:
        seg = segment_lookup.get(rec["segment_source_id"]) if segment_lookup else None
        if speakers_by_id is not None and seg is None:
            raise ValueError(
                f"plan references unknown segment {rec['segment_source_id']!r}"
            )
        placed.append(
            PlacedUtterance(
                role=rec["role"],
                start_s=rec["start_s"],
                end_s=rec["end_s"],
                segment=seg,
                source_offset_s=rec["source_offset_s"],
                segment_source_id=rec["segment_source_id"],
            )
        )
    return ConversationPlan(
        placed=placed,
        total_duration_s=data["total_duration_s"],
        child_speaker_id=data["child_speaker_id"],
        adult_speaker_id=data["adult_speaker_id"],
        adult_role=data["adult_role"],
        snr_db=data["snr_db"],
        is_no_speech=data["is_no_speech"],
        seed=data["seed"],
        index=data["index"],
    )


def save_plan(plan: ConversationPlan, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(plan_to_dict(plan), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_plan(path, speakers_by_id: dict[str, Speaker] | None = None) -> ConversationPlan:
    with open(path, "r", encoding="utf-8") as fh:
        return plan_from_dict(json.load(fh), speakers_by_id)
