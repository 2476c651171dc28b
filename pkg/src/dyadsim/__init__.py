"""dyadsim: simulate labeled child-adult conversations and score diarization.

The package has five layers:

* :mod:`dyadsim.pools` loads manifests of single-speaker clips into
  role-tagged speaker pools with replenishing without-replacement sampling.
* :mod:`dyadsim.simulate` builds timestamped conversation plans from the
  pools (turn-taking, pauses, overlap, no-speech conversations).
* :mod:`dyadsim.audio` renders plans to waveforms and mixes background noise
  at a requested SNR.
* :mod:`dyadsim.labels` derives reference annotations (interval timelines,
  4-class frame labels, RTTM) and ingests model hypotheses.
* :mod:`dyadsim.metrics` computes false alarm / missed detection / speaker
  confusion / DER with a forgiveness collar and optional optimal speaker
  mapping, plus a brute-force grid oracle for verification.
"""

from .audio import NoisePool, load_noise_manifest, mix_noise, render, render_plan_audio
from .labels import (
    ADULT,
    CHILD,
    FrameLabelSequence,
    Timeline,
    frames_to_timeline,
    parse_rttm,
    plan_to_timeline,
    read_frames,
    timeline_to_frames,
    write_frames,
    write_rttm,
)
from .metrics import (
    DiarizationScore,
    ScoringConfig,
    brute_force_score,
    combine_scores,
    format_report,
    score_corpus,
    score_session,
)
from .pools import (
    PoolSampler,
    RoleStats,
    Speaker,
    SpeechSegment,
    draw_utterance,
    load_manifest,
    manifest_stats,
    pool_stats,
)
from .simulate import (
    ConversationPlan,
    PlacedUtterance,
    SimulationConfig,
    SimulationTrace,
    draw_silence,
    generate_batch,
    load_plan,
    plan_from_dict,
    plan_to_dict,
    save_plan,
    simulate_indexed,
    simulate_plan,
)
from .wavio import Waveform, read_wav, resample, write_wav

__version__ = "0.1.0"

__all__ = [
    "ADULT",
    "CHILD",
    "ConversationPlan",
    "DiarizationScore",
    "FrameLabelSequence",
    "NoisePool",
    "PlacedUtterance",
    "PoolSampler",
    "RoleStats",
    "ScoringConfig",
    "SimulationConfig",
    "SimulationTrace",
    "Speaker",
    "SpeechSegment",
    "Timeline",
    "Waveform",
    "brute_force_score",
    "combine_scores",
    "draw_silence",
    "draw_utterance",
    "format_report",
    "frames_to_timeline",
    "generate_batch",
    "load_manifest",
    "load_noise_manifest",
    "load_plan",
    "manifest_stats",
    "mix_noise",
    "parse_rttm",
    "plan_from_dict",
    "plan_to_dict",
    "plan_to_timeline",
    "pool_stats",
    "read_frames",
    "read_wav",
    "render",
    "render_plan_audio",
    "resample",
    "save_plan",
    "score_corpus",
    "score_session",
    "simulate_indexed",
    "simulate_plan",
    "timeline_to_frames",
    "write_frames",
    "write_rttm",
    "write_wav",
]
