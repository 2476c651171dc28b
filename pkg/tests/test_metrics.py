from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyadsim.labels import ADULT, CHILD, Timeline
from dyadsim.metrics import (
    DiarizationScore,
    ScoringConfig,
    brute_force_score,
    combine_scores,
    format_report,
    score_corpus,
    score_session,
)

NO_COLLAR = ScoringConfig(collar_s=0.0)


def tl(intervals, extent=10.0, session="s"):
    return Timeline(intervals=intervals, session_id=session, extent_s=extent)


def random_pair(seed: int, cluster_labels: bool = False):
    """A random (ref, hyp) pair with millisecond-aligned boundaries."""
    rng = np.random.default_rng(seed)
    extent = float(rng.integers(8, 61))

    def rand_intervals(labels, max_total=20):
        out = []
        budget = int(rng.integers(1, 11))
        for label in labels:
            at = round(float(rng.uniform(0.0, 2.0)), 3)
            k = int(rng.integers(0, budget + 1))
            for _ in range(k):
                if len(out) >= max_total:
                    break
                dur = round(float(rng.uniform(0.05, 3.0)), 3)
                gap = round(float(rng.uniform(0.0, 2.0)), 3)
                if at + dur > extent:
                    break
                out.append((at, at + dur, label))
                at += dur + gap
        return out

    ref = tl(rand_intervals([CHILD, ADULT]), extent=extent, session=f"r{seed}")
    hyp_labels = ["spk0", "spk1"] if cluster_labels else [CHILD, ADULT]
    if cluster_labels and rng.random() < 0.3:
        hyp_labels.append("spk2")
    hyp = tl(rand_intervals(hyp_labels), extent=extent, session=f"r{seed}")
    return ref, hyp


class TestHandCases:
    def test_perfect_hypothesis(self):
        ref = tl([(0.0, 2.0, CHILD), (3.0, 5.0, ADULT)])
        score = score_session(ref, ref, NO_COLLAR)
        assert score.fa_s == 0.0 and score.md_s == 0.0 and score.sc_s == 0.0
        assert score.der == 0.0

    def test_confusion_half(self):
        ref = tl([(0.0, 2.0, CHILD), (2.0, 4.0, ADULT)])
        hyp = tl([(0.0, 4.0, CHILD)])
        score = score_session(ref, hyp, NO_COLLAR)
        assert score.fa_s == pytest.approx(0.0)
        assert score.md_s == pytest.approx(0.0)
        assert score.sc_s == pytest.approx(2.0)
        assert score.ref_speech_s == pytest.approx(4.0)
        assert score.der == pytest.approx(0.5)

    def test_false_alarm_full(self):
        ref = tl([(0.0, 2.0, CHILD)])
        hyp = tl([(0.0, 2.0, CHILD), (0.0, 2.0, ADULT)])
        score = score_session(ref, hyp, NO_COLLAR)
        assert score.fa_s == pytest.approx(2.0)
        assert score.sc_s == pytest.approx(0.0)
        assert score.ref_speech_s == pytest.approx(2.0)
        assert score.der == pytest.approx(1.0)

    def test_identity_vs_optimal_mapping(self):
        ref = tl([(0.0, 1.0, CHILD)])
        hyp = tl([(0.0, 1.0, "spk0")])
        identity = score_session(ref, hyp, ScoringConfig(collar_s=0.0, mapping="identity"))
        assert identity.sc_s == pytest.approx(1.0)
        assert identity.der == pytest.approx(1.0)
        optimal = score_session(ref, hyp, ScoringConfig(collar_s=0.0, mapping="optimal"))
        assert optimal.der == pytest.approx(0.0)

    def test_missed_detection(self):
        ref = tl([(0.0, 4.0, CHILD)])
        hyp = tl([(0.0, 1.0, CHILD)])
        score = score_session(ref, hyp, NO_COLLAR)
        assert score.md_s == pytest.approx(3.0)
        assert score.der == pytest.approx(0.75)

    def test_overlap_counts_with_multiplicity(self):
        ref = tl([(0.0, 2.0, CHILD), (0.0, 2.0, ADULT)])
        hyp = tl([(0.0, 2.0, CHILD)])
        score = score_session(ref, hyp, NO_COLLAR)
        assert score.ref_speech_s == pytest.approx(4.0)
        assert score.md_s == pytest.approx(2.0)
        assert score.der == pytest.approx(0.5)


class TestCollar:
    def test_collar_removes_boundary_errors(self):
        # Hypothesis boundary jitter inside the collar is forgiven.
        ref = tl([(1.0, 3.0, CHILD)])
        hyp = tl([(1.05, 3.05, CHILD)])
        with_collar = score_session(ref, hyp, ScoringConfig(collar_s=0.1))
        assert with_collar.der == pytest.approx(0.0)
        without = score_session(ref, hyp, NO_COLLAR)
        assert without.der is not None and without.der > 0

    def test_collar_shrinks_ref_speech(self):
        ref = tl([(1.0, 3.0, CHILD)])
        base = score_session(ref, ref, NO_COLLAR).ref_speech_s
        seen = [base]
        for collar in (0.1, 0.25):
            seen.append(score_session(ref, ref, ScoringConfig(collar_s=collar)).ref_speech_s)
        assert seen == sorted(seen, reverse=True)

    def test_collar_swallows_everything(self):
        ref = tl([(1.0, 1.2, CHILD)])
        hyp = tl([(5.0, 6.0, CHILD)])
        score = score_session(ref, hyp, ScoringConfig(collar_s=0.5))
        assert score.ref_speech_s == pytest.approx(0.0)
        assert score.der is None and score.fa_rate is None

    def test_fa_inside_collar_not_penalized(self):
        ref = tl([(1.0, 2.0, CHILD)])
        hyp = tl([(1.0, 2.0, CHILD), (2.0, 2.05, ADULT)])
        score = score_session(ref, hyp, ScoringConfig(collar_s=0.1))
        assert score.fa_s == pytest.approx(0.0)


class TestScoreOverlapFlag:
    def test_overlap_regions_excluded_when_disabled(self):
        ref = tl([(0.0, 2.0, CHILD), (1.0, 3.0, ADULT)])
        hyp = tl([(0.0, 3.0, CHILD)])
        cfg = ScoringConfig(collar_s=0.0, score_overlap=False)
        score = score_session(ref, hyp, cfg)
        # Overlapping stretch [1, 2) is not scored: 1 s child + 1 s adult remain.
        assert score.ref_speech_s == pytest.approx(2.0)
        assert score.sc_s == pytest.approx(1.0)


class TestValidation:
    def test_extent_mismatch(self):
        with pytest.raises(ValueError, match="extent"):
            score_session(tl([], extent=10.0), tl([], extent=12.0), NO_COLLAR)

    def test_ref_labels_must_be_roles(self):
        with pytest.raises(ValueError, match="reference labels"):
            score_session(tl([(0.0, 1.0, "spk0")]), tl([]), NO_COLLAR)

    def test_too_many_hyp_labels_under_optimal(self):
        hyp = tl([(float(i), float(i) + 0.5, f"spk{i}") for i in range(9)])
        cfg = ScoringConfig(collar_s=0.0, mapping="optimal")
        with pytest.raises(ValueError, match="at most 8"):
            score_session(tl([(0.0, 1.0, CHILD)]), hyp, cfg)

    def test_bad_mapping_name(self):
        with pytest.raises(ValueError):
            ScoringConfig(mapping="hungarian")

    def test_negative_collar(self):
        with pytest.raises(ValueError):
            ScoringConfig(collar_s=-0.1)


class TestCorpus:
    def test_two_identical_sessions_equal_one(self):
        ref = tl([(0.0, 2.0, CHILD)])
        hyp = tl([(0.0, 1.0, CHILD)])
        single = score_session(ref, hyp, NO_COLLAR)
        corpus = score_corpus([(ref, hyp), (ref, hyp)], NO_COLLAR)
        assert corpus.der == pytest.approx(single.der)

    def test_micro_average(self):
        ref_a = tl([(0.0, 10.0, CHILD)], session="a")
        hyp_a = tl([(0.0, 10.0, CHILD)], session="a")
        ref_b = tl([(0.0, 5.0, CHILD), (5.0, 10.0, ADULT)], session="b")
        hyp_b = tl([(0.0, 10.0, CHILD)], session="b")
        assert score_session(ref_a, hyp_a, NO_COLLAR).der == pytest.approx(0.0)
        assert score_session(ref_b, hyp_b, NO_COLLAR).der == pytest.approx(0.5)
        corpus = score_corpus([(ref_a, hyp_a), (ref_b, hyp_b)], NO_COLLAR)
        assert corpus.der == pytest.approx(0.25)

    def test_order_invariance(self):
        pairs = [random_pair(seed) for seed in range(8)]
        forward = score_corpus(pairs, NO_COLLAR)
        backward = score_corpus(list(reversed(pairs)), NO_COLLAR)
        assert forward == backward

    def test_session_error_names_session(self):
        ref = tl([(0.0, 1.0, CHILD)], session="bad_one")
        hyp = tl([], extent=12.0, session="bad_one")
        with pytest.raises(ValueError, match="bad_one"):
            score_corpus([(ref, hyp)], NO_COLLAR)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            score_corpus([], NO_COLLAR)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 10**6), collar=st.sampled_from([0.0, 0.1, 0.25]))
    def test_der_decomposition_exact(self, seed, collar):
        ref, hyp = random_pair(seed)
        score = score_session(ref, hyp, ScoringConfig(collar_s=collar))
        if score.der is not None:
            assert score.der == score.fa_rate + score.md_rate + score.sc_rate

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_optimal_never_worse_than_identity(self, seed):
        ref, hyp = random_pair(seed, cluster_labels=seed % 2 == 0)
        identity = score_session(ref, hyp, ScoringConfig(collar_s=0.1, mapping="identity"))
        optimal = score_session(ref, hyp, ScoringConfig(collar_s=0.1, mapping="optimal"))
        if identity.der is not None:
            assert optimal.der <= identity.der + 1e-12

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_role_swap_symmetry(self, seed):
        ref, hyp = random_pair(seed)
        swap = {CHILD: ADULT, ADULT: CHILD}

        def swapped(t):
            return tl(
                [(s, e, swap[lb]) for s, e, lb in t.intervals],
                extent=t.extent_s,
                session=t.session_id,
            )

        a = score_session(ref, hyp, NO_COLLAR)
        b = score_session(swapped(ref), swapped(hyp), NO_COLLAR)
        assert a.fa_s == pytest.approx(b.fa_s)
        assert a.md_s == pytest.approx(b.md_s)
        assert a.sc_s == pytest.approx(b.sc_s)
        assert a.ref_speech_s == pytest.approx(b.ref_speech_s)

    def test_hyp_equals_ref_is_zero_for_random_timelines(self):
        for seed in range(25):
            ref, _ = random_pair(seed)
            for collar in (0.0, 0.1, 0.25):
                score = score_session(ref, ref, ScoringConfig(collar_s=collar))
                if score.der is not None:
                    assert score.der == 0.0


class TestBruteForceOracle:
    def test_oracle_on_confusion_case(self):
        ref = tl([(0.0, 2.0, CHILD), (2.0, 4.0, ADULT)])
        hyp = tl([(0.0, 4.0, CHILD)])
        oracle = brute_force_score(ref, hyp, NO_COLLAR, grid_s=0.001)
        assert oracle.sc_s == pytest.approx(2.0, abs=0.001)
        assert oracle.der == pytest.approx(0.5, abs=0.001)

    def test_zero_scored_region_absent_rates(self):
        ref = tl([(1.0, 1.2, CHILD)])
        hyp = tl([])
        oracle = brute_force_score(ref, hyp, ScoringConfig(collar_s=0.5), grid_s=0.001)
        assert oracle.der is None
        assert oracle.ref_speech_s == pytest.approx(0.0, abs=0.01)

    @pytest.mark.parametrize("collar", [0.0, 0.1, 0.25])
    @pytest.mark.parametrize("mapping", ["identity", "optimal"])
    def test_oracle_equivalence_sample(self, collar, mapping):
        # The acceptance suite runs the full 200-pair sweep.
        for seed in range(40):
            ref, hyp = random_pair(seed, cluster_labels=mapping == "optimal")
            cfg = ScoringConfig(collar_s=collar, mapping=mapping)
            fast = score_session(ref, hyp, cfg)
            slow = brute_force_score(ref, hyp, cfg, grid_s=0.001)
            if fast.der is None or slow.der is None:
                assert fast.der == slow.der
            else:
                assert abs(fast.der - slow.der) <= 0.001

    def test_oracle_equivalence_without_overlap_scoring(self):
        for seed in range(20):
            ref, hyp = random_pair(seed)
            cfg = ScoringConfig(collar_s=0.1, score_overlap=False)
            fast = score_session(ref, hyp, cfg)
            slow = brute_force_score(ref, hyp, cfg, grid_s=0.001)
            if fast.der is None or slow.der is None:
                assert fast.der == slow.der
            else:
                assert abs(fast.der - slow.der) <= 0.001


class TestReport:
    def test_percentages_one_decimal(self):
        score = DiarizationScore.from_durations(1.0, 0.5, 0.5, 4.0)
        text = format_report([("sess_a", score)], score)
        lines = text.splitlines()
        assert "sess_a" in lines[1]
        assert "25.0" in lines[1] and "12.5" in lines[1] and "50.0" in lines[1]
        assert lines[-1].startswith("TOTAL")

    def test_absent_rates_render_as_dash(self):
        score = DiarizationScore.from_durations(0.0, 0.0, 0.0, 0.0)
        text = format_report([("empty", score)])
        assert "-" in text

    def test_combine_matches_manual_sum(self):
        scores = [DiarizationScore.from_durations(1.0, 2.0, 3.0, 10.0) for _ in range(3)]
        combined = combine_scores(scores)
        assert combined.fa_s == pytest.approx(3.0)
        assert combined.ref_speech_s == pytest.approx(30.0)
        assert combined.der == pytest.approx(0.6)
