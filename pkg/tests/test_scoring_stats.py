from __future__ import annotations

import math
import random

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from bpmn_factory import friedman_statistic, wilcoxon_enumerated_p
from bpmnbench.scoring import (
    SampleEvaluation, WrongRunCount, avbm, mean_scores, q_qual, q_total,
)
from bpmnbench.stats import (
    DegenerateDesign, TooFewPairs, bonferroni, chi2_sf, contrasts_csv, contrasts_markdown,
    dimension_scores, normal_sf, pairwise_contrasts, score_matrix, skillings_mack, wilcoxon_signed_rank,
)


class TestAggregation:
    def test_reference_row(self):
        assert abs(q_qual(0.8955, 0.8721, 0.5747) - 0.7808) <= 5e-4
        assert abs(q_total(0.8955, 0.8721, 0.5747, 0.9733) - 0.8289) <= 5e-4

    def test_avbm(self):
        assert avbm([100, 105, 100, 103, 103]) == 102.2
        with pytest.raises(WrongRunCount):
            avbm([1, 2, 3])

    def test_sample_evaluation_rules(self):
        assert SampleEvaluation(0.0).q_total is None
        e = SampleEvaluation(1.0, 1.0, 0.5, 0.75)
        assert e.q_qual == 0.75 and e.q_total == pytest.approx(3.25 / 4)
        with pytest.raises(ValueError):
            SampleEvaluation(0.0, 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            SampleEvaluation(1.0, 1.0, None, 1.0)
        with pytest.raises(ValueError):
            SampleEvaluation(0.5)

    def test_means_over_valid_only(self):
        evs = [SampleEvaluation(1.0, 1.0, 0.5, 1.0), SampleEvaluation(1.0, 0.5, 0.5, 0.0), SampleEvaluation(0.0)]
        m = mean_scores(evs, valid_counts_per_run=[2, 2, 2, 2, 2])
        assert m.n_attempts == 3 and m.n_valid == 2
        assert m.q_val == pytest.approx(2 / 3)
        assert (m.q_syn, m.q_prag, m.q_sem) == (0.75, 0.5, 0.5)
        assert m.q_total == pytest.approx((0.75 + 0.5 + 0.5 + 2 / 3) / 4)
        assert m.avbm == 2.0 and m.excluded

    def test_nothing_valid(self):
        m = mean_scores([SampleEvaluation(0.0)] * 4)
        assert m.q_val == 0.0 and m.q_total is None and m.q_syn is None and not m.excluded

    @given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=20))
    def test_bounds(self, rows):
        m = mean_scores(SampleEvaluation(1.0, *r) for r in rows)
        assert 0.0 <= m.q_qual <= 1.0 + 1e-12 and 0.0 <= m.q_total <= 1.0 + 1e-12


class TestDistributions:
    @pytest.mark.parametrize("i", range(20))
    def test_chi2_tail(self, i):
        df = 1 + i % 9
        x = 0.25 + 1.7 * i
        ref = float(mpmath.gammainc(df / 2, x / 2, mpmath.inf, regularized=True))
        assert chi2_sf(x, df) == pytest.approx(ref, rel=1e-8, abs=1e-300)

    @pytest.mark.parametrize("i", range(20))
    def test_normal_tail(self, i):
        z = -3 + 0.45 * i
        ref = float(mpmath.erfc(z / mpmath.sqrt(2)) / 2)
        assert normal_sf(z) == pytest.approx(ref, rel=1e-8)


class TestSkillingsMack:
    @given(st.integers(0, 10_000), st.integers(2, 30), st.integers(2, 6))
    def test_equals_friedman_when_complete(self, seed, b, k):
        rng = np.random.default_rng(seed)
        m = rng.random((b, k)).tolist()
        assert skillings_mack(m).statistic == pytest.approx(friedman_statistic(m), abs=1e-9)
        assert skillings_mack(m).df == k - 1

    def test_tied_complete_matrix_still_friedman(self):
        m = [[1, 1, 2], [3, 2, 2], [0.5, 0.5, 0.5], [1, 2, 3]]
        assert skillings_mack(m).statistic == pytest.approx(friedman_statistic(m), abs=1e-12)

    def test_missing_cells(self):
        m = [[1, 2, None], [None, 2, 3], [3, None, 1], [1, 2, 3], [2, 3, 1]]
        r = skillings_mack(m)
        assert r.df == 2 and r.statistic >= 0 and 0 <= r.p_value <= 1

    def test_strong_effect_is_significant(self):
        m = [[i * 0.0 + j for j in range(4)] for i in range(25)]
        assert skillings_mack(m).p_value < 1e-6

    def test_disconnected_design(self):
        with pytest.raises(DegenerateDesign):
            skillings_mack([[1, 2, None, None], [2, 1, None, None], [None, None, 1, 2]])
        with pytest.raises(DegenerateDesign):
            skillings_mack([[1], [2]])


class TestWilcoxon:
    def test_all_positive_six(self):
        r = wilcoxon_signed_rank([(d, 0) for d in (1, 2, 3, 4, 5, 6)])
        assert r.p_value == 0.03125 and r.statistic == 0 and r.n_pairs == 6

    def test_zero_differences_dropped(self):
        r = wilcoxon_signed_rank([(1, 1), (2, 1), (3, 1)])
        assert r.n_pairs == 2
        with pytest.raises(TooFewPairs):
            wilcoxon_signed_rank([(1, 1)])

    @given(st.lists(st.integers(-6, 6), min_size=1, max_size=11))
    def test_exact_matches_enumeration(self, diffs):
        if not any(diffs):
            return
        r = wilcoxon_signed_rank([(d, 0) for d in diffs], method="exact")
        assert r.p_value == pytest.approx(wilcoxon_enumerated_p(diffs), abs=1e-12)

    @given(st.lists(st.integers(-5, 5), min_size=1, max_size=11))
    def test_pratt_matches_enumeration(self, diffs):
        if not any(diffs):
            return
        r = wilcoxon_signed_rank([(d, 0) for d in diffs], method="exact", zero_method="pratt")
        assert r.p_value == pytest.approx(wilcoxon_enumerated_p(diffs, pratt=True), abs=1e-12)

    def test_pratt_differs_from_dropping(self):
        diffs = [0, 0, 1, 2, 3, -4, 5, 6]
        pratt = wilcoxon_signed_rank([(d, 0) for d in diffs], zero_method="pratt")
        drop = wilcoxon_signed_rank([(d, 0) for d in diffs])
        assert pratt.n_pairs == drop.n_pairs == 6
        assert pratt.statistic == 6.0 and drop.statistic == 4.0
        with pytest.raises(ValueError):
            wilcoxon_signed_rank([(1, 0)], zero_method="zsplit")

    @pytest.mark.parametrize("n", [15, 17])
    def test_pratt_normal_close_to_enumeration(self, n):
        rng = random.Random(n)
        diffs = [0.0, 0.0] + [rng.gauss(0.3, 1) for _ in range(n)]
        approx = wilcoxon_signed_rank([(d, 0) for d in diffs], method="normal", zero_method="pratt").p_value
        assert abs(approx - wilcoxon_enumerated_p(diffs, pratt=True)) <= 0.01

    @given(st.lists(st.integers(-9, 9).filter(bool), min_size=1, max_size=30))
    def test_sign_flip_symmetry(self, diffs):
        a = wilcoxon_signed_rank([(d, 0) for d in diffs])
        b = wilcoxon_signed_rank([(0, d) for d in diffs])
        assert a.p_value == b.p_value and a.statistic == b.statistic

    @pytest.mark.parametrize("n", [15, 17])
    def test_normal_close_to_enumeration(self, n):
        rng = random.Random(n)
        diffs = [rng.gauss(0.3, 1) for _ in range(n)]
        approx = wilcoxon_signed_rank([(d, 0) for d in diffs], method="normal").p_value
        assert abs(approx - wilcoxon_enumerated_p(diffs)) <= 0.01

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            wilcoxon_signed_rank([(1, 0)], method="bootstrap")


class TestBonferroni:
    def test_examples(self):
        assert bonferroni([0.001], 55) == [0.055]
        assert bonferroni([0.02, 0.5]) == [0.04, 1.0]
        with pytest.raises(ValueError):
            bonferroni([0.1, 0.2], 1)

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=10), st.integers(0, 50))
    def test_monotone_and_capped(self, ps, extra):
        m = len(ps) + extra
        adj = bonferroni(ps, m)
        assert all(p <= a <= 1.0 for p, a in zip(ps, adj))
        order = sorted(range(len(ps)), key=ps.__getitem__)
        assert all(adj[i] <= adj[j] for i, j in zip(order, order[1:]))


def _record(llm, sample, run, syn):
    scores = None if syn is None else {"syn": {"q_syn": syn}, "prag": {"q_prag": 0.5}, "sem": {"q_sem": 0.5}}
    return {"llm": llm, "sample_id": sample, "run_index": run, "scores": scores}


class TestContrasts:
    def test_table(self):
        recs = []
        for s in range(8):
            for run in (1, 2):
                recs.append(_record("good", f"s{s}", run, 0.9 + 0.001 * s))
                recs.append(_record("bad", f"s{s}", run, 0.1 + 0.002 * s * run))
                recs.append(_record("none", f"s{s}", run, None))
        scores = dimension_scores(recs, "syntactic")
        keys, mat = score_matrix(scores, ["bad", "good"])
        assert len(keys) == 16 and mat[0] == [0.1, 0.9]
        rows = pairwise_contrasts(scores)
        assert len(rows) == 1  # "none" shares no valid pair
        c = rows[0]
        assert (c.better, c.worse, c.n_pairs) == ("good", "bad", 16)
        assert c.p_adj == c.p_value and c.significant
        csv_text = contrasts_csv(rows)
        assert csv_text.startswith("better,worse,W,n_pairs,p,p_adj,result\r\n")
        assert contrasts_markdown(rows).splitlines()[2].startswith("| good | bad |")

    def test_identical_generators(self):
        recs = [_record(l, f"s{i}", 1, 0.5) for l in ("a", "b", "c") for i in range(4)]
        rows = pairwise_contrasts(dimension_scores(recs, "syntactic"))
        assert len(rows) == 3 and all(r.p_value == 1.0 and not r.significant for r in rows)
