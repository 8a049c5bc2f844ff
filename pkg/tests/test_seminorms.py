import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from radonosc import (DomainError, SampledFamily, SequenceI, SubsequenceError, TruncationGrid, long_short_split,
                      oscillation_norm, oscillation_pointwise, rademacher_menshov_rhs, variation_pointwise,
                      worst_sequence_search)
from radonosc.seminorms import (block_table, maximal_function, partial_sums, short_variation_norm,
                                sup_oscillation_norm_p2)

GRID4 = TruncationGrid((1.0, 2.0, 3.0, 4.0))


def osc_reference(a, idx):
    """Loop form of the truncated oscillation at one point."""
    total = 0.0
    for s, e in zip(idx[:-1], idx[1:]):
        total += max(abs(a[i] - a[s]) ** 2 for i in range(s, e))
    return math.sqrt(total)


def var_reference(a, r):
    best = 0.0
    for m in range(2, len(a) + 1):
        for c in itertools.combinations(range(len(a)), m):
            best = max(best, sum(abs(a[j] - a[i]) ** r for i, j in zip(c, c[1:])) ** (1 / r))
    return best


class TestObjects:
    def test_grid_validation(self):
        for bad in [(), (0.0, 1.0), (2.0, 1.0), (1.0, 1.0)]:
            with pytest.raises(ValueError):
                TruncationGrid(bad)

    def test_sequence_must_come_from_grid(self):
        with pytest.raises(SubsequenceError):
            SequenceI((1.0, 2.5)).indices(GRID4)
        with pytest.raises(SubsequenceError):
            SequenceI((3.0, 2.0))

    def test_family_shape(self):
        with pytest.raises(ValueError):
            SampledFamily(GRID4, np.zeros((3, 2)))


class TestOscillation:
    def test_linear_example(self):
        assert oscillation_pointwise(np.array([1.0, 2, 3, 4]), SequenceI((1.0, 3.0)), GRID4).item() == 1.0

    def test_constant_and_zero(self):
        fam = SampledFamily(GRID4, np.full((4, 3), 2 - 1j))
        I = SequenceI((1.0, 2.0, 4.0))
        assert oscillation_norm(fam, I, 2) == 0.0
        assert oscillation_norm(SampledFamily(GRID4, np.zeros((4, 3))), I, 1.5) == 0.0

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-100, 100), min_size=5, max_size=5), st.data())
    def test_matches_reference(self, a, data):
        grid = TruncationGrid(tuple(float(i + 1) for i in range(5)))
        idx = sorted(data.draw(st.sets(st.integers(0, 4), min_size=2, max_size=5)))
        got = oscillation_pointwise(np.array(a), SequenceI.from_indices(grid, idx), grid).item()
        assert got == pytest.approx(osc_reference(a, idx), rel=1e-12, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-10, 10), min_size=6, max_size=6))
    def test_bounded_by_variation(self, a):
        grid = TruncationGrid(tuple(float(i + 1) for i in range(6)))
        v = variation_pointwise(np.array(a), 2).item()
        for idx in ([0, 2, 5], [0, 1, 2, 3, 4, 5], [1, 4]):
            assert oscillation_pointwise(np.array(a), SequenceI.from_indices(grid, idx), grid).item() <= v + 1e-9

    def test_norm_weights(self):
        fam = SampledFamily(GRID4, np.array([[0, 0], [3, 4], [0, 0], [0, 0]], float), cell_volume=0.5)
        I = SequenceI((1.0, 4.0))
        assert oscillation_norm(fam, I, 2) == pytest.approx(math.sqrt(0.5 * 25))
        assert oscillation_norm(fam, I, np.inf) == 4.0
        with pytest.raises(DomainError):
            oscillation_norm(fam, I, 0.9)


class TestVariation:
    def test_example(self):
        assert variation_pointwise(np.array([0.0, 1, 0, 1]), 2).item() == pytest.approx(math.sqrt(3), abs=1e-15)

    def test_monotone_r1(self):
        assert variation_pointwise(np.array([0.0, 1, 3, 7]), 1).item() == 7.0

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=7), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
    def test_exhaustive(self, a, r):
        assert variation_pointwise(np.array(a), r).item() == pytest.approx(var_reference(a, r), rel=1e-10, abs=1e-12)

    def test_constant_and_inf(self):
        assert variation_pointwise(np.ones(5), 2).item() == 0.0
        assert variation_pointwise(np.array([0.0, 5, -2]), np.inf).item() == 7.0


class TestMaximalAndRM:
    def test_maximal(self):
        assert np.all(maximal_function(SampledFamily(GRID4, np.full((4, 2), -3.0))) == 3.0)

    @pytest.mark.parametrize("m", [0, 1, 3, 6])
    def test_spike(self, m):
        c = np.zeros(2 ** m, complex)
        c[min(3, 2 ** m - 1)] = 2 - 1j
        assert rademacher_menshov_rhs(c) == pytest.approx((m + 1) * abs(2 - 1j), rel=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=2, max_size=16))
    def test_inequality_holds(self, c):
        m = math.ceil(math.log2(len(c)))
        lhs = variation_pointwise(partial_sums(c), 2).item()
        assert lhs <= math.sqrt(2) * rademacher_menshov_rhs(c) * (1 + 1e-12) + 1e-12 or m == 0


class TestSearch:
    @pytest.fixture
    def family(self):
        rng = np.random.default_rng(3)
        grid = TruncationGrid(tuple(float(i + 1) for i in range(10)))
        return SampledFamily(grid, np.cumsum(rng.standard_normal((10, 6)), axis=0))

    def test_full_sequence(self, family):
        res = worst_sequence_search(family, 2, 9, "exhaustive")
        full = SequenceI.from_indices(family.grid, range(10))
        assert res.sequence == full and res.value == pytest.approx(oscillation_norm(family, full, 2), rel=1e-12)

    @pytest.mark.parametrize("N", [1, 3, 5])
    def test_strategies_agree(self, family, N):
        ex = worst_sequence_search(family, 2, N, "exhaustive")
        dp = worst_sequence_search(family, 2, N, "dp")
        rr = worst_sequence_search(family, 2, N, "random-restarts", restarts=50)
        gr = worst_sequence_search(family, 2, N, "greedy")
        assert dp.value == pytest.approx(ex.value, rel=1e-12)
        assert rr.value == pytest.approx(ex.value, rel=1e-12)
        assert gr.value <= ex.value * (1 + 1e-12)
        assert oscillation_norm(family, ex.sequence, 2) == pytest.approx(ex.value, rel=1e-12)

    def test_p_not_two(self, family):
        ex = worst_sequence_search(family, 3, 3, "exhaustive")
        rr = worst_sequence_search(family, 3, 3, "random-restarts", restarts=100)
        assert rr.value <= ex.value * (1 + 1e-12) and rr.value >= 0.95 * ex.value
        with pytest.raises(ValueError):
            worst_sequence_search(family, 3, 3, "dp")

    def test_threads_deterministic(self, family):
        a = worst_sequence_search(family, 1.5, 4, restarts=40, seed=9, n_jobs=1)
        b = worst_sequence_search(family, 1.5, 4, restarts=40, seed=9, n_jobs=4)
        assert a == b

    def test_infeasible_n(self, family):
        with pytest.raises(ValueError):
            worst_sequence_search(family, 2, 10)

    def test_block_table(self, family):
        W = block_table(family)
        for idx in ([0, 4, 9], [2, 3, 7, 8]):
            I = SequenceI.from_indices(family.grid, idx)
            assert math.sqrt(sum(W[s, e] for s, e in zip(idx, idx[1:]))) == pytest.approx(oscillation_norm(family, I, 2))

    def test_sup_over_all_n(self, family):
        _, v = sup_oscillation_norm_p2(family)
        best = max(worst_sequence_search(family, 2, N, "exhaustive").value for N in range(1, 10))
        assert v == pytest.approx(best, rel=1e-12)

    def test_sup_two_points(self):
        fam = SampledFamily(TruncationGrid((1.0, 2.0)), np.array([0.0, 5.0]))
        seq, v = sup_oscillation_norm_p2(fam)
        assert v == 0.0 and seq.N == 1


class TestSplit:
    def test_constant(self):
        grid = TruncationGrid.logspace(1, 300, 40)
        fam = SampledFamily(grid, np.ones((40, 3)))
        sp = long_short_split(fam, 0.5)
        assert np.all(sp.short_variations == 0)
        assert sup_oscillation_norm_p2(sp.long_family)[1] == 0.0

    def test_nodes(self):
        grid = TruncationGrid.logspace(1, 300, 40)
        sp = long_short_split(SampledFamily(grid, np.zeros(40)), 0.5)
        nodes = [2 ** math.sqrt(n) for n in range(100)]
        expect = sorted({int(np.searchsorted(grid.as_array(), v, side="right") - 1) for v in nodes if v <= 300})
        assert sp.node_indices.tolist() == expect
        with pytest.raises(DomainError):
            long_short_split(SampledFamily(grid, np.zeros(40)), 1.0)

    def test_one_block(self):
        rng = np.random.default_rng(7)
        grid = TruncationGrid(tuple(np.linspace(2.0, 2.6, 8)))
        tau = 0.5  # block [2, 2^{sqrt 2}) holds the whole grid
        for _ in range(50):
            fam = SampledFamily(grid, rng.standard_normal((8, 1)))
            sp = long_short_split(fam, tau)
            assert len(sp.node_indices) == 1
            full = sup_oscillation_norm_p2(fam)[1]
            assert full <= math.sqrt(2) * short_variation_norm(sp, 2) + 1e-12
