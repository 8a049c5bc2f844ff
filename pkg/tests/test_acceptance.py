"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line with its runtime."""
import itertools
import time

import numpy as np

from radonosc import (ChristCubeSystem, ConvexBody, GridFunction, IWConfig, LatticeFunction, MultiIndexSet,
                      RationalPoint, SequenceI, TruncationGrid, conditional_expectation,
                      cont_multiplier, cubic_example_psi, discrete_radon_direct, discrete_radon_fft,
                      exp_multiplier, gauss_decay_fit, gauss_sum, iw_fractions, lp_norm, make_hilbert_kernel,
                      make_riesz_type_kernel, martingale_oscillation_probe, oscillation_pointwise,
                      projection_multiplier, rademacher_menshov_rhs, shell_fractions, telescoping_pieces,
                      variation_pointwise, verify_cancellation, verify_size_and_holder, worst_sequence_search)
from radonosc.circle import box_fourier_transform, box_frequencies, projection_level
from radonosc.experiments import ExperimentConfig, run_experiment
from radonosc.martingales import complement_difference, martingale_family

from conftest import ACCEPTANCE_LINES

HILBERT = make_hilbert_kernel()
INTERVAL = ConvexBody.euclidean_ball(1)
CUBIC = MultiIndexSet.from_degrees([3])


class Gate:
    def __init__(self, n, title, limit):
        self.n, self.title, self.limit = n, title, limit
        self.checks = []

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def check(self, name, ok, detail=""):
        self.checks.append((name, bool(ok), detail))

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        self.check("runtime", elapsed < self.limit, f"{elapsed:.2f}s < {self.limit:g}s")
        if exc_type is not None:
            self.check("raised", False, repr(exc))
        ok = all(c[1] for c in self.checks)
        failed = [f"{c[0]} ({c[2]})" for c in self.checks if not c[1]]
        summary = "; ".join(f"{c[0]}={c[2]}" for c in self.checks if c[2])
        ACCEPTANCE_LINES[self.n] = (f"criterion {self.n:2d} {'PASS' if ok else 'FAIL'}  {self.title}: "
                                    + (summary if ok else "failed " + ", ".join(failed)))
        if exc_type is None:
            assert ok, ACCEPTANCE_LINES[self.n]


def test_01_integer_frequencies_vanish():
    with Gate(1, "m_t vanishes at integer frequencies", 1.0) as g:
        xi = np.arange(-3, 4, dtype=float)[:, None]
        worst = max(float(np.max(np.abs(exp_multiplier(xi, HILBERT, INTERVAL, CUBIC, t)))) for t in (10, 100, 1000))
        g.check("max|m_t|", worst <= 1e-10, f"{worst:.1e}")


def test_02_closed_form_psi():
    with Gate(2, "continuous multiplier matches the sine integral form", 30.0) as g:
        worst = 0.0
        pairs = list(itertools.product(np.logspace(-3, 1, 10), np.logspace(0, 1, 10)))
        for i, (xi, t) in enumerate(pairs):
            xi = xi if i % 2 == 0 else -xi
            worst = max(worst, abs(cont_multiplier(xi, HILBERT, INTERVAL, CUBIC, t).value - cubic_example_psi(xi, t)))
        g.check("pairs", len(pairs) == 100, str(len(pairs)))
        g.check("max error", worst <= 1e-6, f"{worst:.1e}")


def test_03_fft_matches_direct():
    with Gate(3, "FFT and direct summation agree", 30.0) as g:
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(50):
            n = int(rng.integers(1, 300))
            f = LatticeFunction(rng.standard_normal(n) + 1j * rng.standard_normal(n), (int(rng.integers(-500, 500)),))
            t = float(rng.uniform(0.5, 32))
            a = discrete_radon_direct(f, HILBERT, INTERVAL, CUBIC, t)
            b = discrete_radon_fft(f, HILBERT, INTERVAL, CUBIC, t)
            worst = max(worst, a.max_abs_diff(b))
        g.check("max error", worst <= 1e-10, f"{worst:.1e}")


def test_04_multiplier_diagonalizes():
    with Gate(4, "Fourier transform diagonalizes H_t", 60.0) as g:
        rng = np.random.default_rng(4)
        setups = [(HILBERT, INTERVAL, CUBIC),
                  (HILBERT, ConvexBody.max_ball(1), MultiIndexSet.from_degrees([1, 2])),
                  (make_riesz_type_kernel(2, 1), ConvexBody.euclidean_ball(2), MultiIndexSet(((0, 1), (1, 0), (1, 1))))]
        worst = 0.0
        for i in range(20):
            K, body, gamma = setups[i % 3]
            shape = tuple(int(v) for v in rng.integers(2, 9 if len(gamma) > 2 else 40, len(gamma)))
            f = LatticeFunction(rng.standard_normal(shape), tuple(int(v) for v in rng.integers(-5, 5, len(gamma))))
            t = float(rng.uniform(1.5, 6 if len(gamma) > 2 else 12))
            Hf = discrete_radon_fft(f, K, body, gamma, t)
            L = Hf.shape
            m = exp_multiplier(box_frequencies(L).reshape(-1, len(L)), K, body, gamma, t).reshape(L)
            err = np.max(np.abs(box_fourier_transform(Hf, L) - m * box_fourier_transform(f, L)))
            worst = max(worst, float(err))
        g.check("max error", worst <= 1e-9, f"{worst:.1e}")


def test_05_gauss_decay():
    with Gate(5, "quadratic Gauss sums decay like q^-1/2", 60.0) as g:
        gamma = MultiIndexSet.from_degrees([2])
        fit = gauss_decay_fit(gamma, 101, "primes")
        top = max(v for _, v in fit.table)
        g.check("delta", abs(fit.delta - 0.5) <= 0.05, f"{fit.delta:.4f}")
        g.check("max|G|", top <= 1.0, f"{top:.4f}")
        g.check("G(0/1)", gauss_sum(RationalPoint((0,), 1), gamma) == 1, "1")


def test_06_kernel_axioms():
    with Gate(6, "built-in kernels satisfy size, cancellation and Holder bounds", 60.0) as g:
        rng = np.random.default_rng(6)
        kernels = [make_hilbert_kernel(), make_riesz_type_kernel(2, 1), make_riesz_type_kernel(2, 2),
                   make_riesz_type_kernel(3, 3)]
        size, canc, drift = 0.0, 0.0, 0.0
        for K in kernels:
            a = verify_size_and_holder(K, 100_000, 11)
            b = verify_size_and_holder(K, 200_000, 12)
            size = max(size, a.size_ratio, b.size_ratio)
            drift = max(drift, abs(b.holder_ratio - a.holder_ratio) / a.holder_ratio)
            r = np.exp(rng.uniform(np.log(1e-3), np.log(1e2), 100))
            R = r * np.exp(rng.uniform(0.01, np.log(1e3), 100))
            bodies = (ConvexBody.euclidean_ball(K.k), ConvexBody.max_ball(K.k))
            levels = 64 if K.k < 3 else 24
            for i, (lo, hi) in enumerate(zip(r, R)):
                canc = max(canc, verify_cancellation(K, bodies[i % 2], lo, hi, levels))
        g.check("size", size <= 1 + 1e-12, f"{size:.15f}")
        g.check("cancellation", canc <= 1e-13, f"{canc:.1e}")
        g.check("holder drift", drift <= 0.01, f"{drift:.2e}")


def _all_subsequence_variation(a, r):
    """Exhaustive V^r over every subset of the columns' time axis."""
    T = a.shape[0]
    best = np.zeros(a.shape[1:])
    for mask in range(3, 2 ** T):
        idx = [i for i in range(T) if mask >> i & 1]
        if len(idx) < 2:
            continue
        best = np.maximum(best, np.sum(np.abs(np.diff(a[idx], axis=0)) ** r, axis=0))
    return best ** (1 / r)


def test_07_seminorm_suite():
    with Gate(7, "oscillation, variation and Rademacher-Menshov checks", 120.0) as g:
        rng = np.random.default_rng(7)
        # oscillation <= V^2 on 10^4 families, 100 sequences of 100 sites each
        T = 12
        grid = TruncationGrid(tuple(float(i + 1) for i in range(T)))
        worst = -np.inf
        for _ in range(100):
            a = np.cumsum(rng.standard_normal((T, 100)) * rng.uniform(0, 1, (T, 1)) ** 2, axis=0)
            idx = sorted(rng.choice(T, int(rng.integers(2, T + 1)), replace=False).tolist())
            O = oscillation_pointwise(a, SequenceI.from_indices(grid, idx), grid)
            worst = max(worst, float(np.max(O - variation_pointwise(a, 2))))
        g.check("osc - V2", worst <= 1e-12, f"{worst:.1e}")

        dp_err = 0.0
        for T in range(2, 15):
            a = rng.standard_normal((T, 20))
            for r in (1.0, 2.0, 3.5):
                dp_err = max(dp_err, float(np.max(np.abs(variation_pointwise(a, r) - _all_subsequence_variation(a, r)))))
        g.check("dp vs exhaustive", dp_err <= 1e-12, f"{dp_err:.1e}")

        a = rng.integers(-1000, 1000, (10, 50)) / 64.0
        grid = TruncationGrid(tuple(float(i + 1) for i in range(10)))
        I = SequenceI.from_indices(grid, [0, 3, 4, 9])
        O = oscillation_pointwise(a, I, grid)
        homog = all(np.array_equal(oscillation_pointwise(c * a, I, grid), abs(c) * O) for c in (4.0, -0.5, 1024.0))
        shift = np.array_equal(oscillation_pointwise(a + 3.25, I, grid), O)
        roll = np.array_equal(oscillation_pointwise(np.roll(a, 7, axis=1), I, grid), np.roll(O, 7))
        g.check("homogeneity", homog, str(homog))
        g.check("shift invariance", shift and roll, str(shift and roll))

        ratio = 0.0
        count = 0
        for m in range(9):
            n = 2 ** m
            cols = 1112
            C = rng.standard_normal((n, cols)) * rng.uniform(0, 1, (n, cols)) ** 4
            C[:, : cols // 4] = np.where(rng.uniform(size=(n, cols // 4)) < 0.1, rng.standard_normal((n, cols // 4)), 0)
            C[:, cols // 4: cols // 2] = rng.choice([-1.0, 1.0], (n, cols // 4))
            C[:, -50:] = 0
            C[rng.integers(0, n, 50), np.arange(cols - 50, cols)] = 1.0
            V = variation_pointwise(np.vstack([np.zeros((1, cols)), np.cumsum(C, axis=0)]), 2)
            for j in range(cols):
                rhs = rademacher_menshov_rhs(C[:, j])
                if rhs > 0:
                    ratio = max(ratio, V[j] / rhs)
            count += cols
        g.check("RM vectors", count >= 10_000, str(count))
        g.check("RM ratio", ratio <= 2, f"{ratio:.4f}")


def test_08_uniform_boundedness_probe():
    with Gate(8, "oscillation ratio flat across input sizes", 600.0) as g:
        rep = run_experiment(ExperimentConfig("probe-oscillation", {
            "gamma": "3", "kernel.name": "hilbert", "seminorm.p": 2.0, "seminorm.N": 8,
            "seminorm.restarts": 200, "grid.count": 64, "grid.t_min": 1.0, "grid.t_max": 16.0,
            "input.half_widths": "64,128,256,512", "input.trials": 2}), seed=0)
        stats = {(r.scale, r.statistic): r.value for r in rep.rows}
        ratios = [stats[(str(M), "ratio")] for M in (64, 128, 256, 512)]
        g.check("ratios", rep.complete, ",".join(f"{v:.3f}" for v in ratios))
        g.check("spread", stats[("all", "spread")] <= 0.25, f"{stats[('all', 'spread')]:.3f}")
        g.check("slope", stats[("all", "loglog_slope")] <= 0.05, f"{stats[('all', 'loglog_slope')]:.4f}")


def test_09_christ_cubes():
    with Gate(9, "cube partition, nesting and ball comparability", 10.0) as g:
        rng = np.random.default_rng(9)
        bad = 0
        for w in ((1, 2), (1, 2, 3)):
            sys_ = ChristCubeSystem(w, 2, -5, 5)
            c_in, c_out = sys_.ball_constants()
            X = rng.uniform(-1, 1, (10_000, len(w))) * 2.0 ** rng.uniform(-6, 6, (10_000, 1))
            for k in range(-5, 6):
                s = sys_.sides(k)
                m = sys_.cube_containing(X, k)
                lo, hi = m * s, (m + 1) * s
                bad += int(np.sum(~np.all((lo <= X) & (X < hi), axis=1)))
                for ax in range(len(w)):
                    for step in (-1, 1):
                        other = m.copy()
                        other[:, ax] += step
                        bad += int(np.sum(np.all((other * s <= X) & (X < (other + 1) * s), axis=1)))
                if k < 5:
                    parent = sys_.cube_containing(X, k + 1)
                    bad += int(np.sum(np.floor_divide(m, 2 ** np.array(w)) != parent))
                centre = (m + 0.5) * s
                bad += int(np.sum(sys_.quasi_norm(X - centre) > c_out * 2.0 ** k * (1 + 1e-12)))
                U = rng.uniform(-1, 1, X.shape) * (c_in * 2.0 ** k) ** np.array(w, float) * (1 - 1e-9)
                inner = sys_.quasi_norm(U) < c_in * 2.0 ** k
                Y = centre[inner] + U[inner]
                bad += int(np.sum(np.any(sys_.cube_containing(Y, k) != m[inner], axis=1)))
        g.check("violations", bad == 0, str(bad))


def test_10_martingale_suite():
    with Gate(10, "conditional expectations and martingale probe", 300.0) as g:
        rng = np.random.default_rng(10)
        sys_ = ChristCubeSystem((1, 2), 2, -2, 2)
        f = GridFunction(rng.standard_normal((32, 64)) + 1j * rng.standard_normal((32, 64)), (-4.0, 0.0), 0.25)
        levels = (0, 1, 2)
        E = {k: conditional_expectation(f, k, sys_) for k in levels}
        scale = float(np.max(np.abs(f.values)))
        idem = max(float(np.max(np.abs(conditional_expectation(E[k], k, sys_).values - E[k].values))) for k in levels)
        tower = max(float(np.max(np.abs(conditional_expectation(E[j], k, sys_).values - E[max(j, k)].values)))
                    for j in levels for k in levels)
        contr = all(lp_norm(E[k], p) <= lp_norm(f, p) * (1 + 1e-12) for k in levels for p in (1, 2, np.inf))
        g.check("idempotent", idem <= 1e-14 * scale, f"{idem:.1e}")
        g.check("tower", tower <= 1e-14 * scale, f"{tower:.1e}")
        g.check("contractive", contr, str(contr))

        worst = 0.0
        for trial in range(6):
            h = GridFunction(rng.standard_normal((16, 64)), (0.0, 0.0), 0.25)
            lv = [-1, 0, 1, 2]
            fam = martingale_family(h, lv, sys_)
            for p in (2.0, 1.5):
                for N in (1, 2, 3):
                    probe = martingale_oscillation_probe(h, lv, sys_, p=p, N=N, restarts=30, seed=trial)
                    exact = worst_sequence_search(fam, p, N, "exhaustive").value / lp_norm(h, p)
                    worst = max(worst, abs(probe.ratio - exact) / exact if exact else probe.ratio)
        g.check("probe vs exhaustive", worst <= 1e-12, f"{worst:.1e}")

        rep = run_experiment(ExperimentConfig("martingale-probe"), seed=0)
        drift = [r.value for r in rep.rows if r.statistic == "max_drift"][0]
        g.check("refinement drift", drift <= 0.25, f"{drift:.4f}")


def test_11_telescoping():
    with Gate(11, "telescoping pieces sum to the truncation difference", 30.0) as g:
        rng = np.random.default_rng(11)
        setups = [(HILBERT, INTERVAL, CUBIC), (HILBERT, ConvexBody.max_ball(1), MultiIndexSet.from_degrees([1, 2])),
                  (make_riesz_type_kernel(2, 2), ConvexBody.euclidean_ball(2), MultiIndexSet(((0, 1), (1, 0))))]
        worst = 0.0
        for i in range(20):
            K, body, gamma = setups[i % 3]
            D = float(rng.choice([2.0, 3.0]))
            lo = int(rng.integers(-1, 2))
            hi = lo + int(rng.integers(1, 4 if len(gamma) > 1 else 5))
            shape = tuple(int(v) for v in rng.integers(3, 12, len(gamma)))
            f = LatticeFunction(rng.standard_normal(shape), tuple(int(v) for v in rng.integers(-6, 6, len(gamma))))
            pieces = telescoping_pieces(f, K, body, gamma, D, lo, hi)
            total = pieces[0]
            for p in pieces[1:]:
                total = total + p
            worst = max(worst, total.max_abs_diff(complement_difference(f, K, body, gamma, D, lo, hi)))
        g.check("max error", worst <= 1e-12, f"{worst:.1e}")


def test_12_projection_multiplier():
    with Gate(12, "projection multiplier range, plateaus and shell identity", 30.0) as g:
        rng = np.random.default_rng(12)
        cfg = IWConfig()
        n = 40_000
        ok_range, ok_centres = True, True
        for gamma in (CUBIC, MultiIndexSet.from_degrees([1, 2])):
            d = len(gamma)
            scan = rng.uniform(0, 1, (10_000, d))
            vals = projection_multiplier(scan if d > 1 else scan[:, 0], n, gamma, cfg)
            ok_range &= bool(np.all((vals >= 0) & (vals <= 1)))
            centres = iw_fractions(projection_level(n, cfg), d, cfg).as_array()
            at = projection_multiplier(centres if d > 1 else centres[:, 0], n, gamma, cfg)
            ok_centres &= bool(np.all(at == 1.0))
        g.check("range", ok_range, str(ok_range))
        g.check("centres", ok_centres, str(ok_centres))
        ok_shell = True
        for d in (1, 2):
            shells = [shell_fractions(2 ** j, d, IWConfig(u=1)) for j in range(1, 6)]
            union = shells[0]
            for s in shells[1:]:
                union = union.union(s)
            ok_shell &= union == iw_fractions(32, d)
            ok_shell &= sum(len(s) for s in shells) == len(union)
            ok_shell &= all(a.isdisjoint(b) for a, b in itertools.combinations(shells, 2))
        g.check("shell union", ok_shell, str(ok_shell))
