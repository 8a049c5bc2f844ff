"""Frequency-side objects: multipliers, Gauss sums, Ionescu-Wainger sets and projections.

Fourier convention: F f(xi) = sum_x f(x) e(x . xi), e(theta) = exp(2 pi i theta).
With it, F(H_t f) = m_t F f where m_t(xi) = sum_y e(xi . (y)^Gamma) K(y).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import sici

from .exceptions import BudgetExceededError, BumpOverlapError, DomainError, QuadratureError
from .kernels import CZKernel, sphere_half_rule
from .lattice import DEFAULT_POINT_BUDGET, ConvexBody, LatticeFunction, MultiIndexSet, canonical_map
from .radon import pushforward_points

TWO_PI = 2.0 * np.pi


def e(theta) -> np.ndarray:
    return np.exp(TWO_PI * 1j * np.asarray(theta, float))


# ---------------------------------------------------------------------------
# rational points


@dataclass(frozen=True)
class RationalPoint:
    """The torus point a/q; numerators are stored reduced mod q."""

    numerators: tuple[int, ...]
    q: int

    def __post_init__(self):
        q = int(self.q)
        if q < 1:
            raise ValueError(f"denominator must be a positive integer, got {self.q}")
        a = tuple(int(v) % q for v in np.atleast_1d(self.numerators).tolist())
        if not a:
            raise ValueError("a rational point needs at least one coordinate")
        object.__setattr__(self, "numerators", a)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_fractions(cls, coords: Sequence) -> "RationalPoint":
        fr = [Fraction(c) for c in coords]
        q = math.lcm(*(f.denominator for f in fr))
        return cls(tuple(f.numerator * (q // f.denominator) for f in fr), q)

    @property
    def dim(self) -> int:
        return len(self.numerators)

    @property
    def reduced(self) -> bool:
        return math.gcd(self.q, *self.numerators) == 1

    def reduce(self) -> "RationalPoint":
        g = math.gcd(self.q, *self.numerators)
        return RationalPoint(tuple(a // g for a in self.numerators), self.q // g)

    def as_array(self) -> np.ndarray:
        return np.array(self.numerators, float) / self.q

    def fractions(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(a, self.q) for a in self.numerators)

    def __str__(self):
        return "(" + ", ".join(f"{a}/{self.q}" for a in self.numerators) + ")"


def _exact_phases(Z: np.ndarray, xi: RationalPoint) -> np.ndarray:
    """(Z . a mod q) / q in exact integer arithmetic, then as floats in [0, 1)."""
    q = xi.q
    acc = np.zeros(len(Z), dtype=object)
    for j, a in enumerate(xi.numerators):
        acc = (acc + (Z[:, j].astype(object) % q) * a) % q
    return np.array(acc, dtype=float) / q


def _neumaier_rows(terms: np.ndarray) -> np.ndarray:
    """Compensated sum over axis 0, row by row in order (real and imaginary parts separately)."""
    out = []
    for part in (terms.real, terms.imag):
        s = np.zeros(part.shape[1:])
        c = np.zeros(part.shape[1:])
        for row in part:
            t = s + row
            c += np.where(np.abs(s) >= np.abs(row), (s - t) + row, (row - t) + s)
            s = t
        out.append(s + c)
    return out[0] + 1j * out[1]


# ---------------------------------------------------------------------------
# multipliers


def exp_multiplier(xi, K: CZKernel, body: ConvexBody, gamma: MultiIndexSet, t: float,
                   budget: int = DEFAULT_POINT_BUDGET, chunk: int = 4096):
    """m_t(xi) = sum over lattice y in Omega_t minus 0 of e(xi . (y)^Gamma) K(y).

    ``xi`` is a RationalPoint (phases reduced exactly), a sequence of
    Fractions, or a float array of shape (|Gamma|,) or (n, |Gamma|). Terms
    are added in lexicographic order of y with compensated summation.
    """
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    d = len(gamma)
    _, Z, w = pushforward_points(K, body, gamma, t, budget)
    if isinstance(xi, RationalPoint) or (isinstance(xi, (list, tuple)) and xi
                                         and all(isinstance(v, Fraction) for v in xi)):
        rp = xi if isinstance(xi, RationalPoint) else RationalPoint.from_fractions(xi)
        if rp.dim != d:
            raise ValueError(f"frequency has {rp.dim} coordinates, |Gamma| = {d}")
        if len(Z) == 0:
            return 0j
        terms = e(_exact_phases(Z, rp)) * w
        return complex(math.fsum(terms.real) + 1j * math.fsum(terms.imag))
    arr = np.asarray(xi, float)
    single = arr.ndim == 1 or (d == 1 and arr.ndim == 0)
    X = arr.reshape(-1, d)
    if len(Z) == 0:
        out = np.zeros(len(X), complex)
    else:
        Zf = Z.astype(float)
        parts = []
        for s in range(0, len(X), chunk):
            ph = np.mod(Zf @ X[s:s + chunk].T, 1.0)
            parts.append(_neumaier_rows(e(ph) * w[:, None]))
        out = np.concatenate(parts)
    return complex(out[0]) if single else out.reshape(arr.shape[:-1] if arr.ndim > 1 else arr.shape)


def kernel_l1_mass(K: CZKernel, body: ConvexBody, gamma: MultiIndexSet, t: float,
                   budget: int = DEFAULT_POINT_BUDGET) -> float:
    """sum |K(y)| over the lattice points of Omega_t (bound for |m_t|)."""
    _, _, w = pushforward_points(K, body, gamma, t, budget)
    return math.fsum(np.abs(w))


def box_fourier_transform(f: LatticeFunction, L: Sequence[int]) -> np.ndarray:
    """F f(j/L) for j in prod range(L_i), f read as L-periodic on Z^d.

    Coordinates enter the phase, so the result is the transform of f on
    the torus Z^d / L Z^d rather than of its array.
    """
    L = tuple(int(v) for v in L)
    if any(n > m for n, m in zip(f.shape, L)):
        raise ValueError("function box is larger than the period")
    out = np.fft.ifftn(f.values, s=L, axes=tuple(range(len(L)))) * math.prod(L)
    for ax, (o, m) in enumerate(zip(f.origin, L)):
        ph = e((o * np.arange(m) % m) / m)
        out = out * ph.reshape((-1,) + (1,) * (len(L) - ax - 1))
    return out


def box_frequencies(L: Sequence[int]) -> np.ndarray:
    """All j/L as an array of shape (*L, d)."""
    axes = [np.arange(m) / m for m in L]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


class MultiplierValue(NamedTuple):
    value: complex
    error: float


def _cont_multiplier_rule(xi: np.ndarray, K: CZKernel, body: ConvexBody, gamma: MultiIndexSet,
                          t: float, nodes: int, n_dir: int) -> complex:
    u, wu = sphere_half_rule(body.k, n_dir)
    rho = body.radial_extent(u)
    g, wg = np.polynomial.legendre.leggauss(nodes)
    expo = gamma.as_array()
    wts = np.asarray(gamma.weights, float)
    total = 0.0 + 0.0j
    for ui, wi, ri in zip(u, wu, rho):
        smax = t * ri
        # phase excursion along the ray, in turns
        mono = np.prod(np.abs(ui)[None, :] ** expo, axis=1)
        turns = float(np.sum(np.abs(xi) * mono * smax ** wts))
        panels = max(1, int(math.ceil(2.0 * turns)))
        edges = np.linspace(0.0, smax, panels + 1)
        a, b = edges[:-1, None], edges[1:, None]
        s = (0.5 * (b - a) * (g[None, :] + 1) + a).ravel()
        ws = (0.5 * (b - a) * wg[None, :]).ravel()
        Y = s[:, None] * ui[None, :]
        zp, zm = canonical_map(Y, gamma), canonical_map(-Y, gamma)
        integrand = (np.expm1(TWO_PI * 1j * (zp @ xi)) * K(Y)
                     + np.expm1(TWO_PI * 1j * (zm @ xi)) * K(-Y)) * s ** (body.k - 1)
        total += wi * np.sum(ws * integrand)
    return complex(total)


def cont_multiplier(xi, K: CZKernel, body: ConvexBody, gamma: MultiIndexSet, t: float,
                    quad_level: int = 16, tol: float | None = None) -> MultiplierValue:
    """Psi_t(xi) = p.v. integral over Omega_t of e(xi . (y)^Gamma) K(y) dy.

    The cancellation condition lets the integrand be (e(...) - 1) K(y), which
    is bounded near 0. Rays through the half sphere carry the pair y, -y;
    each ray is split into panels of at most half a turn of phase, with
    ``quad_level`` Gauss nodes per panel. The error is the change against
    a run with half the nodes and directions.
    """
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    xi = np.atleast_1d(np.asarray(xi, float))
    if xi.shape != (len(gamma),):
        raise ValueError(f"frequency must have {len(gamma)} coordinates")
    if body.k != K.k or gamma.k != K.k:
        raise ValueError("kernel, body and Gamma dimensions differ")
    if quad_level < 4:
        raise ValueError("quad_level must be at least 4 so the halved rule differs")
    n_dir = max(8, 2 * quad_level)
    if body.k > 1:
        extent = float(np.sum(np.abs(xi) * t ** np.asarray(gamma.weights, float)))
        n_dir = max(n_dir, int(math.ceil(4 * extent)))
    fine = _cont_multiplier_rule(xi, K, body, gamma, t, quad_level, n_dir)
    coarse = _cont_multiplier_rule(xi, K, body, gamma, t, quad_level // 2, max(4, n_dir // 2))
    err = abs(fine - coarse)
    if tol is not None and err > tol:
        raise QuadratureError(f"error estimate {err:.3g} above tolerance {tol:.3g} at level {quad_level}")
    return MultiplierValue(fine, err)


def cubic_example_psi(xi, t):
    """i (2/3) sgn(xi) Si(2 pi xi t^3): Psi_t for K = 1/y, Gamma = {3} on (-1, 1)."""
    xi = np.asarray(xi, float)
    t = np.asarray(t, float)
    si, _ = sici(TWO_PI * np.abs(xi) * t ** 3)
    out = np.asarray(1j * (2.0 / 3.0) * np.sign(xi) * si)
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Gauss sums


def _monomials_mod(q: int, k: int, gamma: MultiIndexSet) -> np.ndarray:
    """(r)^Gamma mod q for r in {1..q}^k, rows in lexicographic order."""
    r = np.arange(1, q + 1, dtype=np.int64)
    pw = {}
    out = np.ones((q ** k, len(gamma)), dtype=np.int64)
    grids = np.meshgrid(*([r] * k), indexing="ij")
    cols = [g.ravel() for g in grids]
    for j, ex in enumerate(gamma.exponents):
        m = np.ones(q ** k, dtype=np.int64)
        for i, p in enumerate(ex):
            if p:
                key = (i, p)
                if key not in pw:
                    pw[key] = np.array([pow(int(v), p, q) for v in cols[i]], dtype=np.int64)
                m = (m * pw[key]) % q
        out[:, j] = m % q
    return out


def _gauss_from_counts(counts: np.ndarray, q: int, k: int) -> complex:
    if np.all(counts == counts[0]):
        return 0j if q > 1 else 1 + 0j
    ph = e(np.arange(q) / q)
    vals = counts * ph
    return complex(math.fsum(vals.real), math.fsum(vals.imag)) / q ** k


def gauss_sum(a_over_q: RationalPoint, gamma: MultiIndexSet, budget: int = DEFAULT_POINT_BUDGET) -> complex:
    """G(a/q) = q^{-k} sum_{r in {1..q}^k} e((a/q) . (r)^Gamma).

    The phase numerators are reduced mod q in integers; the sum is then a
    histogram of residues against the q-th roots of unity. A flat
    histogram gives exactly 0.
    """
    if not a_over_q.reduced:
        raise ValueError(f"{a_over_q} is not reduced")
    if a_over_q.dim != len(gamma):
        raise ValueError("rational point and Gamma sizes differ")
    q, k = a_over_q.q, gamma.k
    if q ** k > budget:
        raise BudgetExceededError(f"q^k = {q ** k} exceeds the budget {budget}")
    M = _monomials_mod(q, k, gamma)
    a = np.array(a_over_q.numerators, dtype=np.int64)
    res = (M @ a) % q if q * q * len(gamma) < 2 ** 62 else np.array(
        [sum(int(x) * int(y) for x, y in zip(row, a)) % q for row in M])
    return _gauss_from_counts(np.bincount(res, minlength=q), q, k)


def _primes_upto(n: int) -> list[int]:
    sieve = np.ones(n + 1, bool)
    sieve[:2] = False
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return [int(v) for v in np.nonzero(sieve)[0]]


def max_gauss_sum(q: int, gamma: MultiIndexSet, budget: int = DEFAULT_POINT_BUDGET) -> float:
    """max |G(a/q)| over reduced a in (Z/qZ)^Gamma."""
    k, d = gamma.k, len(gamma)
    if q ** k * q ** d > budget:
        raise BudgetExceededError(f"q^(k+|Gamma|) = {q ** (k + d)} exceeds the budget {budget}")
    M = _monomials_mod(q, k, gamma)
    best = 0.0
    for a in itertools.product(range(q), repeat=d):
        if math.gcd(q, *a) != 1:
            continue
        res = (M @ np.array(a, dtype=np.int64)) % q
        best = max(best, abs(_gauss_from_counts(np.bincount(res, minlength=q), q, k)))
    return best


class GaussFit(NamedTuple):
    delta: float
    table: tuple[tuple[int, float], ...]


def gauss_decay_fit(gamma: MultiIndexSet, q_max: int, denominators: str = "primes",
                    budget: int = DEFAULT_POINT_BUDGET) -> GaussFit:
    """Least-squares fit of log max|G(a/q)| against log q; delta = -slope.

    ``denominators`` is "primes" or "all" (2..q_max). Exact zeros stay in
    the table but not in the fit.
    """
    if q_max < 10:
        raise ValueError("q_max must be at least 10")
    if denominators == "primes":
        qs = _primes_upto(q_max)
    elif denominators == "all":
        qs = list(range(2, q_max + 1))
    else:
        raise ValueError(f"unknown denominator set {denominators!r}")
    table = tuple((q, max_gauss_sum(q, gamma, budget)) for q in qs)
    pts = [(math.log(q), math.log(g)) for q, g in table if g > 0]
    if len(pts) < 2:
        return GaussFit(float("inf"), table)
    x, y = np.array(pts).T
    slope = np.polyfit(x, y, 1)[0]
    return GaussFit(float(-slope), table)


# ---------------------------------------------------------------------------
# Ionescu-Wainger sets


@dataclass(frozen=True)
class IWConfig:
    """Parameters rho, u, tau, chi of the Ionescu-Wainger decomposition; p0 fixes the range of tau."""

    rho: float | None = None
    u: int = 1
    tau: float = 0.2
    chi: float = 0.05
    p0: float = 1.5

    def __post_init__(self):
        if int(self.u) != self.u or self.u < 1:
            raise ValueError(f"u must be a positive integer, got {self.u}")
        if not self.p0 > 1:
            raise ValueError(f"p0 must exceed 1, got {self.p0}")
        if not 0 < self.tau < 0.5 * min(self.p0 - 1, 1):
            raise ValueError(f"tau must lie in (0, {0.5 * min(self.p0 - 1, 1):g}), got {self.tau}")
        if not 0 < self.chi < 0.1:
            raise ValueError(f"chi must lie in (0, 1/10), got {self.chi}")
        rho = 1.0 / (10 * self.u) if self.rho is None else float(self.rho)
        if not rho > 0:
            raise ValueError("rho must be positive")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "u", int(self.u))


def iw_denominators(N: int, config: IWConfig | None = None) -> tuple[int, ...]:
    """P_{<=N} = {1, ..., N}: contains N_N, is nested in N and closed under divisors."""
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    return tuple(range(1, int(N) + 1))


class FareySet:
    """An ordered set of reduced rational torus points (by q, then numerators)."""

    def __init__(self, points: Sequence[RationalPoint]):
        pts = sorted({(p.q, p.numerators): p for p in points}.values(), key=lambda p: (p.q, p.numerators))
        dims = {p.dim for p in pts}
        if len(dims) > 1:
            raise ValueError("points of different dimensions")
        self.points = tuple(pts)
        self._keys = frozenset((p.q, p.numerators) for p in pts)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, p: RationalPoint) -> bool:
        p = p.reduce()
        return (p.q, p.numerators) in self._keys

    def __eq__(self, other) -> bool:
        return isinstance(other, FareySet) and self._keys == other._keys

    def __repr__(self):
        return "FareySet{" + ", ".join(map(str, self.points)) + "}"

    def keys(self) -> frozenset:
        return self._keys

    def difference(self, other: "FareySet") -> "FareySet":
        return FareySet([p for p in self.points if (p.q, p.numerators) not in other._keys])

    def union(self, other: "FareySet") -> "FareySet":
        return FareySet(self.points + other.points)

    def isdisjoint(self, other: "FareySet") -> bool:
        return self._keys.isdisjoint(other._keys)

    def as_array(self) -> np.ndarray:
        return np.array([p.as_array() for p in self.points])


def iw_fractions(N: int, gamma: MultiIndexSet | int, config: IWConfig | None = None,
                 budget: int = DEFAULT_POINT_BUDGET) -> FareySet:
    """Sigma_{<=N}: reduced a/q in T^Gamma with q in P_{<=N}."""
    d = gamma if isinstance(gamma, int) else len(gamma)
    qs = iw_denominators(N, config)
    if sum(q ** d for q in qs) > budget:
        raise BudgetExceededError("fraction enumeration exceeds the budget")
    pts = []
    for q in qs:
        for a in itertools.product(range(q), repeat=d):
            if math.gcd(q, *a) == 1:
                pts.append(RationalPoint(a, q))
    return FareySet(pts)


def shell_fractions(S: int, gamma: MultiIndexSet | int, config: IWConfig | None = None,
                    budget: int = DEFAULT_POINT_BUDGET) -> FareySet:
    """Sigma_S: Sigma_{<=S} for S = 2^u, else Sigma_{<=S} minus Sigma_{<=S/2^u}."""
    config = config or IWConfig()
    u = config.u
    n = int(S).bit_length() - 1
    if int(S) != S or S < 2 or 2 ** n != S or n % u:
        raise ValueError(f"S must be 2^(u n) with n >= 1 and u = {u}, got {S}")
    full = iw_fractions(S, gamma, config, budget)
    if S == 2 ** u:
        return full
    return full.difference(iw_fractions(S >> u, gamma, config, budget))


def projection_level(n: int, config: IWConfig) -> int:
    """S_0 = largest element of 2^{u N} in [1, n^{tau u}], or 1 when there is none."""
    bound = float(n) ** (config.tau * config.u)
    S, m = 1, 1
    while 2 ** (config.u * m) <= bound:
        S = 2 ** (config.u * m)
        m += 1
    return S


@dataclass(frozen=True)
class BumpEta:
    """Radial C^2 bump on R^Gamma: 1 on |x| <= 1/(32|Gamma|), 0 on |x| >= 1/(16|Gamma|).

    The transition is the quintic smoothstep 6s^5 - 15s^4 + 10s^3.
    """

    size: int
    r_in: float = field(init=False)
    r_out: float = field(init=False)

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("|Gamma| must be positive")
        object.__setattr__(self, "r_in", 1.0 / (32 * self.size))
        object.__setattr__(self, "r_out", 1.0 / (16 * self.size))

    def profile(self, r) -> np.ndarray:
        s = np.clip((self.r_out - np.asarray(r, float)) / (self.r_out - self.r_in), 0.0, 1.0)
        return s * s * s * (s * (6 * s - 15) + 10)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        if self.size == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        return self.profile(np.linalg.norm(x, axis=-1))


def _torus_wrap(d: np.ndarray) -> np.ndarray:
    return d - np.rint(d)


def projection_multiplier(xi, n: int, gamma: MultiIndexSet, config: IWConfig | None = None,
                          eta: BumpEta | None = None) -> np.ndarray:
    """Pi_{<=n^tau}(xi) = sum over a/q in Sigma_{<=S_0} of eta(2^{n^tau (A - chi I)} (xi - a/q)).

    Raises BumpOverlapError unless the dilated bumps around distinct points
    (and around torus translates of one point) have disjoint supports.
    """
    config = config or IWConfig()
    d = len(gamma)
    eta = eta or BumpEta(d)
    if eta.size != d:
        raise ValueError("bump and Gamma sizes differ")
    centres = iw_fractions(projection_level(n, config), d, config).as_array()
    scale = 2.0 ** (float(n) ** config.tau * (np.asarray(gamma.weights, float) - config.chi))
    if np.any(scale < 2 * eta.r_out):
        raise BumpOverlapError("a dilated bump wraps around the torus")
    for i in range(len(centres)):
        diff = _torus_wrap(centres[i + 1:] - centres[i]) * scale
        if len(diff) and np.min(np.linalg.norm(diff, axis=1)) < 2 * eta.r_out:
            raise BumpOverlapError(f"bump supports overlap at n={n}; take n larger")
    X = np.asarray(xi, float)
    shape = X.shape if d == 1 and (X.ndim == 0 or X.shape[-1] != 1) else X.shape[:-1]
    pts = X.reshape(-1, d)
    out = np.zeros(len(pts))
    for c in centres:
        out += eta(_torus_wrap(pts - c) * scale)
    return float(out[0]) if shape == () else out.reshape(shape)


# ---------------------------------------------------------------------------
# van der Corput type bounds


class VdcReport(NamedTuple):
    small_constant: float
    large_constant: float
    small_constant_doubled: float
    large_constant_doubled: float
    small_slope: float
    large_exponent: float
    stable: bool


def _psi_values(psi, K, body, gamma, t, xi, quad_level):
    if psi is not None:
        return psi(xi, t)
    return cont_multiplier(xi, K, body, gamma, t, quad_level).value


def vdc_bounds_check(K: CZKernel, body: ConvexBody, gamma: MultiIndexSet, c: float = 0.5,
                     samples: int = 200, log_range: float = 3.0,
                     psi: Callable | None = None, quad_level: int = 16) -> VdcReport:
    """Empirical constants for |Psi_t - Psi_ct| <~ lambda and <~ lambda^{-sigma/|Gamma|}.

    lambda = |t^A xi|_inf is swept log-uniformly over [10^-R, 10^R] with
    R = ``log_range`` and again over the doubled range; t runs over
    [1, 4] and xi points along (1, ..., 1). ``psi(xi, t)`` replaces the
    quadrature when a closed form is known. The small-lambda slope is a
    log-log fit on lambda < 10^-1; the large-lambda exponent fits the
    envelope (window maxima) on lambda > 10.
    """
    if not 0 < c < 1:
        raise DomainError(f"c must lie in (0, 1), got {c}")
    d = len(gamma)
    w = np.asarray(gamma.weights, float)
    sig = K.sigma / d

    def sweep(R):
        lam = np.logspace(-R, R, samples)
        ts = np.exp(np.linspace(0, np.log(4.0), samples))
        diffs = np.empty(samples)
        for i, (L, t) in enumerate(zip(lam, ts)):
            xi = np.full(d, L / np.max(t ** w))
            xv = xi[0] if (psi is not None and d == 1) else xi
            diffs[i] = abs(_psi_values(psi, K, body, gamma, t, xv, quad_level)
                           - _psi_values(psi, K, body, gamma, c * t, xv, quad_level))
        return lam, diffs

    lam, dif = sweep(log_range)
    lam2, dif2 = sweep(2 * log_range)
    r1 = lambda L, D: float(np.max(D / L))
    r2 = lambda L, D: float(np.max(D * L ** sig))
    small = lam2 < 1e-1
    slope = float(np.polyfit(np.log(lam2[small]), np.log(dif2[small]), 1)[0]) if small.sum() > 2 else float("nan")
    big = lam2 > 10
    Lb, Db = np.log(lam2[big]), dif2[big]
    edges = np.linspace(Lb.min(), Lb.max(), 9) if big.sum() > 8 else None
    expo = float("nan")
    if edges is not None:
        xs, ys = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            m = (Lb >= a) & (Lb <= b)
            if m.any():
                j = np.argmax(Db[m])
                xs.append(Lb[m][j])
                ys.append(np.log(Db[m][j]))
        expo = float(np.polyfit(xs, ys, 1)[0])
    c1, c2 = r1(lam, dif), r2(lam, dif)
    d1, d2 = r1(lam2, dif2), r2(lam2, dif2)
    stable = abs(d1 - c1) <= 0.1 * c1 and abs(d2 - c2) <= 0.1 * c2
    return VdcReport(c1, c2, d1, d2, slope, expo, bool(stable))


def multiplier_gap_constant(K: CZKernel, body: ConvexBody, gamma: MultiIndexSet, t: float,
                            radii: Sequence[float], quad_level: int = 16) -> float:
    """max over the given |xi| of |m_t(xi) - Psi_t(xi)| / |xi| along (1, ..., 1)."""
    d = len(gamma)
    out = 0.0
    for r in radii:
        xi = np.full(d, float(r))
        gap = abs(exp_multiplier(xi, K, body, gamma, t) - cont_multiplier(xi, K, body, gamma, t, quad_level).value)
        out = max(out, gap / float(np.linalg.norm(xi)))
    return out
