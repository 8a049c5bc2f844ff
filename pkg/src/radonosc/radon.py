"""Truncated singular Radon transforms on Z^Gamma and R^Gamma.

Discrete operator:  H_t f(x) = sum_{y in Omega_t cap Z^k, y != 0} f(x - (y)^Gamma) K(y).
Continuous operator: p.v. integral of f(x - (y)^Gamma) K(y) over Omega_t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import ndimage

from .exceptions import (BudgetExceededError, CanonicalMapOverflowError, DomainError,
                         InsufficientPaddingError, ResolutionError)
from .kernels import CZKernel, sphere_half_rule
from .lattice import (DEFAULT_POINT_BUDGET, Box, ConvexBody, GridFunction, LatticeFunction,
                      MultiIndexSet, canonical_map, lattice_points_in_dilate)
from .seminorms import SampledFamily, TruncationGrid

# above this many scalar additions the direct path switches to Neumaier summation
_COMPENSATE_ABOVE = 2 ** 24


def _check_setup(f_dim: int, K: CZKernel, body: ConvexBody, gamma: MultiIndexSet | None = None):
    if K.k != body.k:
        raise ValueError(f"kernel acts on R^{K.k} but the body lives in R^{body.k}")
    if gamma is not None:
        if gamma.k != K.k:
            raise ValueError(f"Gamma has multi-indices of length {gamma.k}, kernel dimension is {K.k}")
        if f_dim != len(gamma):
            raise ValueError(f"f lives on Z^{f_dim} but |Gamma| = {len(gamma)}")


def pushforward_points(K: CZKernel, body: ConvexBody, gamma: MultiIndexSet, t: float,
                       budget: int = DEFAULT_POINT_BUDGET):
    """Lattice points of Omega_t (lexicographic), their images (y)^Gamma and weights K(y)."""
    Y = lattice_points_in_dilate(body, t, budget)
    Z = canonical_map(Y, gamma) if len(Y) else np.zeros((0, len(gamma)), dtype=np.int64)
    w = K(Y).astype(complex) if len(Y) else np.zeros(0, complex)
    return Y, Z, w


def _output_box(box: Box, Z: np.ndarray) -> Box:
    if len(Z) == 0:
        return box
    zmin = np.minimum(Z.min(axis=0), 0)
    zmax = np.maximum(Z.max(axis=0), 0)
    return tuple((lo + int(a), hi + int(b)) for (lo, hi), a, b in zip(box, zmin, zmax))


def _neumaier_add(s: np.ndarray, c: np.ndarray, term: np.ndarray):
    t = s + term
    big = np.abs(s) >= np.abs(term)
    c += np.where(big, (s - t) + term, (term - t) + s)
    s[...] = t


def _lattice_convolve(f: LatticeFunction, Z: np.ndarray, w: np.ndarray, out_box: Box | None = None) -> LatticeFunction:
    """sum_j w_j f(x - Z_j), added in the order of the rows of Z."""
    box = _output_box(f.box, Z) if out_box is None else out_box
    shape = tuple(hi - lo + 1 for lo, hi in box)
    out = np.zeros(shape, complex)
    nf = f.shape
    compensate = out.size * len(Z) > _COMPENSATE_ABOVE
    if compensate:
        sr, si = np.zeros(shape), np.zeros(shape)
        cr, ci = np.zeros(shape), np.zeros(shape)
    for z, wz in zip(Z, w):
        start = [f.origin[i] + int(z[i]) - box[i][0] for i in range(len(box))]
        if any(s < 0 or s + n > m for s, n, m in zip(start, nf, shape)):
            raise ValueError("output box does not hold the translated input")
        sl = tuple(slice(s, s + n) for s, n in zip(start, nf))
        term = f.values * wz
        if compensate:
            _neumaier_add(sr[sl], cr[sl], term.real)
            _neumaier_add(si[sl], ci[sl], term.imag)
        else:
            out[sl] += term
    if compensate:
        out = (sr + cr) + 1j * (si + ci)
    return LatticeFunction(out, tuple(lo for lo, _ in box))


def discrete_radon_direct(f: LatticeFunction, K: CZKernel, body: ConvexBody, gamma: MultiIndexSet, t: float,
                          restrict: bool = False, budget: int = DEFAULT_POINT_BUDGET) -> LatticeFunction:
    """H_t f by direct summation over y in lexicographic order.

    The output box is the input box enlarged by the extent of the image of
    Omega_t under the canonical map, so no mass is clipped; ``restrict=True``
    cuts the result back to the input box.
    """
    _check_setup(f.dim, K, body, gamma)
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    _, Z, w = pushforward_points(K, body, gamma, t, budget)
    out = _lattice_convolve(f, Z, w)
    return out.embed(f.box, allow_clip=True) if restrict else out


def pushforward_kernel(K: CZKernel, body: ConvexBody, gamma: MultiIndexSet, t: float,
                       budget: int = DEFAULT_POINT_BUDGET) -> LatticeFunction:
    """g(z) = sum of K(y) over y in Omega_t cap Z^k minus 0 with (y)^Gamma = z.

    Stored on the smallest box holding both the origin and the image.
    """
    _, Z, w = pushforward_points(K, body, gamma, t, budget)
    if len(Z) == 0:
        return LatticeFunction(np.zeros((1,) * len(gamma), complex))
    zmin = np.minimum(Z.min(axis=0), 0)
    zmax = np.maximum(Z.max(axis=0), 0)
    g = np.zeros(tuple(int(v) for v in zmax - zmin + 1), complex)
    np.add.at(g, tuple((Z - zmin).T), w)
    return LatticeFunction(g, tuple(int(v) for v in zmin))


def discrete_radon_fft(f: LatticeFunction, K: CZKernel, body: ConvexBody, gamma: MultiIndexSet, t: float,
                       padding: int | Sequence[int] | None = None,
                       budget: int = DEFAULT_POINT_BUDGET) -> LatticeFunction:
    """H_t f as a circular convolution with the pushed-forward kernel.

    The periodic box has side ``f.shape + padding``; padding below the image
    diameter would alias and is rejected. The result lives on the same box
    as :func:`discrete_radon_direct`.
    """
    _check_setup(f.dim, K, body, gamma)
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    g = pushforward_kernel(K, body, gamma, t, budget)
    diam = np.array(g.shape) - 1
    pad = diam if padding is None else np.broadcast_to(np.asarray(padding, dtype=int), diam.shape)
    if np.any(pad < diam):
        raise InsufficientPaddingError(f"padding {tuple(int(v) for v in pad)} is below the image diameter {tuple(int(v) for v in diam)}")
    L = tuple(int(n + q) for n, q in zip(f.shape, pad))
    axes = tuple(range(len(L)))
    F = np.fft.fftn(f.values, s=L, axes=axes)
    G = np.fft.fftn(g.values, s=L, axes=axes)
    full = np.fft.ifftn(F * G)
    out_shape = tuple(int(n + d) for n, d in zip(f.shape, diam))
    out = full[tuple(slice(0, n) for n in out_shape)]
    origin = tuple(o + go for o, go in zip(f.origin, g.origin))
    return LatticeFunction(out, origin)


# ---------------------------------------------------------------------------
# general polynomial mappings


@dataclass(frozen=True)
class PolynomialMap:
    """P = (P_1, ..., P_d): Z^k -> Z^d with integer coefficients.

    Each component is a mapping from exponent tuples (length k) to integer
    coefficients; for k = 1 plain integer degrees are accepted as keys.
    """

    k: int
    components: tuple

    def __post_init__(self):
        comps = []
        for P in self.components:
            terms = {}
            for e, c in dict(P).items():
                e = (int(e),) if np.isscalar(e) else tuple(int(v) for v in e)
                if len(e) != self.k or any(v < 0 for v in e):
                    raise ValueError(f"bad exponent {e} for k={self.k}")
                if int(c) != c:
                    raise ValueError("coefficients must be integers")
                if int(c):
                    terms[e] = terms.get(e, 0) + int(c)
            comps.append(tuple(sorted((e, c) for e, c in terms.items() if c)))
        if not comps:
            raise ValueError("a polynomial map needs at least one component")
        object.__setattr__(self, "components", tuple(comps))

    @property
    def d(self) -> int:
        return len(self.components)

    @property
    def degree(self) -> int:
        return max((sum(e) for P in self.components for e, _ in P), default=0)

    def evaluate_exact(self, y: Sequence[int]) -> tuple[int, ...]:
        """Term-by-term evaluation in Python integers."""
        out = []
        for P in self.components:
            v = 0
            for e, c in P:
                m = c
                for yi, ei in zip(y, e):
                    m *= int(yi) ** ei
                v += m
            out.append(v)
        return tuple(out)


def canonical_decomposition(P: PolynomialMap) -> tuple[MultiIndexSet, np.ndarray]:
    """Gamma (all monomials present) and C with P(y) = C (y)^Gamma."""
    for P_j in P.components:
        for e, c in P_j:
            if not any(e):
                raise ValueError("polynomial components must vanish at 0 (constant term present)")
    monos = sorted({e for P_j in P.components for e, _ in P_j})
    if not monos:
        raise ValueError("the polynomial map is identically zero")
    gamma = MultiIndexSet(tuple(monos))
    pos = {e: i for i, e in enumerate(gamma.exponents)}
    C = np.zeros((P.d, len(gamma)), dtype=np.int64)
    for j, P_j in enumerate(P.components):
        for e, c in P_j:
            C[j, pos[e]] = c
    # exact check on the cube |y|_inf <= 3
    for y in np.ndindex(*([7] * P.k)):
        y = tuple(v - 3 for v in y)
        mono = [math.prod(yi ** ei for yi, ei in zip(y, e)) for e in gamma.exponents]
        lhs = tuple(sum(int(C[j, i]) * mono[i] for i in range(len(gamma))) for j in range(P.d))
        if lhs != P.evaluate_exact(y):
            raise AssertionError(f"decomposition fails at y={y}")
    return gamma, C


def polynomial_images(Y: np.ndarray, P: PolynomialMap) -> np.ndarray:
    gamma, C = canonical_decomposition(P)
    Z = canonical_map(Y, gamma)
    mag = np.abs(Z).astype(float) @ np.abs(C).T.astype(float) if len(Y) else np.zeros(0)
    if np.size(mag) and np.max(mag) >= 2.0 ** 62:
        raise CanonicalMapOverflowError("polynomial image exceeds the int64 range")
    return Z @ C.T


def radon_general_poly(f: LatticeFunction, K: CZKernel, body: ConvexBody, P: PolynomialMap, t: float,
                       budget: int = DEFAULT_POINT_BUDGET) -> LatticeFunction:
    """H_t^P f(x) = sum_{y in Omega_t cap Z^k, y != 0} f(x - P(y)) K(y)."""
    _check_setup(f.dim, K, body)
    if P.k != K.k:
        raise ValueError("polynomial map and kernel dimensions differ")
    if f.dim != P.d:
        raise ValueError(f"f lives on Z^{f.dim} but P maps into Z^{P.d}")
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    Y = lattice_points_in_dilate(body, t, budget)
    if len(Y) == 0:
        return LatticeFunction(np.zeros(f.shape, complex), f.origin)
    Z = polynomial_images(Y, P)
    return _lattice_convolve(f, Z, K(Y).astype(complex))


# ---------------------------------------------------------------------------
# whole truncation families


def radon_family(f: LatticeFunction, K: CZKernel, body: ConvexBody, gamma: MultiIndexSet,
                 grid: TruncationGrid, budget: int = DEFAULT_POINT_BUDGET) -> SampledFamily:
    """H_t f for every t in ``grid`` in one pass over Omega_{t_max}.

    Lattice points are grouped by the first grid time whose dilate contains
    them; member i adds annulus i to member i - 1. All members share the
    output box of the largest truncation.
    """
    _check_setup(f.dim, K, body, gamma)
    times = grid.as_array()
    Y, Z, w = pushforward_points(K, body, gamma, times[-1], budget)
    box = _output_box(f.box, Z)
    shape = tuple(hi - lo + 1 for lo, hi in box)
    if len(Y):
        ann = np.searchsorted(times ** 2, body.gauge_sq(Y), side="right")
    else:
        ann = np.zeros(0, dtype=int)
    values = np.zeros((len(times),) + shape, complex)
    current = LatticeFunction.zeros(box)
    for i in range(len(times)):
        sel = np.nonzero(ann == i)[0]
        if sel.size:
            current = current + _lattice_convolve(f, Z[sel], w[sel], out_box=box)
        values[i] = current.values
    return SampledFamily(grid, values, 1.0, tuple(lo for lo, _ in box))


def family_member(family: SampledFamily, i: int) -> LatticeFunction:
    return LatticeFunction(family.values[i], family.origin)


def annulus_transform(f: LatticeFunction, K: CZKernel, body: ConvexBody, gamma: MultiIndexSet,
                      r: float, R: float, out_box: Box | None = None,
                      budget: int = DEFAULT_POINT_BUDGET) -> LatticeFunction:
    """sum over lattice y in Omega_R minus Omega_r of f(x - (y)^Gamma) K(y)."""
    _check_setup(f.dim, K, body, gamma)
    if not 0 < r < R:
        raise DomainError(f"need 0 < r < R, got {r}, {R}")
    Y, Z, w = pushforward_points(K, body, gamma, R, budget)
    sel = body.gauge_sq(Y) >= float(r) ** 2 if len(Y) else np.zeros(0, bool)
    if out_box is None:
        out_box = _output_box(f.box, Z)
    return _lattice_convolve(f, Z[sel], w[sel], out_box=out_box)


# ---------------------------------------------------------------------------
# continuous operator


class QuadratureResult(NamedTuple):
    value: GridFunction
    error: float


def _radial_rule(a: np.ndarray, b: float | np.ndarray, n: int, log: bool):
    g, wg = np.polynomial.legendre.leggauss(n)
    if log:
        la, lb = np.log(a), np.log(b)
        s = np.exp(0.5 * (lb - la) * (g + 1) + la)
        return s, 0.5 * (lb - la) * wg * s
    s = 0.5 * (b - a) * (g + 1) + a
    return s, 0.5 * (b - a) * wg


class _Shifter:
    """Evaluates x -> f(x - z) on the grid by cubic-spline shifts, f = 0 off the box."""

    def __init__(self, f: GridFunction, order: int = 3):
        self.h = f.spacing
        self.order = order
        self.re = ndimage.spline_filter(f.values.real, order=order, mode="grid-constant")
        self.im = ndimage.spline_filter(f.values.imag, order=order, mode="grid-constant")
        self.complex = bool(np.any(f.values.imag))

    def __call__(self, z: np.ndarray) -> np.ndarray:
        sh = np.asarray(z, float) / self.h
        out = ndimage.shift(self.re, sh, order=self.order, mode="grid-constant", prefilter=False).astype(complex)
        if self.complex:
            out += 1j * ndimage.shift(self.im, sh, order=self.order, mode="grid-constant", prefilter=False)
        return out


def _polar_nodes(body: ConvexBody, inner: float, outer: float, level: int, log: bool):
    """Half-sphere directions times radial nodes on [inner rho(u), outer rho(u)]."""
    u, wu = sphere_half_rule(body.k, level)
    rho = body.radial_extent(u)
    pts, wts = [], []
    for ui, wi, ri in zip(u, wu, rho):
        a = inner * ri if inner > 0 else 0.0
        s, ws = _radial_rule(np.float64(a), outer * ri, level, log and a > 0)
        pts.append(s[:, None] * ui[None, :])
        wts.append(wi * ws * s ** (body.k - 1))
    return np.concatenate(pts), np.concatenate(wts)


def _outer_integral(shift: _Shifter, K: CZKernel, body: ConvexBody, gamma: MultiIndexSet,
                    inner: float, outer: float, level: int) -> np.ndarray:
    Y, W = _polar_nodes(body, inner, outer, level, log=True)
    kp, km = K(Y), K(-Y)
    zp, zm = canonical_map(Y, gamma), canonical_map(-Y, gamma)
    acc = None
    for i in range(len(Y)):
        term = W[i] * (kp[i] * shift(zp[i]) + km[i] * shift(zm[i]))
        acc = term if acc is None else acc + term
    return acc


def continuous_radon_quadrature(f: GridFunction, K: CZKernel, body: ConvexBody, gamma: MultiIndexSet,
                                t: float, eps: float, quad_level: int = 24,
                                tol: float | None = None) -> QuadratureResult:
    """Principal-value quadrature of the continuous truncated Radon transform.

    The region Omega_t minus Omega_eps is integrated with a paired polar rule
    (nodes y and -y summed together, log-spaced Gauss in the radius) acting
    on a cubic-spline interpolant of f that vanishes off the box. On Omega_eps
    the cancellation condition reduces the integrand to f(x - (y)^Gamma) - f(x),
    replaced by its first-order Taylor term.

    The reported error adds the quadrature change from halving the level
    (taken over nodes far enough from the box edge that f is not cut off), a
    second-order Taylor bound for Omega_eps and a spline-interpolation
    estimate. ``tol`` turns an estimate above it into :class:`ResolutionError`.
    """
    _check_setup(f.dim, K, body, gamma)
    if K.k > 2 or len(gamma) > 3:
        raise BudgetExceededError("the continuous operator is limited to k <= 2 and |Gamma| <= 3")
    if quad_level < 4:
        raise ValueError("quad_level must be at least 4 so the halved rule differs")
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if not 0 < eps < body.inner_radius * t:
        raise DomainError(f"need 0 < eps < c_Omega * t = {body.inner_radius * t}, got {eps}")
    shift = _Shifter(f)
    outer = _outer_integral(shift, K, body, gamma, eps, t, quad_level)
    coarse = _outer_integral(shift, K, body, gamma, eps, t, quad_level // 2)

    # moments int_{Omega_eps} y^gamma K(y) dy and the second-order weight
    Y, W = _polar_nodes(body, 0.0, eps, quad_level, log=False)
    zp, zm = canonical_map(Y, gamma), canonical_map(-Y, gamma)
    kp, km = K(Y), K(-Y)
    moments = (W[:, None] * (zp * kp[:, None] + zm * km[:, None])).sum(axis=0)
    second = float(np.sum(W * (np.abs(zp).sum(1) ** 2 * np.abs(kp) + np.abs(zm).sum(1) ** 2 * np.abs(km))))

    h = f.spacing
    vals = f.values
    grads = np.gradient(vals, h) if vals.ndim > 1 else [np.gradient(vals, h)]
    inner = np.zeros(vals.shape, complex)
    for j in range(len(gamma)):
        inner -= grads[j] * moments[j]
    d2 = 0.0
    for g_ in grads:
        sec = np.gradient(g_, h) if vals.ndim > 1 else [np.gradient(g_, h)]
        d2 = max(d2, max(float(np.max(np.abs(s))) for s in sec))
    Yo, Wo = _polar_nodes(body, eps, t, quad_level, log=True)
    mass = float(np.sum(np.abs(Wo) * (np.abs(K(Yo)) + np.abs(K(-Yo)))))
    fourth = max(float(np.max(np.abs(np.diff(vals, n=4, axis=ax)))) if vals.shape[ax] > 4 else 0.0
                 for ax in range(vals.ndim))
    # quadrature change, measured where no node reaches past the box edge
    reach = np.abs(canonical_map(Yo, gamma)).max(axis=0) + 3 * h
    keep = np.ones(vals.shape, bool)
    for ax, (c, m) in enumerate(zip(f.coordinates(), reach)):
        ok = (c - c[0] >= m) & (c[-1] - c >= m)
        keep &= ok.reshape((-1,) + (1,) * (vals.ndim - ax - 1))
    diff = np.abs(outer - coarse)
    quad = float(np.max(diff[keep])) if keep.any() else float(np.max(diff))
    error = quad + 0.5 * d2 * second + fourth / 384.0 * mass
    if tol is not None and error > tol:
        raise ResolutionError(f"estimated error {error:.3g} exceeds tolerance {tol:.3g}; refine the grid")
    return QuadratureResult(f.with_values(outer + inner), error)


def continuous_annulus_transform(f: GridFunction, K: CZKernel, body: ConvexBody, gamma: MultiIndexSet,
                                 r: float, R: float, quad_level: int = 24) -> GridFunction:
    """Integral of f(x - (y)^Gamma) K(y) over Omega_R minus Omega_r (no singularity)."""
    _check_setup(f.dim, K, body, gamma)
    if not 0 < r < R:
        raise DomainError(f"need 0 < r < R, got {r}, {R}")
    return f.with_values(_outer_integral(_Shifter(f), K, body, gamma, r, R, quad_level))
