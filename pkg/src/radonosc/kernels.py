"""Calderon-Zygmund kernels and numerical checks of their three axioms."""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import minimize

from .exceptions import BudgetExceededError, DomainError
from .lattice import ConvexBody, _as_points

_QUAD_BUDGET = 10_000_000


@dataclass(frozen=True)
class CZKernel:
    """A kernel K on R^k minus the origin.

    ``func`` receives an (..., k) float array and returns K at each point.
    ``holder_constant`` is the measured sup of
    |K(x) - K(x+y)| |x|^{k+sigma} / |y|^sigma over |y| <= |x|/2.
    """

    func: Callable[[np.ndarray], np.ndarray]
    k: int
    sigma: float = 1.0
    odd: bool = False
    name: str = "custom"
    degree: int | None = None
    holder_constant: float | None = None

    def __post_init__(self):
        if not 0 < self.sigma <= 1:
            raise ValueError(f"Holder exponent must lie in (0, 1], got {self.sigma}")
        if self.degree is None:
            object.__setattr__(self, "degree", -self.k)

    def __call__(self, y) -> np.ndarray:
        return self.func(_as_points(y, self.k).astype(float))

    def scaled(self, c: float) -> "CZKernel":
        f = self.func
        hc = None if self.holder_constant is None else abs(c) * self.holder_constant
        return replace(self, func=lambda y: c * f(y), name=f"{c:g}*{self.name}", holder_constant=hc)


def _hilbert(y):
    return 1.0 / y[..., 0]


def make_hilbert_kernel() -> CZKernel:
    """K(y) = 1/y on R. Odd, sigma = 1, Holder constant sup |x|/|x+y| = 2."""
    return CZKernel(_hilbert, 1, 1.0, True, "hilbert", -1, 2.0)


def make_riesz_type_kernel(k: int, component: int) -> CZKernel:
    """K(y) = y_c / |y|^{k+1} with 1-based component c.

    sup |K(y)| |y|^k = sup |y_c|/|y| = 1, so the size constant is already exactly 1.
    """
    k, component = int(k), int(component)
    if k < 1:
        raise ValueError("dimension must be positive")
    if not 1 <= component <= k:
        raise ValueError(f"component must lie in 1..{k}, got {component}")
    c = component - 1

    def func(y):
        return y[..., c] / np.sum(y * y, axis=-1) ** ((k + 1) / 2)

    kern = CZKernel(func, k, 1.0, True, f"riesz{k}.{component}", -k)
    return replace(kern, holder_constant=_riesz_holder_constant(k, component))


@lru_cache(maxsize=None)
def _riesz_holder_constant(k: int, component: int) -> float:
    kern = CZKernel(lambda y: y[..., component - 1] / np.sum(y * y, axis=-1) ** ((k + 1) / 2), k, 1.0, True)
    return estimate_holder_constant(kern)


def _unit_vectors(rng, n, k):
    u = rng.standard_normal((n, k))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def _holder_ratio(K: CZKernel, x, y):
    nx = np.linalg.norm(x, axis=-1)
    ny = np.linalg.norm(y, axis=-1)
    return np.abs(K(x) - K(x + y)) * nx ** (K.k + K.sigma) / ny ** K.sigma


def _polish_pairs(K: CZKernel, x: np.ndarray, y: np.ndarray, ratios: np.ndarray, refine: int) -> float:
    """Local Nelder-Mead ascent from the ``refine`` best pairs, keeping |y| <= |x|/2."""
    k = K.k
    best = float(np.max(ratios))
    for i in np.argsort(ratios)[-refine:]:
        def neg(p):
            xx, yy = p[:k], p[k:]
            nx, ny = np.linalg.norm(xx), np.linalg.norm(yy)
            if nx == 0 or ny == 0:
                return 0.0
            if ny > nx / 2:
                yy = yy * (nx / 2 / ny)
            return -float(_holder_ratio(K, xx[None], yy[None])[0])
        res = minimize(neg, np.concatenate([x[i], y[i]]), method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 600 * k})
        best = max(best, -float(res.fun))
    return best


def estimate_holder_constant(K: CZKernel, samples: int = 50_000, seed: int = 0, refine: int = 8) -> float:
    """Deterministic estimate of the Holder constant for a kernel homogeneous of degree -k.

    Homogeneity lets |x| = 1; the best random pairs are polished locally.
    """
    rng = np.random.default_rng(seed)
    k = K.k
    x = _unit_vectors(rng, samples, k)
    s = np.maximum(0.5 * rng.uniform(0, 1, samples) ** (1.0 / k), 1e-9)
    y = s[:, None] * _unit_vectors(rng, samples, k)
    return _polish_pairs(K, x, y, _holder_ratio(K, x, y), refine)


class SizeHolderReport(NamedTuple):
    size_ratio: float
    holder_ratio: float

    @property
    def size_ok(self) -> bool:
        return self.size_ratio <= 1 + 1e-12


def verify_size_and_holder(K: CZKernel, samples: int, rng=None,
                           radius_range: tuple[float, float] = (1e-3, 1e3),
                           refine: int = 3) -> SizeHolderReport:
    """Max of |K(x)||x|^k and of the Holder ratio over random admissible pairs.

    |x| is log-uniform on ``radius_range``; y satisfies |y| <= |x|/2. The
    ``refine`` best Holder pairs are polished by a local search so the
    reported maximum tracks the supremum rather than the sample size.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(rng)
    k = K.k
    lo, hi = np.log(radius_range[0]), np.log(radius_range[1])
    rad = np.exp(rng.uniform(lo, hi, samples))
    x = rad[:, None] * _unit_vectors(rng, samples, k)
    s = 0.5 * rng.uniform(0, 1, samples) ** (1.0 / k)
    s = np.maximum(s, 1e-12)
    y = (s * rad)[:, None] * _unit_vectors(rng, samples, k)
    size = np.abs(K(x)) * rad ** k
    ratios = _holder_ratio(K, x, y)
    holder = _polish_pairs(K, x, y, ratios, refine) if refine else float(np.max(ratios))
    return SizeHolderReport(float(np.max(size)), holder)


def sphere_half_rule(k: int, level: int) -> tuple[np.ndarray, np.ndarray]:
    """Directions u and weights on half of S^{k-1}; {u} and {-u} together form a full rule.

    k = 1: {+1}. k = 2: trapezoid in the angle. k = 3: Gauss-Legendre in
    cos(polar angle) on z > 0 times a trapezoid in the azimuth.
    """
    if k == 1:
        return np.ones((1, 1)), np.ones(1)
    if k == 2:
        th = np.pi * np.arange(level) / level
        return np.column_stack([np.cos(th), np.sin(th)]), np.full(level, np.pi / level)
    if k == 3:
        n = level + (level % 2)
        z, wz = np.polynomial.legendre.leggauss(n)
        keep = z > 0
        z, wz = z[keep], wz[keep]
        m = 2 * n
        th = 2 * np.pi * np.arange(m) / m
        Z, TH = np.meshgrid(z, th, indexing="ij")
        rxy = np.sqrt(1 - Z * Z)
        u = np.stack([rxy * np.cos(TH), rxy * np.sin(TH), Z], axis=-1).reshape(-1, 3)
        w = np.outer(wz, np.full(m, 2 * np.pi / m)).ravel()
        return u, w
    raise BudgetExceededError(f"polar quadrature is implemented for k <= 3, got k={k}")


def verify_cancellation(K: CZKernel, body: ConvexBody, r: float, R: float, quad_level: int = 64) -> float:
    """|integral of K over Omega_R minus Omega_r| by a paired polar rule.

    Every node y is matched with -y (computed by exact negation), the pair is
    summed first, and the radial variable is integrated in log s with
    Gauss-Legendre. Odd kernels on symmetric bodies therefore give exactly 0.
    """
    if not 0 < r < R < np.inf:
        raise DomainError(f"need 0 < r < R < inf, got r={r}, R={R}")
    if body.k != K.k:
        raise ValueError("kernel and body dimensions differ")
    if quad_level ** K.k > _QUAD_BUDGET:
        raise BudgetExceededError("quadrature node count exceeds the budget")
    u, wu = sphere_half_rule(K.k, quad_level)
    rho = body.radial_extent(u)
    g, wg = np.polynomial.legendre.leggauss(quad_level)
    total = 0.0
    for ui, wi, ri in zip(u, wu, rho):
        a, b = np.log(r * ri), np.log(R * ri)
        w = 0.5 * (b - a) * (g + 1) + a
        s = np.exp(w)
        y = s[:, None] * ui[None, :]
        pair = K(y) + K(-y)
        total += wi * 0.5 * (b - a) * np.sum(wg * pair * s ** K.k)
    return float(abs(total))
