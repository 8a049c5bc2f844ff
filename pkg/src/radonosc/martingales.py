"""Anisotropic dyadic cubes, martingale averages and the pieces of the complement transform.

Level k cells are rectangles prod_gamma [m_gamma D^{k|gamma|}, (m_gamma + 1) D^{k|gamma|});
larger k means coarser cells.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import ndimage
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from .exceptions import DomainError, ResolutionError
from .kernels import CZKernel
from .lattice import (DEFAULT_POINT_BUDGET, ConvexBody, DilationMatrix, GridFunction, LatticeFunction,
                      MultiIndexSet, dilate_point, lp_norm)
from .radon import (annulus_transform, continuous_annulus_transform, discrete_radon_direct,
                    pushforward_points, _output_box)
from .seminorms import SampledFamily, SequenceI, TruncationGrid, sup_oscillation_norm_p2, worst_sequence_search

_REL = 1e-9


@dataclass(frozen=True)
class ChristCubeSystem:
    """D-adic anisotropic rectangles adapted to the dilations t^A, A = diag(weights)."""

    weights: tuple[int, ...]
    D: int = 2
    k_min: int = -5
    k_max: int = 5

    def __post_init__(self):
        w = tuple(int(v) for v in self.weights)
        if not w or any(v < 1 for v in w):
            raise ValueError("weights must be positive integers")
        if int(self.D) != self.D or self.D < 2:
            raise ValueError(f"D must be an integer > 1, got {self.D}")
        if self.k_min > self.k_max:
            raise ValueError("empty level range")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "D", int(self.D))

    @classmethod
    def from_gamma(cls, gamma: MultiIndexSet, D: int = 2, k_min: int = -5, k_max: int = 5) -> "ChristCubeSystem":
        return cls(gamma.weights, D, k_min, k_max)

    @property
    def dim(self) -> int:
        return len(self.weights)

    @property
    def dilation(self) -> DilationMatrix:
        return DilationMatrix(self.weights)

    def _check_level(self, k: int):
        if not self.k_min <= k <= self.k_max:
            raise ValueError(f"level {k} outside [{self.k_min}, {self.k_max}]")

    def sides(self, k: int) -> np.ndarray:
        return float(self.D) ** (k * np.asarray(self.weights, float))

    def cube_containing(self, x, k: int) -> np.ndarray:
        """Integer index m with x in prod [m D^{k w}, (m + 1) D^{k w})."""
        self._check_level(k)
        x = np.asarray(x, float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"points need {self.dim} coordinates")
        return np.floor(x / self.sides(k)).astype(np.int64)

    def quasi_norm(self, x) -> np.ndarray:
        """rho(x) = max_gamma |x_gamma|^{1/|gamma|}, homogeneous of degree 1 under t^A."""
        x = np.abs(np.asarray(x, float))
        return np.max(x ** (1.0 / np.asarray(self.weights, float)), axis=-1)

    def ball_constants(self) -> tuple[float, float]:
        """(c_in, c_out): the rho-ball of radius c_in D^k around a level-k cell centre lies inside
        the cell, which lies inside the closed rho-ball of radius c_out D^k."""
        return 2.0 ** (-1.0 / min(self.weights)), 2.0 ** (-1.0 / max(self.weights))

    def euclidean_radii(self, k: int) -> tuple[float, float]:
        """Inner and outer Euclidean radii of a level-k cell about its centre."""
        s = self.sides(k)
        return float(s.min() / 2), float(np.linalg.norm(s) / 2)


def _cell_ratios(f: GridFunction, k: int, system: ChristCubeSystem) -> tuple[int, ...]:
    if f.dim != system.dim:
        raise ValueError(f"grid is {f.dim}-dimensional, cube system is {system.dim}-dimensional")
    h = f.spacing
    ratios = []
    for ax, (s, o, n) in enumerate(zip(system.sides(k), f.origin, f.shape)):
        r = round(s / h)
        if r < 1 or abs(r * h - s) > _REL * s:
            raise ResolutionError(f"cell side {s:g} on axis {ax} is not a multiple of the spacing {h:g}")
        off = o / s
        if abs(off - round(off)) > _REL * max(1.0, abs(off)):
            raise ResolutionError(f"grid origin {o:g} on axis {ax} is not on a level-{k} cell boundary")
        if n % r:
            raise ResolutionError(f"{n} nodes on axis {ax} do not split into whole cells of {r} nodes")
        ratios.append(int(r))
    return tuple(ratios)


def conditional_expectation(f: GridFunction, k: int, system: ChristCubeSystem) -> GridFunction:
    """E_k f: the average of f over the level-k cell containing each node."""
    system._check_level(k)
    r = _cell_ratios(f, k, system)
    v = f.values
    split = []
    for n, ri in zip(v.shape, r):
        split += [n // ri, ri]
    blocks = v.reshape(split).mean(axis=tuple(range(1, 2 * v.ndim, 2)), keepdims=True)
    full = np.broadcast_to(blocks, split).reshape(v.shape)
    return f.with_values(full)


class MartingaleProbe(NamedTuple):
    ratio: float
    sequence: SequenceI | None
    by_prefix: tuple[float, ...]


def martingale_family(f: GridFunction, levels: Sequence[int], system: ChristCubeSystem) -> SampledFamily:
    """E_k f for the given increasing levels, indexed by the times D^k."""
    levels = [int(k) for k in levels]
    if any(b <= a for a, b in zip(levels[:-1], levels[1:])):
        raise ValueError("levels must be strictly increasing")
    grid = TruncationGrid(tuple(float(system.D) ** k for k in levels))
    vals = np.stack([conditional_expectation(f, k, system).values for k in levels])
    return SampledFamily(grid, vals, f.cell_volume, f.origin, f.spacing)


def martingale_oscillation_probe(f: GridFunction, levels: Sequence[int], system: ChristCubeSystem,
                                 p: float = 2.0, N: int | None = None, restarts: int = 50,
                                 seed: int = 0) -> MartingaleProbe:
    """Largest ||O^2_{I,N}(E_k f : k)||_p / ||f||_p found over level sequences I.

    For p = 2 the search is exact (over all N when ``N`` is None); otherwise
    random-restart search runs for each N. ``by_prefix`` repeats the probe on
    the first 2, 3, ... levels to show how the ratio grows with the range.
    """
    fam = martingale_family(f, levels, system)
    norm = lp_norm(f, p)
    if norm == 0:
        return MartingaleProbe(0.0, None, tuple(0.0 for _ in range(len(levels) - 1)))

    def best(family):
        T = len(family.grid)
        if T < 2:
            return None, 0.0
        if p == 2 and N is None:
            return sup_oscillation_norm_p2(family)
        Ns = [N] if N is not None else range(1, T)
        out = (None, -1.0)
        for n in Ns:
            if n + 1 > T:
                continue
            strat = "dp" if p == 2 else "random-restarts"
            res = worst_sequence_search(family, p, n, strat, restarts=restarts, seed=seed)
            if res.value > out[1]:
                out = (res.sequence, res.value)
        return out

    seq, val = best(fam)
    prefix = tuple(best(fam.restrict(range(m)))[1] / norm for m in range(2, len(levels) + 1))
    return MartingaleProbe(max(val, 0.0) / norm, seq, prefix)


# ---------------------------------------------------------------------------
# mollifiers and the approximation square function


@dataclass(frozen=True)
class Mollifier:
    """A function phi on R^d with support in the Euclidean ball of ``radius``."""

    func: Callable[[np.ndarray], np.ndarray]
    radius: float
    dim: int

    @classmethod
    def bump(cls, dim: int, radius: float = 0.5) -> "Mollifier":
        """c exp(-1 / (1 - |x/R|^2)) with c fixing the integral to 1."""
        sphere = 2 * math.pi ** (dim / 2) / gamma_fn(dim / 2)
        radial = quad(lambda s: math.exp(-1.0 / (1.0 - s * s)) * s ** (dim - 1) if s < 1 else 0.0,
                      0, 1, epsabs=1e-14, epsrel=1e-13)[0]
        c = 1.0 / (sphere * radial * radius ** dim)

        def func(x):
            r2 = np.sum((np.asarray(x, float) / radius) ** 2, axis=-1)
            out = np.zeros(r2.shape)
            m = r2 < 1
            out[m] = c * np.exp(-1.0 / (1.0 - r2[m]))
            return out

        return cls(func, float(radius), int(dim))

    def __call__(self, x) -> np.ndarray:
        return self.func(np.asarray(x, float))


def _grid_mollifier(phi: GridFunction) -> Mollifier:
    mass = float(np.sum(phi.values.real)) * phi.cell_volume
    if abs(mass - 1) > 1e-10:
        raise ValueError(f"mollifier integrates to {mass!r}, not 1")
    coords = phi.coordinates()
    radius = float(np.sqrt(sum(max(abs(c[0]), abs(c[-1])) ** 2 for c in coords)))
    h = phi.spacing
    origin = np.asarray(phi.origin)
    vals = phi.values.real

    def func(x):
        idx = (np.asarray(x, float) - origin) / h
        pts = np.moveaxis(idx, -1, 0)
        return ndimage.map_coordinates(vals, pts, order=1, mode="constant", cval=0.0)

    return Mollifier(func, radius, phi.dim)


def _mollifier_weights(phi: Mollifier, t: float, A: DilationMatrix, h: float) -> np.ndarray:
    """Renormalised samples of phi_t(x) = t^{-tr A} phi(t^{-A} x) on the offsets h j."""
    half = np.floor(phi.radius * A.scale_factors(t) / h + 1e-12).astype(int)
    axes = [h * np.arange(-m, m + 1) for m in half]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    w = phi(dilate_point(1.0 / t, A, X)) * t ** (-A.trace)
    s = w.sum()
    if s <= 0:
        w = np.zeros_like(w)
        w[tuple(half)] = 1.0
        return w
    return w / s


def mollify(f: GridFunction, phi: Mollifier, t: float, A: DilationMatrix) -> GridFunction:
    """phi_t * f by direct summation on the grid.

    Off the box f is continued by its edge values, so constants stay
    constant; a support that does not fit in the box is an error.
    """
    w = _mollifier_weights(phi, t, A, f.spacing)
    if any(m > n for m, n in zip(w.shape, f.shape)):
        raise ValueError("mollifier support at this scale is wider than the grid box")
    re = ndimage.convolve(f.values.real, w, mode="nearest")
    im = ndimage.convolve(f.values.imag, w, mode="nearest")
    return f.with_values(re + 1j * im)


def approx_square_function(f: GridFunction, phi, system: ChristCubeSystem, levels: Sequence[int]) -> GridFunction:
    """S f = (sum_k |phi_{D^k} * f - E_k f|^2)^{1/2} over the given levels.

    ``phi`` is a Mollifier or a GridFunction sampling a mollifier around 0.
    The discrete weights of phi_{D^k} are renormalised to sum to 1, which
    keeps constants fixed and the integral of f unchanged.
    """
    if isinstance(phi, GridFunction):
        phi = _grid_mollifier(phi)
    if phi.dim != f.dim:
        raise ValueError("mollifier and grid dimensions differ")
    A = system.dilation
    acc = np.zeros(f.shape)
    for k in levels:
        t = float(system.D) ** int(k)
        diff = mollify(f, phi, t, A).values - conditional_expectation(f, int(k), system).values
        acc += np.abs(diff) ** 2
    return f.with_values(np.sqrt(acc))


# ---------------------------------------------------------------------------
# measures


@dataclass(frozen=True)
class DiscreteMeasure:
    """sum_i w_i delta_{x_i} on R^d."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        P = np.array(self.points, float, ndmin=2)
        W = np.array(self.weights, complex).ravel()
        if P.shape[0] != W.shape[0]:
            raise ValueError("one weight per support point is required")
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(W))):
            raise ValueError("points and weights must be finite")
        P.setflags(write=False)
        W.setflags(write=False)
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "weights", W)

    @classmethod
    def dirac(cls, point: Sequence[float]) -> "DiscreteMeasure":
        return cls(np.array([point], float), np.ones(1))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def total_mass(self) -> complex:
        return complex(np.sum(self.weights))

    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.weights)))

    def support_radius(self) -> float:
        return float(np.max(np.linalg.norm(self.points, axis=1))) if len(self.points) else 0.0

    def pair(self, f: Callable[[np.ndarray], np.ndarray]) -> complex:
        """<sigma, f> = sum_i w_i f(x_i)."""
        return complex(np.sum(self.weights * f(self.points)))


def measure_dilate(sigma: DiscreteMeasure, t: float, A: DilationMatrix) -> DiscreteMeasure:
    """sigma_t with <sigma_t, f> = integral of f(t^A x) d sigma(x)."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    return DiscreteMeasure(dilate_point(t, A, sigma.points), sigma.weights)


class LowHighSplit(NamedTuple):
    low: GridFunction
    high: GridFunction


def low_high_split(sigma: DiscreteMeasure, phi: Mollifier, lower: Sequence[float], upper: Sequence[float],
                   spacing: float) -> LowHighSplit:
    """sigma = phi * sigma + (delta_0 - phi) * sigma on a grid, as node masses.

    sigma must sit on grid nodes. Each translate of phi is sampled and
    renormalised to the mass of its atom, so the high part has total mass 0.
    """
    sigma_grid = GridFunction.sample(lambda X: np.zeros(X.shape[:-1]), lower, upper, spacing)
    origin = np.asarray(sigma_grid.origin)
    idx = (sigma.points - origin) / spacing
    ridx = np.rint(idx)
    if np.any(np.abs(idx - ridx) > 1e-9) or np.any(ridx < 0) or np.any(ridx >= np.array(sigma_grid.shape)):
        raise ResolutionError("support points must be grid nodes inside the box")
    ridx = ridx.astype(int)
    if np.any(sigma.points - phi.radius < np.asarray(lower, float) - 1e-12) or \
            np.any(sigma.points + phi.radius > np.asarray(upper, float) + 1e-12):
        raise ValueError("a translate of the mollifier leaves the grid box")
    atoms = np.zeros(sigma_grid.shape, complex)
    np.add.at(atoms, tuple(ridx.T), sigma.weights)
    nodes = sigma_grid.nodes()
    low = np.zeros(sigma_grid.shape, complex)
    for x, w in zip(sigma.points, sigma.weights):
        samp = phi(nodes - x)
        s = samp.sum()
        if s <= 0:
            raise ResolutionError("grid is too coarse to resolve the mollifier")
        low += w * samp / s
    high = atoms - low
    return LowHighSplit(sigma_grid.with_values(low), sigma_grid.with_values(high))


# ---------------------------------------------------------------------------
# telescoping pieces of the complement transform


def telescoping_pieces(f, K: CZKernel, body: ConvexBody, gamma: MultiIndexSet, D: float,
                       k_lo: int, k_hi: int, quad_level: int = 24,
                       budget: int = DEFAULT_POINT_BUDGET) -> tuple:
    """mu_{D^j} * f for j = k_lo, ..., k_hi - 1: the transform restricted to Omega_{D^{j+1}} minus Omega_{D^j}.

    On Z^d the pieces share the output box of H_{D^{k_hi}}, so
    their sum equals H_{D^{k_hi}} f - H_{D^{k_lo}} f term by term.
    """
    if not D > 1:
        raise DomainError(f"D must exceed 1, got {D}")
    if k_hi <= k_lo:
        raise ValueError("empty level range")
    radii = [float(D) ** j for j in range(k_lo, k_hi + 1)]
    if isinstance(f, LatticeFunction):
        _, Z, _ = pushforward_points(K, body, gamma, radii[-1], budget)
        box = _output_box(f.box, Z)
        return tuple(annulus_transform(f, K, body, gamma, r, R, box, budget) for r, R in zip(radii[:-1], radii[1:]))
    if isinstance(f, GridFunction):
        return tuple(continuous_annulus_transform(f, K, body, gamma, r, R, quad_level)
                     for r, R in zip(radii[:-1], radii[1:]))
    raise TypeError("f must be a LatticeFunction or a GridFunction")


def complement_difference(f: LatticeFunction, K: CZKernel, body: ConvexBody, gamma: MultiIndexSet,
                          D: float, k_lo: int, k_hi: int, budget: int = DEFAULT_POINT_BUDGET) -> LatticeFunction:
    """H_{D^{k_hi}} f - H_{D^{k_lo}} f on the box of the larger truncation."""
    big = discrete_radon_direct(f, K, body, gamma, float(D) ** k_hi, budget=budget)
    small = discrete_radon_direct(f, K, body, gamma, float(D) ** k_lo, budget=budget)
    return big - small.embed(big.box)
