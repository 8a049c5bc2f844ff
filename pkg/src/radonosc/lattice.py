"""Multi-index sets, the canonical polynomial map, dilations, convex bodies and
function containers on Z^Gamma and R^Gamma.

Points of R^Gamma are stored as trailing-axis arrays of length ``len(gamma)``
with coordinates in the lexicographic order of the multi-indices.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .exceptions import BudgetExceededError, CanonicalMapOverflowError, DomainError

#: default cap on the number of candidate lattice points enumerated at once
DEFAULT_POINT_BUDGET = 10_000_000

# |x^gamma| must stay below 2**62 so int64 products never wrap
_LOG2_INT_LIMIT = 62.0


Box = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class MultiIndexSet:
    """Finite set Gamma of nonzero multi-indices in N_0^k, in lexicographic order."""

    exponents: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        exps = tuple(tuple(int(e) for e in g) for g in self.exponents)
        if not exps:
            raise ValueError("a multi-index set must be nonempty")
        k = len(exps[0])
        if k == 0:
            raise ValueError("multi-indices must have positive length")
        for g in exps:
            if len(g) != k:
                raise ValueError(f"mixed multi-index lengths in {exps}")
            if any(e < 0 for e in g):
                raise ValueError(f"negative exponent in {g}")
            if not any(g):
                raise ValueError("the zero multi-index is not allowed")
        for a, b in zip(exps, exps[1:]):
            if not a < b:
                raise ValueError(f"multi-indices must be strictly increasing in lexicographic order, got {a} before {b}")
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def from_iterable(cls, exponents: Iterable[Sequence[int]]) -> "MultiIndexSet":
        """Sort and deduplicate before validating."""
        return cls(tuple(sorted({tuple(int(e) for e in g) for g in exponents})))

    @classmethod
    def from_degrees(cls, degrees: Iterable[int]) -> "MultiIndexSet":
        """One-variable set {d_1, d_2, ...}, e.g. ``from_degrees([3])`` for y -> y^3."""
        return cls.from_iterable((int(d),) for d in degrees)

    @property
    def k(self) -> int:
        return len(self.exponents[0])

    @property
    def weights(self) -> tuple[int, ...]:
        """|gamma| = gamma_1 + ... + gamma_k for each gamma."""
        return tuple(sum(g) for g in self.exponents)

    @property
    def degree(self) -> int:
        return max(self.weights)

    def __len__(self) -> int:
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    def as_array(self) -> np.ndarray:
        return np.array(self.exponents, dtype=np.int64)


@dataclass(frozen=True)
class DilationMatrix:
    """Diagonal matrix A with (A v)_gamma = |gamma| v_gamma."""

    weights: tuple[int, ...]

    def __post_init__(self):
        w = tuple(int(x) for x in self.weights)
        if not w or any(x <= 0 for x in w):
            raise ValueError("dilation weights must be positive integers")
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_gamma(cls, gamma: MultiIndexSet) -> "DilationMatrix":
        return cls(gamma.weights)

    @property
    def trace(self) -> int:
        return sum(self.weights)

    def matches(self, gamma: MultiIndexSet) -> bool:
        return self.weights == gamma.weights

    def scale_factors(self, t: float) -> np.ndarray:
        """Diagonal of t^A."""
        if not t > 0:
            raise DomainError(f"dilation parameter must be positive, got {t}")
        return float(t) ** np.asarray(self.weights, dtype=float)


def dilate_point(t: float, A: DilationMatrix, v) -> np.ndarray:
    """Apply t^A: coordinate gamma of the output is t^{|gamma|} v_gamma."""
    v = np.asarray(v)
    if v.shape[-1] != len(A.weights):
        raise ValueError(f"point has {v.shape[-1]} coordinates, dilation expects {len(A.weights)}")
    return v * A.scale_factors(t)


def _as_points(x, k: int) -> np.ndarray:
    x = np.asarray(x)
    if k == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != k:
        raise ValueError(f"expected points with {k} coordinates, got shape {x.shape}")
    return x


def canonical_map(x, gamma: MultiIndexSet) -> np.ndarray:
    """(x)^Gamma = (x^gamma : gamma in Gamma).

    Integer input is evaluated exactly in int64; a coordinate that would leave
    the int64 range raises :class:`CanonicalMapOverflowError`. For ``k == 1``
    a plain vector is read as a list of scalar points.
    """
    x = _as_points(x, gamma.k)
    E = gamma.as_array()
    if x.dtype == object:
        raise CanonicalMapOverflowError("lattice coordinates exceed the int64 range")
    if np.issubdtype(x.dtype, np.integer) or x.dtype == bool:
        x = x.astype(np.int64)
        # bound every partial product by prod max(|x_i|, 1)^gamma_i
        with np.errstate(divide="ignore"):
            logs = np.log2(np.maximum(np.abs(x.astype(float)), 1.0))
        mag = logs @ E.T.astype(float)
        if mag.size and np.max(mag) >= _LOG2_INT_LIMIT:
            raise CanonicalMapOverflowError(
                f"canonical map overflows int64 (log2 magnitude {np.max(mag):.1f})")
        out = np.ones(x.shape[:-1] + (len(gamma),), dtype=np.int64)
        for j, g in enumerate(gamma.exponents):
            col = out[..., j]
            for i, e in enumerate(g):
                if e:
                    col *= x[..., i] ** e
        return out
    x = x.astype(float)
    out = np.ones(x.shape[:-1] + (len(gamma),), dtype=float)
    for j, g in enumerate(gamma.exponents):
        for i, e in enumerate(g):
            if e:
                out[..., j] *= x[..., i] ** e
    return out


@dataclass(frozen=True)
class ConvexBody:
    """Symmetric convex body Omega with B(0, c) <= Omega <= B(0, 1).

    Three shapes are supported: the open Euclidean unit ball, the max-norm ball
    scaled to fit in B(0, 1) (``|x|_inf < 1/sqrt(k)``, which is (-1, 1) for
    k = 1), and a diagonal ellipsoid with semi-axes in (0, 1].
    """

    shape: str
    k: int
    semi_axes: tuple[float, ...] | None = None
    inner_radius: float | None = None

    def __post_init__(self):
        if self.shape not in ("ball", "cube", "ellipsoid"):
            raise ValueError(f"unknown body shape {self.shape!r}")
        if int(self.k) < 1:
            raise ValueError("dimension must be positive")
        object.__setattr__(self, "k", int(self.k))
        if self.shape == "ellipsoid":
            if self.semi_axes is None or len(self.semi_axes) != self.k:
                raise ValueError("ellipsoid needs one semi-axis per dimension")
            axes = tuple(float(a) for a in self.semi_axes)
            if any(not 0 < a <= 1 for a in axes):
                raise ValueError("ellipsoid semi-axes must lie in (0, 1]")
            object.__setattr__(self, "semi_axes", axes)
        elif self.semi_axes is not None:
            raise ValueError("semi_axes only applies to ellipsoids")
        c = self.inner_radius
        if c is None:
            c = 0.99 * self.inradius
        c = float(c)
        if not 0 < c < 1:
            raise ValueError(f"inner radius must lie in (0, 1), got {c}")
        if c > self.inradius * (1 + 1e-12):
            raise ValueError(f"inner radius {c} exceeds the inradius {self.inradius} of the body")
        object.__setattr__(self, "inner_radius", c)

    @classmethod
    def euclidean_ball(cls, k: int, inner_radius: float | None = None) -> "ConvexBody":
        return cls("ball", k, None, inner_radius)

    @classmethod
    def max_ball(cls, k: int, inner_radius: float | None = None) -> "ConvexBody":
        return cls("cube", k, None, inner_radius)

    @classmethod
    def ellipsoid(cls, semi_axes: Sequence[float], inner_radius: float | None = None) -> "ConvexBody":
        return cls("ellipsoid", len(semi_axes), tuple(semi_axes), inner_radius)

    @property
    def inradius(self) -> float:
        if self.shape == "ball":
            return 1.0
        if self.shape == "cube":
            return 1.0 / np.sqrt(self.k)
        return min(self.semi_axes)

    def gauge_sq(self, y) -> np.ndarray:
        """Squared Minkowski functional: y lies in Omega_t iff gauge_sq(y) < t**2."""
        y = _as_points(y, self.k).astype(float)
        if self.shape == "ball":
            return np.sum(y * y, axis=-1)
        if self.shape == "cube":
            return self.k * np.max(y * y, axis=-1)
        a = np.asarray(self.semi_axes)
        return np.sum((y / a) ** 2, axis=-1)

    def gauge(self, y) -> np.ndarray:
        return np.sqrt(self.gauge_sq(y))

    def contains(self, y, t: float = 1.0) -> np.ndarray:
        """Membership in the open dilate Omega_t."""
        if not t > 0:
            raise DomainError(f"t must be positive, got {t}")
        return self.gauge_sq(y) < float(t) ** 2

    def radial_extent(self, u) -> np.ndarray:
        """Distance from 0 to the boundary along the unit direction(s) u."""
        return 1.0 / self.gauge(u)

    def check_inclusions(self, n_directions: int = 1000, rng=None) -> tuple[float, float]:
        """Min and max boundary radius over random directions.

        B(0, c) <= Omega <= B(0, 1) holds on the sample when
        ``inner_radius <= min`` and ``max <= 1``.
        """
        rng = np.random.default_rng(rng)
        u = rng.standard_normal((n_directions, self.k))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        r = self.radial_extent(u)
        return float(r.min()), float(r.max())


def lattice_points_in_dilate(body: ConvexBody, t: float, budget: int = DEFAULT_POINT_BUDGET) -> np.ndarray:
    """Nonzero y in Z^k with y/t in Omega, as an (n, k) int64 array in lexicographic order."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    R = int(np.ceil(t)) - 1  # Omega <= B(0,1) forces |y_i| < t
    if R < 1:
        return np.zeros((0, body.k), dtype=np.int64)
    side = 2 * R + 1
    if side ** body.k > budget:
        raise BudgetExceededError(
            f"enumerating Omega_t for t={t} needs {side ** body.k} candidates (budget {budget})")
    axis = np.arange(-R, R + 1, dtype=np.int64)
    grids = np.meshgrid(*([axis] * body.k), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    keep = body.gauge_sq(pts) < float(t) ** 2
    keep &= np.any(pts != 0, axis=1)
    return pts[keep]


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    if not np.all(np.isfinite(arr)):
        raise ValueError("function values must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LatticeFunction:
    """Finitely supported f: Z^d -> C stored densely on the box origin + [0, shape)."""

    values: np.ndarray
    origin: tuple[int, ...] = None

    def __post_init__(self):
        arr = _frozen_array(self.values, complex)
        if arr.ndim == 0:
            raise ValueError("lattice functions need at least one axis")
        origin = (0,) * arr.ndim if self.origin is None else tuple(int(o) for o in self.origin)
        if len(origin) != arr.ndim:
            raise ValueError(f"origin {origin} does not match a {arr.ndim}-dimensional array")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "origin", origin)

    @classmethod
    def zeros(cls, box: Box) -> "LatticeFunction":
        shape = tuple(hi - lo + 1 for lo, hi in box)
        return cls(np.zeros(shape, complex), tuple(lo for lo, _ in box))

    @classmethod
    def delta(cls, point: Sequence[int], box: Box | None = None) -> "LatticeFunction":
        point = tuple(int(p) for p in np.atleast_1d(point))
        if box is None:
            box = tuple((p, p) for p in point)
        f = np.zeros(tuple(hi - lo + 1 for lo, hi in box), complex)
        f[tuple(p - lo for p, (lo, _) in zip(point, box))] = 1.0
        return cls(f, tuple(lo for lo, _ in box))

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def box(self) -> Box:
        """Inclusive per-coordinate bounds."""
        return tuple((o, o + n - 1) for o, n in zip(self.origin, self.shape))

    def coordinates(self) -> list[np.ndarray]:
        return [np.arange(lo, hi + 1) for lo, hi in self.box]

    def shifted(self, z: Sequence[int]) -> "LatticeFunction":
        """x -> f(x - z)."""
        z = tuple(int(v) for v in np.atleast_1d(z))
        return LatticeFunction(self.values, tuple(o + d for o, d in zip(self.origin, z)))

    def embed(self, box: Box, allow_clip: bool = False) -> "LatticeFunction":
        """Re-store f on another box; clipping nonzero values raises unless allowed."""
        out = np.zeros(tuple(hi - lo + 1 for lo, hi in box), complex)
        src, dst = [], []
        for (lo, hi), (flo, fhi) in zip(box, self.box):
            a, b = max(lo, flo), min(hi, fhi)
            if a > b:
                src = None
                break
            src.append(slice(a - flo, b - flo + 1))
            dst.append(slice(a - lo, b - lo + 1))
        if src is not None:
            out[tuple(dst)] = self.values[tuple(src)]
        if not allow_clip:
            supp = self.support_box()
            if supp is not None and any(s[0] < lo or s[1] > hi for s, (lo, hi) in zip(supp, box)):
                raise ValueError("target box does not contain the support of f")
        return LatticeFunction(out, tuple(lo for lo, _ in box))

    def support_box(self) -> Box | None:
        nz = np.nonzero(self.values)
        if not nz[0].size:
            return None
        return tuple((o + int(ix.min()), o + int(ix.max())) for o, ix in zip(self.origin, nz))

    def conj(self) -> "LatticeFunction":
        return LatticeFunction(np.conj(self.values), self.origin)

    def _aligned(self, other: "LatticeFunction"):
        box = tuple((min(a[0], b[0]), max(a[1], b[1])) for a, b in zip(self.box, other.box))
        return self.embed(box).values, other.embed(box).values, box

    def __add__(self, other: "LatticeFunction") -> "LatticeFunction":
        a, b, box = self._aligned(other)
        return LatticeFunction(a + b, tuple(lo for lo, _ in box))

    def __sub__(self, other: "LatticeFunction") -> "LatticeFunction":
        a, b, box = self._aligned(other)
        return LatticeFunction(a - b, tuple(lo for lo, _ in box))

    def __mul__(self, c) -> "LatticeFunction":
        return LatticeFunction(self.values * complex(c), self.origin)

    __rmul__ = __mul__

    def max_abs_diff(self, other: "LatticeFunction") -> float:
        a, b, _ = self._aligned(other)
        return float(np.max(np.abs(a - b))) if a.size else 0.0


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of f: R^d -> C at the nodes origin + h * i of a uniform grid."""

    values: np.ndarray
    origin: tuple[float, ...] = None
    spacing: float = 1.0

    def __post_init__(self):
        arr = _frozen_array(self.values, complex)
        if arr.ndim == 0:
            raise ValueError("grid functions need at least one axis")
        origin = (0.0,) * arr.ndim if self.origin is None else tuple(float(o) for o in self.origin)
        if len(origin) != arr.ndim:
            raise ValueError("origin does not match the array dimension")
        if not self.spacing > 0:
            raise ValueError("grid spacing must be positive")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", float(self.spacing))

    @classmethod
    def sample(cls, func: Callable[[np.ndarray], np.ndarray], lower: Sequence[float],
               upper: Sequence[float], spacing: float) -> "GridFunction":
        """Evaluate ``func`` on (..., d) node arrays covering [lower, upper]."""
        lower = np.atleast_1d(np.asarray(lower, float))
        upper = np.atleast_1d(np.asarray(upper, float))
        counts = np.rint((upper - lower) / spacing).astype(int) + 1
        axes = [lo + spacing * np.arange(n) for lo, n in zip(lower, counts)]
        X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return cls(np.asarray(func(X)), tuple(lower), spacing)

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    def coordinates(self) -> list[np.ndarray]:
        return [o + self.spacing * np.arange(n) for o, n in zip(self.origin, self.shape)]

    def nodes(self) -> np.ndarray:
        return np.stack(np.meshgrid(*self.coordinates(), indexing="ij"), axis=-1)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(values, self.origin, self.spacing)


def lp_norm(f, p: float) -> float:
    """Counting-measure l^p norm of a LatticeFunction, Riemann-sum L^p norm of a GridFunction."""
    p = float(p)
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if isinstance(f, GridFunction):
        a, w = np.abs(f.values), f.cell_volume
    elif isinstance(f, LatticeFunction):
        a, w = np.abs(f.values), 1.0
    else:
        a, w = np.abs(np.asarray(f)), 1.0
    if a.size == 0:
        return 0.0
    if np.isinf(p):
        return float(a.max())
    m = a.max()
    if m == 0:
        return 0.0
    return float(m * (w * np.sum((a / m) ** p)) ** (1.0 / p))
