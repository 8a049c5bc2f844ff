"""Oscillation and variation seminorms over a finite truncation grid.

A family a_t(x) is stored as an array whose axis 0 runs over the grid times
and whose remaining axes run over spatial points x. All pointwise operations
act on axis 0 and broadcast over the rest.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import DomainError, SubsequenceError


@dataclass(frozen=True)
class TruncationGrid:
    """Strictly increasing finite set of positive truncation radii."""

    times: tuple[float, ...]

    def __post_init__(self):
        t = tuple(float(x) for x in np.atleast_1d(self.times))
        if not t:
            raise ValueError("a truncation grid must be nonempty")
        if t[0] <= 0:
            raise ValueError("truncation radii must be positive")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("truncation radii must be strictly increasing")
        object.__setattr__(self, "times", t)

    @classmethod
    def logspace(cls, lo: float, hi: float, num: int) -> "TruncationGrid":
        return cls(tuple(np.geomspace(lo, hi, num)))

    def __len__(self) -> int:
        return len(self.times)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.times)

    def indices_of(self, times: Sequence[float]) -> np.ndarray:
        arr = self.as_array()
        idx = np.searchsorted(arr, times)
        ok = (idx < len(arr)) & (arr[np.minimum(idx, len(arr) - 1)] == np.asarray(times, float))
        if not np.all(ok):
            raise SubsequenceError("sequence entries are not grid times")
        return idx


@dataclass(frozen=True)
class SequenceI:
    """Strictly increasing sequence I_1 < ... < I_{N+1} of grid times."""

    entries: tuple[float, ...]

    def __post_init__(self):
        e = tuple(float(x) for x in self.entries)
        if len(e) < 2:
            raise ValueError("a sequence needs at least two entries")
        if any(b <= a for a, b in zip(e, e[1:])):
            raise SubsequenceError("sequence entries must be strictly increasing")
        object.__setattr__(self, "entries", e)

    @classmethod
    def from_indices(cls, grid: TruncationGrid, indices: Sequence[int]) -> "SequenceI":
        return cls(tuple(grid.times[int(i)] for i in indices))

    @property
    def N(self) -> int:
        return len(self.entries) - 1

    def indices(self, grid: TruncationGrid) -> np.ndarray:
        return grid.indices_of(self.entries)


@dataclass(frozen=True, eq=False)
class SampledFamily:
    """Values a_t(x) for t in ``grid``; ``values[i]`` is the spatial array at grid.times[i].

    ``cell_volume`` is the measure of one spatial sample (1 on Z^d, h^d on a grid);
    ``origin`` and ``spacing`` locate the spatial box when known.
    """

    grid: TruncationGrid
    values: np.ndarray
    cell_volume: float = 1.0
    origin: tuple | None = None
    spacing: float | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=complex, copy=True)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != len(self.grid):
            raise ValueError(f"family has {v.shape[0]} time slices, grid has {len(self.grid)}")
        if not np.all(np.isfinite(v)):
            raise ValueError("family values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def spatial_shape(self) -> tuple[int, ...]:
        return self.values.shape[1:]

    def flat(self) -> np.ndarray:
        """(T, X) view with all spatial axes flattened."""
        return self.values.reshape(len(self.grid), -1)

    def restrict(self, indices: Sequence[int]) -> "SampledFamily":
        idx = np.asarray(indices, dtype=int)
        grid = TruncationGrid(tuple(self.grid.times[i] for i in idx))
        return SampledFamily(grid, self.values[idx], self.cell_volume, self.origin, self.spacing)


def _check_p(p: float) -> float:
    p = float(p)
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    return p


def _weighted_norm(a: np.ndarray, p: float, w: float) -> float:
    a = np.abs(a)
    if a.size == 0:
        return 0.0
    if np.isinf(p):
        return float(a.max())
    m = a.max()
    if m == 0:
        return 0.0
    return float(m * (w * np.sum((a / m) ** p)) ** (1.0 / p))


def _oscillation_sq_from_indices(values: np.ndarray, idx: Sequence[int]) -> np.ndarray:
    """Sum over blocks of max_{I_j <= t < I_{j+1}} |a_t - a_{I_j}|^2 (windows are index ranges)."""
    values = np.asarray(values)
    out = np.zeros(values.shape[1:], dtype=float)
    for s, e in zip(idx[:-1], idx[1:]):
        d = np.abs(values[s:e] - values[s]) ** 2
        out += d.max(axis=0)
    return out


def oscillation_pointwise(values, I: SequenceI, grid: TruncationGrid) -> np.ndarray:
    """Truncated oscillation O_{I,N}^2 of a_t at every spatial point.

    Windows are half-open [I_j, I_{j+1}) over grid times and the last entry
    only closes the final window.
    """
    values = np.asarray(values)
    if values.shape[0] != len(grid):
        raise ValueError("values must have one slice per grid time")
    idx = I.indices(grid)
    return np.sqrt(_oscillation_sq_from_indices(values, idx))


def oscillation_norm(family: SampledFamily, I: SequenceI, p: float) -> float:
    p = _check_p(p)
    return _weighted_norm(oscillation_pointwise(family.values, I, family.grid), p, family.cell_volume)


def variation_pointwise(values, r: float) -> np.ndarray:
    """r-variation sup over increasing subsequences of (sum |a_{t_j} - a_{t_{j-1}}|^r)^{1/r}.

    Exact O(m^2) dynamic programme: best[j] is the largest sum over chains
    ending at j. ``r = inf`` gives the largest pairwise difference.
    """
    r = float(r)
    if not r >= 1:
        raise DomainError(f"r must be >= 1, got {r}")
    a = np.asarray(values)
    m = a.shape[0]
    if m < 2:
        return np.zeros(a.shape[1:])
    if np.isinf(r):
        out = np.zeros(a.shape[1:])
        for j in range(1, m):
            out = np.maximum(out, np.abs(a[:j] - a[j]).max(axis=0))
        return out
    best = np.zeros(a.shape, dtype=float)
    for j in range(1, m):
        best[j] = (best[:j] + np.abs(a[:j] - a[j]) ** r).max(axis=0)
    return best.max(axis=0) ** (1.0 / r)


def maximal_function(family: SampledFamily) -> np.ndarray:
    """sup_t |a_t(x)| over the grid."""
    return np.abs(family.values).max(axis=0)


def rademacher_menshov_rhs(c) -> float:
    """sum_{i=0}^{m} (sum_j |sum_{k in [j 2^i, (j+1) 2^i)} c_k|^2)^{1/2}, zero-padding to 2^m."""
    c = np.asarray(c, dtype=complex).ravel()
    n = max(1, len(c))
    m = int(math.ceil(math.log2(n)))
    padded = np.zeros(2 ** m, dtype=complex)
    padded[: len(c)] = c
    total = 0.0
    for i in range(m + 1):
        blocks = padded.reshape(-1, 2 ** i).sum(axis=1)
        total += float(np.sqrt(np.sum(np.abs(blocks) ** 2)))
    return total


def partial_sums(c) -> np.ndarray:
    """(0, c_0, c_0 + c_1, ...), the sequence whose variation the inequality controls."""
    c = np.asarray(c, dtype=complex).ravel()
    return np.concatenate([[0.0], np.cumsum(c)])


# ---------------------------------------------------------------------------
# worst-sequence search


def block_table(family: SampledFamily) -> np.ndarray:
    """W[s, e] = integral over x of max_{s <= i < e} |a_i - a_s|^2 for e > s.

    For p = 2 the squared oscillation norm of a sequence with indices
    i_0 < ... < i_N is exactly sum_j W[i_j, i_{j+1}].
    """
    a = family.flat()
    T = a.shape[0]
    W = np.zeros((T, T))
    for s in range(T - 1):
        d = np.abs(a[s:T - 1] - a[s]) ** 2
        W[s, s + 1:] = np.maximum.accumulate(d, axis=0).sum(axis=1)
    return W * family.cell_volume


class _Objective:
    def __init__(self, family: SampledFamily, p: float):
        self.family = family
        self.p = p
        self.W = block_table(family) if p == 2 else None
        self._flat = family.flat()

    def __call__(self, idx) -> float:
        if self.W is not None:
            return math.sqrt(max(0.0, float(sum(self.W[s, e] for s, e in zip(idx[:-1], idx[1:])))))
        osc = np.sqrt(_oscillation_sq_from_indices(self._flat, idx))
        return _weighted_norm(osc, self.p, self.family.cell_volume)

    def _single_moves(self, idx: list[int], current: float) -> tuple[list[int], float]:
        T = self._flat.shape[0]
        improved = True
        while improved:
            improved = False
            for j in range(len(idx)):
                lo = idx[j - 1] + 1 if j > 0 else 0
                hi = idx[j + 1] - 1 if j + 1 < len(idx) else T - 1
                best_c, best_v = idx[j], current
                for c in range(lo, hi + 1):
                    if c == idx[j]:
                        continue
                    v = self(idx[:j] + [c] + idx[j + 1:])
                    if v > best_v * (1 + 1e-12):
                        best_c, best_v = c, v
                if best_c != idx[j]:
                    idx[j] = best_c
                    current = best_v
                    improved = True
        return idx, current

    def ascend(self, idx: list[int]) -> tuple[list[int], float]:
        """Block-boundary ascent: move single entries, then adjacent pairs, until nothing improves."""
        T = self._flat.shape[0]
        idx, current = self._single_moves(list(idx), self(list(idx)))
        while True:
            best = None
            n = len(idx)
            for j in range(n - 1):
                lo = idx[j - 1] + 1 if j > 0 else 0
                hi = idx[j + 2] - 1 if j + 2 < n else T - 1
                for a in range(lo, hi + 1):
                    for b in range(a + 1, hi + 1):
                        trial = idx[:j] + [a, b] + idx[j + 2:]
                        v = self(trial)
                        if v > current * (1 + 1e-12) and (best is None or v > best[1]):
                            best = (trial, v)
            if best is None:
                return idx, current
            idx, current = self._single_moves(best[0], best[1])


def _dp_fixed_length(W: np.ndarray, N: int) -> tuple[list[int], float]:
    T = W.shape[0]
    F = np.zeros(T)
    back = np.zeros((N + 1, T), dtype=int)
    for n in range(1, N + 1):
        G = np.full(T, -np.inf)
        for e in range(n, T):
            cand = F[:e] + W[:e, e]
            cand[: n - 1] = -np.inf
            s = int(np.argmax(cand))
            G[e] = cand[s]
            back[n, e] = s
        F = G
    e = int(np.argmax(F))
    value = F[e]
    seq = [e]
    for n in range(N, 0, -1):
        e = back[n, e]
        seq.append(e)
    return seq[::-1], math.sqrt(max(0.0, value))


def sup_oscillation_norm_p2(family: SampledFamily) -> tuple[SequenceI, float]:
    """Exact sup over N and over all sequences of the p = 2 oscillation norm."""
    W = block_table(family)
    T = W.shape[0]
    if T < 2:
        return None, 0.0
    G = np.zeros(T)
    back = np.full(T, -1)
    for e in range(1, T):
        cand = np.maximum(G[:e], 0.0) + W[:e, e]
        s = int(np.argmax(cand))
        G[e], back[e] = cand[s], s
    e = int(np.argmax(G))
    if G[e] <= 0:
        return SequenceI.from_indices(family.grid, [0, 1]), 0.0
    seq = [e]
    while back[seq[-1]] >= 0:
        s = int(back[seq[-1]])
        seq.append(s)
        if G[s] <= 0:
            break
    seq = seq[::-1]
    return SequenceI.from_indices(family.grid, seq), math.sqrt(max(0.0, float(G[e])))


class SearchResult(NamedTuple):
    sequence: SequenceI
    value: float


def worst_sequence_search(family: SampledFamily, p: float, N: int, strategy: str = "random-restarts",
                          restarts: int = 200, seed: int = 0, n_jobs: int = 1,
                          exhaustive_limit: int = 1_000_000) -> SearchResult:
    """Search for the I of length N+1 maximising the oscillation norm.

    Strategies: ``greedy`` (coordinate ascent from evenly spaced entries),
    ``random-restarts`` (greedy start plus ``restarts - 1`` random starts, each
    ascended), ``exhaustive`` (all C(m, N+1) sequences) and ``dp`` (exact
    dynamic programme, p = 2 only).
    """
    p = _check_p(p)
    T = len(family.grid)
    N = int(N)
    if N < 1 or N + 1 > T:
        raise ValueError(f"infeasible N={N} for a grid of {T} times")
    obj = _Objective(family, p)

    if strategy == "dp":
        if p != 2:
            raise ValueError("the exact dynamic programme needs p = 2")
        idx, v = _dp_fixed_length(obj.W, N)
        return SearchResult(SequenceI.from_indices(family.grid, idx), v)

    if strategy == "exhaustive":
        count = math.comb(T, N + 1)
        if count > exhaustive_limit:
            raise ValueError(f"exhaustive search over {count} sequences exceeds the limit {exhaustive_limit}")
        if obj.W is not None:
            combos = np.array(list(itertools.combinations(range(T), N + 1)), dtype=int)
            tot = obj.W[combos[:, :-1], combos[:, 1:]].sum(axis=1)
            best = int(np.argmax(tot))
            return SearchResult(SequenceI.from_indices(family.grid, combos[best]),
                                math.sqrt(max(0.0, float(tot[best]))))
        best_idx, best_v = None, -1.0
        for c in itertools.combinations(range(T), N + 1):
            v = obj(c)
            if v > best_v:
                best_idx, best_v = c, v
        return SearchResult(SequenceI.from_indices(family.grid, best_idx), best_v)

    start = sorted(set(np.rint(np.linspace(0, T - 1, N + 1)).astype(int).tolist()))
    if len(start) < N + 1:
        start = list(range(N + 1))
    if strategy == "greedy":
        idx, v = obj.ascend(start)
        return SearchResult(SequenceI.from_indices(family.grid, idx), v)
    if strategy != "random-restarts":
        raise ValueError(f"unknown strategy {strategy!r}")

    seeds = np.random.SeedSequence(seed).spawn(max(0, restarts - 1))

    def run(ss):
        rng = np.random.default_rng(ss)
        return obj.ascend(sorted(rng.choice(T, size=N + 1, replace=False).tolist()))

    starts_out = [obj.ascend(start)]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as ex:
            starts_out += list(ex.map(run, seeds))
    else:
        starts_out += [run(ss) for ss in seeds]
    # deterministic reduction: first maximum in restart order
    best_idx, best_v = starts_out[0]
    for idx, v in starts_out[1:]:
        if v > best_v:
            best_idx, best_v = idx, v
    return SearchResult(SequenceI.from_indices(family.grid, best_idx), best_v)


# ---------------------------------------------------------------------------
# long oscillations / short variations


class LongShortSplit(NamedTuple):
    long_family: SampledFamily
    node_indices: np.ndarray
    short_variations: np.ndarray
    block_edges: np.ndarray


def long_short_split(family: SampledFamily, tau: float) -> LongShortSplit:
    """Split at the subexponential nodes 2^{n^tau}.

    The long part keeps, for each node, the largest grid time not exceeding
    it. The short part is V^2 over grid times in [2^{n^tau}, 2^{(n+1)^tau}),
    one array per block, with a leading block (0, 1) when the grid reaches
    below 1.
    """
    if not 0 < tau < 1:
        raise DomainError(f"tau must lie in (0, 1), got {tau}")
    t = family.grid.as_array()
    if t.size == 0:
        raise ValueError("empty grid")
    t_max = t[-1]
    nodes = []
    n = 0
    while True:
        node = 2.0 ** (n ** tau)
        nodes.append(node)
        if node > t_max:
            break
        n += 1
    nodes = np.asarray(nodes)
    snapped = np.searchsorted(t, nodes[:-1], side="right") - 1
    snapped = snapped[snapped >= 0]
    keep = np.unique(snapped)
    long_family = family.restrict(keep)

    edges = np.concatenate([[0.0], nodes])
    short = []
    used_edges = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = np.nonzero((t >= lo) & (t < hi))[0]
        if sel.size == 0:
            continue
        short.append(variation_pointwise(family.values[sel], 2))
        used_edges.append((lo, hi))
    short_arr = np.stack(short) if short else np.zeros((0,) + family.spatial_shape)
    return LongShortSplit(long_family, keep, short_arr, np.asarray(used_edges))


def short_variation_norm(split: LongShortSplit, p: float, cell_volume: float = 1.0) -> float:
    """|| (sum_n V^2_n(x)^2)^{1/2} ||_p."""
    agg = np.sqrt(np.sum(split.short_variations ** 2, axis=0))
    return _weighted_norm(agg, _check_p(p), cell_volume)
