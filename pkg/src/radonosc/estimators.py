"""Scikit-learn style wrappers: batches of inputs in, families or seminorm values out.

    >>> pipe = make_pipeline(RadonFamilyTransformer(gamma=[[3]], t_max=8.0, n_times=16),
    ...                      OscillationSeminorm(N=4, strategy="dp"))
    >>> values = pipe.fit_transform(X)          # X: (n_samples, n_sites)
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_fitted, check_n_features, check_samples, check_scalar
from .kernels import CZKernel, make_hilbert_kernel, make_riesz_type_kernel
from .lattice import DEFAULT_POINT_BUDGET, ConvexBody, GridFunction, LatticeFunction, MultiIndexSet
from .martingales import ChristCubeSystem, conditional_expectation
from .radon import pushforward_points, radon_family, _output_box
from .seminorms import SampledFamily, TruncationGrid, sup_oscillation_norm_p2, worst_sequence_search


def build_kernel(name: str, k: int, component: int = 1) -> CZKernel:
    if name == "hilbert":
        if k != 1:
            raise ValueError("the Hilbert kernel lives on R")
        return make_hilbert_kernel()
    if name == "riesz":
        return make_riesz_type_kernel(k, component)
    raise ValueError(f"unknown kernel {name!r}; expected 'hilbert' or 'riesz'")


def build_body(shape: str, k: int, inner_radius: float | None = None) -> ConvexBody:
    if shape == "ball":
        return ConvexBody.euclidean_ball(k, inner_radius)
    if shape == "cube":
        return ConvexBody.max_ball(k, inner_radius)
    raise ValueError(f"unknown body {shape!r}; expected 'ball' or 'cube'")


class RadonFamilyTransformer(TransformerMixin, BaseEstimator):
    """Maps each sample f to the family (H_t f)_{t in grid}.

    Samples are functions on the box [0, n_1) x ... x [0, n_d) of Z^d with
    d = |Gamma|; pass them flat with ``spatial_shape`` or already shaped.
    The output has shape (n_samples, n_times, n_out) where n_out is the size
    of the common output box.
    """

    def __init__(self, gamma=((3,),), kernel="hilbert", component=1, body="ball", inner_radius=None,
                 t_min=1.0, t_max=16.0, n_times=64, spatial_shape=None, budget=DEFAULT_POINT_BUDGET):
        self.gamma = gamma
        self.kernel = kernel
        self.component = component
        self.body = body
        self.inner_radius = inner_radius
        self.t_min = t_min
        self.t_max = t_max
        self.n_times = n_times
        self.spatial_shape = spatial_shape
        self.budget = budget

    def fit(self, X, y=None):
        X = check_samples(X)
        check_scalar(self.t_min, "t_min", low=0, low_open=True)
        check_scalar(self.t_max, "t_max", low=self.t_min, low_open=True)
        check_scalar(self.n_times, "n_times", int, low=2)
        self.gamma_ = MultiIndexSet(tuple(tuple(g) for g in self.gamma))
        k = self.gamma_.k
        self.kernel_ = build_kernel(self.kernel, k, self.component)
        self.body_ = build_body(self.body, k, self.inner_radius)
        self.grid_ = TruncationGrid.logspace(self.t_min, self.t_max, self.n_times)
        shape = tuple(self.spatial_shape) if self.spatial_shape is not None else X.shape[1:]
        if int(np.prod(shape)) != int(np.prod(X.shape[1:])) or len(shape) != len(self.gamma_):
            raise ValueError(f"samples of shape {X.shape[1:]} do not match a box of shape {shape} in Z^{len(self.gamma_)}")
        self.input_shape_ = X.shape[1:]
        self.box_shape_ = shape
        _, Z, _ = pushforward_points(self.kernel_, self.body_, self.gamma_, self.t_max, self.budget)
        self.output_box_ = _output_box(tuple((0, n - 1) for n in shape), Z)
        return self

    def transform(self, X):
        check_fitted(self, "grid_")
        X = check_samples(X)
        check_n_features(self, X)
        out = []
        for row in X:
            f = LatticeFunction(row.reshape(self.box_shape_))
            fam = radon_family(f, self.kernel_, self.body_, self.gamma_, self.grid_, self.budget)
            out.append(fam.flat())
        return np.stack(out)


class OscillationSeminorm(TransformerMixin, BaseEstimator):
    """Largest oscillation norm found for each family in a batch.

    Input: (n_samples, n_times, n_sites). Output: (n_samples, 1). With
    ``N=None`` and p = 2 the supremum over every N is taken exactly.
    After ``transform`` the best sequences (as grid indices) are kept in
    ``sequences_``.
    """

    def __init__(self, p=2.0, N=8, strategy="random-restarts", restarts=200, seed=0, n_jobs=1,
                 cell_volume=1.0):
        self.p = p
        self.N = N
        self.strategy = strategy
        self.restarts = restarts
        self.seed = seed
        self.n_jobs = n_jobs
        self.cell_volume = cell_volume

    def fit(self, X, y=None):
        X = check_samples(X, 3)
        check_scalar(self.p, "p", low=1)
        if self.N is not None:
            check_scalar(self.N, "N", int, low=1, high=X.shape[1] - 1)
        elif self.p != 2:
            raise ValueError("N=None (all lengths) needs p = 2")
        check_scalar(self.restarts, "restarts", int, low=1)
        self.input_shape_ = X.shape[1:]
        return self

    def transform(self, X):
        check_fitted(self, "input_shape_")
        X = check_samples(X, 3)
        check_n_features(self, X)
        grid = TruncationGrid(tuple(float(i + 1) for i in range(X.shape[1])))
        vals, seqs = [], []
        for row in X:
            fam = SampledFamily(grid, row, self.cell_volume)
            if self.N is None:
                seq, v = sup_oscillation_norm_p2(fam)
            else:
                res = worst_sequence_search(fam, self.p, self.N, self.strategy, self.restarts,
                                            self.seed, self.n_jobs)
                seq, v = res.sequence, res.value
            vals.append(v)
            seqs.append(tuple(int(i) for i in seq.indices(grid)) if seq is not None else ())
        self.sequences_ = seqs
        return np.asarray(vals)[:, None]


class MartingaleTransformer(TransformerMixin, BaseEstimator):
    """Maps each sample on a uniform grid to its conditional expectations E_k f.

    Samples have shape (n_samples, *box) with nodes ``spacing * i``;
    the output has shape (n_samples, n_levels, *box).
    """

    def __init__(self, weights=(1,), D=2, levels=(0, 1, 2), spacing=1.0, origin=None):
        self.weights = weights
        self.D = D
        self.levels = levels
        self.spacing = spacing
        self.origin = origin

    def fit(self, X, y=None):
        X = check_samples(X)
        check_scalar(self.spacing, "spacing", low=0, low_open=True)
        lv = tuple(int(k) for k in self.levels)
        if not lv:
            raise ValueError("at least one level is required")
        self.system_ = ChristCubeSystem(tuple(self.weights), self.D, min(lv), max(lv))
        if X.ndim - 1 != self.system_.dim:
            raise ValueError(f"samples are {X.ndim - 1}-dimensional, weights give {self.system_.dim}")
        self.input_shape_ = X.shape[1:]
        # resolution problems surface here rather than in transform
        probe = GridFunction(np.zeros(self.input_shape_), self.origin, self.spacing)
        for k in lv:
            conditional_expectation(probe, k, self.system_)
        return self

    def transform(self, X):
        check_fitted(self, "system_")
        X = check_samples(X)
        check_n_features(self, X)
        out = np.empty((X.shape[0], len(self.levels)) + X.shape[1:], complex)
        for i, row in enumerate(X):
            g = GridFunction(row, self.origin, self.spacing)
            for j, k in enumerate(self.levels):
                out[i, j] = conditional_expectation(g, int(k), self.system_).values
        return out
