"""Truncated singular Radon transforms, oscillation seminorms, circle-method multipliers and dyadic martingales."""

from .circle import (BumpEta, FareySet, IWConfig, RationalPoint, cont_multiplier, cubic_example_psi,
                     exp_multiplier, gauss_decay_fit, gauss_sum, iw_denominators, iw_fractions,
                     projection_multiplier, shell_fractions, vdc_bounds_check)
from .estimators import MartingaleTransformer, OscillationSeminorm, RadonFamilyTransformer
from .exceptions import (BudgetExceededError, BumpOverlapError, CanonicalMapOverflowError, DomainError,
                         InsufficientPaddingError, QuadratureError, ResolutionError, SubsequenceError)
from .kernels import (CZKernel, estimate_holder_constant, make_hilbert_kernel, make_riesz_type_kernel,
                      verify_cancellation, verify_size_and_holder)
from .lattice import (ConvexBody, DilationMatrix, GridFunction, LatticeFunction, MultiIndexSet, canonical_map,
                      dilate_point, lattice_points_in_dilate, lp_norm)
from .martingales import (ChristCubeSystem, DiscreteMeasure, Mollifier, approx_square_function,
                          conditional_expectation, low_high_split, martingale_oscillation_probe,
                          measure_dilate, telescoping_pieces)
from .radon import (PolynomialMap, canonical_decomposition, continuous_radon_quadrature, discrete_radon_direct,
                    discrete_radon_fft, radon_family, radon_general_poly)
from .seminorms import (SampledFamily, SequenceI, TruncationGrid, long_short_split, oscillation_norm,
                        oscillation_pointwise, rademacher_menshov_rhs, variation_pointwise,
                        worst_sequence_search)

__all__ = [
    "BudgetExceededError", "BumpEta", "BumpOverlapError", "CZKernel", "CanonicalMapOverflowError",
    "ChristCubeSystem", "ConvexBody", "DilationMatrix", "DiscreteMeasure", "DomainError", "FareySet",
    "GridFunction", "IWConfig", "InsufficientPaddingError", "LatticeFunction", "MartingaleTransformer",
    "Mollifier", "MultiIndexSet", "OscillationSeminorm", "PolynomialMap", "QuadratureError",
    "RadonFamilyTransformer", "RationalPoint", "ResolutionError", "SampledFamily", "SequenceI",
    "SubsequenceError", "TruncationGrid", "approx_square_function", "canonical_decomposition",
    "canonical_map", "conditional_expectation", "cont_multiplier", "continuous_radon_quadrature",
    "cubic_example_psi", "dilate_point", "discrete_radon_direct", "discrete_radon_fft",
    "estimate_holder_constant", "exp_multiplier", "gauss_decay_fit", "gauss_sum", "iw_denominators",
    "iw_fractions", "lattice_points_in_dilate", "long_short_split", "low_high_split", "lp_norm",
    "make_hilbert_kernel", "make_riesz_type_kernel", "martingale_oscillation_probe", "measure_dilate",
    "oscillation_norm", "oscillation_pointwise", "projection_multiplier", "rademacher_menshov_rhs",
    "radon_family", "radon_general_poly", "shell_fractions", "telescoping_pieces", "variation_pointwise",
    "vdc_bounds_check", "verify_cancellation", "verify_size_and_holder", "worst_sequence_search",
]

__version__ = "0.1.0"
