"""Spectral sampling and statistical verification for stochastic heat
equations driven by space-time white noise.

The package builds eigen-systems of the interval/box Laplacian and the
harmonic oscillator, samples the associated Gaussian fields, evolves the
per-mode Ornstein-Uhlenbeck dynamics exactly, and certifies the stationary
covariances against closed-form Green's functions and Fourier-domain
quadrature.
"""

from .basis import (
    BasisKind,
    EigenBasis,
    build_box_basis,
    build_hermite_basis,
    build_interval_basis,
    evaluate,
)
from .dynamics import (
    SpectralState,
    evolve,
    exact_step,
    kakutani_statistic,
    stationary_sample,
)
from .fields import (
    RngStream,
    covariance_two_sided,
    sample_brownian_bridge,
    sample_cylindrical_bm,
    sample_gff,
    sample_two_sided_bm,
)
from .fourier_cov import (
    gaussian_bump,
    gff_covariance,
    make_s0_function,
    massive_limit_covariance,
    transient_covariance,
)
from .greens import KernelKind, KernelSpec, bessel_k, heat_kernel, series_green
from .hilbert_scale import CoefficientField, duality_pairing, norm_gamma
from .stats import CovarianceReport, estimate_covariance, ks_gaussian

__version__ = "0.1.0"

__all__ = [
    "BasisKind",
    "EigenBasis",
    "build_box_basis",
    "build_hermite_basis",
    "build_interval_basis",
    "evaluate",
    "SpectralState",
    "evolve",
    "exact_step",
    "kakutani_statistic",
    "stationary_sample",
    "RngStream",
    "covariance_two_sided",
    "sample_brownian_bridge",
    "sample_cylindrical_bm",
    "sample_gff",
    "sample_two_sided_bm",
    "gaussian_bump",
    "gff_covariance",
    "make_s0_function",
    "massive_limit_covariance",
    "transient_covariance",
    "KernelKind",
    "KernelSpec",
    "bessel_k",
    "heat_kernel",
    "series_green",
    "CoefficientField",
    "duality_pairing",
    "norm_gamma",
    "CovarianceReport",
    "estimate_covariance",
    "ks_gaussian",
]
