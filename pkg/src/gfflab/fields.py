"""Samplers for the Gaussian objects: truncated free-field series,
cylindrical Brownian motion paths, Brownian bridge / motion via their
sine series, the two-sided Brownian motion on the line, and the three
equivalent quadrature routes to its covariance functional.

All randomness flows through counter-based Philox streams keyed by
(seed, stream_id), so identical keys reproduce identical samples and
distinct stream ids give statistically independent sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fourier_cov
from .basis import EigenBasis, evaluate_matrix, sinpi
from .fourier_cov import TestFunction
from .hilbert_scale import CoefficientField
from .quadrature import composite_legendre, gauss_legendre


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream: same (seed, stream_id) means the same
    sample sequence, distinct stream ids are independent."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.seed % 2**64, self.stream_id % 2**64], dtype=np.uint64
        )
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, i: int) -> "RngStream":
        return RngStream(self.seed, ((self.stream_id << 32) ^ i) % 2**64)


@dataclass(frozen=True, eq=False)
class FieldSample:
    """One draw of a spectral Gaussian field: coefficient k has variance
    scale^2 / lambda_k^(2r) for the sampler's roughness exponent r."""

    basis: EigenBasis
    coeffs: np.ndarray
    scale: float = 1.0


@dataclass(frozen=True, eq=False)
class PathSample:
    """Per-mode Brownian increments over a time grid; increments[:, i]
    covers (times[i-1], times[i]] with times[-1] understood as 0."""

    basis: EigenBasis
    times: np.ndarray
    increments: np.ndarray  # shape (size, len(times))

    def values(self) -> np.ndarray:
        """w_k(times[i]) as an array of shape (size, len(times))."""
        return np.cumsum(self.increments, axis=1)


def sample_gff(basis: EigenBasis, r: float, rng: np.random.Generator) -> FieldSample:
    """A truncated free-field draw with coefficients zeta_k / lambda_k^r
    (iid standard normal zeta); r = 1 gives the Green's-function covariance,
    r = 0 white noise."""
    if basis.lambda_min <= 0.0:
        raise ValueError("free-field sampling requires lambda_1 > 0")
    zeta = rng.standard_normal(basis.size)
    return FieldSample(basis, zeta / basis.lambdas**r, scale=1.0)


def field_values(sample: FieldSample, points) -> np.ndarray:
    """Pointwise field values sum_k coeffs_k h_k(x)."""
    return evaluate_matrix(sample.basis, points) @ sample.coeffs


def pair_field(
    sample: FieldSample, f: CoefficientField, gamma0: float = 0.0, gamma: float = 0.0
) -> float:
    """The duality pairing of a field draw with a coefficient field:
    sum_k lambda_k^(2 gamma0) f_k coeffs_k (gamma only tags the dual pair)."""
    if f.basis is not sample.basis and not np.array_equal(
        f.basis.lambdas, sample.basis.lambdas
    ):
        raise ValueError("field and test coefficients use different bases")
    del gamma
    if gamma0 != 0.0:
        weights = sample.basis.lambdas ** (2.0 * gamma0)
        return float(np.sum(weights * f.coeffs * sample.coeffs))
    return float(np.sum(f.coeffs * sample.coeffs))


def sample_cylindrical_bm(
    basis: EigenBasis, times, rng: np.random.Generator
) -> PathSample:
    """Independent per-mode Brownian increments on an increasing time grid."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("need a non-empty 1-d time grid")
    dt = np.diff(np.concatenate(([0.0], t)))
    if np.any(dt <= 0.0) and not (t[0] == 0.0 and np.all(dt[1:] > 0.0)):
        raise ValueError("times must be increasing and non-negative")
    inc = rng.standard_normal((basis.size, t.size)) * np.sqrt(np.maximum(dt, 0.0))
    return PathSample(basis, t, inc)


def sample_brownian_bridge(x_grid, rng: np.random.Generator, modes: int = 512) -> np.ndarray:
    """Brownian bridge on [0, 1] through its sine series
    sum_k zeta_k sqrt(2) sin(k pi x) / (k pi); exactly zero at both ends."""
    x = np.asarray(x_grid, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("bridge grid must lie in [0, 1]")
    k = np.arange(1, modes + 1, dtype=float)
    zeta = rng.standard_normal(modes)
    return sinpi(np.outer(x, k)) @ (math.sqrt(2.0) * zeta / (k * np.pi))


def sample_brownian_motion(x_grid, rng: np.random.Generator, modes: int = 512) -> np.ndarray:
    """Standard Brownian motion on [0, 1] through the mixed-boundary series
    sum_k zeta_k sqrt(2) sin((k - 1/2) pi x) / ((k - 1/2) pi)."""
    x = np.asarray(x_grid, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("grid must lie in [0, 1]")
    k = np.arange(1, modes + 1, dtype=float) - 0.5
    zeta = rng.standard_normal(modes)
    return sinpi(np.outer(x, k)) @ (math.sqrt(2.0) * zeta / (k * np.pi))


def sample_two_sided_bm(x_grid, rng: np.random.Generator) -> np.ndarray:
    """Two independent Brownian motions glued at the origin, sampled exactly
    on the grid via independent increments per half line.

    Covariance is min(|x|, |y|) for points of equal sign and 0 otherwise.
    """
    x = np.asarray(x_grid, dtype=float)
    out = np.zeros(x.shape)
    for sign in (1.0, -1.0):
        mask = (sign * x) > 0.0
        if not np.any(mask):
            continue
        radii = sign * x[mask]
        uniq, inverse = np.unique(radii, return_inverse=True)
        dt = np.diff(np.concatenate(([0.0], uniq)))
        walk = np.cumsum(rng.standard_normal(uniq.size) * np.sqrt(dt))
        out[mask] = walk[inverse]
    return out


def two_sided_antiderivative(f, x, r_max: float = 20.0) -> np.ndarray:
    """The signed tail antiderivative used to integrate against the
    two-sided Brownian motion: F(x) = int_{-inf}^x f for x < 0 and
    F(x) = -int_x^{+inf} f for x > 0 (discontinuous at 0 unless f has
    zero mean); tails beyond r_max are dropped.
    """
    pts = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(pts == 0.0):
        raise ValueError("the antiderivative is discontinuous at x = 0")
    out = np.zeros(pts.shape)
    for sign in (1.0, -1.0):
        mask = (sign * pts) > 0.0
        if not np.any(mask):
            continue
        vals = np.sort(np.unique(pts[mask]))
        if sign > 0:
            vals = vals[::-1]  # accumulate inward from +r_max
        acc = 0.0
        prev = sign * r_max
        tails = {}
        for v in vals:
            lo, hi = (v, prev) if sign > 0 else (prev, v)
            if hi > lo:
                q, w = gauss_legendre(lo, hi, 24)
                acc += float(np.sum(w * f(q)))
            prev = v
            tails[v] = acc
        fill = np.array([tails[v] for v in pts[mask]])
        out[mask] = -fill if sign > 0 else fill
    return out if np.ndim(x) else float(out[0])


def _transform_on_grid(f, x, wx, xi) -> np.ndarray:
    """Unitary Fourier transform of a tabulated function at frequencies xi."""
    fw = wx * f(x)
    phase = np.outer(x, xi)
    return (fw @ np.cos(phase) - 1j * (fw @ np.sin(phase))) / math.sqrt(2.0 * math.pi)


def _check_first_moment(f, r_max: float) -> None:
    """Heuristic guard for the finite-first-moment condition: the outer
    half of the truncation window must contribute a negligible share of
    int |x f(x)| dx, otherwise the covariance integrals are suspect."""
    x, w = composite_legendre(0.0, r_max, 64, 16)
    m = np.abs(x * f(x)) + np.abs(x * f(-x))
    total = float(np.sum(w * m))
    outer = float(np.sum((w * m)[x > 0.5 * r_max]))
    if total > 0.0 and outer > 0.05 * total:
        raise ValueError(
            "int |x f(x)| dx keeps growing across the truncation window; "
            "the first-moment condition appears violated"
        )


def covariance_two_sided(
    f,
    g,
    mode: str = "direct",
    r_max: float = 20.0,
    n_nodes: int = 2048,
    xi_max: float = 40.0,
) -> float:
    """E(W[f] W[g]) for the two-sided Brownian motion, by one of three
    equivalent routes:

    'direct'          double quadrature of f(x) g(y) min(|x|, |y|) over the
                      two same-sign quadrants;
    'antiderivative'  the integral of F G for the tail antiderivatives;
    'fourier'         the integral of (fhat - fhat(0)) conj(ghat - ghat(0))
                      over |xi|^2.

    ``f`` and ``g`` are rapidly decaying callables (negligible beyond
    r_max, with finite first absolute moment); for the fourier mode they
    may instead be TestFunction objects, in which case the integral runs
    on the same annulus grid as gff_covariance so the two agree exactly
    when fhat(0) = ghat(0) = 0.
    """
    if mode == "fourier" and isinstance(f, TestFunction) and isinstance(g, TestFunction):
        if f.d != 1 or g.d != 1:
            raise ValueError("the two-sided Brownian motion lives on the line")
        value = fourier_cov._pair_integral(
            f, g, lambda r: 1.0 / (r * r), subtract_zero=True
        )
        # exact tail of the constant-product part beyond the grid cutoff
        f0 = float(f.fhat_radial(np.zeros(1))[0])
        g0 = float(g.fhat_radial(np.zeros(1))[0])
        _, hi = fourier_cov._pair_grid(f, g)
        return value + 2.0 * f0 * g0 / hi
    if isinstance(f, TestFunction) or isinstance(g, TestFunction):
        raise ValueError("TestFunction inputs are supported only in fourier mode")

    _check_first_moment(f, r_max)
    _check_first_moment(g, r_max)
    panels = max(n_nodes // 16, 1)

    if mode == "direct":
        # nested quadrature of f(x) [int_0^x y g(y) dy + x int_x^rmax g] per
        # half line; the inner integrals accumulate panel-wise along the
        # sorted outer nodes so the min kink never crosses a panel
        total = 0.0
        for sign in (1.0, -1.0):
            x, w = composite_legendre(0.0, r_max, panels, 16)
            inner_lo = np.empty_like(x)  # int_0^x y g(sign y) dy
            inner_hi = np.empty_like(x)  # int_x^rmax g(sign y) dy
            acc = 0.0
            prev = 0.0
            for i, xi in enumerate(x):
                q, qw = gauss_legendre(prev, xi, 24)
                acc += float(np.sum(qw * q * g(sign * q)))
                inner_lo[i] = acc
                prev = xi
            acc = 0.0
            prev = r_max
            for i in range(x.size - 1, -1, -1):
                q, qw = gauss_legendre(x[i], prev, 24)
                acc += float(np.sum(qw * g(sign * q)))
                inner_hi[i] = acc
                prev = x[i]
            total += float(np.sum(w * f(sign * x) * (inner_lo + x * inner_hi)))
        return total

    if mode == "antiderivative":
        acc = 0.0
        for sign in (1.0, -1.0):
            x, w = composite_legendre(0.0, r_max, panels, 16)
            x = sign * x
            fa = two_sided_antiderivative(f, x, r_max)
            ga = two_sided_antiderivative(g, x, r_max)
            acc += float(np.sum(w * fa * ga))
        return acc

    if mode == "fourier":
        x, wx = composite_legendre(-r_max, r_max, 2 * panels, 16)
        xi, wxi = gauss_legendre(0.0, xi_max, n_nodes)
        fh = _transform_on_grid(f, x, wx, xi)
        gh = _transform_on_grid(g, x, wx, xi)
        f0 = float(np.sum(wx * f(x))) / math.sqrt(2.0 * math.pi)
        g0 = float(np.sum(wx * g(x))) / math.sqrt(2.0 * math.pi)
        num = np.real((fh - f0) * np.conj(gh - g0))
        value = 2.0 * float(np.sum(wxi * num / (xi * xi)))
        # beyond xi_max only the fhat(0) ghat(0) / xi^2 part survives
        return value + 2.0 * f0 * g0 / xi_max

    raise ValueError(f"unknown mode {mode!r}")
