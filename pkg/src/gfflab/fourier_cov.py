"""Deterministic Fourier-domain covariance functionals on R^d: test
functions whose transforms vanish near the origin, the free-field
covariance integral, the finite-time covariance of the whole-space heat
evolution, and massive-case limits.

Conventions: unitary Fourier transform fhat(xi) = (2 pi)^(-d/2) *
integral of exp(-i x.xi) f(x) dx, so Parseval holds without extra factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .basis import hermite_functions
from .greens import gamma_fn
from .quadrature import gauss_legendre

RADIAL_NODES = 1024
TENSOR_NODES = 256
FLOOR_TOL = 1e-12


def _smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1 (exact at the ends)."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        lo = np.where(u > 0.0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        hi = np.where(u < 1.0, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    out = np.where(u <= 0.0, 0.0, np.where(u >= 1.0, 1.0, lo / (lo + hi)))
    return out


def surface_measure(d: int) -> float:
    """Surface area of the unit sphere in R^d (2 for d = 1)."""
    return 2.0 * math.pi ** (0.5 * d) / gamma_fn(0.5 * d)


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A test function described through its Fourier transform.

    ``profile`` is the phase-free radial factor F(|xi|); the full transform
    is profile(|xi|) * exp(-i center.xi). ``xi_floor`` is a radius below
    which the transform is certified to vanish (0.0 when there is no such
    floor); ``xi_cut`` bounds the quadrature support.
    """

    __test__ = False  # not a pytest class despite the domain name

    kind: str
    d: int
    profile: Callable[[np.ndarray], np.ndarray]
    xi_floor: float
    xi_cut: float
    center: tuple[float, ...] | None = None
    params: dict = field(default_factory=dict)

    def fhat_radial(self, r):
        return self.profile(np.asarray(r, dtype=float))

    def fhat(self, xi):
        """Transform values at frequency points (n,) for d = 1 or (n, d)."""
        pts = np.asarray(xi, dtype=float)
        if self.d == 1:
            pts = pts.reshape(-1, 1)
        r = np.sqrt((pts**2).sum(axis=1))
        vals = self.profile(r).astype(complex)
        if self.center is not None:
            vals = vals * np.exp(-1j * pts @ np.asarray(self.center))
        return vals

    def physical(self, x):
        """Physical-space values by inverse-transform quadrature (d = 1).

        For a real even transform this is sqrt(2/pi) * int_0^inf
        profile(r) cos(x r) dr; functions with a known closed form
        override the generic path through ``params``.
        """
        if "physical" in self.params:
            return self.params["physical"](np.asarray(x, dtype=float))
        if self.d != 1:
            raise ValueError("generic physical-space evaluation is 1-d only")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        r, w = gauss_legendre(self.xi_floor, self.xi_cut, 4 * RADIAL_NODES)
        vals = math.sqrt(2.0 / math.pi) * (
            np.cos(np.outer(x, r)) @ (w * self.profile(r))
        )
        return vals if vals.size > 1 else float(vals[0])


def gaussian_bump(center=0.0, width: float = 1.0, d: int = 1, amplitude: float = 1.0) -> TestFunction:
    """The Gaussian amplitude * exp(-|x - center|^2 / (2 width^2)).

    Its transform is amplitude * width^d * exp(-width^2 |xi|^2 / 2) times
    the phase factor from the shift; fhat(0) is nonzero, so this is not a
    floor-certified test function.
    """
    if width <= 0.0:
        raise ValueError("width must be positive")
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if c.size != d:
        raise ValueError(f"center has dimension {c.size}, expected {d}")
    amp = amplitude * width**d

    def profile(r):
        return amp * np.exp(-0.5 * (width * r) ** 2)

    def physical(x):
        pts = np.asarray(x, dtype=float)
        if d == 1:
            dist2 = (pts - c[0]) ** 2
        else:
            dist2 = ((pts - c) ** 2).sum(axis=-1)
        return amplitude * np.exp(-0.5 * dist2 / width**2)

    centered = bool(np.all(c == 0.0))
    return TestFunction(
        kind="gaussian_bump",
        d=d,
        profile=profile,
        xi_floor=0.0,
        xi_cut=12.0 / width,
        center=None if centered else tuple(c),
        params={"width": width, "amplitude": amplitude, "physical": physical},
    )


def make_s0_function(freq: float, width: float, d: int = 1) -> TestFunction:
    """A radial test function supported on a frequency annulus:
    fhat(xi) = exp(-(|xi| - freq)^2 / (2 width^2)), smoothly cut to exactly
    zero for |xi| <= freq/2 (ramp on [freq/2, 3 freq/4]).

    Requires freq >= 8 * width so the Gaussian factor is already below
    1e-12 where the ramp starts.
    """
    if freq <= 0.0 or width <= 0.0:
        raise ValueError("freq and width must be positive")
    if freq < 8.0 * width:
        raise ValueError(
            f"freq = {freq} too small to clear the annulus floor; need freq >= 8 * width = {8 * width}"
        )

    lo = 0.5 * freq
    ramp = 0.25 * freq

    def profile(r):
        r = np.asarray(r, dtype=float)
        return np.exp(-0.5 * ((r - freq) / width) ** 2) * _smooth_step((r - lo) / ramp)

    return TestFunction(
        kind="s0_annulus",
        d=d,
        profile=profile,
        xi_floor=lo,
        xi_cut=freq + 12.0 * width,
        center=None,
        params={"freq": freq, "width": width},
    )


def hermite_test_function(n: int) -> TestFunction:
    """The n-th Hermite function as a 1-d test function; its transform is
    (-i)^n times itself."""
    if n < 0:
        raise ValueError("degree must be non-negative")

    def profile(r):
        return hermite_functions(n, np.asarray(r, dtype=float))[:, n]

    phase = (-1j) ** n

    def physical(x):
        return hermite_functions(n, np.asarray(x, dtype=float))[:, n]

    tf = TestFunction(
        kind="hermite",
        d=1,
        profile=profile,
        xi_floor=0.0,
        xi_cut=math.sqrt(2.0 * n + 1.0) + 10.0,
        center=None,
        params={"n": n, "physical": physical, "phase": phase},
    )
    return tf


def _pair_grid(f: TestFunction, g: TestFunction) -> tuple[float, float]:
    lo = max(f.xi_floor, g.xi_floor)
    hi = min(f.xi_cut, g.xi_cut)
    return lo, hi


def _pair_integral(
    f: TestFunction,
    g: TestFunction,
    weight: Callable[[np.ndarray], np.ndarray],
    subtract_zero: bool = False,
    n_nodes: int = RADIAL_NODES,
) -> float:
    """integral over R^d of (fhat - c_f)(conj(ghat) - c_g) * weight(|xi|),
    with c = fhat(0) when subtract_zero is set and 0 otherwise.

    Radial reduction applies whenever the product has no net phase (equal
    or absent centers); otherwise d = 1 uses Hermitian symmetry on the
    half line and d = 2 a tensor grid.
    """
    if f.d != g.d:
        raise ValueError("test functions live in different dimensions")
    d = f.d
    lo, hi = _pair_grid(f, g)
    if hi <= lo:
        return 0.0

    if f.center == g.center:
        r, w = gauss_legendre(lo, hi, n_nodes)
        vf = f.fhat_radial(r)
        vg = g.fhat_radial(r)
        if subtract_zero:
            vf = vf - f.fhat_radial(np.zeros(1))[0]
            vg = vg - g.fhat_radial(np.zeros(1))[0]
        integrand = vf * vg * weight(r) * r ** (d - 1)
        return surface_measure(d) * float(np.sum(w * integrand))

    if d == 1:
        r, w = gauss_legendre(lo, hi, n_nodes)
        vf = f.fhat(r)
        vg = g.fhat(r)
        if subtract_zero:
            vf = vf - complex(f.fhat(np.zeros(1))[0])
            vg = vg - complex(g.fhat(np.zeros(1))[0])
        integrand = np.real(vf * np.conj(vg)) * weight(r)
        return 2.0 * float(np.sum(w * integrand))

    if d == 2:
        return _pair_integral_tensor2d(f, g, weight, subtract_zero)

    raise ValueError("non-radial pairs are supported only for d <= 2")


def _pair_integral_tensor2d(
    f: TestFunction,
    g: TestFunction,
    weight: Callable[[np.ndarray], np.ndarray],
    subtract_zero: bool = False,
    n_nodes: int = TENSOR_NODES,
) -> float:
    """Full tensor-grid quadrature in d = 2 (cross-check for the radial path)."""
    _, hi = _pair_grid(f, g)
    x, wx = gauss_legendre(-hi, hi, n_nodes)
    pts = np.stack(np.meshgrid(x, x, indexing="ij"), axis=-1).reshape(-1, 2)
    w2 = np.multiply.outer(wx, wx).reshape(-1)
    vf = f.fhat(pts)
    vg = g.fhat(pts)
    if subtract_zero:
        vf = vf - complex(f.fhat(np.zeros((1, 2)))[0])
        vg = vg - complex(g.fhat(np.zeros((1, 2)))[0])
    r = np.sqrt((pts**2).sum(axis=1))
    wvals = np.where(r > 0.0, weight(np.maximum(r, 1e-300)), 0.0)
    return float(np.sum(w2 * np.real(vf * np.conj(vg)) * wvals))


def _check_floor(f: TestFunction, name: str) -> None:
    if f.xi_floor <= 0.0 and abs(complex(f.fhat_radial(np.zeros(1))[0])) > FLOOR_TOL:
        raise ValueError(
            f"{name} has fhat(0) != 0 and no annulus floor; the |xi|^-2 "
            "integral diverges in d <= 2"
        )


def gff_covariance(
    f: TestFunction,
    g: TestFunction,
    nu_scale: float = 1.0,
    check_floor: bool = True,
    n_nodes: int = RADIAL_NODES,
) -> float:
    """nu_scale times the free-field covariance integral of fhat conj(ghat)
    over |xi|^2.

    In d <= 2 both functions must carry an annulus floor (the integrand is
    otherwise non-integrable at the origin); pass check_floor=False only
    for diagnostic comparisons of the raw truncated quadrature.
    """
    if check_floor and f.d <= 2:
        _check_floor(f, "f")
        _check_floor(g, "g")
    value = _pair_integral(f, g, lambda r: 1.0 / (r * r), n_nodes=n_nodes)
    return nu_scale * value


def transient_covariance(
    f: TestFunction,
    g: TestFunction,
    phi: TestFunction | None,
    t: float,
    nu: float,
    sigma: float,
) -> float:
    """Covariance of the whole-space heat evolution tested against f and g
    at time t, starting from the deterministic profile phi (None for zero).

    The noise part integrates fhat conj(ghat) (1 - exp(-2 t nu |xi|^2)) /
    (2 nu |xi|^2); the initial-condition part is the rank-one product of
    the heat-smoothed pairings of phi with f and with g. As t grows the
    first term increases to the free-field covariance and the second
    decays to zero.
    """
    if t < 0.0:
        raise ValueError(f"time must be non-negative, got {t}")
    if nu <= 0.0:
        raise ValueError(f"nu must be positive, got {nu}")

    def noise_weight(r):
        z = 2.0 * t * nu * r * r
        return sigma**2 * (-np.expm1(-z)) / (2.0 * nu * r * r)

    value = _pair_integral(f, g, noise_weight)
    if phi is not None:
        heat = lambda r: np.exp(-t * nu * r * r)
        value += _pair_integral(phi, f, heat) * _pair_integral(phi, g, heat)
    return value


def massive_limit_covariance(
    f: TestFunction, g: TestFunction, nu: float, eps: float, sigma: float = 1.0
) -> float:
    """Stationary covariance of the massive heat evolution:
    sigma^2 * integral of fhat conj(ghat) / (2 nu (|xi|^2 + eps)).

    Finite for arbitrary Schwartz-type inputs (no annulus floor needed);
    as eps -> 0 on floor-certified functions it approaches gff_covariance
    with the factor sigma^2 / (2 nu).
    """
    if eps <= 0.0:
        raise ValueError(f"mass eps must be positive, got {eps}")
    if nu <= 0.0:
        raise ValueError(f"nu must be positive, got {nu}")
    return _pair_integral(
        f, g, lambda r: sigma**2 / (2.0 * nu * (r * r + eps))
    )


def hhat_norms(
    f: TestFunction, gamma: float, variant: str = "homogeneous", eps: float = 1.0
) -> float:
    """Squared Sobolev-type norms of f in the Fourier domain.

    'homogeneous' integrates |xi|^(2 gamma) |fhat|^2 and is rejected for
    gamma <= -d/2 when fhat(0) != 0 (divergent); 'bessel' integrates
    (eps + |xi|^2)^gamma |fhat|^2 and is finite for every gamma.
    """
    if variant == "homogeneous":
        if gamma <= -0.5 * f.d and abs(complex(f.fhat_radial(np.zeros(1))[0])) > FLOOR_TOL:
            raise ValueError(
                f"homogeneous norm diverges for gamma = {gamma} <= -d/2 with fhat(0) != 0"
            )
        weight = lambda r: r ** (2.0 * gamma)
    elif variant == "bessel":
        if eps <= 0.0:
            raise ValueError("bessel variant needs eps > 0")
        weight = lambda r: (eps + r * r) ** gamma
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return _pair_integral(f, f, weight)
