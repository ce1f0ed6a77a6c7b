"""Exact per-mode Ornstein-Uhlenbeck evolution of the spectral stochastic
heat equation, its stationary law, the Gaussian-equivalence statistic, and
an Euler-Maruyama oracle used only for verification.

Mode k relaxes at rate nu * lambda_k^2 toward a centered Gaussian with
variance sigma^2 / (2 nu lambda_k^2); the transition over any step is
sampled exactly, so no time-discretization error enters production runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .basis import EigenBasis, basis_from_descriptor
from .fields import FieldSample, RngStream, sample_gff
from .hilbert_scale import CoefficientField
from .stats import CovarianceReport, report_from_values

MC_BLOCK = 4096  # fixed Monte Carlo block size; one rng substream per block


@dataclass(frozen=True, eq=False)
class SpectralState:
    """Per-mode solution state u_k(t) together with (nu, sigma, t)."""

    basis: EigenBasis
    t: float
    coeffs: np.ndarray
    nu: float
    sigma: float

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.basis.size,):
            raise ValueError(f"expected {self.basis.size} coefficients")
        object.__setattr__(self, "coeffs", c)
        if self.nu <= 0.0 or self.sigma < 0.0:
            raise ValueError("need nu > 0 and sigma >= 0")


def zero_state(basis: EigenBasis, nu: float, sigma: float) -> SpectralState:
    return SpectralState(basis, 0.0, np.zeros(basis.size), nu, sigma)


def transition_moments(lam2, nu: float, sigma: float, dt: float):
    """Decay factor and noise variance of the exact transition over dt:
    mean multiplier exp(-nu lam2 dt), variance
    sigma^2 (1 - exp(-2 nu lam2 dt)) / (2 nu lam2)."""
    lam2 = np.asarray(lam2, dtype=float)
    decay = np.exp(-nu * lam2 * dt)
    var = sigma**2 * (-np.expm1(-2.0 * nu * lam2 * dt)) / (2.0 * nu * lam2)
    return decay, var


def _require_positive_modes(basis: EigenBasis) -> None:
    if basis.lambda_min <= 0.0:
        raise ValueError("dynamics requires lambda_1 > 0 (no constant mode)")


def exact_step(state: SpectralState, dt: float, rng: np.random.Generator) -> SpectralState:
    """One exact transition: u_k <- u_k e^{-nu lam_k^2 dt} + eta_k with
    eta_k ~ N(0, sigma^2 (1 - e^{-2 nu lam_k^2 dt}) / (2 nu lam_k^2)),
    independent across modes; exact in distribution for any dt > 0."""
    if dt <= 0.0:
        raise ValueError(f"step size must be positive, got {dt}")
    _require_positive_modes(state.basis)
    decay, var = transition_moments(state.basis.lambdas_squared, state.nu, state.sigma, dt)
    noise = np.sqrt(var) * rng.standard_normal(state.basis.size)
    return replace(state, t=state.t + dt, coeffs=state.coeffs * decay + noise)


def em_oracle_step(state: SpectralState, dt: float, rng: np.random.Generator) -> SpectralState:
    """First-order weak Euler-Maruyama step, for verification only:
    u_k <- u_k - nu lam_k^2 u_k dt + sigma sqrt(dt) xi_k."""
    if dt <= 0.0:
        raise ValueError(f"step size must be positive, got {dt}")
    _require_positive_modes(state.basis)
    lam2 = state.basis.lambdas_squared
    if state.nu * float(lam2[-1]) * dt > 0.1:
        raise ValueError(
            f"Euler-Maruyama step nu*lam_max^2*dt = {state.nu * lam2[-1] * dt:.3g} "
            "> 0.1 is unstable; reduce dt"
        )
    xi = rng.standard_normal(state.basis.size)
    coeffs = state.coeffs * (1.0 - state.nu * lam2 * dt) + state.sigma * math.sqrt(dt) * xi
    return replace(state, t=state.t + dt, coeffs=coeffs)


def evolve(state: SpectralState, t_grid, rng: np.random.Generator) -> list[SpectralState]:
    """Exact transitions through an increasing time grid (each t above the
    state's current time); the marginal law at each grid time matches the
    heat-flow mean plus the independent per-mode noise variances."""
    out = []
    current = state
    for t in np.asarray(t_grid, dtype=float):
        current = exact_step(current, float(t) - current.t, rng)
        out.append(current)
    return out


def stationary_sample(
    basis: EigenBasis, nu: float, sigma: float, rng: np.random.Generator
) -> SpectralState:
    """A draw from the invariant law: u_k = sigma (2 nu)^{-1/2} zeta_k / lambda_k,
    exactly the long-time limit of exact_step."""
    _require_positive_modes(basis)
    scale = sigma / math.sqrt(2.0 * nu)
    field = sample_gff(basis, 1.0, rng)
    return SpectralState(basis, 0.0, scale * field.coeffs, nu, sigma)


def kakutani_statistic(basis: EigenBasis, nu: float, t: float, terms: int | None = None) -> float:
    """Partial sum of the Gaussian-equivalence statistic
    sum_{k<=terms} (sqrt(1 - e^{-2 nu lam_k^2 t}) - 1)^2 comparing the
    time-t law with the invariant law; bounded partial sums certify
    absolute continuity."""
    if t <= 0.0:
        raise ValueError(f"time must be positive, got {t}")
    _require_positive_modes(basis)
    n = basis.size if terms is None else terms
    if not 1 <= n <= basis.size:
        raise ValueError(f"terms must be in 1..{basis.size}")
    q = np.exp(-2.0 * nu * basis.lambdas_squared[:n] * t)
    # sqrt(1-q) - 1 written as -q / (1 + sqrt(1-q)) to avoid cancellation
    dev = q / (1.0 + np.sqrt(1.0 - q))
    return float(np.sum(dev * dev))


def _functional_matrix(basis: EigenBasis, functionals) -> np.ndarray:
    cols = []
    for f in functionals:
        c = f.coeffs if isinstance(f, CoefficientField) else np.asarray(f, dtype=float)
        if c.shape != (basis.size,):
            raise ValueError("functional length does not match basis size")
        cols.append(c)
    return np.stack(cols, axis=1)


def sample_functional_values(
    basis: EigenBasis,
    nu: float,
    sigma: float,
    phi,
    t: float,
    n_samples: int,
    weights: np.ndarray,
    stream: RngStream,
    jobs: int = 1,
) -> np.ndarray:
    """Monte Carlo draws of the pairings u[t, f_j] as an (n_samples, p)
    array, using one exact transition from time zero.

    ``phi`` is None (zero start), a coefficient vector (deterministic
    start), or a callable (generator, n) -> (n, size) drawing random
    starts from its own substream. Samples are produced in fixed blocks
    of MC_BLOCK with one substream per block and concatenated in block
    order, so results do not depend on the worker count.
    """
    _require_positive_modes(basis)
    decay, var = transition_moments(basis.lambdas_squared, nu, sigma, t)
    sd = np.sqrt(var)
    n_blocks = (n_samples + MC_BLOCK - 1) // MC_BLOCK

    def one_block(b: int) -> np.ndarray:
        m = min(MC_BLOCK, n_samples - b * MC_BLOCK)
        noise_rng = stream.substream(2 * b).generator()
        u = sd * noise_rng.standard_normal((m, basis.size))
        if phi is not None:
            if callable(phi):
                phi_rng = stream.substream(2 * b + 1).generator()
                u += phi(phi_rng, m) * decay
            else:
                u += np.asarray(phi, dtype=float) * decay
        return u @ weights

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            blocks = list(pool.map(one_block, range(n_blocks)))
    else:
        blocks = [one_block(b) for b in range(n_blocks)]
    return np.concatenate(blocks, axis=0)


def stationary_target(basis: EigenBasis, nu: float, sigma: float, weights: np.ndarray) -> np.ndarray:
    """Limit covariance matrix sigma^2/(2 nu) sum_k f_k g_k / lambda_k^2."""
    scale = sigma**2 / (2.0 * nu)
    return scale * (weights.T @ (weights / basis.lambdas_squared[:, None]))


def convergence_curve(
    basis: EigenBasis,
    nu: float,
    sigma: float,
    phi,
    t_list,
    n_samples: int,
    f_list,
    stream: RngStream,
    g_list=None,
    z_threshold: float = 4.0,
    jobs: int = 1,
) -> list[tuple[float, CovarianceReport]]:
    """Empirical covariance of the tested solution against the stationary
    target at each time, one report per time.

    The target is always the limit law, so the per-time maximal deviation
    traces the decaying transient.
    """
    if n_samples < 100:
        raise ValueError("fewer than 100 samples gives useless statistics")
    functionals = list(f_list) + (list(g_list) if g_list is not None else [])
    weights = _functional_matrix(basis, functionals)
    target = stationary_target(basis, nu, sigma, weights)
    labels = [f"f{j+1}" for j in range(weights.shape[1])]
    out = []
    for i, t in enumerate(np.asarray(t_list, dtype=float)):
        values = sample_functional_values(
            basis, nu, sigma, phi, float(t), n_samples, weights,
            stream.substream(i), jobs=jobs,
        )
        report = report_from_values(
            values, target=target, labels=labels, z_threshold=z_threshold,
            seed_info=f"seed={stream.seed} stream={stream.stream_id} t={t}",
        )
        out.append((float(t), report))
    return out


def save_checkpoint(state: SpectralState, path: str, seed_info: str = "") -> None:
    """CSV of (k, lambda, u_k) plus a '<path>.meta' sidecar with nu, sigma,
    t, seed info and the basis descriptor."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("k,lambda,u_k\n")
        for k, (lam, u) in enumerate(zip(state.basis.lambdas, state.coeffs), start=1):
            fh.write(f"{k},{float(lam)!r},{float(u)!r}\n")
    with open(path + ".meta", "w", encoding="utf-8") as fh:
        fh.write(f"nu={state.nu!r}\n")
        fh.write(f"sigma={state.sigma!r}\n")
        fh.write(f"t={state.t!r}\n")
        fh.write(f"seed={seed_info}\n")
        fh.write(f"basis={state.basis.describe()}\n")


def load_checkpoint(path: str, basis: EigenBasis | None = None) -> SpectralState:
    """Rebuild a state from save_checkpoint output (the basis is recreated
    from the sidecar descriptor unless one is supplied)."""
    meta = {}
    with open(path + ".meta", encoding="utf-8") as fh:
        for line in fh:
            key, _, value = line.strip().partition("=")
            meta[key] = value
    if basis is None:
        basis = basis_from_descriptor(meta["basis"])
    coeffs = []
    with open(path, encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            coeffs.append(float(line.strip().split(",")[2]))
    return SpectralState(
        basis, float(meta["t"]), np.array(coeffs), float(meta["nu"]), float(meta["sigma"])
    )
