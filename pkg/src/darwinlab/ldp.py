"""Large-deviation layer: fraction-energy distributions, rate functions,
cumulant generating functions, Legendre duality, and the crossing exponent
that controls the exponential approach of I(F,S) to its plateau."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .branches import _fraction_energy_weights, fraction_hamiltonian_eig
from .hamiltonians import IsingParams
from .statevec import PureState

__all__ = [
    "EnergyDistribution",
    "RateProfile",
    "CgfProfile",
    "fraction_energy_distribution",
    "rate_function",
    "cumulant_generating",
    "legendre",
    "alpha_star",
    "plateau_bound_curve",
    "default_epsilon_grid",
]

DEFAULT_SMEAR_SIGMA = 0.5
DEFAULT_GRID_POINTS = 401


@dataclass(frozen=True)
class EnergyDistribution:
    """Smeared density of the fraction energy per site."""

    n: int
    epsilon_grid: np.ndarray
    density: np.ndarray
    smear_sigma: float

    def mean(self) -> float:
        return float(np.trapezoid(self.epsilon_grid * self.density, self.epsilon_grid))

    def variance(self) -> float:
        mu = self.mean()
        return float(
            np.trapezoid((self.epsilon_grid - mu) ** 2 * self.density, self.epsilon_grid)
        )


@dataclass(frozen=True)
class RateProfile:
    """Sampled rate function, shifted so min f = 0 at eps_typical."""

    epsilon_grid: np.ndarray
    f_values: np.ndarray
    n_used: int
    eps_typical: float


@dataclass(frozen=True)
class CgfProfile:
    """Sampled cumulant generating function per site."""

    k_grid: np.ndarray
    lambda_values: np.ndarray
    n_used: int = 0


def default_epsilon_grid(
    spectra_per_site,
    smear_sigma: float,
    points: int = DEFAULT_GRID_POINTS,
    margin: float = 8.0,
):
    """Uniform grid spanning the union of branch spectra plus kernel margins.

    The margin is 8 smearing widths so that truncated Gaussian tails do not
    bias the first two moments above 1e-10.
    """
    lo = min(float(np.min(s)) for s in spectra_per_site)
    hi = max(float(np.max(s)) for s in spectra_per_site)
    return np.linspace(lo - margin * smear_sigma, hi + margin * smear_sigma, points)


def fraction_energy_distribution(
    branch: PureState,
    p: IsingParams,
    n: int,
    smear_sigma: float = DEFAULT_SMEAR_SIGMA,
    epsilon_grid: np.ndarray | None = None,
    eig=None,
) -> EnergyDistribution:
    """Gaussian-smeared spectral weight of H_F in the reduced branch state.

    The kernel has fixed absolute width smear_sigma in energy (not energy per
    site); the density is reported against energy per site and normalized on
    the grid.
    """
    if smear_sigma <= 0:
        raise ValueError("smear_sigma must be positive")
    if eig is None:
        eig = fraction_hamiltonian_eig(p, n)
    evals, weights = _fraction_energy_weights(branch, p, n, eig=eig)
    if epsilon_grid is None:
        epsilon_grid = default_epsilon_grid([evals / n], smear_sigma / n)
    E = epsilon_grid * n
    kernel = np.exp(-((E[:, None] - evals[None, :]) ** 2) / (2 * smear_sigma**2))
    density = (kernel @ weights) * n / (smear_sigma * np.sqrt(2 * np.pi))
    norm = np.trapezoid(density, epsilon_grid)
    if norm <= 0:
        raise ValueError("energy distribution vanishes on the supplied grid")
    return EnergyDistribution(
        n=n, epsilon_grid=np.asarray(epsilon_grid), density=density / norm,
        smear_sigma=smear_sigma,
    )


_DENSITY_FLOOR = 1e-300


def rate_function(dist: EnergyDistribution) -> RateProfile:
    """f(eps) = -ln p(eps) / n on the positive-density sub-grid, min shifted to 0."""
    keep = dist.density > _DENSITY_FLOOR
    if np.count_nonzero(keep) < 2:
        raise ValueError("distribution support too small for a rate-function estimate")
    eps = dist.epsilon_grid[keep]
    f = -np.log(dist.density[keep]) / dist.n
    i0 = int(np.argmin(f))
    return RateProfile(
        epsilon_grid=eps, f_values=f - f[i0], n_used=dist.n, eps_typical=float(eps[i0])
    )


def cumulant_generating(
    branch: PureState,
    p: IsingParams,
    n: int,
    k_grid,
    eig=None,
) -> CgfProfile:
    """lambda(k) = ln <exp(k H_F)> / n over the supplied k grid."""
    if eig is None:
        eig = fraction_hamiltonian_eig(p, n)
    evals, weights = _fraction_energy_weights(branch, p, n, eig=eig)
    k_grid = np.asarray(k_grid, dtype=float)
    lam = logsumexp(np.outer(k_grid, evals), b=weights[None, :], axis=1) / n
    return CgfProfile(k_grid=k_grid, lambda_values=lam, n_used=n)


def legendre(profile, dual_grid=None):
    """Legendre transform between rate and generating-function profiles.

    RateProfile -> CgfProfile via lambda(k) = max_eps (k eps - f(eps));
    CgfProfile -> RateProfile via f(eps) = max_k (k eps - lambda(k)).
    The pointwise sup over the sampled grid automatically convexifies.
    """
    if isinstance(profile, RateProfile):
        x, v = profile.epsilon_grid, profile.f_values
        if x.size == 0:
            raise ValueError("empty profile grid")
        if dual_grid is None:
            dual_grid = np.linspace(-2.0, 2.0, 201)
        k = np.asarray(dual_grid, dtype=float)
        lam = np.max(k[:, None] * x[None, :] - v[None, :], axis=1)
        return CgfProfile(k_grid=k, lambda_values=lam, n_used=profile.n_used)
    if isinstance(profile, CgfProfile):
        k, lam = profile.k_grid, profile.lambda_values
        if k.size == 0:
            raise ValueError("empty profile grid")
        if dual_grid is None:
            lo = float(np.min(np.gradient(lam, k)))
            hi = float(np.max(np.gradient(lam, k)))
            dual_grid = np.linspace(lo, hi, 201)
        eps = np.asarray(dual_grid, dtype=float)
        f = np.max(eps[:, None] * k[None, :] - lam[None, :], axis=1)
        i0 = int(np.argmin(f))
        return RateProfile(
            epsilon_grid=eps, f_values=f, n_used=profile.n_used, eps_typical=float(eps[i0])
        )
    raise TypeError(f"expected RateProfile or CgfProfile, got {type(profile)!r}")


def _pair_crossing(fa: RateProfile, fb: RateProfile, tol: float) -> tuple[float, float]:
    """min over eps of max(f_a, f_b) and its locus for one profile pair."""
    if fa.epsilon_grid.shape != fb.epsilon_grid.shape or not np.allclose(
        fa.epsilon_grid, fb.epsilon_grid
    ):
        raise ValueError("rate profiles must share a common epsilon grid")
    grid = fa.epsilon_grid
    upper = np.maximum(fa.f_values, fb.f_values)
    i_min = int(np.argmin(upper))
    best = float(upper[i_min])
    eps_best = float(grid[i_min])
    # refine by bisection on f_a - f_b between the two minimizers (convex case)
    g = lambda e: float(np.interp(e, grid, fa.f_values) - np.interp(e, grid, fb.f_values))
    lo, hi = sorted((fa.eps_typical, fb.eps_typical))
    if lo < hi and g(lo) * g(hi) < 0:
        a, b = lo, hi
        while b - a > tol:
            mid = 0.5 * (a + b)
            if g(lo) * g(mid) <= 0:
                b = mid
            else:
                a = mid
        eps_star = 0.5 * (a + b)
        val = max(
            float(np.interp(eps_star, grid, fa.f_values)),
            float(np.interp(eps_star, grid, fb.f_values)),
        )
        if val <= best + tol:
            return val, eps_star
    return best, eps_best


def alpha_star(profiles, tol: float = 1e-3):
    """Smallest pairwise crossing height of the rate functions.

    Returns (alpha, crossings) where crossings lists ((a, b), eps_star) per
    pair and alpha is the minimum crossing height over all pairs.
    """
    profiles = list(profiles)
    if len(profiles) < 2:
        raise ValueError("need at least two rate profiles")
    alpha = np.inf
    crossings = []
    for a in range(len(profiles)):
        for b in range(a + 1, len(profiles)):
            val, eps = _pair_crossing(profiles[a], profiles[b], tol)
            crossings.append(((a, b), eps))
            alpha = min(alpha, val)
    return float(alpha), crossings


def plateau_bound_curve(H_S: float, alpha: float, C: float, N: int, n_list):
    """Lower/upper envelopes H_S -+ C exp(-alpha n), C exp(-alpha (N-n))."""
    if alpha <= 0 or C <= 0:
        raise ValueError("alpha and C must be positive")
    n = np.asarray(list(n_list), dtype=float)
    lower = H_S - C * np.exp(-alpha * n)
    upper = H_S + C * np.exp(-alpha * (N - n))
    return lower, upper
