import math

import numpy as np
import pytest

from darwinlab import (
    BlochVector,
    BroadcastSpec,
    CgfProfile,
    IsingParams,
    RateProfile,
    alpha_star,
    build_fraction_hamiltonian,
    build_ising_chain,
    cumulant_generating,
    evolve_branches,
    fraction_energy_distribution,
    legendre,
    plateau_bound_curve,
    prepare_broadcast,
    product_energy_density,
    product_state,
    rate_function,
)
from darwinlab.branches import rotated_plus_qubit
from darwinlab.ldp import EnergyDistribution
from darwinlab.statevec import BlochVector as BV


def gaussian_profile(center, grid):
    return RateProfile(
        epsilon_grid=grid,
        f_values=(grid - center) ** 2 / 2,
        n_used=0,
        eps_typical=float(center),
    )


class TestFractionEnergyDistribution:
    def test_single_site_two_peaks(self):
        p = IsingParams(N=6)
        branch = product_state([1.0, 0.0], 6)
        sigma = 0.1
        dist = fraction_energy_distribution(branch, p, 1, smear_sigma=sigma)
        r = np.hypot(p.h_X, p.h_Z)
        # peaks at +-r with weights |<E_pm|0>|^2 from the 2x2 diagonalization
        h = np.array([[-p.h_Z, -p.h_X], [-p.h_X, p.h_Z]])
        evals, evecs = np.linalg.eigh(h)
        weights = np.abs(evecs[0]) ** 2
        np.testing.assert_allclose(np.sort(evals), [-r, r], atol=1e-12)
        for mu, w in zip(evals, weights):
            i = np.argmin(np.abs(dist.epsilon_grid - mu))
            expected = w / (sigma * math.sqrt(2 * math.pi))
            assert dist.density[i] == pytest.approx(expected, rel=5e-2)

    def test_mean_matches_operator_expectation(self):
        N, n = 8, 3
        p = IsingParams(N=N)
        bs = prepare_broadcast(BroadcastSpec(axis=BlochVector(0, 1, 0), lambda_t0=0.5), N)
        branch = bs.branches[0]
        dist = fraction_energy_distribution(branch, p, n, smear_sigma=0.3)
        H_F = build_fraction_hamiltonian(p, n).to_dense()
        rho = np.asarray(
            np.einsum(
                "hl,hm->lm",
                branch.amplitudes.reshape(1 << (N - n), 1 << n),
                branch.amplitudes.conj().reshape(1 << (N - n), 1 << n),
            )
        )
        expect = np.trace(rho @ H_F).real / n
        assert dist.mean() == pytest.approx(expect, abs=1e-6)

    def test_variance_matches_with_smearing_correction(self):
        N, n = 8, 4
        p = IsingParams(N=N)
        branch = prepare_broadcast(
            BroadcastSpec(axis=BlochVector(0, 1, 0), lambda_t0=0.4), N
        ).branches[1]
        sigma = 0.5
        dist = fraction_energy_distribution(branch, p, n, smear_sigma=sigma)
        H_F = build_fraction_hamiltonian(p, n).to_dense()
        M = branch.amplitudes.reshape(1 << (N - n), 1 << n)
        rho = M.T @ M.conj()
        e1 = np.trace(rho @ H_F).real
        e2 = np.trace(rho @ H_F @ H_F).real
        var_op = (e2 - e1**2) / n**2
        assert dist.variance() == pytest.approx(var_op + sigma**2 / n**2, abs=1e-6)

    def test_normalized(self):
        p = IsingParams(N=6)
        branch = product_state(np.array([1, 1j]) / np.sqrt(2), 6)
        dist = fraction_energy_distribution(branch, p, 2, smear_sigma=0.4)
        assert np.trapezoid(dist.density, dist.epsilon_grid) == pytest.approx(1.0, abs=1e-6)

    def test_large_n_rejected(self):
        p = IsingParams(N=16)
        branch = product_state(np.array([1, 1]) / np.sqrt(2), 16)
        with pytest.raises(ValueError, match="refused"):
            fraction_energy_distribution(branch, p, 15)


class TestRateFunction:
    def test_gaussian_density_quadratic_rate(self):
        n = 10
        sigma2 = 0.3  # per-site variance sigma2 / n
        grid = np.linspace(-1.5, 1.5, 501)
        width = math.sqrt(sigma2 / n)
        density = np.exp(-(grid**2) / (2 * width**2)) / (width * math.sqrt(2 * math.pi))
        dist = EnergyDistribution(n=n, epsilon_grid=grid, density=density, smear_sigma=0.0)
        prof = rate_function(dist)
        bulk = np.abs(prof.epsilon_grid) < 0.8
        np.testing.assert_allclose(
            prof.f_values[bulk], prof.epsilon_grid[bulk] ** 2 / (2 * sigma2), atol=1e-6
        )

    def test_minimizer_at_mean_for_symmetric(self):
        grid = np.linspace(-2, 2, 401)
        density = np.exp(-(grid**2) / 0.5)
        density /= np.trapezoid(density, grid)
        dist = EnergyDistribution(n=5, epsilon_grid=grid, density=density, smear_sigma=0.0)
        prof = rate_function(dist)
        assert prof.eps_typical == pytest.approx(0.0, abs=grid[1] - grid[0])
        assert prof.f_values.min() == 0.0

    def test_degenerate_rejected(self):
        grid = np.linspace(-1, 1, 11)
        density = np.zeros(11)
        density[5] = 1.0
        dist = EnergyDistribution(n=3, epsilon_grid=grid, density=density, smear_sigma=0.0)
        with pytest.raises(ValueError, match="support"):
            rate_function(dist)


class TestCumulantGenerating:
    def test_lambda_zero_is_zero(self):
        p = IsingParams(N=8)
        branch = product_state(np.array([1, 1j]) / np.sqrt(2), 8)
        prof = cumulant_generating(branch, p, 3, np.linspace(-1, 1, 21))
        i0 = np.argmin(np.abs(prof.k_grid))
        assert prof.lambda_values[i0] == pytest.approx(0.0, abs=1e-12)

    def test_derivative_at_zero_is_mean(self):
        p = IsingParams(N=8)
        n = 4
        branch = product_state(np.array([1, 1j]) / np.sqrt(2), 8)
        h = 1e-5
        prof = cumulant_generating(branch, p, n, [-h, 0.0, h])
        deriv = (prof.lambda_values[2] - prof.lambda_values[0]) / (2 * h)
        M = branch.amplitudes.reshape(1 << (8 - n), 1 << n)
        rho = M.T @ M.conj()
        H_F = build_fraction_hamiltonian(p, n).to_dense()
        assert deriv == pytest.approx(np.trace(rho @ H_F).real / n, abs=1e-6)

    def test_convexity(self):
        p = IsingParams(N=8)
        branch = product_state(np.array([1, 1j]) / np.sqrt(2), 8)
        prof = cumulant_generating(branch, p, 4, np.linspace(-2, 2, 81))
        second = np.diff(prof.lambda_values, 2)
        assert (second > -1e-10).all()

    def test_duality_with_rate_function(self):
        # Legendre transform of the (unshifted) rate estimate agrees with the
        # directly computed generating function; finite-n prefactors leave an
        # O(ln(n)/n) offset, measured at 0.22 for this setup and frozen at 0.3
        N, n = 12, 10
        p = IsingParams(N=N)
        bs = prepare_broadcast(BroadcastSpec(axis=BlochVector(0, 1, 0), lambda_t0=0.5), N)
        H = build_ising_chain(p)
        bs = evolve_branches(bs, H, 4.0)
        branch = bs.branches[0]
        dist = fraction_energy_distribution(branch, p, n, smear_sigma=0.5)
        keep = dist.density > 1e-300
        eps = dist.epsilon_grid[keep]
        f_unshifted = -np.log(dist.density[keep]) / n
        k_grid = np.linspace(-1, 1, 41)
        lam_from_f = np.max(k_grid[:, None] * eps[None, :] - f_unshifted[None, :], axis=1)
        lam_direct = cumulant_generating(branch, p, n, k_grid).lambda_values
        assert np.max(np.abs(lam_from_f - lam_direct)) < 0.3


class TestLegendre:
    def test_quadratic_self_dual(self):
        grid = np.linspace(-4, 4, 801)
        prof = gaussian_profile(0.0, grid)
        dual = legendre(prof, dual_grid=np.linspace(-1, 1, 201))
        np.testing.assert_allclose(dual.lambda_values, dual.k_grid**2 / 2, atol=1e-3)

    def test_double_transform_idempotent(self):
        grid = np.linspace(-3, 3, 601)
        prof = gaussian_profile(0.5, grid)
        back = legendre(legendre(prof, dual_grid=np.linspace(-3, 3, 601)), dual_grid=grid)
        bulk = np.abs(grid - 0.5) < 1.5
        assert np.max(np.abs(back.f_values[bulk] - prof.f_values[bulk])) < 2 * (grid[1] - grid[0])

    def test_affine_input_spikes_at_slope(self):
        grid = np.linspace(-1, 1, 201)
        prof = RateProfile(epsilon_grid=grid, f_values=0.7 * grid + 0.7, n_used=0, eps_typical=-1.0)
        dual = legendre(prof, dual_grid=np.linspace(0, 1.4, 141))
        # lambda(k) = max_eps (k - 0.7) eps - 0.7: kinked at k = 0.7
        i = np.argmin(np.abs(dual.k_grid - 0.7))
        assert dual.lambda_values[i] == pytest.approx(-0.7, abs=1e-6)

    def test_empty_grid_rejected(self):
        prof = RateProfile(
            epsilon_grid=np.array([]), f_values=np.array([]), n_used=0, eps_typical=0.0
        )
        with pytest.raises(ValueError, match="empty"):
            legendre(prof)


class TestAlphaStar:
    def test_symmetric_parabolas(self):
        grid = np.linspace(-3, 3, 601)
        f0 = gaussian_profile(-1.0, grid)
        f1 = gaussian_profile(1.0, grid)
        alpha, crossings = alpha_star([f0, f1])
        assert alpha == pytest.approx(0.5, abs=1e-3)
        assert crossings[0][1] == pytest.approx(0.0, abs=1e-3)

    def test_identical_profiles(self):
        grid = np.linspace(-2, 2, 401)
        f = gaussian_profile(0.3, grid)
        alpha, _ = alpha_star([f, f])
        assert alpha == pytest.approx(0.0, abs=1e-9)

    def test_crossing_height_consistency(self):
        grid = np.linspace(-3, 3, 1201)
        f0 = gaussian_profile(-0.7, grid)
        f1 = RateProfile(
            epsilon_grid=grid, f_values=(grid - 1.2) ** 2, n_used=0, eps_typical=1.2
        )
        alpha, crossings = alpha_star([f0, f1])
        eps_star = crossings[0][1]
        fa = np.interp(eps_star, grid, f0.f_values)
        fb = np.interp(eps_star, grid, f1.f_values)
        assert fa == pytest.approx(fb, abs=5e-3)
        assert alpha == pytest.approx(max(fa, fb), abs=5e-3)

    def test_mismatched_grids_rejected(self):
        f0 = gaussian_profile(0.0, np.linspace(-1, 1, 101))
        f1 = gaussian_profile(0.0, np.linspace(-2, 2, 101))
        with pytest.raises(ValueError, match="common"):
            alpha_star([f0, f1])

    def test_needs_two_profiles(self):
        with pytest.raises(ValueError, match="at least two"):
            alpha_star([gaussian_profile(0.0, np.linspace(-1, 1, 11))])


class TestPlateauBound:
    def test_symmetric_at_half(self):
        lower, upper = plateau_bound_curve(np.log(2), 0.5, 1.0, 16, [8])
        assert np.log(2) - lower[0] == pytest.approx(upper[0] - np.log(2))

    def test_large_alpha_limit(self):
        lower, upper = plateau_bound_curve(np.log(2), 50.0, 1.0, 16, range(4, 13))
        np.testing.assert_allclose(lower, np.log(2), atol=1e-8)
        np.testing.assert_allclose(upper, np.log(2), atol=1e-8)

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            plateau_bound_curve(np.log(2), -1.0, 1.0, 16, [1])


class TestDegeneracyScaling:
    def test_delta_eps_linear_in_lambda(self):
        # branch energy-density splitting of the interpolated axis scales
        # linearly in lambda as lambda -> 0, within 5% up to lambda = 0.2
        p = IsingParams(N=16)
        t0 = math.pi / 4 * 0.75

        def delta_eps(lam):
            axis = BlochVector(0.0, math.sin(lam * math.pi / 2), math.cos(lam * math.pi / 2))
            eps = []
            for s in (1.0, -1.0):
                pair = rotated_plus_qubit(axis, t0 * s)
                eps.append(product_energy_density(BV.from_state(pair), p))
            return abs(eps[0] - eps[1]) / 2

        ref = delta_eps(0.01) / 0.01
        for lam in (0.05, 0.1, 0.2):
            assert delta_eps(lam) / lam == pytest.approx(ref, rel=0.05)
