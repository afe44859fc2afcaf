import numpy as np
import pytest

from darwinlab import (
    AllToAllParams,
    BlochVector,
    BroadcastSpec,
    IsingParams,
    build_all_to_all,
    build_broadcast_interaction,
    build_fraction_hamiltonian,
    build_ising_chain,
    product_energy_density,
    product_state,
)
from oracles import kron_ising, kron_site_operator

Y_AXIS = BlochVector(0.0, 1.0, 0.0)
Z_AXIS = BlochVector(0.0, 0.0, 1.0)


def assert_hermitian_on_random_vectors(H, trials=64, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        x = rng.normal(size=H.dim) + 1j * rng.normal(size=H.dim)
        y = rng.normal(size=H.dim) + 1j * rng.normal(size=H.dim)
        lhs = np.vdot(x, H.matvec(y))
        rhs = np.vdot(H.matvec(x), y)
        assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(x) * np.linalg.norm(y)


class TestIsingChain:
    def test_classical_two_site_spectrum(self):
        H = build_ising_chain(IsingParams(N=2, J=1.0, h_X=0.0, h_Z=0.0))
        evals = np.sort(np.linalg.eigvalsh(H.to_dense()))
        np.testing.assert_allclose(evals, [-2, -2, 2, 2], atol=1e-12)

    def test_matches_kron_oracle_default_preset(self):
        p = IsingParams(N=8)
        H = build_ising_chain(p).to_dense()
        np.testing.assert_allclose(H, kron_ising(8, p.J, p.h_X, p.h_Z), atol=1e-12)

    def test_open_boundary_oracle(self):
        p = IsingParams(N=5, boundary="open")
        H = build_ising_chain(p).to_dense()
        np.testing.assert_allclose(
            H, kron_ising(5, p.J, p.h_X, p.h_Z, periodic=False), atol=1e-12
        )

    def test_classical_ground_state(self):
        N = 6
        H = build_ising_chain(IsingParams(N=N, J=1.0, h_X=0.0, h_Z=0.0))
        psi = product_state(np.array([1.0, 0.0]), N)
        out = H.apply_state(psi)
        np.testing.assert_allclose(out, -N * psi.amplitudes, atol=1e-12)

    def test_rejects_single_site(self):
        with pytest.raises(ValueError):
            IsingParams(N=1)

    def test_hermitian_on_random_vectors(self):
        assert_hermitian_on_random_vectors(build_ising_chain(IsingParams(N=6)))

    def test_translation_invariance_periodic(self):
        N = 6
        H = build_ising_chain(IsingParams(N=N)).to_dense()
        # one-site translation permutation on basis indices (cyclic bit shift)
        idx = np.arange(1 << N)
        shifted = ((idx << 1) | (idx >> (N - 1))) & ((1 << N) - 1)
        P = np.zeros_like(H)
        P[shifted, idx] = 1.0
        np.testing.assert_allclose(P @ H, H @ P, atol=1e-10)


class TestFractionHamiltonian:
    def test_single_site_spectrum(self):
        p = IsingParams(N=8)
        H = build_fraction_hamiltonian(p, 1).to_dense()
        evals = np.sort(np.linalg.eigvalsh(H))
        r = np.hypot(p.h_X, p.h_Z)
        np.testing.assert_allclose(evals, [-r, r], atol=1e-12)

    def test_two_site_oracle(self):
        p = IsingParams(N=8)
        H = build_fraction_hamiltonian(p, 2).to_dense()
        np.testing.assert_allclose(
            H, kron_ising(2, p.J, p.h_X, p.h_Z, periodic=False), atol=1e-12
        )

    def test_full_fraction_equals_open_chain(self):
        p = IsingParams(N=5, boundary="open")
        a = build_fraction_hamiltonian(p, 5).to_dense()
        b = build_ising_chain(p).to_dense()
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            build_fraction_hamiltonian(IsingParams(N=4), 5)

    def test_embedded_expectation_linearity(self):
        # expectation of H_F in a random state equals the sum of its local
        # term expectations computed with the Kronecker oracle
        p = IsingParams(N=6)
        n = 3
        rng = np.random.default_rng(2)
        v = rng.normal(size=1 << p.N) + 1j * rng.normal(size=1 << p.N)
        v /= np.linalg.norm(v)
        H_F = build_fraction_hamiltonian(p, n).to_dense()
        embedded = np.kron(np.eye(1 << (p.N - n)), H_F)
        expect = np.vdot(v, embedded @ v).real
        acc = 0.0
        for j in range(n - 1):
            acc -= p.J * np.vdot(v, kron_site_operator({j: "Z", j + 1: "Z"}, p.N) @ v).real
        for j in range(n):
            acc -= p.h_X * np.vdot(v, kron_site_operator({j: "X"}, p.N) @ v).real
            acc -= p.h_Z * np.vdot(v, kron_site_operator({j: "Z"}, p.N) @ v).real
        assert expect == pytest.approx(acc, abs=1e-9)


class TestBroadcastInteraction:
    def test_diagonal_z_axis(self):
        spec = BroadcastSpec(axis=Z_AXIS, lambda_t0=np.pi / 4)
        H = build_broadcast_interaction(spec, 1, lam=0.7).to_dense()
        # system bit 1, env bit 0: entries -lam * zS * zj
        np.testing.assert_allclose(np.diag(H), [-0.7, 0.7, 0.7, -0.7], atol=1e-12)
        assert np.abs(H - np.diag(np.diag(H))).max() < 1e-12

    def test_zero_expectation_in_plus_states(self):
        spec = BroadcastSpec(axis=Z_AXIS, lambda_t0=np.pi / 4)
        H = build_broadcast_interaction(spec, 3)
        plus = product_state(np.array([1, 1]) / np.sqrt(2), 4)
        assert H.expectation(plus) == pytest.approx(0.0, abs=1e-12)

    def test_kron_oracle_generic_axis(self):
        m = np.array([0.3, -0.5, np.sqrt(1 - 0.09 - 0.25)])
        spec = BroadcastSpec(axis=BlochVector(*m), lambda_t0=0.1)
        N = 3
        H = build_broadcast_interaction(spec, N, lam=1.3).to_dense()
        expected = np.zeros_like(H)
        ZS = kron_site_operator({N: "Z"}, N + 1)
        for j in range(N):
            for w, letter in zip(m, "XYZ"):
                expected -= 1.3 * w * ZS @ kron_site_operator({j: letter}, N + 1)
        np.testing.assert_allclose(H, expected, atol=1e-12)

    def test_hermitian(self):
        spec = BroadcastSpec(axis=Y_AXIS, lambda_t0=0.5)
        assert_hermitian_on_random_vectors(build_broadcast_interaction(spec, 4))


class TestAllToAll:
    def test_two_site_form(self):
        p = AllToAllParams(N=2, seed=5)
        H = build_all_to_all(p).to_dense()
        jx, jz = p.coupling(0, 1, "x"), p.coupling(0, 1, "z")
        expected = (
            jx * kron_site_operator({0: "X", 1: "X"}, 2)
            + jz * kron_site_operator({0: "Z", 1: "Z"}, 2)
        ) / np.sqrt(2)
        np.testing.assert_allclose(H, expected, atol=1e-12)

    def test_traceless(self):
        for N in (2, 4, 5):
            H = build_all_to_all(AllToAllParams(N=N, seed=1)).to_dense()
            assert abs(np.trace(H)) < 1e-10

    def test_kron_oracle_n6(self):
        p = AllToAllParams(N=6, seed=42)
        H = build_all_to_all(p).to_dense()
        expected = np.zeros_like(H)
        for j in range(6):
            for k in range(j + 1, 6):
                expected += p.coupling(j, k, "x") * kron_site_operator({j: "X", k: "X"}, 6)
                expected += p.coupling(j, k, "z") * kron_site_operator({j: "Z", k: "Z"}, 6)
        np.testing.assert_allclose(H, expected / np.sqrt(6), atol=1e-12)

    def test_couplings_reproducible(self):
        a = AllToAllParams(N=5, seed=9)
        b = AllToAllParams(N=5, seed=9)
        assert a.coupling(1, 3, "x") == b.coupling(1, 3, "x")
        assert a.coupling(1, 3, "x") != a.coupling(1, 3, "z")

    def test_hermitian(self):
        assert_hermitian_on_random_vectors(build_all_to_all(AllToAllParams(N=5, seed=3)))


class TestProductEnergyDensity:
    def test_degenerate_y_branches(self):
        p = IsingParams(N=8)
        for sign in (1.0, -1.0):
            m = BlochVector(0.0, sign, 0.0)
            assert product_energy_density(m, p) == pytest.approx(0.0, abs=1e-12)

    def test_all_up_state(self):
        p = IsingParams(N=8)
        assert product_energy_density(BlochVector(0, 0, 1.0), p) == pytest.approx(-2.205)

    def test_tilted_branches(self):
        # Bloch vectors (cos 3pi/8, 0, -+sin 3pi/8) from the y-axis broadcast
        p = IsingParams(N=8)
        c, s = np.cos(3 * np.pi / 8), np.sin(3 * np.pi / 8)
        e_minus = product_energy_density(BlochVector(c, 0, -s), p)
        e_plus = product_energy_density(BlochVector(c, 0, s), p)
        assert e_minus == pytest.approx(-(s**2) - 0.945 * c + 1.205 * s)
        assert e_plus == pytest.approx(-(s**2) - 0.945 * c - 1.205 * s)
        assert e_minus == pytest.approx(-0.102, abs=1e-3)
        assert e_plus == pytest.approx(-2.3285, abs=1e-3)

    def test_open_boundary_rejected(self):
        with pytest.raises(ValueError, match="periodic"):
            product_energy_density(BlochVector(0, 0, 1.0), IsingParams(N=4, boundary="open"))

    def test_matches_sparse_expectation_random_axes(self):
        p = IsingParams(N=8)
        H = build_ising_chain(p)
        rng = np.random.default_rng(17)
        for _ in range(20):
            v = rng.normal(size=3)
            v /= np.linalg.norm(v)
            m = BlochVector(*v)
            th = np.arccos(np.clip(m.m_z, -1, 1))
            ph = np.arctan2(m.m_y, m.m_x)
            pair = np.array([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)])
            psi = product_state(pair, p.N)
            assert product_energy_density(m, p) == pytest.approx(
                H.expectation(psi) / p.N, abs=1e-9
            )
