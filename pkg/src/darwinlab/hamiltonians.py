"""Operator builders: Pauli-string sparse Hamiltonians and preset models.

Operators are stored as lists of Pauli strings with real coefficients and
applied matrix-free with bit arithmetic: a string X^x Z^z (with Y's absorbed
as iXZ) maps |i> to phase * (-1)^popcount(i & z) |i ^ x>. Diagonal strings
are fused into a single diagonal vector at first use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .statevec import BlochVector, PureState

__all__ = [
    "IsingParams",
    "BroadcastSpec",
    "AllToAllParams",
    "SparseHermitianOperator",
    "build_ising_chain",
    "build_fraction_hamiltonian",
    "build_broadcast_interaction",
    "build_all_to_all",
    "product_energy_density",
]

_DENSE_LIMIT = 1 << 14


@dataclass(frozen=True)
class IsingParams:
    """Chaotic Ising chain -sum_j (J Z_j Z_{j+1} + h_X X_j + h_Z Z_j)."""

    N: int
    J: float = 1.0
    h_Z: float = 1.205
    h_X: float = 0.945
    boundary: str = "periodic"

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.boundary not in ("periodic", "open"):
            raise ValueError(f"boundary must be 'periodic' or 'open', got {self.boundary!r}")


@dataclass(frozen=True)
class BroadcastSpec:
    """Broadcast interaction parameters and branch coefficients."""

    axis: BlochVector
    lambda_t0: float
    coefficients: tuple = (2**-0.5, 2**-0.5)
    system_dim: int = 2

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.complex128)
        if c.shape != (self.system_dim,):
            raise ValueError(f"expected {self.system_dim} coefficients, got {c.shape}")
        if abs(np.sum(np.abs(c) ** 2) - 1.0) > 1e-10:
            raise ValueError("branch coefficients are not normalized")
        if abs(self.axis.norm - 1.0) > 1e-10:
            raise ValueError(f"broadcast axis has norm {self.axis.norm}, expected 1")
        object.__setattr__(self, "coefficients", tuple(c))


@dataclass(frozen=True)
class AllToAllParams:
    """Random 2-local XX+ZZ couplings, Gaussian, scaled by 1/sqrt(N)."""

    N: int
    seed: int = 0

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")

    def coupling(self, j: int, k: int, alpha: str) -> float:
        """Standard Gaussian coupling for the (j, k) pair, axis alpha in {x, z}.

        Keyed by (seed, j, k, alpha) so the value is independent of iteration
        order.
        """
        rng = np.random.default_rng([self.seed, j, k, {"x": 0, "z": 1}[alpha]])
        return float(rng.standard_normal())


@dataclass
class SparseHermitianOperator:
    """Hermitian operator as a sum of Pauli strings with real coefficients.

    ``terms`` is a list of (coeff, x_mask, y_mask, z_mask) with disjoint
    masks; each entry stands for coeff * prod X_j prod Y_j prod Z_j over the
    mask bits.
    """

    num_qubits: int
    terms: list = field(default_factory=list)
    _diag: np.ndarray | None = field(default=None, repr=False)
    _offdiag: list | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def add_term(self, coeff: float, x_mask: int = 0, y_mask: int = 0, z_mask: int = 0):
        if x_mask & y_mask or x_mask & z_mask or y_mask & z_mask:
            raise ValueError("Pauli masks must be disjoint")
        self.terms.append((float(coeff), x_mask, y_mask, z_mask))
        self._diag = None
        self._offdiag = None

    def _compile(self):
        dim = self.dim
        idx = np.arange(dim, dtype=np.uint64)
        diag = np.zeros(dim)
        offdiag = []
        for coeff, x, y, z in self.terms:
            flip = x | y
            zpar = y | z
            signs = 1.0 - 2.0 * (np.bitwise_count(idx & np.uint64(zpar)) & 1).astype(np.float64)
            # Y = i X Z: each Y contributes a factor i
            phase = 1j ** (bin(y).count("1") % 4)
            amp = coeff * phase
            if flip == 0:
                diag += (amp * signs).real
            else:
                perm = (idx ^ np.uint64(flip)).astype(np.intp)
                offdiag.append((amp, perm, signs))
        self._diag = diag
        self._offdiag = offdiag

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """y = H v, matrix-free."""
        if self._diag is None:
            self._compile()
        out = self._diag * v
        for amp, perm, signs in self._offdiag:
            out += amp * (signs * v)[perm]
        return out

    def apply_state(self, psi: PureState) -> np.ndarray:
        if psi.num_qubits != self.num_qubits:
            raise ValueError("state/operator size mismatch")
        return self.matvec(psi.amplitudes)

    def expectation(self, psi: PureState) -> float:
        return float(np.vdot(psi.amplitudes, self.apply_state(psi)).real)

    def to_dense(self) -> np.ndarray:
        if self.dim > _DENSE_LIMIT:
            raise ValueError(f"dense form refused for dim {self.dim} > {_DENSE_LIMIT}")
        if self._diag is None:
            self._compile()
        H = np.diag(self._diag.astype(np.complex128))
        cols = np.arange(self.dim)
        for amp, perm, signs in self._offdiag:
            # column j holds H e_j: (H e_j)[perm[j]] gets amp * signs[j]
            H[perm, cols] += amp * signs
        return H


def build_ising_chain(p: IsingParams) -> SparseHermitianOperator:
    """H = -sum_j (J Z_j Z_{j+1} + h_X X_j + h_Z Z_j) on N sites."""
    H = SparseHermitianOperator(num_qubits=p.N)
    bonds = p.N if p.boundary == "periodic" else p.N - 1
    for j in range(bonds):
        H.add_term(-p.J, z_mask=(1 << j) | (1 << ((j + 1) % p.N)))
    for j in range(p.N):
        H.add_term(-p.h_X, x_mask=1 << j)
        H.add_term(-p.h_Z, z_mask=1 << j)
    return H


def build_fraction_hamiltonian(p: IsingParams, n: int) -> SparseHermitianOperator:
    """Restriction to the first n sites: the open sub-chain with n-1 bonds."""
    if not 1 <= n <= p.N:
        raise ValueError(f"fraction size {n} out of range 1..{p.N}")
    H = SparseHermitianOperator(num_qubits=n)
    for j in range(n - 1):
        H.add_term(-p.J, z_mask=(1 << j) | (1 << (j + 1)))
    for j in range(n):
        H.add_term(-p.h_X, x_mask=1 << j)
        H.add_term(-p.h_Z, z_mask=1 << j)
    return H


def build_broadcast_interaction(
    spec: BroadcastSpec, N: int, lam: float = 1.0
) -> SparseHermitianOperator:
    """-lam * Z_S sum_j (axis . sigma_j) on N+1 qubits, system on the top bit."""
    if spec.system_dim != 2:
        raise ValueError("broadcast operator requires a qubit system (d = 2)")
    H = SparseHermitianOperator(num_qubits=N + 1)
    s_bit = 1 << N
    m = spec.axis
    for j in range(N):
        b = 1 << j
        if m.m_x != 0.0:
            H.add_term(-lam * m.m_x, x_mask=b, z_mask=s_bit)
        if m.m_y != 0.0:
            H.add_term(-lam * m.m_y, y_mask=b, z_mask=s_bit)
        if m.m_z != 0.0:
            H.add_term(-lam * m.m_z, z_mask=b | s_bit)
    return H


def build_all_to_all(p: AllToAllParams) -> SparseHermitianOperator:
    """H = N^{-1/2} sum_{j<k} (Jx_{jk} X_j X_k + Jz_{jk} Z_j Z_k)."""
    H = SparseHermitianOperator(num_qubits=p.N)
    scale = 1.0 / np.sqrt(p.N)
    for j in range(p.N):
        for k in range(j + 1, p.N):
            pair = (1 << j) | (1 << k)
            H.add_term(scale * p.coupling(j, k, "x"), x_mask=pair)
            H.add_term(scale * p.coupling(j, k, "z"), z_mask=pair)
    return H


def product_energy_density(m: BlochVector, p: IsingParams) -> float:
    """Energy per site of the product state with Bloch vector m, periodic chain.

    <H>/N = -(J m_z^2 + h_X m_x + h_Z m_z); exact only with periodic
    boundaries where every site sees one bond.
    """
    if p.boundary != "periodic":
        raise ValueError("closed-form energy density requires periodic boundary")
    if abs(m.norm - 1.0) > 1e-10:
        raise ValueError(f"Bloch vector norm {m.norm} deviates from 1")
    return -(p.J * m.m_z**2 + p.h_X * m.m_x + p.h_Z * m.m_z)
