"""Complex statevector algebra for qubit registers.

Conventions: a register of N qubits is a length-2^N complex vector; site j
(1-based) lives on bit j-1 of the basis index. Environment fractions are
always the contiguous interval of sites 1..n, i.e. the n lowest bits, so
reduced density matrices are plain reshapes with no bit permutation.
Entropies are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PureState",
    "BlochVector",
    "product_state",
    "single_qubit_state",
    "inner",
    "reduced_cross_matrix",
    "reduced_density_matrix",
    "complement_cross_matrix",
    "von_neumann_entropy",
]

_NORM_TOL = 1e-10


@dataclass(frozen=True)
class PureState:
    """Normalized pure state of ``num_qubits`` qubits."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError(f"num_qubits must be >= 1, got {self.num_qubits}")
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2**self.num_qubits,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, "
                f"expected ({2**self.num_qubits},)"
            )
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > _NORM_TOL:
            raise ValueError(f"state norm {nrm!r} deviates from 1 by more than {_NORM_TOL}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits


@dataclass(frozen=True)
class BlochVector:
    """Unit vector on the Bloch sphere."""

    m_x: float
    m_y: float
    m_z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.m_x, self.m_y, self.m_z])

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.m_x**2 + self.m_y**2 + self.m_z**2))

    @staticmethod
    def from_state(pair: np.ndarray) -> "BlochVector":
        """Bloch vector of a normalized single-qubit state (a, b)."""
        a, b = complex(pair[0]), complex(pair[1])
        return BlochVector(
            m_x=2 * (np.conj(a) * b).real,
            m_y=2 * (np.conj(a) * b).imag,
            m_z=abs(a) ** 2 - abs(b) ** 2,
        )


def single_qubit_state(pair) -> np.ndarray:
    """Validate and return a normalized single-qubit amplitude pair."""
    arr = np.asarray(pair, dtype=np.complex128).reshape(2)
    nrm = np.linalg.norm(arr)
    if abs(nrm - 1.0) > _NORM_TOL:
        raise ValueError(f"local state norm {nrm!r} deviates from 1 by more than {_NORM_TOL}")
    return arr


def product_state(local, N: int | None = None) -> PureState:
    """Tensor product of single-qubit states.

    ``local`` is either a single (a, b) pair replicated over ``N`` sites, or a
    list of per-site pairs (in which case ``N`` defaults to its length).
    Site 1 is the lowest bit of the basis index.
    """
    locs = np.asarray(local, dtype=np.complex128)
    if locs.ndim == 1:
        if N is None:
            raise ValueError("N is required when a single local pair is given")
        pairs = [single_qubit_state(locs)] * N
    else:
        pairs = [single_qubit_state(p) for p in locs]
        if N is not None and N != len(pairs):
            raise ValueError(f"N={N} does not match {len(pairs)} local pairs")
    amps = np.ones(1, dtype=np.complex128)
    for p in pairs:
        # site k is bit k-1: later sites become higher bits via kron order
        amps = np.kron(p, amps)
    return PureState(num_qubits=len(pairs), amplitudes=amps)


def inner(a: PureState, b: PureState) -> complex:
    """Inner product <a|b>."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"qubit count mismatch: {a.num_qubits} vs {b.num_qubits}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def _as_fraction_matrix(psi: PureState, n: int) -> np.ndarray:
    """Reshape amplitudes into a (2^(N-n), 2^n) matrix: row = complement bits."""
    N = psi.num_qubits
    if not 1 <= n <= N:
        raise ValueError(f"fraction size {n} out of range 1..{N}")
    return psi.amplitudes.reshape(1 << (N - n), 1 << n)


def reduced_cross_matrix(a: PureState, b: PureState, n: int) -> np.ndarray:
    """Partial trace of |a><b| over the complement of the n lowest sites.

    Returns the 2^n x 2^n matrix with trace(result) = inner(b, a); Hermitian
    PSD when a is b.
    """
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"qubit count mismatch: {a.num_qubits} vs {b.num_qubits}")
    Ma = _as_fraction_matrix(a, n)
    Mb = _as_fraction_matrix(b, n)
    return Ma.T @ Mb.conj()


def reduced_density_matrix(psi: PureState, n: int) -> np.ndarray:
    """Density matrix of psi reduced to the n lowest sites."""
    return reduced_cross_matrix(psi, psi, n)


def complement_cross_matrix(a: PureState, b: PureState, n: int) -> np.ndarray:
    """Partial trace of |a><b| over the n lowest sites (the fraction itself).

    Returns the 2^(N-n) matrix on the complement; for n = N this is the 1x1
    matrix [[inner(b, a)]].
    """
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"qubit count mismatch: {a.num_qubits} vs {b.num_qubits}")
    if not 1 <= n <= a.num_qubits:
        raise ValueError(f"fraction size {n} out of range 1..{a.num_qubits}")
    Ma = _as_fraction_matrix(a, n)
    Mb = _as_fraction_matrix(b, n)
    return Ma @ Mb.conj().T


# Eigenvalues in [-1e-8, clamp] are round-off and set to zero; anything more
# negative means a broken PSD pipeline and is rejected.
_EIG_CLAMP = 1e-12
_EIG_FLOOR = -1e-8


def von_neumann_entropy(rho: np.ndarray, check_trace: bool = True) -> float:
    """Entropy -tr[rho ln rho] in nats of a Hermitian density matrix."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    tr = np.trace(rho).real
    if check_trace and abs(tr - 1.0) > 1e-6:
        raise ValueError(f"density matrix trace {tr!r} deviates from 1 by more than 1e-6")
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < _EIG_FLOOR:
        raise ValueError(f"density matrix has eigenvalue {evals.min()!r} below {_EIG_FLOOR}")
    p = evals[evals > _EIG_CLAMP]
    if p.size == 0:
        return 0.0
    return float(-np.sum(p * np.log(p)))
