"""Branched states and system-fraction mutual information.

A branched state is sum_a c_a |a>_S |Phi_a>_E with the system not evolving.
All entropies are von Neumann in nats; fractions are the first n environment
sites. For n > N/2 every entropy is computed on the complement side (the
global S+E state is pure), so dense diagonalizations never exceed dimension
d * 2^(N/2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hamiltonians import BroadcastSpec, IsingParams, SparseHermitianOperator, build_fraction_hamiltonian
from .propagate import PropagatorConfig, evolve
from .statevec import (
    PureState,
    complement_cross_matrix,
    inner,
    product_state,
    reduced_cross_matrix,
    von_neumann_entropy,
)

__all__ = [
    "BranchedState",
    "MICurve",
    "prepare_broadcast",
    "from_branches",
    "evolve_branches",
    "system_density_matrix",
    "mutual_information",
    "mutual_information_curve",
    "classical_dephased_mi",
    "dephased_system_entropy",
    "redundancy_number",
]

_MI_FLOOR = -1e-8


@dataclass(frozen=True)
class BranchedState:
    """Coefficients {c_a} and one environment state per system basis label."""

    coefficients: np.ndarray
    branches: tuple

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.complex128)
        if c.ndim != 1 or c.size < 2:
            raise ValueError("need at least two branch coefficients")
        if abs(np.sum(np.abs(c) ** 2) - 1.0) > 1e-10:
            raise ValueError("branch coefficients are not normalized")
        branches = tuple(self.branches)
        if len(branches) != c.size:
            raise ValueError(f"{c.size} coefficients but {len(branches)} branches")
        sizes = {b.num_qubits for b in branches}
        if len(sizes) != 1:
            raise ValueError(f"branches live on different environment sizes: {sizes}")
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "branches", branches)

    @property
    def system_dim(self) -> int:
        return self.coefficients.size

    @property
    def num_env_qubits(self) -> int:
        return self.branches[0].num_qubits


@dataclass(frozen=True)
class MICurve:
    """I(F,S) in nats versus fraction size."""

    sizes: tuple
    values: tuple
    meta: dict = field(default_factory=dict)

    def value_at(self, n: int) -> float:
        return self.values[self.sizes.index(n)]


def rotated_plus_qubit(axis, theta: float) -> np.ndarray:
    """exp(i theta axis.sigma) |+> as an explicit amplitude pair."""
    m = np.asarray(axis.as_array() if hasattr(axis, "as_array") else axis, dtype=float)
    # exp(i theta n.sigma) = cos(theta) I + i sin(theta) n.sigma
    X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    Y = np.array([[0, -1j], [1j, 0]])
    Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    U = np.cos(theta) * np.eye(2) + 1j * np.sin(theta) * (m[0] * X + m[1] * Y + m[2] * Z)
    plus = np.array([1, 1], dtype=np.complex128) / np.sqrt(2)
    return U @ plus


def prepare_broadcast(spec: BroadcastSpec, N: int) -> BranchedState:
    """Branched state after the broadcasting interaction on |+>_S |+>^N.

    Branch a is the product state (exp(i lambda_t0 s_a axis.sigma)|+>)^N with
    s_a = (-1)^a; |0>_S sits in the +1 eigenspace of Z_S.
    """
    if spec.system_dim != 2:
        raise ValueError(
            "prepare_broadcast models a qubit system; build d > 2 states with from_branches"
        )
    branches = []
    for a in range(2):
        s = 1.0 if a == 0 else -1.0
        pair = rotated_plus_qubit(spec.axis, spec.lambda_t0 * s)
        branches.append(product_state(pair, N))
    return BranchedState(coefficients=np.asarray(spec.coefficients), branches=tuple(branches))


def from_branches(coefficients, branches) -> BranchedState:
    """Explicit construction from coefficients and environment states."""
    return BranchedState(coefficients=np.asarray(coefficients, dtype=np.complex128),
                        branches=tuple(branches))


def evolve_branches(
    bs: BranchedState,
    H: SparseHermitianOperator,
    t: float,
    cfg: PropagatorConfig = PropagatorConfig(),
) -> BranchedState:
    """Evolve every branch by the same environment unitary exp(-iHt)."""
    if H.num_qubits != bs.num_env_qubits:
        raise ValueError("Hamiltonian acts on the wrong number of environment qubits")
    evolved = tuple(evolve(H, b, t, cfg) for b in bs.branches)
    return BranchedState(coefficients=bs.coefficients, branches=evolved)


def system_density_matrix(bs: BranchedState) -> np.ndarray:
    """rho_S with entries c_a c_b^* <Phi_b|Phi_a>."""
    d = bs.system_dim
    G = np.empty((d, d), dtype=np.complex128)
    for a in range(d):
        for b in range(a, d):
            G[a, b] = inner(bs.branches[b], bs.branches[a])
            G[b, a] = np.conj(G[a, b])
    c = bs.coefficients
    return np.outer(c, c.conj()) * G


def system_entropy(bs: BranchedState) -> float:
    return von_neumann_entropy(system_density_matrix(bs))


def _block_matrix(bs: BranchedState, cross) -> np.ndarray:
    """Assemble sum_ab c_a c_b^* |a><b| (x) cross(a, b)."""
    d = bs.system_dim
    c = bs.coefficients
    sub = cross(0, 0)
    D = sub.shape[0]
    out = np.empty((d * D, d * D), dtype=np.complex128)
    for a in range(d):
        for b in range(d):
            if b < a:
                blk = out[b * D : (b + 1) * D, a * D : (a + 1) * D].conj().T
            else:
                blk = (c[a] * np.conj(c[b])) * (cross(a, b) if (a, b) != (0, 0) else sub)
            out[a * D : (a + 1) * D, b * D : (b + 1) * D] = blk
    return out


def _fraction_entropies(bs: BranchedState, n: int) -> tuple[float, float]:
    """(H(F), H(FS)) for the n-site fraction, computed on the cheaper side."""
    N = bs.num_env_qubits
    c2 = np.abs(bs.coefficients) ** 2
    if n <= N // 2:
        rho_F = sum(
            w * reduced_cross_matrix(b, b, n) for w, b in zip(c2, bs.branches)
        )
        h_F = von_neumann_entropy(rho_F)
        rho_FS = _block_matrix(bs, lambda a, b: reduced_cross_matrix(bs.branches[a], bs.branches[b], n))
        h_FS = von_neumann_entropy(rho_FS)
    else:
        # purity of the global S+E state: H(F) = H(S, E\F), H(FS) = H(E\F)
        rho_SEc = _block_matrix(
            bs, lambda a, b: complement_cross_matrix(bs.branches[a], bs.branches[b], n)
        )
        h_F = von_neumann_entropy(rho_SEc)
        rho_Ec = sum(
            w * complement_cross_matrix(b, b, n) for w, b in zip(c2, bs.branches)
        )
        h_FS = von_neumann_entropy(rho_Ec)
    return h_F, h_FS


def mutual_information(bs: BranchedState, n: int) -> float:
    """I(F,S) = H(F) + H(S) - H(FS) in nats, clamped to [0, 2 ln d]."""
    N = bs.num_env_qubits
    if not 1 <= n <= N:
        raise ValueError(f"fraction size {n} out of range 1..{N}")
    h_S = system_entropy(bs)
    h_F, h_FS = _fraction_entropies(bs, n)
    val = h_F + h_S - h_FS
    if val < _MI_FLOOR:
        raise ValueError(f"mutual information {val} is negative beyond round-off")
    cap = 2.0 * np.log(bs.system_dim)
    return float(min(max(val, 0.0), cap))


def mutual_information_curve(bs: BranchedState, sizes, meta: dict | None = None) -> MICurve:
    sizes = tuple(int(n) for n in sizes)
    values = tuple(mutual_information(bs, n) for n in sizes)
    return MICurve(sizes=sizes, values=values, meta=dict(meta or {}))


def _fraction_energy_weights(
    branch: PureState, p: IsingParams, n: int, eig=None
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of H_F and weights <E_mu| rho_aa |E_mu> for one branch."""
    if n > 14:
        raise ValueError(f"dense H_F diagonalization refused for n = {n} > 14")
    if eig is None:
        H_F = build_fraction_hamiltonian(p, n)
        evals, evecs = np.linalg.eigh(H_F.to_dense())
    else:
        evals, evecs = eig
    rho = reduced_cross_matrix(branch, branch, n)
    weights = np.einsum("im,ij,jm->m", evecs.conj(), rho, evecs, optimize=True).real
    weights = np.clip(weights, 0.0, None)
    weights /= weights.sum()
    return evals, weights


def fraction_hamiltonian_eig(p: IsingParams, n: int):
    """Eigendecomposition of H_F, shareable across branches."""
    if n > 14:
        raise ValueError(f"dense H_F diagonalization refused for n = {n} > 14")
    H_F = build_fraction_hamiltonian(p, n)
    return np.linalg.eigh(H_F.to_dense())


def classical_dephased_mi(bs: BranchedState, n: int, p: IsingParams, eig=None) -> float:
    """Shannon MI between the branch label and the H_F eigenvalue index.

    This is the mutual information left after dephasing S in its basis and F
    in the H_F eigenbasis; a lower bound on the quantum I(F,S).
    """
    if eig is None:
        eig = fraction_hamiltonian_eig(p, n)
    c2 = np.abs(bs.coefficients) ** 2
    cond = np.stack(
        [_fraction_energy_weights(b, p, n, eig=eig)[1] for b in bs.branches]
    )  # q_a(mu), rows sum to 1
    joint = c2[:, None] * cond
    marg = joint.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(joint > 0, joint / (c2[:, None] * marg[None, :]), 1.0)
        mi = float(np.sum(joint * np.log(ratio)))
    return max(mi, 0.0)


def dephased_system_entropy(bs: BranchedState) -> float:
    """H'(S) = -sum |c_a|^2 ln |c_a|^2, an upper bound on H(S)."""
    c2 = np.abs(bs.coefficients) ** 2
    c2 = c2[c2 > 0]
    return float(-np.sum(c2 * np.log(c2)))


def redundancy_number(curve: MICurve, H_S: float, delta: float) -> float:
    """N / n_min with n_min the smallest fraction holding H_S - delta nats."""
    if not curve.sizes:
        raise ValueError("empty mutual-information curve")
    if not 0 < delta < H_S:
        raise ValueError(f"delta must be in (0, H_S={H_S}), got {delta}")
    N = max(curve.sizes)
    qualifying = [n for n, v in zip(curve.sizes, curve.values) if v >= H_S - delta]
    if not qualifying:
        return 0.0
    return N / min(qualifying)
