"""Time evolution exp(-iHt) via Lanczos-Krylov steps, with a dense oracle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonians import SparseHermitianOperator
from .statevec import PureState

__all__ = ["PropagatorConfig", "evolve", "evolve_dense_oracle", "PropagationError"]


class PropagationError(RuntimeError):
    """Krylov step failed to reach the requested tolerance."""


@dataclass(frozen=True)
class PropagatorConfig:
    krylov_dim: int = 30
    step_dt: float = 0.25
    tol: float = 1e-10
    max_steps: int = 100_000

    def __post_init__(self):
        if self.krylov_dim < 2:
            raise ValueError("krylov_dim must be >= 2")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


def _lanczos_step(H: SparseHermitianOperator, v: np.ndarray, dt: float, m: int):
    """One Krylov step exp(-i H dt) v with full re-orthogonalization.

    Returns (new vector, truncation error estimate).
    """
    dim = v.shape[0]
    m = min(m, dim)
    V = np.empty((m, dim), dtype=np.complex128)
    alphas = np.zeros(m)
    betas = np.zeros(m)  # betas[k] couples V[k] to V[k+1]
    V[0] = v
    k_used = m
    for k in range(m):
        w = H.matvec(V[k])
        alphas[k] = np.vdot(V[k], w).real
        # full re-orthogonalization keeps the basis clean over long chains
        w -= V[: k + 1].T @ (V[: k + 1].conj() @ w)
        w -= V[: k + 1].T @ (V[: k + 1].conj() @ w)
        beta = np.linalg.norm(w)
        if k + 1 == m or beta < 1e-14:
            k_used = k + 1
            betas[k] = beta
            break
        betas[k] = beta
        V[k + 1] = w / beta

    T = np.diag(alphas[:k_used]) + np.diag(betas[: k_used - 1], 1) + np.diag(
        betas[: k_used - 1], -1
    )
    evals, evecs = np.linalg.eigh(T)
    small = evecs @ (np.exp(-1j * dt * evals) * evecs[0].conj())
    out = V[:k_used].T @ small
    # happy-breakdown: exact within the invariant subspace
    err = 0.0 if betas[k_used - 1] < 1e-14 else abs(betas[k_used - 1] * small[-1])
    return out, float(err)


def evolve(
    H: SparseHermitianOperator,
    psi: PureState,
    t: float,
    cfg: PropagatorConfig = PropagatorConfig(),
) -> PureState:
    """exp(-iHt) psi by fixed outer steps with adaptive inner halving."""
    if H.num_qubits != psi.num_qubits:
        raise ValueError("state/operator size mismatch")
    if t == 0.0:
        return psi
    v = psi.amplitudes.copy()
    remaining = abs(t)
    sign = 1.0 if t >= 0 else -1.0
    steps = 0
    while remaining > 1e-15:
        dt = min(cfg.step_dt, remaining)
        w, err = _lanczos_step(H, v, sign * dt, cfg.krylov_dim)
        # halve the substep until the local truncation estimate is in budget
        halvings = 0
        while err > cfg.tol and halvings < 30:
            dt /= 2
            halvings += 1
            w, err = _lanczos_step(H, v, sign * dt, cfg.krylov_dim)
        if err > cfg.tol:
            raise PropagationError(
                f"Krylov step did not converge: error estimate {err:.3e} > tol {cfg.tol:.3e}"
            )
        v = w / np.linalg.norm(w)
        remaining -= dt
        steps += 1
        if steps > cfg.max_steps:
            raise PropagationError(f"exceeded max_steps={cfg.max_steps}")
    return PureState(num_qubits=psi.num_qubits, amplitudes=v)


_ORACLE_LIMIT = 1 << 12


def evolve_dense_oracle(H: SparseHermitianOperator, psi: PureState, t: float) -> PureState:
    """Exact exp(-iHt) psi through full Hermitian diagonalization."""
    if H.num_qubits != psi.num_qubits:
        raise ValueError("state/operator size mismatch")
    if H.dim > _ORACLE_LIMIT:
        raise ValueError(f"dense oracle refused for dim {H.dim} > {_ORACLE_LIMIT}")
    evals, evecs = np.linalg.eigh(H.to_dense())
    coeffs = evecs.conj().T @ psi.amplitudes
    out = evecs @ (np.exp(-1j * t * evals) * coeffs)
    out /= np.linalg.norm(out)
    return PureState(num_qubits=psi.num_qubits, amplitudes=out)
