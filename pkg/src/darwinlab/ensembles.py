"""Projective ensembles from computational-basis environment measurements."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .branches import BranchedState, system_density_matrix

__all__ = ["ProjectiveEnsemble", "projective_ensemble", "pointer_histogram"]

_EXHAUSTIVE_LIMIT = 24
_PROB_FLOOR = 1e-28


@dataclass(frozen=True)
class ProjectiveEnsemble:
    """Conditional system states and their weights.

    probabilities: shape (M,); states: shape (M, d), rows normalized.
    In exhaustive mode the weights are Born probabilities summing to 1; in
    sampled mode each drawn outcome carries weight 1/count.
    """

    probabilities: np.ndarray
    states: np.ndarray
    mode: str

    def mixture(self) -> np.ndarray:
        """sum_z p_z |psi_z><psi_z|; equals rho_S in exhaustive mode."""
        return np.einsum("z,za,zb->ab", self.probabilities, self.states, self.states.conj())


def _conditional_states(bs: BranchedState) -> tuple[np.ndarray, np.ndarray]:
    """Born probabilities and normalized conditional states for all outcomes."""
    B = np.stack([b.amplitudes for b in bs.branches])  # (d, 2^N)
    V = bs.coefficients[:, None] * B
    probs = np.sum(np.abs(V) ** 2, axis=0)
    return probs, V


def projective_ensemble(
    bs: BranchedState,
    mode: str = "exhaustive",
    count: int = 0,
    seed: int = 0,
) -> ProjectiveEnsemble:
    """Measure every environment qubit in the computational basis.

    exhaustive: enumerate all 2^N outcomes, dropping zero-probability ones.
    sampled: draw ``count`` outcomes from the Born distribution with ``seed``.
    """
    N = bs.num_env_qubits
    probs, V = _conditional_states(bs)
    if mode == "exhaustive":
        if N > _EXHAUSTIVE_LIMIT:
            raise ValueError(
                f"exhaustive enumeration refused for N = {N} > {_EXHAUSTIVE_LIMIT}"
            )
        keep = probs > _PROB_FLOOR
        p = probs[keep]
        states = (V[:, keep] / np.sqrt(p)[None, :]).T
        return ProjectiveEnsemble(probabilities=p, states=states, mode="exhaustive")
    if mode == "sampled":
        if count < 1:
            raise ValueError("sampled mode needs count >= 1")
        total = probs.sum()
        if total <= 0:
            raise ValueError("state has no measurable outcomes")
        rng = np.random.default_rng(seed)
        draws = rng.choice(probs.size, size=count, p=probs / total)
        p_draw = probs[draws]
        states = (V[:, draws] / np.sqrt(p_draw)[None, :]).T
        weights = np.full(count, 1.0 / count)
        return ProjectiveEnsemble(probabilities=weights, states=states, mode="sampled")
    raise ValueError(f"unknown ensemble mode {mode!r}")


def pointer_histogram(ens: ProjectiveEnsemble, bins: int = 64):
    """Weighted histogram of <psi|Z_S|psi> over [-1, 1]; requires d = 2.

    Returns (edges, mass) with len(mass) = bins and sum(mass) = 1.
    """
    if ens.states.shape[1] != 2:
        raise ValueError("pointer histogram is defined for a qubit system only")
    z = np.abs(ens.states[:, 0]) ** 2 - np.abs(ens.states[:, 1]) ** 2
    z = np.clip(z, -1.0, 1.0)
    edges = np.linspace(-1.0, 1.0, bins + 1)
    mass, _ = np.histogram(z, bins=edges, weights=ens.probabilities)
    total = mass.sum()
    if total > 0:
        mass = mass / total
    return edges, mass


def mixture_matches_system(ens: ProjectiveEnsemble, bs: BranchedState, atol: float = 1e-8) -> bool:
    """Exhaustive-mode sanity check: sum p |psi><psi| == rho_S entrywise."""
    return bool(np.allclose(ens.mixture(), system_density_matrix(bs), atol=atol))
