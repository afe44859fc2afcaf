"""Desk-scale simulator of redundancy in thermalizing qubit environments."""

__version__ = "0.1.0"

from .branches import (
    BranchedState,
    MICurve,
    classical_dephased_mi,
    dephased_system_entropy,
    evolve_branches,
    from_branches,
    mutual_information,
    mutual_information_curve,
    prepare_broadcast,
    redundancy_number,
    system_density_matrix,
)
from .hamiltonians import (
    AllToAllParams,
    BroadcastSpec,
    IsingParams,
    SparseHermitianOperator,
    build_all_to_all,
    build_broadcast_interaction,
    build_fraction_hamiltonian,
    build_ising_chain,
    product_energy_density,
)
from .ldp import (
    CgfProfile,
    EnergyDistribution,
    RateProfile,
    alpha_star,
    cumulant_generating,
    fraction_energy_distribution,
    legendre,
    plateau_bound_curve,
    rate_function,
)
from .ensembles import ProjectiveEnsemble, pointer_histogram, projective_ensemble
from .propagate import PropagatorConfig, evolve, evolve_dense_oracle
from .statevec import (
    BlochVector,
    PureState,
    inner,
    product_state,
    reduced_cross_matrix,
    von_neumann_entropy,
)
