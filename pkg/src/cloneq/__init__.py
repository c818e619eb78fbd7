"""Cloning-based incompatibility of quantum observables.

Simulates symmetric 1->2 quantum cloning machines, optimises the cloning
basis for the eigenstate ensemble of a set of observables, and reports the
optimal average cloning fidelity ``F_opt`` and ``Q_c = 1 - F_opt``.
"""
from .ensembles import (
    EigenstateEnsemble,
    ObservableSet,
    ParticipationReport,
    eigenstate_ensemble,
    is_mutually_unbiased,
    load_observable_set,
    mub_family,
    participation,
)
from .errors import *  # noqa: F401,F403
from .optimal import (
    BasisOptConfig,
    CloneReport,
    fopt_mub,
    g_function,
    mr_fidelity_bounds,
    optimal_cloning_fidelity,
    optimize_basis,
    q_optimal,
    qc_upper_bound,
    sweep,
)
from .qcm import (
    CloneOutput,
    CloneParams,
    average_cloning_fidelity,
    clone_output_closed,
    clone_output_oracle,
    params_from_q,
    universal_params,
)
from .qmath import (
    OrthonormalBasis,
    haar_unitary,
    hermitian_eigensystem,
    partial_trace,
    state_fidelity,
)
from .qubit import BlochPair, QubitCloneSolution, bloch_to_observable, qubit_A_profile, qubit_optimal_cloner

__version__ = "0.1.0"
