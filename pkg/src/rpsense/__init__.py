"""Radical-pair spin dynamics with singlet-triplet dephasing, Wigner-Yanase
S-T coherence, reaction-yield uncertainty, and receptor-ligand sensing bounds.
"""

from .coherence import (
    CoherenceRecord,
    basis_wy_coherence,
    matrix_sqrt_psd,
    qubit_l1_example,
    reaction_averaged_coherence,
    st_coherence,
    wy_skew_information,
)
from .dynamics import (
    PropagationError,
    TimeGrid,
    Trajectory,
    YieldStats,
    propagate,
    singlet_yield,
    yield_derivative,
    yield_uncertainty,
)
from .montecarlo import (
    RunResult,
    SampleSpec,
    SweepResult,
    envelope_coefficient,
    run_one,
    sample_model,
    sweep,
    verify_bound,
)
from .spinmodel import (
    NuclearSpec,
    RadicalPairModel,
    Site,
    build_hamiltonian,
    build_singlet_projector,
    build_spin_operators,
    initial_state,
    load_model,
)
from .transduction import (
    ReceptorSystem,
    SensingPoint,
    TransductionReport,
    classical_noise,
    coherence_bounds,
    complex_shift,
    ligand_shift,
    optimal_design,
    quantum_ligand_noise,
    receptor_lower_bound,
    sql_sensitivity,
    steady_state_complexes,
)

__version__ = "0.1.0"
