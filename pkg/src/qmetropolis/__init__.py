"""Desk-scale simulator for quantum Metropolis sampling.

Modules
-------
linalg            dense Hermitian eigensystems, norms, random test objects
hamiltonians      Pauli-string Hamiltonians, builders, gate decompositions, PE rescaling
phase_estimation  pointer-register phase estimation models and their POVMs
jordan            two-projector normal form and rejection-failure probabilities
walk              the Metropolis walk, its classical reduction and chain driver
channel           one-step channel assembly, spectra and detailed-balance checks
"""

from .channel import (
    ChannelReport,
    DimensionCap,
    NoUnitEigenvalue,
    Superoperator,
    assemble_channel,
    channel_report,
    channel_spectrum,
    contraction_and_error_bound,
    db_fixed_point_lemma_check,
    detailed_balance_residual,
    estimate_eta1,
    gibbs_state,
    gibbs_weights,
    primitivity_check,
)
from .hamiltonians import (
    ExactModeIncommensurate,
    Gate,
    PauliHamiltonian,
    PauliString,
    PERescaling,
    build_heisenberg_pair,
    build_xx_chain,
    circuit_unitary,
    decompose_string_exponential,
    jordan_wigner_hopping,
    rescale_for_pe,
    trotter_cost_estimate,
)
from .jordan import (
    JordanPair,
    NotProjector,
    jordan_normal_form,
    p_fail_bound,
    p_fail_exact,
    simulate_rejection,
)
from .linalg import HermitianEigensystem, NotHermitian, eig_hermitian
from .phase_estimation import (
    PEModel,
    bin_structure,
    median_boost_distribution,
    pe_unitary,
    pointer_distribution,
    povm_operators,
)
from .walk import (
    ChainResult,
    DegenerateBins,
    MetropolisConfig,
    TransitionMatrix,
    UpdateSet,
    acceptance,
    classical_reduction,
    local_pauli_update_set,
    mixing_time_bound,
    pauli_update_set,
    run_chain,
    step_full,
    w_gate,
    w_theta,
)

__version__ = "0.1.0"
