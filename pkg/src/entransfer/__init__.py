"""Entanglement transfer from a two-mode squeezed field to pairs of qubits."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    EntransferError,
    LeakageError,
    StateError,
    TruncationError,
)
from .fock import (
    DensityOperator,
    HilbertSpec,
    PureState,
    annihilation,
    apply_operator,
    beam_splitter,
    creation,
    evolve,
    number_operator,
    partial_trace,
    partial_transpose,
    permute_subsystems,
    tensor,
)
from .squeezing import (
    SqueezeParams,
    assemble_cavity_state_closed_form,
    auto_n_max,
    cavity_coefficient,
    cavity_state,
    minimal_n_max,
    prepare_cavity_state_oracle,
    truncation_weight,
    two_mode_squeezed,
)
from .qubits import QubitPairMatrix
from .measures import (
    CovarianceMatrix,
    boundary_curve,
    boundary_negativity,
    covariance_matrix,
    distance_to_boundary,
    lambda_minus_closed_form,
    linear_entropy,
    mems_state,
    negativity,
    negativity_from_elements,
    simon_delta,
    werner_state,
)
from .dynamics import (
    InteractionSchedule,
    apply_cavity_decay,
    closed_form_elements,
    field_after_pair,
    interact_pair,
    jc_unitary,
    max_over_tau2,
    pair_state_from_field,
    reduced_qubit_state,
    residual_field_state,
    run_schedule,
    sequential_pair,
    staggered_interaction,
)
