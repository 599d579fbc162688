"""Sandwiched Rényi divergences, derived entropic quantities, and a randomized
verification harness for their inequalities."""

from .divergences import (
    ONE,
    DivergenceValue,
    classical_renyi,
    nats_to_bits,
    renyi_entropy,
    sandwiched_renyi,
    sandwiched_renyi_trace_form,
    umegaki,
)
from .linalg import (
    NotPSDError,
    gamma_map,
    hermitian_eig,
    holder_conjugate,
    matrix_power,
    schatten_norm,
    singular_values,
    weighted_norm,
)
from .optimize import (
    Ensemble,
    HolevoResult,
    OptimizerConfig,
    OptimizerResult,
    conditional_renyi_entropy,
    holevo_alpha,
    minimax_value,
    mutual_info_dual,
    mutual_info_primal,
    optimize_over_density,
)
from .states import (
    Channel,
    CQState,
    DensityMatrix,
    PureState,
    apply_channel,
    cq_embed,
    depolarizing_channel,
    identity_channel,
    partial_trace,
    partial_trace_channel,
    purify,
    random_channel,
    random_density,
    random_pure,
    tensor,
    tensor_channel,
    unitary_channel,
)

__version__ = "0.1.0"
