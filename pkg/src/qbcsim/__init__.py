"""Simulator and verifier for a qudit bit-commitment protocol whose
committer is restricted to separable operations."""

from .qudits import (
    Bipartition,
    DensityMatrix,
    RegisterShape,
    SchmidtData,
    StateVector,
    basis_vector,
    fidelity,
    fourier_gate,
    partial_trace,
    reduced_state,
    schmidt_decompose,
    tensor,
)
from .protocol import (
    CommitmentRecord,
    ProtocolParams,
    commit,
    open_verify,
    post_commit_schmidt,
    post_commit_state,
    resource_branch,
    resource_state,
)
from .channels import (
    FirstFactorChannel,
    KrausChannel,
    SeparableChannel,
    averaged_measurement_channel,
    lift,
    measurement_channel,
    random_separable_channel,
)
from .adversary import (
    AttackInstance,
    AttackResult,
    OptimizerConfig,
    analytic_bounds,
    optimize_separable_attack,
    protocol_instance,
    random_instance,
    separable_cheat_bound,
    switch_probability,
    unrestricted_attack,
)
from .harness import Report, RunConfig, emit_report, run_suite

__version__ = "0.1.0"
