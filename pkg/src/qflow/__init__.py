"""Temporal versus flow evaluation of rank-one measurement chains on dense pure states."""

from .coecke import (
    Box,
    FlowPath,
    Scenario,
    extract_flow,
    flow_apply,
    temporal_apply,
    universality_probe,
    verify_theorem,
)
from .statevec import (
    FactorSpace,
    MultiState,
    apply_projector,
    apply_rank_one,
    inner,
    measure_in_basis,
    partial_inner,
    split_across_cut,
    tensor,
)

__version__ = "0.1.0"
