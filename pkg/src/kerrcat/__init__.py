"""Coherent-state-superposition simulator for weak cross-Kerr cat generation."""

from .css import (
    Branch,
    Ket,
    LayoutMismatchError,
    MixedOperator,
    MixedTerm,
    ModeLayout,
    PhotonMode,
    PureState,
    ZeroNormError,
    fidelity_mixed_pure,
    fidelity_pure,
    global_phase_distance,
    inner_product,
    merge_prune,
    normalize,
    overlap,
    partial_trace_field,
)
from .elements import (
    ZeroProbabilityError,
    apply_bs,
    apply_cross_kerr,
    apply_pbs,
    apply_pol_rotation,
    detector_pattern,
    measure_polarization,
)
from .protocols import (
    CatSpec,
    ProtocolResult,
    approximation_fidelity,
    build_cat,
    run_protocol1,
    run_protocol1_imperfect,
    run_protocol2,
)

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "Ket",
    "LayoutMismatchError",
    "MixedOperator",
    "MixedTerm",
    "ModeLayout",
    "PhotonMode",
    "PureState",
    "ZeroNormError",
    "fidelity_mixed_pure",
    "fidelity_pure",
    "global_phase_distance",
    "inner_product",
    "merge_prune",
    "normalize",
    "overlap",
    "partial_trace_field",
    "ZeroProbabilityError",
    "apply_bs",
    "apply_cross_kerr",
    "apply_pbs",
    "apply_pol_rotation",
    "detector_pattern",
    "measure_polarization",
    "CatSpec",
    "ProtocolResult",
    "approximation_fidelity",
    "build_cat",
    "run_protocol1",
    "run_protocol1_imperfect",
    "run_protocol2",
]
