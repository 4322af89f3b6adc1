"""Evaluate, certify and saturate error-trade-off relations for approximate joint measurements."""
from .errors import *  # noqa: F401,F403
from .explorer import (
    Decomposition,
    FrontierPoint,
    constructed_frontier,
    eigen_decomposition,
    mixed_linearity_check,
    mixed_strengthen,
    qubit_example_report,
    random_scan,
)
from .qcore import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    FixedParams,
    Observable,
    QuantumState,
    expectation,
    fixed_params,
    haar_random_state,
    make_state,
    purify,
    random_hermitian,
    std_dev,
    validate_observable,
)
from .relations import RelationKind, RelationVerdict, core_residual, evaluate_relation, saturating_u
from .saturation import SaturationSpec, build_basis, saturating_scheme, weak_values
from .scheme import JointScheme, SchemeStats, build_scheme, scheme_stats

__version__ = "0.1.0"
