"""Distances, curvature statistics and multiparameter filtrations for
functional data on finite metric domains."""

from .core import (
    MMField,
    MetricField,
    Coupling,
    Relation,
    TargetSpace,
    ValidationReport,
    amalgamate,
    coproduct,
    distortion,
    hausdorff,
    hausdorff_in_target,
    lipschitz_rescale_factor,
    validate_field,
)
from .gh import GHResult, gh_distance, gh_feasible
from .gwp import (
    GPResult,
    GWObjectiveTerms,
    GWResult,
    gp_distance,
    gw_embedding_upper,
    gw_inf_from_sequences,
    gw_objective,
    gw_solve,
)
from .io import field_from_dict, field_to_dict, load_field, save_field
from .transport import (
    InfeasibleTransportError,
    ProkhorovResult,
    max_mass_on,
    prokhorov,
    wasserstein_inf,
    wasserstein_p,
)

__version__ = "0.1.0"
