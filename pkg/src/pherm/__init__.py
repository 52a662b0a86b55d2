"""pherm: pseudohermitian geometry of real hypersurfaces in Kahler manifolds."""

__version__ = "0.1.0"

from .brieskorn import BrieskornLink, link_sectional, sample_link, scan, tangent_frame, weights
from .catalog import AmbientMetric, builtin_family, parse_metric, start_map_for
from .curvature import (
    CONVEX_TOL,
    HESSIAN_TOL,
    analyze,
    bound_residual,
    lambda1_report,
    ref_ricci,
    ref_scalar,
    ref_sectional,
    reference_tensor,
    sectional_curvature,
    theta_average,
)
from .expr import (
    DefiningFunction,
    EvalDomainError,
    NonRealExpressionError,
    ParseError,
    defining_function,
)
from .jets import Jet3, fd_check, jet1, jet3
from .secondform import (
    d_operator,
    raised_gradient,
    second_form,
    takagi,
    torsion_matrix,
    torsion_of,
    torsion_sup,
)
from .surface import (
    NotStrictlyPseudoconvexError,
    ProjectionError,
    SurfaceFrame,
    behnke_peschl,
    frame_at,
    project_to_surface,
    sample_directions,
    sample_surface,
)
from .webster3 import (
    StructuralResidualError,
    TW3State,
    c0_form,
    c0_min,
    cross_validate,
    structural_residual,
    tw_direct,
)
