"""Numerical laboratory for free Banach-lattice norms over finite-dimensional
normed spaces: certified certificate values, explicit upper bounds for
suprema of families, and exact finite witnesses of the limit phenomena."""

from .errors import (
    BudgetExceededError,
    ComputationError,
    DimensionMismatchError,
    FblLabError,
    LPInfeasibleError,
    ValidationError,
)
from .spaces import (
    Functional,
    Space,
    direct_sum,
    dual_norm,
    primal_norm,
    space_from_dict,
    sphere_net,
    summing_constraint,
    summing_constraint_detail,
)
from .homfun import (
    DirectedFamily,
    FunctionFn,
    Generator,
    HomFn,
    LatticeExpr,
    MaxFn,
    ZeroFn,
    absval,
    add,
    delta,
    directify,
    evaluate,
    join,
    lipschitz_estimate,
    meet,
    parse_expr,
    pointwise_sup,
    random_expression,
    scale,
    to_string,
)
from .fblnorm import (
    Budget,
    Certificate,
    NormEscalation,
    ProbeResult,
    SparsifiedCertificate,
    fbl_norm,
    fbl_norm_k,
    lambda_probe,
    oracle_norm_net,
    sparsify_certificate,
)
from .nakano import (
    CoverFn,
    CoverResult,
    GPhiFn,
    MajorantResult,
    NakanoReport,
    PhiVector,
    TruncatedGPhi,
    combine_direct_sum,
    cover_upper_bound,
    g_phi,
    g_phi_norm,
    maximal_majorant,
    strong_nakano_report,
    truncate_g_phi,
)
from .witnesses import (
    C0Demo,
    DyadicModel,
    LimitCheck,
    c0_summing_demo,
    l1_dyadic_family,
    l1_limit_check,
)

__version__ = "0.1.0"

__all__ = [
    "Budget",
    "BudgetExceededError",
    "C0Demo",
    "Certificate",
    "ComputationError",
    "CoverFn",
    "CoverResult",
    "DimensionMismatchError",
    "DirectedFamily",
    "DyadicModel",
    "FblLabError",
    "FunctionFn",
    "Functional",
    "GPhiFn",
    "Generator",
    "HomFn",
    "LPInfeasibleError",
    "LatticeExpr",
    "LimitCheck",
    "MajorantResult",
    "MaxFn",
    "NakanoReport",
    "NormEscalation",
    "PhiVector",
    "ProbeResult",
    "Space",
    "SparsifiedCertificate",
    "TruncatedGPhi",
    "ValidationError",
    "ZeroFn",
    "absval",
    "add",
    "c0_summing_demo",
    "combine_direct_sum",
    "cover_upper_bound",
    "delta",
    "direct_sum",
    "directify",
    "dual_norm",
    "evaluate",
    "fbl_norm",
    "fbl_norm_k",
    "g_phi",
    "g_phi_norm",
    "join",
    "l1_dyadic_family",
    "l1_limit_check",
    "lambda_probe",
    "lipschitz_estimate",
    "maximal_majorant",
    "meet",
    "oracle_norm_net",
    "parse_expr",
    "pointwise_sup",
    "primal_norm",
    "random_expression",
    "scale",
    "space_from_dict",
    "sparsify_certificate",
    "sphere_net",
    "strong_nakano_report",
    "summing_constraint",
    "summing_constraint_detail",
    "to_string",
    "truncate_g_phi",
]
