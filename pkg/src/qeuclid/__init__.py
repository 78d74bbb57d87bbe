"""Exact verification of the differential geometry of the quantum Euclidean spaces R^N_q."""
from .algebra import AlgebraElement, ExtendedAlgebra, UnsupportedInput
from .expr import ExprError, normalize, parse_expr
from .forms import OneForm, TensorSquare, TwoForm, d, dirac_theta
from .frame import FrameData, build_frame, build_gammas, build_lambdas
from .geometry import Geometry, sigma_tensor
from .report import CheckResult, VerificationReport
from .scalars import ExactField, PoleError, QScalar, SampledField, ScalarContext
from .tensors import build_metric, build_rhat, projector, rhat_inverse
from .verify import RunConfig, run_verify

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement",
    "CheckResult",
    "ExactField",
    "ExprError",
    "ExtendedAlgebra",
    "FrameData",
    "Geometry",
    "OneForm",
    "PoleError",
    "QScalar",
    "RunConfig",
    "SampledField",
    "ScalarContext",
    "TensorSquare",
    "TwoForm",
    "UnsupportedInput",
    "VerificationReport",
    "build_frame",
    "build_gammas",
    "build_lambdas",
    "build_metric",
    "build_rhat",
    "d",
    "dirac_theta",
    "normalize",
    "parse_expr",
    "projector",
    "rhat_inverse",
    "run_verify",
    "sigma_tensor",
]
