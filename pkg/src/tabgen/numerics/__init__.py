"""Dense float64 tensors with reverse-mode automatic differentiation."""

from tabgen.numerics.graph import (
    Graph,
    Node,
    Parameter,
    Tensor,
    as_tensor,
    backward,
    forward,
)
from tabgen.numerics.gradcheck import GradCheckReport, finite_diff_check, relative_error

__all__ = [
    "Graph",
    "Node",
    "Parameter",
    "Tensor",
    "as_tensor",
    "backward",
    "forward",
    "GradCheckReport",
    "finite_diff_check",
    "relative_error",
]
