"""Central finite-difference verification of analytic gradients."""

import logging
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from tabgen.errors import ContractError
from tabgen.numerics.graph import Graph, Node, Parameter

logger = logging.getLogger(__name__)


class GradCheckReport(BaseModel):
    """Outcome of a finite-difference check."""

    model_config = ConfigDict(populate_by_name=True)

    max_rel_err: float
    passed: bool = Field(alias="pass")
    checked: int = 0
    worst: Optional[str] = None  # "<param>[<flat index>]" of the largest error


def relative_error(analytic: float, numeric: float) -> float:
    """``|a - b| / max(|a|, |b|, 1e-8)``."""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)


def finite_diff_check(
    graph: Graph,
    params: Sequence[Parameter],
    h: float = 1e-5,
    tol: float = 1e-4,
    root: Optional[Node] = None,
    max_coords: Optional[int] = None,
    seed: int = 0,
) -> GradCheckReport:
    """
    Compare backprop gradients with central differences coordinate-wise.

    Args:
        graph: Graph whose root is a scalar loss
        params: Parameters to perturb
        h: Finite-difference step
        tol: Largest accepted relative error
        root: Scalar node to check (defaults to the last node)
        max_coords: If set, check at most this many random coordinates per parameter
        seed: Seed for coordinate sampling

    Returns:
        GradCheckReport with the maximum relative error and pass flag

    Raises:
        ContractError: If h is not positive or root is not scalar
    """
    if h <= 0:
        raise ContractError(f"finite_diff_check: h must be positive, got {h}")
    root = root if root is not None else graph.nodes[-1]
    graph.forward()
    analytic = {name: grad.copy() for name, grad in graph.backward(root).items()}
    picker = np.random.default_rng(seed)

    max_err = 0.0
    worst = None
    checked = 0
    for param in params:
        grad = analytic.get(param.name, np.zeros_like(param.value))
        flat = param.value.reshape(-1)
        coords = np.arange(flat.size)
        if max_coords is not None and flat.size > max_coords:
            coords = np.sort(picker.choice(flat.size, size=max_coords, replace=False))
        for i in coords:
            original = flat[i]
            flat[i] = original + h
            graph.forward()
            plus = root.item()
            flat[i] = original - h
            graph.forward()
            minus = root.item()
            flat[i] = original
            numeric = (plus - minus) / (2.0 * h)
            err = relative_error(float(grad.reshape(-1)[i]), numeric)
            checked += 1
            if err > max_err:
                max_err = err
                worst = f"{param.name}[{int(i)}]"
    graph.forward()

    report = GradCheckReport(
        max_rel_err=max_err, passed=max_err <= tol, checked=checked, worst=worst
    )
    logger.debug("Gradient check: %s", report)
    return report
