"""Adam optimizer."""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from tabgen.errors import ContractError, ShapeError
from tabgen.numerics import Parameter

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


@dataclass
class AdamState:
    """First and second moment estimates keyed by parameter name."""

    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray], state: AdamState,
              lr: float, t: int) -> Dict[str, np.ndarray]:
    """
    One bias-corrected Adam update.

    Args:
        params: Current values by name
        grads: Gradients by name (same shapes)
        state: Moment estimates, updated in place
        lr: Learning rate
        t: 1-based step counter

    Returns:
        New parameter values by name
    """
    if t < 1:
        raise ContractError(f"adam_step: t must be >= 1, got {t}")
    updated = {}
    for name, value in params.items():
        g = grads[name]
        m = state.m.setdefault(name, np.zeros_like(value))
        v = state.v.setdefault(name, np.zeros_like(value))
        if g.shape != value.shape or m.shape != value.shape:
            raise ShapeError(f"adam_step: shape mismatch for {name}")
        m = BETA1 * m + (1.0 - BETA1) * g
        v = BETA2 * v + (1.0 - BETA2) * g * g
        state.m[name], state.v[name] = m, v
        m_hat = m / (1.0 - BETA1 ** t)
        v_hat = v / (1.0 - BETA2 ** t)
        updated[name] = value - lr * m_hat / (np.sqrt(v_hat) + EPSILON)
    return updated


class Adam:
    """Applies :func:`adam_step` to a fixed list of parameters."""

    def __init__(self, params: Sequence[Parameter], lr: float = 1e-3):
        self.params: List[Parameter] = list(params)
        self.lr = lr
        self.state = AdamState()
        self.t = 0

    def step(self) -> None:
        self.t += 1
        new = adam_step(
            {p.name: p.value for p in self.params},
            {p.name: p.grad for p in self.params},
            self.state,
            self.lr,
            self.t,
        )
        for p in self.params:
            p.value = new[p.name]

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()
