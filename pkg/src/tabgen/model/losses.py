"""Training objectives: reconstruction, KL, contrastive and sparsity terms.

Graph-valued terms take nodes (or plain arrays, which are wrapped as
constants of a fresh graph) and return a scalar node. Every term is reduced
with a mean over batch rows so the weights beta, alpha and lambda do not
depend on the batch size.
"""

import math
from typing import Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from tabgen.errors import ContractError, ShapeError
from tabgen.model.cvae import LatentDistribution
from tabgen.numerics import Graph, Node, Parameter

NodeLike = Union[Node, np.ndarray, Sequence]


class LossBreakdown(BaseModel):
    """Per-batch (or per-epoch averaged) loss components."""

    model_config = ConfigDict(populate_by_name=True)

    ce: float
    kld: float
    nce: float = 0.0
    l1: float = 0.0
    beta: float = 1.0
    alpha: float = 0.0
    lambda_: float = Field(default=0.0, alias="lambda")
    total: float


class ScheduleConfig(BaseModel):
    """Cyclic ramp: rise over ``ratio`` of each period, then hold at ``max_value``."""

    cycles: int = Field(default=4, ge=1)
    ratio: float = Field(default=0.9, gt=0.0, le=1.0)
    max_value: float = Field(default=1.0, ge=0.0)
    total_epochs: int = Field(default=200, ge=1)

    @model_validator(mode="after")
    def _enough_epochs(self) -> "ScheduleConfig":
        if self.total_epochs < self.cycles:
            raise ValueError(
                f"total_epochs ({self.total_epochs}) must be at least cycles ({self.cycles})"
            )
        return self

    @property
    def period(self) -> int:
        return math.ceil(self.total_epochs / self.cycles)


def _as_node(graph: Optional[Graph], value: NodeLike) -> Node:
    if isinstance(value, Node):
        return value
    return (graph or Graph()).constant(np.asarray(value, dtype=np.float64))


def reconstruction_ce(logits: Sequence[NodeLike], targets) -> Node:
    """
    Softmax cross-entropy per attribute, summed over attributes, mean over rows.

    Args:
        logits: A nodes (or arrays) of shape N x V_a
        targets: N x A category indices

    Returns:
        Scalar node
    """
    if not logits:
        raise ContractError("reconstruction_ce: no attributes")
    first = next((l for l in logits if isinstance(l, Node)), None)
    graph = first.graph if first is not None else Graph()
    nodes = [_as_node(graph, l) for l in logits]
    targets = np.asarray(targets, dtype=np.int64)
    n = nodes[0].shape[0]
    if targets.shape != (n, len(nodes)):
        raise ShapeError(f"targets shape {targets.shape} != ({n}, {len(nodes)})")

    total = None
    for a, node in enumerate(nodes):
        card = node.shape[1]
        column = targets[:, a]
        if column.size and (column.min() < 0 or column.max() >= card):
            raise ContractError(
                f"reconstruction_ce: target outside 0..{card - 1} for attribute {a}"
            )
        onehot = np.zeros((n, card))
        onehot[np.arange(n), column] = 1.0
        term = graph.sum(graph.mul(graph.log_softmax(node), graph.constant(onehot)))
        total = term if total is None else graph.add(total, term)
    return graph.scale(total, -1.0 / n)


def kld_two_normals(mu_p, var_p, mu_q, var_q) -> float:
    """
    KL[p || q] for diagonal Gaussians, summed over dimensions.

    Raises:
        ContractError: If any variance is not positive
    """
    mu_p, var_p, mu_q, var_q = (np.asarray(x, dtype=np.float64) for x in (mu_p, var_p, mu_q, var_q))
    if np.any(var_p <= 0) or np.any(var_q <= 0):
        raise ContractError("kld_two_normals: variances must be positive")
    ratio = var_p / var_q
    return float(0.5 * np.sum((mu_p - mu_q) ** 2 / var_q + ratio - np.log(ratio) - 1.0))


def kld_standard(dist: LatentDistribution) -> Node:
    """KL of the posterior against N(0, I): -0.5 * sum(1 + lv - mu^2 - exp(lv)), mean over rows."""
    graph = dist.mu.graph
    mu, lv = dist.mu, dist.logvar
    inner = graph.add(
        graph.shift(lv, 1.0),
        graph.scale(graph.add(graph.mul(mu, mu), graph.exp(lv)), -1.0),
    )
    return graph.scale(graph.sum(inner), -0.5 / mu.shape[0])


def info_nce(latents: NodeLike, positives: NodeLike, tau: float) -> Node:
    """
    InfoNCE with cosine similarity; row i's positive is row i of ``positives``.

    The denominator for anchor i runs over all N positives (its own included).

    Raises:
        ContractError: If fewer than two rows are given or tau is not positive
    """
    if tau <= 0:
        raise ContractError(f"info_nce: tau must be positive, got {tau}")
    graph = latents.graph if isinstance(latents, Node) else (
        positives.graph if isinstance(positives, Node) else Graph()
    )
    z = _as_node(graph, latents)
    z_pos = _as_node(graph, positives)
    if z.shape != z_pos.shape:
        raise ShapeError(f"info_nce: {z.shape} vs {z_pos.shape}")
    n = z.shape[0]
    if n < 2:
        raise ContractError("info_nce needs at least two rows")
    sims = graph.scale(
        graph.matmul(graph.l2_normalize(z), graph.transpose(graph.l2_normalize(z_pos))), 1.0 / tau
    )
    diag = graph.mul(graph.log_softmax(sims), graph.constant(np.eye(n)))
    return graph.scale(graph.sum(diag), -1.0 / n)


def l1_latent(z: NodeLike) -> Node:
    """Mean over rows of sum |z_j|."""
    node = _as_node(None, z)
    return node.graph.scale(node.graph.l1(node), 1.0 / node.shape[0])


def l1_weights(graph: Graph, params: Sequence[Parameter]) -> Node:
    """Sum of |w| over the given parameters."""
    if not params:
        raise ContractError("l1_weights: no parameters")
    total = None
    for p in params:
        term = graph.l1(graph.param(p))
        total = term if total is None else graph.add(total, term)
    return total


def cyclic_schedule(epoch: int, cfg: ScheduleConfig) -> float:
    """
    Weight at ``epoch``: ``max_value * min(1, t / (ratio * P))`` with
    ``P = ceil(total / cycles)`` and ``t = epoch mod P``.
    """
    if not 0 <= epoch < cfg.total_epochs:
        raise ContractError(f"epoch {epoch} outside 0..{cfg.total_epochs - 1}")
    period = cfg.period
    t = epoch % period
    return cfg.max_value * min(1.0, t / (cfg.ratio * period))


def weighted_total(ce: Node, kld: Node, beta: float, nce: Optional[Node] = None,
                   alpha: float = 0.0, sparsity: Optional[Node] = None,
                   lambda_: float = 0.0) -> Node:
    """Graph version of ce + beta*kld + alpha*nce + lambda*l1; absent terms are skipped."""
    graph = ce.graph
    total = graph.add(ce, graph.scale(kld, beta))
    if nce is not None and alpha != 0.0:
        total = graph.add(total, graph.scale(nce, alpha))
    if sparsity is not None and lambda_ != 0.0:
        total = graph.add(total, graph.scale(sparsity, lambda_))
    return total


def total_loss(ce: float, kld: float, nce: float, l1: float,
               lambda_: float, beta: float, alpha: float) -> LossBreakdown:
    """Combine scalar components into a :class:`LossBreakdown`."""
    total = ce + beta * kld + alpha * nce + lambda_ * l1
    return LossBreakdown(
        ce=ce, kld=kld, nce=nce, l1=l1, beta=beta, alpha=alpha, lambda_=lambda_, total=total
    )
