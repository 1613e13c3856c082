"""Conditional VAE over categorical attributes.

Encoder: one embedding table per attribute plus a condition embedding, all
concatenated ((A+1)*E wide), then ReLU layers of width ceil((A+1)E/2) and
ceil((A+1)E/4), then separate linear heads for mu and log-variance (h wide).
Decoder: z concatenated with the condition embedding (h+E wide), the mirrored
hidden stack, then one linear head per attribute producing V_a logits.
"""

import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator

from tabgen.errors import EncodingError, ShapeError
from tabgen.numerics import Graph, Node, Parameter

LOGVAR_MIN = -10.0
LOGVAR_MAX = 10.0


class ModelDims(BaseModel):
    """Architecture dimensions (batch size is a runtime quantity)."""

    cardinalities: List[int]
    embedding_dim: int = Field(default=32, ge=1)
    latent_dim: int = Field(default=64, ge=1)

    @field_validator("cardinalities")
    @classmethod
    def _at_least_two(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("at least one attribute is required")
        if any(v < 2 for v in value):
            raise ValueError("every attribute needs at least two categories")
        return value

    @property
    def n_attributes(self) -> int:
        return len(self.cardinalities)

    @property
    def encoder_widths(self) -> List[int]:
        """Input width followed by the two hidden widths."""
        width = (self.n_attributes + 1) * self.embedding_dim
        return [width, math.ceil(width / 2), math.ceil(width / 4)]

    @property
    def decoder_widths(self) -> List[int]:
        _, half, quarter = self.encoder_widths
        return [self.latent_dim + self.embedding_dim, quarter, half]


@dataclass
class LatentDistribution:
    """Diagonal Gaussian posterior parameters (graph nodes, N x h)."""

    mu: Node
    logvar: Node


@dataclass
class CvaeOutput:
    """Everything a training step needs from one forward pass."""

    graph: Graph
    logits: List[Node]
    dist: LatentDistribution
    z: Node
    z_pos: Optional[Node] = None


class CvaeModel:
    """Named parameters of the CVAE plus its dimensions."""

    def __init__(self, dims: ModelDims, attribute_names: Optional[List[str]] = None,
                 params: Optional[Dict[str, Parameter]] = None):
        self.dims = dims
        self.attribute_names = attribute_names or [f"a{i}" for i in range(dims.n_attributes)]
        if len(self.attribute_names) != dims.n_attributes:
            raise ShapeError("one attribute name per cardinality is required")
        self.params: Dict[str, Parameter] = params if params is not None else {}
        self.frozen = False

    @classmethod
    def initialize(cls, dims: ModelDims, attribute_names: Optional[List[str]] = None,
                   generator: Optional[np.random.Generator] = None) -> "CvaeModel":
        """
        Fresh model: embeddings ~ N(0, 1), weights ~ U(+-1/sqrt(fan_in)), biases 0.

        Args:
            dims: Architecture dimensions
            attribute_names: Names used to label embedding and head parameters
            generator: Source of randomness

        Returns:
            Initialised model
        """
        generator = generator or np.random.default_rng(0)
        model = cls(dims, attribute_names)
        E, h = dims.embedding_dim, dims.latent_dim

        for name, card in zip(model.attribute_names, dims.cardinalities):
            model._add(f"emb.{name}", generator.standard_normal((card, E)))
        model._add("emb.condition", generator.standard_normal((2, E)))

        enc = dims.encoder_widths
        for i, (fan_in, fan_out) in enumerate(zip(enc, enc[1:])):
            model._linear(f"enc.{i}", fan_in, fan_out, generator)
        model._linear("enc.mu", enc[-1], h, generator)
        model._linear("enc.logvar", enc[-1], h, generator)

        dec = dims.decoder_widths
        for i, (fan_in, fan_out) in enumerate(zip(dec, dec[1:])):
            model._linear(f"dec.{i}", fan_in, fan_out, generator)
        for name, card in zip(model.attribute_names, dims.cardinalities):
            model._linear(f"head.{name}", dec[-1], card, generator)
        return model

    def _add(self, name: str, value: np.ndarray) -> None:
        self.params[name] = Parameter(name, value)

    def _linear(self, prefix: str, fan_in: int, fan_out: int,
                generator: np.random.Generator) -> None:
        bound = 1.0 / math.sqrt(fan_in)
        self._add(f"{prefix}.w", generator.uniform(-bound, bound, size=(fan_in, fan_out)))
        self._add(f"{prefix}.b", np.zeros((1, fan_out)))

    def parameters(self) -> List[Parameter]:
        return list(self.params.values())

    def weight_parameters(self) -> List[Parameter]:
        """Every parameter except biases (target of the L1-on-weights penalty)."""
        return [p for name, p in self.params.items() if not name.endswith(".b")]

    def __getitem__(self, name: str) -> Parameter:
        return self.params[name]

    def __iter__(self) -> Iterator[Parameter]:
        return iter(self.params.values())

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: p.value.copy() for name, p in self.params.items()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        for name, value in state.items():
            if self.params[name].value.shape != value.shape:
                raise ShapeError(
                    f"{name}: expected shape {self.params[name].shape}, got {value.shape}"
                )
            self.params[name].value = np.asarray(value, dtype=np.float64).copy()

    def freeze(self) -> "CvaeModel":
        """Mark the model read-only; frozen models are shared across threads."""
        self.frozen = True
        return self


def _linear(graph: Graph, model: CvaeModel, prefix: str, x: Node) -> Node:
    w = graph.param(model[f"{prefix}.w"])
    b = graph.param(model[f"{prefix}.b"])
    return graph.add(graph.matmul(x, w), b)


def _check_inputs(model: CvaeModel, indices: np.ndarray, conditions: np.ndarray) -> None:
    if indices.ndim != 2 or indices.shape[1] != model.dims.n_attributes:
        raise ShapeError(
            f"expected indices of shape (N, {model.dims.n_attributes}), got {indices.shape}"
        )
    if conditions.shape != (indices.shape[0],):
        raise ShapeError("one condition per row is required")
    if conditions.size and not np.isin(conditions, (0, 1)).all():
        raise EncodingError("conditions must be 0 (non-risk) or 1 (risk)")
    for j, (name, card) in enumerate(zip(model.attribute_names, model.dims.cardinalities)):
        column = indices[:, j]
        if column.size and (column.min() < 0 or column.max() >= card):
            raise EncodingError(f"{name}: index outside 0..{card - 1}")


def encode(model: CvaeModel, indices, conditions,
           graph: Optional[Graph] = None) -> LatentDistribution:
    """
    Posterior parameters for a batch of encoded records.

    Args:
        model: CVAE parameters
        indices: N x A category indices
        conditions: N condition labels (0/1)
        graph: Graph to record into (a new one if omitted)

    Returns:
        LatentDistribution with N x h mu and clamped logvar nodes

    Raises:
        EncodingError: If an index is outside its attribute's cardinality
    """
    graph = graph or Graph()
    indices = np.asarray(indices, dtype=np.int64)
    conditions = np.asarray(conditions, dtype=np.int64)
    _check_inputs(model, indices, conditions)

    parts = [
        graph.gather(graph.param(model[f"emb.{name}"]), indices[:, j])
        for j, name in enumerate(model.attribute_names)
    ]
    parts.append(graph.gather(graph.param(model["emb.condition"]), conditions))
    x = graph.concat(parts)
    for i in range(len(model.dims.encoder_widths) - 1):
        x = graph.relu(_linear(graph, model, f"enc.{i}", x))
    mu = _linear(graph, model, "enc.mu", x)
    logvar = graph.clamp(_linear(graph, model, "enc.logvar", x), LOGVAR_MIN, LOGVAR_MAX)
    return LatentDistribution(mu=mu, logvar=logvar)


def reparameterize(dist: LatentDistribution, eps) -> Node:
    """z = mu + exp(0.5 * logvar) * eps."""
    graph = dist.mu.graph
    eps = np.asarray(eps, dtype=np.float64)
    if eps.shape != dist.mu.shape:
        raise ShapeError(f"eps shape {eps.shape} != latent shape {dist.mu.shape}")
    sigma = graph.exp(graph.scale(dist.logvar, 0.5))
    return graph.add(dist.mu, graph.mul(sigma, graph.constant(eps)))


def decode(model: CvaeModel, z: Node, conditions) -> List[Node]:
    """
    Per-attribute logits for latent codes under a condition.

    Args:
        model: CVAE parameters
        z: N x h latent node
        conditions: N condition labels (0/1)

    Returns:
        A logit nodes, attribute a of shape N x V_a
    """
    graph = z.graph
    conditions = np.asarray(conditions, dtype=np.int64)
    if z.shape[1] != model.dims.latent_dim or conditions.shape != (z.shape[0],):
        raise ShapeError(f"decode: z {z.shape} / conditions {conditions.shape} mismatch")
    cond = graph.gather(graph.param(model["emb.condition"]), conditions)
    x = graph.concat([z, cond])
    for i in range(len(model.dims.decoder_widths) - 1):
        x = graph.relu(_linear(graph, model, f"dec.{i}", x))
    return [_linear(graph, model, f"head.{name}", x) for name in model.attribute_names]


def decode_latents(model: CvaeModel, z: np.ndarray, conditions) -> List[np.ndarray]:
    """Logit arrays for a constant batch of latent vectors (no gradients kept)."""
    graph = Graph()
    return [node.value for node in decode(model, graph.constant(z), conditions)]


def forward(model: CvaeModel, indices, conditions, eps, eps_pos=None,
            graph: Optional[Graph] = None) -> CvaeOutput:
    """
    encode -> reparameterize -> decode, keeping z for the L1 and contrastive terms.

    Args:
        model: CVAE parameters
        indices: N x A category indices
        conditions: N condition labels
        eps: N x h standard-normal noise for z
        eps_pos: Optional second noise draw for the positive view z+
        graph: Graph to record into

    Returns:
        CvaeOutput
    """
    graph = graph or Graph()
    dist = encode(model, indices, conditions, graph)
    z = reparameterize(dist, eps)
    z_pos = reparameterize(dist, eps_pos) if eps_pos is not None else None
    logits = decode(model, z, conditions)
    return CvaeOutput(graph=graph, logits=logits, dist=dist, z=z, z_pos=z_pos)
