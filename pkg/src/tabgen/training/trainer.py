"""Mini-batch training loop with cyclic annealing and early stopping."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from tabgen.data.batching import batch_bounds, batches
from tabgen.data.dataset import Dataset
from tabgen.errors import ContractError, InsufficientDataError, NumericError
from tabgen.model.cvae import CvaeModel, ModelDims, forward
from tabgen.model.losses import (
    LossBreakdown,
    info_nce,
    kld_standard,
    l1_latent,
    l1_weights,
    reconstruction_ce,
    total_loss,
    weighted_total,
)
from tabgen.numerics import Graph, Node
from tabgen.sampling.bank import build_bank
from tabgen.seeding import rng
from tabgen.training.checkpoint import Checkpoint
from tabgen.training.config import TrainingConfig
from tabgen.training.optim import Adam

logger = logging.getLogger(__name__)


class TrainingHistory(BaseModel):
    """Per-epoch loss components and the early-stopping outcome."""

    epochs: List[LossBreakdown] = Field(default_factory=list)
    monitored: List[float] = Field(default_factory=list)
    stopped_early: bool = False
    best_epoch: int = 0

    @property
    def best_loss(self) -> float:
        return self.monitored[self.best_epoch] if self.monitored else float("inf")


@dataclass
class LossGraph:
    """Scalar loss node plus its component nodes for one batch."""

    graph: Graph
    total: Node
    ce: Node
    kld: Node
    nce: Optional[Node]
    sparsity: Optional[Node]
    beta: float
    alpha: float
    lambda_: float

    def breakdown(self) -> LossBreakdown:
        return total_loss(
            ce=self.ce.item(),
            kld=self.kld.item(),
            nce=self.nce.item() if self.nce is not None else 0.0,
            l1=self.sparsity.item() if self.sparsity is not None else 0.0,
            lambda_=self.lambda_,
            beta=self.beta,
            alpha=self.alpha,
        )


def build_loss(model: CvaeModel, config: TrainingConfig, indices, conditions, eps,
               eps_pos=None, beta: float = 1.0, alpha: Optional[float] = None) -> LossGraph:
    """
    Record the full objective ce + beta*kld + alpha*nce + lambda*l1 for one batch.

    The contrastive term is skipped (and recorded as 0) for SCVAE, the
    sparsity term for CCVAE. With ``l1_on_weights`` the sparsity term is the
    L1 norm of all non-bias parameters instead of the latent codes.
    """
    alpha = config.alpha if alpha is None else alpha
    contrastive = config.contrastive and alpha != 0.0
    if contrastive and eps_pos is None:
        raise ContractError("build_loss: the contrastive term needs a second noise draw")
    out = forward(model, indices, conditions, eps, eps_pos if contrastive else None)
    graph = out.graph

    ce = reconstruction_ce(out.logits, indices)
    kld = kld_standard(out.dist)
    nce = info_nce(out.z, out.z_pos, config.tau) if contrastive else None
    sparsity = None
    if config.lambda_ != 0.0:
        if config.l1_on_weights:
            sparsity = l1_weights(graph, model.weight_parameters())
        else:
            sparsity = l1_latent(out.z)
    total = weighted_total(ce, kld, beta, nce, alpha, sparsity, config.lambda_)
    return LossGraph(graph, total, ce, kld, nce, sparsity, beta,
                     alpha if contrastive else 0.0, config.lambda_)


def _draws(generator: np.random.Generator, rows: int, config: TrainingConfig):
    eps = generator.standard_normal((rows, config.latent_dim))
    eps_pos = generator.standard_normal((rows, config.latent_dim)) if config.contrastive else None
    return eps, eps_pos


def _mean_breakdown(parts: List[Tuple[int, LossBreakdown]]) -> LossBreakdown:
    weight = sum(n for n, _ in parts)
    avg = {
        key: sum(n * getattr(b, key) for n, b in parts) / weight
        for key in ("ce", "kld", "nce", "l1")
    }
    first = parts[0][1]
    return total_loss(lambda_=first.lambda_, beta=first.beta, alpha=first.alpha, **avg)


def evaluate_loss(model: CvaeModel, dataset: Dataset, config: TrainingConfig, epoch: int,
                  stream: str = "validation") -> LossBreakdown:
    """
    Loss of ``dataset`` under the weights of ``model`` at the schedule of ``epoch``.

    Noise comes from ``rng(seed, stream, epoch)`` and batches are unshuffled,
    so the value is reproducible.
    """
    generator = rng(config.seed, stream, epoch)
    beta, alpha = config.beta_at(epoch), config.alpha_at(epoch)
    parts = []
    for start, stop in batch_bounds(len(dataset), config.batch_size):
        idx = np.arange(start, stop)
        eps, eps_pos = _draws(generator, len(idx), config)
        loss = build_loss(model, config, dataset.rows[idx], dataset.conditions[idx],
                          eps, eps_pos, beta, alpha)
        parts.append((len(idx), loss.breakdown()))
    return _mean_breakdown(parts)


def replay_loss(model: CvaeModel, dataset: Dataset, config: TrainingConfig,
                epoch: int) -> LossBreakdown:
    """
    Loss of the training pass of ``epoch`` re-run under the current weights.

    Batches, their order and the noise draws are those the training loop used
    for that epoch; no update is made.
    """
    generator = rng(config.seed, "eps", epoch)
    beta, alpha = config.beta_at(epoch), config.alpha_at(epoch)
    parts = []
    for b, idx in enumerate(batches(len(dataset), config.batch_size, config.seed, epoch)):
        eps, eps_pos = _draws(generator, len(idx), config)
        try:
            loss = build_loss(model, config, dataset.rows[idx], dataset.conditions[idx],
                              eps, eps_pos, beta, alpha)
        except NumericError as e:
            raise NumericError(f"Non-finite loss at epoch {epoch}, batch {b}: {e}")
        parts.append((len(idx), loss.breakdown()))
    return _mean_breakdown(parts)


def _check_dataset(dataset: Dataset, label: str) -> None:
    counts = dataset.class_counts()
    if len(dataset) < 2 or min(counts.values()) == 0:
        raise InsufficientDataError(
            f"{label} set needs records of both classes "
            f"(got {counts[0]} non-risk, {counts[1]} risk)"
        )


def train(dataset: Dataset, config: TrainingConfig,
          validation: Optional[Dataset] = None) -> Tuple[Checkpoint, TrainingHistory]:
    """
    Train a CVAE variant on encoded records.

    Every epoch sets beta (and alpha for SCCVAE-Calpha) from the schedules,
    runs shuffled mini-batches with Adam, then records the mean loss of that
    epoch's batches re-run under the end-of-epoch weights. Training
    stops after ``patience`` epochs without improvement of the monitored loss
    and the best epoch's weights are restored. Latent banks for both classes
    are then built from ``dataset``.

    Args:
        dataset: Encoded training records
        config: Hyperparameters
        validation: Encoded validation records (required for monitor="validation")

    Returns:
        (Checkpoint, TrainingHistory)

    Raises:
        InsufficientDataError: If a class is absent
        NumericError: If a loss turns non-finite (message names epoch and batch)
    """
    _check_dataset(dataset, "Training")
    if config.monitor == "validation":
        if validation is None:
            raise ContractError("monitor='validation' needs a validation set")
        _check_dataset(validation, "Validation")

    schema = dataset.schema
    dims = ModelDims(cardinalities=schema.cardinalities, embedding_dim=config.embedding_dim,
                     latent_dim=config.latent_dim)
    model = CvaeModel.initialize(dims, dataset.attribute_names, rng(config.seed, "init"))
    optimizer = Adam(model.parameters(), lr=config.learning_rate)

    history = TrainingHistory()
    best_state = model.state_dict()
    best = float("inf")
    stale = 0
    logger.info("Training %s on %d records (%d attributes), up to %d epochs",
                config.variant, len(dataset), dims.n_attributes, config.epochs)

    for epoch in range(config.epochs):
        beta, alpha = config.beta_at(epoch), config.alpha_at(epoch)
        eps_stream = rng(config.seed, "eps", epoch)
        for b, idx in enumerate(batches(len(dataset), config.batch_size, config.seed, epoch)):
            eps, eps_pos = _draws(eps_stream, len(idx), config)
            try:
                loss = build_loss(model, config, dataset.rows[idx], dataset.conditions[idx],
                                  eps, eps_pos, beta, alpha)
                optimizer.zero_grad()
                loss.graph.backward(loss.total)
                optimizer.step()
            except NumericError as e:
                raise NumericError(f"Non-finite loss at epoch {epoch}, batch {b}: {e}")

        # recorded under the end-of-epoch weights, the ones a snapshot keeps
        summary = replay_loss(model, dataset, config, epoch)
        history.epochs.append(summary)
        monitored = summary.total
        if config.monitor == "validation":
            monitored = evaluate_loss(model, validation, config, epoch).total
        history.monitored.append(monitored)
        logger.info(
            "epoch %d beta=%.3f alpha=%.3f ce=%.4f kld=%.4f nce=%.4f l1=%.4f total=%.4f",
            epoch, summary.beta, summary.alpha, summary.ce, summary.kld, summary.nce,
            summary.l1, summary.total,
        )

        if monitored < best:
            best, stale = monitored, 0
            history.best_epoch = epoch
            best_state = model.state_dict()
        else:
            stale += 1
            if stale >= config.patience:
                history.stopped_early = True
                logger.info("Early stop at epoch %d (best epoch %d, loss %.4f)",
                            epoch, history.best_epoch, best)
                break

    model.load_state_dict(best_state)
    model.freeze()
    banks = {c: build_bank(model, dataset, c) for c in (0, 1)}
    checkpoint = Checkpoint(
        model=model,
        config=config,
        schema=schema,
        banks=banks,
        final_epoch=len(history.epochs) - 1,
        best_epoch=history.best_epoch,
        best_loss=best,
    )
    return checkpoint, history
