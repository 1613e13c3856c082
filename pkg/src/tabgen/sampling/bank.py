"""Per-class banks of encoded real records and latent-space SMOTE primitives."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from tabgen.data.dataset import Dataset
from tabgen.errors import BankError, ContractError, ShapeError
from tabgen.model.cvae import CvaeModel, encode

logger = logging.getLogger(__name__)

MIN_BANK_SIZE = 2


@dataclass
class LatentBank:
    """
    Posterior parameters of the real records of one class.

    ``vectors`` are the encoder means; ``logvars`` are kept so a bank can
    also be resampled stochastically.
    """

    condition: int
    vectors: np.ndarray
    ids: np.ndarray
    logvars: Optional[np.ndarray] = None

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        self.ids = np.asarray(self.ids, dtype=np.int64)
        if self.vectors.ndim != 2 or self.ids.shape != (self.vectors.shape[0],):
            raise ShapeError("LatentBank: vectors must be M x h with one id per row")
        if self.logvars is not None:
            self.logvars = np.asarray(self.logvars, dtype=np.float64)
            if self.logvars.shape != self.vectors.shape:
                raise ShapeError("LatentBank: logvars must match vectors")
        if not np.all(np.isfinite(self.vectors)):
            raise BankError(f"Bank for condition {self.condition} holds non-finite vectors")

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def sampled(self, generator: np.random.Generator) -> "LatentBank":
        """Bank of one reparameterised draw per record instead of the means."""
        if self.logvars is None:
            raise BankError("Bank has no log-variances to sample from")
        eps = generator.standard_normal(self.vectors.shape)
        z = self.vectors + np.exp(0.5 * self.logvars) * eps
        return LatentBank(self.condition, z, self.ids.copy(), self.logvars.copy())


def build_bank(model: CvaeModel, dataset: Dataset, condition: int) -> LatentBank:
    """
    Encode every record of one class and keep its posterior mean.

    Args:
        model: Trained model
        dataset: Encoded records (typically the training split)
        condition: 0 (non-risk) or 1 (risk)

    Returns:
        LatentBank with one row per class record, in dataset order

    Raises:
        BankError: If the class has fewer than two records
    """
    members = dataset.with_class(condition)
    if len(members) < MIN_BANK_SIZE:
        raise BankError(
            f"Condition {condition} has {len(members)} record(s); "
            f"a bank needs at least {MIN_BANK_SIZE}"
        )
    dist = encode(model, members.rows, members.conditions)
    logger.debug("Built bank for condition %d with %d vectors", condition, len(members))
    return LatentBank(condition, dist.mu.value.copy(), members.ids.copy(), dist.logvar.value.copy())


def knn(bank: LatentBank, index: int, k: int) -> np.ndarray:
    """
    Indices of the ``k`` nearest bank rows to row ``index`` by Euclidean distance.

    The row itself is excluded; ties go to the lower index.

    Raises:
        ContractError: If k is not in 1..M-1 or index is out of range
    """
    m = len(bank)
    if not 1 <= k < m:
        raise ContractError(f"knn: k must be in 1..{m - 1}, got {k}")
    if not 0 <= index < m:
        raise ContractError(f"knn: index {index} outside 0..{m - 1}")
    distances = np.sqrt(((bank.vectors - bank.vectors[index]) ** 2).sum(axis=1))
    distances[index] = np.inf
    return np.argsort(distances, kind="stable")[:k]


def smote_interpolate(z_i, z_j, u) -> np.ndarray:
    """
    Point at fraction ``u`` along the segment from ``z_i`` to ``z_j``.

    ``u = 0`` returns ``z_i`` and ``u = 1`` returns ``z_j`` exactly; the
    result never leaves the parents' bounding box.
    """
    z_i = np.asarray(z_i, dtype=np.float64)
    z_j = np.asarray(z_j, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise ContractError("smote_interpolate: u must lie in [0, 1]")
    point = (1.0 - u) * z_i + u * z_j
    return np.clip(point, np.minimum(z_i, z_j), np.maximum(z_i, z_j))
