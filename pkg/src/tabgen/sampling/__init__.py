"""Synthetic record generation by latent-space SMOTE."""

from tabgen.sampling.bank import LatentBank, build_bank, knn, smote_interpolate
from tabgen.sampling.generate import (
    GenerationRequest,
    decode_records,
    generate,
    prior_sample,
    write_synthetic,
)

__all__ = [
    "LatentBank",
    "build_bank",
    "knn",
    "smote_interpolate",
    "GenerationRequest",
    "decode_records",
    "generate",
    "prior_sample",
    "write_synthetic",
]
