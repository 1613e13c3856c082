"""Conditional VAE and its training objectives."""

from tabgen.model.cvae import (
    CvaeModel,
    CvaeOutput,
    LatentDistribution,
    ModelDims,
    decode,
    decode_latents,
    encode,
    forward,
    reparameterize,
)
from tabgen.model.losses import (
    LossBreakdown,
    ScheduleConfig,
    cyclic_schedule,
    info_nce,
    kld_standard,
    kld_two_normals,
    l1_latent,
    l1_weights,
    reconstruction_ce,
    total_loss,
    weighted_total,
)

__all__ = [
    "CvaeModel",
    "CvaeOutput",
    "LatentDistribution",
    "ModelDims",
    "decode",
    "decode_latents",
    "encode",
    "forward",
    "reparameterize",
    "LossBreakdown",
    "ScheduleConfig",
    "cyclic_schedule",
    "info_nce",
    "kld_standard",
    "kld_two_normals",
    "l1_latent",
    "l1_weights",
    "reconstruction_ce",
    "total_loss",
    "weighted_total",
]
