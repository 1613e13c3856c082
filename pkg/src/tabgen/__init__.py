"""tabgen - conditional tabular synthesis with sparse contrastive CVAEs."""

__version__ = "0.1.0"
__author__ = "Quasar Consulting Group"
__description__ = "Conditional CVAE synthesis and augmentation evaluation for categorical records"

__all__ = ["__version__"]
