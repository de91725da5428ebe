"""Monte Carlo checks of extreme-value claims about exponentiated power laws."""

__version__ = "0.1.0"

from .dist import DistSpec, Family, TailSample, log2_sample, sample  # noqa: E402
from .logdim import LogDim, dominance_fraction, logdim_sum  # noqa: E402
from .rng import RandomSource  # noqa: E402

__all__ = [
    "DistSpec",
    "Family",
    "LogDim",
    "RandomSource",
    "TailSample",
    "dominance_fraction",
    "log2_sample",
    "logdim_sum",
    "sample",
]
