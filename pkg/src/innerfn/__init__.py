"""Derivatives of inner functions in mixed-norm, Hardy and Besov spaces, tested numerically."""

from .inner import (
    AtomicSingular,
    FiniteBlaschke,
    Frostman,
    InfiniteBlaschke,
    InnerFunction,
    ZeroSequence,
    frostman_shift,
)
from .norms import MixedNormParams, TruncatedValue
from .verify import ConvergenceVerdict, RatioReport, classify
from .weights import RadialWeight, classify_weight, power_log_weight, power_weight
from .zeros import DyadicProfile, atomic_frostman_zeros, dyadic_counts, find_zeros_numeric

__version__ = "0.1.0"
