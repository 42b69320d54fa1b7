"""Online bin covering with advice.

Exact dyadic arithmetic, the advice tape, online strategies (dual next
fit, dual harmonic, the advice-driven two-class strategy), the offline
oracle that writes the advice, an exact offline optimum, and adversarial
instance generators with an experiment runner.
"""

from .dyadic import Dyadic, ceil_approx, floor_approx, msb_exponent, parse_dyadic
from .advicetape import AdviceTape, BitBudgetReport
from .model import (
    Bin,
    Covering,
    classify_item,
    covering_score,
    partition_groups,
    validate_covering,
)
from .opt import KERNEL, canonicalize, exact_opt, load_upper_bound
from .oracle import OraclePlan, THEOREM, compute_advice, theoretical_bound
from .strategies import Dh2b, Dnf, DualHarmonic, run, strategy_from_name
from .bench import generate, measure_ratio, run_experiment

__version__ = "0.1.0"

__all__ = [
    "AdviceTape",
    "Bin",
    "BitBudgetReport",
    "Covering",
    "Dh2b",
    "Dnf",
    "DualHarmonic",
    "Dyadic",
    "KERNEL",
    "OraclePlan",
    "THEOREM",
    "canonicalize",
    "ceil_approx",
    "classify_item",
    "compute_advice",
    "covering_score",
    "exact_opt",
    "floor_approx",
    "generate",
    "load_upper_bound",
    "measure_ratio",
    "msb_exponent",
    "parse_dyadic",
    "partition_groups",
    "run",
    "run_experiment",
    "strategy_from_name",
    "theoretical_bound",
    "validate_covering",
    "__version__",
]
