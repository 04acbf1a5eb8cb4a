"""Online dynamic b-matching on a weighted fixed network."""

from .bma import BmaState, StepOutcome, threshold
from .engine import RunReport, SimConfig, compare, run
from .estimators import ObliviousRouting, OnlineBMA, StaticBMatching
from .ledger import CostLedger, hit_ratio
from .matching import BMatching
from .oracle import belady_off_cost, dp_opt, exact_static, verify_bound
from .topology import Topology, build, gen_complete, gen_leaf_spine, gen_star, make_pair
from .workloads import AdversaryConfig, gen_iid, gen_uniform, gen_zipf, run_adversary

__all__ = [
    "AdversaryConfig",
    "BMatching",
    "BmaState",
    "CostLedger",
    "ObliviousRouting",
    "OnlineBMA",
    "RunReport",
    "SimConfig",
    "StaticBMatching",
    "StepOutcome",
    "Topology",
    "belady_off_cost",
    "build",
    "compare",
    "dp_opt",
    "exact_static",
    "gen_complete",
    "gen_iid",
    "gen_leaf_spine",
    "gen_star",
    "gen_uniform",
    "gen_zipf",
    "hit_ratio",
    "make_pair",
    "run",
    "run_adversary",
    "threshold",
    "verify_bound",
]

__version__ = "0.1.0"
