"""Online learning for repeated Stackelberg games with side information."""
from ._validation import ConfigurationError, InstanceFormatError
from .game import (BoxContexts, Context, FiniteContexts, GameInstance, LinearClippedUtility,
                   RoundRecord, TabularUtility, best_response_profile, eval_utility,
                   expected_leader_utility, follower_best_response, play_round)
from .geometry import (ExtremePointSet, Spanner, approx_extreme_points, barycentric_spanner,
                       closure_vertices, indicator_set, region_feasibility, region_halfspaces)
from .instance_io import load_instance, save_instance
from .learners import (BlockHedgeLeader, ExploreThenCommitLeader, GreedyLeader, Hedge,
                       HedgeLeader, make_leader, weight_grid)

__version__ = "0.1.0"

__all__ = [
    "BlockHedgeLeader", "BoxContexts", "ConfigurationError", "Context", "ExploreThenCommitLeader",
    "ExtremePointSet", "FiniteContexts", "GameInstance", "GreedyLeader", "Hedge", "HedgeLeader",
    "InstanceFormatError", "LinearClippedUtility", "RoundRecord", "Spanner", "TabularUtility",
    "approx_extreme_points", "barycentric_spanner", "best_response_profile", "closure_vertices",
    "eval_utility", "expected_leader_utility", "follower_best_response", "indicator_set",
    "load_instance", "make_leader", "play_round", "region_feasibility", "region_halfspaces",
    "save_instance", "weight_grid",
]
