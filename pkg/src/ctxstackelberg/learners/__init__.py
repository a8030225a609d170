"""Online leaders sharing a ``fit`` / ``predict`` / ``partial_fit`` protocol."""
from .bandit import BlockHedgeLeader, ExploreThenCommitLeader
from .base import BaseLeader, ContextTable, build_context_table, default_delta, first_argmax
from .greedy import GreedyLeader
from .hedge import Hedge
from .hedge_leader import HedgeLeader
from .policies import PolicyClass, default_resolution, grid_size, weight_grid

ALGORITHMS = ("greedy-typefreq", "greedy-actionfreq", "hedge", "bandit-greedy", "bandit-blockhedge")


def make_leader(name, delta=None, eta=None, M=None, N=None, Z=None, seed=None):
    """Build a leader from its command-line name and optional overrides."""
    if name == "greedy-typefreq":
        return GreedyLeader("type", delta=delta)
    if name == "greedy-actionfreq":
        return GreedyLeader("action", delta=delta)
    if name == "hedge":
        return HedgeLeader(grid_resolution=M, eta=eta, delta=delta, random_state=seed)
    if name == "bandit-greedy":
        return ExploreThenCommitLeader(n_explore=N, delta=delta)
    if name == "bandit-blockhedge":
        return BlockHedgeLeader(n_blocks=Z, grid_resolution=M, eta=eta, delta=delta, random_state=seed)
    raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")


__all__ = [
    "ALGORITHMS", "BaseLeader", "BlockHedgeLeader", "ContextTable", "ExploreThenCommitLeader",
    "GreedyLeader", "Hedge", "HedgeLeader", "PolicyClass", "build_context_table", "default_delta",
    "default_resolution", "first_argmax", "grid_size", "make_leader", "weight_grid",
]
