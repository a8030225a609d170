"""Ready-made game instances and a random instance generator."""
from __future__ import annotations

import numpy as np

from .environments import build_olt_instance
from .game import Context, FiniteContexts, GameInstance, TabularUtility


def _labelled_contexts(n):
    return FiniteContexts(tuple(Context((float(j),), f"c{j}") for j in range(n)))


def random_tabular_instance(rng, n_leader_actions=2, n_follower_actions=2, n_types=2, n_contexts=1,
                            context_free_followers=False, decimals=None):
    """Uniform ``[0, 1]`` tables; ``decimals`` rounds entries to create exact ties."""
    labels = [f"c{j}" for j in range(n_contexts)]
    shape = (n_leader_actions, n_follower_actions)

    def table():
        t = rng.random(shape)
        return np.round(t, decimals) if decimals is not None else t

    def model(shared):
        if shared:
            return TabularUtility({"*": table().tolist()})
        return TabularUtility({lab: table().tolist() for lab in labels})

    return GameInstance(
        n_leader_actions, n_follower_actions, model(False),
        [model(context_free_followers) for _ in range(n_types)],
        _labelled_contexts(n_contexts), [f"type{i}" for i in range(n_types)],
    )


def mirrored_instance(n_contexts=8):
    """Each follower type always plays its own action; the leader wants to match it.

    Leader tables are ``[[h, l], [l, h]]`` with context-dependent ``h > l``,
    so under a balanced type distribution both pure strategies tie in
    expectation and the hindsight benchmark profits from sampling noise.
    """
    tables = {}
    for j in range(n_contexts):
        h = 0.6 + 0.4 * j / max(1, n_contexts - 1)
        low = 0.1 + 0.2 * ((3 * j) % n_contexts) / n_contexts
        tables[f"c{j}"] = [[h, low], [low, h]]
    first = TabularUtility({"*": [[1.0, 0.0], [1.0, 0.0]]})
    second = TabularUtility({"*": [[0.0, 1.0], [0.0, 1.0]]})
    return GameInstance(2, 2, TabularUtility(tables), [first, second], _labelled_contexts(n_contexts),
                        ["alpha1", "alpha2"])


def compromise_instance(n_contexts=4):
    """Context-free followers whose responses split the simplex into three regions.

    Type 0 plays action 0 iff ``x[0] > x[1]``; type 1 iff ``x[0] > 3 x[1]``.
    The leader does best at ``x = [0.75, 0.25]`` where the two types split,
    while the pure strategy ``[1, 0]`` (one of the exploration points) is
    worse against type 1.
    """
    tables = {f"c{j}": [[0.6, 1.0 - 0.02 * j], [0.6, 0.0]] for j in range(n_contexts)}
    first = TabularUtility({"*": [[1.0, 0.0], [0.0, 1.0]]})
    second = TabularUtility({"*": [[0.3, 0.0], [0.0, 0.9]]})
    return GameInstance(2, 2, TabularUtility(tables), [first, second], _labelled_contexts(n_contexts),
                        ["alpha1", "alpha2"])


BUILTIN = {
    "olt": build_olt_instance,
    "mirrored": mirrored_instance,
    "compromise": compromise_instance,
}
