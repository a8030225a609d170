"""Greedy plug-in leader for stochastic followers with full feedback."""
from __future__ import annotations

import numpy as np

from .base import BaseLeader, first_argmax

ESTIMATORS = ("type", "action")


class GreedyLeader(BaseLeader):
    """Play the point of ``E_z`` with the best estimated expected utility.

    Parameters
    ----------
    estimator : {"type", "action"}
        ``"type"`` keeps empirical follower-type frequencies (uniform prior
        ``1/K``). ``"action"`` estimates, for each queried ``(z, x)``, the
        distribution of the follower's best response by replaying the type
        history (uniform prior ``1/A_f``).
    delta : float, optional
        Perturbation radius for ``E_z``; defaults to ``min(1/T, 1e-3)``.
    """

    def __init__(self, estimator="type", delta=None):
        self.estimator = estimator
        self.delta = delta

    def _setup(self):
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")
        self.type_counts_ = np.zeros(self.game_.n_types)

    def type_distribution(self):
        """Current estimate of P(follower = type i)."""
        if self.t_ == 0:
            return np.full(self.game_.n_types, 1.0 / self.game_.n_types)
        return self.type_counts_ / self.t_

    def action_distribution(self, sigmas):
        """Estimated P(b = a) for best-response profiles ``sigmas`` (shape ``(n, K)``).

        Replays every observed type through the profile; rows sum to one.
        """
        sigmas = np.atleast_2d(np.asarray(sigmas, dtype=int))
        n_actions = self.game_.n_follower_actions
        if self.t_ == 0:
            return np.full((len(sigmas), n_actions), 1.0 / n_actions)
        out = np.zeros((len(sigmas), n_actions))
        rows = np.repeat(np.arange(len(sigmas)), sigmas.shape[1])
        np.add.at(out, (rows, sigmas.ravel()), np.tile(self.type_counts_, len(sigmas)))
        return out / self.t_

    def estimated_utilities(self, z):
        table = self._table(z)
        if self.estimator == "type":
            return table.per_type @ self.type_distribution()
        return (self.action_distribution(table.sigmas) * table.values).sum(axis=1)

    def predict(self, z):
        table = self._table(z)
        return table.points[first_argmax(self.estimated_utilities(z))].copy()

    def partial_fit(self, z, x, follower_type=None, follower_action=None):
        i = self._require(follower_type, "follower type")
        self.type_counts_[i] += 1
        self.t_ += 1
        return self
