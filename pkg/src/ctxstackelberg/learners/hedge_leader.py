"""Exponential weights over weight-grid policies with full feedback."""
from __future__ import annotations

from .base import BaseLeader
from .hedge import Hedge
from .policies import PolicyClass, default_resolution, weight_grid


class HedgeLeader(BaseLeader):
    """Hedge over ``{pi_w : w on a grid of resolution M}``.

    Each round samples a policy, plays its point for the current context and,
    once the follower type is revealed, charges every policy the negated
    utility it would have earned.

    Parameters
    ----------
    grid_resolution : int, optional
        ``M``; defaults to ``min(T, 40)`` (reduced if the class gets huge).
    eta : float, optional
        Defaults to ``sqrt(ln |Pi| / T)``.
    delta : float, optional
    random_state : int, Generator or None
    """

    def __init__(self, grid_resolution=None, eta=None, delta=None, random_state=None):
        self.grid_resolution = grid_resolution
        self.eta = eta
        self.delta = delta
        self.random_state = random_state

    def _setup(self):
        k = self.game_.n_types
        m = self.grid_resolution or default_resolution(self.horizon_, k)
        self.grid_resolution_ = int(m)
        self.policies_ = PolicyClass(weight_grid(self.grid_resolution_, k))
        n = len(self.policies_)
        eta = Hedge.default_eta(n, self.horizon_) if self.eta is None else float(self.eta)
        self.eta_ = eta
        self.hedge_ = Hedge(n, eta, loss_range=(-1.0, 0.0))
        self._choices = {}
        self.last_policy_ = None

    def _policy_choices(self, z):
        if self._cache_tables or z.label is not None:
            hit = self._choices.get(z.key)
            if hit is None:
                hit = self._choices[z.key] = self.policies_.choices(self._table(z))
            return hit
        return self.policies_.choices(self._table(z))

    def policy_distribution(self):
        return self.hedge_.probabilities()

    def predict(self, z):
        self.last_policy_ = self.hedge_.step(self.rng_)
        e = self._policy_choices(z)[self.last_policy_]
        return self._table(z).points[e].copy()

    def partial_fit(self, z, x, follower_type=None, follower_action=None):
        i = self._require(follower_type, "follower type")
        table = self._table(z)
        self.hedge_.update(-table.per_type[self._policy_choices(z), i])
        self.t_ += 1
        return self
