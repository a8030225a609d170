"""Common estimator plumbing for online leaders."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .._validation import check_random_state
from ..game import FiniteContexts
from ..geometry import ExtremePointCache

ARGMAX_TOL = 1e-12


def first_argmax(values, tol=ARGMAX_TOL):
    """Lowest index attaining the maximum (up to ``tol``)."""
    values = np.asarray(values, dtype=float)
    return int(np.flatnonzero(values >= values.max() - tol)[0])


def first_argmax_columns(values, tol=ARGMAX_TOL):
    """Column-wise :func:`first_argmax` of a 2-d array."""
    values = np.asarray(values, dtype=float)
    return np.argmax(values >= values.max(axis=0) - tol, axis=0)


def default_delta(horizon):
    return min(1.0 / horizon, 1e-3)


@dataclass
class ContextTable:
    """E_z together with the leader payoffs each of its points can earn.

    ``values[e, a]`` is ``u(z, x_e, a)``; ``per_type[e, i]`` is the payoff of
    ``x_e`` against type ``i``'s best response ``sigmas[e, i]``.
    """

    points: np.ndarray
    sigmas: np.ndarray
    values: np.ndarray
    per_type: np.ndarray


def build_context_table(game, eps, z):
    values = eps.points @ game.leader_matrix(z)
    per_type = np.take_along_axis(values, eps.sigmas, axis=1)
    return ContextTable(eps.points, eps.sigmas, values, per_type)


class BaseLeader(BaseEstimator):
    """Online leader with an estimator-style surface.

    ``fit(game, horizon)`` resets the run state, ``predict(z)`` commits to a
    mixed strategy for the round's context and ``partial_fit`` consumes the
    round's feedback. Calls must alternate ``predict`` / ``partial_fit``.
    """

    feedback = "full"

    def fit(self, game, horizon):
        horizon = int(horizon)
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        game.check_horizon(horizon)
        self.game_ = game
        self.horizon_ = horizon
        self.delta_ = default_delta(horizon) if getattr(self, "delta", None) is None else float(self.delta)
        self.rng_ = check_random_state(getattr(self, "random_state", None))
        self.t_ = 0
        cache = getattr(self, "_extreme_points", None)
        if cache is None or cache.game is not game or cache.delta != self.delta_:
            self._extreme_points = ExtremePointCache(game, self.delta_)
            self._tables = {}
        self._cache_tables = isinstance(game.context_space, FiniteContexts)
        self._setup()
        return self

    def _setup(self):
        pass

    def _table(self, z):
        if self._cache_tables or z.label is not None:
            table = self._tables.get(z.key)
            if table is None:
                table = build_context_table(self.game_, self._extreme_points(z), z)
                self._tables[z.key] = table
            return table
        return build_context_table(self.game_, self._extreme_points(z), z)

    def extreme_points(self, z):
        check_is_fitted(self, "game_")
        return self._extreme_points(z)

    def predict(self, z):
        raise NotImplementedError

    def partial_fit(self, z, x, follower_type=None, follower_action=None):
        raise NotImplementedError

    def _require(self, value, name):
        if value is None:
            raise ValueError(f"{type(self).__name__} needs {name} feedback")
        return int(value)


