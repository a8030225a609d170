"""Leaders that only observe the follower's action.

Both rely on follower utilities that ignore the context, so the best-response
profiles (and hence the extreme points) are shared by every context. The
probability of any indicator event ``1{sigma = a_f}`` is estimated through a
barycentric spanner of the indicator set: only the spanner elements are
sampled directly, everything else is a linear combination of them.
"""
from __future__ import annotations

import math

import numpy as np

from .._validation import ConfigurationError
from ..geometry import barycentric_spanner, check_context_free_followers, indicator_set
from .base import BaseLeader, first_argmax
from .hedge import Hedge
from .policies import PolicyClass, default_resolution, weight_grid

ESTIMATE_TOL = 1e-9


def _log_horizon(horizon):
    return max(math.log(horizon), 1.0)


class _SpannerLeader(BaseLeader):
    feedback = "bandit"

    def _setup_spanner(self):
        game = self.game_
        self.reference_context_ = check_context_free_followers(game)
        self.base_points_ = self._extreme_points(self.reference_context_)
        self.indicators_ = indicator_set(game, self.base_points_)
        self.spanner_ = barycentric_spanner(self.indicators_)
        k, n_actions = game.n_types, game.n_follower_actions
        sig = self.base_points_.sigmas
        # lambdas_[e, a] = spanner coefficients of 1{sigma_e = a}
        bits = (sig[:, None, :] == np.arange(n_actions)[None, :, None]).astype(float)
        lam = np.linalg.lstsq(self.spanner_.vectors.T, bits.reshape(-1, k).T, rcond=None)[0]
        self.lambdas_ = lam.T.reshape(len(sig), n_actions, self.spanner_.rank)

    def _values(self, z):
        table = self._table(z)
        if table.points.shape != self.base_points_.points.shape:
            raise RuntimeError("extreme points differ across contexts")
        return table

    def indicator_estimates(self, spanner_estimates):
        """``p_hat(1{sigma_e = a})`` for every extreme point ``e`` and action ``a``."""
        return self.lambdas_ @ np.asarray(spanner_estimates, dtype=float)

    @property
    def n_spanner(self):
        return self.spanner_.rank


class ExploreThenCommitLeader(_SpannerLeader):
    """Estimate each spanner probability from ``N`` plays, then exploit.

    Exploration plays the realizer of spanner element ``i`` on rounds
    ``[i*N, (i+1)*N)`` and counts how often the follower answers with the
    element's action. Afterwards it greedily maximizes the estimated
    expected utility over the extreme points.

    Parameters
    ----------
    n_explore : int, optional
        ``N``; defaults to ``ceil((A_f^2 T^2 ln T / K)^(1/3))`` clamped to
        ``[1, T // r]``.
    delta : float, optional
    """

    def __init__(self, n_explore=None, delta=None):
        self.n_explore = n_explore
        self.delta = delta

    def _setup(self):
        self._setup_spanner()
        game, horizon, r = self.game_, self.horizon_, self.n_spanner
        if self.n_explore is None:
            raw = (game.n_follower_actions ** 2 * horizon ** 2 * _log_horizon(horizon) / game.n_types) ** (1 / 3)
            n = min(max(1, math.ceil(raw)), max(1, horizon // r))
        else:
            n = int(self.n_explore)
            if n < 1:
                raise ConfigurationError("N must be >= 1")
        if n * r > horizon:
            raise ConfigurationError(f"N*r = {n}*{r} exceeds the horizon T={horizon}")
        self.n_explore_ = n
        self.hits_ = np.zeros(r)
        self.indicator_estimates_ = None

    @property
    def exploring(self):
        return self.t_ < self.n_explore_ * self.n_spanner

    def predict(self, z):
        if self.exploring:
            return self.spanner_.realizers[self.t_ // self.n_explore_].copy()
        if self.indicator_estimates_ is None:
            self._commit()
        table = self._values(z)
        scores = (self.indicator_estimates_ * table.values).sum(axis=1)
        return table.points[first_argmax(scores)].copy()

    def _commit(self):
        est = self.indicator_estimates(self.hits_ / self.n_explore_)
        k = self.game_.n_types
        if est.min() < -k - ESTIMATE_TOL or est.max() > k + 1 + ESTIMATE_TOL:
            raise AssertionError(f"indicator estimate outside [-K, K+1]: [{est.min()}, {est.max()}]")
        self.indicator_estimates_ = est

    def partial_fit(self, z, x, follower_type=None, follower_action=None):
        a = self._require(follower_action, "follower action")
        if self.exploring:
            i = self.t_ // self.n_explore_
            self.hits_[i] += a == self.spanner_.actions[i]
        self.t_ += 1
        return self


class BlockHedgeLeader(_SpannerLeader):
    """Hedge over weight-grid policies, updated once per block from bandit data.

    The horizon is cut into ``Z`` blocks of ``T // Z`` rounds. In each block
    ``r`` distinct random rounds play the spanner realizers (one each) and
    one independent random round donates its context. Every other round
    plays a policy sampled from Hedge. At the block's end each policy is
    charged an unbiased estimate of its negated utility at the donated
    context. Leftover rounds after the last block only exploit.

    Parameters
    ----------
    n_blocks : int, optional
        ``Z``; defaults to ``ceil((T / (A_f ln T))^(1/3) * T^(1/3))``, reduced
        until blocks have at least ``r + 1`` rounds.
    grid_resolution : int, optional
    eta : float, optional
        Defaults to ``sqrt(ln |Pi| / Z) / (K * A_f)``.
    delta : float, optional
    random_state : int, Generator or None
    """

    def __init__(self, n_blocks=None, grid_resolution=None, eta=None, delta=None, random_state=None):
        self.n_blocks = n_blocks
        self.grid_resolution = grid_resolution
        self.eta = eta
        self.delta = delta
        self.random_state = random_state

    def _setup(self):
        self._setup_spanner()
        game, horizon, r = self.game_, self.horizon_, self.n_spanner
        k, n_actions = game.n_types, game.n_follower_actions
        if self.n_blocks is None:
            raw = (horizon / (n_actions * _log_horizon(horizon))) ** (1 / 3) * horizon ** (1 / 3)
            z_count = max(1, min(math.ceil(raw), horizon // (r + 1)))
        else:
            z_count = int(self.n_blocks)
            if z_count < 1:
                raise ConfigurationError("Z must be >= 1")
        block = horizon // z_count
        if block < r + 1:
            raise ConfigurationError(f"block size T//Z = {block} is below r+1 = {r + 1}")
        self.n_blocks_ = z_count
        self.block_size_ = block

        m = self.grid_resolution or default_resolution(horizon, k)
        self.grid_resolution_ = int(m)
        self.policies_ = PolicyClass(weight_grid(self.grid_resolution_, k))
        n_pol = len(self.policies_)
        if self.eta is None:
            eta = math.sqrt(math.log(n_pol) / z_count) / (k * n_actions) if n_pol > 1 else 0.0
        else:
            eta = float(self.eta)
        self.eta_ = eta
        self.loss_bound_ = float(k * n_actions)
        self.hedge_ = Hedge(n_pol, eta, loss_range=(-self.loss_bound_, self.loss_bound_))
        self._choices = {}
        self.n_updates_ = 0
        self.last_policy_ = None
        self._new_block()

    def _new_block(self):
        r = self.n_spanner
        slots = self.rng_.choice(self.block_size_, size=r, replace=False)
        self.explore_slots_ = {int(s): i for i, s in enumerate(slots)}
        self.context_slot_ = int(self.rng_.integers(self.block_size_))
        self.block_estimates_ = np.zeros(r)
        self.block_context_ = None

    def _position(self):
        block, pos = divmod(self.t_, self.block_size_)
        return block, pos

    def _policy_choices(self, z):
        if self._cache_tables or z.label is not None:
            hit = self._choices.get(z.key)
            if hit is None:
                hit = self._choices[z.key] = self.policies_.choices(self._values(z))
            return hit
        return self.policies_.choices(self._values(z))

    def policy_distribution(self):
        return self.hedge_.probabilities()

    def block_loss_estimates(self, z_block, spanner_estimates):
        """Estimated loss of every policy from one block's data."""
        table = self._values(z_block)
        choices = self._policy_choices(z_block)
        est = self.indicator_estimates(spanner_estimates)[choices]
        return -(est * table.values[choices]).sum(axis=1)

    def predict(self, z):
        block, pos = self._position()
        if block < self.n_blocks_ and pos in self.explore_slots_:
            self.last_policy_ = None
            return self.spanner_.realizers[self.explore_slots_[pos]].copy()
        self.last_policy_ = self.hedge_.step(self.rng_)
        e = self._policy_choices(z)[self.last_policy_]
        return self._values(z).points[e].copy()

    def partial_fit(self, z, x, follower_type=None, follower_action=None):
        a = self._require(follower_action, "follower action")
        block, pos = self._position()
        if block < self.n_blocks_:
            i = self.explore_slots_.get(pos)
            if i is not None:
                self.block_estimates_[i] = float(a == self.spanner_.actions[i])
            if pos == self.context_slot_:
                self.block_context_ = z
            if pos == self.block_size_ - 1:
                losses = self.block_loss_estimates(self.block_context_, self.block_estimates_)
                self.hedge_.update(losses)
                self.n_updates_ += 1
                self._new_block()
        self.t_ += 1
        return self
