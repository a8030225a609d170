"""Context and follower-type generators for each threat model.

An :class:`Environment` pairs a context source with a follower source. Each
round it first fixes the context, then (after the leader has committed) the
follower type. Adaptive sources receive an immutable *view* of the past;
which current-round fields the view carries is decided by the source's
declared permissions, and every call is written to an audit log.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._validation import ConfigurationError, check_mixed_strategy, check_random_state
from .game import (BoxContexts, Context, FiniteContexts, GameInstance, TabularUtility,
                   best_response_profile)

SCENARIOS = (
    "stoch-follower-adv-context",
    "stoch-context-adv-follower",
    "stoch-context-oblivious-follower",
    "olt-lower-bound",
    "fully-stochastic",
)
ROTATION_LENGTH = 8


@dataclass(frozen=True)
class ContextView:
    """What an adaptive context source may see before round ``t``."""

    t: int
    past_contexts: tuple
    past_types: tuple
    past_strategies: tuple
    learner_id: str


@dataclass(frozen=True)
class FollowerView:
    """What an adaptive follower source may see in round ``t``.

    ``context`` and ``strategy`` are ``None`` unless the source was granted
    access to the current context or to the committed strategy.
    """

    t: int
    past_contexts: tuple
    past_types: tuple
    past_strategies: tuple
    learner_id: str
    context: Context | None = None
    strategy: tuple | None = None


class StochasticContexts:
    """I.i.d. contexts: from a finite list with probabilities, or from a space's sampler."""

    adaptive = False

    def __init__(self, contexts=None, probs=None, space=None):
        if (contexts is None) == (space is None):
            raise ConfigurationError("give exactly one of contexts or space")
        self.space = space
        self.contexts = None if contexts is None else tuple(contexts)
        if self.contexts is not None:
            n = len(self.contexts)
            probs = np.full(n, 1.0 / n) if probs is None else np.asarray(probs, dtype=float)
            if probs.shape != (n,) or np.any(probs < 0) or abs(probs.sum() - 1) > 1e-9:
                raise ConfigurationError("context probabilities must be a distribution")
            self.probs = probs

    def reset(self, rng):
        self._rng = rng

    def next(self, t, view):
        if self.space is not None:
            return self.space.sample(self._rng)
        return self.contexts[int(self._rng.choice(len(self.contexts), p=self.probs))]


class ContextSequence:
    """A context sequence fixed before the run."""

    adaptive = False

    def __init__(self, contexts):
        self.contexts = tuple(contexts)

    def reset(self, rng):
        pass

    def next(self, t, view):
        if t >= len(self.contexts):
            raise IndexError(f"context sequence exhausted at round {t}")
        return self.contexts[t]


class AdaptiveContexts:
    """Contexts chosen by ``callback(view: ContextView)``."""

    adaptive = True

    def __init__(self, callback, on_reset=None):
        self.callback = callback
        self.on_reset = on_reset

    def reset(self, rng):
        if self.on_reset is not None:
            self.on_reset()

    def next(self, t, view):
        return self.callback(view)


class StochasticFollowers:
    adaptive = False

    def __init__(self, probs):
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 1 or np.any(probs < 0) or abs(probs.sum() - 1) > 1e-9:
            raise ConfigurationError(f"follower probabilities must be a distribution, got {probs}")
        self.probs = probs

    def reset(self, rng):
        self._rng = rng

    def next(self, t, view):
        return int(self._rng.choice(len(self.probs), p=self.probs))


class FollowerSequence:
    adaptive = False

    def __init__(self, types):
        self.types = tuple(int(i) for i in types)

    def reset(self, rng):
        pass

    def next(self, t, view):
        if t >= len(self.types):
            raise IndexError(f"follower sequence exhausted at round {t}")
        return self.types[t]


class AdaptiveFollowers:
    """Follower types chosen by ``callback(view: FollowerView)``.

    Parameters
    ----------
    sees_context : bool
        Whether the view carries the current round's context.
    sees_strategy : bool
        Whether the view carries the leader's committed strategy.
    """

    adaptive = True

    def __init__(self, callback, sees_context=False, sees_strategy=False):
        self.callback = callback
        self.sees_context = sees_context
        self.sees_strategy = sees_strategy

    def reset(self, rng):
        pass

    def next(self, t, view):
        return int(self.callback(view))


@dataclass
class Environment:
    """Round-by-round generator of ``(z_t, f_t)``."""

    context_source: object
    follower_source: object
    name: str = "custom"
    n_types: int | None = None
    audit_log: list = field(default_factory=list)

    def reset(self, rng=None, learner_id="anonymous"):
        rng = check_random_state(rng)
        ctx_rng, fol_rng = rng.spawn(2)
        self.context_source.reset(ctx_rng)
        self.follower_source.reset(fol_rng)
        self.learner_id = learner_id
        self._contexts, self._types, self._strategies = [], [], []
        self.audit_log = []
        self._pending = None
        return self

    @property
    def t(self):
        return len(self._types)

    def next_context(self):
        if self._pending is not None:
            raise RuntimeError("context already drawn for this round")
        t = self.t
        view = None
        if self.context_source.adaptive:
            view = ContextView(t, tuple(self._contexts), tuple(self._types),
                               tuple(self._strategies), self.learner_id)
            self.audit_log.append(("context", t, _fields(view)))
        z = self.context_source.next(t, view)
        if not isinstance(z, Context):
            raise TypeError(f"context source returned {type(z).__name__}, expected Context")
        self._pending = z
        return z

    def next_follower(self, x):
        if self._pending is None:
            raise RuntimeError("draw the context before the follower")
        t, z = self.t, self._pending
        x = tuple(float(v) for v in check_mixed_strategy(x))
        src = self.follower_source
        view = None
        if src.adaptive:
            view = FollowerView(
                t, tuple(self._contexts), tuple(self._types), tuple(self._strategies), self.learner_id,
                context=z if src.sees_context else None,
                strategy=x if src.sees_strategy else None,
            )
            self.audit_log.append(("follower", t, _fields(view)))
        i = src.next(t, view)
        if self.n_types is not None and not 0 <= i < self.n_types:
            raise IndexError(f"follower source produced type {i} outside [0, {self.n_types})")
        self._contexts.append(z)
        self._types.append(i)
        self._strategies.append(x)
        self._pending = None
        return i


def _fields(view):
    return frozenset(k for k, v in vars(view).items() if v is not None)


class ThresholdAdversary:
    """Consistent-halving adversary for one-dimensional threshold labelling.

    Keeps an exact interval ``(lo, hi)`` of thresholds ``s`` consistent with
    every label so far. Each context is the interval midpoint ``w``. After
    seeing the leader's probability ``g`` on the first action it labels
    ``y = -1`` (threshold at or below ``w``, follower type 1) when
    ``g >= 1/2`` and ``y = +1`` (threshold above ``w``, follower type 0)
    otherwise, so the leader never earns more than ``1/2`` per round.
    """

    def __init__(self):
        self.reset()

    def reset(self):
        self.lo, self.hi = Fraction(0), Fraction(1)
        self.history = []

    @property
    def midpoint(self):
        return (self.lo + self.hi) / 2

    def context(self, view=None):
        w = self.midpoint
        return Context((float(w),), str(w))

    def label(self, g):
        w = self.midpoint
        if g >= 0.5:
            y, self.lo = -1, w
        else:
            y, self.hi = +1, w
        self.history.append((w, y))
        return y

    def follower(self, view):
        y = self.label(view.strategy[0])
        return 0 if y == +1 else 1

    def consistent(self):
        """Whether a threshold inside the final interval explains every label."""
        if not self.lo < self.hi:
            return False
        s = (self.lo + self.hi) / 2
        return all((y == +1) == (w > s) for w, y in self.history)

    def threshold_policy(self, s=None):
        """Policy that plays ``[1, 0]`` iff ``z > s``; perfect on every past label."""
        s = self.midpoint if s is None else Fraction(s)
        return lambda z: np.array([1.0, 0.0]) if Fraction(z.label) > s else np.array([0.0, 1.0])


def build_olt_instance():
    """Two actions and two follower types; the leader is paid for matching the follower.

    Type 0 always plays action 0 and type 1 always plays action 1, regardless
    of context and leader strategy.
    """
    prefer_first = [[1.0, 0.0], [1.0, 0.0]]
    prefer_second = [[0.0, 1.0], [0.0, 1.0]]
    return GameInstance(
        n_leader_actions=2,
        n_follower_actions=2,
        leader_utility=TabularUtility({"*": [[1.0, 0.0], [0.0, 1.0]]}),
        follower_utilities=[TabularUtility({"*": prefer_first}), TabularUtility({"*": prefer_second})],
        context_space=BoxContexts((0.0,), (1.0,)),
        type_names=["alpha1", "alpha2"],
    )


def olt_environment(adversary=None):
    adversary = adversary or ThresholdAdversary()
    env = Environment(
        AdaptiveContexts(adversary.context, on_reset=adversary.reset),
        AdaptiveFollowers(adversary.follower, sees_context=True, sees_strategy=True),
        name="olt-lower-bound",
        n_types=2,
    )
    env.adversary = adversary
    return env


def rotation_contexts(game, length=ROTATION_LENGTH):
    """Up to ``length`` fixed contexts the rotation cycles through."""
    space = game.context_space
    if isinstance(space, FiniteContexts):
        return space.contexts[:length]
    lo, hi = np.asarray(space.lo), np.asarray(space.hi)
    return tuple(Context(tuple(lo + (hi - lo) * (j + 0.5) / length), f"r{j}") for j in range(length))


class PunishingFollower:
    """Adaptive follower that picks the type the leader has fared worst against.

    For each type it totals what the leader's past strategies would have
    earned against that type on the past contexts, and plays the minimizer
    (lowest index on ties). It never sees the current context or strategy.
    Totals are updated incrementally from the view's history.
    """

    def __init__(self, game):
        self.game = game
        self.reset()

    def reset(self):
        self.totals = np.zeros(self.game.n_types)
        self.seen = 0

    def __call__(self, view):
        if view.t < self.seen:
            self.reset()
        game = self.game
        for z, x in zip(view.past_contexts[self.seen:], view.past_strategies[self.seen:]):
            x = np.asarray(x)
            payoff = x @ game.leader_matrix(z)
            self.totals += payoff[list(best_response_profile(game, z, x))]
        self.seen = len(view.past_contexts)
        return int(np.flatnonzero(self.totals <= self.totals.min() + 1e-12)[0])


def oblivious_follower_sequence(n_types, horizon, rng, n_phases=3):
    """Types drawn up front from a distribution that drifts over the horizon.

    The weight on type 0 oscillates as ``0.5 + 0.4 sin(2 pi n_phases t / T)``
    and the remaining mass is split evenly; the sequence never depends on
    the leader.
    """
    t = np.arange(horizon)
    first = 0.5 + 0.4 * np.sin(2 * np.pi * n_phases * t / horizon)
    if n_types == 1:
        return np.zeros(horizon, dtype=int)
    u = rng.random(horizon)
    rest = (u - first) / (1 - first) * (n_types - 1)
    return np.where(u < first, 0, 1 + np.minimum(rest.astype(int), n_types - 2)).astype(int)


def make_environment(name, game, horizon, follower_probs=None, rng=None):
    """Expand a scenario preset into an :class:`Environment`.

    ``rng`` only matters for presets that fix a sequence up front.
    """
    k = game.n_types
    probs = np.full(k, 1.0 / k) if follower_probs is None else np.asarray(follower_probs, dtype=float)
    space = game.context_space
    iid = (StochasticContexts(contexts=space.contexts) if isinstance(space, FiniteContexts)
           else StochasticContexts(space=space))
    if name == "stoch-follower-adv-context":
        ring = rotation_contexts(game)
        seq = ContextSequence([ring[t % len(ring)] for t in range(horizon)])
        return Environment(seq, StochasticFollowers(probs), name, k)
    if name == "stoch-context-adv-follower":
        return Environment(iid, AdaptiveFollowers(PunishingFollower(game)), name, k)
    if name == "stoch-context-oblivious-follower":
        types = oblivious_follower_sequence(k, horizon, check_random_state(rng))
        return Environment(iid, FollowerSequence(types), name, k)
    if name == "fully-stochastic":
        return Environment(iid, StochasticFollowers(probs), name, k)
    if name == "olt-lower-bound":
        if (game.n_leader_actions, game.n_follower_actions, k) != (2, 2, 2) or not isinstance(space, BoxContexts):
            raise ConfigurationError("olt-lower-bound needs the two-action threshold instance")
        return olt_environment()
    raise ConfigurationError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
