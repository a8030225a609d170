"""Game instances, utilities and the follower best-response oracle."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._validation import InstanceFormatError, check_index, check_mixed_strategy

TIE_TOL = 1e-9
WILDCARD = "*"


@dataclass(frozen=True)
class Context:
    """A context vector, optionally tagged with a label.

    Labels identify contexts of finite (tabular) instances. When a label is
    present it is also the identity used for caching and for grouping rounds
    in the hindsight benchmark; otherwise the raw vector bytes are used.
    """

    vector: tuple
    label: Optional[str] = None

    def __post_init__(self):
        vec = tuple(float(v) for v in np.atleast_1d(np.asarray(self.vector, dtype=float)))
        if len(vec) < 1:
            raise ValueError("context must have dimension >= 1")
        if not all(np.isfinite(vec)):
            raise ValueError(f"context has non-finite components: {vec}")
        object.__setattr__(self, "vector", vec)

    @property
    def array(self):
        return np.asarray(self.vector, dtype=float)

    @property
    def dim(self):
        return len(self.vector)

    @property
    def key(self):
        if self.label is not None:
            return ("label", self.label)
        return ("vec", self.array.tobytes())

    @classmethod
    def labelled(cls, label, vector=(0.0,)):
        return cls(vector=vector, label=str(label))

    def __repr__(self):
        if self.label is not None:
            return f"Context({self.label!r})"
        return f"Context({list(self.vector)})"


class UtilityModel:
    """Base class: maps a context to an ``(A, A_f)`` utility matrix in [0, 1]."""

    kind = None

    def matrix(self, z: Context) -> np.ndarray:
        raise NotImplementedError

    def shape(self):
        raise NotImplementedError


class TabularUtility(UtilityModel):
    """Per-label lookup tables; ``"*"`` acts as the table for any label."""

    kind = "Tabular"

    def __init__(self, tables):
        if not tables:
            raise InstanceFormatError("Tabular utility needs at least one table")
        self.tables = {}
        shape = None
        for label, table in tables.items():
            arr = np.asarray(table, dtype=float)
            if arr.ndim != 2:
                raise InstanceFormatError(f"table for {label!r} must be 2-d [A][A_f]")
            if shape is not None and arr.shape != shape:
                raise InstanceFormatError(
                    f"table for {label!r} has shape {arr.shape}, expected {shape}")
            if np.any(arr < 0) or np.any(arr > 1) or not np.all(np.isfinite(arr)):
                raise InstanceFormatError(f"table for {label!r} has entries outside [0, 1]")
            shape = arr.shape
            arr.setflags(write=False)
            self.tables[str(label)] = arr

    def shape(self):
        return next(iter(self.tables.values())).shape

    def matrix(self, z):
        table = self.tables.get(z.label) if z.label is not None else None
        if table is None:
            table = self.tables.get(WILDCARD)
        if table is None:
            raise InstanceFormatError(f"no utility table for context label {z.label!r}")
        return table

    def is_context_free(self):
        tables = list(self.tables.values())
        return all(np.array_equal(tables[0], t) for t in tables[1:])

    def to_dict(self):
        return {"kind": self.kind,
                "tables": {k: v.tolist() for k, v in self.tables.items()}}


class LinearClippedUtility(UtilityModel):
    """``u(z, a_l, a_f) = clip(<z, theta[a_l][a_f]>, 0, 1)``."""

    kind = "LinearClipped"

    def __init__(self, theta, context_free=False):
        theta = np.asarray(theta, dtype=float)
        if theta.ndim != 3:
            raise InstanceFormatError("LinearClipped theta must have shape [A][A_f][d]")
        if not np.all(np.isfinite(theta)):
            raise InstanceFormatError("LinearClipped theta has non-finite entries")
        theta.setflags(write=False)
        self.theta = theta
        self.context_free = bool(context_free)

    def shape(self):
        return self.theta.shape[:2]

    def matrix(self, z):
        if z.dim != self.theta.shape[2]:
            raise ValueError(f"context dimension {z.dim} != model dimension {self.theta.shape[2]}")
        return np.clip(self.theta @ z.array, 0.0, 1.0)

    def to_dict(self):
        out = {"kind": self.kind, "theta": self.theta.tolist()}
        if self.context_free:
            out["context_free"] = True
        return out


@dataclass(frozen=True)
class FiniteContexts:
    contexts: tuple

    def __post_init__(self):
        object.__setattr__(self, "contexts", tuple(self.contexts))
        if not self.contexts:
            raise InstanceFormatError("finite context space is empty")

    def sample(self, rng):
        return self.contexts[int(rng.integers(len(self.contexts)))]

    def probes(self):
        return list(self.contexts)


@dataclass(frozen=True)
class BoxContexts:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or len(lo) < 1:
            raise InstanceFormatError("box bounds must have equal dimension >= 1")
        if any(a > b for a, b in zip(lo, hi)):
            raise InstanceFormatError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    def sample(self, rng):
        return Context(rng.uniform(self.lo, self.hi))

    def probes(self, n_random=16, seed=0):
        """Corners, center and a few fixed pseudo-random points of the box."""
        lo, hi = np.array(self.lo), np.array(self.hi)
        pts = [lo, hi, (lo + hi) / 2]
        for i in range(self.dim):
            p = lo.copy()
            p[i] = hi[i]
            pts.append(p)
        rng = np.random.default_rng(seed)
        pts.extend(rng.uniform(lo, hi) for _ in range(n_random))
        return [Context(p) for p in pts]


@dataclass
class GameInstance:
    """Leader utility, K follower-type utilities and a context space."""

    n_leader_actions: int
    n_follower_actions: int
    leader_utility: UtilityModel
    follower_utilities: list
    context_space: object
    type_names: list = field(default=None)

    def __post_init__(self):
        self.follower_utilities = list(self.follower_utilities)
        if self.n_leader_actions < 1 or self.n_follower_actions < 1:
            raise InstanceFormatError("need at least one leader and one follower action")
        if not self.follower_utilities:
            raise InstanceFormatError("need at least one follower type")
        expected = (self.n_leader_actions, self.n_follower_actions)
        for i, model in enumerate([self.leader_utility, *self.follower_utilities]):
            if tuple(model.shape()) != expected:
                who = "leader" if i == 0 else f"follower type {i - 1}"
                raise InstanceFormatError(f"{who} utility has shape {model.shape()}, expected {expected}")
        if self.type_names is None:
            self.type_names = [f"type{i}" for i in range(self.n_types)]
        if isinstance(self.context_space, FiniteContexts):
            for model in [self.leader_utility, *self.follower_utilities]:
                if isinstance(model, TabularUtility) and WILDCARD not in model.tables:
                    missing = [c.label for c in self.context_space.contexts
                               if c.label not in model.tables]
                    if missing:
                        raise InstanceFormatError(f"utility tables missing labels {missing}")

    @property
    def n_types(self):
        return len(self.follower_utilities)

    @property
    def shape(self):
        return self.n_leader_actions, self.n_follower_actions, self.n_types

    def leader_matrix(self, z):
        return self.leader_utility.matrix(z)

    def follower_matrices(self, z):
        """Stacked follower utilities, shape ``(K, A, A_f)``."""
        return np.stack([m.matrix(z) for m in self.follower_utilities])

    def check_horizon(self, horizon):
        if self.n_types > horizon:
            raise InstanceFormatError(f"K={self.n_types} follower types exceeds horizon T={horizon}")


def eval_utility(model, z, a_l, a_f):
    """Utility of a single (leader action, follower action) pair."""
    mat = model.matrix(z)
    return float(mat[check_index(a_l, mat.shape[0], "a_l"), check_index(a_f, mat.shape[1], "a_f")])


def expected_leader_utility(game, z, x, a_f):
    """``sum_a x[a] * u(z, a, a_f)``: linear in the mixed strategy ``x``."""
    x = check_mixed_strategy(x, game.n_leader_actions)
    a_f = check_index(a_f, game.n_follower_actions, "a_f")
    return float(x @ game.leader_matrix(z)[:, a_f])


def break_ties(values, tol=TIE_TOL):
    """Index of the maximum, preferring the highest index among near-ties."""
    values = np.asarray(values, dtype=float)
    near = values >= values.max() - tol
    return int(len(near) - 1 - np.argmax(near[::-1]))


def best_response_from_matrix(follower_matrix, x, tol=TIE_TOL):
    return break_ties(x @ follower_matrix, tol)


def follower_best_response(game, type_idx, z, x):
    """Pure best response of follower type ``type_idx`` to ``(z, x)``.

    Follower actions whose expected utility is within ``TIE_TOL`` of the
    maximum are tied; ties go to the higher action index.
    """
    type_idx = check_index(type_idx, game.n_types, "type_idx")
    x = check_mixed_strategy(x, game.n_leader_actions)
    return best_response_from_matrix(game.follower_utilities[type_idx].matrix(z), x)


def best_response_profile(game, z, x):
    """Best response of every type: the function sigma for ``(z, x)``."""
    x = check_mixed_strategy(x, game.n_leader_actions)
    mats = game.follower_matrices(z)
    return tuple(best_response_from_matrix(m, x) for m in mats)


@dataclass(frozen=True)
class RoundRecord:
    """One played round.

    ``follower_type`` is the ground truth used for evaluation; whether the
    learner was shown it is recorded by ``type_revealed``.
    """

    t: int
    context: Context
    strategy: tuple
    follower_type: int
    follower_action: int
    leader_action: int
    leader_utility: float
    expected_utility: float
    type_revealed: bool = True

    def to_dict(self):
        return {
            "t": self.t,
            "context": {"vector": list(self.context.vector), "label": self.context.label},
            "strategy": list(self.strategy),
            "follower_type": self.follower_type,
            "follower_action": self.follower_action,
            "leader_action": self.leader_action,
            "leader_utility": self.leader_utility,
            "expected_utility": self.expected_utility,
            "type_revealed": self.type_revealed,
        }


def play_round(game, z, x, type_idx, rng, t=0, type_revealed=True):
    """Sample ``a_l ~ x``, let the follower best-respond and record both utilities."""
    x = check_mixed_strategy(x, game.n_leader_actions)
    a_f = follower_best_response(game, type_idx, z, x)
    p = np.clip(x, 0.0, None)
    a_l = int(rng.choice(game.n_leader_actions, p=p / p.sum()))
    column = game.leader_matrix(z)[:, a_f]
    return RoundRecord(
        t=t,
        context=z,
        strategy=tuple(float(v) for v in x),
        follower_type=int(type_idx),
        follower_action=a_f,
        leader_action=a_l,
        leader_utility=float(column[a_l]),
        expected_utility=float(x @ column),
        type_revealed=type_revealed,
    )


def is_context_free(model, probes: Sequence[Context]):
    """Whether a utility model provably ignores the context.

    Tabular models compare their tables. LinearClipped models must be
    declared ``context_free`` and then also agree on every probe context.
    """
    if isinstance(model, TabularUtility):
        return model.is_context_free()
    if isinstance(model, LinearClippedUtility):
        if not model.context_free:
            return False
        mats = [model.matrix(z) for z in probes]
        return all(np.allclose(mats[0], m, atol=0, rtol=0) for m in mats[1:])
    return False
