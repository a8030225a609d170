"""Input validation helpers shared by the estimators and the harness."""
from __future__ import annotations

import numpy as np

SIMPLEX_TOL = 1e-9


class InstanceFormatError(ValueError):
    """Raised when a game instance (or instance file) is malformed."""


class ConfigurationError(ValueError):
    """Raised when learner or experiment hyperparameters are inconsistent."""


def check_mixed_strategy(x, n_actions=None, tol=SIMPLEX_TOL):
    """Return ``x`` as a float array after checking it lies on the simplex."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise ValueError(f"mixed strategy must be a non-empty 1-d array, got shape {x.shape}")
    if n_actions is not None and x.size != n_actions:
        raise ValueError(f"mixed strategy has {x.size} entries, expected {n_actions}")
    total = float(x.sum())
    if not np.isfinite(total):
        raise ValueError("mixed strategy has non-finite entries")
    if x.min() < -tol:
        raise ValueError(f"mixed strategy has negative entries: {x}")
    if abs(total - 1.0) > tol:
        raise ValueError(f"mixed strategy sums to {total!r}, not 1")
    return x


def check_index(value, upper, name):
    value = int(value)
    if not 0 <= value < upper:
        raise IndexError(f"{name}={value} out of range [0, {upper})")
    return value


def check_positive(value, name):
    if value is None or not np.isfinite(value) or value <= 0:
        raise ConfigurationError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_random_state(seed):
    """Turn ``seed`` into a ``numpy.random.Generator``.

    Accepts None, an int, a ``SeedSequence`` or an existing Generator (returned as is).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (int, np.integer, np.random.SeedSequence)):
        return np.random.default_rng(seed)
    raise ValueError(f"cannot build a random generator from {seed!r}")
