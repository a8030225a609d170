"""Weight-grid policy class shared by the Hedge-based leaders."""
from __future__ import annotations

from math import comb

import numpy as np

from .base import first_argmax_columns

MAX_POLICIES = 20000
DEFAULT_RESOLUTION = 40


def weight_grid(resolution, n_types):
    """All ``w`` in the simplex with ``resolution * w[i]`` integral, lexicographic order."""
    if resolution < 1 or n_types < 1:
        raise ValueError("grid resolution and number of types must be >= 1")

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for tail in compositions(total - head, parts - 1):
                yield (head, *tail)

    counts = np.array(list(compositions(resolution, n_types)), dtype=float)
    return counts / resolution


def grid_size(resolution, n_types):
    return comb(resolution + n_types - 1, n_types - 1)


def default_resolution(horizon, n_types):
    """``min(T, 40)``, lowered until the policy class has at most 20000 members."""
    m = max(1, min(int(horizon), DEFAULT_RESOLUTION))
    while m > 1 and grid_size(m, n_types) > MAX_POLICIES:
        m -= 1
    return m


class PolicyClass:
    """Policies ``pi_w(z) = argmax_{x in E_z} sum_i w[i] * u(z, x, b_i(z, x))``.

    Evaluated lazily: :meth:`choices` maps a context table to the E_z index
    each policy selects (first index wins ties).
    """

    def __init__(self, omegas):
        self.omegas = np.asarray(omegas, dtype=float)

    def __len__(self):
        return len(self.omegas)

    def choices(self, table):
        return first_argmax_columns(table.per_type @ self.omegas.T)

    def choose(self, table, index):
        return int(self.choices(table)[index])
