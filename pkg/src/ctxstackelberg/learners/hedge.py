"""Exponential weights over a finite set of experts."""
from __future__ import annotations

import math

import numpy as np

from .._validation import check_positive


class Hedge:
    """Exponential-weights state: cumulative losses and a learning rate.

    Parameters
    ----------
    n_experts : int
    eta : float
        Learning rate; ``0`` keeps the distribution uniform.
    loss_range : tuple of float, optional
        Bounds every loss vector must respect; violations raise ``ValueError``.
    """

    def __init__(self, n_experts, eta, loss_range=None):
        if n_experts < 1:
            raise ValueError("Hedge needs at least one expert")
        if eta < 0 or not math.isfinite(eta):
            raise ValueError(f"eta must be finite and >= 0, got {eta}")
        self.n_experts = int(n_experts)
        self.eta = float(eta)
        self.loss_range = loss_range
        self.cum_loss = np.zeros(self.n_experts)

    @staticmethod
    def default_eta(n_experts, horizon):
        return math.sqrt(math.log(n_experts) / check_positive(horizon, "horizon"))

    def probabilities(self):
        scores = -self.eta * self.cum_loss
        weights = np.exp(scores - scores.max())
        return weights / weights.sum()

    def step(self, rng):
        """Sample an expert index from the current distribution."""
        if self.n_experts == 1:
            return 0
        cdf = np.cumsum(self.probabilities())
        return int(min(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"), self.n_experts - 1))

    def update(self, losses):
        losses = np.asarray(losses, dtype=float)
        if losses.shape != (self.n_experts,):
            raise ValueError(f"expected {self.n_experts} losses, got shape {losses.shape}")
        if self.loss_range is not None:
            lo, hi = self.loss_range
            if losses.min() < lo - 1e-12 or losses.max() > hi + 1e-12:
                raise ValueError(f"loss outside [{lo}, {hi}]: [{losses.min()}, {losses.max()}]")
        self.cum_loss += losses
