"""Assignment of estimated sources to true sources."""
from __future__ import annotations

from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment

EXHAUSTIVE_MAX_D = 6


def wrap(x):
    """Map angles to [-pi, pi)."""
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


def cost_matrix(mu: np.ndarray, mu_hat: np.ndarray) -> np.ndarray:
    """c[i, j]: squared error summed over modes when estimate j is assigned to source i."""
    diff = wrap(mu[:, :, None] - mu_hat[:, None, :])
    return np.sum(diff**2, axis=0)


def match(mu: np.ndarray, mu_hat: np.ndarray) -> np.ndarray:
    """Column order of ``mu_hat`` minimising the total squared error against ``mu``."""
    c = cost_matrix(mu, mu_hat)
    d = c.shape[0]
    if d > EXHAUSTIVE_MAX_D:
        _, cols = linear_sum_assignment(c)
        return cols
    best, best_cost = None, np.inf
    rows = np.arange(d)
    for perm in permutations(range(d)):
        total = c[rows, perm].sum()
        if total < best_cost:
            best, best_cost = perm, total
    return np.array(best)


def squared_errors(mu: np.ndarray, mu_hat: np.ndarray) -> np.ndarray:
    """R x d squared (wrapped) errors after optimal matching."""
    return wrap(mu - mu_hat[:, match(mu, mu_hat)]) ** 2
