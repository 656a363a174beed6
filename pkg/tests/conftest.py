"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from garrote.data import Dataset, center, sufficient_stats


def random_dataset(rng: np.random.Generator, p: int, n: int,
                   noise_sd: float = 1.0, k_active: int | None = None) -> Dataset:
    """Random Gaussian design with a sparse linear teacher."""
    x = rng.standard_normal((p, n))
    w = np.zeros(n)
    k = min(n, 2) if k_active is None else k_active
    if k > 0:
        w[rng.choice(n, size=k, replace=False)] = rng.standard_normal(k)
    y = x @ w + noise_sd * rng.standard_normal(p)
    return Dataset(x=x, y=y)


def random_state(rng: np.random.Generator, p: int, n: int):
    """(stats, x_c, m, w, beta) with m in (0.05, 0.95) and beta positive."""
    data = center(random_dataset(rng, p, n))
    stats = sufficient_stats(data, full_chi=True)
    m = rng.uniform(0.05, 0.95, size=n)
    w = rng.standard_normal(n)
    beta = float(rng.uniform(0.5, 5.0))
    return stats, data, m, w, beta


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
