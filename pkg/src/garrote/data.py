"""Dataset containers, centering, sufficient statistics, and splitting.

The solvers never touch raw data directly: the primal path consumes
``SufficientStats`` (b, chi, sigma_y2) and the dual path additionally the
centered design matrix.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np


class DataError(ValueError):
    """Raised for malformed or non-finite input data."""


@dataclass(frozen=True)
class Dataset:
    """Raw regression data: x is (p samples, n features), y is (p,)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 2 or y.ndim != 1:
            raise DataError("x must be 2-d and y 1-d")
        if x.shape[0] != y.shape[0]:
            raise DataError(
                f"sample count mismatch: x has {x.shape[0]} rows, y has {y.shape[0]}"
            )
        if x.shape[0] < 2 or x.shape[1] < 1:
            raise DataError("need at least 2 samples and 1 feature")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DataError("non-finite entries in input data")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        self.x.setflags(write=False)
        self.y.setflags(write=False)

    @property
    def p(self) -> int:
        return self.x.shape[0]

    @property
    def n(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class CenteredDataset:
    """Column-centered data plus the removed means (needed at prediction time)."""

    x_c: np.ndarray
    y_c: np.ndarray
    x_mean: np.ndarray
    y_mean: float

    @property
    def p(self) -> int:
        return self.x_c.shape[0]

    @property
    def n(self) -> int:
        return self.x_c.shape[1]


@dataclass(frozen=True)
class SufficientStats:
    """Centered second moments: b_i = (1/p) sum_mu x_i y, chi_ij = (1/p) sum_mu x_i x_j.

    ``chi`` is only materialized when requested (the dual path never needs it).
    ``mask`` marks usable features; zero-variance columns are masked out.
    """

    b: np.ndarray
    chi_diag: np.ndarray
    sigma_y2: float
    p: int
    n: int
    chi: np.ndarray | None = None
    mask: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.mask is None:
            object.__setattr__(self, "mask", np.ones(self.n, dtype=bool))


def center(dataset: Dataset) -> CenteredDataset:
    """Remove column means from x and the mean from y."""
    x_mean = dataset.x.mean(axis=0)
    y_mean = float(dataset.y.mean())
    return CenteredDataset(
        x_c=dataset.x - x_mean,
        y_c=dataset.y - y_mean,
        x_mean=x_mean,
        y_mean=y_mean,
    )


def sufficient_stats(data: CenteredDataset, full_chi: bool = False) -> SufficientStats:
    """Second moments of centered data; set ``full_chi`` for the primal (n<p) path."""
    p = data.p
    b = data.x_c.T @ data.y_c / p
    chi_diag = np.einsum("ij,ij->j", data.x_c, data.x_c) / p
    sigma_y2 = float(data.y_c @ data.y_c / p)
    mask = chi_diag > 0.0
    chi = (data.x_c.T @ data.x_c / p) if full_chi else None
    return SufficientStats(
        b=b, chi_diag=chi_diag, sigma_y2=sigma_y2, p=p, n=data.n, chi=chi, mask=mask
    )


def split(
    dataset: Dataset, p_train: int, p_val: int, p_test: int, seed: int
) -> tuple["Dataset | None", "Dataset | None", "Dataset | None"]:
    """Disjoint random row split, deterministic in ``seed``.

    A part requested with zero rows comes back as None (an empty Dataset is
    not representable).
    """
    total = p_train + p_val + p_test
    if total > dataset.p:
        raise DataError(
            f"requested {total} rows but dataset has only {dataset.p}"
        )
    rng = np.random.default_rng(seed)
    perm = rng.permutation(dataset.p)
    idx_tr = perm[:p_train]
    idx_va = perm[p_train : p_train + p_val]
    idx_te = perm[p_train + p_val : total]

    def take(idx):
        if idx.size == 0:
            return None
        return Dataset(dataset.x[idx], dataset.y[idx])

    return take(idx_tr), take(idx_va), take(idx_te)


def load_dataset(path_or_buffer) -> Dataset:
    """Read delimited text: first column y, remaining columns features.

    Accepts comma or tab separation and an optional '#' header line.
    """
    if hasattr(path_or_buffer, "read"):
        text = path_or_buffer.read()
    else:
        with open(path_or_buffer) as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise DataError("empty dataset file")
    delimiter = "," if "," in lines[0] else None
    try:
        arr = np.loadtxt(io.StringIO("\n".join(lines)), delimiter=delimiter, ndmin=2)
    except ValueError as exc:
        raise DataError(f"could not parse dataset: {exc}") from exc
    if arr.shape[1] < 2:
        raise DataError("need at least one feature column besides y")
    return Dataset(x=arr[:, 1:], y=arr[:, 0])


def save_dataset(dataset: Dataset, path, header: str | None = None) -> None:
    """Write the load_dataset format (comma-separated, y first)."""
    arr = np.column_stack([dataset.y, dataset.x])
    head = header if header is not None else "y," + ",".join(
        f"x{i + 1}" for i in range(dataset.n)
    )
    np.savetxt(path, arr, delimiter=",", header=head)
