"""Synthetic benchmark instances: Gaussian inputs with structured covariance
and a sparse linear teacher."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset


@dataclass(frozen=True)
class Covariance:
    """Input covariance recipe.

    kind: identity | toeplitz | block
      toeplitz: cov[i, j] = zeta ** |i - j|
      block:    block-diagonal, constant ``within_corr`` inside blocks of
                ``block_size`` features (stand-in for block-correlated inputs)
    """

    kind: str = "identity"
    zeta: float = 0.0
    block_size: int = 10
    within_corr: float = 0.9

    def matrix(self, n: int) -> np.ndarray:
        if self.kind == "identity":
            return np.eye(n)
        if self.kind == "toeplitz":
            if not 0.0 <= self.zeta < 1.0:
                raise ValueError("toeplitz zeta must be in [0, 1)")
            idx = np.arange(n)
            return self.zeta ** np.abs(idx[:, None] - idx[None, :])
        if self.kind == "block":
            if not 0.0 <= self.within_corr < 1.0:
                raise ValueError("within_corr must be in [0, 1)")
            cov = np.eye(n)
            for start in range(0, n, self.block_size):
                stop = min(start + self.block_size, n)
                cov[start:stop, start:stop] = self.within_corr
                cov[range(start, stop), range(start, stop)] = 1.0
            return cov
        raise ValueError(f"unknown covariance kind: {self.kind}")


@dataclass(frozen=True)
class InstanceSpec:
    """Recipe for one synthetic problem."""

    n: int
    p: int
    p_val: int
    p_test: int
    w_true: np.ndarray
    noise_sd: float = 1.0
    covariance: Covariance = field(default_factory=Covariance)
    seed: int = 0

    def __post_init__(self):
        w = np.asarray(self.w_true, dtype=float)
        if w.shape != (self.n,):
            raise ValueError("w_true must have length n")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")
        object.__setattr__(self, "w_true", w)

    def to_config(self) -> str:
        """key=value serialization, round-trippable via from_config."""
        cov = self.covariance
        lines = [
            f"n={self.n}",
            f"p={self.p}",
            f"p_val={self.p_val}",
            f"p_test={self.p_test}",
            f"noise_sd={float(self.noise_sd)!r}",
            f"seed={self.seed}",
            f"covariance={cov.kind}",
            f"zeta={float(cov.zeta)!r}",
            f"block_size={cov.block_size}",
            f"within_corr={float(cov.within_corr)!r}",
            "w_true=" + ",".join(repr(float(v)) for v in self.w_true),
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_config(cls, text: str) -> "InstanceSpec":
        kv = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            kv[key.strip()] = val.strip()
        cov = Covariance(
            kind=kv.get("covariance", "identity"),
            zeta=float(kv.get("zeta", 0.0)),
            block_size=int(kv.get("block_size", 10)),
            within_corr=float(kv.get("within_corr", 0.9)),
        )
        w_true = np.array([float(v) for v in kv["w_true"].split(",")])
        return cls(
            n=int(kv["n"]),
            p=int(kv["p"]),
            p_val=int(kv["p_val"]),
            p_test=int(kv["p_test"]),
            w_true=w_true,
            noise_sd=float(kv.get("noise_sd", 1.0)),
            covariance=cov,
            seed=int(kv.get("seed", 0)),
        )


@dataclass(frozen=True)
class GeneratedInstance:
    train: Dataset
    val: Dataset
    test: Dataset
    w_true: np.ndarray
    spec: InstanceSpec


def _draw(rng, n_rows, n, chol, w_true, noise_sd) -> Dataset:
    x = rng.standard_normal((n_rows, n)) @ chol.T
    y = x @ w_true + noise_sd * rng.standard_normal(n_rows)
    return Dataset(x=x, y=y)


def gen_instance(spec: InstanceSpec) -> GeneratedInstance:
    """Draw train/val/test from the same teacher; deterministic given seed."""
    cov = spec.covariance.matrix(spec.n)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError("requested covariance is not positive definite") from exc
    rng = np.random.default_rng(spec.seed)
    train = _draw(rng, spec.p, spec.n, chol, spec.w_true, spec.noise_sd)
    val = _draw(rng, spec.p_val, spec.n, chol, spec.w_true, spec.noise_sd)
    test = _draw(rng, max(spec.p_test, 2), spec.n, chol, spec.w_true, spec.noise_sd)
    return GeneratedInstance(train=train, val=val, test=test, w_true=spec.w_true, spec=spec)


def example1_spec(seed: int = 0) -> InstanceSpec:
    """Single active feature out of 100, unit noise, independent inputs."""
    w = np.zeros(100)
    w[0] = 1.0
    return InstanceSpec(n=100, p=50, p_val=50, p_test=400, w_true=w, noise_sd=1.0, seed=seed)


def example2_spec(seed: int = 0) -> InstanceSpec:
    """Five active features, Toeplitz-correlated inputs (zeta = 0.5)."""
    w = np.zeros(100)
    w[[0, 1, 4, 9, 49]] = 1.0
    return InstanceSpec(
        n=100, p=50, p_val=50, p_test=400, w_true=w, noise_sd=1.0,
        covariance=Covariance(kind="toeplitz", zeta=0.5), seed=seed,
    )


def random_support_spec(
    n: int, p: int, p_val: int, p_test: int, k_active: int,
    noise_sd: float, zeta: float, seed: int,
) -> InstanceSpec:
    """k active indices chosen uniformly without replacement, all weights 1."""
    rng = np.random.default_rng(seed)
    w = np.zeros(n)
    w[rng.choice(n, size=k_active, replace=False)] = 1.0
    cov = Covariance(kind="toeplitz", zeta=zeta) if zeta > 0 else Covariance()
    return InstanceSpec(
        n=n, p=p, p_val=p_val, p_test=p_test, w_true=w,
        noise_sd=noise_sd, covariance=cov, seed=seed,
    )


def gen_zhao(variant: str, p: int, seed: int = 0, p_val: int | None = None,
             p_test: int = 400) -> GeneratedInstance:
    """Three-feature consistency example: x3 = (2/3)x1 + (2/3)x2 + xi.

    xi has standard deviation 1/3 so that x3 has unit variance; the sign
    pattern of the first two teacher weights decides L1 consistency:
    variant 'a' uses teacher (2, 3, 0) (inconsistent for L1),
    variant 'b' uses (-2, 3, 0) (consistent).
    """
    if variant not in ("a", "b"):
        raise ValueError("variant must be 'a' or 'b'")
    if p < 3:
        raise ValueError("need p >= 3")
    w_true = np.array([2.0, 3.0, 0.0]) if variant == "a" else np.array([-2.0, 3.0, 0.0])
    if p_val is None:
        p_val = p
    rng = np.random.default_rng(seed)

    def draw(rows):
        x12 = rng.standard_normal((rows, 2))
        xi = rng.standard_normal(rows) / 3.0
        x3 = (2.0 / 3.0) * x12[:, 0] + (2.0 / 3.0) * x12[:, 1] + xi
        x = np.column_stack([x12, x3])
        y = x @ w_true + rng.standard_normal(rows)
        return Dataset(x=x, y=y)

    spec = InstanceSpec(
        n=3, p=p, p_val=p_val, p_test=p_test, w_true=w_true, noise_sd=1.0, seed=seed
    )
    return GeneratedInstance(
        train=draw(p), val=draw(p_val), test=draw(max(p_test, 2)),
        w_true=w_true, spec=spec,
    )
