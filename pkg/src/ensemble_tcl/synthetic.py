"""Synthetic two-layer hierarchical models with closed-form posteriors.

Two conjugate specialisations are supported:

``normal-normal``
    θ_i ~ Normal(mu0, tau2), y_i | θ_i ~ Normal(θ_i, sigma2_i); the posterior
    is Normal with precision-weighted mean.
``poisson-gamma``
    θ_i ~ Gamma(shape, rate), y_i | θ_i ~ Poisson(E_i θ_i); the posterior is
    Gamma(shape + y_i, rate + E_i).

Random numbers: unit ``i`` gets its own ``numpy.random.PCG64`` stream seeded
by ``SeedSequence(seed, spawn_key=(i,))``. Each unit stream is consumed in a
fixed order: the true θ_i, then y_i, then the S posterior draws. Normals use
``Generator.normal`` (ziggurat), gammas ``Generator.gamma`` (Marsaglia-Tsang)
and counts ``Generator.poisson``. A unit's values therefore depend only on
``seed`` and its position, not on ``n`` or on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy import special

from .ensemble import DecisionConfig, DrawMatrix, EnsembleError

__all__ = [
    "MODEL_KINDS",
    "ModelSpec",
    "SyntheticDataset",
    "analytic_optimal_labels",
    "simulate",
    "unit_rng",
]

MODEL_KINDS = ("normal-normal", "poisson-gamma")

Floats = Union[float, Sequence[float]]


def unit_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for the unit at ``index``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss))


def _per_unit(value: Floats, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise EnsembleError(f"{name} needs one value or {n} values, got {arr.size}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise EnsembleError(f"{name} must be finite and strictly positive")
    return arr


@dataclass(frozen=True)
class ModelSpec:
    """A conjugate hierarchical model and the seed that realises it.

    ``hyper`` keys: normal-normal takes ``mu0``, ``tau2`` and ``sigma2``
    (scalar or per unit); poisson-gamma takes ``shape``, ``rate`` and
    ``exposure`` (scalar or per unit).
    """

    kind: str
    n: int
    hyper: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise EnsembleError(f"unknown model kind {self.kind!r}; use one of {MODEL_KINDS}")
        if int(self.n) != self.n or self.n < 1:
            raise EnsembleError(f"unit count must be a positive integer, got {self.n}")
        if not 0 <= int(self.seed) < 2**64:
            raise EnsembleError("seed must be a 64-bit unsigned integer")
        h = dict(self.hyper)
        if self.kind == "normal-normal":
            unknown = set(h) - {"mu0", "tau2", "sigma2"}
            mu0 = float(h.get("mu0", 0.0))
            if not math.isfinite(mu0):
                raise EnsembleError("mu0 must be finite")
            h = {
                "mu0": mu0,
                "tau2": float(_per_unit(h.get("tau2", 1.0), 1, "tau2")[0]),
                "sigma2": _per_unit(h.get("sigma2", 1.0), self.n, "sigma2"),
            }
        else:
            unknown = set(h) - {"shape", "rate", "exposure"}
            h = {
                "shape": float(_per_unit(h.get("shape", 2.0), 1, "shape")[0]),
                "rate": float(_per_unit(h.get("rate", 1.0), 1, "rate")[0]),
                "exposure": _per_unit(h.get("exposure", 1.0), self.n, "exposure"),
            }
        if unknown:
            raise EnsembleError(f"unknown hyperparameters for {self.kind}: {sorted(unknown)}")
        object.__setattr__(self, "hyper", h)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "seed", int(self.seed))

    def unit_ids(self) -> list[str]:
        width = len(str(self.n))
        return [f"u{i + 1:0{width}d}" for i in range(self.n)]


def normal_posterior(mu0: float, tau2: float, sigma2: float, y: float) -> tuple[float, float]:
    """Posterior (mean, variance) of θ given y under the normal-normal model."""
    precision = 1.0 / tau2 + 1.0 / sigma2
    var = 1.0 / precision
    return var * (mu0 / tau2 + y / sigma2), var


def gamma_posterior(shape: float, rate: float, exposure: float, y: float) -> tuple[float, float]:
    """Posterior (shape, rate) of θ given a Poisson count y."""
    return shape + y, rate + exposure


@dataclass(frozen=True, eq=False)
class SyntheticDataset:
    """Simulated truth, data and exact posterior draws.

    ``post_a``/``post_b`` are the per-unit posterior parameters: (mean,
    variance) for normal-normal, (shape, rate) for poisson-gamma.
    """

    spec: ModelSpec
    truth: np.ndarray
    observations: np.ndarray
    posterior: DrawMatrix
    post_a: np.ndarray
    post_b: np.ndarray

    @property
    def unit_ids(self) -> tuple[str, ...]:
        return self.posterior.unit_ids

    def posterior_mean(self) -> np.ndarray:
        if self.spec.kind == "normal-normal":
            return self.post_a.copy()
        return self.post_a / self.post_b

    def posterior_sd(self) -> np.ndarray:
        if self.spec.kind == "normal-normal":
            return np.sqrt(self.post_b)
        return np.sqrt(self.post_a) / self.post_b

    def analytic_quantile(self, q: float) -> np.ndarray:
        """Exact posterior ``q``-quantile of every unit."""
        if not 0.0 <= q <= 1.0:
            raise EnsembleError(f"invalid quantile level {q}")
        if self.spec.kind == "normal-normal":
            return self.post_a + np.sqrt(self.post_b) * special.ndtri(q)
        return special.gammaincinv(self.post_a, q) / self.post_b

    def analytic_prob_above(self, C: float) -> np.ndarray:
        """Exact posterior P[θ_i > C]."""
        if self.spec.kind == "normal-normal":
            return special.ndtr((self.post_a - C) / np.sqrt(self.post_b))
        if C <= 0:
            return np.ones(self.spec.n)
        return special.gammaincc(self.post_a, self.post_b * C)


def simulate(spec: ModelSpec, S: int) -> SyntheticDataset:
    if int(S) != S or S < 1:
        raise EnsembleError(f"draw count must be a positive integer, got {S}")
    S = int(S)
    h = spec.hyper
    n = spec.n
    truth = np.empty(n)
    obs = np.empty(n)
    post_a = np.empty(n)
    post_b = np.empty(n)
    draws = np.empty((n, S))
    for i in range(n):
        rng = unit_rng(spec.seed, i)
        if spec.kind == "normal-normal":
            theta = rng.normal(h["mu0"], math.sqrt(h["tau2"]))
            y = rng.normal(theta, math.sqrt(h["sigma2"][i]))
            mean, var = normal_posterior(h["mu0"], h["tau2"], h["sigma2"][i], y)
            draws[i] = rng.normal(mean, math.sqrt(var), size=S)
            post_a[i], post_b[i] = mean, var
        else:
            theta = rng.gamma(h["shape"], 1.0 / h["rate"])
            y = float(rng.poisson(h["exposure"][i] * theta))
            shape, rate = gamma_posterior(h["shape"], h["rate"], h["exposure"][i], y)
            draws[i] = rng.gamma(shape, 1.0 / rate, size=S)
            post_a[i], post_b[i] = shape, rate
        truth[i], obs[i] = theta, y
    posterior = DrawMatrix(spec.unit_ids(), draws)
    return SyntheticDataset(spec, truth, obs, posterior, post_a, post_b)


def analytic_optimal_labels(d: SyntheticDataset, cfg: DecisionConfig) -> np.ndarray:
    """Labels of the exact posterior (1-p)-quantiles relative to C."""
    return d.analytic_quantile(1.0 - cfg.weight) > cfg.threshold
