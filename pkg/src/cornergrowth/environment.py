"""Random weight environments on the M x N grid.

An :class:`Environment` is an immutable grid of independent real weights
drawn from a :class:`WeightDistribution`.  Built-in families are all
bounded or sub-exponential, so every absolute moment is finite; with
``normalized=True`` (the default) the law is affinely rescaled to mean 0
and variance 1 using closed-form moments.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import tempfile
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ParameterError
from .rng import stream, substream

__all__ = [
    "WeightDistribution",
    "Environment",
    "rademacher",
    "standard_normal",
    "centered_exponential",
    "centered_geometric",
    "centered_uniform",
    "custom_distribution",
    "register_sampler",
    "sample_environment",
    "truncate",
    "empirical_moments",
    "save_environment",
    "load_environment",
]

_FAMILIES = ("rademacher", "normal", "exponential", "geometric", "uniform", "custom")

# Registry of raw samplers for the "custom" family: id -> f(rng, size) -> array.
_CUSTOM_SAMPLERS: dict[str, Callable] = {}


def register_sampler(name: str, fn: Callable) -> None:
    """Register a raw sampler ``fn(rng, size)`` usable by custom distributions."""
    _CUSTOM_SAMPLERS[name] = fn


@dataclass(frozen=True)
class WeightDistribution:
    """A centered weight law, optionally rescaled to unit variance.

    ``family`` is one of 'rademacher', 'normal', 'exponential',
    'geometric', 'uniform', 'custom'.  The base law of each family is
    already centered; ``normalized=True`` additionally divides by the
    base standard deviation.  ``truncation`` tags the distribution as
    truncated at level R (weights with ``|w| > R`` are zeroed, and the
    resulting variance is deliberately left as-is).
    """

    family: str
    rate: Optional[float] = None        # exponential
    q: Optional[float] = None           # geometric
    mean: Optional[float] = None        # custom: raw-sampler mean
    variance: Optional[float] = None    # custom: raw-sampler variance
    sampler: Optional[str] = None       # custom: registered sampler id
    normalized: bool = True
    truncation: Optional[float] = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}")
        if self.family == "exponential":
            if self.rate is None or not self.rate > 0:
                raise ParameterError("exponential family needs rate > 0")
        if self.family == "geometric":
            if self.q is None or not 0 < self.q < 1:
                raise ParameterError("geometric family needs q in (0,1)")
        if self.family == "custom":
            if self.sampler not in _CUSTOM_SAMPLERS:
                raise ParameterError(f"unregistered custom sampler {self.sampler!r}")
            if self.mean is None or self.variance is None or not self.variance > 0:
                raise ParameterError("custom family needs mean and variance > 0")
        if self.truncation is not None and not self.truncation > 0:
            raise ParameterError("truncation level must be positive")

    # -- analytic moments of the centered base law ---------------------------

    def base_variance(self) -> float:
        """Variance of the centered base law (before unit rescaling)."""
        if self.family in ("rademacher", "normal"):
            return 1.0
        if self.family == "exponential":
            return 1.0 / self.rate**2
        if self.family == "geometric":
            return self.q / (1.0 - self.q) ** 2
        if self.family == "uniform":
            return 1.0 / 12.0
        return float(self.variance)

    def scale(self) -> float:
        """Multiplier applied to the centered base law."""
        return 1.0 / math.sqrt(self.base_variance()) if self.normalized else 1.0

    # -- sampling ------------------------------------------------------------

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Draw ``size`` i.i.d. values from this distribution."""
        if self.family == "rademacher":
            vals = rng.integers(0, 2, size=size).astype(np.float64) * 2.0 - 1.0
        elif self.family == "normal":
            vals = rng.standard_normal(size)
        elif self.family == "exponential":
            vals = (rng.standard_exponential(size) - 1.0) / self.rate
        elif self.family == "geometric":
            # support {0,1,...}, P(k) = (1-q) q^k
            raw = rng.geometric(1.0 - self.q, size=size).astype(np.float64) - 1.0
            vals = raw - self.q / (1.0 - self.q)
        elif self.family == "uniform":
            vals = rng.random(size) - 0.5
        else:
            vals = np.asarray(_CUSTOM_SAMPLERS[self.sampler](rng, size), dtype=np.float64)
            vals = vals - self.mean
        vals = vals * self.scale()
        if self.truncation is not None:
            vals = np.where(np.abs(vals) <= self.truncation, vals, 0.0)
        return vals

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        d = {"family": self.family, "normalized": self.normalized}
        for key in ("rate", "q", "mean", "variance", "sampler", "truncation"):
            val = getattr(self, key)
            if val is not None:
                d[key] = val
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "WeightDistribution":
        return cls(**d)


def rademacher() -> WeightDistribution:
    return WeightDistribution("rademacher")


def standard_normal() -> WeightDistribution:
    return WeightDistribution("normal")


def centered_exponential(rate: float = 1.0) -> WeightDistribution:
    return WeightDistribution("exponential", rate=rate)


def centered_geometric(q: float) -> WeightDistribution:
    return WeightDistribution("geometric", q=q)


def centered_uniform() -> WeightDistribution:
    return WeightDistribution("uniform")


def custom_distribution(mean: float, variance: float, sampler: str,
                        normalized: bool = True) -> WeightDistribution:
    return WeightDistribution("custom", mean=mean, variance=variance,
                              sampler=sampler, normalized=normalized)


@dataclass(frozen=True)
class Environment:
    """An immutable M x N grid of weights.

    ``weights[i-1, j-1]`` is the weight of cell ``(i, j)`` in 1-based
    grid coordinates.  Regenerating with the same (dist, M, N, seed)
    reproduces the array bit-for-bit.
    """

    M: int
    N: int
    weights: np.ndarray
    dist: WeightDistribution
    seed: int

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if w.shape != (self.M, self.N):
            raise ParameterError(
                f"weights shape {w.shape} does not match (M, N)=({self.M}, {self.N})"
            )
        if not np.all(np.isfinite(w)):
            raise ParameterError("environment weights must be finite")

    def weight(self, cell) -> float:
        i, j = cell
        return float(self.weights[i - 1, j - 1])


def sample_environment(dist: WeightDistribution, M: int, N: int, seed) -> Environment:
    """Draw an M x N environment of independent weights from ``dist``.

    Column ``i`` is generated from its own Philox sub-stream keyed by
    ``(seed, i)``, so columns may be generated independently and in
    parallel without changing the result.
    """
    if M < 1 or N < 1:
        raise ParameterError("M and N must be >= 1")
    weights = np.empty((M, N), dtype=np.float64)
    for i in range(M):
        weights[i, :] = dist.sample(substream(seed, i), N)
    return Environment(M, N, weights, dist, int(seed))


def truncate(env: Environment, R: float) -> Environment:
    """Zero out every weight with ``|w| > R``; tag the distribution."""
    if not R > 0:
        raise ParameterError("truncation level R must be positive")
    w = np.where(np.abs(env.weights) <= R, env.weights, 0.0)
    dist = dataclasses.replace(env.dist, truncation=float(R))
    return Environment(env.M, env.N, w, dist, env.seed)


def empirical_moments(dist: WeightDistribution, p: float, n_samples: int, seed):
    """Monte Carlo estimates of mean, second moment, and E|w|^p."""
    if n_samples < 2:
        raise ParameterError("n_samples must be >= 2")
    if p < 2:
        raise ParameterError("p must be >= 2")
    vals = dist.sample(stream(seed), n_samples)
    mean_hat = float(np.mean(vals))
    var_hat = float(np.mean(vals**2))
    p_moment_hat = float(np.mean(np.abs(vals) ** p))
    return mean_hat, var_hat, p_moment_hat


# -- file format: one JSON header line, then one CSV row per column i --------

def save_environment(env: Environment, path: str) -> None:
    header = {
        "M": env.M,
        "N": env.N,
        "seed": env.seed,
        "dist": env.dist.to_dict(),
    }
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)) or ".")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(json.dumps(header) + "\n")
            for i in range(env.M):
                fh.write(",".join(repr(float(v)) for v in env.weights[i]) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_environment(path: str) -> Environment:
    with open(path) as fh:
        header = json.loads(fh.readline())
        rows = [[float(x) for x in line.split(",")] for line in fh if line.strip()]
    weights = np.array(rows, dtype=np.float64)
    dist = WeightDistribution.from_dict(header["dist"])
    return Environment(header["M"], header["N"], weights, dist, header["seed"])
