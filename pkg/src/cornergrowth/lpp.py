"""Last-passage and polymer comparators on raw nonnegative weights.

Unlike the rest of the package, the typical-vs-maximal comparison uses
uncentered weight families (geometric with parameter q, exponential
with mean 1), whose limiting last-passage constants are known in closed
form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .environment import Environment
from .errors import ParameterError
from .paths import PathEnsemble, UpRightPath, enumerate_paths, path_energy
from .rng import substream

__all__ = [
    "LppResult",
    "PolymerResult",
    "last_passage",
    "log_partition",
    "polymer_weights",
    "raw_weight_grid",
    "TypicalVsMax",
    "typical_vs_max",
    "geometric_lpp_constant",
    "geometric_typical_constant",
    "EXPONENTIAL_LPP_CONSTANT",
    "EXPONENTIAL_TYPICAL_CONSTANT",
]

EXPONENTIAL_LPP_CONSTANT = 4.0       # limit of E G_N / N, exponential mean-1 weights
EXPONENTIAL_TYPICAL_CONSTANT = 2.0   # limit of (2N-1) E w / N


def geometric_lpp_constant(q: float) -> float:
    """Limit of E G_N / N for geometric(q) weights: 2 sqrt(q) / (1 - sqrt(q))."""
    if not 0 < q < 1:
        raise ParameterError("q must be in (0,1)")
    r = math.sqrt(q)
    return 2 * r / (1 - r)


def geometric_typical_constant(q: float) -> float:
    """Limit of the typical energy per N: 2 q / (1 - q)."""
    if not 0 < q < 1:
        raise ParameterError("q must be in (0,1)")
    return 2 * q / (1 - q)


@dataclass(frozen=True)
class LppResult:
    G: float
    argmax_path: UpRightPath
    per_N_ratio: float


@dataclass(frozen=True)
class PolymerResult:
    beta: float
    logZ: float
    sampled_weights: Optional[tuple] = None   # ((path, Q), ...)


def last_passage(env: Environment) -> LppResult:
    """Maximal path energy and a maximizing path (ties go horizontal)."""
    g = kernels.lpp_grid(env.weights)
    M, N = env.M, env.N
    cells = [(M, N)]
    i, j = M, N
    while (i, j) != (1, 1):
        if i == 1:
            j -= 1
        elif j == 1:
            i -= 1
        elif g[i - 2, j - 1] >= g[i - 1, j - 2]:
            i -= 1
        else:
            j -= 1
        cells.append((i, j))
    path = UpRightPath(tuple(reversed(cells)))
    G = float(g[M - 1, N - 1])
    return LppResult(G, path, G / N)


def log_partition(env: Environment, beta: float) -> PolymerResult:
    """Log of the polymer partition sum over all paths in the rectangle."""
    if not beta > 0:
        raise ParameterError("beta must be positive")
    z = kernels.polymer_log_grid(env.weights, beta)
    return PolymerResult(float(beta), float(z[env.M - 1, env.N - 1]))


def polymer_weights(env: Environment, beta: float, cap: int = 10**5) -> PolymerResult:
    """Polymer path probabilities Q by enumeration (small grids only)."""
    if not beta > 0:
        raise ParameterError("beta must be positive")
    ens = PathEnsemble(env.M, env.N)
    energies = []
    paths = []
    for path in enumerate_paths(ens, cap=cap):
        paths.append(path)
        energies.append(beta * path_energy(path, env))
    e = np.asarray(energies)
    shift = e.max()
    logZ = float(shift + math.log(np.sum(np.exp(e - shift))))
    q = np.exp(e - logZ)
    return PolymerResult(float(beta), logZ, tuple(zip(paths, q.tolist())))


@dataclass(frozen=True)
class TypicalVsMax:
    mean_G_over_N: float
    typical_over_N: float
    predicted_G: float
    predicted_typical: float


def _raw_weights(dist_kind: str, q: Optional[float], rng, shape) -> np.ndarray:
    if dist_kind == "exponential":
        return rng.standard_exponential(shape)
    if dist_kind == "geometric":
        if q is None or not 0 < q < 1:
            raise ParameterError("geometric kind needs q in (0,1)")
        # support {0,1,...}, P(k) = (1-q) q^k
        return rng.geometric(1.0 - q, size=shape).astype(np.float64) - 1.0
    raise ParameterError(f"unknown dist_kind {dist_kind!r}")


def raw_weight_grid(dist_kind: str, N: int, seed, env_index: int = 0,
                    q: Optional[float] = None) -> np.ndarray:
    """Raw N x N weight grid for environment ``env_index`` under ``seed``."""
    return _raw_weights(dist_kind, q, substream(seed, env_index), (N, N))


def typical_vs_max(dist_kind: str, N: int, n_env: int, seed,
                   q: Optional[float] = None) -> TypicalVsMax:
    """Measured G/N over fresh environments vs the typical energy scale.

    ``dist_kind`` is 'exponential' (mean 1) or 'geometric' (parameter
    q); raw nonnegative weights are used throughout.
    """
    if N < 1 or n_env < 1:
        raise ParameterError("N and n_env must be >= 1")
    ratios = []
    for r in range(n_env):
        w = _raw_weights(dist_kind, q, substream(seed, r), (N, N))
        g = kernels.lpp_grid(w)
        ratios.append(float(g[N - 1, N - 1]) / N)
    if dist_kind == "exponential":
        mean_w = 1.0
        pred_g = EXPONENTIAL_LPP_CONSTANT
        pred_typ = EXPONENTIAL_TYPICAL_CONSTANT
    else:
        mean_w = q / (1.0 - q)
        pred_g = geometric_lpp_constant(q)
        pred_typ = geometric_typical_constant(q)
    return TypicalVsMax(
        mean_G_over_N=float(np.mean(ratios)),
        typical_over_N=(2 * N - 1) * mean_w / N,
        predicted_G=pred_g,
        predicted_typical=pred_typ,
    )
