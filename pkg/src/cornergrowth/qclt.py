"""Quenched law of normalized path energies and its Gaussian distance.

For one fixed environment, the energy of a uniform random admissible
path, divided by sqrt(M+N-1), defines the quenched law.  This module
builds that law exactly (by enumeration) or by Monte Carlo, and
measures its distance to the standard normal via the Kolmogorov-Smirnov
statistic, the order-1 transport distance, and a family of convex
1-Lipschitz witness functions f_a(x) = |x - a|.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from . import kernels
from .environment import Environment, WeightDistribution, sample_environment
from .errors import ParameterError
from .paths import CountTable, PathEnsemble, build_counts, enumerate_paths, path_energy
from .rng import derive_seed, substream

__all__ = [
    "QuenchedSample",
    "GaussDistance",
    "quenched_sample",
    "exact_quenched_law",
    "gauss_distance",
    "ConvergenceResult",
    "convergence_experiment",
    "LIPSCHITZ_ANCHORS",
]

# Anchors of the built-in convex 1-Lipschitz witnesses |x - a|.
LIPSCHITZ_ANCHORS = (-2.0, -1.0, 0.0, 1.0, 2.0)

# Uniform variates are generated chunk by chunk so memory stays bounded;
# chunk boundaries depend only on (M, N), keeping results independent of
# the thread count.
_UNIFORM_BUDGET = 4_000_000


@dataclass(frozen=True)
class QuenchedSample:
    """Normalized path energies for one fixed environment."""

    env_family: str
    env_seed: int
    ensemble: PathEnsemble
    normalizer: float
    values: np.ndarray
    exact_atoms: Optional[tuple] = None   # ((value, probability), ...)


@dataclass(frozen=True)
class GaussDistance:
    ks: float
    w1: float
    lipschitz_gaps: tuple    # ((anchor, gap), ...)

    @property
    def max_lipschitz_gap(self) -> float:
        return max(g for _, g in self.lipschitz_gaps)


def _check_dims(env: Environment, ens: PathEnsemble):
    if (env.M, env.N) != (ens.M, ens.N):
        raise ParameterError(
            f"environment is {(env.M, env.N)} but ensemble is {(ens.M, ens.N)}"
        )


def quenched_sample(env: Environment, ens: PathEnsemble, n_paths: int, seed,
                    ct: Optional[CountTable] = None, threads: int = 1) -> QuenchedSample:
    """Energies of ``n_paths`` i.i.d. uniform paths in the fixed ``env``.

    Path randomness comes from sub-streams of ``seed`` (one per chunk of
    paths), independent of the environment seed; results do not depend
    on ``threads``.
    """
    _check_dims(env, ens)
    if n_paths < 1:
        raise ParameterError("n_paths must be >= 1")
    if ct is None:
        ct = build_counts(ens)
    steps = env.M + env.N - 2
    norm = math.sqrt(env.M + env.N - 1)
    if steps == 0:
        vals = np.full(n_paths, env.weights[0, 0] / norm)
        return QuenchedSample(env.dist.family, env.seed, ens, norm, vals)
    chunk = max(1, _UNIFORM_BUDGET // steps)
    blog = ct.backward_log
    weights = env.weights
    out = np.empty(n_paths)

    def run(idx: int):
        lo = idx * chunk
        hi = min(lo + chunk, n_paths)
        u = substream(seed, idx).random((hi - lo, steps))
        out[lo:hi] = kernels.sample_energies(blog, weights, u)

    n_chunks = (n_paths + chunk - 1) // chunk
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, range(n_chunks)))
    else:
        for idx in range(n_chunks):
            run(idx)
    return QuenchedSample(env.dist.family, env.seed, ens, norm, out / norm)


def exact_quenched_law(env: Environment, ens: PathEnsemble, cap: int = 10**7) -> QuenchedSample:
    """The full quenched law by enumeration: atoms (value, probability)."""
    _check_dims(env, ens)
    norm = math.sqrt(env.M + env.N - 1)
    counts: dict = {}
    total = 0
    for path in enumerate_paths(ens, cap=cap):
        v = path_energy(path, env) / norm
        counts[v] = counts.get(v, 0) + 1
        total += 1
    atoms = tuple(sorted((v, c / total) for v, c in counts.items()))
    values = np.array([v for v, _ in atoms])
    return QuenchedSample(env.dist.family, env.seed, ens, norm, values, exact_atoms=atoms)


# ---------------------------------------------------------------------------
# Gaussian distance
# ---------------------------------------------------------------------------

def _phi(x):
    return np.exp(-0.5 * np.asarray(x) ** 2) / math.sqrt(2 * math.pi)


def _H(x):
    """Antiderivative of the standard normal CDF: x*Phi(x) + phi(x)."""
    x = np.asarray(x, dtype=float)
    return x * ndtr(x) + _phi(x)


def _weighted_atoms(qs: QuenchedSample):
    if qs.exact_atoms is not None:
        v = np.array([a for a, _ in qs.exact_atoms])
        p = np.array([w for _, w in qs.exact_atoms])
        return v, p
    v = np.sort(np.asarray(qs.values, dtype=float))
    vu, inverse = np.unique(v, return_inverse=True)
    p = np.bincount(inverse) / v.size
    return vu, p


def gauss_distance(qs: QuenchedSample) -> GaussDistance:
    """KS, W1, and Lipschitz-witness distances to the standard normal."""
    if qs.values is None or len(qs.values) == 0:
        raise ParameterError("empty quenched sample")
    v, p = _weighted_atoms(qs)
    c = np.cumsum(p)
    c[-1] = 1.0
    c_minus = c - p
    phi_v = ndtr(v)
    ks = float(max(np.max(np.abs(c - phi_v)), np.max(np.abs(c_minus - phi_v))))

    # W1 = integral of |F_emp - Phi|, piecewise in closed form.
    w1 = float(_H(v[0]))                       # left tail: integral of Phi
    w1 += float(_H(v[-1]) - v[-1])             # right tail: integral of 1 - Phi
    if v.size > 1:
        a, b = v[:-1], v[1:]
        cl = c[:-1]
        Ha, Hb = _H(a), _H(b)
        below = Hb - Ha - cl * (b - a)         # level below Phi on [a, b]
        above = -below
        x_star = ndtri(np.clip(cl, 1e-300, 1 - 1e-16))
        Hs = _H(x_star)
        split = (cl * (x_star - a) - (Hs - Ha)) + (Hb - Hs - cl * (b - x_star))
        mid = np.where(cl <= phi_v[:-1], below,
                       np.where(cl >= phi_v[1:], above, split))
        w1 += float(np.sum(mid))

    gaps = []
    for a in LIPSCHITZ_ANCHORS:
        emp = float(np.sum(p * np.abs(v - a)))
        exact = 2 * float(_phi(a)) + a * (2 * float(ndtr(a)) - 1.0)
        gaps.append((a, abs(emp - exact)))
    return GaussDistance(ks, w1, tuple(gaps))


# ---------------------------------------------------------------------------
# Convergence experiment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceResult:
    rows: tuple            # one dict per grid point
    decreased: bool        # KS at the largest N below KS at the smallest

    @property
    def ks_first(self) -> float:
        return self.rows[0]["ks"]

    @property
    def ks_last(self) -> float:
        return self.rows[-1]["ks"]


def convergence_experiment(dist: WeightDistribution,
                           ensemble_family: Callable[[int], PathEnsemble],
                           N_grid: Sequence[int],
                           n_paths: int,
                           env_seed,
                           path_seed,
                           threads: int = 1,
                           fresh_env_per_N: bool = True) -> ConvergenceResult:
    """Quenched Gaussian-distance table over an N-grid.

    One environment is fixed per grid point (seed derived from
    ``env_seed`` and N unless ``fresh_env_per_N`` is False, which
    reuses ``env_seed`` itself for visual coupling across N).
    """
    N_grid = [int(n) for n in N_grid]
    if not N_grid or any(b <= a for a, b in zip(N_grid, N_grid[1:])):
        raise ParameterError("N_grid must be nonempty and strictly increasing")
    rows = []
    for N in N_grid:
        ens = ensemble_family(N)
        e_seed = derive_seed(env_seed, N) if fresh_env_per_N else int(env_seed)
        p_seed = derive_seed(path_seed, N)
        env = sample_environment(dist, ens.M, ens.N, e_seed)
        qs = quenched_sample(env, ens, n_paths, p_seed, threads=threads)
        d = gauss_distance(qs)
        rows.append({
            "dist": dist.family,
            "ensemble": ens.to_json(),
            "N": N,
            "env_seed": e_seed,
            "path_seed": p_seed,
            "n_paths": n_paths,
            "ks": d.ks,
            "w1": d.w1,
            "max_lip_gap": d.max_lipschitz_gap,
        })
    decreased = rows[-1]["ks"] < rows[0]["ks"]
    return ConvergenceResult(tuple(rows), decreased)
