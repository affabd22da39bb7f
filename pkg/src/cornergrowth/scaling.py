"""Quantitative scaling machinery for path ensembles.

Computes the inclusion-probability norm L, per-anti-diagonal maxima and
their sum, the hypergeometric mode on a diagonal, log-log scaling fits
of L(N), the general concentration-bound evaluator, admissibility of
the (eta, lambda, p) power parameters, and the closed-form inclusion
sum for the hole ensemble.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ParameterError
from .paths import CountTable, PathEnsemble, build_counts

__all__ = [
    "compute_L",
    "exact_L_squared",
    "DiagonalMaxima",
    "diagonal_maxima",
    "hypergeometric_probability",
    "hypergeometric_mode",
    "ScalingReport",
    "fit_lambda",
    "ConcentrationParams",
    "ConcentrationBound",
    "concentration_bound",
    "Admissibility",
    "qclt_admissibility",
    "hole_inclusion_formula",
]


def compute_L(ct: CountTable) -> float:
    """Euclidean norm of the vector of inclusion probabilities."""
    p = ct.inclusion_grid()
    return math.sqrt(math.fsum((p * p).ravel().tolist()))


def exact_L_squared(ct: CountTable) -> Fraction:
    """L^2 as an exact rational (requires stored exact tables)."""
    if ct.forward is None:
        raise ParameterError("exact tables not stored for this grid size")
    zsq = ct.Z * ct.Z
    total = 0
    for i in range(ct.M):
        frow, brow = ct.forward[i], ct.backward[i]
        for j in range(ct.N):
            total += (frow[j] * brow[j]) ** 2
    return Fraction(total, zsq)


@dataclass(frozen=True)
class DiagonalMaxima:
    """Max inclusion probability per anti-diagonal k = 2..M+N."""

    values: tuple            # M_k for k = 2..M+N
    total: float             # sum of the maxima
    l_squared: float
    bound_holds: bool        # L^2 <= sum M_k (with tiny float slack)

    def value(self, k: int) -> float:
        return self.values[k - 2]


def diagonal_maxima(ct: CountTable) -> DiagonalMaxima:
    p = ct.inclusion_grid()
    M, N = ct.M, ct.N
    vals = []
    for k in range(2, M + N + 1):
        i0 = np.arange(max(0, k - 2 - (N - 1)), min(M - 1, k - 2) + 1)
        diag = p[i0, (k - 2) - i0]
        vals.append(float(diag.max()))
    total = math.fsum(vals)
    l2 = math.fsum((p * p).ravel().tolist())
    return DiagonalMaxima(tuple(vals), total, l2, l2 <= total + 1e-12)


# ---------------------------------------------------------------------------
# Hypergeometric inclusion law on a diagonal (unconstrained ensemble)
# ---------------------------------------------------------------------------

def _comb0(n: int, r: int) -> int:
    if r < 0 or r > n or n < 0:
        return 0
    return math.comb(n, r)


def hypergeometric_probability(i: int, k: int, M: int, N: int) -> Fraction:
    """P(path visits (i, k-i)) for a uniform path in the full rectangle."""
    return Fraction(_comb0(k - 2, i - 1) * _comb0(M + N - k, M - i),
                    math.comb(M + N - 2, M - 1))


def hypergeometric_mode(k: int, M: int, N: int):
    """Real mode m = (k-1) M / (M+N) and the maximizing integer index.

    Candidates floor(m) and ceil(m) are clamped to the admissible range
    [max(1, k-N), min(M, k-1)]; ties resolve to the smaller index.
    """
    if not 2 <= k <= M + N:
        raise ParameterError(f"diagonal index k={k} out of range [2, {M + N}]")
    m = (k - 1) * M / (M + N)
    lo, hi = max(1, k - N), min(M, k - 1)
    cands = sorted({min(max(int(math.floor(m)), lo), hi),
                    min(max(int(math.ceil(m)), lo), hi)})
    best = cands[0]
    best_num = _comb0(k - 2, best - 1) * _comb0(M + N - k, M - best)
    for i in cands[1:]:
        num = _comb0(k - 2, i - 1) * _comb0(M + N - k, M - i)
        if num > best_num:
            best, best_num = i, num
    return m, best


# ---------------------------------------------------------------------------
# Scaling fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingReport:
    """Exact L(N) scan over an N-grid with a log-log slope fit."""

    N_values: tuple
    L_values: tuple
    Mk_sums: tuple
    lambda_hat: float
    eta: float
    regression_r2: float

    def rows(self):
        for N, L, mk in zip(self.N_values, self.L_values, self.Mk_sums):
            yield {"N": N, "L": L, "sum_Mk": mk,
                   "sum_Mk_over_sqrtN": mk / math.sqrt(N)}

    def to_json(self) -> str:
        return json.dumps({
            "lambda_hat": self.lambda_hat,
            "eta": self.eta,
            "regression_r2": self.regression_r2,
            "rows": list(self.rows()),
        }, indent=2)


def fit_lambda(ensemble_family: Callable[[int], PathEnsemble],
               N_grid: Sequence[int]) -> ScalingReport:
    """Compute L(N) over the grid and regress log L on log N."""
    N_grid = [int(n) for n in N_grid]
    if len(N_grid) < 4 or any(b <= a for a, b in zip(N_grid, N_grid[1:])):
        raise ParameterError("N_grid must be strictly increasing with >= 4 points")
    Ls, mks, n_allowed = [], [], []
    for N in N_grid:
        ct = build_counts(ensemble_family(N))
        dm = diagonal_maxima(ct)
        Ls.append(math.sqrt(dm.l_squared))
        mks.append(dm.total)
        n_allowed.append(int(ct.allowed.sum()))
    x = np.log(np.asarray(N_grid, dtype=float))
    y = np.log(np.asarray(Ls))
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    eta = float(np.polyfit(x, np.log(np.asarray(n_allowed, dtype=float)), 1)[0])
    return ScalingReport(tuple(N_grid), tuple(Ls), tuple(mks),
                         float(slope), eta, r2)


# ---------------------------------------------------------------------------
# Concentration bound and admissibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConcentrationParams:
    """Inputs to the concentration-bound evaluator.

    kappa, C, c are unspecified absolute constants; the defaults of 1
    are illustrative placeholders, not ground truth.
    """

    n: int
    m: int
    L: float
    K: float
    p: float
    R: float
    s: float
    t: float
    kappa: float = 1.0
    C: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        for name in ("n", "m", "L", "K", "R", "s", "t", "kappa", "C", "c"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"parameter {name} must be positive")
        if not self.p > 2:
            raise ParameterError("p must exceed 2")


@dataclass(frozen=True)
class ConcentrationBound:
    epsilon: float
    prob_bound: float        # clamped to [0, 1]
    prob_bound_raw: float


def concentration_bound(params: ConcentrationParams) -> ConcentrationBound:
    """Evaluate the deviation threshold and its probability bound.

    epsilon = kappa/sqrt(m) + sqrt(K n L^2 / (m R^(p-2))) + s + t,
    bound   = K n L^2 / (m R^(p-2) s^2) + C exp(-c m t^2 / (L^2 R^2)).
    """
    q = params
    tail = q.K * q.n * q.L**2 / (q.m * q.R ** (q.p - 2))
    epsilon = q.kappa / math.sqrt(q.m) + math.sqrt(tail) + q.s + q.t
    raw = tail / q.s**2 + q.C * math.exp(-q.c * q.m * q.t**2 / (q.L**2 * q.R**2))
    return ConcentrationBound(epsilon, min(max(raw, 0.0), 1.0), raw)


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    rho_range: Optional[tuple]   # open interval (lo, hi), None when empty


def qclt_admissibility(eta: float, lam: float, p: float) -> Admissibility:
    """Whether (eta, lambda, p) admit a truncation exponent rho.

    Admissible iff lambda < 1/2 and p > (2 + 2 eta)/(1 - 2 lambda); the
    returned open interval is the set of rho > 0 compatible with both
    power-counting inequalities.
    """
    if not 0 < eta <= 2:
        raise ParameterError("eta must lie in (0, 2]")
    if not 0 < lam <= eta / 2:
        raise ParameterError("lambda must lie in (0, eta/2]")
    if lam >= 0.5 or p <= 2:
        return Admissibility(False, None)
    lo = (eta + 2 * lam) / (p - 2)
    hi = 0.5 - lam
    if lo < hi:
        return Admissibility(True, (lo, hi))
    return Admissibility(False, None)


def default_truncation_exponent(lam: float, eps: float = 0.05) -> float:
    """Default truncation schedule exponent rho = 1/2 - lambda - eps."""
    return 0.5 - lam - eps


# ---------------------------------------------------------------------------
# Hole ensemble closed form
# ---------------------------------------------------------------------------

def hole_inclusion_formula(i: int, j: int, N: int, A: int) -> float:
    """Closed-form inclusion sum for the hole ensemble, reduced sector.

    Valid for j >= i and i + j <= N + 1; sums over the crossing point
    (y, N+1-y), y = 1..A, of the middle anti-diagonal, with vanishing
    binomials for y < i.  The normalizer counts all admissible paths,
    the factor 2 accounting for the symmetric sector.
    """
    if not (1 <= i <= N and 1 <= j <= N):
        raise ParameterError("cell outside the square")
    if j < i or i + j > N + 1:
        raise ParameterError("cell outside the reduced sector (need j >= i, i+j <= N+1)")
    if not 1 <= A <= N:
        raise ParameterError("A must be in [1, N]")
    k = i + j
    num = 0
    z = 0
    for y in range(1, A + 1):
        c = _comb0(N - 1, y - 1)
        z += c * c
        num += _comb0(k - 2, i - 1) * _comb0(N + 1 - k, y - i) * c
    return float(Fraction(num, 2 * z))
