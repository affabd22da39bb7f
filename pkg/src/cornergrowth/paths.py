"""Exact combinatorics of up-right paths under ensemble constraints.

An up-right path goes from cell (1,1) to (M,N) by unit right/up steps.
Three constraint kinds define the admissible path set: all paths,
paths through ordered interior waypoints, and paths avoiding a set of
forbidden cells (including the centered-hole ensemble).

Path counts are kept exactly as big integers up to a size threshold and
always as a double-precision natural-log shadow; inclusion
probabilities and the uniform sampler prefer exact rational arithmetic
and fall back to log space on large grids.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Union

import numpy as np

from . import kernels
from .environment import Environment
from .errors import EnumerationCapError, InfeasibleEnsembleError, ParameterError
from .rng import stream

__all__ = [
    "AllPaths",
    "Waypoints",
    "Forbidden",
    "HoleSpec",
    "PathEnsemble",
    "hole_ensemble",
    "UpRightPath",
    "CountTable",
    "build_counts",
    "inclusion_probability",
    "sample_path",
    "enumerate_paths",
    "path_energy",
    "diagonal_cells",
    "EXACT_STORE_LIMIT",
    "EXACT_LOG_LIMIT",
    "ENUMERATION_CAP",
]

NEG_INF = -math.inf

# Exact big-int tables are stored in full below this many cells, and
# streamed (exact log shadow + exact Z, tables discarded) below the
# larger limit; beyond that only the float log-space DP is run.
EXACT_STORE_LIMIT = 40_000
EXACT_LOG_LIMIT = 1_100_000

ENUMERATION_CAP = 10**7


# ---------------------------------------------------------------------------
# Constraints and ensembles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AllPaths:
    kind = "all"


@dataclass(frozen=True)
class Waypoints:
    """Ordered interior cells every path must visit."""

    points: tuple

    kind = "waypoints"

    def __post_init__(self):
        object.__setattr__(self, "points", tuple((int(x), int(y)) for x, y in self.points))


@dataclass(frozen=True)
class Forbidden:
    """Cells no path may visit."""

    cells: frozenset

    kind = "forbidden"

    def __post_init__(self):
        object.__setattr__(
            self, "cells", frozenset((int(x), int(y)) for x, y in self.cells)
        )


Constraint = Union[AllPaths, Waypoints, Forbidden]


@dataclass(frozen=True)
class HoleSpec:
    """Centered square hole of side B = floor(beta*N) in the N x N square.

    A cell (i,j) is inside the hole iff max(|i - N/2|, |j - N/2|) < B/2,
    evaluated in exact integer arithmetic as max(|2i - N|, |2j - N|) < B.
    Exactly one of ``beta`` and ``B`` must be given.
    """

    N: int
    beta: Optional[float] = None
    B: Optional[int] = None

    def __post_init__(self):
        if self.N < 1:
            raise ParameterError("N must be >= 1")
        if (self.beta is None) == (self.B is None):
            raise ParameterError("give exactly one of beta or B")
        if self.beta is not None:
            if not 0 < self.beta < 1:
                raise ParameterError("beta must be in (0,1)")
            object.__setattr__(self, "B", int(Fraction(self.beta) * self.N))
        else:
            if not 0 <= self.B <= self.N:
                raise ParameterError("B must be in [0, N]")

    def forbidden_cells(self) -> frozenset:
        N, B = self.N, self.B
        cells = set()
        for i in range(1, N + 1):
            if abs(2 * i - N) >= B:
                continue
            for j in range(1, N + 1):
                if abs(2 * j - N) < B:
                    cells.add((i, j))
        return frozenset(cells)


@dataclass(frozen=True)
class PathEnsemble:
    """A rectangle plus a constraint defining the uniform path law."""

    M: int
    N: int
    constraint: Constraint = field(default_factory=AllPaths)

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ParameterError("M and N must be >= 1")
        c = self.constraint
        if isinstance(c, Waypoints):
            prev = (1, 1)
            for x, y in c.points:
                if not (1 < x < self.M and 1 < y < self.N):
                    raise ParameterError(f"waypoint {(x, y)} not strictly inside the rectangle")
                if not (x > prev[0] and y > prev[1]):
                    raise ParameterError("waypoints must be strictly increasing in both coordinates")
                prev = (x, y)
        elif isinstance(c, Forbidden):
            for x, y in c.cells:
                if not (1 <= x <= self.M and 1 <= y <= self.N):
                    raise ParameterError(f"forbidden cell {(x, y)} outside the rectangle")
            if (1, 1) in c.cells or (self.M, self.N) in c.cells:
                raise ParameterError("forbidden mask may not contain (1,1) or (M,N)")
        elif not isinstance(c, AllPaths):
            raise ParameterError(f"unknown constraint {c!r}")

    def allowed_mask(self) -> np.ndarray:
        """Boolean (M,N) array; mask[i-1, j-1] says cell (i,j) is admissible."""
        c = self.constraint
        if isinstance(c, AllPaths):
            return np.ones((self.M, self.N), dtype=bool)
        if isinstance(c, Forbidden):
            mask = np.ones((self.M, self.N), dtype=bool)
            for x, y in c.cells:
                mask[x - 1, y - 1] = False
            return mask
        # Waypoints: union of the closed rectangles spanned by consecutive
        # waypoints (with (1,1) and (M,N) prepended/appended).  Consecutive
        # rectangles meet only at the shared waypoint, so any admissible
        # up-right path visits every waypoint.
        mask = np.zeros((self.M, self.N), dtype=bool)
        pts = [(1, 1), *c.points, (self.M, self.N)]
        for (x1, y1), (x2, y2) in zip(pts, pts[1:]):
            mask[x1 - 1:x2, y1 - 1:y2] = True
        return mask

    def to_json(self) -> str:
        c = self.constraint
        d: dict = {"M": self.M, "N": self.N, "constraint": c.kind}
        if isinstance(c, Waypoints):
            d["waypoints"] = [list(p) for p in c.points]
        elif isinstance(c, Forbidden):
            d["cells"] = sorted([list(p) for p in c.cells])
        return json.dumps(d)

    @classmethod
    def from_json(cls, text: str) -> "PathEnsemble":
        d = json.loads(text)
        kind = d["constraint"]
        if kind == "all":
            c: Constraint = AllPaths()
        elif kind == "waypoints":
            c = Waypoints(tuple(tuple(p) for p in d["waypoints"]))
        elif kind == "forbidden":
            c = Forbidden(frozenset(tuple(p) for p in d["cells"]))
        else:
            raise ParameterError(f"unknown constraint kind {kind!r}")
        return cls(d["M"], d["N"], c)


def hole_ensemble(N: int, beta: Optional[float] = None, B: Optional[int] = None) -> PathEnsemble:
    """N x N ensemble of paths avoiding the centered hole."""
    spec = HoleSpec(N, beta=beta, B=B)
    return PathEnsemble(N, N, Forbidden(spec.forbidden_cells()))


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UpRightPath:
    """Cell sequence from (1,1) to (M,N) with unit right/up steps."""

    cells: tuple

    def __post_init__(self):
        cells = tuple((int(i), int(j)) for i, j in self.cells)
        object.__setattr__(self, "cells", cells)
        if cells[0] != (1, 1):
            raise ParameterError("path must start at (1,1)")
        for (i0, j0), (i1, j1) in zip(cells, cells[1:]):
            if (i1 - i0, j1 - j0) not in ((1, 0), (0, 1)):
                raise ParameterError("path steps must be unit right or up")

    @property
    def end(self):
        return self.cells[-1]

    def to_steps(self) -> str:
        """Step string over {R, U}, length len(cells) - 1."""
        out = []
        for (i0, _), (i1, _) in zip(self.cells, self.cells[1:]):
            out.append("R" if i1 > i0 else "U")
        return "".join(out)

    @classmethod
    def from_steps(cls, steps: str) -> "UpRightPath":
        i, j = 1, 1
        cells = [(1, 1)]
        for s in steps:
            if s == "R":
                i += 1
            elif s == "U":
                j += 1
            else:
                raise ParameterError(f"invalid step {s!r}")
            cells.append((i, j))
        return cls(tuple(cells))


def path_energy(path: UpRightPath, env: Environment) -> float:
    """Sum of environment weights along the path."""
    iM, jN = path.end
    if iM != env.M or jN != env.N:
        raise ParameterError(
            f"path ends at {(iM, jN)} but environment is {(env.M, env.N)}"
        )
    w = env.weights
    return float(math.fsum(w[i - 1, j - 1] for i, j in path.cells))


def diagonal_cells(M: int, N: int, k: int):
    """1-based cells on anti-diagonal i + j = k, for k in 2..M+N."""
    for i in range(max(1, k - N), min(M, k - 1) + 1):
        yield (i, k - i)


# ---------------------------------------------------------------------------
# Counting
# ---------------------------------------------------------------------------

def _exact_pass(allowed_rows, M, N, reverse, log_out, store):
    """Big-integer count DP, filling ``log_out`` and optionally storing tables.

    ``reverse=False`` computes forward counts F (paths from (1,1)),
    ``reverse=True`` backward counts B (paths to (M,N)).  Returns
    (tables or None, corner count).
    """
    tables = [None] * M if store else None
    prev = None
    i_range = range(M - 1, -1, -1) if reverse else range(M)
    j_range = range(N - 1, -1, -1) if reverse else range(N)
    i_src, j_src = (M - 1, N - 1) if reverse else (0, 0)
    for i in i_range:
        arow = allowed_rows[i]
        row = [0] * N
        for j in j_range:
            if not arow[j]:
                continue
            if i == i_src and j == j_src:
                row[j] = 1
                continue
            if reverse:
                v = row[j + 1] if j + 1 < N else 0
            else:
                v = row[j - 1] if j > 0 else 0
            if prev is not None:
                v += prev[j]
            row[j] = v
        log_out[i, :] = [math.log(v) if v else NEG_INF for v in row]
        if store:
            tables[i] = row
        prev = row
    corner = prev[0] if reverse else prev[N - 1]
    return tables, corner


@dataclass
class CountTable:
    """Per-cell forward/backward path counts for one ensemble.

    ``forward``/``backward`` are nested lists of exact integers indexed
    [i-1][j-1], present only on small grids; the float log tables are
    always present (-inf marks count zero).
    """

    M: int
    N: int
    allowed: np.ndarray
    forward_log: np.ndarray
    backward_log: np.ndarray
    Z_log: float
    forward: Optional[list] = None
    backward: Optional[list] = None
    Z: Optional[int] = None

    @property
    def exact(self) -> bool:
        return self.forward is not None

    def _check_cell(self, cell):
        i, j = cell
        if not (1 <= i <= self.M and 1 <= j <= self.N):
            raise ParameterError(f"cell {cell} outside the {self.M} x {self.N} rectangle")
        return i, j

    def inclusion_fraction(self, cell) -> Fraction:
        """Exact inclusion probability F(i,j) * B(i,j) / Z."""
        i, j = self._check_cell(cell)
        if self.forward is None:
            raise ParameterError("exact tables not stored for this grid size")
        return Fraction(self.forward[i - 1][j - 1] * self.backward[i - 1][j - 1], self.Z)

    def inclusion_probability(self, cell) -> float:
        i, j = self._check_cell(cell)
        if not self.allowed[i - 1, j - 1]:
            return 0.0
        if self.forward is not None:
            num = self.forward[i - 1][j - 1] * self.backward[i - 1][j - 1]
            if num < 2**1000 and self.Z < 2**1000:
                return num / self.Z
            return float(Fraction(num, self.Z))
        p = math.exp(self.forward_log[i - 1, j - 1] + self.backward_log[i - 1, j - 1] - self.Z_log)
        return min(p, 1.0)

    def inclusion_grid(self) -> np.ndarray:
        """Float inclusion probabilities for all cells (0 where blocked)."""
        with np.errstate(invalid="ignore"):
            p = np.exp(self.forward_log + self.backward_log - self.Z_log)
        p = np.where(self.allowed, p, 0.0)
        return np.clip(p, 0.0, 1.0)


def build_counts(ens: PathEnsemble,
                 exact_store_limit: int = EXACT_STORE_LIMIT,
                 exact_log_limit: int = EXACT_LOG_LIMIT) -> CountTable:
    """Forward/backward count DP over the admissible cells of ``ens``."""
    M, N = ens.M, ens.N
    allowed = ens.allowed_mask()
    cells = M * N
    flog = np.empty((M, N))
    blog = np.empty((M, N))
    if cells <= exact_log_limit:
        rows = allowed.tolist()
        store = cells <= exact_store_limit
        fwd, Z = _exact_pass(rows, M, N, False, flog, store)
        bwd, Zb = _exact_pass(rows, M, N, True, blog, store)
        if Z == 0:
            raise InfeasibleEnsembleError(f"no admissible path in {ens}")
        assert Zb == Z
        return CountTable(M, N, allowed, flog, blog, math.log(Z),
                          forward=fwd, backward=bwd, Z=Z)
    flog = kernels.forward_log_counts(allowed)
    blog = kernels.backward_log_counts(allowed)
    z_log = float(flog[M - 1, N - 1])
    if z_log == NEG_INF:
        raise InfeasibleEnsembleError(f"no admissible path in {ens}")
    return CountTable(M, N, allowed, flog, blog, z_log)


def inclusion_probability(ct: CountTable, cell) -> float:
    """Probability that a uniform admissible path visits ``cell``."""
    return ct.inclusion_probability(cell)


# ---------------------------------------------------------------------------
# Sampling and enumeration
# ---------------------------------------------------------------------------

def sample_path(ct: CountTable, seed) -> UpRightPath:
    """One exactly-uniform admissible path, deterministic in ``seed``.

    On small grids the right/up decision compares a uniform variate to
    the exact rational B(i+1,j) / (B(i+1,j) + B(i,j+1)); on large grids
    the ratio is formed in log space.
    """
    if ct.Z == 0:
        raise InfeasibleEnsembleError("empty ensemble")
    rng = stream(seed)
    M, N = ct.M, ct.N
    i, j = 1, 1
    cells = [(1, 1)]
    exact = ct.backward is not None
    while (i, j) != (M, N):
        if exact:
            br = ct.backward[i][j - 1] if i < M else 0
            bu = ct.backward[i - 1][j] if j < N else 0
            if br and bu:
                go_right = Fraction(rng.random()) < Fraction(br, br + bu)
            else:
                go_right = br > 0
        else:
            br = ct.backward_log[i, j - 1] if i < M else NEG_INF
            bu = ct.backward_log[i - 1, j] if j < N else NEG_INF
            if br > NEG_INF and bu > NEG_INF:
                go_right = rng.random() < 1.0 / (1.0 + math.exp(bu - br))
            else:
                go_right = br > NEG_INF
        if go_right:
            i += 1
        else:
            j += 1
        cells.append((i, j))
    return UpRightPath(tuple(cells))


def enumerate_paths(ens: PathEnsemble, cap: int = ENUMERATION_CAP) -> Iterator[UpRightPath]:
    """All admissible paths, lexicographic in the step string (R < U).

    Enumeration walks the admissible mask directly and is independent of
    the count DP (the DP is consulted only to refuse oversized jobs).
    """
    ct = build_counts(ens)
    if ct.Z is None or ct.Z > cap:
        count = ct.Z if ct.Z is not None else int(math.ceil(math.exp(ct.Z_log)))
        raise EnumerationCapError(count, cap)
    allowed = ens.allowed_mask()
    M, N = ens.M, ens.N

    def walk(i, j, cells):
        if (i, j) == (M, N):
            yield UpRightPath(tuple(cells))
            return
        if i < M and allowed[i, j - 1]:
            cells.append((i + 1, j))
            yield from walk(i + 1, j, cells)
            cells.pop()
        if j < N and allowed[i - 1, j]:
            cells.append((i, j + 1))
            yield from walk(i, j + 1, cells)
            cells.pop()

    if allowed[0, 0]:
        yield from walk(1, 1, [(1, 1)])
