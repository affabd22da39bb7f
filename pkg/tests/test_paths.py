import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cornergrowth.environment import rademacher, sample_environment
from cornergrowth.errors import (EnumerationCapError, InfeasibleEnsembleError,
                                 ParameterError)
from cornergrowth.paths import (AllPaths, Forbidden, HoleSpec, PathEnsemble,
                                UpRightPath, Waypoints, build_counts,
                                diagonal_cells, enumerate_paths, hole_ensemble,
                                inclusion_probability, path_energy, sample_path)
from cornergrowth.rng import derive_seed


def visit_fractions(ens):
    """Inclusion probabilities by brute-force enumeration."""
    paths = list(enumerate_paths(ens))
    visits = {}
    for p in paths:
        for cell in p.cells:
            visits[cell] = visits.get(cell, 0) + 1
    return len(paths), {c: Fraction(v, len(paths)) for c, v in visits.items()}


# ---------------------------------------------------------------------------
# Counting
# ---------------------------------------------------------------------------

@given(M=st.integers(1, 9), N=st.integers(1, 9))
@settings(max_examples=40, deadline=None)
def test_unconstrained_count_is_binomial(M, N):
    ct = build_counts(PathEnsemble(M, N))
    assert ct.Z == math.comb(M + N - 2, M - 1)


def test_counts_match_enumeration_with_constraints():
    ensembles = [
        PathEnsemble(5, 4),
        PathEnsemble(5, 5, Waypoints(((2, 3),))),
        PathEnsemble(6, 6, Waypoints(((2, 2), (4, 5)))),
        PathEnsemble(5, 5, Forbidden(frozenset({(3, 3), (2, 4)}))),
        hole_ensemble(6, B=2),
    ]
    for ens in ensembles:
        ct = build_counts(ens)
        n, fracs = visit_fractions(ens)
        assert ct.Z == n
        for i in range(1, ens.M + 1):
            for j in range(1, ens.N + 1):
                assert ct.inclusion_fraction((i, j)) == fracs.get((i, j), Fraction(0))


def test_log_shadow_matches_exact_counts():
    ens = PathEnsemble(8, 7, Forbidden(frozenset({(4, 4)})))
    ct = build_counts(ens)
    for i in range(ens.M):
        for j in range(ens.N):
            f = ct.forward[i][j]
            expected = math.log(f) if f else -math.inf
            assert ct.forward_log[i, j] == pytest.approx(expected, abs=1e-12)


def test_kernel_log_route_agrees_with_exact():
    ens = PathEnsemble(9, 9, Forbidden(frozenset({(5, 5), (3, 7)})))
    exact = build_counts(ens)
    logct = build_counts(ens, exact_store_limit=0, exact_log_limit=0)
    assert logct.Z is None
    assert logct.Z_log == pytest.approx(exact.Z_log, rel=1e-12)
    np.testing.assert_allclose(logct.inclusion_grid(), exact.inclusion_grid(),
                               rtol=1e-10, atol=1e-14)


def test_diagonal_inclusion_sums_to_one():
    ens = PathEnsemble(6, 5, Waypoints(((3, 3),)))
    ct = build_counts(ens)
    for k in range(2, ens.M + ens.N + 1):
        total = sum(ct.inclusion_fraction(c) for c in diagonal_cells(ens.M, ens.N, k))
        assert total == 1


def test_infeasible_ensemble_raises():
    # A full blocked column disconnects source from sink.
    wall = frozenset((2, j) for j in range(1, 5))
    with pytest.raises(InfeasibleEnsembleError):
        build_counts(PathEnsemble(3, 4, Forbidden(wall)))


# ---------------------------------------------------------------------------
# Ensembles and masks
# ---------------------------------------------------------------------------

def test_hole_mask_small_examples():
    assert HoleSpec(4, B=2).forbidden_cells() == {(2, 2)}
    assert HoleSpec(6, B=2).forbidden_cells() == {(3, 3)}
    cells = HoleSpec(6, B=3).forbidden_cells()
    assert cells == {(i, j) for i in (2, 3, 4) for j in (2, 3, 4)}
    assert build_counts(hole_ensemble(4, B=2)).Z == 8


def test_hole_beta_uses_exact_floor():
    # floor(beta * N) computed in rational arithmetic: (2/6) * 6 == 2.
    assert HoleSpec(6, beta=Fraction(2, 6)).B == 2
    assert HoleSpec(6, beta=0.5).B == 3


def test_hole_spec_validation():
    with pytest.raises(ParameterError):
        HoleSpec(4)
    with pytest.raises(ParameterError):
        HoleSpec(4, beta=0.5, B=2)
    with pytest.raises(ParameterError):
        HoleSpec(4, beta=1.5)
    # B=3 in N=4 swallows the source corner, which the ensemble rejects.
    with pytest.raises(ParameterError):
        hole_ensemble(4, B=3)


def test_waypoint_mask_is_union_of_rectangles():
    ens = PathEnsemble(5, 5, Waypoints(((3, 3),)))
    mask = ens.allowed_mask()
    expected = np.zeros((5, 5), dtype=bool)
    expected[0:3, 0:3] = True
    expected[2:5, 2:5] = True
    assert np.array_equal(mask, expected)
    # every admissible path passes through the waypoint
    for p in enumerate_paths(ens):
        assert (3, 3) in p.cells


def test_waypoint_validation():
    with pytest.raises(ParameterError):
        PathEnsemble(5, 5, Waypoints(((1, 3),)))        # on boundary
    with pytest.raises(ParameterError):
        PathEnsemble(5, 5, Waypoints(((3, 3), (3, 4))))  # not strictly increasing
    with pytest.raises(ParameterError):
        PathEnsemble(5, 5, Waypoints(((4, 4), (2, 2))))  # out of order


def test_forbidden_validation():
    with pytest.raises(ParameterError):
        PathEnsemble(4, 4, Forbidden(frozenset({(1, 1)})))
    with pytest.raises(ParameterError):
        PathEnsemble(4, 4, Forbidden(frozenset({(5, 1)})))


def test_ensemble_json_roundtrip():
    for ens in [PathEnsemble(4, 7),
                PathEnsemble(5, 5, Waypoints(((2, 2), (4, 4)))),
                hole_ensemble(6, B=3)]:
        assert PathEnsemble.from_json(ens.to_json()) == ens


# ---------------------------------------------------------------------------
# Paths and energies
# ---------------------------------------------------------------------------

@given(steps=st.text(alphabet="RU", max_size=12))
def test_step_string_roundtrip(steps):
    path = UpRightPath.from_steps(steps)
    assert path.to_steps() == steps
    assert len(path.cells) == len(steps) + 1


def test_path_validation():
    with pytest.raises(ParameterError):
        UpRightPath(((2, 1), (2, 2)))
    with pytest.raises(ParameterError):
        UpRightPath(((1, 1), (2, 2)))
    with pytest.raises(ParameterError):
        UpRightPath.from_steps("RX")


def test_path_energy_sums_weights():
    env = sample_environment(rademacher(), 3, 3, 0)
    path = UpRightPath.from_steps("RRUU")
    expected = sum(env.weight(c) for c in path.cells)
    assert path_energy(path, env) == pytest.approx(expected)
    short = UpRightPath.from_steps("R")
    with pytest.raises(ParameterError):
        path_energy(short, env)


# ---------------------------------------------------------------------------
# Enumeration and sampling
# ---------------------------------------------------------------------------

def test_enumeration_is_lexicographic_and_complete():
    paths = [p.to_steps() for p in enumerate_paths(PathEnsemble(3, 3))]
    assert paths == sorted(paths)
    assert len(paths) == 6
    assert len(set(paths)) == 6


def test_enumeration_cap():
    with pytest.raises(EnumerationCapError) as err:
        list(enumerate_paths(PathEnsemble(12, 12), cap=100))
    assert err.value.count == math.comb(22, 11)
    assert err.value.cap == 100


def test_sample_path_deterministic_and_admissible():
    ens = hole_ensemble(6, B=2)
    ct = build_counts(ens)
    a = sample_path(ct, 5)
    assert a == sample_path(ct, 5)
    allowed = ens.allowed_mask()
    for i, j in a.cells:
        assert allowed[i - 1, j - 1]
    assert a.cells[-1] == (6, 6)


def test_sampler_is_uniform_small_grid():
    from scipy.stats import chi2
    ens = PathEnsemble(3, 3)
    ct = build_counts(ens)
    index = {p.to_steps(): k for k, p in enumerate(enumerate_paths(ens))}
    counts = np.zeros(len(index))
    n = 6000
    for idx in range(n):
        counts[index[sample_path(ct, derive_seed(3, idx)).to_steps()]] += 1
    expected = n / len(index)
    stat = float(np.sum((counts - expected) ** 2 / expected))
    assert stat < chi2.ppf(0.999, len(index) - 1)


def test_log_space_sampler_matches_constraints():
    ens = PathEnsemble(7, 7, Waypoints(((4, 4),)))
    ct = build_counts(ens, exact_store_limit=0, exact_log_limit=0)
    p = sample_path(ct, 11)
    assert (4, 4) in p.cells


def test_inclusion_probability_helper():
    ct = build_counts(PathEnsemble(2, 2))
    assert inclusion_probability(ct, (1, 2)) == 0.5
    assert inclusion_probability(ct, (1, 1)) == 1.0
    with pytest.raises(ParameterError):
        inclusion_probability(ct, (3, 1))
