import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ndtr

from cornergrowth.environment import (Environment, rademacher,
                                      sample_environment, standard_normal)
from cornergrowth.errors import ParameterError
from cornergrowth.paths import PathEnsemble, build_counts, hole_ensemble
from cornergrowth.qclt import (LIPSCHITZ_ANCHORS, QuenchedSample,
                               convergence_experiment, exact_quenched_law,
                               gauss_distance, quenched_sample)


def constant_env(M, N, value=0.0):
    w = np.full((M, N), value)
    return Environment(M, N, w, rademacher(), 0)


# ---------------------------------------------------------------------------
# Quenched laws
# ---------------------------------------------------------------------------

def test_exact_law_two_by_two():
    w = np.array([[1.0, 2.0], [3.0, 4.0]])
    env = Environment(2, 2, w, rademacher(), 0)
    law = exact_quenched_law(env, PathEnsemble(2, 2))
    # two paths with energies 1+3+4=8 and 1+2+4=7, normalizer sqrt(3)
    assert law.exact_atoms == ((7 / math.sqrt(3), 0.5), (8 / math.sqrt(3), 0.5))


def test_exact_law_merges_equal_energies():
    env = constant_env(3, 3, 1.0)
    law = exact_quenched_law(env, PathEnsemble(3, 3))
    assert law.exact_atoms == ((5 / math.sqrt(5), 1.0),)


def test_quenched_sample_matches_exact_mean():
    env = sample_environment(standard_normal(), 6, 6, 3)
    ens = PathEnsemble(6, 6)
    law = exact_quenched_law(env, ens)
    exact_mean = sum(v * p for v, p in law.exact_atoms)
    qs = quenched_sample(env, ens, 100_000, 9)
    assert qs.values.mean() == pytest.approx(exact_mean, abs=0.02)


def test_exact_mean_identity_with_inclusion_grid():
    # E_sigma <Y, w> equals the inclusion-weighted sum of the weights.
    env = sample_environment(standard_normal(), 5, 7, 12)
    ens = PathEnsemble(5, 7)
    law = exact_quenched_law(env, ens)
    exact_mean = math.fsum(v * p for v, p in law.exact_atoms)
    grid_mean = float((build_counts(ens).inclusion_grid() * env.weights).sum())
    grid_mean /= math.sqrt(5 + 7 - 1)
    assert exact_mean == pytest.approx(grid_mean, abs=1e-10)


def test_quenched_sample_deterministic_and_thread_invariant():
    env = sample_environment(rademacher(), 16, 16, 4)
    ens = PathEnsemble(16, 16)
    a = quenched_sample(env, ens, 5000, 7, threads=1)
    b = quenched_sample(env, ens, 5000, 7, threads=4)
    assert np.array_equal(a.values, b.values)
    c = quenched_sample(env, ens, 5000, 8)
    assert not np.array_equal(a.values, c.values)


def test_quenched_sample_respects_constraints():
    # with a hole of weight +100, no sampled energy may include it
    w = np.zeros((6, 6))
    w[2, 2] = 100.0
    env = Environment(6, 6, w, rademacher(), 0)
    qs = quenched_sample(env, hole_ensemble(6, B=2), 2000, 0)
    assert np.all(qs.values < 50)


def test_dimension_mismatch_rejected():
    env = constant_env(3, 3)
    with pytest.raises(ParameterError):
        quenched_sample(env, PathEnsemble(3, 4), 10, 0)
    with pytest.raises(ParameterError):
        quenched_sample(env, PathEnsemble(3, 3), 0, 0)


# ---------------------------------------------------------------------------
# Gaussian distances
# ---------------------------------------------------------------------------

def test_point_mass_distances():
    law = QuenchedSample("normal", 0, PathEnsemble(1, 1), 1.0,
                         np.array([0.0]), exact_atoms=((0.0, 1.0),))
    d = gauss_distance(law)
    assert d.ks == pytest.approx(0.5)
    assert d.w1 == pytest.approx(math.sqrt(2 / math.pi), rel=1e-12)
    # witness at anchor 0: | |x| mass at 0 | vs E|Z|
    gaps = dict(d.lipschitz_gaps)
    assert gaps[0.0] == pytest.approx(math.sqrt(2 / math.pi), rel=1e-12)


def test_ks_small_for_large_normal_sample():
    # DKW: with n = 10^6 true-normal draws, KS < 0.002 except w.p. ~ 2e-4
    vals = np.random.Generator(np.random.Philox(1)).standard_normal(10**6)
    d = gauss_distance(QuenchedSample("normal", 0, PathEnsemble(1, 1), 1.0, vals))
    assert d.ks < 0.002
    assert d.w1 < 0.005
    assert d.max_lipschitz_gap < 0.005


def test_w1_matches_quadrature():
    atoms = ((-1.3, 0.2), (-0.1, 0.25), (0.4, 0.35), (2.2, 0.2))
    law = QuenchedSample("normal", 0, PathEnsemble(1, 1), 1.0,
                         np.array([v for v, _ in atoms]), exact_atoms=atoms)
    d = gauss_distance(law)
    v = np.array([a for a, _ in atoms])
    c = np.cumsum([p for _, p in atoms])

    def integrand(x):
        emp = c[np.searchsorted(v, x, side="right") - 1] if x >= v[0] else 0.0
        return abs(emp - ndtr(x))

    expected, _ = quad(integrand, -10, 10, limit=400)
    assert d.w1 == pytest.approx(expected, rel=1e-8)


def test_ks_matches_brute_force_grid():
    atoms = ((-0.7, 0.3), (0.2, 0.4), (1.5, 0.3))
    law = QuenchedSample("normal", 0, PathEnsemble(1, 1), 1.0,
                         np.array([v for v, _ in atoms]), exact_atoms=atoms)
    d = gauss_distance(law)
    v = np.array([a for a, _ in atoms])
    c = np.cumsum([p for _, p in atoms])
    grid = np.linspace(-8, 8, 400001)
    emp = np.zeros_like(grid)
    for x, cc in zip(v, c):
        emp[grid >= x] = cc
    brute = np.max(np.abs(emp - ndtr(grid)))
    assert d.ks == pytest.approx(brute, abs=1e-4)


def test_weighted_and_unweighted_paths_agree():
    vals = np.array([0.3, -0.2, 0.3, 1.1, -0.2, 0.3])
    a = gauss_distance(QuenchedSample("normal", 0, PathEnsemble(1, 1), 1.0, vals))
    atoms = ((-0.2, 2 / 6), (0.3, 3 / 6), (1.1, 1 / 6))
    b = gauss_distance(QuenchedSample("normal", 0, PathEnsemble(1, 1), 1.0,
                                      vals, exact_atoms=atoms))
    assert a.ks == pytest.approx(b.ks, rel=1e-12)
    assert a.w1 == pytest.approx(b.w1, rel=1e-12)


def test_mc_distance_close_to_exact_law():
    env = sample_environment(standard_normal(), 7, 7, 21)
    ens = PathEnsemble(7, 7)
    exact = gauss_distance(exact_quenched_law(env, ens))
    n = 200_000
    mc = gauss_distance(quenched_sample(env, ens, n, 5))
    assert abs(mc.ks - exact.ks) < 3 * 1.36 / math.sqrt(n)
    assert abs(mc.w1 - exact.w1) < 0.02


def test_anchor_set():
    assert LIPSCHITZ_ANCHORS == (-2.0, -1.0, 0.0, 1.0, 2.0)


def test_empty_sample_rejected():
    law = QuenchedSample("normal", 0, PathEnsemble(1, 1), 1.0, np.array([]))
    with pytest.raises(ParameterError):
        gauss_distance(law)


# ---------------------------------------------------------------------------
# Convergence experiment
# ---------------------------------------------------------------------------

def test_convergence_experiment_rows_and_determinism():
    res = convergence_experiment(rademacher(), lambda N: PathEnsemble(N, N),
                                 (8, 16), 4000, env_seed=3, path_seed=4)
    assert [r["N"] for r in res.rows] == [8, 16]
    assert res.ks_first == res.rows[0]["ks"]
    again = convergence_experiment(rademacher(), lambda N: PathEnsemble(N, N),
                                   (8, 16), 4000, env_seed=3, path_seed=4)
    assert res.rows == again.rows
    threaded = convergence_experiment(rademacher(), lambda N: PathEnsemble(N, N),
                                      (8, 16), 4000, env_seed=3, path_seed=4,
                                      threads=3)
    assert res.rows == threaded.rows


def test_convergence_experiment_grid_validation():
    with pytest.raises(ParameterError):
        convergence_experiment(rademacher(), lambda N: PathEnsemble(N, N),
                               (16, 8), 100, 0, 0)
    with pytest.raises(ParameterError):
        convergence_experiment(rademacher(), lambda N: PathEnsemble(N, N),
                               (), 100, 0, 0)
