import math

import numpy as np
import pytest

import heatlab as hl
from heatlab.errors import InputError


def test_dirichlet_energy_single_edge(two_vertex):
    assert hl.dirichlet_energy(two_vertex, [0.0, 1.0]) == 1.0


def test_dirichlet_energy_constant_is_zero(torus16):
    assert hl.dirichlet_energy(torus16, np.full(torus16.n, 3.7)) == 0.0


def test_dirichlet_energy_path3():
    p3 = hl.build_path(3)
    assert hl.dirichlet_energy(p3, [0.0, 1.0, 2.0]) == 2.0


def test_dirichlet_energy_dimension_mismatch(two_vertex):
    with pytest.raises(InputError):
        hl.dirichlet_energy(two_vertex, [1.0, 2.0, 3.0])


def test_energy_matches_quadratic_form(torus16, rng):
    gen = torus16.generator
    for _ in range(100):
        f = rng.standard_normal(torus16.n)
        e = hl.dirichlet_energy(torus16, f)
        q = gen.energy(f)
        assert abs(e - q) <= 1e-10 * (1.0 + f @ f)


def test_self_adjointness(builder_suite, rng):
    for space in builder_suite.values():
        a = space.laplacian_action
        for _ in range(20):
            f = rng.standard_normal(space.n)
            g = rng.standard_normal(space.n)
            lhs = space.inner(a @ f, g)
            rhs = space.inner(f, a @ g)
            scale = math.sqrt(space.inner(f, f)) * math.sqrt(space.inner(g, g))
            assert abs(lhs - rhs) <= 1e-10 * scale


def test_lp_norm_values():
    sp = hl.from_edges(2, [(0, 1, 1.0)])
    assert hl.lp_norm(sp, [3.0, 4.0], 2) == 5.0
    sp2 = hl.from_edges(2, [(0, 1, 1.0)], mu=[2.0, 1.0])
    assert hl.lp_norm(sp2, [1.0, 1.0], 1) == 3.0
    assert hl.lp_norm(sp, [-2.0, 1.0], math.inf) == 2.0
    with pytest.raises(InputError):
        hl.lp_norm(sp, [1.0, 1.0], 0.5)


def test_lp_norm_holder_monotone_on_probability_space(rng):
    # total mass 1: p -> ||f||_p is nondecreasing
    n = 12
    mu = rng.uniform(0.5, 2.0, n)
    mu /= mu.sum()
    sp = hl.from_edges(n, [(k, k + 1, 1.0) for k in range(n - 1)], mu=mu)
    ps = [1.0, 1.5, 2.0, 3.0, 7.0, math.inf]
    for _ in range(50):
        f = rng.standard_normal(n)
        vals = [hl.lp_norm(sp, f, p) for p in ps]
        assert all(a <= b * (1 + 1e-12) for a, b in zip(vals, vals[1:]))


def test_open_balls_on_path():
    p5 = hl.build_path(5)
    assert p5.ball_volume(2, 1.5) == 3.0
    assert set(p5.ball(2, 1.0).tolist()) == {2}
    assert p5.ball_volume(2, 0.5) == 1.0
    assert p5.ball_volume(2, 100.0) == 5.0


def test_ball_ties_fall_outside():
    p5 = hl.build_path(5)
    # d(2,1) = 1 exactly: not in the open ball of radius 1
    assert 1 not in p5.ball(2, 1.0)
    assert 1 in p5.ball(2, 1.0 + 1e-9)


def test_doubling_profile_k4():
    k4 = hl.from_edges(4, [(i, j, 1.0) for i in range(4) for j in range(i + 1, 4)])
    v = hl.ball_volume_gauge()
    # oracle: V(x, r) is 1 for r <= 1 and 4 beyond, so the doubling sup is 4
    prof = hl.doubling_profile(k4, v, np.linspace(0.1, 2.0, 40))
    assert prof.C_D == 4.0


def test_doubling_profile_single_vertex():
    sp = hl.MetricMeasureSpace([2.0], [[0.0]])
    prof = hl.doubling_profile(sp, hl.ball_volume_gauge(), [0.5, 1.0, 2.0])
    assert prof.C_D == 1.0
    assert prof.kappa == 0.0


def test_doubling_profile_torus64(torus64):
    v = hl.ball_volume_gauge()
    prof = hl.doubling_profile(torus64, v, np.geomspace(1.5, 16.0, 7),
                               centers=[0])
    assert 1.7 <= prof.kappa <= 2.3
    # lattice ball-count oracle for the underlying gauge values
    for r in (3.0, 5.0, 9.0):
        count = sum(1 for i in range(-12, 13) for j in range(-12, 13)
                    if abs(i) + abs(j) < r)
        assert torus64.ball_volumes(r)[0] == count


def test_doubling_two_sided_certificate():
    sp = hl.build_halfline_weighted(64, 1.0)
    v = hl.ball_volume_gauge()
    grid = np.geomspace(1.5, 12.0, 6)
    prof = hl.doubling_profile(sp, v, grid)
    assert prof.kappa >= prof.kappa_prime >= 0.0
    for x in range(sp.n):
        vals = np.array([v(sp, x, r) for r in grid])
        for i in range(len(grid)):
            for k in range(i, len(grid)):
                q = grid[k] / grid[i]
                ratio = vals[k] / vals[i]
                assert ratio <= prof.C_upper * q ** prof.kappa * (1 + 1e-12)
                assert ratio >= prof.c_lower * q ** prof.kappa_prime * (1 - 1e-12)


def test_two_exponent_envelope():
    env = hl.TwoExponentEnvelope(2.0, 1.0, 3.0)
    assert env(5.0, 5.0) == 3.0
    rs = np.linspace(0.5, 8.0, 30)
    vals = [env(r, 2.0) for r in rs]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_bounded_covering_single_vertex():
    sp = hl.MetricMeasureSpace([1.0], [[0.0]])
    cov = hl.bounded_covering(sp, 3.0)
    assert cov.net == (0,)
    assert cov.K0 == 1
    assert cov.cutoffs[0, 0] == 1.0


def test_bounded_covering_contract():
    """Construction guarantees: separation >= r/2, covering < r/2, cutoffs
    in [0,1] equal to 1 on the inner ball, supports inside B(x_i, r), and a
    pointwise partition lower bound of 1."""
    p9 = hl.build_path(9)
    for r in (2.0, 3.0, 4.0):
        cov = hl.bounded_covering(p9, r)
        net = np.asarray(cov.net)
        for i in range(len(net)):
            for j in range(i + 1, len(net)):
                assert p9.dist[net[i], net[j]] >= r / 2.0
        assert all(p9.dist[net, y].min() < r / 2.0 for y in range(p9.n))
        assert np.all(cov.cutoffs >= 0.0) and np.all(cov.cutoffs <= 1.0)
        for i, p in enumerate(net):
            inner = p9.ball(p, r / 2.0)
            assert np.all(cov.cutoffs[i, inner] == 1.0)
            support = np.nonzero(cov.cutoffs[i] > 0)[0]
            assert set(support.tolist()) <= set(p9.ball(p, r).tolist())
        assert np.all(cov.cutoffs.sum(axis=0) >= 1.0 - 1e-12)


def test_bounded_covering_multiplicity_torus(torus16):
    cov = hl.bounded_covering(torus16, 4.0)
    # enumeration oracle for the overlap count
    k0 = max(sum(1 for p in cov.net if torus16.dist[p, y] < 4.0)
             for y in range(torus16.n))
    assert cov.K0 == k0
    assert cov.K0 <= 25


def test_serialization_roundtrip_bit_exact():
    mu = [1.0 / 3.0, 0.1 + 0.2, 1.7]
    sp = hl.from_edges(3, [(0, 1, 0.1 + 0.7), (1, 2, 2.0 / 3.0, 1.3)], mu=mu)
    text = hl.space_to_json(sp)
    back = hl.space_from_json(text)
    assert np.array_equal(back.mu, sp.mu)
    assert np.array_equal(back.conductance, sp.conductance)
    assert np.array_equal(back.edge_length, sp.edge_length)
    # and the round trip is a fixed point
    assert hl.space_to_json(back) == text


def test_metric_axioms(ring32, rng):
    d = ring32.dist
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0)
    for _ in range(50):
        i, j, k = rng.integers(0, ring32.n, 3)
        assert d[i, j] <= d[i, k] + d[k, j] + 1e-12


def test_disconnected_components():
    sp = hl.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])
    assert np.isinf(sp.dist[0, 2])
    assert set(sp.ball(0, 10.0).tolist()) == {0, 1}
    labels = sp.components()
    assert labels[0] == labels[1] and labels[2] == labels[3]
    assert labels[0] != labels[2]


def test_invalid_space_inputs():
    with pytest.raises(InputError):
        hl.MetricMeasureSpace([1.0, -1.0], np.zeros((2, 2)))
    with pytest.raises(InputError):
        hl.MetricMeasureSpace([1.0, 1.0], [[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(InputError):
        hl.MetricMeasureSpace([1.0, 1.0], [[1.0, 0.0], [0.0, 0.0]])
