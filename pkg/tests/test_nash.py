import math

import numpy as np
import pytest

import heatlab as hl
from heatlab import nash
from heatlab.errors import InputError, PreconditionError
from heatlab.inequalities import build_dictionary, default_ball_grid, \
    nash_constant


def power_rate(n, lo=0.05, hi=200.0, pts=129):
    return nash.RateFunction.from_callable(lambda r: r ** n, lo, hi, pts,
                                           name="r^%g" % n)


def test_rate_function_power_exactness():
    v = power_rate(2.5)
    xs = np.geomspace(0.1, 100.0, 37)
    assert np.max(np.abs(v(xs) / xs ** 2.5 - 1.0)) <= 1e-12
    # head and tail models recover the exponent
    assert v.head["exponent"] == pytest.approx(2.5, abs=1e-12)
    assert v.tail["exponent"] == pytest.approx(2.5, abs=1e-12)
    # evaluation outside the sampled window uses the models
    assert v(1e-4) == pytest.approx(1e-4 ** 2.5, rel=1e-10)
    assert v(1e4) == pytest.approx(1e4 ** 2.5, rel=1e-10)


def test_rate_function_inverse():
    v = power_rate(3.0)
    vi = v.inverse()
    xs = np.geomspace(0.01, 1000.0, 21)
    assert np.max(np.abs(vi(xs) - xs ** (1.0 / 3.0))) <= 1e-10
    decreasing = nash.RateFunction([1.0, 2.0, 4.0], [4.0, 2.0, 1.0])
    with pytest.raises(InputError):
        decreasing.inverse()


def test_rate_function_validation():
    with pytest.raises(InputError):
        nash.RateFunction([1.0, 2.0], [1.0, -1.0])
    with pytest.raises(InputError):
        nash.RateFunction([2.0, 1.0], [1.0, 2.0])
    v = power_rate(1.0)
    with pytest.raises(InputError):
        v(-1.0)


def test_smoothed_gauge_brackets():
    v = power_rate(2.0)
    vs = nash.smoothed_gauge(v)
    # v(r/2) <= smoothed <= v(r), and for powers the ratio is constant
    ratio = vs.y / v.y
    assert np.all(ratio <= 1.0 + 1e-12)
    assert np.all(ratio >= 0.25 - 1e-12)
    assert ratio.max() / ratio.min() <= 1.0 + 1e-9
    assert ratio[0] == pytest.approx(7.0 / 12.0, rel=1e-9)  # quadrature oracle


def test_theta_from_nash_closed_forms():
    # v = r^2, C = 1/2: v^{-1}(y) = sqrt(y), theta(tau) = tau^2
    v = power_rate(2.0)
    th = nash.theta_from_nash(0.5, v)
    taus = np.geomspace(0.1, 10.0, 9)
    assert np.max(np.abs(th(taus) / taus ** 2 - 1.0)) <= 1e-10
    # general power: theta(tau) = tau^{1+2/n} / (2C)^{1+2/n}
    for n, c in ((1.0, 1.0), (3.0, 0.7)):
        vn = power_rate(n)
        thn = nash.theta_from_nash(c, vn)
        expo = 1.0 + 2.0 / n
        oracle = taus ** expo / (2.0 * c) ** expo
        assert np.max(np.abs(thn(taus) / oracle - 1.0)) <= 1e-10
        assert thn.ratio_monotone()


def test_theta_from_nash_requires_monotone():
    flat = nash.RateFunction([1.0, 2.0, 4.0], [1.0, 1.0, 1.0])
    with pytest.raises(InputError):
        nash.theta_from_nash(1.0, flat)


def test_star_condition():
    assert nash.check_star_condition(
        nash.RateFunction.from_callable(math.exp, 0.1, 10.0, 257), 1.0 - 1e-4)
    # powers: U'(s)/U'(r) = r/s >= 1/2 on [r, 2r]
    assert nash.check_star_condition(power_rate(2.0), 0.5 - 1e-6)
    assert not nash.check_star_condition(power_rate(2.0), 0.9)


def test_theta_from_lognash():
    v = power_rate(2.0, lo=0.01, hi=100.0, pts=257)
    th2, minorant, c_tilde = nash.theta_from_lognash(1.0, v, 0.45)
    assert np.all(minorant.y <= th2.y * (1.0 + 1e-12))
    assert c_tilde > 0
    assert th2.ratio_monotone(rtol=1e-6)


def test_theta_from_lognash_rejects_bad_sigma():
    v = power_rate(2.0)
    with pytest.raises(InputError):
        nash.theta_from_lognash(1.0, v, 0.95)


def test_m_from_theta_closed_forms():
    # theta = tau^2: m(t) = 1/(2t)
    th = nash.RateFunction.from_callable(lambda t: t * t, 1e-4, 1e6, 201)
    m = nash.m_from_theta(th, [0.25, 0.5, 1.0, 4.0])
    oracle = 1.0 / (2.0 * m.x)
    assert np.max(np.abs(m.y / oracle - 1.0)) <= 1e-9
    # theta = a tau^{1+2/n}: m(t) = (n / (4 a t))^{n/2}
    a, n = 0.35, 3.0
    th2 = nash.RateFunction.from_callable(lambda t: a * t ** (1.0 + 2.0 / n),
                                          1e-4, 1e6, 201)
    m2 = nash.m_from_theta(th2, [0.5, 1.0, 2.0])
    oracle2 = (n / (4.0 * a * m2.x)) ** (n / 2.0)
    assert np.max(np.abs(m2.y / oracle2 - 1.0)) <= 1e-9
    # strictly decreasing
    assert np.all(np.diff(m.y) < 0)


def test_m_from_theta_residual():
    th = nash.RateFunction.from_callable(lambda t: t ** 1.8, 1e-3, 1e5, 161)
    t_grid = np.geomspace(0.2, 20.0, 9)
    m = nash.m_from_theta(th, t_grid)
    for t, mv in zip(m.x, m.y):
        assert abs(nash.integral_from(th, mv) - 2.0 * t) <= 1e-8 * 2.0 * t


def test_m_from_theta_divergent_tail():
    th = nash.RateFunction.from_callable(lambda t: t ** 1.01, 0.1, 100.0, 65)
    with pytest.raises(PreconditionError):
        nash.m_from_theta(th, [1.0])


def test_w_from_m():
    m = nash.RateFunction.from_callable(lambda t: 1.0 / (2.0 * t), 0.01,
                                        100.0, 65)
    w = nash.w_from_m(1.0, m)
    assert np.max(np.abs(w(w.x) / w.x ** 2 - 1.0)) <= 1e-9
    w2 = nash.w_from_m(2.0, m)
    assert np.max(np.abs(w2.y / (w.y / 4.0) - 1.0)) <= 1e-12
    with pytest.raises(InputError):
        nash.w_from_m(0.5, m)


def test_compare_w_v():
    r_grid = np.geomspace(0.5, 8.0, 9)
    w = nash.RateFunction.from_callable(lambda r: r * r, 0.1, 20.0, 65)
    v = nash.RateFunction.from_callable(lambda r: r * r, 0.1, 20.0, 65)
    c, shifted = nash.compare_w_v(w, v, r_grid)
    assert c == pytest.approx(1.0, rel=1e-10)
    half = nash.RateFunction.from_callable(lambda r: r * r / 2.0, 0.1, 20.0, 65)
    c2, _ = nash.compare_w_v(half, v, r_grid)
    assert c2 == pytest.approx(0.5, rel=1e-10)
    assert shifted[1] > 0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pipeline_power_law_exactness(n):
    v = power_rate(float(n))
    r_grid = np.geomspace(0.5, 8.0, 17)
    out = nash.nash_decay_pipeline(1.0, v, r_grid)
    ratio = out["w"](r_grid) / r_grid ** n
    assert ratio.max() / ratio.min() - 1.0 <= 1e-6
    # closed-form chain oracle: w(r) = (2a/n)^{n/2} r^n with a = (2C)^{-(1+2/n)}
    a = 2.0 ** -(1.0 + 2.0 / n)
    oracle = (2.0 * a / n) ** (n / 2.0)
    assert ratio[0] == pytest.approx(oracle, rel=1e-8)
    assert out["theta"].ratio_monotone()
    lo, hi = out["smoothed_ratio"]
    assert 0.2 <= lo <= hi <= 5.0  # smoothing stays within doubling factors


def test_pipeline_l1_scaling():
    v = power_rate(2.0)
    r_grid = np.geomspace(0.5, 8.0, 9)
    out1 = nash.nash_decay_pipeline(1.0, v, r_grid, A=1.0)
    out2 = nash.nash_decay_pipeline(1.0, v, r_grid, A=2.0)
    assert np.max(np.abs(out2["w"].y / (out1["w"].y / 4.0) - 1.0)) <= 1e-12


def test_measured_route_on_ring(ring64, vgauge):
    """End-to-end: measured Nash level on the 64-ring feeds the iteration and
    the resulting profile stays comparable with the uniform gauge."""
    up = hl.make_gauge({"kind": "uniform_power", "n": 1.0})
    members = build_dictionary(ring64, default_ball_grid(ring64, [2.0, 4.0], 3),
                               seed=11)
    c_meas = nash_constant(ring64, up, np.geomspace(1.0, 8.0, 7),
                           members).value
    v = nash.RateFunction.from_callable(lambda r: r, 0.05, 200.0, 129)
    a_bound = nash.l1_uniform_bound(ring64, [1.0, 4.0, 16.0])
    r_grid = np.geomspace(1.0, 8.0, 7)
    out = nash.nash_decay_pipeline(c_meas, v, r_grid, A=a_bound)
    assert 0.01 <= out["C_compare"] <= 100.0


def test_compare_w_v_positive_on_builder_suite(builder_suite):
    """Uniform-gauge decay route succeeds (positive comparison constant) on
    every doubling builder space."""
    dims = {"two_vertex": 1.0, "torus16": 2.0, "halfline": 2.0, "glued": 2.0,
            "vicsek2": 1.465}
    for key, sp in builder_suite.items():
        up = hl.make_gauge({"kind": "uniform_power", "n": dims[key]})
        members = build_dictionary(sp, default_ball_grid(sp, [2.0], 2), seed=3)
        r_grid = np.geomspace(1.0, max(sp.diameter / 2.0, 2.0), 5)
        c_meas = nash_constant(sp, up, r_grid, members).value
        v = nash.RateFunction.from_callable(lambda r: r ** dims[key], 0.02,
                                            500.0, 129)
        out = nash.nash_decay_pipeline(c_meas, v, r_grid,
                                       A=nash.l1_uniform_bound(sp, [1.0, 4.0]))
        assert out["C_compare"] > 0


def test_extrapolate_exponent_values():
    assert nash.extrapolate_exponent(2.0, math.inf) == 2.0
    assert nash.extrapolate_exponent(1.0, 2.0) == 2.0
    assert nash.extrapolate_exponent(1.0, math.inf) == 1.0
    with pytest.raises(InputError):
        nash.extrapolate_exponent(2.0, 2.0)


def test_extrapolation_on_ring(ring64):
    gen = ring64.generator
    t_grid = np.geomspace(2.0, 16.0, 7)
    w = nash.RateFunction(
        t_grid, np.asarray([1.0 / hl.opnorm(gen.heat(t), 2, math.inf).value
                            for t in t_grid]), name="w")
    # diffusive shape: w ~ t^(1/4) in L2->Linf on a line (n=1: t^{n/4})
    slope = (w.logy[-1] - w.logy[0]) / (w.logx[-1] - w.logx[0])
    assert 0.15 <= slope <= 0.35
    out = nash.verify_extrapolation(ring64, w, 2.0, math.inf, t_grid)
    assert out["alpha"] == 2.0
    assert out["stable"]
    # the prediction is sharp for the T*T pairing: C close to 1
    assert 0.5 <= out["C"] <= 2.0
    # predicted diagonal profile decays like w^-2 ~ t^(-1/2) on the line
    pred = out["predicted"]
    slope_pred = (pred.logy[-1] - pred.logy[0]) / (pred.logx[-1] - pred.logx[0])
    assert -0.7 <= slope_pred <= -0.3
    for t in t_grid:
        assert hl.opnorm(gen.heat(t), 1, math.inf).value <= pred(t) * (1 + 1e-9)


def test_extrapolation_rejects_decreasing_profile(ring64):
    t_grid = np.geomspace(1.0, 8.0, 5)
    bad = nash.RateFunction(t_grid, 1.0 / t_grid)
    with pytest.raises(PreconditionError):
        nash.verify_extrapolation(ring64, bad, 2.0, math.inf, t_grid)


def test_nash_equiv_lognash_two_vertex(two_vertex):
    gen = two_vertex.generator
    prof = hl.doubling_profile(two_vertex, hl.ball_volume_gauge(),
                               [0.5, 1.0, 2.0])
    members = [np.array([1.0, -1.0]), np.array([1.0, 1.0]),
               np.array([1.0, 0.2])]
    out = nash.nash_equiv_lognash_check(
        gen, lambda r: 1.0 if r <= 1.0 else 2.0, members,
        np.geomspace(0.25, 8.0, 7), prof)
    assert out["ok"]
    branches = {row["branch"] for row in out["rows"]}
    assert "flat" in branches and "crossing" in branches
    # crossing-radius oracle: r0 solves r^2 B = A(r) for the odd function
    f = members[0]
    b = gen.energy(f) / two_vertex.inner(f, f)
    row = out["rows"][0]
    r0 = row["r0"]
    gauge = lambda r: 1.0 if r <= 1.0 else 2.0
    a_at = (np.sum(np.abs(f)) / math.sqrt(gauge(r0))) ** 2 \
        / two_vertex.inner(f, f)
    assert abs(r0 * r0 * b - a_at) <= 1e-4 * a_at


def test_nash_equiv_lognash_torus(torus16, vgauge):
    up = hl.make_gauge({"kind": "uniform_power", "n": 2.0})
    prof = hl.doubling_profile(torus16, up, np.geomspace(1.0, 4.0, 5),
                               centers=[0])
    members = build_dictionary(torus16, default_ball_grid(torus16, [3.0], 2),
                               seed=13)
    out = nash.nash_equiv_lognash_check(
        torus16, lambda r: r * r, [m.f for m in members],
        np.geomspace(1.0, 4.0, 5), prof)
    assert out["ok"]
