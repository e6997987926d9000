"""Constructive decay machinery for the uniform (x-independent) case.

Chain implemented here: a Nash- or log-Nash-type inequality with constant C
(resp. c) for a uniform gauge v(r) gives a rate function theta(tau); solving

    integral_{m(t)}^{infty} dtau / theta(tau) = 2t

gives a decay profile m(t); the profile w(r) = 1 / (A^2 m(r^2 / 2)) is then
compared against v itself (the success criterion is a positive comparison
constant).  An extrapolation law converts any (p, q) decay profile into a
predicted 1 -> infinity profile with exponent alpha = 1/(1/p - 1/q).

Rate functions are positive samples on a geometric grid with monotone cubic
log-log interpolation inside and power-law head/tail models outside, so pure
power laws are represented exactly.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import fixed_quad
from scipy.interpolate import PchipInterpolator

from .errors import InputError, PreconditionError
from .spectral import as_generator, l1_uniform_bound, opnorm

__all__ = [
    "RateFunction",
    "smoothed_gauge",
    "theta_from_nash",
    "theta_from_lognash",
    "m_from_theta",
    "w_from_m",
    "compare_w_v",
    "extrapolate_exponent",
    "verify_extrapolation",
    "nash_decay_pipeline",
    "nash_equiv_lognash_check",
]

_GL_ORDER = 24


class RateFunction:
    """Positive monotone samples with log-log interpolation and power tails."""

    def __init__(self, x, y, name=""):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim != 1 or x.size < 2 or y.shape != x.shape:
            raise InputError("need matching 1-d sample arrays (>= 2 points)")
        if np.any(x <= 0) or np.any(y <= 0):
            raise InputError("samples must be positive")
        if np.any(np.diff(x) <= 0):
            raise InputError("abscissae must increase strictly")
        self.x, self.y = x, y
        self.name = name
        self.logx = np.log(x)
        self.logy = np.log(y)
        self._interp = PchipInterpolator(self.logx, self.logy, extrapolate=False)
        self.head = self._fit_power(self.logx <= self.logx[0] + math.log(10.0))
        self.tail = self._fit_power(self.logx >= self.logx[-1] - math.log(10.0))

    def _fit_power(self, mask):
        lx, ly = self.logx[mask], self.logy[mask]
        if lx.size < 2:
            lx, ly = self.logx[:2], self.logy[:2]
        e = float(np.polyfit(lx, ly, 1)[0])
        # anchor the model at the window end so it continues the samples
        return {"exponent": e, "coef": float(math.exp(ly[-1] - e * lx[-1]))}

    def _model(self, model, t):
        return model["coef"] * t ** model["exponent"]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if np.any(t <= 0):
            raise InputError("rate functions live on (0, inf)")
        out = np.empty_like(t)
        below = t < self.x[0]
        above = t > self.x[-1]
        mid = ~(below | above)
        out[below] = self._model(self.head, t[below])
        out[above] = self._model(self.tail, t[above])
        if np.any(mid):
            out[mid] = np.exp(self._interp(np.log(t[mid])))
        return float(out[0]) if scalar else out

    def slope(self, t):
        """Logarithmic derivative d log y / d log x at t (model value outside)."""
        if t < self.x[0]:
            return self.head["exponent"]
        if t > self.x[-1]:
            return self.tail["exponent"]
        return float(self._interp.derivative()(math.log(t)))

    def inverse(self, name=""):
        if np.any(np.diff(self.y) <= 0):
            raise InputError("inverse needs strictly increasing values")
        return RateFunction(self.y, self.x, name=name or self.name + "^-1")

    def ratio_monotone(self, rtol=1e-9):
        """Whether t -> y(t)/t is nondecreasing on the samples."""
        r = self.y / self.x
        return bool(np.all(np.diff(r) >= -rtol * r[:-1]))

    @classmethod
    def from_callable(cls, fn, lo, hi, n=129, name=""):
        x = np.geomspace(lo, hi, n)
        return cls(x, np.asarray([fn(t) for t in x]), name=name)

    def to_rows(self):
        return list(zip(self.x.tolist(), self.y.tolist()))

    def __repr__(self):
        return "RateFunction(%s, %d samples on [%g, %g])" % (
            self.name, self.x.size, self.x[0], self.x[-1])


def smoothed_gauge(v, name=""):
    """Sliding-window average (2/r) * integral_{r/2}^{r} v(s) ds by quadrature."""

    def avg(r):
        val, _ = fixed_quad(lambda s: v(s), r / 2.0, r, n=_GL_ORDER)
        return 2.0 * val / r

    return RateFunction(v.x, np.asarray([avg(r) for r in v.x]),
                        name=name or "smoothed " + v.name)


# ---------------------------------------------------------------------------
# theta constructions
# ---------------------------------------------------------------------------


def theta_from_nash(C, v):
    """Rate tau -> tau / (2C [v^{-1}(2C/tau)]^2) from a Nash constant C.

    Sampled at tau_i = 2C / v(r_i) so no inversion error enters at the nodes.
    """
    if C <= 0:
        raise InputError("constant must be positive")
    if np.any(np.diff(v.y) <= 0):
        raise InputError("gauge must be one-to-one increasing")
    r = v.x[::-1]
    tau = 2.0 * C / v.y[::-1]
    theta = tau / (2.0 * C * r * r)
    out = RateFunction(tau, theta, name="theta_nash")
    if not out.ratio_monotone():
        raise InputError("theta(tau)/tau failed to be nondecreasing")
    return out


def _log_slope(v):
    d = v._interp.derivative()
    return lambda r: float(d(math.log(r))) if v.x[0] <= r <= v.x[-1] else (
        v.head["exponent"] if r < v.x[0] else v.tail["exponent"])


def check_star_condition(v, sigma):
    """Verify U'(s) >= sigma U'(r) for s in [r, 2r] on the sample grid
    (U = log v, derivative in r)."""
    slope = _log_slope(v)
    uprime = np.asarray([slope(r) / r for r in v.x])
    if np.any(uprime <= 0):
        return False
    for i, r in enumerate(v.x):
        for j in range(i, v.x.size):
            if v.x[j] > 2.0 * r:
                break
            if uprime[j] < sigma * uprime[i] * (1.0 - 1e-9):
                return False
    return True


def theta_from_lognash(c, v, sigma, n_search=3001):
    """theta2(tau) = tau sup_r log(c v(r) tau)/r^2 plus its closed-form minorant.

    Returns (theta2, theta2_minorant, c_tilde).  The minorant constant
    c_tilde is fitted as the largest value keeping it below theta2 at every
    sample, and the samplewise ordering is asserted.
    """
    if c <= 0 or sigma <= 0:
        raise InputError("constants must be positive")
    if np.any(np.diff(v.y) <= 0):
        raise InputError("gauge must be one-to-one increasing")
    if not check_star_condition(v, sigma):
        raise InputError("log-slope ratio condition fails at sigma=%g" % sigma)

    rs = np.geomspace(v.x[0] / 100.0, v.x[-1] * 100.0, n_search)
    vr = v(rs)
    taus = 1.0 / v.y[::-1]
    vals = []
    for tau in taus:
        obj = np.log(np.maximum(c * vr * tau, 1e-300)) / (rs * rs)
        k = int(obj.argmax())
        if k == n_search - 1 and obj[-1] > obj[-2]:
            raise InputError("this supremum has to be finite; gauge grows too fast")
        vals.append(tau * obj[k])
    vals = np.asarray(vals)
    if np.any(vals <= 0):
        raise InputError("log-Nash rate not positive on the requested range")
    theta2 = RateFunction(taus, vals, name="theta_lognash")

    slope = _log_slope(v)
    vinv = v.inverse()
    raw = []
    for tau in taus:
        r = vinv(1.0 / tau)
        vprime = slope(r) * v(r) / r
        raw.append(tau * tau * vprime / r)
    raw = np.asarray(raw)
    c_tilde = float(np.min(vals / raw))
    minorant = RateFunction(taus, c_tilde * raw, name="theta_lognash_minorant")
    if np.any(minorant.y > theta2.y * (1.0 + 1e-12)):
        raise PreconditionError("minorant exceeds the rate it should bound")
    return theta2, minorant, c_tilde


# ---------------------------------------------------------------------------
# the integral equation
# ---------------------------------------------------------------------------


def _segment_integral(theta, a, b):
    """integral_a^b dtau/theta(tau) for [a, b] inside the sampled range."""
    la, lb = math.log(a), math.log(b)
    knots = theta.logx[(theta.logx > la) & (theta.logx < lb)]
    pts = np.concatenate(([la], knots, [lb]))
    total = 0.0
    for u0, u1 in zip(pts[:-1], pts[1:]):
        val, _ = fixed_quad(
            lambda u: np.exp(u - theta._interp(u)), u0, u1, n=_GL_ORDER)
        total += val
    return total


def _power_integral(coef, expo, a, b):
    """integral_a^b dtau/(coef tau^expo); b may be inf when expo > 1."""
    if math.isinf(b):
        return a ** (1.0 - expo) / (coef * (expo - 1.0))
    if abs(expo - 1.0) < 1e-14:
        return math.log(b / a) / coef
    return (b ** (1.0 - expo) - a ** (1.0 - expo)) / (coef * (1.0 - expo))


def tail_mass(theta):
    """integral over the tail model; fails hard near the integrability edge."""
    e = theta.tail["exponent"]
    if e <= 1.05:
        raise PreconditionError(
            "condition integral^inf dtau/theta(tau) < inf fails "
            "(tail exponent %.3f <= 1.05)" % e)
    return _power_integral(theta.tail["coef"], e, theta.x[-1], math.inf)


def integral_from(theta, m):
    """integral_m^inf dtau / theta(tau)."""
    if m <= 0:
        raise InputError("lower endpoint must be positive")
    total = tail_mass(theta)
    x0, x1 = theta.x[0], theta.x[-1]
    if m >= x1:
        return _power_integral(theta.tail["coef"], theta.tail["exponent"], m, math.inf)
    if m < x0:
        total += _power_integral(theta.head["coef"], theta.head["exponent"], m, x0)
        total += _segment_integral(theta, x0, x1)
    else:
        total += _segment_integral(theta, m, x1)
    return total


def m_from_theta(theta, t_grid):
    """Solve integral_{m(t)}^inf dtau/theta = 2t by bisection for each t.

    Returns a decreasing RateFunction on the given t grid; each solve is
    carried to relative width 1e-12, well inside the 1e-8 residual target.
    """
    t_grid = np.asarray(sorted(float(t) for t in t_grid))
    if t_grid.size == 0 or np.any(t_grid <= 0):
        raise InputError("need a positive time grid")
    tail_mass(theta)  # integrability gate
    out = []
    lo_lim, hi_lim = theta.x[0] * 1e-14, theta.x[-1] * 1e14
    for t in t_grid:
        target = 2.0 * t
        lo, hi = theta.x[0], theta.x[-1]
        while integral_from(theta, hi) > target:
            hi *= 4.0
            if hi > hi_lim:
                raise PreconditionError("decay profile out of sampled reach (large)")
        while integral_from(theta, lo) < target:
            lo /= 4.0
            if lo < lo_lim:
                raise PreconditionError("decay profile out of sampled reach (small)")
        for _ in range(200):
            mid = math.sqrt(lo * hi)
            if integral_from(theta, mid) >= target:
                lo = mid
            else:
                hi = mid
            if hi / lo < 1.0 + 1e-12:
                break
        out.append(math.sqrt(lo * hi))
    return RateFunction(t_grid, np.asarray(out), name="m(t)")


def w_from_m(A, m):
    """w(r) = 1 / (A^2 m(r^2/2)) on the grid r = sqrt(2 t)."""
    if A < 1.0 - 1e-9:
        raise InputError("L1 bound must be >= 1")
    A = max(A, 1.0)
    r = np.sqrt(2.0 * m.x)
    return RateFunction(r, 1.0 / (A * A * m.y), name="w(r)")


def compare_w_v(w, v, r_grid):
    """Largest C with w(r) >= C v(r) grid-wide, plus a shifted variant.

    The shifted form searches c in [1/4, 1] for the best constant with
    w(r) >= C v(c r).  Success means C > 0 (always true numerically; the
    interesting content is its size).
    """
    r_grid = np.asarray(sorted(float(r) for r in r_grid))
    c_plain = float(np.min(w(r_grid) / v(r_grid)))
    best = (0.25, -math.inf)
    for c in np.linspace(0.25, 1.0, 16):
        val = float(np.min(w(r_grid) / v(c * r_grid)))
        if val > best[1]:
            best = (float(c), val)
    return c_plain, best


# ---------------------------------------------------------------------------
# extrapolation
# ---------------------------------------------------------------------------


def extrapolate_exponent(p, q):
    """alpha = 1 / (1/p - 1/q) turning a (p,q) profile into a (1,inf) one."""
    ip = 0.0 if math.isinf(p) else 1.0 / p
    iq = 0.0 if math.isinf(q) else 1.0 / q
    if ip <= iq:
        raise InputError("need p < q")
    return 1.0 / (ip - iq)


def verify_extrapolation(obj, w, p, q, t_grid):
    """Fit the smallest C with ||e^{-tL}||_{1->inf} <= C / w(t)^alpha grid-wide.

    Success requires the per-point fitted constants to stay within a factor
    4 of each other across the grid window.
    """
    gen = as_generator(obj)
    t_grid = np.asarray(sorted(float(t) for t in t_grid))
    wt = w(t_grid)
    if np.any(np.diff(wt) < -1e-12 * wt[:-1]):
        raise PreconditionError("profile must be nondecreasing on the grid")
    doubling = float(np.max(w(2.0 * t_grid) / wt))
    alpha = extrapolate_exponent(p, q)
    a_bound = l1_uniform_bound(gen, t_grid)
    fits = []
    for t, wv in zip(t_grid, wt):
        norm = opnorm(gen.heat(t), 1, math.inf).value
        fits.append(norm * wv ** alpha)
    fits = np.asarray(fits)
    c_fit = float(fits.max())
    stable = bool(fits.max() <= 4.0 * fits.min())
    return {
        "alpha": alpha,
        "C": c_fit,
        "per_point": fits.tolist(),
        "stable": stable,
        "w_doubling": doubling,
        "l1_bound": a_bound,
        "predicted": RateFunction(t_grid, c_fit / wt ** alpha,
                                  name="predicted 1->inf profile"),
    }


# ---------------------------------------------------------------------------
# drivers
# ---------------------------------------------------------------------------


def nash_decay_pipeline(C, v, r_grid, A=1.0):
    """Compose theta -> m -> w from a uniform Nash constant and compare to v.

    Also runs the smoothed-gauge companion rate and records how tightly it
    brackets the main one (a doubling-quality certificate for the chain).
    """
    theta = theta_from_nash(C, v)
    vs = smoothed_gauge(v)
    vsi = vs.inverse()
    tau = 2.0 * C / v.y[::-1]
    theta_s = RateFunction(
        tau, np.asarray([t / vsi(1.0 / t) ** 2 for t in tau]),
        name="theta_nash_smoothed")
    ratio = theta_s.y / theta.y
    m = m_from_theta(theta, [rr * rr / 2.0 for rr in sorted(r_grid)])
    w = w_from_m(A, m)
    c_plain, shifted = compare_w_v(w, v, r_grid)
    return {
        "theta": theta,
        "m": m,
        "w": w,
        "C_compare": c_plain,
        "shifted": shifted,
        "smoothed_ratio": (float(ratio.min()), float(ratio.max())),
    }


def nash_equiv_lognash_check(obj, gauge_fn, members, r_grid, profile):
    """Crossing-radius argument tying the additive and logarithmic Nash forms.

    For each test function f it computes A(r, f) (the measure-weighted L1 part
    over the squared L2 norm), B(f) (the energy quotient), locates the
    crossing radius r0 where r^2 B first dominates A, and checks

        A(r, f) * exp(r^2 B(f)) >= assembled positive constant

    on the grid, with the constant assembled from the measured additive-Nash
    level, the gauge doubling constant, and its exponent.  ``gauge_fn`` must
    be uniform (x-independent); ``profile`` is its doubling profile.
    """
    gen = as_generator(obj)
    mu = gen.mu
    r_grid = np.asarray(sorted(float(r) for r in r_grid))
    r_dense = np.geomspace(r_grid[0] / 64.0, r_grid[-1] * 64.0, 800)

    def a_of(f, r):
        l1 = float(np.sum(np.abs(f) * mu))
        l2sq = float(np.sum(f * f * mu))
        return (l1 / math.sqrt(gauge_fn(r))) ** 2 / l2sq

    # measured additive-Nash level: inf over members and a dense r sweep
    level = math.inf
    data = []
    for f in members:
        f = np.asarray(f, dtype=float)
        l2sq = float(np.sum(f * f * mu))
        if l2sq == 0:
            continue
        b = gen.energy(f) / l2sq
        vals = np.asarray([a_of(f, r) + r * r * b for r in r_dense])
        level = min(level, float(vals.min()))
        data.append((f, b))
    c_d = profile.C_D
    kappa = max(profile.kappa, 1e-9)
    c_prime = level / (4.0 * c_d + 1.0)
    x_star = max(math.sqrt(kappa / (2.0 * c_prime)), 1.0)
    b_const = math.exp(c_prime * x_star * x_star) / x_star ** kappa
    assembled = min(c_prime, c_prime * b_const / c_d)

    rows = []
    ok_all = True
    for f, b in data:
        if b <= 1e-14:
            floor = min(a_of(f, r) for r in r_grid)
            ok = floor >= level * (1.0 - 1e-9)
            rows.append({"branch": "flat", "r0": math.inf, "ok": ok,
                         "min_value": floor})
            ok_all &= ok
            continue
        lo, hi = r_dense[0], r_dense[-1]
        while hi * hi * b < a_of(f, hi):
            hi *= 2.0
        for _ in range(128):
            mid = math.sqrt(lo * hi)
            if mid * mid * b >= a_of(f, mid):
                hi = mid
            else:
                lo = mid
        r0 = math.sqrt(lo * hi)
        worst = min(a_of(f, r) * math.exp(r * r * b) for r in r_grid)
        ok = worst >= assembled * (1.0 - 1e-6)
        rows.append({"branch": "crossing", "r0": r0, "ok": ok,
                     "min_value": worst})
        ok_all &= ok
    return {"level": level, "assembled": assembled, "rows": rows, "ok": ok_all}
