"""Spectral calculus for the graph generator.

Everything runs through one dense symmetric eigendecomposition of the
mu-symmetrized generator (desk scale, N up to a few thousand): heat
operators, resolvent powers, wave propagators, generic even filters of
r*sqrt(L), exact and bounded weighted L^p -> L^q operator norms, and
finite-propagation diagnostics.

Kernels act against the measure:  (Tf)(x) = sum_y K(x,y) f(y) mu(y).
Exact operator norms exist for p = 1, q = inf, and (2,2); other index pairs
get an interpolation upper bound and a deterministic ascent lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.special

from .errors import InputError, PreconditionError
from .space import bounded_covering

__all__ = [
    "SpectralDecomposition",
    "Generator",
    "KernelOperator",
    "NormEstimate",
    "as_generator",
    "gamma_minus",
    "gamma_plus",
    "heat_operator",
    "resolvent_power",
    "resolvent_integral_error",
    "wave_operator",
    "spectral_filter",
    "psi_profile",
    "sinc_sq_profile",
    "transmutation_profile",
    "gaussian_profile",
    "opnorm",
    "opnorm_bounds",
    "weighted_heat_kernel",
    "weighted_norm_functional",
    "tstar_t_check",
    "davies_gaffney_ratio",
    "gaussian_constant_fit",
    "propagation_residual",
    "block_norm_bound",
    "transmutation_check",
    "norm_equivalence_suprema",
    "l1_uniform_bound",
    "kernel_to_csv",
]


# ---------------------------------------------------------------------------
# decomposition and generator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending, >= 0) and mu-orthonormal eigenvectors."""

    eigenvalues: np.ndarray
    vectors: np.ndarray  # columns phi_k, <phi_j, phi_k>_mu = delta_jk
    mu: np.ndarray

    def reconstruction_residual(self, action):
        s = np.sqrt(self.mu)
        sym = s[:, None] * action / s[None, :]
        q = s[:, None] * self.vectors
        rebuilt = (q * self.eigenvalues) @ q.T
        return float(np.linalg.norm(sym - rebuilt, 2))


class Generator:
    """Nonnegative self-adjoint operator in the mu-weighted inner product."""

    def __init__(self, mu, action, label="L", space=None, indices=None):
        mu = np.asarray(mu, dtype=float)
        action = np.asarray(action, dtype=float)
        n = mu.shape[0]
        if action.shape != (n, n):
            raise InputError("action must be n x n")
        s = np.sqrt(mu)
        sym = s[:, None] * action / s[None, :]
        scale = 1.0 + np.abs(sym).max()
        if np.abs(sym - sym.T).max() > 1e-8 * scale:
            raise InputError("operator is not self-adjoint in the mu inner product")
        self.mu = mu
        self.action = action
        self.label = label
        self.space = space
        self.indices = None if indices is None else np.asarray(indices)
        self.n = n
        self._sym = 0.5 * (sym + sym.T)
        self._spec = None

    @property
    def spectral(self):
        if self._spec is None:
            lam, q = scipy.linalg.eigh(self._sym)
            if lam[0] < -1e-9 * (1.0 + abs(lam[-1])):
                raise InputError("generator is not nonnegative (min eig %.3e)" % lam[0])
            lam = np.clip(lam, 0.0, None)
            phi = q / np.sqrt(self.mu)[:, None]
            self._spec = SpectralDecomposition(lam, phi, self.mu)
        return self._spec

    @property
    def lambda_max(self):
        return float(self.spectral.eigenvalues[-1])

    @property
    def lambda_min(self):
        return float(self.spectral.eigenvalues[0])

    def energy(self, f):
        """Quadratic form <Lf, f>_mu."""
        f = np.asarray(f, dtype=float)
        return float(np.dot(self.action @ f * self.mu, f))

    def func_kernel(self, values, label=""):
        """Kernel of the spectral function sum_k values_k phi_k(x) phi_k(y)."""
        spec = self.spectral
        kern = (spec.vectors * np.asarray(values)) @ spec.vectors.T
        return KernelOperator(kern, self.mu, label=label, generator=self)

    def identity(self):
        return KernelOperator(np.diag(1.0 / self.mu), self.mu,
                              label="identity", generator=self)

    def heat(self, t):
        if t < 0:
            raise InputError("time must be nonnegative")
        if t == 0:
            return self.identity()
        lam = self.spectral.eigenvalues
        return self.func_kernel(np.exp(-t * lam), label="heat t=%g" % t)

    def resolvent_power(self, t, beta):
        if t < 0:
            raise InputError("time must be nonnegative")
        if beta <= 0:
            raise InputError("beta must be positive")
        if t == 0:
            return self.identity()
        lam = self.spectral.eigenvalues
        return self.func_kernel((1.0 + t * lam) ** (-beta / 2.0),
                                label="resolvent t=%g beta=%g" % (t, beta))

    def wave(self, r):
        if r == 0:
            return self.identity()
        lam = self.spectral.eigenvalues
        return self.func_kernel(np.cos(r * np.sqrt(lam)), label="wave r=%g" % r)

    def spectral_filter(self, profile, r):
        """Kernel of profile(r sqrt(L)) for an even scalar profile."""
        lam = self.spectral.eigenvalues
        vals = np.asarray([profile(s) for s in r * np.sqrt(lam)], dtype=float)
        if not np.all(np.isfinite(vals)):
            raise InputError("filter profile undefined at a needed eigenvalue")
        return self.func_kernel(vals, label="filter r=%g" % r)

    def polynomial(self, coeffs):
        """Kernel of sum_k coeffs[k] L^k via Horner; keeps exact sparsity zeros."""
        acc = np.zeros_like(self.action)
        np.fill_diagonal(acc, coeffs[-1])
        for c in reversed(coeffs[:-1]):
            acc = acc @ self.action
            acc[np.diag_indices(self.n)] += c
        return KernelOperator(acc / self.mu[None, :], self.mu,
                              label="poly deg %d" % (len(coeffs) - 1), generator=self)

    def as_kernel(self):
        return self.polynomial([0.0, 1.0])

    def __repr__(self):
        return "Generator(%s, n=%d)" % (self.label, self.n)


def as_generator(obj):
    if isinstance(obj, Generator):
        return obj
    if hasattr(obj, "generator"):
        return obj.generator
    raise InputError("expected a space or a generator, got %r" % type(obj))


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


class KernelOperator:
    """Dense kernel under the measure-weighted action."""

    def __init__(self, kernel, mu, label="", generator=None):
        self.kernel = np.asarray(kernel, dtype=float)
        self.mu = np.asarray(mu, dtype=float)
        self.label = label
        self.generator = generator

    def apply(self, f):
        return self.kernel @ (self.mu * np.asarray(f, dtype=float))

    @property
    def action_matrix(self):
        return self.kernel * self.mu[None, :]

    @property
    def symmetrized(self):
        s = np.sqrt(self.mu)
        return s[:, None] * self.kernel * s[None, :]

    def adjoint(self):
        return KernelOperator(self.kernel.T, self.mu, label=self.label + "*",
                              generator=self.generator)

    def compose(self, other):
        kern = self.kernel @ (self.mu[:, None] * other.kernel)
        return KernelOperator(kern, self.mu,
                              label="%s.%s" % (self.label, other.label))

    def weighted(self, left=None, right=None, label=""):
        kern = self.kernel
        if left is not None:
            kern = np.asarray(left)[:, None] * kern
        if right is not None:
            kern = kern * np.asarray(right)[None, :]
        return KernelOperator(kern, self.mu, label=label or self.label + " weighted")

    def restrict_columns(self, idx):
        """Kernel of T chi_S: columns outside idx zeroed."""
        mask = np.zeros(self.kernel.shape[1])
        mask[idx] = 1.0
        return KernelOperator(self.kernel * mask[None, :], self.mu,
                              label=self.label + " chi")

    def __repr__(self):
        return "KernelOperator(%s, n=%d)" % (self.label, self.kernel.shape[0])


def kernel_to_csv(op, path):
    """Dump kernel entries as (x, y, value) with 17 significant digits."""
    with open(path, "w") as fh:
        fh.write("x,y,value\n")
        n, m = op.kernel.shape
        for x in range(n):
            for y in range(m):
                fh.write("%d,%d,%.17g\n" % (x, y, op.kernel[x, y]))


# ---------------------------------------------------------------------------
# module-level op wrappers
# ---------------------------------------------------------------------------


def heat_operator(obj, t):
    return as_generator(obj).heat(t)


def resolvent_power(obj, t, beta):
    return as_generator(obj).resolvent_power(t, beta)


def wave_operator(obj, r):
    return as_generator(obj).wave(r)


def spectral_filter(obj, profile, r):
    return as_generator(obj).spectral_filter(profile, r)


def resolvent_integral_error(obj, t, beta, n_quad=400):
    """Max gap between (1+t*lam)^(-beta/2) and its Laplace-type quadrature.

    The scalar identity integrates e^{-s} s^{beta/2-1} e^{-s t lam} ds / Gamma(beta/2).
    """
    gen = as_generator(obj)
    lam = gen.spectral.eigenvalues
    worst = 0.0
    for lv in lam:
        val, _ = scipy.integrate.quad(
            lambda s: math.exp(-s) * s ** (beta / 2.0 - 1.0) * math.exp(-s * t * lv),
            0.0, np.inf, limit=200)
        val /= scipy.special.gamma(beta / 2.0)
        worst = max(worst, abs(val - (1.0 + t * lv) ** (-beta / 2.0)))
    return worst


# ---------------------------------------------------------------------------
# filter profiles (functions of s = r sqrt(lambda))
# ---------------------------------------------------------------------------


def psi_profile(s):
    """(s - sin s) / s^3, extended by 1/6 at s = 0; Fourier support in [-1,1]."""
    s = abs(s)
    if s < 1e-3:
        return 1.0 / 6.0 - s * s / 120.0 + s ** 4 / 5040.0
    return (s - math.sin(s)) / s ** 3


def sinc_sq_profile(s):
    """(sin s / s)^2; the operator version propagates at most twice its scale."""
    if abs(s) < 1e-8:
        return 1.0 - s * s / 3.0
    return (math.sin(s) / s) ** 2


def transmutation_profile(a):
    """Normalized Fourier transform of t -> (1 - t^2)_+^a; value 1 at 0."""
    if a <= 0:
        raise InputError("profile order must be positive")

    def f(s):
        return float(scipy.special.hyp0f1(a + 1.5, -0.25 * s * s))

    return f


def gaussian_profile(s):
    return math.exp(-s * s)


def transmutation_check(a, x_grid):
    """Quadrature check of the scalar heat/wave bridge identity.

    Integrates (s - x^2)_+^a e^{-s} ds / Gamma(a+1) and compares with e^{-x^2};
    returns the max absolute error over the grid.  (The Gamma(a+1)
    normalization is the one that makes the identity exact.)
    """
    if a <= 0:
        raise InputError("order must be positive")
    worst = 0.0
    for x in x_grid:
        x2 = float(x) ** 2
        val, _ = scipy.integrate.quad(
            lambda s: (s - x2) ** a * math.exp(-s), x2, np.inf, limit=200)
        val /= scipy.special.gamma(a + 1.0)
        worst = max(worst, abs(val - math.exp(-x2)))
    return worst


# ---------------------------------------------------------------------------
# operator norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormEstimate:
    value: float
    mode: str  # "exact" | "upper" | "lower"
    method: str
    witness: dict = field(default_factory=dict)


def _lp_mu(vec, p, mu):
    vec = np.abs(vec)
    if np.isinf(p):
        return float(vec.max())
    top = float(vec.max())
    if top == 0.0:
        return 0.0
    # factor out the max so large exponents cannot overflow
    return top * float(np.sum((vec / top) ** p * mu) ** (1.0 / p))


def _conjugate(p):
    if p == 1:
        return math.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _check_pq(p, q):
    if p < 1 or q < 1:
        raise InputError("exponents must be >= 1")
    if p > q:
        raise InputError("p > q norms are out of scope")


def opnorm(op, p, q):
    """Exact operator norm for the closed-form index pairs.

    p = 1: sup over columns of their L^q(mu) norm.  q = inf: sup over rows of
    their L^{p'}(mu) norm.  (2,2): top singular value in the mu geometry.
    """
    _check_pq(p, q)
    kern, mu = op.kernel, op.mu
    if p == 1:
        vals = np.array([_lp_mu(kern[:, y], q, mu) for y in range(kern.shape[1])])
        y = int(vals.argmax())
        return NormEstimate(float(vals[y]), "exact", "column-norm",
                            {"kind": "delta", "index": y})
    if np.isinf(q):
        pc = _conjugate(p)
        vals = np.array([_lp_mu(kern[x, :], pc, mu) for x in range(kern.shape[0])])
        x = int(vals.argmax())
        return NormEstimate(float(vals[x]), "exact", "row-norm",
                            {"kind": "row", "index": x})
    if p == 2 and q == 2:
        sym = op.symmetrized
        u, s, vt = np.linalg.svd(sym)
        f = vt[0] / np.sqrt(mu)
        return NormEstimate(float(s[0]), "exact", "svd",
                            {"kind": "function", "f": f.tolist()})
    raise InputError("no closed form for (p, q) = (%s, %s); use opnorm_bounds"
                     % (p, q))


def _dual_vector(g, q, mu):
    # u with ||u||_{q'} = 1 and <g, u>_mu = ||g||_q
    if np.isinf(q):
        i = int(np.argmax(np.abs(g)))
        u = np.zeros_like(g)
        u[i] = math.copysign(1.0, g[i]) / mu[i]
        return u
    nrm = _lp_mu(g, q, mu)
    if nrm == 0:
        return np.zeros_like(g)
    return np.sign(g) * (np.abs(g) / nrm) ** (q - 1.0)


def _p_normalize(h, p, mu):
    # f with ||f||_p = 1 maximizing <h, f>_mu
    if p == 1:
        i = int(np.argmax(np.abs(h)))
        f = np.zeros_like(h)
        f[i] = math.copysign(1.0, h[i]) / mu[i]
        return f
    if np.isinf(p):
        return np.sign(h) + (h == 0)
    f = np.sign(h) * np.abs(h) ** (1.0 / (p - 1.0))
    nrm = _lp_mu(f, p, mu)
    return f / nrm if nrm > 0 else f


def _ascent_lower(op, p, q, n_starts=8, iters=200, tol=1e-10, seed=7):
    kern, mu = op.kernel, op.mu
    n = kern.shape[1]
    adj = kern.T
    col = np.array([_lp_mu(kern[:, y], q, mu) for y in range(n)])
    starts = [np.eye(n)[int(col.argmax())]]
    rng = np.random.default_rng(seed)
    for _ in range(n_starts):
        starts.append(rng.standard_normal(n))
    best, best_f = 0.0, starts[0]
    for f in starts:
        f = f / max(_lp_mu(f, p, mu), 1e-300)
        prev = -1.0
        for _ in range(iters):
            g = kern @ (mu * f)
            val = _lp_mu(g, q, mu) / max(_lp_mu(f, p, mu), 1e-300)
            if val > best:
                best, best_f = val, f.copy()
            if abs(val - prev) <= tol * max(val, 1.0):
                break
            prev = val
            u = _dual_vector(g, q, mu)
            h = adj @ (mu * u)
            f = _p_normalize(h, p, mu)
    return NormEstimate(float(best), "lower", "duality-ascent",
                        {"kind": "function", "f": best_f.tolist()})


def _rt_upper(op, p, q):
    """Riesz-Thorin upper bound interpolated between exact anchors."""
    kern, mu = op.kernel, op.mu
    ip = 0.0 if np.isinf(p) else 1.0 / p
    iq = 0.0 if np.isinf(q) else 1.0 / q

    def col(qa):
        return max(_lp_mu(kern[:, y], qa, mu) for y in range(kern.shape[1]))

    def row(pb):
        pc = _conjugate(pb)
        return max(_lp_mu(kern[x, :], pc, mu) for x in range(kern.shape[0]))

    cands = []
    # anchors (1, qa) and (pb, inf)
    for theta in np.linspace(max(iq, 1e-9), min(ip, 1.0), 33):
        qa = math.inf if iq == 0 else theta / iq
        if qa < 1:
            continue
        ipb = (ip - theta) / (1.0 - theta) if theta < 1 else 0.0
        if not 0.0 <= ipb <= 1.0:
            continue
        pb = math.inf if ipb == 0 else 1.0 / ipb
        cands.append(col(qa) ** theta * row(pb) ** (1.0 - theta))
    sigma = None
    if ip >= 0.5 >= iq:
        sigma = np.linalg.svd(op.symmetrized, compute_uv=False)[0]
        # anchors (1, qa) and (2, 2)
        theta = 2.0 * ip - 1.0
        if theta > 0:
            iqa = (iq - (1.0 - theta) / 2.0) / theta
            if 0.0 <= iqa <= 1.0:
                qa = math.inf if iqa == 0 else 1.0 / iqa
                cands.append(col(qa) ** theta * sigma ** (1.0 - theta))
        # anchors (2, 2) and (pb, inf)
        theta = 2.0 * iq
        if theta < 1.0:
            ipb = (ip - iq) / (1.0 - theta)
            if 0.0 <= ipb <= 1.0:
                pb = math.inf if ipb == 0 else 1.0 / ipb
                cands.append(sigma ** theta * row(pb) ** (1.0 - theta))
    if not cands:
        raise InputError("no interpolation anchors for (%s, %s)" % (p, q))
    return NormEstimate(float(min(cands)), "upper", "riesz-thorin")


def opnorm_bounds(op, p, q, seed=7):
    """(lower, upper) bracket; collapses to two exact copies when closed-form."""
    _check_pq(p, q)
    try:
        exact = opnorm(op, p, q)
        return exact, exact
    except InputError:
        pass
    lower = _ascent_lower(op, p, q, seed=seed)
    upper = _rt_upper(op, p, q)
    if lower.value > upper.value * (1.0 + 1e-9):
        raise PreconditionError("ascent lower bound exceeds interpolation upper")
    return lower, upper


# ---------------------------------------------------------------------------
# gamma range
# ---------------------------------------------------------------------------


def gamma_minus(p, q):
    ip = 0.0 if np.isinf(p) else 1.0 / p
    iq = 0.0 if np.isinf(q) else 1.0 / q
    return max(0.5 * ip - iq, 0.0)


def gamma_plus(p, q):
    ip = 0.0 if np.isinf(p) else 1.0 / p
    iq = 0.0 if np.isinf(q) else 1.0 / q
    return min(ip - iq, 0.5 - 0.5 * iq)


# ---------------------------------------------------------------------------
# weighted functionals
# ---------------------------------------------------------------------------


def _gauge_weights(gen, gauge, r):
    if gen.space is None:
        raise InputError("generator carries no base space for gauge weights")
    w = gauge.weights(gen.space, r)
    if gen.indices is not None:
        w = w[gen.indices]
    return w


def weighted_heat_kernel(obj, gauge, p, q, gamma, t):
    """Kernel v(x,sqrt t)^gamma p_t(x,y) v(y,sqrt t)^delta, delta = 1/p-1/q-gamma."""
    gen = as_generator(obj)
    ip = 0.0 if np.isinf(p) else 1.0 / p
    iq = 0.0 if np.isinf(q) else 1.0 / q
    delta = ip - iq - gamma
    w = _gauge_weights(gen, gauge, math.sqrt(t))
    heat = gen.heat(t)
    return heat.weighted(w ** gamma, w ** delta,
                         label="v^%g heat(t=%g) v^%g" % (gamma, t, delta))


def weighted_norm_functional(obj, gauge, p, q, gamma, t, seed=7):
    """Norm of the weighted heat kernel; exact NormEstimate or (lower, upper)."""
    _check_pq(p, q)
    op = weighted_heat_kernel(obj, gauge, p, q, gamma, t)
    try:
        return opnorm(op, p, q)
    except InputError:
        return opnorm_bounds(op, p, q, seed=seed)


def tstar_t_check(obj, gauge, t):
    """Three expressions for the same weighted diagonal quantity.

    Returns (|| v^1/2 e^{-tL} v^1/2 ||_{1->inf},
             || v^1/2 e^{-(t/2)L} ||_{2->inf}^2,
             || e^{-(t/2)L} v^1/2 ||_{1->2}^2);
    they coincide up to rounding.
    """
    gen = as_generator(obj)
    w = _gauge_weights(gen, gauge, math.sqrt(t))
    half = gen.heat(t / 2.0)
    full = gen.heat(t)
    lhs = opnorm(full.weighted(w ** 0.5, w ** 0.5), 1, math.inf).value
    rhs1 = opnorm(half.weighted(w ** 0.5, None), 2, math.inf).value ** 2
    rhs2 = opnorm(half.weighted(None, w ** 0.5), 1, 2).value ** 2
    return lhs, rhs1, rhs2


# ---------------------------------------------------------------------------
# off-diagonal decay and finite propagation
# ---------------------------------------------------------------------------


def davies_gaffney_ratio(obj, t, U1, U2):
    """Gaussian-weighted bilinear heat ratio between two vertex sets.

    Top singular value of the (U2, U1) heat block in the mu geometry,
    multiplied by exp(d(U1, U2)^2 / 4t).
    """
    gen = as_generator(obj)
    U1 = np.asarray(U1, dtype=int)
    U2 = np.asarray(U2, dtype=int)
    if U1.size == 0 or U2.size == 0:
        raise InputError("subsets must be nonempty")
    if t <= 0:
        raise InputError("time must be positive")
    if gen.space is None:
        raise InputError("metric needed: generator carries no base space")
    block = gen.heat(t).symmetrized[np.ix_(U2, U1)]
    sigma = float(np.linalg.svd(block, compute_uv=False)[0]) if block.size else 0.0
    d = float(gen.space.dist[np.ix_(U1, U2)].min())
    if sigma == 0.0:
        return 0.0
    log_ratio = math.log(sigma) + d * d / (4.0 * t)
    return math.exp(log_ratio) if log_ratio < 700.0 else math.inf


def gaussian_constant_fit(obj, triples):
    """Smallest single C with |<e^{-tL} d_x, d_y>| <= C e^{-d^2/(Ct)} ||d_x|| ||d_y||.

    ``triples`` is a list of (t, x, y).  Per triple the minimal C solves
    C e^{-d^2/(Ct)} = rho by bisection (the left side is increasing in C);
    the fit is the max over triples.  Returns (C, per-triple table).
    """
    gen = as_generator(obj)
    if gen.space is None:
        raise InputError("metric needed: generator carries no base space")
    dist = gen.space.dist
    heats = {}
    rows = []
    worst = 0.0
    for t, x, y in triples:
        if t not in heats:
            heats[t] = gen.heat(t).symmetrized
        rho = abs(float(heats[t][y, x]))
        d = float(dist[x, y])
        if rho == 0.0:
            continue
        lo, hi = 1e-12, 1e12
        for _ in range(200):
            mid = math.sqrt(lo * hi)
            if mid * math.exp(-d * d / (mid * t)) >= rho:
                hi = mid
            else:
                lo = mid
            if hi / lo < 1.0 + 1e-12:
                break
        rows.append({"t": t, "x": int(x), "y": int(y), "d": d, "rho": rho,
                     "C": hi})
        worst = max(worst, hi)
    return worst, rows


def propagation_residual(space, op, r, slack):
    """Relative L^2(mu) mass of kernel columns beyond distance r + slack.

    max_x ||chi_{B(x, r+slack)^c} T delta_x||_2 / ||T delta_x||_2; an exact
    zero certifies support within distance r + slack.
    """
    if r < 0 or slack < 0:
        raise InputError("radius and slack must be nonnegative")
    dist = space.dist
    kern, mu = op.kernel, op.mu
    worst = 0.0
    for x in range(space.n):
        col = kern[:, x]
        total = np.sum(col * col * mu)
        if total == 0.0:
            continue
        outside = dist[:, x] > r + slack
        tail = np.sum(col[outside] ** 2 * mu[outside])
        worst = max(worst, math.sqrt(tail / total))
    return worst


def block_norm_bound(space, op, r, p, q, residual_tol=1e-10):
    """Global norm against the localized sup for an operator supported in D_r.

    Returns (global NormEstimate, sup_x ||T chi_B(x,r)||, K0) and checks
    global <= K0 * local.  K0 is the overlap count of the scale-r net used in
    the partition argument.
    """
    res = propagation_residual(space, op, r, 0.0)
    if res > residual_tol:
        raise PreconditionError(
            "support certificate fails: residual %.3e > %.1e" % (res, residual_tol))
    cov = bounded_covering(space, r)
    net = np.asarray(cov.net)
    dist = space.dist
    k0 = max(int(np.sum(dist[p_, net] <= 3.0 * r)) for p_ in net)

    def norm_of(kop, side):
        try:
            return opnorm(kop, p, q)
        except InputError:
            lo, hi = opnorm_bounds(kop, p, q)
            return lo if side == "lower" else hi

    global_est = norm_of(op, "lower")
    local = 0.0
    for x in range(space.n):
        ball = np.nonzero(dist[x] < r)[0]
        if ball.size == 0:
            continue
        local = max(local, norm_of(op.restrict_columns(ball), "upper").value)
    ok = global_est.value <= k0 * local * (1.0 + 1e-9)
    if not ok:
        raise PreconditionError(
            "block bound violated: %.6g > %d * %.6g"
            % (global_est.value, k0, local))
    return global_est, local, k0


# ---------------------------------------------------------------------------
# scalar spectral utilities
# ---------------------------------------------------------------------------


def norm_equivalence_suprema(beta):
    """sup of (1+x)^{b/2}/(1+x^{b/2}) over x >= 0, and of its reciprocal."""
    grid = np.concatenate(([0.0], np.geomspace(1e-12, 1e12, 4001), [1.0]))
    vals = (1.0 + grid) ** (beta / 2.0) / (1.0 + grid ** (beta / 2.0))
    # both ratios tend to 1 at infinity
    fwd = max(float(vals.max()), 1.0)
    inv = max(float((1.0 / vals).max()), 1.0)
    return fwd, inv


def l1_uniform_bound(obj, t_grid):
    """sup over the grid of the exact ||e^{-tL}||_{1->1} (column mass norms)."""
    gen = as_generator(obj)
    return max(opnorm(gen.heat(t), 1, 1).value for t in t_grid)
