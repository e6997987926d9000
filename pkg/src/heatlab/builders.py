"""Benchmark space constructions and generator variants.

Builders produce spaces with prescribed volume growth: periodic grids
(polynomial growth of the grid dimension), measure-weighted half-lines
(base-point dependent growth), two glued slabs of different dimension, and
the Vicsek tree (a negative control where sqrt(t)-scaled diagonal bounds are
expected to fail).  Generator variants: Dirichlet restrictions to a vertex
subset and Schroedinger perturbations L -/+ potential with a strong
positivity check.  All builders are pure and their outputs immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InputError, SizeError, StrongPositivityError, PreconditionError
from .space import MetricMeasureSpace, VolumeGauge, ball_volume_gauge
from .spectral import Generator

__all__ = [
    "build_torus",
    "build_ring",
    "build_path",
    "build_two_vertex",
    "build_halfline_weighted",
    "build_glued",
    "build_vicsek",
    "from_edges",
    "GaugeSpec",
    "make_gauge",
    "PotentialSpec",
    "dirichlet_restriction",
    "schrodinger",
    "strong_positivity_margin",
]


def from_edges(n, edges, mu=None, name=""):
    """Space from an explicit edge list [(i, j, w)] or [(i, j, w, length)]."""
    w = np.zeros((n, n))
    lengths = np.zeros((n, n))
    for e in edges:
        i, j, c = e[0], e[1], e[2]
        ln = e[3] if len(e) > 3 else 1.0
        w[i, j] = w[j, i] = c
        lengths[i, j] = lengths[j, i] = ln
    mu = np.ones(n) if mu is None else np.asarray(mu, dtype=float)
    return MetricMeasureSpace(mu, w, lengths, name=name)


def build_two_vertex():
    return from_edges(2, [(0, 1, 1.0)], name="two_vertex")


def build_path(n):
    if n < 2:
        raise InputError("path needs at least 2 vertices")
    return from_edges(n, [(k, k + 1, 1.0) for k in range(n - 1)],
                      name="path%d" % n)


def build_torus(dims, h=1.0):
    """Periodic grid: mu = h^n, conductance h^(n-2), edge length h.

    The generator action h^{-2} sum_nbr (f(x) - f(y)) converges to the
    continuum Laplacian on smooth samples as h -> 0.
    """
    dims = [int(d) for d in dims]
    if any(d < 3 for d in dims):
        raise InputError("torus sides must be >= 3 (degenerate periodicity)")
    if h <= 0:
        raise InputError("spacing must be positive")
    ndim = len(dims)
    n = int(np.prod(dims))
    idx = np.arange(n).reshape(dims)
    w = np.zeros((n, n))
    for axis in range(ndim):
        nbr = np.roll(idx, -1, axis=axis)
        for a, b in zip(idx.ravel(), nbr.ravel()):
            w[a, b] = w[b, a] = h ** (ndim - 2)
    mu = np.full(n, float(h) ** ndim)
    name = "torus" + "x".join(str(d) for d in dims)
    return MetricMeasureSpace(mu, w, np.where(w > 0, h, 0.0), name=name)


def build_ring(n):
    return build_torus([n])


def build_halfline_weighted(n, a):
    """Unit path with mu(k) = (1+k)^a: volume grows like r^(1+a) away from 0."""
    if n < 3:
        raise InputError("need at least 3 vertices")
    if a < 0:
        raise InputError("exponent must be nonnegative")
    mu = (1.0 + np.arange(n)) ** float(a)
    space = from_edges(n, [(k, k + 1, 1.0) for k in range(n - 1)],
                       mu=mu, name="halfline%d_a%g" % (n, a))
    return space


def build_glued(dim_a, dim_b, sides):
    """Two periodic slabs of different dimension joined by one bridge vertex.

    ``sides`` lists the slab sides: the first dim_a entries for the first
    slab, the remaining dim_b for the second.  The gauge V(x, r) then depends
    on which end x sits in.
    """
    if dim_a == dim_b:
        raise InputError("ends must have different dimensions")
    if len(sides) != dim_a + dim_b:
        raise InputError("sides must list %d lengths" % (dim_a + dim_b))
    ta = build_torus(sides[:dim_a])
    tb = build_torus(sides[dim_a:])
    na, nb = ta.n, tb.n
    n = na + nb + 1
    w = np.zeros((n, n))
    w[:na, :na] = ta.conductance
    w[na:na + nb, na:na + nb] = tb.conductance
    bridge = n - 1
    w[bridge, 0] = w[0, bridge] = 1.0
    w[bridge, na] = w[na, bridge] = 1.0
    mu = np.concatenate([ta.mu, tb.mu, [1.0]])
    return MetricMeasureSpace(mu, w, np.where(w > 0, 1.0, 0.0),
                              name="glued%dd%dd" % (dim_a, dim_b))


def _vicsek_points(generations):
    pts = {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}
    for g in range(1, generations):
        shift = 2 * 3 ** (g - 1)
        pts = {(x + dx, y + dy)
               for (x, y) in pts
               for (dx, dy) in ((0, 0), (shift, 0), (-shift, 0),
                                (0, shift), (0, -shift))}
    return sorted(pts)


def build_vicsek(generations):
    """Vicsek tree with unit weights; self-similar, non-Gaussian scaling."""
    if generations < 1:
        raise InputError("generations must be >= 1")
    if generations > 4:
        raise SizeError("generations > 4 exceeds the desk-scale cap")
    pts = _vicsek_points(generations)
    index = {p: k for k, p in enumerate(pts)}
    edges = []
    for (x, y) in pts:
        for (dx, dy) in ((1, 0), (0, 1)):
            q = (x + dx, y + dy)
            if q in index:
                edges.append((index[(x, y)], index[q], 1.0))
    return from_edges(len(pts), edges, name="vicsek%d" % generations)


# ---------------------------------------------------------------------------
# gauges
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaugeSpec:
    """Declarative gauge choice; see make_gauge for the supported kinds."""

    kind: str
    alpha: float = 1.0
    beta: float = 1.0
    r0: float = 1.0
    n: float = 1.0
    radii: tuple = ()
    values: tuple = ()


def make_gauge(spec):
    """Build a VolumeGauge from a GaugeSpec (or a dict with the same keys).

    Kinds: ``ball_volume`` (v = V); ``power_of_ball_volume`` with
    v = V(x, r^beta)^alpha (beta = 1 keeps comparability of nearby centers);
    ``capped_ball_volume`` with v = V(x, min(r, r0)); ``uniform_power`` with
    v = r^n; ``custom_table`` interpolating per-vertex tables in r.
    """
    if isinstance(spec, dict):
        spec = GaugeSpec(**spec)
    if spec.kind == "ball_volume":
        return ball_volume_gauge()
    if spec.kind == "power_of_ball_volume":
        a, b = float(spec.alpha), float(spec.beta)
        if a <= 0 or b <= 0:
            raise InputError("power gauge needs positive exponents")
        return VolumeGauge(
            "V^%g(r^%g)" % (a, b),
            lambda space, r: space.ball_volumes(r ** b) ** a)
    if spec.kind == "capped_ball_volume":
        r0 = float(spec.r0)
        if r0 <= 0:
            raise InputError("cap radius must be positive")
        return VolumeGauge(
            "V(min(r,%g))" % r0,
            lambda space, r: space.ball_volumes(min(r, r0)))
    if spec.kind == "uniform_power":
        n = float(spec.n)
        if n < 0:
            raise InputError("exponent must be nonnegative")
        return VolumeGauge("r^%g" % n,
                           lambda space, r: np.full(space.n, r ** n))
    if spec.kind == "custom_table":
        radii = np.asarray(spec.radii, dtype=float)
        table = np.asarray(spec.values, dtype=float)
        if radii.ndim != 1 or table.shape[0] != radii.size:
            raise InputError("custom table needs one row of values per radius")
        if np.any(np.diff(radii) <= 0):
            raise InputError("custom table radii must increase")

        def weights(space, r):
            if table.shape[1] != space.n:
                raise InputError("custom table sized for a different space")
            k = int(np.searchsorted(radii, r, side="right")) - 1
            k = min(max(k, 0), radii.size - 1)
            return table[k]

        return VolumeGauge("table", weights)
    raise InputError("unknown gauge kind %r" % spec.kind)


# ---------------------------------------------------------------------------
# generator variants
# ---------------------------------------------------------------------------


def dirichlet_restriction(obj, omega):
    """Generator on omega keeping the full diagonal and zeroing exterior coupling.

    The quadratic form equals the ambient energy of the zero-extension, so
    the smallest eigenvalue is the Dirichlet ground value of the subset.
    """
    from .spectral import as_generator

    gen = as_generator(obj)
    omega = np.asarray(sorted(set(int(i) for i in omega)))
    if omega.size == 0:
        raise InputError("omega must be nonempty")
    if omega.min() < 0 or omega.max() >= gen.n:
        raise InputError("omega indices out of range")
    sub = gen.action[np.ix_(omega, omega)]
    base = gen.indices[omega] if gen.indices is not None else omega
    return Generator(gen.mu[omega], sub, label=gen.label + "|D",
                     space=gen.space, indices=base)


@dataclass(frozen=True)
class PotentialSpec:
    """Per-vertex potential >= 0 and whether it is added or subtracted."""

    values: tuple
    sign: str = "added"  # "added" | "subtracted"

    def vector(self, n):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (n,):
            raise InputError("potential sized for a different space")
        if np.any(v < 0):
            raise InputError("potential must be nonnegative")
        return v


def strong_positivity_margin(obj, potential):
    """eps = 1 - sup_f ||pot^(1/2) f||_2^2 / E(f); may be <= 0 (failure).

    Requires the form to be positive definite on its domain: on a connected
    unrestricted space with a nonzero potential, constants kill the energy
    and the margin is meaningless -- restrict first.
    """
    from .spectral import as_generator

    gen = as_generator(obj)
    v = np.asarray(potential, dtype=float)
    if v.shape != (gen.n,):
        raise InputError("potential sized for a different space")
    if np.all(v == 0):
        return 1.0
    lam_min = gen.lambda_min
    if lam_min <= 1e-12 * max(gen.lambda_max, 1.0):
        raise PreconditionError(
            "energy form is degenerate (constants); apply a Dirichlet "
            "restriction before subtracting a potential")
    s = np.sqrt(gen.mu)
    sym = s[:, None] * gen.action / s[None, :]
    sym = 0.5 * (sym + sym.T)
    vals = scipy.linalg.eigh(np.diag(v), sym, eigvals_only=True)
    return 1.0 - float(vals[-1])


def schrodinger(obj, pot):
    """Perturbed generator L -/+ potential acting as Lf -/+ pot * f.

    Subtraction demands a positive strong-positivity margin; on failure the
    violating function is attached to the raised error.
    """
    from .spectral import as_generator

    gen = as_generator(obj)
    v = pot.vector(gen.n) if isinstance(pot, PotentialSpec) else np.asarray(pot)
    sign = pot.sign if isinstance(pot, PotentialSpec) else "added"
    if sign == "added":
        action = gen.action + np.diag(v)
    elif sign == "subtracted":
        if np.any(v > 0):
            eps = strong_positivity_margin(gen, v)
            if eps <= 0:
                s = np.sqrt(gen.mu)
                sym = 0.5 * (s[:, None] * gen.action / s[None, :]
                             + (s[:, None] * gen.action / s[None, :]).T)
                w, q = scipy.linalg.eigh(np.diag(v), sym)
                witness = q[:, -1] / s
                raise StrongPositivityError(eps, witness.tolist())
        action = gen.action - np.diag(v)
    else:
        raise InputError("sign must be 'added' or 'subtracted'")
    return Generator(gen.mu, action, label=gen.label + ("+" if sign == "added" else "-") + "V",
                     space=gen.space, indices=gen.indices)
