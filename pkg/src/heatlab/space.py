"""Finite weighted graphs viewed as metric measure spaces.

A space is a finite vertex set carrying a positive measure ``mu``, symmetric
nonnegative edge conductances ``w``, positive per-edge lengths, and the
shortest-path metric those lengths induce.  The generator

    (Lf)(x) = (1/mu(x)) * sum_y w_xy (f(x) - f(y))

is self-adjoint in the mu-weighted inner product, and its quadratic form is
the graph Dirichlet energy  E(f) = (1/2) sum_{x,y} w_xy (f(x) - f(y))^2.

Balls are open: ball(x, r) = {y : d(x, y) < r}.  Ties at distance exactly r
fall outside, which matters on lattices where distances hit grid values.
Disconnected spaces are allowed; the metric is +inf across components.
Instances are immutable after construction (internal caches only memoize).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import InputError

__all__ = [
    "MetricMeasureSpace",
    "VolumeGauge",
    "DoublingProfile",
    "TwoExponentEnvelope",
    "Covering",
    "ball_volume_gauge",
    "dirichlet_energy",
    "lp_norm",
    "doubling_profile",
    "bounded_covering",
    "space_to_json",
    "space_from_json",
]


class MetricMeasureSpace:
    """Vertex measure + conductances + lengths + shortest-path metric."""

    def __init__(self, mu, conductance, edge_length=None, name=""):
        mu = np.asarray(mu, dtype=float)
        w = np.asarray(conductance, dtype=float)
        n = mu.shape[0]
        if mu.ndim != 1 or np.any(mu <= 0):
            raise InputError("mu must be a 1-d array of positive weights")
        if w.shape != (n, n):
            raise InputError("conductance must be n x n")
        if np.any(w < 0):
            raise InputError("conductance must be nonnegative")
        if not np.array_equal(w, w.T):
            raise InputError("conductance must be symmetric")
        if np.any(np.diag(w) != 0):
            raise InputError("conductance diagonal must vanish")
        if edge_length is None:
            lengths = np.where(w > 0, 1.0, 0.0)
        else:
            lengths = np.asarray(edge_length, dtype=float)
            if np.isscalar(edge_length) or lengths.ndim == 0:
                lengths = np.where(w > 0, float(edge_length), 0.0)
            if lengths.shape != (n, n) or not np.array_equal(lengths, lengths.T):
                raise InputError("edge_length must be symmetric n x n")
            if np.any((w > 0) & (lengths <= 0)):
                raise InputError("edges need positive lengths")
        self.n = n
        self.mu = mu
        self.conductance = w
        self.edge_length = np.where(w > 0, lengths, 0.0)
        self.name = name or "space%d" % n
        for a in (self.mu, self.conductance, self.edge_length):
            a.setflags(write=False)
        self._dist = None
        self._ball_vol = {}

    # -- metric ------------------------------------------------------------

    @property
    def dist(self):
        """Shortest-path distance matrix (exact Dijkstra over edge lengths)."""
        if self._dist is None:
            graph = csr_matrix(np.where(self.conductance > 0, self.edge_length, 0.0))
            d = shortest_path(graph, directed=False)
            d[np.arange(self.n), np.arange(self.n)] = 0.0
            d.setflags(write=False)
            self._dist = d
        return self._dist

    @property
    def diameter(self):
        d = self.dist[np.isfinite(self.dist)]
        return float(d.max()) if d.size else 0.0

    def components(self):
        graph = csr_matrix((self.conductance > 0).astype(float))
        _, labels = connected_components(graph, directed=False)
        return labels

    def ball(self, x, r):
        """Indices of the open ball {y : d(x,y) < r}."""
        if r <= 0:
            raise InputError("radius must be positive")
        return np.nonzero(self.dist[x] < r)[0]

    def ball_volume(self, x, r):
        return float(self.mu[self.ball(x, r)].sum())

    def ball_volumes(self, r):
        """mu(B(x, r)) for every x at once; cached per radius."""
        key = float(r)
        if key not in self._ball_vol:
            vol = (self.dist < r) @ self.mu
            vol.setflags(write=False)
            self._ball_vol[key] = vol
        return self._ball_vol[key]

    # -- measure and generator ----------------------------------------------

    def inner(self, f, g):
        return float(np.dot(np.asarray(f) * self.mu, np.asarray(g)))

    @property
    def laplacian_action(self):
        """Matrix A with (Af)(x) = (1/mu(x)) sum_y w_xy (f(x) - f(y))."""
        if not hasattr(self, "_lap"):
            deg = self.conductance.sum(axis=1)
            a = (np.diag(deg) - self.conductance) / self.mu[:, None]
            a.setflags(write=False)
            self._lap = a
        return self._lap

    @property
    def generator(self):
        if not hasattr(self, "_gen"):
            from .spectral import Generator

            self._gen = Generator(self.mu, self.laplacian_action,
                                  label=self.name, space=self)
        return self._gen

    def __repr__(self):
        return "MetricMeasureSpace(%s, n=%d)" % (self.name, self.n)


def dirichlet_energy(space, f):
    """Graph Dirichlet energy (1/2) sum_{x,y} w_xy (f(x)-f(y))^2."""
    f = np.asarray(f, dtype=float)
    if f.shape != (space.n,):
        raise InputError("function defined on %d vertices, expected %d"
                         % (f.size, space.n))
    diff = f[:, None] - f[None, :]
    return float(0.5 * np.sum(space.conductance * diff * diff))


def lp_norm(space, f, p):
    """Norm of f in L^p(mu); max modulus for p = inf."""
    f = np.asarray(f, dtype=float)
    if f.shape != (space.n,):
        raise InputError("function defined on %d vertices, expected %d"
                         % (f.size, space.n))
    if np.isinf(p):
        return float(np.max(np.abs(f)))
    if p < 1:
        raise InputError("p must be >= 1")
    return float(np.sum(np.abs(f) ** p * space.mu) ** (1.0 / p))


# -- volume gauges ----------------------------------------------------------


class VolumeGauge:
    """A positive function v(x, r), nondecreasing in r.

    ``weight_fn(space, r)`` returns the vector (v(x, r))_x; values are cached
    per (space, radius) because gauges sit in hot inner loops.
    """

    def __init__(self, name, weight_fn, monotone=True):
        self.name = name
        self._weight_fn = weight_fn
        self.monotone = monotone
        self._cache = {}

    def weights(self, space, r):
        key = (id(space), float(r))
        if key not in self._cache:
            w = np.asarray(self._weight_fn(space, float(r)), dtype=float)
            if np.any(w <= 0):
                raise InputError("gauge %r not positive at r=%g" % (self.name, r))
            w.setflags(write=False)
            self._cache[key] = w
        return self._cache[key]

    def __call__(self, space, x, r):
        return float(self.weights(space, r)[x])

    def __repr__(self):
        return "VolumeGauge(%r)" % self.name


def ball_volume_gauge():
    """The gauge v = V, i.e. v(x, r) = mu(B(x, r))."""
    return VolumeGauge("V", lambda space, r: space.ball_volumes(r))


# -- doubling diagnostics -----------------------------------------------------


@dataclass(frozen=True)
class TwoExponentEnvelope:
    """Envelope w(r, s) = C * max((r/s)^kappa, (r/s)^kappa_prime)."""

    kappa: float
    kappa_prime: float
    C: float

    def __call__(self, r, s):
        q = r / s
        return self.C * max(q ** self.kappa, q ** self.kappa_prime)


@dataclass(frozen=True)
class DoublingProfile:
    """Measured doubling data for a gauge on a grid of radii.

    C_D is the exact sup of v(x,2r)/v(x,r) over the grid.  kappa/kappa_prime
    are least-squares log-log slopes (max resp. min over centers), and
    C_upper/c_lower are chosen so the two-sided bounds

        c * (r/s)^kappa_prime <= v(x,r)/v(x,s) <= C * (r/s)^kappa

    hold for every grid pair r >= s: a verified certificate, not a fit alone.
    """

    C_D: float
    kappa: float
    kappa_prime: float
    C_Dprime: float
    C_upper: float
    c_lower: float
    r_grid: tuple = field(repr=False)
    centers: tuple = field(repr=False)

    def envelope(self):
        return TwoExponentEnvelope(self.kappa, self.kappa_prime, self.C_upper)


def doubling_profile(space, gauge, r_grid, centers=None):
    """Fit doubling constants/exponents of a gauge over (centers x r_grid)."""
    r_grid = np.asarray(sorted(float(r) for r in r_grid))
    if r_grid.size == 0:
        raise InputError("empty radius grid")
    if centers is None:
        centers = np.arange(space.n)
    centers = np.asarray(centers)

    vals = np.array([gauge.weights(space, r)[centers] for r in r_grid])  # (nr, nc)
    vals2 = np.array([gauge.weights(space, 2.0 * r)[centers] for r in r_grid])
    c_d = float(np.max(vals2 / vals))

    # D'_v constant: sup of v(y,r)/v(x,r) over pairs with d(x,y) <= r
    c_dp = 1.0
    for r in r_grid:
        w = gauge.weights(space, r)
        near = space.dist <= r
        ratio = np.max(np.where(near, w[None, :] / w[:, None], 0.0))
        c_dp = max(c_dp, float(ratio))

    logr = np.log(r_grid)
    slopes = []
    if r_grid.size >= 2:
        x = logr - logr.mean()
        denom = float(np.dot(x, x))
        for j in range(centers.size):
            y = np.log(vals[:, j])
            slopes.append(float(np.dot(x, y - y.mean()) / denom))
    else:
        slopes = [0.0]
    kappa = max(max(slopes), 0.0)
    kappa_prime = min(max(min(slopes), 0.0), kappa)

    # inflate constants so the grid-wide two-sided bounds certify
    c_up, c_lo = 1.0, 1.0
    nr = r_grid.size
    for i in range(nr):
        for k in range(i, nr):
            q = r_grid[k] / r_grid[i]
            ratio = vals[k] / vals[i]
            c_up = max(c_up, float(np.max(ratio / q ** kappa)))
            c_lo = min(c_lo, float(np.min(ratio / q ** kappa_prime)))
    return DoublingProfile(C_D=c_d, kappa=kappa, kappa_prime=kappa_prime,
                           C_Dprime=c_dp, C_upper=c_up, c_lower=c_lo,
                           r_grid=tuple(r_grid), centers=tuple(int(c) for c in centers))


# -- bounded covering ---------------------------------------------------------


@dataclass(frozen=True)
class Covering:
    """Net points, Lipschitz cutoffs, and overlap multiplicity at scale r.

    The net is greedy in ascending vertex order with acceptance threshold
    d >= r/2, so every vertex lies strictly inside B(x_i, r/2) for some net
    point.  The cutoff

        rho_i(y) = (1 - 4 d(y, B(x_i, r/2)) / r)_+

    equals 1 on B(x_i, r/2), is supported in B(x_i, r), and sum_i rho_i >= 1
    on every component.  K0 = max_y #{i : y in B(x_i, r)}.
    """

    r: float
    net: tuple
    cutoffs: np.ndarray  # (len(net), n)
    K0: int


def bounded_covering(space, r):
    if r <= 0:
        raise InputError("radius must be positive")
    dist = space.dist
    net = []
    for v in range(space.n):
        if all(dist[v, p] >= r / 2.0 for p in net):
            net.append(v)
    cutoffs = np.zeros((len(net), space.n))
    for i, p in enumerate(net):
        inner_ball = np.nonzero(dist[p] < r / 2.0)[0]
        d_to_ball = dist[:, inner_ball].min(axis=1)
        cutoffs[i] = np.clip(1.0 - 4.0 * d_to_ball / r, 0.0, 1.0)
    member = np.array([dist[p] < r for p in net])
    k0 = int(member.sum(axis=0).max()) if net else 0
    cutoffs.setflags(write=False)
    return Covering(r=float(r), net=tuple(net), cutoffs=cutoffs, K0=k0)


# -- serialization ------------------------------------------------------------


def space_to_json(space):
    """Round-trippable JSON document; float repr keeps weights bit-exact."""
    edges = []
    for i in range(space.n):
        for j in range(i + 1, space.n):
            w = space.conductance[i, j]
            if w > 0:
                edges.append([i, j, float(w), float(space.edge_length[i, j])])
    doc = {
        "vertices": space.n,
        "mu": [float(m) for m in space.mu],
        "edges": edges,
    }
    return json.dumps(doc)


def space_from_json(text, name=""):
    doc = json.loads(text)
    n = int(doc["vertices"])
    mu = np.asarray(doc["mu"], dtype=float)
    w = np.zeros((n, n))
    lengths = np.zeros((n, n))
    for i, j, c, ln in doc["edges"]:
        w[i, j] = w[j, i] = c
        lengths[i, j] = lengths[j, i] = ln
    return MetricMeasureSpace(mu, w, lengths, name=name)
