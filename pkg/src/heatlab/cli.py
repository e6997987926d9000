"""Configuration-driven runner.

``heatlab run config.json`` builds the configured space and gauge, executes
the requested suites, and writes constants.csv, checks.csv, plotdata/*.csv,
figures/*.png, and report.json into the output directory.  With a fixed
seed the delimited outputs are byte-identical between runs; wall-clock
metadata is isolated in run_meta.json.

``heatlab verify config.json`` drives the acceptance battery and exits 0
only if every criterion passes.  ``heatlab dump-space config.json`` emits
the space serialization (optionally with a heat-kernel dump).

Exit codes: 2 for a config schema violation (the offending key is printed),
3 for a numerical precondition failure, 1 for a failed verification.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import builders, inequalities as ineq, nash
from .acceptance import run_acceptance, windowed_t_grid
from .errors import HeatLabError, SchemaError
from .space import doubling_profile, space_from_json, space_to_json
from .spectral import (
    KernelOperator,
    block_norm_bound,
    davies_gaffney_ratio,
    gaussian_constant_fit,
    kernel_to_csv,
    opnorm,
    propagation_residual,
    tstar_t_check,
    weighted_norm_functional,
)

_SPACE_KINDS = {"two_vertex", "path", "ring", "torus", "halfline", "glued",
                "vicsek", "custom"}
_SUITES = ("identities", "doubling", "constants", "nash_machine", "gluing",
           "propagation", "davies_gaffney", "gamma_sweep")


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------


def validate_config(doc, need_output=True):
    if not isinstance(doc, dict):
        raise SchemaError("$", "config must be a JSON object")
    if "space" not in doc:
        raise SchemaError("$.space", "missing required key")
    space = doc["space"]
    if not isinstance(space, dict) or "kind" not in space:
        raise SchemaError("$.space.kind", "missing required key")
    if space["kind"] not in _SPACE_KINDS:
        raise SchemaError("$.space.kind", "unknown kind %r" % space["kind"])
    need = {"path": ["n"], "ring": ["n"], "torus": ["dims"],
            "halfline": ["n", "a"], "glued": ["dim_a", "dim_b", "sides"],
            "vicsek": ["generations"], "custom": ["doc"]}
    for key in need.get(space["kind"], []):
        if key not in space:
            raise SchemaError("$.space.%s" % key, "missing required key")
    gauge = doc.get("gauge", {"kind": "ball_volume"})
    if not isinstance(gauge, dict) or "kind" not in gauge:
        raise SchemaError("$.gauge.kind", "missing required key")
    suites = doc.get("suites", ["identities"])
    if not isinstance(suites, list):
        raise SchemaError("$.suites", "must be a list")
    for i, name in enumerate(suites):
        if name != "full" and name not in _SUITES:
            raise SchemaError("$.suites[%d]" % i, "unknown suite %r" % name)
    seed = doc.get("seed", 0)
    if not isinstance(seed, int):
        raise SchemaError("$.seed", "must be an integer")
    if need_output and "output" not in doc:
        raise SchemaError("$.output", "missing required key")
    if "tolerances" in doc and not isinstance(doc["tolerances"], dict):
        raise SchemaError("$.tolerances", "must be an object")
    grids = doc.get("grids", {})
    if not isinstance(grids, dict):
        raise SchemaError("$.grids", "must be an object")
    for key, val in grids.items():
        if key not in ("t_grid", "r_grid", "ball_radii", "n_centers"):
            raise SchemaError("$.grids.%s" % key, "unknown grid key")
        if key == "n_centers":
            if not isinstance(val, int):
                raise SchemaError("$.grids.n_centers", "must be an integer")
        elif isinstance(val, dict):
            geo = val.get("geom")
            if not (isinstance(geo, list) and len(geo) == 3):
                raise SchemaError("$.grids.%s.geom" % key,
                                  "must be [lo, hi, n]")
        elif not isinstance(val, list):
            raise SchemaError("$.grids.%s" % key, "must be a list or geom spec")
    return doc


def build_space_from_config(spec):
    kind = spec["kind"]
    if kind == "two_vertex":
        return builders.build_two_vertex()
    if kind == "path":
        return builders.build_path(int(spec["n"]))
    if kind == "ring":
        return builders.build_ring(int(spec["n"]))
    if kind == "torus":
        return builders.build_torus(spec["dims"], float(spec.get("h", 1.0)))
    if kind == "halfline":
        return builders.build_halfline_weighted(int(spec["n"]), float(spec["a"]))
    if kind == "glued":
        return builders.build_glued(int(spec["dim_a"]), int(spec["dim_b"]),
                                    spec["sides"])
    if kind == "vicsek":
        return builders.build_vicsek(int(spec["generations"]))
    if kind == "custom":
        return space_from_json(json.dumps(spec["doc"]), name="custom")
    raise SchemaError("$.space.kind", "unknown kind %r" % kind)


def _resolve_grid(value, default):
    if value is None:
        return np.asarray(default, dtype=float)
    if isinstance(value, dict):
        lo, hi, n = value["geom"]
        return np.geomspace(float(lo), float(hi), int(n))
    return np.asarray([float(v) for v in value])


class RunContext:
    def __init__(self, config):
        self.config = config
        self.space = build_space_from_config(config["space"])
        self.gauge = builders.make_gauge(config.get("gauge",
                                                    {"kind": "ball_volume"}))
        self.seed = int(config.get("seed", 0))
        grids = config.get("grids", {})
        t_default = windowed_t_grid(self.space)
        self.t_grid = _resolve_grid(grids.get("t_grid"), t_default)
        self.r_grid = _resolve_grid(grids.get("r_grid"), np.sqrt(t_default))
        radii = _resolve_grid(grids.get("ball_radii"),
                              sorted({max(2.0, float(r)) for r in self.r_grid})[:3])
        self.balls = ineq.default_ball_grid(self.space, radii,
                                            int(grids.get("n_centers", 3)))
        self.gen = self.space.generator


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def _const_row(ctx, est, params=""):
    wit_text = json.dumps(est.witness, sort_keys=True)
    return {
        "space": ctx.space.name,
        "gauge": ctx.gauge.name,
        "tag": est.tag,
        "params": params,
        "value": est.value,
        "mode": est.mode,
        "witness_id": hashlib.sha1(wit_text.encode()).hexdigest()[:10],
        "grid_hash": est.grid,
        "_witness": est.witness,
    }


def _check_row(suite, operation, tag, measured, tolerance, passed):
    return {"suite": suite, "operation": operation, "tag": tag,
            "measured": measured, "tolerance": tolerance,
            "passed": bool(passed)}


def suite_identities(ctx):
    checks, series = [], []
    for t in ctx.t_grid:
        lhs, r1, r2 = tstar_t_check(ctx.gen, ctx.gauge, float(t))
        gap = max(abs(lhs - r1), abs(lhs - r2)) / max(lhs, 1e-300)
        checks.append(_check_row("identities", "tstar_t_check", "t=%g" % t,
                                 "%.3e" % gap, "1e-9 relative", gap <= 1e-9))
    rng = np.random.default_rng(ctx.seed + 1)
    worst = 0.0
    for _ in range(5):
        s, t = rng.uniform(0.2, 3.0, size=2)
        diff = ctx.gen.heat(s).compose(ctx.gen.heat(t)).kernel \
            - ctx.gen.heat(s + t).kernel
        worst = max(worst, opnorm(KernelOperator(diff, ctx.space.mu), 2, 2).value)
    checks.append(_check_row("identities", "semigroup_law", "5 pairs",
                             "%.3e" % worst, "1e-10", worst <= 1e-10))
    kern = ctx.gen.heat(float(ctx.t_grid[0])).kernel
    sym = float(np.abs(kern - kern.T).max())
    diag = np.diag(kern)
    cs = float((np.abs(kern) - np.sqrt(np.outer(diag, diag))).max())
    checks.append(_check_row("identities", "kernel_symmetry", "",
                             "%.3e" % sym, "1e-12", sym <= 1e-12))
    checks.append(_check_row("identities", "kernel_diag_domination", "",
                             "%.3e" % cs, "1e-12", cs <= 1e-12))
    t = float(ctx.t_grid[len(ctx.t_grid) // 2])
    a = weighted_norm_functional(ctx.gen, ctx.gauge, 1, 2, 0.0, t).value
    b = weighted_norm_functional(ctx.gen, ctx.gauge, 2, math.inf, 0.5, t).value
    gap = abs(a - b) / max(a, 1e-300)
    checks.append(_check_row("identities", "duality_symmetry", "t=%g" % t,
                             "%.3e" % gap, "1e-10 relative", gap <= 1e-10))
    return {"checks": checks, "series": series}


def suite_doubling(ctx):
    prof = doubling_profile(ctx.space, ctx.gauge, ctx.r_grid)
    rows = [
        {"tag": "doubling_C", "value": prof.C_D, "mode": "exact"},
        {"tag": "doubling_kappa", "value": prof.kappa, "mode": "exact"},
        {"tag": "doubling_kappa_prime", "value": prof.kappa_prime,
         "mode": "exact"},
        {"tag": "doubling_Dprime", "value": prof.C_Dprime, "mode": "exact"},
    ]
    consts = []
    for row in rows:
        est = ineq.ConstantEstimate(row["tag"], row["value"], row["mode"],
                                    {}, ineq.grid_hash(ctx.r_grid))
        consts.append(_const_row(ctx, est))
    x0 = 0
    xs = ctx.r_grid.tolist()
    ys = [ctx.gauge(ctx.space, x0, r) for r in ctx.r_grid]
    series = [("volume_growth", [("v(x0, r)", xs, ys)], "r", "v")]
    return {"constants": consts, "series": series, "checks": []}


def suite_constants(ctx):
    gen, gauge, space = ctx.gen, ctx.gauge, ctx.space
    members_g = ineq.build_dictionary(space, ctx.balls, seed=ctx.seed)
    members_l = ineq.build_dictionary(space, ctx.balls, seed=ctx.seed,
                                      localized=True)
    consts, series = [], []
    due = ineq.due_constant(gen, gauge, ctx.t_grid)
    consts.append(_const_row(ctx, due))
    consts.append(_const_row(ctx, ineq.nash_constant(gen, gauge, ctx.r_grid,
                                                     members_g)))
    consts.append(_const_row(ctx, ineq.log_nash_constant(gen, gauge,
                                                         ctx.r_grid, members_g)))
    consts.append(_const_row(ctx, ineq.kigami_nash_constant(gen, gauge,
                                                            ctx.r_grid,
                                                            members_g)))
    consts.append(_const_row(ctx, ineq.local_nash_constant(gen, gauge, 1.0,
                                                           members_l)))
    consts.append(_const_row(ctx, ineq.local_nash_constant(gen, gauge, 1.0,
                                                           members_l,
                                                           homogeneous=True)))
    prof = doubling_profile(space, gauge, ctx.r_grid)
    kl = ineq.local_nash_via_kigami(gen, gauge, members_l, prof)
    best = max(kl["rows"], key=lambda row: row["direct_ln"])
    consts.append(_const_row(ctx, ineq.ConstantEstimate(
        "local_nash_scale_opt a=%g" % kl["alpha"], best["direct_ln"], "lower",
        {"s_star": best["s_star"], "kn_best": best["kn_best"],
         "optimized_bound": best["optimized_bound"]},
        ineq.grid_hash(ctx.r_grid))))
    for q in (4.0, math.inf):
        out = ineq.gn_constant(gen, gauge, q, ctx.r_grid, seed=ctx.seed)
        consts.append(_const_row(ctx, out["resolvent"], params="q=%s" % q))
        if q == math.inf:
            series.append(("gn_resolvent",
                           [("resolvent", [row["r"] for row in out["rows"]],
                             [row["resolvent"] for row in out["rows"]]),
                            ("semigroup", [row["r"] for row in out["rows"]],
                             [row["semigroup"] for row in out["rows"]])],
                           "r", "norm"))
    consts.append(_const_row(ctx, ineq.kgn_constant(gen, gauge, 4.0, members_l),
                             params="q=4"))
    consts.append(_const_row(ctx, ineq.ls_constant(gen, gauge, 4.0, members_l),
                             params="q=4"))
    for tilde in (False, True):
        est = ineq.faber_krahn_constant(gen, gauge, 1.0, ctx.balls,
                                        seed=ctx.seed, max_subsets=40,
                                        tilde=tilde)
        consts.append(_const_row(ctx, est))
    due_curve = [ineq.due_constant(gen, gauge, [t], cross_check=False).value
                 for t in ctx.t_grid]
    series.append(("due_vs_t", [("due", ctx.t_grid.tolist(), due_curve)],
                   "t", "weighted diagonal sup"))
    return {"constants": consts, "series": series, "checks": []}


def suite_nash_machine(ctx):
    consts, checks, series = [], [], []
    r_grid = np.geomspace(0.5, 8.0, 17)
    for n in (1, 2, 3):
        v = nash.RateFunction.from_callable(lambda r: r ** n, 0.05, 200.0,
                                            129, name="r^%d" % n)
        out = nash.nash_decay_pipeline(1.0, v, r_grid)
        ratio = out["w"](r_grid) / r_grid ** n
        spread = float(ratio.max() / ratio.min()) - 1.0
        checks.append(_check_row("nash_machine", "power_pipeline", "n=%d" % n,
                                 "%.3e" % spread, "1e-6", spread <= 1e-6))
        if n == 2:
            for name, rf in (("theta", out["theta"]), ("m", out["m"]),
                             ("w", out["w"])):
                series.append(("rate_%s" % name,
                               [(name, rf.x.tolist(), rf.y.tolist())],
                               "x", name, rf))
    # measured route on the configured space when the gauge is uniform
    w0 = ctx.gauge.weights(ctx.space, float(ctx.r_grid[0]))
    if float(w0.max() - w0.min()) <= 1e-12 * float(w0.max()):
        members = ineq.build_dictionary(ctx.space, ctx.balls, seed=ctx.seed)
        cst = ineq.nash_constant(ctx.gen, ctx.gauge, ctx.r_grid, members)
        v = nash.RateFunction.from_callable(
            lambda r: float(ctx.gauge.weights(ctx.space, r)[0]),
            float(ctx.r_grid[0]) / 4.0, float(ctx.r_grid[-1]) * 4.0, 65,
            name="gauge")
        a_bound = nash.l1_uniform_bound(ctx.gen, ctx.t_grid)
        try:
            out = nash.nash_decay_pipeline(cst.value, v, ctx.r_grid, A=a_bound)
            est = ineq.ConstantEstimate("w_vs_v", out["C_compare"], "exact",
                                        {}, ineq.grid_hash(ctx.r_grid))
            consts.append(_const_row(ctx, est))
            checks.append(_check_row("nash_machine", "compare_w_v", "",
                                     "%.4g" % out["C_compare"], "> 0",
                                     out["C_compare"] > 0))
        except HeatLabError as exc:
            checks.append(_check_row("nash_machine", "compare_w_v",
                                     "not-applicable", str(exc), "n/a", True))
    return {"constants": consts, "checks": checks, "series": series}


def suite_gluing(ctx):
    checks = []
    radii = [float(r) for r in ctx.r_grid[:3]]
    rep = ineq.local_to_global_check(ctx.space, ctx.gauge, radii,
                                     seed=ctx.seed, trials=10)
    for row in rep:
        checks.append(_check_row("gluing", "local_to_global", "r=%g" % row["r"],
                                 "K0=%d" % row["K0"], "four inequalities",
                                 row["ok"]))
    return {"checks": checks}


def suite_propagation(ctx):
    checks = []
    for k in (1, 2, 3):
        op = ctx.gen.polynomial([0.0] * k + [1.0])
        hop = float(ctx.space.edge_length[ctx.space.conductance > 0].max()) * k
        resid = propagation_residual(ctx.space, op, hop, 0.0)
        checks.append(_check_row("propagation", "propagation_residual",
                                 "L^%d" % k, "%.3e" % resid, "0.0 exact",
                                 resid == 0.0))
    r = float(ctx.space.edge_length[ctx.space.conductance > 0].max())
    try:
        g_est, local, k0 = block_norm_bound(ctx.space, ctx.gen.as_kernel(),
                                            r, 2, 2)
        checks.append(_check_row("propagation", "block_norm_bound", "L",
                                 "global=%.4g local=%.4g K0=%d"
                                 % (g_est.value, local, k0),
                                 "global <= K0*local", True))
    except HeatLabError as exc:
        checks.append(_check_row("propagation", "block_norm_bound", "L",
                                 str(exc), "global <= K0*local", False))
    return {"checks": checks}


def suite_davies_gaffney(ctx):
    checks = []
    t_vals = [float(t) for t in ctx.t_grid[:3]]
    x0 = 0
    finite = np.isfinite(ctx.space.dist[x0])
    far = int(np.argmax(np.where(finite, ctx.space.dist[x0], -1.0)))
    for t in t_vals:
        ratio = davies_gaffney_ratio(ctx.gen, t, [x0], [far])
        checks.append(_check_row("davies_gaffney", "davies_gaffney_ratio",
                                 "t=%g d=%g" % (t, ctx.space.dist[x0, far]),
                                 "%.4g" % ratio, "finite",
                                 math.isfinite(ratio)))
    triples = [(t, x0, y) for t in t_vals
               for y in range(1, ctx.space.n)
               if 0 < ctx.space.dist[x0, y] <= 2.0 * t]
    if triples:
        c_fit, rows = gaussian_constant_fit(ctx.gen, triples[:200])
        checks.append(_check_row("davies_gaffney", "gaussian_constant_fit",
                                 "%d pairs" % len(rows), "%.4g" % c_fit,
                                 "finite", math.isfinite(c_fit)))
    return {"checks": checks}


def suite_gamma_sweep(ctx):
    out = ineq.gamma_sweep(ctx.gen, ctx.gauge,
                           [(1.0, math.inf), (2.0, 2.0), (1.0, 2.0)],
                           ctx.t_grid, seed=ctx.seed)
    checks = []
    norm_rows = []
    for row in out["rows"]:
        checks.append(_check_row("gamma_sweep", "weighted_norm_functional",
                                 "p=%g q=%s gamma=%g"
                                 % (row["p"], row["q"], row["gamma"]),
                                 "%.6g" % row["sup"], "finite", row["finite"]))
        norm_rows.append({"label": "sup_t", "p": row["p"], "q": row["q"],
                          "gamma": row["gamma"], "t": "sup",
                          "value": row["sup"],
                          "mode": "exact" if row["sup_upper"] is None
                          else "lower"})
    checks.append(_check_row("gamma_sweep", "l1_uniform_bound", "",
                             "%.6g" % out["l1_uniform_bound"], "finite",
                             math.isfinite(out["l1_uniform_bound"])))
    return {"checks": checks, "norm_rows": norm_rows}


SUITE_FNS = {
    "identities": suite_identities,
    "doubling": suite_doubling,
    "constants": suite_constants,
    "nash_machine": suite_nash_machine,
    "gluing": suite_gluing,
    "propagation": suite_propagation,
    "davies_gaffney": suite_davies_gaffney,
    "gamma_sweep": suite_gamma_sweep,
}


# ---------------------------------------------------------------------------
# output rendering
# ---------------------------------------------------------------------------


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[k]) for k in header) + "\n")


def run_config(config):
    """Execute the configured suites and write the report tree."""
    from .plotting import render_curve

    config = validate_config(config)
    ctx = RunContext(config)
    out_dir = config["output"]
    os.makedirs(out_dir, exist_ok=True)
    os.makedirs(os.path.join(out_dir, "plotdata"), exist_ok=True)
    os.makedirs(os.path.join(out_dir, "figures"), exist_ok=True)

    suites = config.get("suites", ["identities"])
    if "full" in suites:
        suites = list(_SUITES)
    threads = int(os.environ.get("HEATLAB_THREADS", "1") or "1")
    started = time.time()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(SUITE_FNS[name], ctx) for name in suites]
            results = [f.result() for f in futures]
    else:
        results = [SUITE_FNS[name](ctx) for name in suites]

    constants, checks, norm_rows, figures = [], [], [], []
    for name, res in zip(suites, results):
        constants.extend(res.get("constants", []))
        checks.extend(res.get("checks", []))
        norm_rows.extend(res.get("norm_rows", []))
        for entry in res.get("series", []):
            sname, series, xlabel, ylabel = entry[0], entry[1], entry[2], entry[3]
            csv_path = os.path.join(out_dir, "plotdata", sname + ".csv")
            rows = [{"x": float(x), "value": float(y)}
                    for _, xs, ys in series for x, y in zip(xs, ys)]
            _write_csv(csv_path, ["x", "value"], rows)
            if len(entry) > 4:  # rate function: attach the tail descriptor
                rf = entry[4]
                with open(csv_path.replace(".csv", ".tail.json"), "w") as fh:
                    json.dump({"head": rf.head, "tail": rf.tail}, fh,
                              sort_keys=True)
            png_path = os.path.join(out_dir, "figures", sname + ".png")
            render_curve(png_path, series, xlabel, ylabel, title=sname)
            figures.append(png_path)

    constants.sort(key=lambda r: (r["tag"], r["params"]))
    const_header = ["space", "gauge", "tag", "params", "value", "mode",
                    "witness_id", "grid_hash"]
    _write_csv(os.path.join(out_dir, "constants.csv"), const_header, constants)
    check_header = ["suite", "operation", "tag", "measured", "tolerance",
                    "passed"]
    _write_csv(os.path.join(out_dir, "checks.csv"), check_header, checks)
    if norm_rows:
        _write_csv(os.path.join(out_dir, "plotdata", "norms.csv"),
                   ["label", "p", "q", "gamma", "t", "value", "mode"],
                   norm_rows)
    if config.get("dump_witnesses"):
        wdir = os.path.join(out_dir, "witnesses")
        os.makedirs(wdir, exist_ok=True)
        for row in constants:
            with open(os.path.join(wdir, row["witness_id"] + ".json"), "w") as fh:
                json.dump(row["_witness"], fh, sort_keys=True)

    cfg_text = json.dumps({k: v for k, v in config.items() if k != "output"},
                          sort_keys=True)
    report = {
        "constants": [{k: row[k] for k in const_header} for row in constants],
        "checks": checks,
        "figures": [os.path.basename(p) for p in sorted(figures)],
        "provenance": {
            "config_hash": hashlib.sha256(cfg_text.encode()).hexdigest(),
            "seed": ctx.seed,
            "grids": {"t_grid": ctx.t_grid.tolist(),
                      "r_grid": ctx.r_grid.tolist(),
                      "balls": [[int(x), float(r)] for x, r in ctx.balls]},
        },
    }
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    with open(os.path.join(out_dir, "run_meta.json"), "w") as fh:
        json.dump({"wall_seconds": time.time() - started,
                   "finished_unix": time.time()}, fh)
    return report


def verify_config(config):
    config = validate_config(config, need_output=False)
    tolerances = {k: float(v) for k, v in config.get("tolerances", {}).items()}
    keys = config.get("criteria")
    rows = run_acceptance(tolerances=tolerances, keys=keys, echo=print)
    failing = [r for r in rows if not r.passed]
    if failing:
        print("FIRST FAILURE: %s" % failing[0].line())
        return rows, 1
    return rows, 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _apply_overrides(config, pairs):
    for pair in pairs:
        if "=" not in pair:
            raise SchemaError("$", "--set needs key=value, got %r" % pair)
        key, raw = pair.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return config


def main(argv=None):
    parser = argparse.ArgumentParser(prog="heatlab")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute suites from a config")
    p_run.add_argument("config")
    p_run.add_argument("--set", action="append", default=[], dest="overrides",
                       metavar="key=value")
    p_ver = sub.add_parser("verify", help="run the acceptance battery")
    p_ver.add_argument("config")
    p_ver.add_argument("--set", action="append", default=[], dest="overrides",
                       metavar="key=value")
    p_dump = sub.add_parser("dump-space", help="emit the space serialization")
    p_dump.add_argument("config")
    p_dump.add_argument("--out", default=None)
    p_dump.add_argument("--heat-kernel", type=float, default=None,
                        metavar="T", help="also dump the heat kernel at time T")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print("cannot read config: %s" % exc, file=sys.stderr)
        return 2

    try:
        if args.command == "run":
            _apply_overrides(config, args.overrides)
            report = run_config(config)
            print("wrote %d constants, %d checks to %s"
                  % (len(report["constants"]), len(report["checks"]),
                     config["output"]))
            return 0
        if args.command == "verify":
            _apply_overrides(config, args.overrides)
            _, code = verify_config(config)
            return code
        if args.command == "dump-space":
            validate_config(config, need_output=False)
            space = build_space_from_config(config["space"])
            text = space_to_json(space)
            if args.out:
                os.makedirs(args.out, exist_ok=True)
                with open(os.path.join(args.out, "space.json"), "w") as fh:
                    fh.write(text)
                if args.heat_kernel is not None:
                    kernel_to_csv(space.generator.heat(args.heat_kernel),
                                  os.path.join(args.out, "heat_kernel.csv"))
                print("wrote %s" % os.path.join(args.out, "space.json"))
            else:
                print(text)
            return 0
    except SchemaError as exc:
        print("config error at %s" % exc, file=sys.stderr)
        return 2
    except HeatLabError as exc:
        print("numerical precondition failed: %s" % exc, file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
