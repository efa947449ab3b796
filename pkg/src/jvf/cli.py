"""Command-line experiment runner emitting plot-ready CSV data.

Subcommands: eval (converged value with its guaranteed bound), decay
(bound vs realized error by level), scan (grid of the embedding component
just off the boundary plane), boundary (convergent/oscillatory loops in
the plane), and fixed (period-map fixed points plus infinity candidates).
All output is UTF-8 CSV with '#'-prefixed metadata lines; exit codes are
0 on success, 2 on precondition failures, 3 on non-convergence.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import config as config_mod
from . import convergence, dynamics, fraction, geometry
from .errors import (
    InvalidSignatureError,
    JvfError,
    NoAttractiveFixedPointError,
    NotConvergedError,
    OnBoundaryError,
    ValidationError,
)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _workers() -> int:
    cpus = os.cpu_count() or 1
    cap = os.environ.get("JVF_THREADS")
    if cap:
        try:
            cpus = min(cpus, max(1, int(cap)))
        except ValueError:
            pass
    return cpus


def cmd_eval(cfg) -> tuple:
    space = cfg.space()
    params = cfg.params()
    Z = np.asarray(cfg.eval.point, dtype=float)
    res = fraction.eval_converged(space, params, Z, cfg.eval.rel_tol,
                                  cfg.eval.max_levels)
    comments = [
        f"# eval point={list(map(float, Z))}",
        f"# rel_tol={_fmt(cfg.eval.rel_tol)} max_levels={cfg.eval.max_levels}",
    ]
    header = [f"v{i}" for i in range(space.dim)] + ["levels_used", "log10_2rho"]
    row = [*res.value, res.levels_used, math.log10(res.bound)]
    return comments, [header], [row]


def cmd_decay(cfg) -> tuple:
    space = cfg.space()
    params = cfg.params()
    Z = np.asarray(cfg.decay.point, dtype=float)
    if geometry.y_component(space, Z) == 0.0:
        raise OnBoundaryError("decay point lies on the boundary hyperplane")
    M = cfg.decay.ref_level
    probe = 3
    seq = fraction.truncation_sequence(space, params, Z, M + probe)
    R_M = seq[M]
    ref_norm = float(np.linalg.norm(R_M))
    rho_log = convergence.error_radius_sequence(space, params, Z, cfg.decay.stop)
    ref_drift = max(
        float(np.linalg.norm(seq[M + k] - R_M)) / ref_norm for k in range(1, probe + 1)
    )
    comments = [
        f"# decay point={list(map(float, Z))} ref_level={M}",
        f"# ref_drift_rel={_fmt(ref_drift)} (|R_n - R_M|/|R_M| for n slightly above M)",
    ]
    if ref_drift > 1e-13:
        comments.append("# warning: reference level may be too shallow for this point")
    floor = 1e-14 * ref_norm
    rows = []
    for N in range(cfg.decay.start, cfg.decay.stop + 1, cfg.decay.step):
        err = float(np.linalg.norm(seq[N] - R_M))
        log_err = math.log10(err) if err > 0.0 else -math.inf
        rows.append([N, rho_log[N] + convergence.LOG10_2, log_err,
                     1 if err < floor else 0])
    return comments, [["N", "log10_2rho", "log10_err", "rounding_floor"]], rows


def scan_grid(cfg):
    grid = cfg.scan.grid
    x1s = np.linspace(grid.x1[0], grid.x1[1], grid.nx1)
    x2s = np.linspace(grid.x2[0], grid.x2[1], grid.nx2)
    return x1s, x2s


def run_scan(space, params, x1s, x2s, zy: float, levels: int):
    """Embedding component of the scaled fraction over the grid.

    Values carry the leading scale beta_0, i.e. they are y . beta_0 R_N;
    rows are ordered x1-major.  Returns (values, divergent) each shaped
    (len(x1s), len(x2s)).  Chunks of grid rows are distributed over a
    thread pool; results are reassembled by grid index so the output
    order is deterministic.
    """
    axes = [i for i in range(space.dim) if i != space.y_index]
    nx1, nx2 = len(x1s), len(x2s)
    beta0 = params.scale(0)

    def eval_rows(lo, hi):
        count = (hi - lo) * nx2
        Zs = np.zeros((count, space.dim))
        Zs[:, axes[0]] = np.repeat(x1s[lo:hi], nx2)
        Zs[:, axes[1]] = np.tile(x2s, hi - lo)
        Zs[:, space.y_index] = zy
        vals, infmask = fraction.eval_truncated_batch(space, params, Zs, levels)
        ycomp = beta0 * vals[:, space.y_index]
        bad = infmask | ~np.isfinite(vals).all(axis=1)
        ycomp[infmask] = np.inf
        return ycomp.reshape(hi - lo, nx2), bad.reshape(hi - lo, nx2)

    workers = _workers()
    chunk = max(1, math.ceil(nx1 / (workers * 4)))
    bounds = [(lo, min(lo + chunk, nx1)) for lo in range(0, nx1, chunk)]
    values = np.empty((nx1, nx2))
    divergent = np.empty((nx1, nx2), dtype=bool)
    if workers == 1 or len(bounds) == 1:
        results = [eval_rows(lo, hi) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda b: eval_rows(*b), bounds))
    for (lo, hi), (v, d) in zip(bounds, results):
        values[lo:hi] = v
        divergent[lo:hi] = d
    return values, divergent


def cmd_scan(cfg) -> tuple:
    space = cfg.space()
    params = cfg.params()
    x1s, x2s = scan_grid(cfg)
    values, divergent = run_scan(space, params, x1s, x2s, cfg.scan.zy,
                                 cfg.scan.levels)
    y0 = cfg.scan.contour_y0
    rate = cfg.scan.contour_rate
    contours = [y0 * math.exp(rate * n) for n in range(cfg.scan.contour_count)]
    comments = [
        f"# scan levels={cfg.scan.levels} zy={_fmt(cfg.scan.zy)}",
        f"# grid x1=[{_fmt(x1s[0])},{_fmt(x1s[-1])}]x{len(x1s)}"
        f" x2=[{_fmt(x2s[0])},{_fmt(x2s[-1])}]x{len(x2s)}",
        f"# contour_levels={','.join(_fmt(c) for c in contours)}"
        f" (y_n = y0*exp(rate*n), y0={_fmt(y0)}, rate={_fmt(rate)})",
    ]
    rows = []
    for i, x1 in enumerate(x1s):
        for j, x2 in enumerate(x2s):
            rows.append([x1, x2, values[i, j], 1 if divergent[i, j] else 0])
    return comments, [["x1", "x2", "y_component", "divergent"]], rows


def cmd_boundary(cfg) -> tuple:
    space = cfg.space()
    params = cfg.params()
    grid = cfg.boundary.grid
    if grid.x1 != grid.x2 or grid.nx1 != grid.nx2:
        extent = (min(grid.x1[0], grid.x2[0]), max(grid.x1[1], grid.x2[1]))
        resolution = max(grid.nx1, grid.nx2)
    else:
        extent = tuple(grid.x1)
        resolution = grid.nx1
    loops = dynamics.boundary_loops(space, params, extent, resolution)
    comments = [
        f"# boundary extent=[{_fmt(extent[0])},{_fmt(extent[1])}]"
        f" resolution={resolution} loops={len(loops)}",
    ]
    rows = []
    for k, loop in enumerate(loops):
        for x1, x2 in loop:
            rows.append([k, x1, x2])
    return comments, [["loop_id", "x1", "x2"]], rows


def cmd_fixed(cfg) -> tuple:
    space = cfg.space()
    params = cfg.params()
    Z = np.asarray(cfg.fixed.point, dtype=float)
    reports = dynamics.find_fixed_points(space, params, Z,
                                         cfg.fixed.multi_starts, cfg.fixed.seed)
    candidates = dynamics.infinity_fixed_point_candidates(space, params)
    comments = [f"# fixed point analysis at Z={list(map(float, Z))}"]
    header = ["type"] + [f"c{i}" for i in range(space.dim)] + ["multiplier", "kind"]
    rows = []
    for rep in reports:
        rows.append(["fixed_point", *np.asarray(rep.location), rep.multiplier,
                     rep.kind])
    for cand in candidates:
        rows.append(["infinity_candidate", *cand.location, cand.multiplier,
                     cand.kind])
    return comments, [header], rows


def _write_csv(out, comments, headers, rows):
    for line in comments:
        out.write(line + "\n")
    for header in headers:
        out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(x if isinstance(x, str) else _fmt(x) for x in row) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jvf",
        description="Vector continued fraction experiments (CSV output)",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("eval", "converged value with its guaranteed error bound"),
        ("decay", "bound and realized error versus truncation level"),
        ("scan", "grid scan of the embedding component off the plane"),
        ("boundary", "convergent/oscillatory boundary loops in the plane"),
        ("fixed", "period-map fixed points and infinity candidates"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="YAML config path (defaults bundled)")
        p.add_argument("--out", help="output CSV path (stdout when omitted)")
        p.add_argument("--levels", type=int, help="truncation depth override")
        p.add_argument("--ref-level", type=int, dest="ref_level",
                       help="decay reference level override")
        p.add_argument("--grid", help="grid override as MIN,MAX,COUNT (both axes)")
        p.add_argument("--zy", type=float, help="scan offset below/above the plane")
        p.add_argument("--point", help="evaluation point as comma-separated coords")
    return parser


def _apply_overrides(cfg, args):
    if args.point:
        coords = [float(tok) for tok in args.point.split(",")]
        cfg.eval.point = coords
        cfg.decay.point = coords
        cfg.fixed.point = coords
    if args.levels is not None:
        cfg.scan.levels = args.levels
        cfg.decay.stop = max(args.levels, cfg.decay.start)
        cfg.eval.max_levels = max(args.levels, 1)
    if args.ref_level is not None:
        cfg.decay.ref_level = args.ref_level
    if args.zy is not None:
        cfg.scan.zy = args.zy
    if args.grid:
        lo, hi, count = args.grid.split(",")
        spec = config_mod.GridSpec([float(lo), float(hi)], [float(lo), float(hi)],
                                   int(count), int(count))
        cfg.scan.grid = spec
        cfg.boundary.grid = spec


_COMMANDS = {
    "eval": cmd_eval,
    "decay": cmd_decay,
    "scan": cmd_scan,
    "boundary": cmd_boundary,
    "fixed": cmd_fixed,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = (config_mod.load_config(args.config) if args.config
               else config_mod.default_config())
        _apply_overrides(cfg, args)
        config_mod.validate_config(cfg)
        comments, headers, rows = _COMMANDS[args.command](cfg)
    except (ValidationError, OnBoundaryError, InvalidSignatureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NotConvergedError, NoAttractiveFixedPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except JvfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            _write_csv(fh, comments, headers, rows)
    else:
        _write_csv(sys.stdout, comments, headers, rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
