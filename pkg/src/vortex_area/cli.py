"""Command-line front end.

Every command prints one run record (JSON by default, CSV with ``--format csv``)
and writes it to ``--out`` when given.  Exit codes: 0 success, 2 invalid
input, 3 solver or quadrature non-convergence (the record is still written).

CSV columns
  bound, sweep   l, nx, ny, classical, f_value, bound, cylinder, discs, catenoid_flap, converged, seed
  threshold      lo, hi, width, f_lo, f_hi, eps, grid_density
  baselines      l, classical, cylinder, discs, catenoid_flap, catenoid_exists, catenoid_a
  recovery       k, area, bound, gap, rel_gap, converged
  gradcheck      seed, pairs, max_rel_error
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import catenoid_parameter, example_bounds
from .functional import SurfaceField, f2l, gradient_check
from .geometry import ConvexProfile, Grid, subgraph_mask
from .optimizer import MinimizerResult, bound_report, estimate_threshold, minimize_joint, sweep
from .recovery import AnalyticStandIn, DiscreteStar, convergence_study

log = logging.getLogger(__name__)

SCHEMA = 1
EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED = 0, 2, 3


class InputError(ValueError):
    pass


def worker_count() -> int:
    raw = os.environ.get("VORTEX_AREA_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"VORTEX_AREA_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise InputError("VORTEX_AREA_THREADS must be >= 1")
    return n


# ---------------------------------------------------------------------------
# minimizer persistence

def minimizer_to_dict(result: MinimizerResult) -> dict:
    grid = result.grid
    return {
        "schema": SCHEMA,
        "kind": "minimizer",
        "grid": {"l": grid.l, "nx": grid.nx, "ny": grid.ny},
        "h": [float(v) for v in result.h_star.values],
        "psi": [float(v) for v in result.psi_star.values.ravel(order="C")],
        "f_value": result.f_value,
        "breakdown": result.breakdown.as_dict(),
        "converged": result.converged,
        "seed": result.seed,
    }


def minimizer_from_dict(data: dict, tol: float = 1e-12) -> MinimizerResult:
    """Rebuild a minimizer and check that the stored value is reproduced."""
    if data.get("kind") != "minimizer":
        raise InputError("not a minimizer document")
    g = data["grid"]
    grid = Grid(float(g["l"]), int(g["nx"]), int(g["ny"]))
    h = ConvexProfile(np.array(data["h"], dtype=float))
    values = np.array(data["psi"], dtype=float).reshape(grid.nx, grid.ny)
    psi = SurfaceField(grid, subgraph_mask(grid, h), values)
    bd = f2l(h, psi)
    if abs(bd.total - data["f_value"]) > tol * max(1.0, abs(data["f_value"])):
        raise InputError(f"stored f_value {data['f_value']!r} is not reproduced ({bd.total!r})")
    return MinimizerResult(h_star=h, psi_star=psi, f_value=bd.total, breakdown=bd, iterations=0,
                           converged=bool(data.get("converged", True)), seed=str(data.get("seed", "")))


def load_minimizer(path) -> MinimizerResult:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read minimizer {path}: {exc}") from None
    return minimizer_from_dict(data)


def minimizer_path(out: Path) -> Path:
    return out.with_name(out.stem + ".minimizer.json")


# ---------------------------------------------------------------------------
# output

def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def render(record: dict, rows: list[dict], fmt: str) -> str:
    if fmt == "csv":
        return _csv(rows)
    return json.dumps(record, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _positive(name: str, v: float) -> float:
    if not (math.isfinite(v) and v > 0):
        raise InputError(f"{name} must be positive, got {v}")
    return v


def _grid_size(name: str, n: int) -> int:
    if n < 3 or n % 2 == 0:
        raise InputError(f"{name} must be an odd integer >= 3, got {n}")
    return n


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"expected a comma-separated list of numbers, got {text!r}") from None


# ---------------------------------------------------------------------------
# commands; each returns (params, outputs, rows, converged)

def cmd_bound(args):
    l = _positive("--l", args.l)
    grid = Grid(l, _grid_size("--nx", args.nx), _grid_size("--ny", args.ny))
    result = minimize_joint(l, grid)
    report = bound_report(result)
    outputs = {"report": report.as_dict(), "breakdown": result.breakdown.as_dict(),
               "gap_to_pi": result.f_value - math.pi}
    if args.out:
        path = minimizer_path(Path(args.out))
        path.write_text(json.dumps(minimizer_to_dict(result), sort_keys=True) + "\n")
        outputs["minimizer_file"] = str(path)
    params = {"l": l, "nx": grid.nx, "ny": grid.ny}
    row = {k: v for k, v in report.as_dict().items() if k != "recovery_area"}
    return params, outputs, [row], result.converged


def cmd_threshold(args):
    lo, hi = _positive("--lo", args.lo), _positive("--hi", args.hi)
    if not lo < hi:
        raise InputError("--lo must be below --hi")
    est = estimate_threshold(_grid_size("--grid", args.grid), _positive("--eps", args.eps), (lo, hi),
                             width=_positive("--width", args.width))
    d = est.as_dict()
    params = {"eps": args.eps, "lo": lo, "hi": hi, "grid": args.grid, "width": args.width}
    row = {k: d[k] for k in ("lo", "hi", "width", "f_lo", "f_hi", "eps", "grid_density")}
    return params, {"threshold": d}, [row], True


def cmd_sweep(args):
    ls = [_positive("--l-list entry", v) for v in _float_list(args.l_list)]
    if not ls:
        raise InputError("--l-list is empty")
    rows = [r.as_dict() for r in sweep(ls, _grid_size("--grid", args.grid))]
    params = {"l_list": ls, "grid": args.grid}
    conv = all(r["converged"] for r in rows)
    return params, {"rows": rows}, [{k: v for k, v in r.items() if k != "recovery_area"} for r in rows], conv


def cmd_baselines(args):
    l = _positive("--l", args.l)
    ex = example_bounds(l).as_dict()
    cat = catenoid_parameter(l)
    ex["catenoid_exists"] = cat.exists
    ex["catenoid_a"] = cat.a if cat.exists else None
    return {"l": l}, {"baselines": ex}, [ex], True


def cmd_recovery(args):
    ks = [int(v) for v in _float_list(args.k_list)]
    if not ks or any(k < 2 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
        raise InputError("--k-list must be strictly increasing integers >= 2")
    if args.pair == "analytic":
        if args.l is None:
            raise InputError("--l is required with the analytic pair")
        star = AnalyticStandIn(_positive("--l", args.l))
    else:
        star = DiscreteStar.from_result(load_minimizer(args.pair))
        if args.l is not None and not math.isclose(args.l, star.l, rel_tol=0, abs_tol=1e-15):
            raise InputError(f"--l {args.l} does not match the minimizer's l = {star.l}")
    if any(1.0 / k >= star.l / 2 for k in ks):
        raise InputError("every k must satisfy 1/k < l/2")
    rows = convergence_study(star.l, ks, star, order=args.order, rel_tol=_positive("--rel-tol", args.rel_tol),
                             workers=worker_count())
    params = {"l": star.l, "k_list": ks, "pair": args.pair, "order": args.order, "rel_tol": args.rel_tol,
              "f_value": star.f_value}
    table = [r.as_dict() for r in rows]
    csv_rows = [{k: r[k] for k in ("k", "area", "bound", "gap", "rel_gap", "converged")} for r in table]
    return params, {"rows": table}, csv_rows, all(r.converged for r in rows)


def cmd_gradcheck(args):
    chk = gradient_check(seed=args.seed, pairs=args.pairs, max_n=_grid_size("--max-n", args.max_n))
    d = chk.as_dict()
    ok = chk.max_rel_error < 1e-6
    row = {k: d[k] for k in ("seed", "pairs", "max_rel_error")}
    return {"seed": args.seed, "pairs": args.pairs, "max_n": args.max_n}, {"gradcheck": d, "passed": ok}, [row], ok


COMMANDS = {
    "bound": cmd_bound,
    "threshold": cmd_threshold,
    "sweep": cmd_sweep,
    "baselines": cmd_baselines,
    "recovery": cmd_recovery,
    "gradcheck": cmd_gradcheck,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vortex-area", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="also write the record to this path")
    common.add_argument("--no-timing", action="store_true",
                        help="omit wall time and timestamp so repeated runs give identical output")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("bound", parents=[common], help="minimize the functional and report the bound")
    s.add_argument("--l", type=float, required=True)
    s.add_argument("--nx", type=int, default=129)
    s.add_argument("--ny", type=int, default=129)

    s = sub.add_parser("threshold", parents=[common], help="bracket the radius where the minimum reaches pi")
    s.add_argument("--eps", type=float, default=1e-3)
    s.add_argument("--lo", type=float, default=0.3)
    s.add_argument("--hi", type=float, default=3.0)
    s.add_argument("--grid", type=int, default=65)
    s.add_argument("--width", type=float, default=0.01)

    s = sub.add_parser("sweep", parents=[common], help="bound table over several radii")
    s.add_argument("--l-list", required=True, help="comma-separated radii")
    s.add_argument("--grid", type=int, default=129)

    s = sub.add_parser("baselines", parents=[common], help="classical area and example limits")
    s.add_argument("--l", type=float, required=True)

    s = sub.add_parser("recovery", parents=[common], help="graph areas of the recovery maps")
    s.add_argument("--l", type=float, default=None)
    s.add_argument("--k-list", default="8,16,32,64")
    s.add_argument("--pair", default="analytic", help="'analytic' or a minimizer JSON file written by bound")
    s.add_argument("--order", type=int, default=4)
    s.add_argument("--rel-tol", type=float, default=1e-4)

    s = sub.add_parser("gradcheck", parents=[common], help="analytic vs finite-difference gradients")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--pairs", type=int, default=50)
    s.add_argument("--max-n", type=int, default=17)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        worker_count()
        params, outputs, rows, converged = COMMANDS[args.command](args)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    record = {"schema": SCHEMA, "version": __version__, "command": args.command,
              "params": params, "outputs": outputs, "converged": converged}
    if not args.no_timing:
        record["wall_time"] = time.perf_counter() - t0
        record["timestamp"] = datetime.now(timezone.utc).isoformat()
    text = render(record, rows, args.format)
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text)
    if not converged:
        print("warning: not converged; record flagged", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
