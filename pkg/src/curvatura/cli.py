"""Command-line front end.

Exit status: 0 when every check passes, 1 when any check fails its
tolerance, 2 on infrastructure errors (bad input, non-convergence, ...).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .catalog import SURFACES, surface_names
from .report import fmt, reports_to_csv, reports_to_json
from .scenario import Scenario, build_frame, build_surface, curvature_grid, grid_csv, load_scenarios, run_scenario

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

log = logging.getLogger("curvatura")


class CliError(Exception):
    pass


def _params(args) -> dict:
    out = {}
    for item in args.param or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise CliError(f"--param expects NAME=VALUE, got {item!r}")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise CliError(f"--param {key}: {val!r} is not a number") from None
    if getattr(args, "radius", None) is not None:
        out["R"] = args.radius
    return out


def _emit(reports, args) -> int:
    text = reports_to_csv(reports) if args.format == "csv" else reports_to_json(reports)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    stalled = [r.scenario for r in reports if not r.quadrature.converged]
    if stalled:
        print(f"error: quadrature did not converge for {', '.join(stalled)}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _surface_scenario(args, name, theorem, **kw) -> Scenario:
    return Scenario(
        name=name,
        theorem=theorem,
        surface=args.surface,
        params=_params(args),
        tolerance=args.tol,
        max_depth=getattr(args, "max_depth", None),
        **kw,
    )


def cmd_catalog(args) -> int:
    for name in surface_names():
        s = SURFACES[name]()
        params = ", ".join(f"{k}={fmt(v)}" for k, v in s.params)
        chi = "-" if s.euler_char is None else str(s.euler_char)
        print(f"{name}({params})  chi={chi}  {s.description}")
    return EXIT_OK


def cmd_verify(args) -> int:
    theorem = args.theorem
    if theorem == "turning":
        curve = args.curve or (args.loop[0] if args.loop else None)
        if curve is None:
            raise CliError("verify turning needs --curve")
        sc = Scenario(name=f"turning:{curve}", theorem="turning", curve=curve, tolerance=args.tol)
    else:
        if not args.surface:
            raise CliError(f"verify {theorem} needs --surface")
        loops = tuple(args.loop or ())
        sc = _surface_scenario(args, f"{theorem}:{args.surface}", theorem, loops=loops,
                               euler_char=args.euler_char)
    return _emit([run_scenario(sc)], args)


def cmd_holonomy(args) -> int:
    sc = _surface_scenario(args, f"holonomy:{args.loop}", "holonomy", loops=(args.loop,))
    return _emit([run_scenario(sc)], args)


def cmd_curvature(args) -> int:
    sc = _surface_scenario(args, f"curvature:{args.surface}", "curvature-grid", grid=args.grid)
    m, _ = build_surface(sc)
    f, w = build_frame(sc, m)
    text = grid_csv(*curvature_grid(m, f, w, args.grid))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _run_one(sc: Scenario):
    try:
        return "ok", run_scenario(sc)
    except Exception as exc:  # reported by the parent, in declaration order
        return "error", f"{sc.name}: {type(exc).__name__}: {exc}"


def _jobs(args) -> int:
    raw = args.jobs if args.jobs is not None else os.environ.get("CURVATURA_JOBS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise CliError(f"invalid job count {raw!r}") from None
    if n < 1:
        raise CliError("job count must be at least 1")
    return n


def cmd_run(args) -> int:
    scenarios = load_scenarios(args.file)
    jobs = min(_jobs(args), len(scenarios))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, scenarios))
    else:
        results = [_run_one(sc) for sc in scenarios]
    reports = [r for kind, r in results if kind == "ok"]
    errors = [r for kind, r in results if kind == "error"]
    code = _emit(reports, args) if reports else EXIT_OK
    for msg in errors:
        print(f"error: {msg}", file=sys.stderr)
    return EXIT_ERROR if errors else code


def _add_output(p):
    p.add_argument("--format", choices=("json", "csv"), default="json", help="report format")
    p.add_argument("--out", help="write the report here instead of stdout")


def _add_surface(p, required=True):
    p.add_argument("--surface", required=required, choices=surface_names())
    p.add_argument("--radius", type=float, help="shorthand for --param R=...")
    p.add_argument("--param", action="append", metavar="NAME=VALUE", help="surface parameter")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvatura", description="Intrinsic surface geometry checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    cat = sub.add_parser("catalog", help="built-in surfaces")
    cat.add_argument("action", choices=("list",))
    cat.set_defaults(func=cmd_catalog)

    ver = sub.add_parser("verify", help="run one theorem check")
    ver.add_argument("theorem", choices=("compact", "local", "general", "excess", "turning"))
    _add_surface(ver, required=False)
    ver.add_argument("--loop", action="append", help="boundary loop (repeat for several)")
    ver.add_argument("--curve", help="closed plane curve for 'turning'")
    ver.add_argument("--euler-char", type=int, help="declared Euler characteristic of the domain")
    ver.add_argument("--tol", type=float, help="pass threshold for the residual")
    ver.add_argument("--max-depth", type=int, help="cap quadrature refinement depth")
    _add_output(ver)
    ver.set_defaults(func=cmd_verify)

    hol = sub.add_parser("holonomy", help="holonomy of a loop against the enclosed curvature")
    _add_surface(hol)
    hol.add_argument("--loop", required=True)
    hol.add_argument("--tol", type=float)
    hol.add_argument("--max-depth", type=int)
    _add_output(hol)
    hol.set_defaults(func=cmd_holonomy)

    cur = sub.add_parser("curvature", help="sample k and omega on a grid (CSV)")
    _add_surface(cur)
    cur.add_argument("--grid", type=int, default=32, help="grid points per axis")
    cur.add_argument("--out", help="CSV path (default stdout)")
    cur.set_defaults(func=cmd_curvature, tol=None)

    run = sub.add_parser("run", help="run every scenario of a TOML file")
    run.add_argument("file")
    run.add_argument("--jobs", type=int, help="parallel workers (default $CURVATURA_JOBS or 1)")
    _add_output(run)
    run.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
