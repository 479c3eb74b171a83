"""Command-line front end.

Subcommands: ``bound``, ``region-map``, ``gclosure``, ``structure``,
``gap-sweep``, ``verify``.  Sweep commands emit CSV (17 significant
digits, stable headers); point queries emit JSON.  ``--plot`` additionally
renders a figure next to the delimited output.

Exit codes: 0 ok, 1 verification failure, 2 invalid input, 3 ambiguous
region, 4 structure out of applicability, 5 empty region.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from .core import (
    AmbiguousRegion,
    CompositeSpec,
    DomainError,
    EmptyRegion,
    InvalidSpec,
    OutOfApplicability,
)
from .bounds import Region, brute_force_bound, classify_region, lower_bound
from .gclosure import comparison_bounds, gclosure_point
from .laminate import (
    build_optimal_structure,
    check_optimality_conditions,
    node_to_text,
    structure_to_json,
)
from .verify import region_E_gap_curve, run_invariant_suite
from . import plots

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_AMBIGUOUS = 3
EXIT_OUT_OF_APPLICABILITY = 4
EXIT_EMPTY_REGION = 5


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row[h]) for h in header))
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _write_json(path, payload):
    text = json.dumps(payload, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit(path, header, rows, fmt):
    if fmt == "json":
        _write_json(path, [{h: row[h] for h in header} for row in rows])
    else:
        _write_csv(path, header, rows)


def _plot_path(out, default_name):
    if out is None or out == "-":
        return default_name
    stem = out.rsplit(".", 1)[0] if "." in out.rsplit("/", 1)[-1] else out
    return stem + ".png"


def _plot_enabled(args):
    if args.plot is not None:
        return args.plot
    return args.out not in (None, "-")


def _load_config(path):
    """Flat key-value config file: `key = value` or `key value` per line."""
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                key, val = line.split("=", 1)
            else:
                parts = line.split(None, 1)
                if len(parts) != 2:
                    raise InvalidSpec(f"cannot parse config line: {raw!r}")
                key, val = parts
            values[key.strip().replace("-", "_")] = val.strip()
    return values


_CONFIG_FLOATS = {"k1", "k2", "m1", "m2", "r", "r_min", "r_max", "m1_min", "m1_max"}
_CONFIG_INTS = {"steps", "jobs", "seed"}


def _apply_config(args, parser, argv):
    if not getattr(args, "config", None):
        return args
    values = _load_config(args.config)
    explicit = set()
    for action in parser._actions:
        for opt in action.option_strings:
            if any(tok == opt or tok.startswith(opt + "=") for tok in argv):
                explicit.add(action.dest)
    for key, raw in values.items():
        if not hasattr(args, key) or key in explicit:
            continue  # flags beat the config file
        if key in _CONFIG_FLOATS:
            setattr(args, key, float(raw))
        elif key in _CONFIG_INTS:
            setattr(args, key, int(raw))
        else:
            setattr(args, key, raw)
    return args


def _spec_from(args) -> CompositeSpec:
    return CompositeSpec(args.k1, args.k2, args.m1, args.m2)


def _add_spec_flags(p, with_m1=True):
    p.add_argument("--k1", type=float, default=1.0)
    p.add_argument("--k2", type=float, default=3.0)
    if with_m1:
        p.add_argument("--m1", type=float, default=0.1)
    p.add_argument("--m2", type=float, default=0.5)


def _add_common_flags(p):
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", default=None, help="flat key-value config file")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plot", action=argparse.BooleanOptionalAction, default=None,
                   help="render a figure next to the output "
                        "(default: on when --out is a file)")


def _linspace(lo, hi, n):
    if n <= 1:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_bound(args) -> int:
    spec = _spec_from(args)
    res = lower_bound(spec, args.r)
    pt = gclosure_point(spec, args.r)
    payload = {
        "region": res.region.value,
        "B": res.B,
        "t_opt": res.t_opt,
        "k_star1": pt.k_star1,
        "k_star2": pt.k_star2,
        "exact": res.exact,
        "tie": [t.value for t in res.tie],
    }
    if args.oracle:
        b_oracle, t_oracle = brute_force_bound(spec, args.r)
        payload["oracle_B"] = b_oracle
        payload["oracle_t_opt"] = t_oracle
        payload["oracle_gap"] = (res.B - b_oracle) / b_oracle
    _write_json(args.out, payload)
    return EXIT_OK


def _region_map_row(task):
    k1, k2, m2, m1, r = task
    spec = CompositeSpec(k1, k2, m1, m2)
    res = lower_bound(spec, r)
    return {"m1": m1, "r": r, "region": res.region.value, "B": res.B, "t_opt": res.t_opt}


def cmd_region_map(args) -> int:
    if not (0.0 <= args.m1_min < args.m1_max <= 1.0 - args.m2):
        raise InvalidSpec(f"m1 range [{args.m1_min}, {args.m1_max}] outside [0, 1-m2)")
    if not (0.0 < args.r_min < args.r_max <= 1.0):
        raise InvalidSpec(f"r range ({args.r_min}, {args.r_max}] outside (0, 1]")
    tasks = [
        (args.k1, args.k2, args.m2, m1, r)
        for m1 in _linspace(args.m1_min, args.m1_max, args.steps)
        for r in _linspace(args.r_min, args.r_max, args.steps)
    ]
    rows = _map_tasks(_region_map_row, tasks, args.jobs)
    header = ["m1", "r", "region", "B", "t_opt"]
    _emit(args.out, header, rows, args.format)
    if _plot_enabled(args):
        plots.render_region_map(rows, _plot_path(args.out, "region_map.png"))
    return EXIT_OK


def _gclosure_row(task):
    k1, k2, m2, m1, r = task
    spec = CompositeSpec(k1, k2, m1, m2)
    pt = gclosure_point(spec, r)
    harmonic, (tk1, tk2) = comparison_bounds(spec, r)
    return {
        "r": r,
        "k_star1": pt.k_star1,
        "k_star2": pt.k_star2,
        "region": pt.region.value,
        "exact": pt.exact,
        "harmonic": harmonic,
        "transl_k1": tk1,
        "transl_k2": tk2,
    }


def cmd_gclosure(args) -> int:
    if not (0.0 < args.r_min < args.r_max <= 1.0):
        raise InvalidSpec(f"r range ({args.r_min}, {args.r_max}] outside (0, 1]")
    tasks = [
        (args.k1, args.k2, args.m2, args.m1, r)
        for r in _linspace(args.r_min, args.r_max, args.steps)
    ]
    rows = _map_tasks(_gclosure_row, tasks, args.jobs)
    header = ["r", "k_star1", "k_star2", "region", "exact",
              "harmonic", "transl_k1", "transl_k2"]
    _emit(args.out, header, rows, args.format)
    if _plot_enabled(args):
        plots.render_gclosure(rows, _plot_path(args.out, "gclosure.png"))
    return EXIT_OK


def cmd_structure(args) -> int:
    spec = _spec_from(args)
    region = Region(args.region) if args.region else classify_region(spec, args.r)
    result = build_optimal_structure(spec, args.r, region, seed=args.seed)
    report = check_optimality_conditions(result.fields, region)
    payload = json.loads(structure_to_json(result))
    payload["text"] = node_to_text(result.node)
    payload["optimality_residuals"] = report.conditions
    payload["optimality_required"] = list(report.required)
    _write_json(args.out, payload)
    return EXIT_OK


def cmd_gap_sweep(args) -> int:
    spec = _spec_from(args)
    records = region_E_gap_curve(spec, n_points=args.steps)
    rows = [
        {"r": rec.r, "alpha_opt": rec.alpha_opt, "W_struct": rec.W_struct,
         "B": rec.B, "delta_rel": rec.delta_rel}
        for rec in records
    ]
    header = ["r", "alpha_opt", "W_struct", "B", "delta_rel"]
    _emit(args.out, header, rows, args.format)
    if _plot_enabled(args):
        plots.render_gap_sweep(rows, _plot_path(args.out, "gap_sweep.png"))
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = run_invariant_suite(fast=not args.full)
    width = max(len(c.name) for c in checks)
    failed = False
    for c in checks:
        status = "pass" if c.passed else "FAIL"
        print(f"{c.name:<{width}}  {status}  max_residual={c.max_residual:.3e}  tol={c.tolerance:.1e}")
        failed = failed or not c.passed
    return EXIT_VERIFY_FAILED if failed else EXIT_OK


def _map_tasks(fn, tasks, jobs):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [fn(t) for t in tasks]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triphase",
        description="Bounds and optimal laminates for plane three-phase "
                    "conducting composites with a superconducting phase.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="bound, region and G-closure pair at one point")
    _add_spec_flags(p)
    p.add_argument("--r", type=float, default=0.7)
    p.add_argument("--oracle", action="store_true",
                   help="add the brute-force oracle comparison")
    _add_common_flags(p)
    p.set_defaults(func=cmd_bound, _subparser=p)

    p = sub.add_parser("region-map", help="region map over an (m1, r) grid")
    _add_spec_flags(p, with_m1=False)
    p.add_argument("--m1-min", type=float, default=0.01)
    p.add_argument("--m1-max", type=float, default=0.45)
    p.add_argument("--r-min", type=float, default=0.02)
    p.add_argument("--r-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=40)
    _add_common_flags(p)
    p.set_defaults(func=cmd_region_map, _subparser=p)

    p = sub.add_parser("gclosure", help="G-closure boundary sweep in r")
    _add_spec_flags(p)
    p.add_argument("--r-min", type=float, default=0.02)
    p.add_argument("--r-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=100)
    _add_common_flags(p)
    p.set_defaults(func=cmd_gclosure, _subparser=p)

    p = sub.add_parser("structure", help="optimal structure report at one point")
    _add_spec_flags(p)
    p.add_argument("--r", type=float, default=0.7)
    p.add_argument("--region", choices=[reg.value for reg in Region], default=None,
                   help="override the classified region")
    _add_common_flags(p)
    p.set_defaults(func=cmd_structure, _subparser=p)

    p = sub.add_parser("gap-sweep", help="region-E bound/structure gap curve")
    _add_spec_flags(p)
    p.add_argument("--steps", type=int, default=200)
    _add_common_flags(p)
    p.set_defaults(func=cmd_gap_sweep, _subparser=p)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--full", action="store_true", help="full-size grids")
    p.set_defaults(func=cmd_verify, _subparser=p)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "config"):
            args = _apply_config(args, args._subparser, list(argv))
        return args.func(args)
    except InvalidSpec as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except AmbiguousRegion as exc:
        print(f"ambiguous region: {exc}", file=sys.stderr)
        return EXIT_AMBIGUOUS
    except OutOfApplicability as exc:
        print(f"out of applicability: {exc}", file=sys.stderr)
        return EXIT_OUT_OF_APPLICABILITY
    except (EmptyRegion, DomainError) as exc:
        print(f"empty region: {exc}", file=sys.stderr)
        return EXIT_EMPTY_REGION


if __name__ == "__main__":
    sys.exit(main())
