"""``mlsq`` command line: one subcommand per verification entry point."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

import numpy as np

from .exponents import Exponent, dual, format_rational, vertices_U, vertices_V, vertices_W
from .kernels import b_constant, kernel_from_params
from .sqfn import cube_majorant, square_function
from .harness.config import ALL_CHECKS, ConfigError, load_config
from .harness.instances import generate_instance
from .harness.report import SCHEMA, dump_json, records_csv, write_artifacts
from .harness.search import OBJECTIVES, ratio_search
from .harness.suite import check_young, run_suite

log = logging.getLogger("mlsq")

SQFN_CHECKS = ("claim21", "duality", "case1", "case2prefix")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None, help="u64 master seed (overrides config)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, help="write artifacts into this directory instead of stdout")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _with_config(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="experiment config file (defaults built in)")
    p.add_argument(
        "--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
        help="override one config setting; repeatable",
    )


def _load(args):
    cfg = load_config(args.config)
    changes = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        changes[key.strip()] = value.strip()
    if args.seed is not None:
        changes["run.seed"] = args.seed
    return cfg.with_settings(changes) if changes else cfg


def _parse_params(text: Optional[str]) -> dict:
    out = {}
    for item in (text or "").split(","):
        if not item.strip():
            continue
        k, sep, v = item.partition("=")
        if not sep:
            raise ConfigError(f"--param expects k=v pairs, got {item!r}")
        out[k.strip()] = v.strip()
    return out


def _emit(args, stem: str, payload: dict, rows: Optional[str]) -> None:
    """Print (or write under ``--out``) the JSON payload or the CSV rows."""
    json_text = dump_json(payload)
    if args.out:
        for path in write_artifacts(args.out, stem, json_text, rows):
            log.info("wrote %s", path)
        return
    if args.format == "csv":
        if rows is None:
            raise ConfigError(f"{stem} has no CSV form; use --format json")
        sys.stdout.write(rows)
    else:
        sys.stdout.write(json_text)


def _csv_table(header: Sequence[str], rows) -> str:
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def cmd_vertices(args) -> int:
    r = Exponent.of(args.r)
    if r.infinite:
        kind, pts = "W", vertices_W(args.m)
    else:
        kind, pts = "V", vertices_V(args.m, r)
    fmt = lambda p: [format_rational(x) for x in p]
    payload = {
        "schema": SCHEMA,
        "m": args.m,
        "r": str(r),
        "r_dual": str(dual(r)),
        "kind": kind,
        "vertices": [fmt(p) for p in pts],
        "U": [fmt(u) for u in vertices_U(args.m)],
    }
    header = ["set", "index"] + [f"c{j + 1}" for j in range(args.m)]
    rows = [[kind, i + 1, *fmt(p)] for i, p in enumerate(pts)]
    rows += [["U", j + 1, *fmt(u)] for j, u in enumerate(vertices_U(args.m))]
    _emit(args, "vertices", payload, _csv_table(header, rows))
    return 0


def cmd_bconst(args) -> int:
    spec = kernel_from_params(args.kernel, _parse_params(args.param))
    bc = b_constant(spec, Exponent.of(args.p), args.trunc, args.d)
    payload = dict(bc.as_dict(), kernel=spec.name, params=spec.params(), schema=SCHEMA)
    row = payload
    header = ["p", "exponent_used", "U", "value", "last_shell"]
    rows = _csv_table(header, [[row.get(k) for k in header]])
    _emit(args, "bconst", payload, rows)
    return 0 if not bc.divergent else 2


def cmd_young(args) -> int:
    settings = {
        "theta.young": args.theta,
        "exponents.young": args.p,
        "exponents.r": args.r,
        "run.instances": args.instances,
        "run.family": args.family,
    }
    cfg = _load(args).with_settings(settings)
    if args.m is not None and args.m != cfg.young_theta.m:
        raise ConfigError(f"--m {args.m} does not match {cfg.young_theta.m} θ values")
    rep = check_young(cfg)
    payload = {"schema": SCHEMA, "config_digest": cfg.digest, "seed": cfg.seed, **rep.as_dict()}
    _emit(args, "young", payload, records_csv(rep.records))
    return 0 if rep.passed else 1


def _report_exit(args, stem: str, report) -> int:
    _emit(args, stem, report.as_dict(), report.to_csv())
    for c in report.checks:
        agg = c.aggregate()
        log.info("%s: %d/%d passed", c.check, agg["pass_count"], agg["asserted"])
    return 0 if report.passed else 1


def cmd_sqfn_verify(args) -> int:
    cfg = _load(args)
    return _report_exit(args, "sqfn-verify", run_suite(cfg, SQFN_CHECKS))


def cmd_sqfn_eval(args) -> int:
    cfg = _load(args)
    R = args.R if args.R is not None else min(cfg.lattice_radius, (cfg.grid.n - 1) // 2)
    inst = generate_instance(cfg, args.instance)
    res = square_function(inst.fs, inst.K, cfg.theta, R)
    mj = cube_majorant(inst.fs, inst.K, cfg.theta)
    coords = [c.ravel() for c in cfg.grid.coords()]
    cols = [res.truncated.values.real.ravel(), res.exact.values.real.ravel(), mj.values.real.ravel()]
    header = [f"x{j + 1}" for j in range(cfg.grid.d)] + ["truncated", "exact", "majorant"]
    table = np.column_stack(coords + cols)
    rows = _csv_table(header, [[float(v) for v in row] for row in table])
    payload = {
        "schema": SCHEMA,
        "config_digest": cfg.digest,
        "instance": args.instance,
        "instance_seed": inst.seed,
        "R": R,
        "captured_mass": res.captured,
        "columns": header,
        "values": table.tolist(),
    }
    _emit(args, "sqfn-eval", payload, rows)
    return 0


def cmd_ratio_search(args) -> int:
    cfg = _load(args)
    trace = ratio_search(cfg, args.objective, args.budget)
    payload = {"schema": SCHEMA, "config_digest": cfg.digest, "seed": cfg.seed, **trace.as_dict()}
    rows = _csv_table(["evaluation", "ratio", "best_so_far"],
                      [[k + 1, v, b] for k, (v, b) in enumerate(zip(trace.history, trace.curve))])
    _emit(args, "ratio-search", payload, rows)
    return 0


def cmd_suite(args) -> int:
    cfg = _load(args)
    checks = None if args.checks is None else [c.strip() for c in args.checks.split(",") if c.strip()]
    return _report_exit(args, "suite", run_suite(cfg, checks))


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="mlsq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vertices", parents=[common], help="exact vertex sets V/W and U")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", required=True, help="rational or inf")
    p.set_defaults(func=cmd_vertices)

    p = sub.add_parser("bconst", parents=[common], help="kernel block-norm constant B_p")
    p.add_argument("--kernel", required=True, help="cube | gaussian | bump | power_tail")
    p.add_argument("--param", default="", help="k=v,... kernel parameters")
    p.add_argument("--p", required=True)
    p.add_argument("--trunc", type=int, default=10, help="cube truncation U")
    p.add_argument("--d", type=int, default=1)
    p.set_defaults(func=cmd_bconst)

    p = sub.add_parser("young", parents=[common], help="multilinear Young check per instance")
    _with_config(p)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--theta", default=None, help="comma-separated integers")
    p.add_argument("--p", default=None, help="comma-separated exponents")
    p.add_argument("--r", default=None)
    p.add_argument("--instances", type=int, default=None)
    p.add_argument("--family", choices=("localized", "trig"), default=None)
    p.set_defaults(func=cmd_young)

    p = sub.add_parser("sqfn-verify", parents=[common], help="claim, duality and chain checks")
    _with_config(p)
    p.set_defaults(func=cmd_sqfn_verify)

    p = sub.add_parser("sqfn-eval", parents=[common], help="truncated/exact/majorant values")
    _with_config(p)
    p.add_argument("--instance", type=int, default=0)
    p.add_argument("--R", type=int, default=None, help="modulation lattice radius")
    p.set_defaults(func=cmd_sqfn_eval)

    p = sub.add_parser("ratio-search", parents=[common], help="adversarial ratio search")
    _with_config(p)
    p.add_argument("--objective", choices=OBJECTIVES, required=True)
    p.add_argument("--budget", type=int, default=100)
    p.set_defaults(func=cmd_ratio_search)

    p = sub.add_parser("suite", parents=[common], help="run named checks and aggregate")
    _with_config(p)
    p.add_argument("--checks", default=None, help=f"comma list from {', '.join(ALL_CHECKS)}")
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"mlsq: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
