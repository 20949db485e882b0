"""Command line entry point: ``condwalk <subcommand> ...``.

Exit codes: 0 success, 1 a verification check did not pass, 2 usage or
configuration error.  Relative output paths are placed under
``$CONDWALK_OUT_DIR`` when it is set; ``$CONDWALK_WORKERS`` sets the default
worker count of ``verify``.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import formats
from .conditioned import bridge_table, make_rng, rescale_path, sample_bridges
from .errors import CondwalkError, ConfigError
from .excursion import density_table
from .ladder import build_renewal_table, first_ladder_laws, killed_final, ladder_height_laws
from .polymer import (PolymerParams, contact_counts, expected_contacts, log_z_derivative,
                      partition_function, polymer_dp, sample_polymers)
from .steplaw import StepLaw, load_law, norming, walk_pmf
from .verify import CHECKS, SuiteConfig, aggregate_pass, run_suite, suite_document

log = logging.getLogger("condwalk")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _out_path(name: str | None) -> Path | None:
    if name is None or name == "-":
        return None
    p = Path(name)
    base = os.environ.get("CONDWALK_OUT_DIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _emit(text: str, dest: str | None) -> None:
    p = _out_path(dest)
    if p is None:
        sys.stdout.write(text)
    else:
        p.write_text(text)


def _law_meta(law: StepLaw) -> dict[str, Any]:
    return {"name": law.name, "support": [[k, str(p)] for k, p in law.support]}


def _meta(args, law: StepLaw | None, **params) -> dict[str, Any]:
    m = {"command": args.command, "seed": args.seed, "parameters": params}
    if law is not None:
        m["law"] = _law_meta(law)
    return m


def _env_workers() -> int:
    raw = os.environ.get("CONDWALK_WORKERS", "1")
    try:
        w = int(raw)
    except ValueError:
        raise ConfigError(f"CONDWALK_WORKERS must be an integer, got {raw!r}") from None
    if w < 1:
        raise ConfigError(f"CONDWALK_WORKERS must be >= 1, got {w}")
    return w


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma separated numbers, got {text!r}") from None


# subcommands ---------------------------------------------------------------

def cmd_pmf(args) -> int:
    law = load_law(args.law)
    if args.killed is None:
        pmf = walk_pmf(law, args.n)
        rows = [(args.n, int(z), p) for z, p in zip(pmf.positions, pmf.probs)]
    else:
        row = killed_final(law, args.killed, args.n)
        rows = [(args.n, z, float(p)) for z, p in enumerate(row)]
    meta = _meta(args, law, n=args.n, killed_start=args.killed)
    _emit(formats.csv_text(meta, ("n", "position", "probability"), rows), args.out)
    return EXIT_OK


def cmd_ladder(args) -> int:
    law = load_law(args.law)
    hl = ladder_height_laws(law)
    fl = first_ladder_laws(law, args.n_max)
    doc = {
        "schema": formats.SCHEMA, **_meta(args, law, n_max=args.n_max),
        "h_minus": {str(h): float(p) for h, p in enumerate(hl.h_minus) if h >= 1},
        "h_plus": {str(h): float(p) for h, p in enumerate(hl.h_plus)},
        "factorization_residual": hl.residual,
        "t_minus_tail": {str(n): float(fl.minus_tail[n]) for n in _log_grid(args.n_max)},
        "t_plus_tail": {str(n): float(fl.plus_tail[n]) for n in _log_grid(args.n_max)},
    }
    _emit(formats.dumps_json(doc), args.out)
    return EXIT_OK


def _log_grid(n_max: int) -> list[int]:
    grid = {0, n_max}
    k = 1
    while k < n_max:
        grid.add(k)
        k *= 2
    return sorted(grid)


def cmd_renewal(args) -> int:
    law = load_law(args.law)
    table = build_renewal_table(law, args.x_max, args.n_max)
    text = table.to_json(seed=args.seed, command=args.command,
                         parameters={"x_max": args.x_max, "n_max": args.n_max}) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_bridge(args) -> int:
    law = load_law(args.law)
    times = _floats(args.times)
    if args.input:
        meta_in, paths = formats.read_paths(args.input)
        n = len(paths[0]) - 1 if paths else 0
        if any(len(p) != n + 1 for p in paths):
            raise ConfigError(f"{args.input}: paths have unequal lengths")
        source = {"input": str(args.input), "input_seed": meta_in.get("seed")}
    else:
        table = bridge_table(law, args.x, args.y, args.n)
        rng = make_rng(args.seed, "bridge")
        paths = sample_bridges(table, args.samples, rng)
        n = args.n
        source = {"normalizer": table.normalizer}
        meta = _meta(args, law, x=args.x, y=args.y, n=n, samples=args.samples)
        if args.paths_out:
            dest = _out_path(args.paths_out)
            if args.format == "binary":
                formats.write_frame(dest, paths, meta)
            else:
                dest.write_text(formats.paths_csv(paths, meta))
    a_n = norming(law, n)
    scaled = np.array([rescale_path(p, n, a_n, times) for p in paths]) if len(paths) else np.zeros((0, len(times)))
    doc = {
        "schema": formats.SCHEMA, **_meta(args, law, x=args.x, y=args.y, n=n, samples=len(paths), times=times),
        **source,
        "a_n": a_n,
        "rescaled_mean": dict(zip(map(str, times), scaled.mean(axis=0).tolist())) if len(paths) else {},
        "rescaled_sd": dict(zip(map(str, times), scaled.std(axis=0).tolist())) if len(paths) else {},
    }
    _emit(formats.dumps_json(doc), args.out)
    return EXIT_OK


def cmd_excursion(args) -> int:
    times = _floats(args.times)
    if args.xs:
        xs = _floats(args.xs)
    else:
        xs = list(np.linspace(0.0, args.x_max, args.points))
    rows = density_table(times, xs)
    meta = {"command": args.command, "seed": args.seed, "parameters": {"times": times, "points": len(xs)}}
    _emit(formats.csv_text(meta, ("t", "x", "density", "cdf"), rows), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    laws = tuple(args.law.split(","))
    checks = tuple(c.strip() for c in args.checks.split(",")) if args.checks else tuple(CHECKS)
    cfg = SuiteConfig(laws=laws, checks=checks, n_max=args.n_max, samples=args.samples, seed=args.seed,
                      fdd_n=args.fdd_n, fdd_laws=laws if args.fdd_all else tuple(l for l in laws if l == "lazy_srw"),
                      workers=args.workers if args.workers is not None else _env_workers())
    for law in laws:
        load_law(law)  # fail fast with a config error
    reports = run_suite(cfg)
    doc = suite_document(reports, cfg)
    doc["config"].pop("workers", None)  # output must not depend on the pool size
    _emit(formats.dumps_json(doc), args.out)
    if args.csv:
        rows = [(r.check_id, r.law, row.get("n"), row.get("value"), r.reference, row.get("tolerance", r.tolerance),
                 r.status) for r in reports for row in r.computed]
        meta = {"command": args.command, "seed": args.seed, "parameters": doc["config"]}
        _emit(formats.csv_text(meta, ("check_id", "law", "n", "value", "reference", "tolerance", "status"), rows),
              args.csv)
    for r in reports:
        log.info("%-55s %s", r.check_id, r.status)
    return EXIT_OK if aggregate_pass(reports) else EXIT_FAIL


def cmd_polymer(args) -> int:
    law = load_law(args.law)
    if args.window is None:
        p = PolymerParams.with_default_window(law, args.N, args.a, args.eps)
    else:
        p = PolymerParams(args.N, args.a, args.eps, args.window)
    Z = partition_function(law, p)
    doc: dict[str, Any] = {
        "schema": formats.SCHEMA, **_meta(args, law, N=p.N, a=p.a, eps=p.eps, window=p.window, samples=args.samples),
        "Z": Z,
        "log_Z": math.log(Z) if Z > 0 else None,
        "bias_bound": polymer_dp(law, p).bias_bound,
        "expected_contacts": expected_contacts(law, p),
        "dlogZ_deps": log_z_derivative(law, p),
    }
    if args.samples > 0:
        paths = sample_polymers(law, p, args.samples, make_rng(args.seed, "polymer"))
        c = contact_counts(paths, p.a)
        doc["sampled_contacts_mean"] = float(c.mean())
        doc["sampled_contacts_se"] = float(c.std(ddof=1) / math.sqrt(len(c))) if len(c) > 1 else None
        if args.paths_out:
            meta = _meta(args, law, N=p.N, a=p.a, eps=p.eps, window=p.window, samples=args.samples)
            _out_path(args.paths_out).write_text(formats.paths_csv(paths, meta))
    _emit(formats.dumps_json(doc), args.out)
    return EXIT_OK


# parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="condwalk", description="Numerical lab for walks conditioned to stay non-negative.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, law_default="lazy_srw"):
        sp.add_argument("--law", default=law_default, help="builtin law name or law file")
        sp.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        sp.add_argument("--out", default=None, help="output file (default stdout)")

    sp = sub.add_parser("pmf", help="distribution of S_n, or of the killed walk")
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--killed", type=int, default=None, metavar="X", help="killed walk started at X")
    sp.set_defaults(func=cmd_pmf)

    sp = sub.add_parser("ladder", help="ladder height laws and epoch tails")
    common(sp)
    sp.add_argument("--n-max", type=int, default=1024)
    sp.set_defaults(func=cmd_ladder)

    sp = sub.add_parser("renewal", help="renewal table (V, U, ladder laws) as JSON")
    common(sp)
    sp.add_argument("--x-max", type=int, default=256)
    sp.add_argument("--n-max", type=int, default=4096)
    sp.set_defaults(func=cmd_renewal)

    sp = sub.add_parser("bridge", help="sample conditioned bridges or summarize a path file")
    common(sp)
    sp.add_argument("--x", type=int, default=1)
    sp.add_argument("--y", type=int, default=1)
    sp.add_argument("--n", type=int, default=64)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--times", default="0.25,0.5,0.75")
    sp.add_argument("--paths-out", default=None, help="write sampled paths here")
    sp.add_argument("--format", choices=("csv", "binary"), default="csv")
    sp.add_argument("--input", default=None, help="summarize paths from a CSV or binary frame instead")
    sp.set_defaults(func=cmd_bridge)

    sp = sub.add_parser("excursion", help="excursion marginal density/CDF table (CSV)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.add_argument("--times", default="0.25,0.5,0.75")
    sp.add_argument("--xs", default=None, help="comma separated grid (default: linspace)")
    sp.add_argument("--x-max", type=float, default=3.0)
    sp.add_argument("--points", type=int, default=61)
    sp.set_defaults(func=cmd_excursion)

    sp = sub.add_parser("verify", help="run verification checks")
    common(sp, law_default="lazy_srw,three_point")
    sp.add_argument("--checks", default=None, help=f"comma separated subset of: {', '.join(CHECKS)}")
    sp.add_argument("--n-max", type=int, default=4096)
    sp.add_argument("--samples", type=int, default=200_000)
    sp.add_argument("--fdd-n", type=int, default=1024)
    sp.add_argument("--fdd-all", action="store_true", help="run the fdd check for every law")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--csv", default=None, help="also write flat CSV rows here")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("polymer", help="stripe pinning polymer")
    common(sp)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--a", type=int, default=0)
    sp.add_argument("--eps", type=float, default=0.0)
    sp.add_argument("--window", type=int, default=None)
    sp.add_argument("--samples", type=int, default=0)
    sp.add_argument("--paths-out", default=None)
    sp.set_defaults(func=cmd_polymer)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("condwalk: a subcommand is required")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (CondwalkError, ValueError, OSError) as exc:
        print(f"condwalk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
