"""Command-line interface.

Exit codes: 0 success (and PotentialCause for ``infer``), 1 Inconclusive
(``infer``) or an unmatched grid (``reproduce-table1``), 2 bad input
(spec, dataset, columns, config), 3 output could not be written.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .estimators import EstimationError
from .experiments import (BenchmarkConfig, BenchmarkConfigError, format_benchmark,
                          format_table1, reproduce_table1, run_benchmark)
from .fileio import DatasetFormatError, Report, format_csv, read_csv
from .indep_tests import IndependenceTestError, IndepTestConfig, derive_seed, run_test
from .inference import CriterionConfig, InferenceError, infer_potential_cause
from .scm import ParseError, load_model_spec, preset, preset_info
from .scm.model import ModelError, SamplingError, sample

EXIT_OK, EXIT_INCONCLUSIVE, EXIT_INPUT, EXIT_WRITE = 0, 1, 2, 3
THREADS_ENV = "CANCAUSAL_THREADS"

log = logging.getLogger("cancausal")


class CliError(Exception):
    def __init__(self, msg, code=EXIT_INPUT):
        super().__init__(msg)
        self.code = code


def _threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    elif os.environ.get(THREADS_ENV):
        try:
            n = int(os.environ[THREADS_ENV])
        except ValueError:
            raise CliError(f"{THREADS_ENV} must be an integer") from None
    else:
        n = os.cpu_count() or 1
    if n < 1:
        raise CliError("thread count must be >= 1")
    return n


def _columns(text):
    if text is None:
        return []
    return [c.strip() for c in text.split(",") if c.strip()]


def _write_text(path, text):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_WRITE) from None


def _emit(report: Report, out):
    if out:
        _write_text(out, report.to_json())


def _timing(t0):
    return {"seconds": round(time.perf_counter() - t0, 3),
            "finished": datetime.now(timezone.utc).isoformat(timespec="seconds")}


def _load_data(path):
    try:
        return read_csv(path)
    except FileNotFoundError:
        raise CliError(f"dataset not found: {path}") from None
    except (DatasetFormatError, OSError) as exc:
        raise CliError(f"{path}: {exc}") from None


def _need_columns(ds, cols):
    missing = [c for c in cols if c not in ds]
    if missing:
        raise CliError(f"unknown column(s) {missing}; dataset has {list(ds.columns)}")


def _parse_params(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise CliError(f"--param expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError:
            raise CliError(f"--param {k}: {v!r} is not a number") from None
    return out


# ---------------------------------------------------------------------------
# commands

def cmd_generate(args) -> int:
    if bool(args.preset) == bool(args.spec):
        raise CliError("give exactly one of --preset or --spec")
    if args.preset:
        try:
            model = preset(args.preset, **_parse_params(args.param))
        except (KeyError, ValueError) as exc:
            raise CliError(str(exc)) from None
        source = {"preset": args.preset}
    else:
        if args.param:
            raise CliError("--param only applies to presets")
        try:
            model = load_model_spec(args.spec)
        except ParseError as exc:
            raise CliError(f"{args.spec}: {exc}") from None
        except FileNotFoundError:
            raise CliError(f"spec file not found: {args.spec}") from None
        source = {"spec": str(args.spec)}
    seed = model.default_seed if args.seed is None else args.seed
    try:
        ds = sample(model, args.n, seed, _threads(args))
    except (SamplingError, ValueError) as exc:
        raise CliError(str(exc)) from None
    ds.meta.update(source)
    ds.meta["n"] = args.n
    text = format_csv(ds, include_hidden=args.include_hidden)
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_test(args) -> int:
    t0 = time.perf_counter()
    ds = _load_data(args.data)
    s = _columns(args.given)
    _need_columns(ds, [args.y, args.x, *s])
    seed = args.seed if args.raw_seed else derive_seed(args.seed, args.method, args.y, args.x,
                                                        *sorted(s))
    try:
        cfg = IndepTestConfig(level=args.level, n_perm=args.n_perm, seed=seed,
                              threads=_threads(args))
        v = run_test(args.method, ds, args.y, args.x, s, cfg)
    except (IndependenceTestError, EstimationError, ValueError) as exc:
        raise CliError(str(exc)) from None
    verdict = "independent" if v.independent else "dependent"
    cond = f" | {','.join(s)}" if s else ""
    print(f"{args.method}: {args.y} vs {args.x}{cond}: p = {v.p_value:.4g} -> {verdict} "
          f"at level {args.level}")
    report = Report(args.echo,
                    {"method": args.method, "level": args.level, "n_perm": args.n_perm,
                     "seed": args.seed, "data": str(args.data)},
                    [{"type": "Verdict", **v.to_dict()}], [seed], _timing(t0))
    _emit(report, args.out)
    return EXIT_OK


def cmd_infer(args) -> int:
    t0 = time.perf_counter()
    ds = _load_data(args.data)
    pool = _columns(args.pool)
    _need_columns(ds, [args.x, args.y, *pool])
    try:
        cfg = CriterionConfig(method=args.method, level=args.level, n_perm=args.n_perm,
                              seed=args.seed, max_witness_size=args.max_witness_size,
                              max_pool_size=max(args.max_pool_size, args.max_witness_size),
                              threads=_threads(args))
        decision = infer_potential_cause(ds, args.x, args.y, pool, cfg)
    except InferenceError as exc:
        partial = [e.to_dict() for e in exc.evidence]
        report = Report(args.echo, {"data": str(args.data)},
                        [{"type": "Error", "message": str(exc), "partial_evidence": partial}],
                        [args.seed], _timing(t0))
        _emit(report, args.out)
        raise CliError(str(exc)) from None
    except (ValueError, KeyError) as exc:
        raise CliError(str(exc)) from None
    print(decision.summary())
    for e in decision.evidence:
        s = ",".join(e.s) or "{}"
        tag = "indep" if e.verdict.independent else "dep"
        print(f"  {e.direction:7} {e.y} | {e.x}, S={s}: p = {e.verdict.p_value:.4g} ({tag})")
    report = Report(args.echo,
                    {**cfg.to_dict(), "data": str(args.data), "pool": pool},
                    [{"type": "Decision", **decision.to_dict()}],
                    [e.verdict.seed for e in decision.evidence], _timing(t0))
    _emit(report, args.out)
    return EXIT_OK if decision.is_potential_cause else EXIT_INCONCLUSIVE


def cmd_reproduce_table1(args) -> int:
    t0 = time.perf_counter()
    seeds = list(range(args.seed_offset, args.seed_offset + args.seeds))

    def progress(name, sd, row):
        log.info("%s seed %d: %s %s", name, sd, row.cells, "Yes" if row.decision else "No")

    try:
        result = reproduce_table1(args.n, seeds, args.level, args.method, args.n_perm,
                                  args.min_agreement, threads=_threads(args),
                                  progress=progress)
    except (IndependenceTestError, EstimationError, SamplingError, ModelError) as exc:
        raise CliError(f"preset failed: {exc}") from None
    print(format_table1(result))
    report = Report(args.echo,
                    {"n": args.n, "seeds": args.seeds, "seed_offset": args.seed_offset,
                     "level": args.level, "method": args.method, "n_perm": args.n_perm,
                     "min_agreement": args.min_agreement},
                    [{"type": "Table1", **result}], seeds, _timing(t0))
    _emit(report, args.out)
    return EXIT_OK if result["all_matched"] else EXIT_INCONCLUSIVE


def cmd_benchmark(args) -> int:
    t0 = time.perf_counter()
    try:
        raw = json.loads(Path(args.config).read_text())
    except FileNotFoundError:
        raise CliError(f"benchmark config not found: {args.config}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{args.config}: line {exc.lineno} column {exc.colno}: {exc.msg}") \
            from None
    try:
        cfg = BenchmarkConfig.from_dict(raw)
    except BenchmarkConfigError as exc:
        raise CliError(f"{args.config}: {exc}") from None

    def progress(name, method, sd, entry):
        log.info("%s %s seed %d: forward %s, reverse %s", name, method, sd,
                 entry["forward"], entry["reverse"])

    try:
        result = run_benchmark(cfg, _threads(args), progress)
    except (IndependenceTestError, EstimationError, SamplingError, ModelError) as exc:
        raise CliError(f"benchmark failed: {exc}") from None
    print(format_benchmark(result))
    seeds = [cfg.seed_offset + k for k in range(cfg.seeds)]
    report = Report(args.echo, cfg.to_dict(),
                    [{"type": "Benchmark", **result}], seeds, _timing(t0))
    _emit(report, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default: ${THREADS_ENV} or all CPUs)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = argparse.ArgumentParser(prog="cancausal", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="sample a dataset to CSV")
    g.add_argument("--preset")
    g.add_argument("--spec", help="model-spec file")
    g.add_argument("--param", action="append", metavar="NAME=VALUE",
                   help="override a preset parameter (repeatable)")
    g.add_argument("-n", type=int, required=True)
    g.add_argument("--seed", type=int, default=None,
                   help="sampling seed (default: the model's default seed)")
    g.add_argument("-o", "--out", help="output CSV (default: stdout)")
    g.add_argument("--include-hidden", action="store_true",
                   help="also write hidden columns (listed in the header comment)")
    g.set_defaults(func=cmd_generate)

    def tuning(sp):
        sp.add_argument("--method", choices=("cv", "nrr"), default="cv")
        sp.add_argument("--level", type=float, default=0.01)
        sp.add_argument("--n-perm", type=int, default=199)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("-o", "--out", help="JSON report path")

    t = sub.add_parser("test", parents=[common], help="run one cv or nrr independence test")
    t.add_argument("--data", required=True)
    t.add_argument("-y", required=True, help="target column")
    t.add_argument("-x", required=True, help="tested column")
    t.add_argument("--given", help="comma-separated conditioning columns")
    t.add_argument("--raw-seed", action="store_true",
                   help="use --seed as the permutation seed instead of deriving one")
    tuning(t)
    t.set_defaults(func=cmd_test)

    i = sub.add_parser("infer", parents=[common], help="potential-cause search for x -> y")
    i.add_argument("--data", required=True)
    i.add_argument("-x", required=True)
    i.add_argument("-y", required=True)
    i.add_argument("--pool", help="comma-separated candidate conditioning columns")
    i.add_argument("--max-witness-size", type=int, default=3)
    i.add_argument("--max-pool-size", type=int, default=8)
    tuning(i)
    i.set_defaults(func=cmd_infer)

    r = sub.add_parser("reproduce-table1", parents=[common],
                       help="pattern grid for fig1a-fig1d against the expected table")
    r.add_argument("-n", type=int, default=20000)
    r.add_argument("--seeds", type=int, default=10)
    r.add_argument("--seed-offset", type=int, default=0)
    r.add_argument("--level", type=float, default=0.01)
    r.add_argument("--method", choices=("cv", "nrr"), default="cv")
    r.add_argument("--n-perm", type=int, default=199)
    r.add_argument("--min-agreement", type=float, default=0.9,
                   help="fraction of seeds a cell needs to count as stable")
    r.add_argument("-o", "--out", help="JSON report path")
    r.set_defaults(func=cmd_reproduce_table1)

    b = sub.add_parser("benchmark", parents=[common], help="Monte-Carlo decision rates")
    b.add_argument("config", help="JSON benchmark config")
    b.add_argument("-o", "--out", help="JSON report path")
    b.set_defaults(func=cmd_benchmark)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.echo = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
