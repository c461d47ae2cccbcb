"""Command line pipeline: coeffs -> enumerate -> symbols -> stats / constants -> verify.

Exit codes: 0 success, 1 a verification criterion failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import constants as K
from .coeffs import ConfigError, FormSpec, IncompleteTableError, TableParseError, save_table
from .farey import InvalidDivisorError, enumerate_Q, read_csv as read_fractions
from .hyperbolic import UnsupportedLevelError
from .modsym import InsufficientCoverageError, get_evaluator
from .quadfield import QuadInt, UnsupportedFieldError, canonical, field as get_field
from .stats import (DegenerateNormalizationError, EmptySampleError, InsufficientGridError,
                    SymbolSample, histogram_rows, mgf_scan, summarize)
from .verify import DEFAULT_FORM, RunConfig, default_cache_dir, run_verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# errors that mean "fix your input", reported without a traceback
USER_ERRORS = (ConfigError, UnsupportedFieldError, UnsupportedLevelError, InvalidDivisorError,
               IncompleteTableError, TableParseError, InsufficientCoverageError, EmptySampleError,
               InsufficientGridError, DegenerateNormalizationError, FileNotFoundError,
               json.JSONDecodeError)


class UsageError(Exception):
    pass


def version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def provenance(command: str, params: dict) -> dict:
    blob = json.dumps({"command": command, **params}, sort_keys=True, default=str)
    return {"command": command, "config": params,
            "config_hash": hashlib.sha256(blob.encode()).hexdigest()[:16],
            "version": version(), "numpy": np.__version__}


def _load_form(path: str | None) -> FormSpec:
    if path is None:
        return FormSpec.from_dict(DEFAULT_FORM)
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON ({exc})") from exc
    for key in ("field", "level"):
        if key not in data:
            raise ConfigError(f"{path}: form is missing the '{key}' key")
    return FormSpec.from_dict(data)


def _cache(args) -> Path:
    return Path(args.cache) if args.cache else default_cache_dir()


def _write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=float) + "\n")


# -- commands ---------------------------------------------------------------------------

def cmd_coeffs(args) -> int:
    form = _load_form(args.form)
    if args.norm_bound:
        form = form.with_norm_bound(args.norm_bound)
    table = form.load(_cache(args))
    if args.out:
        save_table(table, args.out)
    print(f"coefficient table: field d={form.fld.d}, level {form.level}, "
          f"{len(table)} ideals up to norm {table.norm_bound}"
          + (f" -> {args.out}" if args.out else f" (cached in {_cache(args)})"))
    return EXIT_OK


def cmd_enumerate(args) -> int:
    fld = get_field(args.field)
    n = canonical(QuadInt.parse(args.level, fld))
    d = canonical(QuadInt.parse(args.divisor, fld))
    S = enumerate_Q(n, d, args.xmax)
    paths = S.write_csv(args.out)
    print(f"{len(S)} fractions with |c| < {args.xmax:g} in class ({d}) -> "
          + ", ".join(str(p) for p in paths))
    return EXIT_OK


def cmd_symbols(args) -> int:
    form = _load_form(args.form)
    S = read_fractions(args.fractions, form.fld)
    if canonical(S.n) != form.level:
        raise ConfigError(f"fractions were enumerated for level {S.n}, the form has level {form.level}")
    ev = get_evaluator(form, args.tol, _cache(args))
    params = {"form": form.to_dict(), "fractions": str(args.fractions), "tol": args.tol,
              "split": args.split}
    prov = provenance("symbols", params)
    start = time.perf_counter()
    batch = ev.eval_set(S, split=args.split, threads=args.threads)
    batch.write_csv(args.out, prov["config_hash"])
    print(f"{len(S)} symbols in {time.perf_counter() - start:.1f} s -> {args.out}")
    return EXIT_OK


def _parse_grid(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--xgrid expects comma-separated numbers, got {text!r}") from None


def cmd_stats(args) -> int:
    grid = _parse_grid(args.xgrid)
    if args.c_value == "auto":
        C = None
    else:
        try:
            C = float(args.c_value)
        except ValueError:
            raise UsageError(f"--c-value must be 'auto' or a number, got {args.c_value!r}") from None
    sample = SymbolSample.from_csv(args.symbols, args.divisor)
    summary = summarize(sample, grid, C)
    X = max(grid)
    top = sample.restrict(X)
    mgf = mgf_scan(top, X, summary.normalization_C)
    params = {"symbols": str(args.symbols), "xgrid": grid, "c_value": args.c_value,
              "divisor": args.divisor, "center": args.center}
    report = {"provenance": provenance("stats", params), "summary": summary.to_dict(),
              "mgf": mgf.to_dict()}
    if args.center:
        report["ks_centered_at_X"] = summary.rows[-1].ks_centered
    if args.report:
        _write_json(args.report, report)
    if args.curves:
        summary.write_csv(args.curves)
    if args.hist:
        with open(args.hist, "w") as fh:
            fh.write("left,right,density,normal\n")
            for row in histogram_rows(top, summary.normalization_C, X):
                fh.write(",".join(f"{v:.10g}" for v in row) + "\n")
    print(f"{'X':>6} {'size':>8} {'mean':>10} {'variance':>10} {'ks':>7}")
    for r in summary.rows:
        print(f"{r.X:6g} {r.size:8d} {r.mean:10.5f} {r.variance:10.5f} "
              f"{(r.ks_centered if args.center else r.ks):7.4f}")
    print(f"C_fit={summary.C_fit:.6g} D={summary.D_fit:.4g} R^2={summary.r_squared:.4f} "
          f"window slopes={summary.window_slopes[0]:.5g},{summary.window_slopes[1]:.5g}")
    return EXIT_OK


def cmd_constants(args) -> int:
    form = _load_form(args.form)
    report = K.c_f(form, cache_dir=_cache(args))
    payload = {"provenance": provenance("constants", {"form": form.to_dict()}), **report.to_dict()}
    if args.report:
        _write_json(args.report, payload)
    print(f"||F||^2 = {report.petersson_norm:.8g} (+- {report.petersson_error:.1g}), "
          f"index {report.index}, covolume variant '{report.covolume_variant}'")
    print(f"C_F = {report.C_F:.6g}")
    return EXIT_OK


def _parse_criteria(text: str | None) -> list[int] | None:
    if not text:
        return None
    out = set()
    try:
        for part in text.split(","):
            lo, _, hi = part.partition("-")
            out.update(range(int(lo), int(hi or lo) + 1))
    except ValueError:
        raise UsageError(f"--criteria expects numbers or ranges like 1,3-5, got {text!r}") from None
    if not out or min(out) < 1 or max(out) > 14:
        raise UsageError("criteria are numbered 1 to 14")
    return sorted(out)


def cmd_verify(args) -> int:
    config = RunConfig.from_json(args.config) if args.config else RunConfig()
    if args.cache and config.cache_dir is None:
        config.cache_dir = args.cache
    only = _parse_criteria(args.criteria)
    results = run_verify(config, only, echo=lambda line: print(line, flush=True))
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    if args.report:
        _write_json(args.report, {
            "provenance": provenance("verify", config.to_dict()) | {"config_hash": config.hash()},
            "results": [{"number": r.number, "name": r.name, "passed": r.passed, "detail": r.detail,
                         "measured": r.measured, "seconds": r.seconds} for r in results]})
    return EXIT_OK if passed == len(results) else EXIT_FAIL


# -- argument parsing -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bianchi-modsym", description=__doc__.splitlines()[0])
    p.add_argument("--cache", help="cache directory (default: $BIANCHI_CACHE or ~/.cache/bianchi_modsym)")
    p.add_argument("--version", action="version", version=version())
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("coeffs", help="build or load the Hecke eigenvalue table")
    c.add_argument("--form", help="form JSON (default: base change of 11a to Q(i), level 11)")
    c.add_argument("--norm-bound", type=int)
    c.add_argument("--out", help="also write the table as CSV")
    c.set_defaults(func=cmd_coeffs)

    e = sub.add_parser("enumerate", help="list the fractions a/c of one divisor class")
    e.add_argument("--field", type=int, default=-1)
    e.add_argument("--level", default="11")
    e.add_argument("--divisor", default="1")
    e.add_argument("--xmax", type=float, required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("symbols", help="evaluate symbols for a fraction CSV")
    s.add_argument("--form")
    s.add_argument("--fractions", required=True)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--split", type=float, default=1.0)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_symbols)

    t = sub.add_parser("stats", help="variance law, KS, MGF and bound over an X grid")
    t.add_argument("--symbols", required=True)
    t.add_argument("--xgrid", default="10,14,20,28,40")
    t.add_argument("--c-value", default="auto")
    t.add_argument("--divisor", help="keep only this class from the CSV")
    t.add_argument("--center", action="store_true", help="print KS after removing the sample mean")
    t.add_argument("--report")
    t.add_argument("--curves", help="CSV of X, size, mean, variance, ks")
    t.add_argument("--hist", help="CSV of histogram bins at the largest X")
    t.set_defaults(func=cmd_stats)

    k = sub.add_parser("constants", help="Petersson norm, covolume and the variance constant")
    k.add_argument("--form")
    k.add_argument("--report")
    k.set_defaults(func=cmd_constants)

    v = sub.add_parser("verify", help="run the acceptance criteria")
    v.add_argument("--config", help="RunConfig JSON")
    v.add_argument("--criteria", help="subset such as 1,3-5")
    v.add_argument("--report")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
    except USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
