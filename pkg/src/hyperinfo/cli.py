"""Command-line entry point: ``hyperinfo <subcommand> [options]``.

Exit codes: 0 complete, 1 violation found, 2 usage or input error,
3 resource guard tripped, 4 unreadable or mismatched checkpoint.
"""
import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile

import numpy as np

from . import highnoise, oq1, search
from .compression import monotonize
from .hypercube import NoiseParams, format_spectrum_csv, read_truth_table, wht, write_truth_table
from .info import sum_coordinate_mi

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_GUARD, EXIT_CHECKPOINT = 0, 1, 2, 3, 4
DEFAULT_SEED = 20240601

log = logging.getLogger("hyperinfo")


class UsageError(ValueError):
    pass


def _g(x):
    return format(float(x) + 0.0, ".17g")


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_g(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_output(text, path):
    """Write ``text`` to ``path`` atomically, or to stdout when path is None or '-'."""
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".hyperinfo-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# Argument types

def alpha_value(text):
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= a <= 0.5:
        raise argparse.ArgumentTypeError(f"alpha must lie in [0, 0.5], got {a}")
    return a


def alpha_grid(text):
    """``a:b:step`` (inclusive of b) or a comma list; every value in (0, 0.5]."""
    try:
        if ":" in text:
            a, b, step = (float(t) for t in text.split(":"))
            if step <= 0 or b < a:
                raise ValueError
            count = int(math.floor((b - a) / step + 1e-9)) + 1
            values = [round(a + i * step, 12) for i in range(count)]
        else:
            values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alpha grid {text!r}; use a:b:step or a,b,c") from None
    if not values or any(not 0.0 < v <= 0.5 for v in values):
        raise argparse.ArgumentTypeError("alpha grid values must lie in (0, 0.5]")
    return tuple(values)


def lambda_grid(text):
    """``log:a:b:points`` or ``lin:a:b:points`` with 0 < a < b < 1."""
    parts = text.split(":")
    try:
        if len(parts) != 4 or parts[0] not in ("log", "lin"):
            raise ValueError
        lo, hi, points = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad lambda grid {text!r}; use log:a:b:points") from None
    if not 0.0 < lo < hi < 1.0 or points < 2:
        raise argparse.ArgumentTypeError("lambda grid needs 0 < a < b < 1 and at least 2 points")
    return np.geomspace(lo, hi, points) if parts[0] == "log" else np.linspace(lo, hi, points)


def rho_grid(text):
    try:
        a, b, step = (float(t) for t in text.split(":"))
        if step <= 0 or b < a:
            raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad rho grid {text!r}; use a:b:step") from None
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    values = [round(a + i * step, 12) for i in range(count)]
    if any(not 0.0 < v < 1.0 for v in values):
        raise argparse.ArgumentTypeError("rho grid values must lie in (0, 1)")
    return values


def positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


# --------------------------------------------------------------------------
# Subcommands

def _load(path):
    try:
        return read_truth_table(path)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_spectrum(args):
    s = wht(_load(args.file))
    if args.format == "json":
        return _json_text({"n": s.n, "coeffs": [float(c) + 0.0 for c in s.coeffs]}), EXIT_OK
    return format_spectrum_csv(s), EXIT_OK


def cmd_mi(args):
    report = sum_coordinate_mi(_load(args.file), NoiseParams(args.alpha))
    if args.format == "csv":
        d = report.to_dict()
        rows = [("n", d["n"]), ("alpha", d["alpha"]), ("mu", d["mu"]),
                ("total_mi", d["total_mi"]), ("sum_coord_mi", d["sum_coord_mi"])]
        rows += [(f"coord_mi_{i + 1}", v) for i, v in enumerate(d["coord_mi"])]
        rows += [(f"z_{i + 1}", v) for i, v in enumerate(d["z"])]
        return _csv_text(["quantity", "value"], rows), EXIT_OK
    return report.to_json() + "\n", EXIT_OK


def cmd_compress(args):
    trace = monotonize(_load(args.file), NoiseParams(args.alpha))
    if args.final:
        write_truth_table(args.final, trace.final)
    code = EXIT_OK if trace.is_nondecreasing() else EXIT_VIOLATION
    if args.format == "csv":
        return _csv_text(["coord", "L_before", "L_after"], [s[:3] for s in trace.steps]), code
    return trace.to_jsonl(), code


def cmd_oq1_curves(args):
    K_grid = oq1.default_K_grid(args.k_points, args.k_max)
    rho_grid = oq1.default_rho_grid() if args.rho_grid is None else np.asarray(args.rho_grid)
    if np.any(rho_grid >= 1.0):
        raise UsageError("rho grid must lie in (0, 1)")
    chain = oq1.verify_thm2_bound_chain(K_grid, rho_grid)
    code = EXIT_OK if chain.passed else EXIT_VIOLATION
    if args.format == "json":
        return _json_text(chain.to_dict()), code
    return oq1.format_curve_csv(oq1.curve_rows(K_grid, rho_grid)), code


def _run_search(args, kind):
    task = search.SearchTask(kind, args.n, args.alpha_grid)
    report = search.run_sharded(task, shards=args.shards, checkpoint_path=args.checkpoint,
                                checkpoint_every=args.checkpoint_every, allow_long_run=args.allow_long_run)
    code = EXIT_OK if report.passed else EXIT_VIOLATION
    if args.format == "csv":
        return report.to_csv(), code
    return report.to_json(include_timing=args.timing), code


def cmd_verify_ck(args):
    return _run_search(args, "ck")


def cmd_verify_thm2(args):
    return _run_search(args, "thm2")


def cmd_highnoise_scan(args):
    lams = highnoise.lambda_grid() if args.lambda_grid is None else args.lambda_grid
    family = highnoise.density_family(args.seed)
    names = args.family or list(family)
    unknown = [f for f in names if f not in family]
    if unknown:
        raise UsageError(f"unknown density {unknown[0]!r}; choose from {', '.join(family)}")
    rows, fits = [], []
    for name in names:
        values = highnoise.scan(family[name], lams)
        for q in highnoise.QUANTITIES:
            label = f"{name}:{q}"
            rows.extend((float(lam), label, float(v)) for lam, v in zip(lams, values[q]))
            try:
                fit = highnoise.scaling_fit(lams, values[q], window=(float(lams[0]), float(lams[-1])))
            except ValueError:
                continue  # fewer than 4 positive values: nothing to fit
            fits.append(fit.to_dict(label))
    if args.format == "json":
        return _json_text({"seed": args.seed, "fits": fits}), EXIT_OK
    return _csv_text(["lambda", "quantity", "value"], rows), EXIT_OK


def cmd_thresholds(args):
    table = highnoise.threshold_curves(args.lambda_grid)
    if args.format == "json":
        return _json_text({
            "slope_new": table.slope_new,
            "slope_old": table.slope_old,
            "slope_gap": table.slope_gap,
            "ratio_below_one": table.ratio_below_one,
            "ratio_shrinks_toward_zero": table.ratio_shrinks_toward_zero,
            "rows": [dict(zip(("lambda", "t_new", "t_old", "ratio"), r)) for r in table.rows()],
        }), EXIT_OK
    return _csv_text(["lambda", "t_new", "t_old", "ratio"], table.rows()), EXIT_OK


def cmd_concentration(args):
    if args.n > 4:
        raise UsageError("concentration enumerates exhaustively; --n must be <= 4")
    if not 0.0 < args.tau <= 1.0:
        raise UsageError("--tau must lie in (0, 1]")
    rows = highnoise.concentration_report(args.n, NoiseParams(args.alpha), tau=args.tau)
    header = ["class_id", "table", "orbit_size", "mu", "mi", "xi", "xi_over_lambda"]
    if args.format == "json":
        return _json_text([r.__dict__ for r in rows]), EXIT_OK
    return _csv_text(header, [[getattr(r, h) for h in header] for r in rows]), EXIT_OK


# --------------------------------------------------------------------------
# Parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (default: stdout); written atomically")
    common.add_argument("--format", choices=("json", "csv"), help="output format")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for randomized inputs")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(prog="hyperinfo",
                                     description="Mutual information of Boolean functions under BSC noise.")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")
    sub.required = True

    def add(name, func, default_format, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func, default_format=default_format)
        return p

    p = add("spectrum", cmd_spectrum, "csv", "Fourier spectrum of a truth-table file")
    p.add_argument("file")

    for name, func, fmt, text in (("mi", cmd_mi, "json", "total and coordinate-wise MI"),
                                  ("compress", cmd_compress, "json", "monotonize by compressions, with trace")):
        p = add(name, func, fmt, text)
        p.add_argument("file")
        p.add_argument("--alpha", type=alpha_value, required=True)
        if name == "compress":
            p.add_argument("--final", help="also write the monotone result as a truth-table file")

    p = add("oq1-curves", cmd_oq1_curves, "csv", "M_K curves and the bound-chain check")
    p.add_argument("--k-points", type=positive_int, default=40)
    p.add_argument("--k-max", type=float, default=100.0)
    p.add_argument("--rho-grid", type=rho_grid, default=None, help="a:b:step in (0, 1)")

    for name, func, text in (("verify-ck", cmd_verify_ck, "exhaustive max of I(b;Y) against capacity"),
                             ("verify-thm2", cmd_verify_thm2, "exhaustive max of sum_i I(b;Y_i)")):
        p = add(name, func, "json", text)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--alpha-grid", type=alpha_grid, default=search.DEFAULT_ALPHA_GRID)
        p.add_argument("--shards", type=positive_int, default=1)
        p.add_argument("--checkpoint", help="checkpoint file; resumed if present")
        p.add_argument("--checkpoint-every", type=positive_int, default=None, help="classes per checkpoint")
        p.add_argument("--allow-long-run", action="store_true", help="permit n = 5")
        p.add_argument("--timing", action="store_true", help="include wall time in the JSON report")

    p = add("highnoise-scan", cmd_highnoise_scan, "csv", "moments, residuals and slope fits over a lambda grid")
    p.add_argument("--lambda-grid", type=lambda_grid, default=None)
    p.add_argument("--family", action="append", help="density name (repeatable; default all)")

    p = add("thresholds", cmd_thresholds, "csv", "noise-range threshold curves")
    p.add_argument("--lambda-grid", type=lambda_grid, default=None)

    p = add("concentration", cmd_concentration, "csv", "Fourier tail of near-optimal functions")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=alpha_value, required=True)
    p.add_argument("--tau", type=float, default=1.0)
    return parser


def _validate(args):
    n = getattr(args, "n", None)
    if n is not None and not 1 <= n <= search.MAX_CANON_N:
        raise UsageError(f"--n must lie in [1, {search.MAX_CANON_N}]")
    if getattr(args, "k_max", 100.0) < 1.0:
        raise UsageError("--k-max must be >= 1")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.format is None:
        args.format = args.default_format
    try:
        _validate(args)
        text, code = args.func(args)
        write_output(text, args.out)
        return code
    except UsageError as exc:
        print(f"hyperinfo {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except search.ResourceGuardError as exc:
        print(f"hyperinfo {args.command}: resource guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except search.CheckpointError as exc:
        print(f"hyperinfo {args.command}: checkpoint: {exc}", file=sys.stderr)
        return EXIT_CHECKPOINT
    except ValueError as exc:
        print(f"hyperinfo {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
