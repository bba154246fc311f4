"""Command-line front end.

Subcommands: ``solve``, ``divergence-curve``, ``dump-densities``,
``sweep-snr`` and ``verify``. Tables go out as CSV (header row, ``.12g``
numbers) or as one JSON object of column arrays; scalar reports as a JSON
object or a single CSV row.

Exit codes: 0 ok, 1 usage error, 2 infeasible tolerance, 3 unvalidated pair,
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import densities, saddle, verify
from .errors import InfeasibleTolerance, InvalidParameter, KLMinimaxError, UnvalidatedPair
from .numerics import Tolerances, gaussian_tail_q

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_UNVALIDATED = 3
EXIT_VERIFY_FAILED = 4

FAMILIES = ("gaussian", "gen-gaussian", "asym-laplace", "cauchy")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_grid(spec: str) -> np.ndarray:
    """``lo:hi:step`` -> inclusive grid; ``hi`` is kept if within half a step."""
    try:
        lo, hi, step = (float(part) for part in spec.split(":"))
    except ValueError:
        raise UsageError(f"grid must look like lo:hi:step, got {spec!r}") from None
    if not step > 0 or hi < lo:
        raise UsageError(f"grid needs step > 0 and hi >= lo, got {spec!r}")
    count = int(math.floor((hi - lo) / step + 0.5))
    return lo + step * np.arange(count + 1)


def build_pair(args) -> densities.NominalPair:
    if args.family == "gaussian":
        return densities.gaussian_pair(args.sigma)
    if args.family == "gen-gaussian":
        return densities.generalized_gaussian_pair(args.alpha, args.sigma)
    if args.family == "asym-laplace":
        return densities.asymmetric_laplace_pair(args.a, args.b)
    return densities.cauchy_pair(args.scale)


def build_tolerances(args) -> Tolerances:
    overrides = {
        name: getattr(args, name)
        for name in ("quad_rel_err", "quad_abs_err", "root_abs_err", "support_mass_cutoff")
        if getattr(args, name) is not None
    }
    return Tolerances(mc_seed=args.seed, **overrides)


def single_epsilon(args) -> float:
    eps = args.epsilon or [0.1]
    if len(eps) != 1:
        raise UsageError("this command takes exactly one --epsilon")
    return eps[0]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def _json_value(value):
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_json_value(v) for v in value]
    return value


def emit_table(columns: list[str], rows: list[list], fmt: str, out) -> None:
    if fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    else:
        table = {name: [row[i] for row in rows] for i, name in enumerate(columns)}
        json.dump(_json_value({"columns": columns, "data": table}), out, indent=2)
        out.write("\n")


def emit_record(record: dict, fmt: str, out) -> None:
    if fmt == "csv":
        flat = _flatten(record)
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(list(flat))
        writer.writerow([_fmt(v) for v in flat.values()])
    else:
        json.dump(_json_value(record), out, indent=2)
        out.write("\n")


def _flatten(record: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        else:
            flat[name] = value
    return flat


# -- commands ---------------------------------------------------------------------

def cmd_solve(args, out) -> int:
    tol = build_tolerances(args)
    pair = build_pair(args)
    sp = saddle.solve(pair, single_epsilon(args), tol)
    record = {
        "family": pair.family,
        "params": pair.params,
        "epsilon": sp.epsilon,
        "y_U": sp.y_U,
        "ell_U": sp.ell_U,
        "Z": sp.Z,
        "worst_case_pe": saddle.worst_case_error(sp, tol),
        "d_midway": densities.midway_divergence(pair, tol),
    }
    emit_record(record, args.format or "json", out)
    return EXIT_OK


def cmd_divergence_curve(args, out) -> int:
    tol = build_tolerances(args)
    pair = build_pair(args)
    if not pair.validated:
        raise UnvalidatedPair(f"{pair.family} pair fails the symmetry or monotone-LR check")
    grid = parse_grid(args.grid or "0:5:0.025")
    if grid[0] < 0:
        raise UsageError("breakpoint grid must be non-negative")
    rows = [[float(y), saddle.divergence_at(pair, float(y), tol)] for y in grid]
    emit_table(["y_U", "D"], rows, args.format or "csv", out)
    return EXIT_OK


def cmd_dump_densities(args, out) -> int:
    tol = build_tolerances(args)
    pair = build_pair(args)
    sp = saddle.solve(pair, single_epsilon(args), tol)
    y = parse_grid(args.grid or "-5:5:0.01")
    columns = ["y", "f0", "f1", "g0L", "g1L", "delta_R", "L", "L_L"]
    values = [
        y,
        pair.f0.pdf(y),
        pair.f1.pdf(y),
        sp.g0L.pdf(y),
        sp.g1L.pdf(y),
        sp.rule(y),
        np.exp(densities.log_likelihood_ratio(pair, y)),
        saddle.lf_likelihood_ratio(sp, y),
    ]
    rows = [list(map(float, row)) for row in zip(*values)]
    emit_table(columns, rows, args.format or "csv", out)
    return EXIT_OK


def cmd_sweep_snr(args, out) -> int:
    if args.family != "gaussian":
        raise UsageError("sweep-snr is defined for the gaussian family only")
    tol = build_tolerances(args)
    snr_grid = parse_grid(args.snr_db or "0:15:0.5")
    eps_list = args.epsilon or [0.01, 0.1]
    columns = ["snr_db", "pe_ml"] + [f"pe_worst[{e:g}]" for e in eps_list]
    rows = []
    for snr_db in snr_grid:
        sigma = 10.0 ** (-snr_db / 20.0)
        pair = densities.gaussian_pair(sigma)
        row = [float(snr_db), gaussian_tail_q(1.0 / sigma)]
        for eps in eps_list:
            try:
                sp = saddle.solve(pair, eps, tol)
            except InfeasibleTolerance as exc:
                print(f"warning: skipping snr_db={snr_db:g}, epsilon={eps:g}: {exc}", file=sys.stderr)
                row.append(None)
                continue
            row.append(saddle.worst_case_error(sp, tol))
        rows.append(row)
    emit_table(columns, rows, args.format or "csv", out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    tol = build_tolerances(args)
    pair = build_pair(args)
    sp = saddle.solve(pair, single_epsilon(args), tol)
    cert = verify.check_saddle(sp, n_probes=args.probes, seed=args.seed, tol=tol,
                               n_rule_probes=args.rule_probes)
    pe_hat, stderr = verify.monte_carlo_error(sp.rule, sp.g0L, sp.g1L, args.mc_samples,
                                              args.seed, tol)
    pe_quad = saddle.worst_case_error(sp, tol)
    z = abs(pe_hat - pe_quad) / stderr if stderr > 0 else (0.0 if pe_hat == pe_quad else math.inf)
    mc_ok = z <= 4.0
    passed = cert.passed and mc_ok
    record = {
        "family": pair.family,
        "params": pair.params,
        "epsilon": sp.epsilon,
        "y_U": sp.y_U,
        "certificate": cert.as_dict(),
        "monte_carlo": {
            "samples": args.mc_samples,
            "pe_hat": pe_hat,
            "stderr": stderr,
            "pe_quadrature": pe_quad,
            "z_score": z,
            "passed": mc_ok,
        },
        "passed": passed,
    }
    emit_record(record, args.format or "json", out)
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


COMMANDS = {
    "solve": cmd_solve,
    "divergence-curve": cmd_divergence_curve,
    "dump-densities": cmd_dump_densities,
    "sweep-snr": cmd_sweep_snr,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", choices=FAMILIES, default="gaussian")
    common.add_argument("--sigma", type=float, default=1.0, help="noise standard deviation")
    common.add_argument("--alpha", type=float, default=1.5, help="generalized Gaussian shape")
    common.add_argument("--a", type=float, default=2.0, help="Laplace decay rate, fat side")
    common.add_argument("--b", type=float, default=4.0, help="Laplace decay rate, thin side")
    common.add_argument("--scale", type=float, default=1.0, help="Cauchy scale")
    common.add_argument("--epsilon", type=float, action="append",
                        help="KL tolerance in nats (repeatable for sweeps)")
    common.add_argument("--grid", help="lo:hi:step abscissa grid")
    common.add_argument("--snr-db", help="lo:hi:step SNR grid in dB")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--probes", type=int, default=50, help="density probes per hypothesis")
    common.add_argument("--rule-probes", type=int, default=30)
    common.add_argument("--mc-samples", type=int, default=1_000_000)
    common.add_argument("--out", help="output path (default: standard output)")
    common.add_argument("--quad-rel-err", type=float)
    common.add_argument("--quad-abs-err", type=float)
    common.add_argument("--root-abs-err", type=float)
    common.add_argument("--support-mass-cutoff", type=float)

    parser = _Parser(prog="klminimax", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


@contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
        return
    buffer = io.StringIO()
    yield buffer
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buffer.getvalue())


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed < 0 or args.seed >= 2**64:
        parser.error("--seed must be a 64-bit unsigned integer")
    try:
        with _output(args.out) as out:
            return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"klminimax: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidParameter as exc:
        print(f"klminimax: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleTolerance as exc:
        print(f"klminimax: infeasible tolerance: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except UnvalidatedPair as exc:
        print(f"klminimax: unvalidated pair: {exc}", file=sys.stderr)
        return EXIT_UNVALIDATED
    except KLMinimaxError as exc:
        print(f"klminimax: numerical failure: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
