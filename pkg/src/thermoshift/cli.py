"""Batch front-end: load a model file, run one computation, emit CSV tables.

Exit codes: 0 on success, 1 on configuration errors (the message names the
offending field), 2 when a convergence or certification flag failed, 3 when
the divergence policy fired. All numeric CSV cells use the shortest float
representation that parses back to the same value.
"""

import argparse
import csv
import logging
import math
import os
import sys
from typing import Optional, Sequence

from .dimension import bowen_dimension
from .gibbs import finite_gibbs_nu, verify_gibbs
from .matrix_cocycle import max_lyapunov
from .modelfile import (
    ModelFileError,
    RunConfig,
    build_construction,
    build_family,
    build_measure,
    build_model,
    build_potential,
    load_model_file,
)
from .potentials import estimate_regularity, summability_report
from .pressure import curve_second_differences, gurevich_pressure, pressure_curve
from .shift_core import BipCertificate, check_bip, truncate

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FLAG = 2
EXIT_DIVERGED = 3

log = logging.getLogger("thermoshift")

PRESSURE_PARAM_MAP = {
    "truncations": "m_list",
    "n_max": "n_max",
    "slope_window": "slope_window",
    "tol": "tol",
    "divergence_threshold": "divergence_threshold",
    "divergence_run": "divergence_run",
    "cap": "cap",
}


def _setup_logging() -> None:
    level_name = os.environ.get("THERMOSHIFT_LOG", "WARNING").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _write_csv(path: str, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])


def _params(data: dict, args: argparse.Namespace) -> dict:
    """File params overridden by any CLI flag that was set."""
    merged = dict(data.get("params", {}))
    for key in (
        "truncations", "n_max", "t_grid", "tol", "seed", "level", "depth",
        "samples", "n", "slope_window", "divergence_threshold",
        "divergence_run", "cap", "ratio_bound", "t_bracket",
    ):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if args.seed is not None:
        merged["seed"] = args.seed
    return merged


def _pressure_kwargs(params: dict) -> dict:
    out = {}
    for key, target in PRESSURE_PARAM_MAP.items():
        if key in params:
            out[target] = params[key]
    return out


def _flag(est) -> str:
    if est.diverged:
        return "diverged"
    if not est.converged:
        return "unconverged"
    return "ok"


def cmd_pressure(data: dict, args: argparse.Namespace, out_dir: str) -> int:
    model = build_model(data)
    potential = build_potential(data, model)
    params = _params(data, args)
    est = gurevich_pressure(model, potential, **_pressure_kwargs(params))
    _write_csv(
        os.path.join(out_dir, "series.csv"),
        ("truncation", "n", "log_z"),
        [(est.series.truncation_size, n, z) for n, z in est.series.entries],
    )
    _write_csv(
        os.path.join(out_dir, "estimate.csv"),
        ("value", "lower", "upper", "truncation", "n_max", "base_symbol",
         "converged", "monotone", "diverged"),
        [(est.value, est.lower, est.upper, est.truncation_level, est.n_max,
          est.base_symbol, est.converged, est.monotone, est.diverged)],
    )
    print(
        f"value {est.value!r} lower {est.lower!r} upper {est.upper!r} "
        f"flag {_flag(est)}"
    )
    if est.diverged:
        return EXIT_DIVERGED
    if not est.converged:
        return EXIT_FLAG
    return EXIT_OK


def cmd_curve(data: dict, args: argparse.Namespace, out_dir: str) -> int:
    model = build_model(data)
    potential = build_potential(data, model)
    params = _params(data, args)
    grid = params.get("t_grid")
    if not grid:
        raise ModelFileError("params.t_grid", "required")
    curve = pressure_curve(
        model, potential, grid, **_pressure_kwargs(params)
    )
    rows = [
        (t, est.value, est.lower, est.upper, _flag(est)) for t, est in curve
    ]
    _write_csv(
        os.path.join(out_dir, "curve.csv"),
        ("t", "value", "lower", "upper", "flag"),
        rows,
    )
    for second in curve_second_differences(curve):
        if second < -1e-9:
            print(
                f"warning: convexity violated (second difference {second!r})",
                file=sys.stderr,
            )
    for t, est in curve:
        print(f"t {t!r} value {est.value!r}")
    if any(est.diverged for _, est in curve):
        return EXIT_DIVERGED
    if any(not est.converged for _, est in curve):
        return EXIT_FLAG
    return EXIT_OK


def cmd_dimension(data: dict, args: argparse.Namespace, out_dir: str) -> int:
    model = build_model(data)
    gc = build_construction(data)
    params = _params(data, args)
    solver = {}
    if "t_bracket" in params:
        solver["t_bracket"] = tuple(params["t_bracket"])
    if "tol" in params:
        solver["tol"] = params["tol"]
    res = bowen_dimension(gc, model, **solver, **_pressure_kwargs(params))
    _write_csv(
        os.path.join(out_dir, "dimension.csv"),
        ("dim_hat", "bracket_lo", "bracket_hi", "root_found",
         "pressure_at_dim", "uncertain", "experimental"),
        [(res.dim_hat, res.bracket[0], res.bracket[1], res.root_found,
          res.pressure_at_dim, res.uncertain, res.experimental)],
    )
    _write_csv(
        os.path.join(out_dir, "trace.csv"),
        ("t", "value", "lower", "upper", "diverged"),
        res.trace,
    )
    print(f"dimension {res.dim_hat!r} root_found {res.root_found}")
    if res.root_found and not res.uncertain:
        return EXIT_OK
    return EXIT_FLAG


def cmd_lyapunov(data: dict, args: argparse.Namespace, out_dir: str) -> int:
    if "matrices" not in data:
        raise ModelFileError("matrices", "required")
    family = build_family(data)
    model = build_model(data)
    params = _params(data, args)
    measure_spec = data.get("measure", {})
    sub = None
    if measure_spec.get("kind") in ("bernoulli", "markov"):
        support = len(
            measure_spec.get("probs") or measure_spec.get("pi") or ()
        )
        sub = truncate(model, support)
    mu = build_measure(data, sub)
    est = max_lyapunov(
        family,
        mu,
        int(params.get("n", 100)),
        int(params.get("samples", 50)),
        seed=int(params.get("seed", 0)),
    )
    _write_csv(
        os.path.join(out_dir, "lyapunov.csv"),
        ("lambda_hat", "n_used", "sample_count", "standard_error"),
        [(est.lambda_hat, est.n_used, est.sample_count, est.standard_error)],
    )
    print(f"lambda_hat {est.lambda_hat!r} standard_error {est.standard_error!r}")
    return EXIT_OK


def cmd_gibbs(data: dict, args: argparse.Namespace, out_dir: str) -> int:
    model = build_model(data)
    potential = build_potential(data, model)
    params = _params(data, args)
    truncations = params.get("truncations")
    if not truncations:
        raise ModelFileError("params.truncations", "required")
    sub = truncate(model, truncations[-1])
    pressure_est = gurevich_pressure(model, potential, **_pressure_kwargs(params))
    if "measure" in data:
        mu = build_measure(data, sub)
    else:
        mu = finite_gibbs_nu(sub, potential, int(params.get("level", 8)))
    rows = []
    cert = verify_gibbs(
        mu,
        potential,
        pressure_est.value,
        depth=int(params.get("depth", 4)),
        sub=sub,
        ratio_bound=float(params.get("ratio_bound", 100.0)),
        row_sink=lambda n, w, m, lw, r: rows.append(
            (n, " ".join(str(s) for s in w), m, lw, r)
        ),
    )
    rows.append(("summary", "", cert.words_tested, cert.ratio_min, cert.ratio_max))
    _write_csv(
        os.path.join(out_dir, "gibbs.csv"),
        ("n", "word", "mass", "log_weight", "ratio"),
        rows,
    )
    verdict = "PASS" if cert.passed else "FAIL"
    print(
        f"{verdict} ratio_min {cert.ratio_min!r} ratio_max {cert.ratio_max!r} "
        f"P {cert.P_used!r}"
    )
    return EXIT_OK if cert.passed else EXIT_FLAG


def cmd_validate(data: dict, args: argparse.Namespace, out_dir: str) -> int:
    model = build_model(data)
    potential = build_potential(data, model)
    params = _params(data, args)
    truncation = (params.get("truncations") or [8])[-1]
    reg = estimate_regularity(
        potential,
        model,
        depth=int(params.get("depth", 12)),
        samples=int(params.get("samples", 200)),
        seed=int(params.get("seed", 0)),
        truncation=truncation,
    )
    summ = summability_report(potential)
    witness = params.get("witness", [model.first_symbol])
    up_to = int(params.get("up_to", 20))
    if model.alphabet_size is not None:
        up_to = min(up_to, model.alphabet_size)
    bip = check_bip(model, witness, up_to)
    bip_ok = isinstance(bip, BipCertificate)
    bip_detail = (
        f"witness={','.join(str(b) for b in bip.witness_set)}"
        if bip_ok
        else f"symbol={bip.symbol} missing={bip.missing}"
    )
    _write_csv(
        os.path.join(out_dir, "validate.csv"),
        ("c_hat", "declared_c", "violates_declared", "samples", "depth",
         "summability", "partial_sum", "bip_ok", "bip_detail"),
        [(reg.C_hat, potential.declared_C, reg.violates_declared, reg.samples,
          reg.depth, summ.verdict, summ.partial_sum, bip_ok, bip_detail)],
    )
    passed = bip_ok and not reg.violates_declared
    print(f"{'PASS' if passed else 'FAIL'} C_hat {reg.C_hat!r} "
          f"declared {potential.declared_C!r} summability {summ.verdict}")
    return EXIT_OK if passed else EXIT_FLAG


COMMANDS = {
    "pressure": cmd_pressure,
    "curve": cmd_curve,
    "dimension": cmd_dimension,
    "lyapunov": cmd_lyapunov,
    "gibbs": cmd_gibbs,
    "validate": cmd_validate,
}


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part]


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermoshift",
        description="pressure, Gibbs, Lyapunov, and dimension computations "
        "on countable Markov shifts",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--model", required=True, help="model file (JSON)")
        cmd.add_argument("--out", default=".", help="output directory")
        cmd.add_argument(
            "--threads",
            type=int,
            default=None,
            help="worker pool size; results do not depend on it",
        )
        cmd.add_argument("--seed", type=int, default=None)
        cmd.add_argument("--truncations", type=_int_list, default=None)
        cmd.add_argument("--n-max", dest="n_max", type=int, default=None)
        cmd.add_argument("--t-grid", dest="t_grid", type=_float_list, default=None)
        cmd.add_argument("--tol", type=float, default=None)
        cmd.add_argument("--level", type=int, default=None)
        cmd.add_argument("--depth", type=int, default=None)
        cmd.add_argument("--samples", type=int, default=None)
        cmd.add_argument("--n", type=int, default=None)
        cmd.add_argument(
            "--slope-window", dest="slope_window", type=int, default=None
        )
        cmd.add_argument(
            "--divergence-threshold",
            dest="divergence_threshold",
            type=float,
            default=None,
        )
        cmd.add_argument(
            "--divergence-run", dest="divergence_run", type=int, default=None
        )
        cmd.add_argument("--cap", type=int, default=None)
        cmd.add_argument(
            "--ratio-bound", dest="ratio_bound", type=float, default=None
        )
        cmd.add_argument(
            "--t-bracket", dest="t_bracket", type=_float_list, default=None
        )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = args.threads if args.threads else os.cpu_count() or 1
    log.info("command=%s model=%s threads=%d", args.command, args.model, threads)
    try:
        data = load_model_file(args.model)
        config = RunConfig(
            command=args.command,
            model_path=args.model,
            out_dir=args.out,
            threads=args.threads,
            seed=args.seed if args.seed is not None else 0,
        )
        os.makedirs(config.out_dir, exist_ok=True)
        return COMMANDS[args.command](data, args, config.out_dir)
    except ModelFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
