"""Command-line interface: synth / estimate / experiment / validate-noise /
asymptotics / rates.

Exit codes: 0 on success, 1 on domain errors (one machine-parseable line on
stderr), 2 on usage errors (bad flags, unreadable inputs, malformed config).
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import asymptotics as asym
from .estimators import estimate_multi
from .model import ChirpComponent, ChirpModel, SampleSeries, synthesize
from .montecarlo import (
    ExperimentConfig,
    SummaryTable,
    preset_model,
    rate_check,
    run_experiment,
)
from .noise import StableNoiseSpec, empirical_cf, sample_sas, theoretical_cf
from .optim import SimplexConfig


class UsageError(Exception):
    """Unreadable input, malformed config, or inconsistent flags."""


def _parse_components(values: list[str]) -> ChirpModel:
    comps = []
    for text in values:
        parts = text.split(",")
        if len(parts) != 4:
            raise UsageError(f"--component expects 'A,B,theta1,theta2', got {text!r}")
        a, b, t1, t2 = (float(v) for v in parts)
        comps.append(ChirpComponent(A=a, B=b, theta1=t1, theta2=t2))
    return ChirpModel(components=tuple(comps))


def _resolve_model(args) -> ChirpModel:
    if getattr(args, "component", None):
        return _parse_components(args.component)
    return preset_model(args.model)


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def cmd_synth(args) -> int:
    model = _resolve_model(args)
    if args.sigma > 0:
        spec = StableNoiseSpec(alpha=args.alpha, sigma=args.sigma, seed=args.seed)
        noise = sample_sas(spec, args.n)
    else:
        noise = None
    series = synthesize(model, args.n, noise)
    fh, close = _open_out(args.out)
    try:
        series.to_csv(fh)
    finally:
        if close:
            fh.close()
    return 0


def _parse_init(text: str, p: int):
    if text == "blind":
        return None
    if not text.startswith("window:"):
        raise UsageError(f"--init must be 'blind' or 'window:theta1,theta2,...', got {text!r}")
    values = [float(v) for v in text[len("window:"):].split(",")]
    if len(values) != 2 * p:
        raise UsageError(
            f"window init needs 2p = {2 * p} values (theta1,theta2 per component), got {len(values)}"
        )
    return [tuple(values[2 * k : 2 * k + 2]) for k in range(p)]


def cmd_estimate(args) -> int:
    try:
        series = SampleSeries.from_csv(args.infile)
    except OSError as exc:
        raise UsageError(f"cannot read input series: {exc}") from exc
    inits = _parse_init(args.init, args.components)
    result = estimate_multi(series, args.components, method=args.method, inits=inits)
    fh, close = _open_out(args.out)
    try:
        json.dump(result.to_dict(), fh, indent=2)
        fh.write("\n")
    finally:
        if close:
            fh.close()
    return 0


def _load_experiment_config(path: str, args) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"malformed config: {exc}") from exc

    try:
        model_section = data["model"]
        if "preset" in model_section:
            model = preset_model(model_section["preset"])
        else:
            comps = tuple(
                ChirpComponent(A=c[0], B=c[1], theta1=c[2], theta2=c[3])
                for c in model_section["components"]
            )
            model = ChirpModel(components=comps)
        grid = data["grid"]
        run = data.get("run", {})
        simplex_kwargs = data.get("simplex", {})
    except (KeyError, TypeError, IndexError) as exc:
        raise UsageError(f"malformed config: missing or bad key {exc}") from exc

    simplex = SimplexConfig(**simplex_kwargs) if simplex_kwargs else None
    kwargs = dict(
        model=model,
        alphas=tuple(grid["alphas"]),
        sigmas=tuple(grid["sigmas"]),
        ns=tuple(grid["ns"]),
        replications=run.get("replications", 500),
        methods=tuple(run.get("methods", ["lse", "alse"])),
        init_mode=run.get("init_mode", "window"),
        master_seed=run.get("master_seed", 0),
        threads=run.get("threads", 1),
        max_amplitude=run.get("max_amplitude"),
    )
    if simplex is not None:
        kwargs["simplex"] = simplex
    if args.seed is not None:
        kwargs["master_seed"] = args.seed
    if args.threads is not None:
        kwargs["threads"] = args.threads
    return ExperimentConfig(**kwargs)


def cmd_experiment(args) -> int:
    cfg = _load_experiment_config(args.config, args)

    progress = None
    if args.verbose:

        def progress(cell, done, total):
            sys.stderr.write(f"\r{cell}: replication {done}/{total}")
            sys.stderr.flush()
            if done == total:
                sys.stderr.write("\n")

    result = run_experiment(cfg, progress=progress)
    fh, close = _open_out(args.out)
    try:
        result.table.to_csv(fh)
    finally:
        if close:
            fh.close()
    if args.raw:
        result.write_raw_csv(args.raw)
    if result.table.aborted:
        for cell in result.table.aborted:
            sys.stderr.write(
                f"aborted: method={cell.method} alpha={cell.alpha} sigma={cell.sigma} "
                f"n={cell.n}: {cell.message}\n"
            )
        return 1
    return 0


def cmd_validate_noise(args) -> int:
    spec = StableNoiseSpec(alpha=args.alpha, sigma=args.sigma, seed=args.seed)
    sample = sample_sas(spec, args.n)
    ts = [float(v) for v in args.t.split(",")]
    fh, close = _open_out(args.out)
    try:
        fh.write("t,empirical_re,empirical_im,theoretical,abs_error\n")
        for t in ts:
            ecf = empirical_cf(sample, t)
            tcf = theoretical_cf(args.alpha, args.sigma, t)
            fh.write(f"{t!r},{ecf.real!r},{ecf.imag!r},{tcf!r},{abs(ecf - tcf)!r}\n")
    finally:
        if close:
            fh.close()
    return 0


def cmd_asymptotics(args) -> int:
    model = _resolve_model(args)
    axes = [np.eye(4)[k] for k in range(4)]
    payload = {
        "alpha": args.alpha,
        "sigma": args.sigma,
        "n": args.n,
        "d1": [float(v) for v in asym.scaling_d1(args.n, args.alpha)],
        "d2": [float(v) for v in asym.scaling_d2(args.n, args.alpha)],
        "components": [],
    }
    for comp in model.components:
        taus = {}
        cfs = {}
        for k, t4 in enumerate(axes, start=1):
            taus[f"e{k}"] = asym.tau(t4, comp, args.alpha, args.n_approx)
            cfs[f"e{k}"] = asym.limiting_cf(t4, comp, args.alpha, args.sigma, args.n_approx)
        tau_pair = asym.tau_self_consistency(axes[0], comp, args.alpha, args.n_approx)
        payload["components"].append(
            {
                "A": comp.A,
                "B": comp.B,
                "theta1": comp.theta1,
                "theta2": comp.theta2,
                "gamma": asym.gamma_matrix(comp.A, comp.B).tolist(),
                "gamma_inverse": asym.gamma_inverse(comp.A, comp.B).tolist(),
                "tau_axis": taus,
                "limiting_cf_axis": cfs,
                "tau_self_consistency": list(tau_pair),
            }
        )
    fh, close = _open_out(args.out)
    try:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    finally:
        if close:
            fh.close()
    return 0


def cmd_rates(args) -> int:
    try:
        table = SummaryTable.from_csv(args.table)
    except OSError as exc:
        raise UsageError(f"cannot read summary table: {exc}") from exc
    slopes = {}
    for parameter in args.parameter:
        slopes[parameter] = rate_check(table, parameter, args.method, args.alpha, args.sigma)
    payload = {
        "method": args.method,
        "alpha": args.alpha,
        "sigma": args.sigma,
        "slopes": slopes,
    }
    fh, close = _open_out(args.out)
    try:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    finally:
        if close:
            fh.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chirpfit",
        description="Chirp signal parameter estimation under heavy-tailed noise",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a chirp series with SaS noise")
    p.add_argument("--model", default="model1", help="preset name (model1 or model2)")
    p.add_argument("--component", action="append", metavar="A,B,T1,T2",
                   help="custom component, repeatable; overrides --model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--sigma", type=float, default=0.0,
                   help="noise scale; 0 synthesizes noiselessly")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("estimate", help="estimate chirp parameters from a series CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--method", choices=("lse", "alse"), required=True)
    p.add_argument("--components", type=int, default=1)
    p.add_argument("--init", default="blind",
                   help="'blind' or 'window:theta1,theta2[,theta1,theta2,...]'")
    p.add_argument("--out", default=None, help="output JSON path (default stdout)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment from a TOML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="summary CSV path (default stdout)")
    p.add_argument("--raw", default=None, help="optional per-replication dump CSV")
    p.add_argument("--seed", type=int, default=None, help="override the config master seed")
    p.add_argument("--threads", type=int, default=None, help="cap on worker processes")
    p.add_argument("-v", "--verbose", action="store_true",
                   help="replication counter on stderr")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("validate-noise", help="empirical vs theoretical SaS CF table")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t", default="0.5,1,2", help="comma-separated CF arguments")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_validate_noise)

    p = sub.add_parser("asymptotics", help="scaling matrices, Gamma, tau, limiting CF as JSON")
    p.add_argument("--model", default="model1")
    p.add_argument("--component", action="append", metavar="A,B,T1,T2")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--n", type=int, default=1000, help="sample size for the scaling diagonals")
    p.add_argument("--n-approx", type=int, default=100_000, help="truncation length for tau")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_asymptotics)

    p = sub.add_parser("rates", help="log-log MAD-vs-n slopes from a summary CSV")
    p.add_argument("--table", required=True)
    p.add_argument("--method", choices=("lse", "alse"), required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--parameter", action="append", required=True,
                   help="parameter name, repeatable (e.g. theta1)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rates)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    except (ValueError, RuntimeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
