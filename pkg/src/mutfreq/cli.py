"""Command-line interface: ``mutfreq {simulate,dist,compare,limits}``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytics.clone import clone_size_pmf
from .analytics.compound import bcirc_pmf, bstar_pmf
from .analytics.finite import angerer_pmf, b_tau_mean, b_tau_pgf, b_tau_pmf
from .analytics.limits import PopulationLimit, TimeLimit, limit_constants, mean_sfs_limit, tail_constant
from .config import ConfigError, ExperimentConfig, load_config
from .io import pmf_rows, read_csv, write_csv, write_json
from .multisite import MultisiteParams, mean_sfs_empirical
from .parallel import AllReplicatesDiscarded, default_workers
from .process import BirthDeathParams, EventCapExceeded
from .stats import compare_arrays, per_k_se, tv_distance
from .twotype import FixedTime, ModelParams, TotalSize, WildtypeSize, run_replicates, run_yule_replicates, write_archive

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3


def _two_type(cfg: ExperimentConfig) -> ModelParams:
    if cfg.get("model", "kind") != "two_type":
        raise ConfigError("this request needs model.kind = two_type")
    try:
        return ModelParams(
            cfg.require("model", "alpha_a"),
            cfg.get("model", "beta_a", 0.0),
            cfg.get("model", "nu", 0.0),
            cfg.get("model", "alpha_b", 0.0),
            cfg.get("model", "beta_b", 0.0),
            cfg.get("model", "a0"),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _multisite(cfg: ExperimentConfig) -> MultisiteParams:
    if cfg.get("model", "kind") != "multisite":
        raise ConfigError("this request needs model.kind = multisite")
    try:
        return MultisiteParams(
            cfg.require("model", "a"),
            cfg.get("model", "b", 0.0),
            cfg.require("model", "mu"),
            cfg.require("model", "S"),
            cfg.get("model", "c0"),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _stop(cfg: ExperimentConfig):
    rule = cfg.require("stop", "rule")
    try:
        if rule == "fixed_time":
            return FixedTime(cfg.require("stop", "t"))
        if rule == "wildtype_size":
            return WildtypeSize(cfg.require("stop", "n"))
        return TotalSize(cfg.require("stop", "n"))
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _provenance(cfg: ExperimentConfig, command: str, **extra) -> dict:
    prov = {
        "generator": f"mutfreq {__version__}",
        "command": command,
        "config_sha256": cfg.digest(),
        "seed": cfg.get("run", "seed"),
    }
    prov.update(extra)
    return prov


def _out(cfg: ExperimentConfig, name: str) -> Path:
    return Path(cfg.get("output", "dir")) / f"{cfg.get('output', 'prefix')}{name}"


def cmd_simulate(cfg: ExperimentConfig, workers: int) -> list[Path]:
    reps = cfg.get("run", "reps")
    seed = cfg.get("run", "seed")
    conditioning = cfg.get("run", "conditioning")
    stop = _stop(cfg)
    if cfg.get("model", "kind") == "multisite":
        return _simulate_multisite(cfg, stop, reps, seed, conditioning, workers)
    params = _two_type(cfg)
    if cfg.get("run", "sampler") == "yule":
        if not isinstance(stop, WildtypeSize):
            raise ConfigError("the yule sampler needs stop.rule = wildtype_size")
        try:
            pmf = run_yule_replicates(params, stop.n, reps, seed, workers)
        except ValueError as err:
            raise ConfigError(str(err)) from err
        attempts, outcomes = reps, None
    else:
        run = run_replicates(
            params,
            stop,
            reps,
            seed,
            conditioning,
            count=cfg.get("run", "count", "attempts"),
            workers=workers,
            max_events=cfg.get("run", "max_events"),
        )
        pmf, attempts, outcomes = run.pmf, run.attempts, run.outcomes
    ses = per_k_se(pmf, pmf.counts)
    rows = [(k, c, c / pmf.reps, ses[k].se) for k, c in pmf.counts.items()]
    prov = _provenance(cfg, "simulate", reps=pmf.reps, attempts=attempts, discard_count=pmf.discard_count)
    paths = [write_csv(_out(cfg, "pmf.csv"), ["k", "count", "prob", "std_err"], rows, prov)]
    if outcomes is not None and cfg.get("run", "archive"):
        path = _out(cfg, "outcomes.jsonl")
        write_archive(outcomes, path)
        paths.append(path)
    return paths


def _simulate_multisite(cfg, stop, reps, seed, conditioning, workers) -> list[Path]:
    params = _multisite(cfg)
    if isinstance(stop, WildtypeSize):
        raise ConfigError("multisite runs stop on fixed_time or total_size")
    sfs = mean_sfs_empirical(
        params,
        stop,
        reps,
        seed,
        conditioning,
        count=cfg.get("run", "count", "accepted"),
        workers=workers,
        limit_calibrated=cfg.get("model", "limit_calibrated"),
        max_events=cfg.get("run", "max_events"),
    )
    columns = ["k", "mean_count", "std_err"]
    theory = None
    if cfg.get("run", "theory"):
        theory = _sfs_theory(cfg, params, stop, sfs.kmax)
        columns.append("theory_count")
    rows = []
    for k in range(sfs.kmax + 1):
        row = [k, sfs.mean[k], sfs.std_err[k]]
        if theory is not None:
            row.append(theory[k])
        rows.append(row)
    prov = _provenance(cfg, "simulate", reps=sfs.reps, discard_count=sfs.discard_count, S=params.S)
    return [write_csv(_out(cfg, "sfs.csv"), columns, rows, prov)]


def _sfs_theory(cfg, params: MultisiteParams, stop, kmax: int) -> np.ndarray:
    lam = params.growth_rate
    if isinstance(stop, TotalSize):
        rate = cfg.get("dist", "theta") or stop.n * params.mu * params.a
        mode = PopulationLimit(rate)
    else:
        rate = cfg.get("dist", "eta") or params.mu * params.a * math.exp(lam * stop.t)
        mode = TimeLimit(rate, params.c0)
    if rate == 0:
        out = np.zeros(kmax + 1)
        out[0] = params.S
        return out
    return mean_sfs_limit(params.S, mode, params.a, params.b, max(kmax, 1))[: kmax + 1]


def cmd_dist(cfg: ExperimentConfig) -> list[Path]:
    kind = cfg.require("dist", "kind")
    kmax = cfg.get("dist", "kmax")
    tol = cfg.get("dist", "tol")
    summary: dict = {"kind": kind}
    columns = ["k", "prob"]
    try:
        if kind == "sfs-limit":
            params = _multisite(cfg)
            lam = params.growth_rate
            if cfg.get("dist", "mode") == "population":
                theta = cfg.get("dist", "theta")
                if theta is None:
                    theta = cfg.require("stop", "n") * params.mu * params.a
                mode, summary["theta"] = PopulationLimit(theta), theta
                tail = tail_constant("sfs", lambda_a=lam, alpha_b=params.a, beta_b=params.b, theta=theta, S=params.S)
            else:
                eta = cfg.require("dist", "eta")
                mode, summary["eta"] = TimeLimit(eta, params.c0), eta
                tail = tail_constant("sfs", lambda_a=lam, alpha_b=params.a, beta_b=params.b, eta=eta, a0=params.c0, S=params.S)
            counts = mean_sfs_limit(params.S, mode, params.a, params.b, kmax)
            summary.update(S=params.S, tail_constant=tail, tail_exponent=2.0, expected_sites_k0=float(counts[0]))
            rows = list(enumerate(counts.tolist()))
            columns = ["k", "expected_count"]
        else:
            params = _two_type(cfg)
            pmf, tail = _dist_pmf(cfg, kind, params, kmax, tol, summary)
            rows = list(pmf_rows(pmf))
            summary.update(mean=pmf.mean(), tail_mass=pmf.tail_mass, normalization_error=pmf.normalization_error(), tail_constant=tail)
            if params.lambda_a > 0:
                reg = limit_constants(params)
                summary["regime"] = {"regime": reg.regime, "scaling": reg.scaling, "constant": reg.constant, **reg.extra}
    except (ValueError, ZeroDivisionError) as err:
        raise ConfigError(str(err)) from err
    if summary.get("tail_constant") is None:
        summary["tail_constant"] = "not applicable"
    prov = _provenance(cfg, f"dist {kind}")
    return [
        write_csv(_out(cfg, "dist.csv"), columns, rows, prov),
        write_json(_out(cfg, "summary.json"), summary, prov),
    ]


def _dist_pmf(cfg, kind, params: ModelParams, kmax, tol, summary):
    lam_a = params.lambda_a
    tail_args = dict(lambda_a=lam_a, alpha_b=params.alpha_b, beta_b=params.beta_b)
    if kind == "angerer":
        n = cfg.require("dist", "n")
        if params.beta_a or params.beta_b or not math.isclose(params.alpha_a + params.nu, params.alpha_b):
            raise ConfigError("angerer needs beta_a = beta_b = 0 and alpha_a + nu = alpha_b")
        return angerer_pmf(n, params.alpha_a, params.alpha_b, kmax=min(kmax, n - 1)), None
    if kind in ("btau", "btau-pgf"):
        n = cfg.require("dist", "n")
        pmf = b_tau_pmf(n, params, kmax)
        summary["exact_mean"] = b_tau_mean(n, params.nu, params.alpha_a, params.lambda_b)
        z = cfg.get("dist", "z")
        if z is not None:
            summary["pgf"] = {"z": z, "value": b_tau_pgf(n, params, z)}
        return pmf, None
    if not lam_a > 0:
        raise ConfigError("clone-size laws need lambda_a > 0")
    clone = clone_size_pmf(BirthDeathParams(params.alpha_b, params.beta_b), lam_a, kmax, tol)
    if kind == "clone":
        return clone, tail_constant("clone", **tail_args)
    if kind == "bstar":
        theta = cfg.require("dist", "theta")
        summary["theta"] = theta
        return bstar_pmf(theta, lam_a, clone, kmax), tail_constant("bstar", theta=theta, **tail_args)
    eta = cfg.require("dist", "eta")
    summary["eta"] = eta
    return bcirc_pmf(eta, params.alpha_a, params.beta_a, params.a0, clone, kmax), tail_constant("bcirc", eta=eta, a0=params.a0, **tail_args)


VALUE_COLUMNS = (("prob", "prob"), ("mean_count", "expected_count"), ("mean_count", "theory_count"), ("mean_count", "mean_count"))


def cmd_compare(emp_path, theory_path, kmin: int, kmax: int | None, se_multiplier: float, plot_path, report_path):
    emp_meta, emp = read_csv(emp_path)
    _, th = read_csv(theory_path)
    if "k" not in emp or "k" not in th:
        raise ConfigError("both files need a k column")
    for ecol, tcol in VALUE_COLUMNS:
        if ecol in emp and tcol in th:
            break
    else:
        raise ConfigError(f"incompatible schemas: empirical {sorted(emp)} vs theory {sorted(th)}")
    reps = int(float(emp_meta.get("reps", 0))) or None
    e_k, t_k = emp["k"].astype(int), th["k"].astype(int)
    top = int(max(e_k.max(initial=0), t_k.max(initial=0)))
    e_val = np.zeros(top + 1)
    e_val[e_k] = emp[ecol]
    e_se = np.zeros(top + 1)
    if "std_err" in emp:
        e_se[e_k] = emp["std_err"]
    t_val = np.zeros(top + 1)
    t_val[t_k] = th[tcol]
    kmax = top if kmax is None else kmax
    ks = list(range(kmin, kmax + 1))
    vals = np.array([e_val[k] if k <= top else 0.0 for k in ks])
    ses = np.array([e_se[k] if k <= top else 0.0 for k in ks])
    zero = (vals == 0) & (reps is not None)
    if ecol == "prob":
        zero |= (vals == 1) & (reps is not None)
    if reps:
        ses = np.where(zero, 3.0 / reps, ses)
    theory = np.array([t_val[k] if k <= top else 0.0 for k in ks])
    tv = tv_distance(e_val, t_val) if e_val.sum() > 0 and t_val.sum() > 0 else math.nan
    report = compare_arrays(ks, vals, ses, theory, zero, se_multiplier, tv, {"empirical": str(emp_path), "theory": str(theory_path)})
    rows = [(r.k, r.empirical, r.theory, se_multiplier * r.se) for r in report.rows]
    write_csv(plot_path, ["k", "empirical", "theory", "band"], rows, {"generator": f"mutfreq {__version__}", "command": "compare"})
    if report_path:
        Path(report_path).write_text(report.to_json() + "\n")
    return report


def cmd_limits(cfg: ExperimentConfig) -> dict:
    params = _two_type(cfg)
    try:
        reg = limit_constants(params)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    clone = tail_constant("clone", lambda_a=params.lambda_a, alpha_b=params.alpha_b, beta_b=params.beta_b)
    table = {
        "lambda_a": params.lambda_a,
        "lambda_b": params.lambda_b,
        "regime": reg.regime,
        "scaling": reg.scaling,
        "constant": reg.constant if reg.constant is not None else "random limit",
        **reg.extra,
        "clone_tail_exponent": 1 + params.lambda_a / params.lambda_b if params.lambda_b > 0 else "not applicable",
        "clone_tail_constant": clone if clone is not None else "not applicable",
    }
    return table


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mutfreq", description=__doc__)
    ap.add_argument("--version", action="version", version=f"mutfreq {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("config", help="INI experiment file")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE")
        p.add_argument("--out-dir", help="override output.dir")

    p = sub.add_parser("simulate", help="run replicates and write an empirical pmf or mean SFS")
    with_config(p)
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: all cores)")
    p = sub.add_parser("dist", help="write an analytic pmf and summary")
    with_config(p)
    p = sub.add_parser("compare", help="compare an empirical CSV against a theory CSV")
    p.add_argument("empirical")
    p.add_argument("theory")
    p.add_argument("--kmin", type=int, default=0)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--se-multiplier", type=float, default=3.0)
    p.add_argument("--plot-data", default="compare_plot.csv")
    p.add_argument("--report", default=None, help="JSON report path")
    p.add_argument("--strict", action="store_true", help="exit 1 when the aggregate verdict fails")
    p = sub.add_parser("limits", help="print regime and limit constants of a two-type model")
    with_config(p)
    p.add_argument("--json", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compare":
            report = cmd_compare(args.empirical, args.theory, args.kmin, args.kmax, args.se_multiplier, args.plot_data, args.report)
            print(report.table())
            return 1 if args.strict and not report.passed else EXIT_OK
        overrides = list(args.overrides)
        if args.out_dir:
            overrides.append(f"output.dir={args.out_dir}")
        cfg = load_config(args.config, overrides)
        if args.command == "simulate":
            workers = default_workers() if args.workers is None else args.workers
            if workers < 1:
                raise ConfigError("--workers must be >= 1")
            for path in cmd_simulate(cfg, workers):
                print(path)
        elif args.command == "dist":
            for path in cmd_dist(cfg):
                print(path)
        else:
            table = cmd_limits(cfg)
            if args.json:
                print(json.dumps(table, indent=2))
            else:
                width = max(len(k) for k in table)
                for key, value in table.items():
                    print(f"{key:<{width}}  {value}")
    except ConfigError as err:
        print(f"mutfreq: configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (AllReplicatesDiscarded, EventCapExceeded) as err:
        print(f"mutfreq: degenerate run: {err}", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
