"""Command-line surface: fit, compare, simulate, mc-study, rerun.

Every command writes its outputs into ``--out-dir`` together with a
``manifest.txt`` (flat ``key = value`` lines) whose recorded argument
vector reproduces the outputs bit-identically when replayed with
``bellgarch rerun``.

Exit codes: 0 success, 2 input/config error, 3 numerical failure.
"""

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, baselines, diagnostics, simstudy
from .datasets import (
    DataFormatError,
    load_count_csv,
    sha256_of,
    write_count_csv,
)
from .estimation import FitError, FitOptions, LikelihoodError, fit_cml
from .ingarch import (
    LINEAR,
    NONLINEAR,
    IngarchSpec,
    SimulationError,
    simulate,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _resolve_seed(args):
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("BELLGARCH_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise DataFormatError(f"BELLGARCH_SEED={env!r} is not an integer")
    return 0


def _write_manifest(out_dir, argv, extra):
    lines = [
        f"argv = {json.dumps([str(a) for a in argv])}",
        f"version = {__version__}",
    ]
    for key, val in extra.items():
        lines.append(f"{key} = {val}")
    (Path(out_dir) / "manifest.txt").write_text("\n".join(lines) + "\n")


def read_manifest(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        if " = " in line:
            key, val = line.split(" = ", 1)
            out[key.strip()] = val.strip()
    return out


def _write_kv(path, pairs):
    with open(path, "w") as fh:
        for key, val in pairs:
            fh.write(f"{key} = {val}\n")


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _fit_report_pairs(label, fit):
    pairs = [("model", label), ("converged", fit.converged),
             ("iterations", fit.iterations), ("k", fit.k),
             ("n_eff", fit.n_eff)]
    for name, val, se in zip(fit.param_names, fit.coefficients, fit.std_errors):
        pairs.append((name, _fmt(float(val))))
        pairs.append((f"se_{name}", _fmt(float(se)) if np.isfinite(se) else "NA"))
    pairs += [("loglik", _fmt(fit.loglik)), ("aic", _fmt(fit.aic)),
              ("bic", _fmt(fit.bic))]
    for note in fit.warnings:
        pairs.append(("warning", note))
    return pairs


def _emit_plot_bundle(out_dir, series, fit, max_lag):
    report = diagnostics.build_report(fit, series, max_lag=max_lag)
    x = series.values
    with open(out_dir / "predictions.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "observed", "predicted", "pearson_residual"])
        for t in range(len(x)):
            w.writerow([t + 1, int(x[t]), _fmt(float(report.predictions[t])),
                        _fmt(float(report.residuals[t]))])
    with open(out_dir / "acf_pacf.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lag", "acf", "pacf"])
        for i, (a, p) in enumerate(zip(report.acf, report.pacf), start=1):
            w.writerow([i, _fmt(float(a)), _fmt(float(p))])
    cp = report.cum_periodogram
    with open(out_dir / "cum_periodogram.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frequency", "ordinate", "reference", "band_half_width"])
        for f, o, r in zip(cp.frequencies, cp.ordinates, cp.reference):
            w.writerow([_fmt(float(f)), _fmt(float(o)), _fmt(float(r)),
                        _fmt(cp.band_half_width)])
    counts = np.bincount(x)
    with open(out_dir / "histogram.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["value", "count"])
        for v, c in enumerate(counts):
            w.writerow([v, int(c)])
    return report


def _make_options(args, seed):
    return FitOptions(multi_start=getattr(args, "multi_start", False), seed=seed,
                      lambda0_override=getattr(args, "lambda0", None))


def _parse_init(text, link):
    vals = [float(v) for v in text.split(",")]
    want = 4 if link == NONLINEAR else 3
    if len(vals) != want:
        raise DataFormatError(
            f"--init expects {want} comma-separated values for link={link}"
        )
    return IngarchSpec.from_theta(np.array(vals), link)


def cmd_fit(args):
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = _resolve_seed(args)
    series = load_count_csv(args.data)
    link = args.link
    init = _parse_init(args.init, link) if args.init else None
    options = _make_options(args, seed)

    if args.model == "nb":
        nb = baselines.fit_nb_ingarch(series, init=init, options=options)
        pairs = [("model", "nb-ingarch"), ("k", nb.k), ("n_eff", nb.n_eff)]
        for name, val in zip(["alpha0", "alpha1", "beta1"], nb.coefficients):
            pairs.append((name, _fmt(float(val))))
        pairs += [("v1", _fmt(nb.v1) if math.isfinite(nb.v1) else "NA"),
                  ("v2", _fmt(nb.v2) if math.isfinite(nb.v2) else "NA"),
                  ("overdispersed", nb.overdispersed),
                  ("loglik", _fmt(nb.loglik)), ("aic", _fmt(nb.aic)),
                  ("bic", _fmt(nb.bic))]
        for note in nb.warnings:
            pairs.append(("warning", note))
        fit_for_plots = nb.poisson_fit
    elif args.model == "poisson":
        fit = baselines.fit_poisson_ingarch(series, init=init, options=options)
        pairs = _fit_report_pairs("poisson-ingarch", fit)
        fit_for_plots = fit
    else:
        fit = fit_cml(series, link=link, init=init, options=options)
        pairs = _fit_report_pairs(f"bell-ingarch-{link}", fit)
        fit_for_plots = fit

    _write_kv(out_dir / "fit_report.txt", pairs)
    _emit_plot_bundle(out_dir, series, fit_for_plots, args.max_lag)
    argv = ["fit", "--data", str(Path(args.data).resolve()), "--model", args.model,
            "--link", link, "--seed", str(seed), "--max-lag", str(args.max_lag)]
    if args.init:
        argv += ["--init", args.init]
    if args.multi_start:
        argv.append("--multi-start")
    _write_manifest(out_dir, argv, {"seed": seed,
                                    "input_sha256": sha256_of(args.data)})
    return EXIT_OK


def cmd_compare(args):
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = _resolve_seed(args)
    series = load_count_csv(args.data)
    options = _make_options(args, seed)
    models = [m.strip() for m in args.models.split(",")]
    rows = []
    for model in models:
        try:
            if model == "bell":
                f = fit_cml(series, link=args.link, options=options)
                rows.append((model, f.k, f.loglik, f.aic, f.bic, ""))
            elif model == "poisson":
                f = baselines.fit_poisson_ingarch(series, options=options)
                rows.append((model, f.k, f.loglik, f.aic, f.bic, ""))
            elif model == "nb":
                f = baselines.fit_nb_ingarch(series, options=options)
                rows.append((model, f.k, f.loglik, f.aic, f.bic, ""))
            else:
                raise DataFormatError(f"unknown model {model!r}")
        except (FitError, LikelihoodError) as exc:
            rows.append((model, "", "", "", "", f"failed: {exc}"))
    ranked = sorted(
        (r for r in rows if r[5] == ""), key=lambda r: r[3]
    )
    rank_of = {r[0]: i + 1 for i, r in enumerate(ranked)}
    with open(out_dir / "comparison.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "k", "loglik", "aic", "bic", "aic_rank", "note"])
        for model, k, ll, aic, bic, note in rows:
            w.writerow([model, k, _fmt(ll) if ll != "" else "",
                        _fmt(aic) if aic != "" else "",
                        _fmt(bic) if bic != "" else "",
                        rank_of.get(model, ""), note])
    argv = ["compare", "--data", str(Path(args.data).resolve()),
            "--models", args.models, "--link", args.link, "--seed", str(seed)]
    _write_manifest(out_dir, argv, {"seed": seed,
                                    "input_sha256": sha256_of(args.data)})
    return EXIT_OK


def _spec_from_args(args):
    if args.link == NONLINEAR:
        if args.gamma is None:
            raise DataFormatError("nonlinear link requires --gamma")
        return IngarchSpec.nonlinear11(args.alpha0, args.alpha1, args.beta1,
                                       args.gamma)
    return IngarchSpec.linear11(args.alpha0, args.alpha1, args.beta1)


def cmd_simulate(args):
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = _resolve_seed(args)
    spec = _spec_from_args(args)
    series, path = simulate(spec, args.n, burn_in=args.burn_in, seed=seed)
    write_count_csv(series, out_dir / "series.csv")
    if args.emit_lambda:
        with open(out_dir / "lambda_path.csv", "w", newline="") as fh:
            fh.write("lambda\n")
            for v in path.lambdas:
                fh.write(f"{v:.12g}\n")
    argv = ["simulate", "--alpha0", str(args.alpha0), "--alpha1", str(args.alpha1),
            "--beta1", str(args.beta1), "--link", args.link,
            "--n", str(args.n), "--burn-in", str(args.burn_in),
            "--seed", str(seed)]
    if args.gamma is not None:
        argv += ["--gamma", str(args.gamma)]
    if args.emit_lambda:
        argv.append("--emit-lambda")
    _write_manifest(out_dir, argv, {"seed": seed})
    return EXIT_OK


def _config_to_mc(config):
    if "scenario" in config:
        presets = simstudy.scenario_presets()
        name = config["scenario"]
        if name not in presets:
            raise DataFormatError(f"unknown scenario {name!r}")
        spec = presets[name]
    else:
        link = config.get("link", LINEAR)
        if link == NONLINEAR:
            spec = IngarchSpec.nonlinear11(config["alpha0"], config["alpha1"],
                                           config["beta1"], config["gamma"])
        else:
            spec = IngarchSpec.linear11(config["alpha0"], config["alpha1"],
                                        config["beta1"])
        name = config.get("name", "custom")
    return simstudy.McConfig(
        scenario=spec,
        scenario_name=name,
        sample_sizes=tuple(config.get("sample_sizes",
                                      simstudy.DEFAULT_SAMPLE_SIZES)),
        replications=config.get("replications", simstudy.DEFAULT_REPLICATIONS),
        seed=config.get("seed", 0),
        init_jitter=config.get("init_jitter", simstudy.DEFAULT_INIT_JITTER),
        burn_in=config.get("burn_in", simstudy.DEFAULT_BURN_IN),
    )


def cmd_mc_study(args):
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        config = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"cannot read config {args.config}: {exc}") from exc
    try:
        mc = _config_to_mc(config)
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"invalid mc-study config: {exc}") from exc
    report = simstudy.run_study(mc)
    report.write_csv(out_dir / "mc_report.csv")
    argv = ["mc-study", "--config", str(Path(args.config).resolve())]
    _write_manifest(out_dir, argv,
                    {"seed": mc.seed, "input_sha256": sha256_of(args.config)})
    return EXIT_OK


def cmd_rerun(args):
    manifest = read_manifest(args.manifest)
    if "argv" not in manifest:
        raise DataFormatError(f"{args.manifest} has no recorded argv")
    argv = json.loads(manifest["argv"])
    return main([*argv, "--out-dir", args.out_dir])


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bellgarch",
        description="Bell-INGARCH modelling of overdispersed count time series",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a model to a count CSV")
    p_fit.add_argument("--data", required=True)
    p_fit.add_argument("--model", choices=["bell", "poisson", "nb"],
                       default="bell")
    p_fit.add_argument("--link", choices=[LINEAR, NONLINEAR], default=LINEAR)
    p_fit.add_argument("--init", help="comma-separated starting coefficients")
    p_fit.add_argument("--multi-start", action="store_true")
    p_fit.add_argument("--seed", type=int)
    p_fit.add_argument("--lambda0", type=float)
    p_fit.add_argument("--max-lag", type=int, default=40)
    p_fit.add_argument("--out-dir", required=True)
    p_fit.set_defaults(func=cmd_fit)

    p_cmp = sub.add_parser("compare", help="goodness-of-fit comparison table")
    p_cmp.add_argument("--data", required=True)
    p_cmp.add_argument("--models", default="bell,poisson,nb")
    p_cmp.add_argument("--link", choices=[LINEAR, NONLINEAR], default=LINEAR)
    p_cmp.add_argument("--multi-start", action="store_true")
    p_cmp.add_argument("--seed", type=int)
    p_cmp.add_argument("--out-dir", required=True)
    p_cmp.set_defaults(func=cmd_compare)

    p_sim = sub.add_parser("simulate", help="simulate a model path")
    p_sim.add_argument("--alpha0", type=float, required=True)
    p_sim.add_argument("--alpha1", type=float, required=True)
    p_sim.add_argument("--beta1", type=float, required=True)
    p_sim.add_argument("--gamma", type=float)
    p_sim.add_argument("--link", choices=[LINEAR, NONLINEAR], default=LINEAR)
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--burn-in", type=int, default=500)
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--emit-lambda", action="store_true")
    p_sim.add_argument("--out-dir", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_mc = sub.add_parser("mc-study", help="Monte Carlo replication study")
    p_mc.add_argument("--config", required=True)
    p_mc.add_argument("--out-dir", required=True)
    p_mc.set_defaults(func=cmd_mc_study)

    p_rr = sub.add_parser("rerun", help="replay a recorded manifest")
    p_rr.add_argument("--manifest", required=True)
    p_rr.add_argument("--out-dir", required=True)
    p_rr.set_defaults(func=cmd_rerun)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (DataFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FitError, LikelihoodError, SimulationError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
