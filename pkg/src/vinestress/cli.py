"""Batch command line: transform -> fit/stress -> benchmark -> simulate.

Every subcommand is deterministic given its flags (plus seed where one
applies), writes machine-readable outputs, and logs one ``key=value`` line
per stage.  Plotting is delegated to external tools; the outputs are tidy
CSV/JSON files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import datagen
from .baselines import detect_crossings, fit_expectile, fit_linear_quantile
from .bicop import ALL_FAMILIES, DEFAULT_FAMILIES, CopulaFamily, select_family
from .dvine import DVineModel, conditional_quantile
from .exceptions import VinestressError
from .marginals import (
    autocorr_check,
    clamp_unit,
    difference,
    kendall_tau_matrix,
    pit_transform,
)
from .stress import run_scenario_matrix

BENCHMARK_ALPHA_GRID = (0.05, 0.25, 0.5, 0.75, 0.95)


def _log(stage: str, **kv) -> None:
    tail = " ".join(f"{k}={v}" for k, v in kv.items())
    print(f"{stage}: {tail}")


def _parse_floats(text: str, name: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise VinestressError(f"cannot parse {name} list: {text!r}") from None
    if not vals:
        raise VinestressError(f"{name} list is empty")
    return vals


def _parse_families(text: str | None):
    if not text:
        return DEFAULT_FAMILIES
    by_name = {f.value: f for f in ALL_FAMILIES}
    out = []
    for raw in text.split(","):
        name = raw.strip().lower()
        if not name:
            continue
        if name not in by_name:
            raise VinestressError(
                f"unknown family {name!r}; choose from {', '.join(by_name)}"
            )
        out.append(by_name[name])
    if not out:
        raise VinestressError("family list is empty")
    return tuple(out)


def cmd_transform(args) -> int:
    panel = datagen.read_panel(args.input)
    diff = difference(panel)
    pseudo = pit_transform(diff)
    report = autocorr_check(diff, max_lag=min(args.max_lag, diff.values.shape[0] - 1))
    tau = kendall_tau_matrix(pseudo)

    out = Path(args.output)
    datagen.write_pseudo(pseudo, out)
    diagnostics = {
        "labels": list(pseudo.labels),
        "kendall_tau": tau.tolist(),
        "autocorr_threshold": report.threshold,
        "autocorr": {lab: report.acf[lab].tolist() for lab in pseudo.labels},
        "autocorr_flagged": list(report.flagged),
        "n_rows": pseudo.n_rows,
    }
    diag_path = out.with_suffix(".diagnostics.json")
    with diag_path.open("w") as fh:
        json.dump(diagnostics, fh, indent=2)
    if args.verbose:
        for lab in pseudo.labels:
            _log("transform.acf", column=lab, flagged=lab in report.flagged)
    _log(
        "transform",
        status="ok",
        input=args.input,
        output=str(out),
        rows=pseudo.n_rows,
        cols=len(pseudo.labels),
        flagged=",".join(report.flagged) or "-",
        diagnostics=str(diag_path),
        marginals=str(datagen.marginals_path(out)),
    )
    return 0


def cmd_stress(args) -> int:
    pseudo = datagen.read_pseudo(args.input, require_marginals=True)
    scenario = datagen.read_scenario(args.scenario)
    kappas = _parse_floats(args.kappa, "kappa") if args.kappa else scenario["kappas"]
    grid = (
        _parse_floats(args.alpha_grid, "alpha-grid")
        if args.alpha_grid
        else scenario["alpha_grid"]
    )
    lag = args.lag if args.lag is not None else scenario["lag"]
    families = _parse_families(args.families)

    matrix = run_scenario_matrix(
        pseudo,
        scenario["stressed"],
        kappas,
        alpha_grid=grid,
        lag=lag,
        families=families,
        force=not args.no_force,
    )

    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    report_path = outdir / "report.csv"
    with report_path.open("w", newline="") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=[
                "response",
                "kappa",
                "alpha",
                "q_copula",
                "q_pd_scale",
                "families_on_path",
            ],
        )
        writer.writeheader()
        for row in matrix.rows():
            writer.writerow(row)

    plot_path = outdir / "plot_data.csv"
    lo_a, hi_a = matrix.alpha_grid[0], matrix.alpha_grid[-1]
    with plot_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["response", "kappa", "median", "lo", "hi", "median_pd", "lo_pd", "hi_pd"]
        )
        for rep in matrix.reports:
            for pred in rep.predictions:
                mid = pred.alphas.index(0.5) if 0.5 in pred.alphas else len(pred.alphas) // 2
                scale = pred.q_scale if pred.q_scale is not None else [float("nan")] * len(pred.alphas)
                writer.writerow(
                    [
                        pred.response,
                        rep.scenario.kappa,
                        datagen._FMT % pred.q_copula[mid],
                        datagen._FMT % pred.q_copula[0],
                        datagen._FMT % pred.q_copula[-1],
                        datagen._FMT % scale[mid],
                        datagen._FMT % scale[0],
                        datagen._FMT % scale[-1],
                    ]
                )

    provenance = {
        "stressed": list(matrix.stressed),
        "kappas": list(matrix.kappas),
        "alpha_grid": list(matrix.alpha_grid),
        "lag": matrix.lag,
        "aligned_rows": matrix.reports[0].n_rows,
        "forced": not args.no_force,
        "families": [f.value for f in families],
        "monotone_in_kappa": matrix.monotone_in_kappa,
        "skipped": [list(s) for s in matrix.reports[0].skipped],
        "models": {
            pred.response: pred.model.to_dict()
            for pred in matrix.reports[0].predictions
        },
        "independent_stressed": {
            pred.response: list(pred.independent_stressed)
            for pred in matrix.reports[0].predictions
        },
    }
    with (outdir / "provenance.json").open("w") as fh:
        json.dump(provenance, fh, indent=2)

    _log(
        "stress",
        status="ok",
        input=args.input,
        scenario=args.scenario,
        output=str(outdir),
        responses=len(matrix.reports[0].predictions),
        kappas=",".join(str(k) for k in matrix.kappas),
        lag=lag,
        rows=matrix.reports[0].n_rows,
        skipped=len(matrix.reports[0].skipped),
    )
    return 0


def cmd_benchmark(args) -> int:
    pseudo = datagen.read_pseudo(args.input, require_marginals=True)
    resp, cov = args.response, args.covariate
    for lab in (resp, cov):
        pseudo.index(lab)  # raises for unknown labels
    if resp == cov:
        raise VinestressError("response and covariate must differ")
    grid_levels = (
        _parse_floats(args.alpha_grid, "alpha-grid")
        if args.alpha_grid
        else BENCHMARK_ALPHA_GRID
    )
    families = _parse_families(args.families)

    ecdf_y, ecdf_x = pseudo.ecdf(resp), pseudo.ecdf(cov)
    y = ecdf_y.quantile(pseudo.column(resp))
    x = ecdf_x.quantile(pseudo.column(cov))

    lo, hi = float(np.min(x)), float(np.max(x))
    margin = args.eval_margin * (hi - lo)
    x_eval = np.linspace(lo - margin, hi + margin, args.eval_points)

    qr_fits = [fit_linear_quantile(x, y, a) for a in grid_levels]
    ex_fits = [fit_expectile(x, y, a) for a in grid_levels]
    pair = select_family(pseudo.column(resp), pseudo.column(cov), families)
    model = DVineModel(order=(resp, cov), pairs=((pair,),))
    u_eval = clamp_unit(ecdf_x.evaluate(x_eval))[:, None]
    dvine_curves = {
        a: ecdf_y.quantile(conditional_quantile(model, a, u_eval)) for a in grid_levels
    }

    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    curves_path = outdir / "curves.csv"
    with curves_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "level", "x", "predicted_y"])
        for a, qf, ef in zip(grid_levels, qr_fits, ex_fits):
            for method, pred in (
                ("quantile", qf.predict(x_eval)),
                ("expectile", ef.predict(x_eval)),
                ("dvine", dvine_curves[a]),
            ):
                for xi, yi in zip(x_eval, pred):
                    writer.writerow([method, a, datagen._FMT % xi, datagen._FMT % yi])

    qr_cross = detect_crossings(qr_fits, x_eval)
    ex_cross = detect_crossings(ex_fits, x_eval)
    dv = np.stack([dvine_curves[a] for a in grid_levels])
    dv_cross = int(np.sum(dv[:-1] - dv[1:] > 1e-12))
    crossings = {
        "levels": list(grid_levels),
        "quantile": {"total": qr_cross.total, "by_pair": list(qr_cross.by_pair)},
        "expectile": {"total": ex_cross.total, "by_pair": list(ex_cross.by_pair)},
        "dvine": {"total": dv_cross},
        "pair_copula": pair.to_dict(),
        "eval_grid": {"lo": x_eval[0], "hi": x_eval[-1], "points": args.eval_points},
    }
    with (outdir / "crossings.json").open("w") as fh:
        json.dump(crossings, fh, indent=2)

    _log(
        "benchmark",
        status="ok",
        response=resp,
        covariate=cov,
        output=str(outdir),
        levels=len(grid_levels),
        quantile_crossings=qr_cross.total,
        expectile_crossings=ex_cross.total,
        dvine_crossings=dv_cross,
    )
    return 0


def cmd_simulate(args) -> int:
    if args.spec:
        spec = datagen.read_spec(args.spec)
    else:
        spec = datagen.default_spec(rows=args.rows)
    if args.seed is not None:
        spec = datagen.GroundTruthSpec.from_dict({**spec.to_dict(), "seed": args.seed})
    panel, meta = datagen.generate_panel(spec)
    out = Path(args.output)
    datagen.write_panel(panel, out)
    meta_path = out.with_suffix(".meta.json")
    with meta_path.open("w") as fh:
        json.dump(meta, fh, indent=2)
    if meta["clip_warning"]:
        _log("simulate.warning", clipped_fraction=meta["clipped_fraction"])
    _log(
        "simulate",
        status="ok",
        output=str(out),
        rows=panel.n_rows,
        cols=len(panel.labels),
        seed=meta["seed"],
        randomized=meta["randomized"],
        meta=str(meta_path),
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vinestress",
        description="D-vine copula quantile regression stress testing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="difference a PD panel and map to the copula scale")
    p.add_argument("--input", required=True, help="raw panel CSV")
    p.add_argument("--output", required=True, help="pseudo-observation CSV to write")
    p.add_argument("--max-lag", type=int, default=6, help="autocorrelation check depth")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("stress", help="run a stress scenario matrix")
    p.add_argument("--input", required=True, help="pseudo-observation CSV")
    p.add_argument("--scenario", required=True, help="scenario JSON")
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--kappa", help="override stress levels, comma separated")
    p.add_argument("--alpha-grid", help="override reporting grid, comma separated")
    p.add_argument("--lag", type=int, default=None, help="override covariate lag")
    p.add_argument("--families", help="candidate family whitelist, comma separated")
    p.add_argument(
        "--no-force",
        action="store_true",
        help="let selection drop stressed covariates instead of forcing them",
    )
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_stress)

    p = sub.add_parser("benchmark", help="compare linear QR, expectiles and D-vine QR on one pair")
    p.add_argument("--input", required=True, help="pseudo-observation CSV")
    p.add_argument("--response", required=True)
    p.add_argument("--covariate", required=True)
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--alpha-grid", help="levels, comma separated")
    p.add_argument("--families", help="candidate family whitelist, comma separated")
    p.add_argument("--eval-points", type=int, default=101)
    p.add_argument(
        "--eval-margin",
        type=float,
        default=0.25,
        help="fraction of the covariate range to extrapolate on each side",
    )
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("simulate", help="generate a synthetic ground-truth panel")
    p.add_argument("--spec", help="ground-truth spec JSON (bundled default if omitted)")
    p.add_argument("--output", required=True, help="panel CSV to write")
    p.add_argument("--rows", type=int, default=1000, help="rows for the default spec")
    p.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (VinestressError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
