"""Command-line entry point.

Subcommands: nmse-sweep, se-sweep, ecdf, pilot-sweep, validate.  Exit codes:
0 success, 1 config or invariant-suite failure, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigBundle, ConfigError, desk_config, load_config, validate_config
from .experiments import (DEFAULT_ECDF_SNRS, DEFAULT_PILOT_SNRS, ExperimentPlan,
                          emit_csv, emit_ecdf_csv, run_ecdf, run_nmse_sweep,
                          run_pilot_sweep, run_se_sweep)
from .propagation import load_paths_csv
from .svgplot import LineSeries, render_line_chart
from .validate import run_validation

FULL_SCALE_RX = 64
FULL_SCALE_SUBCARRIERS = 2048   # pilot-sweep only; keeps CP duration via N/2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chest",
        description="OFDM uplink channel-estimation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, with_out: bool = True):
        p.add_argument("--config", type=Path, default=None,
                       help="JSON config file (default: built-in desk config)")
        if with_out:
            p.add_argument("--out", type=Path, required=True,
                           help="output directory for CSV and SVG artifacts")
        p.add_argument("--trials", type=int, default=None,
                       help="override the configured Monte Carlo trial count")
        p.add_argument("--seed", type=int, default=None,
                       help="override the configured seed")
        p.add_argument("--full-scale", action="store_true",
                       help="run at the large dimensions (64 antennas; pilot "
                            "sweeps also widen to 2048 subcarriers); "
                            "several minutes instead of seconds")
        p.add_argument("--paths", type=Path, default=None,
                       help="CSV path set to use instead of drawing one")
        p.add_argument("--methods", type=str, default=None,
                       help="comma-separated method subset")
        p.add_argument("--workers", type=int, default=1,
                       help="worker processes (results are identical for any value)")

    for kind in ("nmse-sweep", "se-sweep", "ecdf", "pilot-sweep"):
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        common(p)
        if kind == "ecdf":
            p.add_argument("--snr", type=str, default=None,
                           help="comma-separated SNR points in dB; write "
                                "--snr=-10,5 when the list starts negative "
                                f"(default {','.join(str(s) for s in DEFAULT_ECDF_SNRS)})")
        if kind == "pilot-sweep":
            p.add_argument("--snr", type=str, default=None,
                           help="comma-separated SNR points in dB; write "
                                "--snr=-15,0 when the list starts negative "
                                f"(default {','.join(str(s) for s in DEFAULT_PILOT_SNRS)})")
            p.add_argument("--pilots", type=str, default=None,
                           help="comma-separated pilot counts (default: powers of two)")

    v = sub.add_parser("validate", help="run the invariant suite")
    common(v, with_out=False)
    return parser


def _load_bundle(args) -> ConfigBundle:
    bundle = desk_config() if args.config is None else load_config(args.config)
    system = bundle.system
    if args.trials is not None:
        system = replace(system, n_trials=args.trials)
    if args.seed is not None:
        system = replace(system, seed=args.seed)
    if args.full_scale:
        system = replace(system, n_rx=FULL_SCALE_RX)
        if args.command == "pilot-sweep":
            scale = FULL_SCALE_SUBCARRIERS // system.n_subcarriers
            system = replace(system, n_subcarriers=FULL_SCALE_SUBCARRIERS,
                             cp_length=system.cp_length * scale)
    return validate_config(system, bundle.scenario, bundle.estimator)


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def _parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc


def _make_plan(args, bundle: ConfigBundle) -> ExperimentPlan:
    methods = tuple(args.methods.split(",")) if args.methods else ()
    environment = load_paths_csv(args.paths) if args.paths else None
    extra = {}
    if args.command == "ecdf" and args.snr:
        extra["snr_points"] = _parse_floats(args.snr)
    if args.command == "pilot-sweep":
        if args.snr:
            extra["pilot_snrs"] = _parse_floats(args.snr)
        if args.pilots:
            extra["pilot_counts"] = _parse_ints(args.pilots)
    return ExperimentPlan(kind=args.command, bundle=bundle, methods=methods,
                          workers=args.workers, environment=environment, **extra)


def _nmse_db(records, method):
    pts = sorted((r.snr_db, r.nmse_emp) for r in records if r.method == method)
    x = np.array([p[0] for p in pts])
    y = 10 * np.log10(np.maximum([p[1] for p in pts], 1e-300))
    return x, y


def _run_nmse(plan: ExperimentPlan, out: Path) -> None:
    records = run_nmse_sweep(plan)
    emit_csv(records, out / "nmse.csv")
    series = []
    for method in plan.methods:
        x, y = _nmse_db(records, method)
        series.append(LineSeries(label=method, x=x, y=y))
    emdt = [r for r in records if r.method == "emdt" and r.nmse_analytic]
    if emdt:
        x = np.array([r.snr_db for r in sorted(emdt, key=lambda r: r.snr_db)])
        tot = np.array([r.nmse_analytic.total
                        for r in sorted(emdt, key=lambda r: r.snr_db)])
        series.append(LineSeries(label="emdt analytic", x=x,
                                 y=10 * np.log10(tot), dashed=True))
    render_line_chart(series, out / "nmse.svg", title="Channel estimation NMSE",
                      xlabel="SNR (dB)", ylabel="NMSE (dB)")
    print(f"wrote {out / 'nmse.csv'} ({len(records)} records) and nmse.svg")


def _run_se(plan: ExperimentPlan, out: Path) -> None:
    records = run_se_sweep(plan)
    emit_csv(records, out / "se.csv")
    series = []
    for method in plan.methods:
        pts = sorted((r.snr_db, r.spectral_efficiency)
                     for r in records if r.method == method)
        series.append(LineSeries(label=method,
                                 x=np.array([p[0] for p in pts]),
                                 y=np.array([p[1] for p in pts]),
                                 dashed=(method == "ideal")))
    render_line_chart(series, out / "se.svg", title="Genie-aided spectral efficiency",
                      xlabel="SNR (dB)", ylabel="SE (bit/s/Hz)")
    print(f"wrote {out / 'se.csv'} ({len(records)} records) and se.svg")


def _run_ecdf(plan: ExperimentPlan, out: Path) -> None:
    tables = run_ecdf(plan)
    emit_ecdf_csv(tables, out / "ecdf.csv")
    series = []
    probs = np.linspace(0.005, 1.0, 200)
    for (method, snr_db) in sorted(tables):
        table = tables[(method, snr_db)]
        q = np.array([table.quantile(p) for p in probs])
        with np.errstate(divide="ignore"):
            q_db = 10 * np.log10(q)
        series.append(LineSeries(label=f"{method} @ {snr_db:g} dB", x=q_db, y=probs))
    render_line_chart(series, out / "ecdf.svg",
                      title="Post-combining SNR distribution",
                      xlabel="post-combining SNR (dB)", ylabel="cumulative fraction")
    print(f"wrote {out / 'ecdf.csv'} ({len(tables)} tables) and ecdf.svg")


def _run_pilot(plan: ExperimentPlan, out: Path) -> None:
    records = run_pilot_sweep(plan)
    emit_csv(records, out / "pilot.csv")
    nmse_series, se_series = [], []
    keys = sorted({(r.method, r.snr_db) for r in records})
    for method, snr_db in keys:
        pts = sorted((r.n_pilots, r.nmse_emp, r.spectral_efficiency)
                     for r in records if r.method == method and r.snr_db == snr_db)
        x = np.log2([p[0] for p in pts])
        label = f"{method} @ {snr_db:g} dB"
        nmse_series.append(LineSeries(
            label=label, x=x, y=10 * np.log10([p[1] for p in pts])))
        se_series.append(LineSeries(label=label, x=x,
                                    y=np.array([p[2] for p in pts])))
    render_line_chart(nmse_series, out / "pilot_nmse.svg",
                      title="Pilot-grid NMSE vs pilot count",
                      xlabel="log2(pilot count)", ylabel="NMSE (dB)")
    render_line_chart(se_series, out / "pilot_se.svg",
                      title="Overhead-adjusted spectral efficiency vs pilot count",
                      xlabel="log2(pilot count)", ylabel="SE (bit/s/Hz)")
    print(f"wrote {out / 'pilot.csv'} ({len(records)} records), "
          f"pilot_nmse.svg, pilot_se.svg")


def _run_validate(args) -> int:
    bundle = _load_bundle(args)
    results = run_validation(bundle)
    failed = 0
    for res in results:
        tag = "PASS" if res.passed else "FAIL"
        print(f"[{tag}] {res.name}: {res.detail}")
        failed += 0 if res.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return _run_validate(args)
        bundle = _load_bundle(args)
        plan = _make_plan(args, bundle)
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        runner = {"nmse-sweep": _run_nmse, "se-sweep": _run_se,
                  "ecdf": _run_ecdf, "pilot-sweep": _run_pilot}[args.command]
        runner(plan, out)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:   # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
