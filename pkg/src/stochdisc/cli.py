"""Command-line front end.

Subcommands:

* ``fit``     run ingestion -> estimation per country from a config file and
              emit per-country JSON reports, machine-readable aggregates and a
              rounded human-readable table
* ``curve``   emit discount-curve data (closed form, Monte Carlo, or both with
              a z-score comparison line)
* ``phase``   emit scale-free phase-plane coordinates for a set of reports
* ``negprob`` emit the stationary negative-rate probability on a parameter grid

All file output uses shortest round-trip float formatting, so a fixed config
and seed reproduce byte-identical files.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from pathlib import Path

import numpy as np

from .analytics import NondimParams, classify_regime, prob_negative_stationary
from .errors import StochdiscError
from .estimation import EstimationReport, build_report
from .mc import McConfig, discount_curve_exact, estimate_discount
from .models import FellerParams, LognormalParams, OuParams
from .pipeline import CPI_KIND, NOMINAL_KIND, load_raw_csv, real_rate_series

__all__ = ["main"]

EXIT_OK = 0
EXIT_ALL_FAILED = 1
EXIT_PARTIAL = 2

DEFAULT_T_YEARS = 10.0
DEFAULT_MC_BUDGET = 2_000_000_000
DEFAULT_REGIME_TOL = 1e-9


def _fmt(x) -> str:
    """Shortest round-trip representation (repr) for floats."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _round_sig(x: float, digits: int = 2) -> float:
    if x == 0 or not math.isfinite(x):
        return x
    scale = digits - 1 - math.floor(math.log10(abs(x)))
    return round(x, scale)


def _pct2(x: float) -> str:
    """Percent rounded to two significant digits, table style."""
    if not math.isfinite(x):
        return "-"
    return f"{_round_sig(100.0 * x, 2):g}"


def _sig2(x: float) -> str:
    if not math.isfinite(x):
        return "-"
    return f"{_round_sig(x, 2):g}"


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(cell) for cell in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# fit

def _read_config(path: Path) -> dict:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise StochdiscError(f"config file not found: {path}")
    options = parser["options"] if parser.has_section("options") else {}
    if not parser.has_section("countries") or not parser["countries"]:
        raise StochdiscError("config must list at least one country in [countries]")
    base = path.parent
    countries = []
    for name, entry in parser["countries"].items():
        parts = [p.strip() for p in entry.split(",")]
        if len(parts) != 2:
            raise StochdiscError(
                f"country {name!r}: expected 'nominal.csv, cpi.csv', got {entry!r}"
            )
        countries.append((name.upper(), base / parts[0], base / parts[1]))
    return {
        "T": float(options.get("t", DEFAULT_T_YEARS)),
        "mc_budget": int(float(options.get("mc_budget", DEFAULT_MC_BUDGET))),
        "tol": float(options.get("tol", DEFAULT_REGIME_TOL)),
        "countries": countries,
    }


def _fit_country(name: str, nominal_path: Path, cpi_path: Path, T: float) -> EstimationReport:
    nominal = load_raw_csv(nominal_path, NOMINAL_KIND, name)
    cpi = load_raw_csv(cpi_path, CPI_KIND, name)
    series = real_rate_series(nominal, cpi, T)
    return build_report(series)


_AGG_FIELDS = [
    "neg_fraction_empirical", "neg_years_empirical", "mean_negative_amplitude",
    "m", "inv_alpha", "k", "mu", "kappa", "r_inf",
    "mu_min", "mu_max", "kappa_min", "kappa_max", "r_inf_min", "r_inf_max",
]


def _report_row(rep: EstimationReport) -> dict:
    ranges = rep.block_ranges or {}
    get = lambda key, pos: ranges.get(key, (math.nan, math.nan))[pos]
    return {
        "country": rep.country,
        "neg_fraction_empirical": rep.neg_fraction_empirical,
        "neg_years_empirical": rep.neg_years_empirical,
        "mean_negative_amplitude": rep.mean_negative_amplitude,
        "m": rep.m_hat,
        "inv_alpha": 1.0 / rep.alpha_hat if rep.alpha_hat else math.nan,
        "k": rep.k_hat,
        "mu": rep.mu_hat,
        "kappa": rep.kappa_hat,
        "r_inf": rep.r_inf_hat,
        "mu_min": get("mu", 0), "mu_max": get("mu", 1),
        "kappa_min": get("kappa", 0), "kappa_max": get("kappa", 1),
        "r_inf_min": get("r_inf", 0), "r_inf_max": get("r_inf", 1),
    }


def _aggregate(rows: list[dict], label: str) -> dict:
    out = {"country": label}
    for key in _AGG_FIELDS:
        vals = [row[key] for row in rows if math.isfinite(row[key])]
        out[key] = float(np.mean(vals)) if vals else math.nan
    return out


def _human_table(rows: list[dict]) -> str:
    header = (
        f"{'country':<14} {'neg%':>6} {'neg yrs':>8} {'m-%':>6} {'m%':>7} "
        f"{'1/a':>6} {'k':>7} {'mu':>7} {'kappa':>7} {'r_inf%':>7} "
        f"{'min%':>7} {'max%':>7}"
    )
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append(
            f"{row['country']:<14} {_pct2(row['neg_fraction_empirical']):>6} "
            f"{row['neg_years_empirical']:>8.0f} "
            f"{_pct2(row['mean_negative_amplitude']):>6} {_pct2(row['m']):>7} "
            f"{_sig2(row['inv_alpha']):>6} {_sig2(row['k']):>7} "
            f"{_sig2(row['mu']):>7} {_sig2(row['kappa']):>7} "
            f"{_pct2(row['r_inf']):>7} {_pct2(row['r_inf_min']):>7} "
            f"{_pct2(row['r_inf_max']):>7}"
        )
    return "\n".join(lines)


def cmd_fit(args: argparse.Namespace) -> int:
    config = _read_config(Path(args.config))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    reports: list[EstimationReport] = []
    failures: list[tuple[str, str]] = []
    for name, nominal_path, cpi_path in config["countries"]:
        try:
            rep = _fit_country(name, nominal_path, cpi_path, config["T"])
        except (StochdiscError, OSError) as exc:
            failures.append((name, str(exc)))
            print(f"error: {name}: {exc}", file=sys.stderr)
            continue
        reports.append(rep)
        report_path = out_dir / f"{name}_report.json"
        report_path.write_text(
            json.dumps(rep.to_dict(), indent=2) + "\n", encoding="utf-8"
        )

    if not reports:
        print("error: all countries failed", file=sys.stderr)
        return EXIT_ALL_FAILED

    rows = [_report_row(rep) for rep in reports]
    tol = config["tol"]
    stable, unstable, ties = [], [], []
    for row in rows:
        if not math.isfinite(row["r_inf"]):
            continue
        if row["r_inf"] >= -tol:
            stable.append(row)
            if abs(row["r_inf"]) <= tol:
                ties.append(row["country"])
        else:
            unstable.append(row)
    agg_rows = [_aggregate([r for r in rows if math.isfinite(r["r_inf"])], "ALL")]
    agg_rows.append(_aggregate(stable, "STABLE"))
    agg_rows.append(_aggregate(unstable, "UNSTABLE"))
    if ties:
        print(f"note: countries on the regime boundary counted as stable: {ties}")

    all_rows = rows + agg_rows
    header = ["country"] + _AGG_FIELDS
    if args.format == "csv":
        _write_csv(out_dir / "summary.csv", header,
                   [[row[h] for h in header] for row in all_rows])
    else:
        payload = {row["country"]: {h: (row[h] if not isinstance(row[h], float) or math.isfinite(row[h]) else None)
                                    for h in _AGG_FIELDS}
                   for row in all_rows}
        (out_dir / "summary.json").write_text(
            json.dumps(payload, indent=2) + "\n", encoding="utf-8"
        )

    table = _human_table(all_rows)
    (out_dir / "table.txt").write_text(table + "\n", encoding="utf-8")
    print(table)
    return EXIT_PARTIAL if failures else EXIT_OK


# ---------------------------------------------------------------------------
# curve

def _model_from_args(args: argparse.Namespace):
    if args.from_report:
        data = json.loads(Path(args.from_report).read_text(encoding="utf-8"))
        if data.get("degenerate") or data.get("alpha") is None:
            raise StochdiscError(f"{args.from_report}: degenerate report, no model parameters")
        return OuParams(m=data["m"], alpha=data["alpha"], k=data["k"])
    if args.model == "ou":
        if args.m is None or args.alpha is None or args.k is None:
            raise StochdiscError("curve --model ou requires --m, --alpha and --k")
        return OuParams(m=args.m, alpha=args.alpha, k=args.k, r0=args.r0)
    if args.model == "feller":
        if args.m is None or args.alpha is None or args.k is None:
            raise StochdiscError("curve --model feller requires --m, --alpha and --k")
        return FellerParams(m=args.m, alpha=args.alpha, k=args.k, r0=args.r0)
    if args.a is None or args.b is None or args.r0 is None:
        raise StochdiscError("curve --model lognormal requires --a, --b and --r0")
    return LognormalParams(a=args.a, b=args.b, r0=args.r0)


def _write_curve(path: Path, curve) -> None:
    rows = [
        [t, d, se, ld]
        for t, d, se, ld in zip(curve.times, curve.d_values,
                                curve.std_errors, curve.log_d)
    ]
    _write_csv(path, ["t", "D", "stderr", "lnD"], rows)


def cmd_curve(args: argparse.Namespace) -> int:
    model = _model_from_args(args)
    if args.engine in ("closed-form", "both") and not isinstance(model, OuParams):
        raise StochdiscError("closed-form curves exist only for the ou model")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    spacing = args.tmax / args.points
    times = [spacing * j for j in range(1, args.points + 1)]

    exact = mc_curve = None
    if args.engine in ("closed-form", "both"):
        exact = discount_curve_exact(model, times)
        _write_curve(out_dir / "curve_closed_form.csv", exact)
    if args.engine in ("mc", "both"):
        if args.dt is not None:
            dt_target = args.dt
        elif isinstance(model, (OuParams, FellerParams)):
            dt_target = (1.0 / 32.0) / model.alpha
        else:
            dt_target = spacing / 32.0
        per_sample = max(1, math.ceil(spacing / dt_target))
        dt = spacing / per_sample
        cfg = McConfig(n_paths=args.n_paths, dt=dt, horizon=args.tmax,
                       seed=args.seed, n_workers=args.workers)
        mc_curve = estimate_discount(model, cfg, times)
        _write_curve(out_dir / "curve_mc.csv", mc_curve)
    if args.engine == "both":
        mask = mc_curve.std_errors > 0.0
        z = (mc_curve.d_values[mask] - exact.d_values[mask]) / mc_curve.std_errors[mask]
        print(f"max_abs_z={_fmt(float(np.max(np.abs(z))))}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# phase

def cmd_phase(args: argparse.Namespace) -> int:
    report_dir = Path(args.reports)
    paths = sorted(report_dir.glob("*_report.json"))
    if not paths:
        raise StochdiscError(f"no *_report.json files in {report_dir}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for path in paths:
        data = json.loads(path.read_text(encoding="utf-8"))
        if data.get("alpha") is None or data.get("mu") is None or data.get("kappa") is None:
            print(f"note: skipping degenerate report {path.name}", file=sys.stderr)
            continue
        nd = NondimParams(mu=data["mu"], kappa=data["kappa"], alpha=data["alpha"])
        label = classify_regime(nd, tol=args.tol)
        rows.append([
            data["country"], nd.kappa, nd.mu, data["r_inf"],
            label.regime.value, "true" if nd.mu < nd.kappa else "false",
        ])
    _write_csv(out_dir / "phase.csv",
               ["country", "kappa", "mu", "r_inf", "regime", "below_identity"],
               rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# negprob

def cmd_negprob(args: argparse.Namespace) -> int:
    if args.kappa_max <= 0 or args.mu_max <= 0 or args.steps < 1:
        raise StochdiscError("negprob requires positive grid bounds and steps >= 1")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    kappas = [args.kappa_max * (i + 1) / args.steps for i in range(args.steps)]
    mus = [args.mu_max * (i + 1) / args.steps for i in range(args.steps)]
    rows = []
    for kappa in kappas:
        for mu in mus:
            p = prob_negative_stationary(NondimParams(mu=mu, kappa=kappa, alpha=1.0))
            rows.append([kappa, mu, p])
    _write_csv(out_dir / "negprob.csv", ["kappa", "mu", "p_negative"], rows)
    return EXIT_OK


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stochdisc",
        description="Discounting under stochastic real interest rates.",
    )
    parser.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    parser.add_argument("--format", choices=["csv", "json"], default="json",
                        help="aggregate summary format for fit")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--workers", type=int, default=1,
                        help="Monte Carlo worker threads (output-invariant)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="estimate model parameters per country")
    p_fit.add_argument("--config", required=True, help="INI config with [countries]")
    p_fit.set_defaults(func=cmd_fit)

    p_curve = sub.add_parser("curve", help="emit discount-curve data")
    p_curve.add_argument("--model", choices=["ou", "feller", "lognormal"], default="ou")
    p_curve.add_argument("--m", type=float)
    p_curve.add_argument("--alpha", type=float)
    p_curve.add_argument("--k", type=float)
    p_curve.add_argument("--r0", type=float, default=None)
    p_curve.add_argument("--a", type=float, help="log-rate drift (lognormal)")
    p_curve.add_argument("--b", type=float, help="log-rate volatility (lognormal)")
    p_curve.add_argument("--from-report", default=None,
                         help="read ou parameters from a fit report JSON")
    p_curve.add_argument("--tmax", type=float, required=True)
    p_curve.add_argument("--points", type=int, default=48)
    p_curve.add_argument("--engine", choices=["closed-form", "mc", "both"],
                         default="closed-form")
    p_curve.add_argument("--dt", type=float, default=None,
                         help="MC step size (default (1/32)/alpha)")
    p_curve.add_argument("--n-paths", type=int, default=20000)
    p_curve.set_defaults(func=cmd_curve)

    p_phase = sub.add_parser("phase", help="phase-plane coordinates from reports")
    p_phase.add_argument("--reports", required=True, help="directory of *_report.json")
    p_phase.add_argument("--tol", type=float, default=DEFAULT_REGIME_TOL,
                         help="regime boundary tolerance on mu - kappa^2/2")
    p_phase.set_defaults(func=cmd_phase)

    p_neg = sub.add_parser("negprob", help="negative-rate probability surface")
    p_neg.add_argument("--kappa-max", type=float, required=True)
    p_neg.add_argument("--mu-max", type=float, required=True)
    p_neg.add_argument("--steps", type=int, default=50)
    p_neg.set_defaults(func=cmd_negprob)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (StochdiscError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ALL_FAILED


if __name__ == "__main__":
    sys.exit(main())
