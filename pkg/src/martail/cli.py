"""Command-line front end.

Exit codes: 0 success, 2 invalid model, 3 data error, 4 numerical failure.
Errors are reported on stderr as ``error[Tag]: message``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import diagnose, inference, predict, simulate, tail
from .errors import EmptyFile, MarError, ParseError
from .model import InnovationSpec, MarModel

COMMANDS = ("coeffs", "tail", "predict", "simulate", "montecarlo", "fit", "diagnose")
EXPERIMENTS = ("fig8", "fig9", "fig10", "sbj", "prop4")


class UsageError(Exception):
    """Missing or inconsistent command-line options (exit code 2)."""


def fmt(x) -> str:
    return "%.17g" % x


def load_series(path) -> np.ndarray:
    """Read one number per line, or a CSV whose header names a ``value`` column.

    Blank lines are skipped.  A non-numeric entry raises :class:`ParseError`
    carrying the 1-based line number.
    """
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not any(line.strip() for line in lines):
        raise EmptyFile(f"{path} has no data")
    first = next(i for i, line in enumerate(lines) if line.strip())
    header = [c.strip().lower() for c in lines[first].split(",")]
    col = None
    start = first
    if "value" in header:
        col = header.index("value")
        start = first + 1
    out = []
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        field_ = line.split(",")[col] if col is not None else line
        try:
            out.append(float(field_.strip()))
        except (ValueError, IndexError):
            raise ParseError(f"line {lineno}: cannot parse {line.strip()!r}", line=lineno) from None
    if not out:
        raise EmptyFile(f"{path} has no data rows")
    return np.asarray(out)


def write_csv(path: Optional[str], header, rows) -> None:
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    finally:
        if path:
            fh.close()


def write_json(path: Optional[str], obj) -> None:
    text = json.dumps(_jsonable(obj), indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


@dataclass
class RunConfig:
    command: str
    model_path: Optional[str] = None
    input_path: Optional[str] = None
    seed: Optional[int] = None
    output_path: Optional[str] = None
    options: dict = field(default_factory=dict)


def _floats(text: Optional[str]):
    if text is None:
        return None
    return [float(x) for x in str(text).replace(" ", "").split(",") if x]


def _ints(text: Optional[str]):
    if text is None:
        return None
    return [int(x) for x in str(text).replace(" ", "").split(",") if x]


def _load_model(cfg: RunConfig) -> MarModel:
    if not cfg.model_path:
        raise UsageError("--model is required")
    return MarModel.from_json(cfg.model_path)


def _need_seed(cfg: RunConfig) -> int:
    if cfg.seed is None:
        raise UsageError("--seed is required for randomized commands")
    return int(cfg.seed)


def run_coeffs(cfg: RunConfig) -> None:
    model = _load_model(cfg)
    H = cfg.options.get("H")
    co = model.coefficients(None if H is None else int(H))
    hs = co.h
    rows = [(int(h), co.a_at(h), co.b_at(h), co.c_at(h)) for h in hs]
    write_csv(cfg.output_path, ["h", "a", "b", "c"], rows)


def run_tail(cfg: RunConfig) -> None:
    model = _load_model(cfg)
    opts = cfg.options
    alpha = float(opts.get("alpha") or model.alpha)
    co = tail.tail_coefficients(model, alpha)
    what = opts.get("what") or "drift"
    if what == "drift":
        d = tail.drift_distribution(co, alpha)
        out = d.to_dict() | {"coverage": d.coverage}
    elif what == "forward":
        hz = _ints(opts.get("horizons")) or [1]
        out = tail.forward_law(co, alpha, hz, ratios=bool(opts.get("ratios"))).to_dict()
    elif what == "turning":
        tp = tail.turning_point(co, alpha)
        out = {"h0": tp.h0, "maximizers": list(tp.maximizers), "h_min": tp.h_min, "pmf": tp.pmf, "mode": tp.mode, "mean": tp.mean, "interval_90": list(tp.interval(0.9))}
    elif what == "one-sided":
        eta, l1, l2 = tail.one_sided_laws(co, alpha)
        out = {"eta": eta, "law1": l1.to_dict(), "law2": l2.to_dict()}
    elif what == "first-exceedance":
        fe = tail.first_exceedance_law(co, alpha)
        out = {"law": fe.law.to_dict(), "theta": fe.theta, "theta_anticlustering": fe.theta_anticlustering}
    else:
        raise UsageError(f"unknown --what {what!r}")
    write_json(cfg.output_path, out)


def run_predict(cfg: RunConfig) -> None:
    model = _load_model(cfg)
    opts = cfg.options
    cond = opts.get("condition") or "level"
    alpha = opts.get("alpha")
    alpha = None if alpha is None else float(alpha)
    if cond == "level":
        law = predict.predict_level(model, _ints(opts.get("horizons")) or [1], alpha)
    elif cond == "level_and_ratio":
        law = predict.predict_level_and_ratio_mar11(model, float(opts["r"]), alpha)
    elif cond == "level_and_ratios":
        law = predict.predict_marp1(model, _floats(opts.get("ratios")), alpha)
    elif cond == "dbj":
        law = predict.dbj_mar02_atoms(model, float(opts["r"]), int(opts.get("J") or 50))
    elif cond == "online":
        co = tail.tail_coefficients(model, alpha)
        d = predict.online_update(co, alpha or model.alpha, int(opts.get("steps") or 1))
        write_json(cfg.output_path, d.to_dict())
        return
    elif cond == "density":
        lo, hi, n = (opts.get("grid") or "-1:4:501").split(":")
        grid = np.linspace(float(lo), float(hi), int(n))
        dens = predict.cauchy_mar11_predictive_density(float(opts["y"]), float(opts["r"]), grid, model)
        write_csv(cfg.output_path, ["r_next", "density"], zip(grid, dens))
        return
    else:
        raise UsageError(f"unknown --condition {cond!r}")
    write_json(cfg.output_path, law.to_dict())


def run_simulate(cfg: RunConfig) -> None:
    model = _load_model(cfg)
    seed = _need_seed(cfg)
    T = int(cfg.options.get("T") or 1000)
    traj = simulate.simulate_trajectory(model, T, seed)
    write_csv(cfg.output_path, ["index", "value"], zip(range(T), traj.values))


def run_montecarlo(cfg: RunConfig) -> None:
    seed = _need_seed(cfg)
    exp = cfg.options.get("experiment")
    T = int(cfg.options.get("T") or 1_000_000)
    if exp in ("fig8", "fig9", "fig10"):
        model = MarModel.from_json(cfg.model_path) if cfg.model_path else simulate.FIG_MODEL
        q = float(cfg.options.get("quantile") or 0.975)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            hist = simulate.fig_histogram(exp, seed, T, q, model)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    elif exp == "prop4":
        model = MarModel.from_json(cfg.model_path) if cfg.model_path else MarModel((0.6,), (0.4,))
        q = float(cfg.options.get("quantile") or 0.999)
        traj = simulate.simulate_trajectory(model, T, seed)
        hist = simulate.conditional_histogram(traj, simulate.EventCondition(quantile=q))
    elif exp == "sbj":
        n = int(cfg.options.get("n") or 10_000_000)
        p1 = InnovationSpec("pareto", alpha=1.5, pareto_minimum=2.0 ** (1 / 1.5))
        p2 = InnovationSpec("pareto", alpha=1.5)
        res = simulate.sbj_experiment(p1, p2, 0.999, n, seed)
        print(json.dumps({"empirical": res.empirical, "predicted": res.predicted, "n_events": res.n_events}), file=sys.stderr)
        counts = np.array([round((1 - res.empirical) * res.n_events), round(res.empirical * res.n_events)])
        write_csv(cfg.output_path, ["bin_left", "bin_right", "count"], [(0.0, 0.5, int(counts[0])), (0.5, 1.0, int(counts[1]))])
        return
    else:
        raise UsageError(f"--experiment must be one of {', '.join(EXPERIMENTS)}")
    edges = hist.bin_edges
    write_csv(cfg.output_path, ["bin_left", "bin_right", "count"], [(float(a), float(b), int(c)) for a, b, c in zip(edges[:-1], edges[1:], hist.counts)])


def run_fit(cfg: RunConfig) -> None:
    if not cfg.input_path:
        raise UsageError("--input is required")
    y = load_series(cfg.input_path)
    fit = inference.fit_mar11_cauchy(y)
    write_json(cfg.output_path, fit.to_dict() | {"se": fit.se})


def run_diagnose(cfg: RunConfig) -> None:
    if not cfg.input_path:
        raise UsageError("--input is required")
    y = load_series(cfg.input_path)
    fit_path = cfg.options.get("fit")
    if fit_path:
        with open(fit_path) as fh:
            fit = inference.FitResult.from_dict(json.load(fh))
    else:
        fit = inference.fit_mar11_cauchy(y)
    t = cfg.options.get("t")
    t = int(np.argmax(np.abs(y))) if t is None else int(t)
    H = int(cfg.options.get("H") or diagnose.DEFAULT_H)
    panel = diagnose.residual_panel(y, fit, t, H)
    cls, neg_n = diagnose.adjacency_summary(panel)
    print(json.dumps({"pattern": cls, "neg_N_hat": neg_n}), file=sys.stderr)
    rows = [(int(r[0]), r[1], r[2], r[3], r[4], int(r[5]), int(r[6])) for r in panel.rows()]
    write_csv(cfg.output_path, ["h", "U_norm", "V_norm", "band_u", "band_v", "adj_u", "adj_v"], rows)


RUNNERS = {
    "coeffs": run_coeffs,
    "tail": run_tail,
    "predict": run_predict,
    "simulate": run_simulate,
    "montecarlo": run_montecarlo,
    "fit": run_fit,
    "diagnose": run_diagnose,
}


def dispatch(config: RunConfig) -> int:
    """Run a command; return its exit code."""
    try:
        RUNNERS[config.command](config)
    except MarError as exc:
        print(f"error[{exc.tag}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except UsageError as exc:
        print(f"error[Usage]: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error[IOError]: {exc}", file=sys.stderr)
        return 3
    except (KeyError, TypeError, ValueError) as exc:
        print(f"error[InvalidArgument]: {exc}", file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="martail", description="Tail laws, prediction and diagnostics for mixed causal/noncausal autoregressions.")
    parser.add_argument("--config", help="JSON file of default options; command-line flags take precedence")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model=True):
        if model:
            p.add_argument("--model", dest="model_path", help="model JSON file")
        p.add_argument("--out", dest="output_path", help="output file (stdout when omitted)")

    p = sub.add_parser("coeffs", help="moving-average coefficients as CSV h,a,b,c")
    common(p)
    p.add_argument("--H", type=int, help="window half-width")

    p = sub.add_parser("tail", help="tail-process laws as JSON")
    common(p)
    p.add_argument("--what", choices=["drift", "forward", "turning", "one-sided", "first-exceedance"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--horizons", help="comma-separated horizons")
    p.add_argument("--ratios", action="store_true", default=None, help="ratio atoms Z_h instead of X_h")

    p = sub.add_parser("predict", help="limiting predictive laws")
    common(p)
    p.add_argument("--condition", choices=["level", "level_and_ratio", "level_and_ratios", "dbj", "online", "density"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--horizons")
    p.add_argument("--r", type=float, help="observed ratio y_t / y_{t-1}")
    p.add_argument("--ratios", help="comma-separated r_t, r_{t-1}, ...")
    p.add_argument("--J", type=int, help="number of double-jump atoms")
    p.add_argument("--steps", type=int, help="observed consecutive increases")
    p.add_argument("--y", type=float, help="current level for the density")
    p.add_argument("--grid", help="lo:hi:n grid of next ratios")

    p = sub.add_parser("simulate", help="simulate a path as CSV index,value")
    common(p)
    p.add_argument("--T", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("montecarlo", help="Monte Carlo histograms as CSV bin_left,bin_right,count")
    common(p)
    p.add_argument("--experiment", choices=list(EXPERIMENTS))
    p.add_argument("--T", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--quantile", type=float)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("fit", help="fit a Cauchy MAR(1,1)")
    common(p, model=False)
    p.add_argument("--input", dest="input_path", help="series file")

    p = sub.add_parser("diagnose", help="pure-residual panel as CSV")
    common(p, model=False)
    p.add_argument("--input", dest="input_path")
    p.add_argument("--fit", help="fit JSON from the fit command")
    p.add_argument("--t", type=int, help="focal date (0-based); default: largest |y|")
    p.add_argument("--H", type=int)
    return parser


TOP_LEVEL = ("command", "model_path", "input_path", "seed", "output_path")


def parse_config(argv=None) -> RunConfig:
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    defaults = {}
    config_path = ns.pop("config", None)
    if config_path:
        with open(config_path) as fh:
            defaults = json.load(fh)
    # flags beat the config file
    for key, val in defaults.items():
        key = {"model": "model_path", "input": "input_path", "out": "output_path"}.get(key, key)
        if ns.get(key) is None:
            ns[key] = val
    top = {k: ns.pop(k, None) for k in TOP_LEVEL}
    return RunConfig(top["command"], top["model_path"], top["input_path"], top["seed"], top["output_path"], ns)


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error[IOError]: {exc}", file=sys.stderr)
        return 3
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
