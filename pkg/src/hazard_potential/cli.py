"""Command line interface.

Subcommands::

    survival   closed-form survival curves
    simulate   Monte Carlo estimators and path dumps
    fit        grid posterior from a marker CSV
    predict    residual-life curve from a fitted posterior
    figure1    first-passage CDFs for thresholds 1..5 and their Exp(1) average

Exit status: 0 success, 1 I/O failure, 2 usage error, 3 data error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import __version__
from .distcore import Quadrature, WienerParams, ig_cdf, mixture_lifetime_cdf
from .exceptions import DataError, DomainError, NumericError
from .inference import (
    PriorConfig,
    posterior_grid,
    residual_life_curve,
    threshold_posterior,
)
from .io import (
    load_posterior,
    read_hazard_table,
    read_marker_csv,
    save_posterior,
    write_csv,
    write_manifest,
)
from .pathsim import (
    PathConfig,
    competing_survival_curve,
    hitting_curve,
    running_max,
    sample_correlated_bm_pair,
    sample_gamma_path,
    sample_wiener_path,
    trauma_survival_curve,
)
from .riskmodels import (
    PowerLawHazard,
    additive_survival,
    gumbel_survival,
    max_rule_survival,
    survival_bounds,
    trauma_gamma_closed,
)

log = logging.getLogger("hazard_potential")

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

SURVIVAL_MODELS = ("additive", "gumbel", "maxrule", "bounds", "trauma-closed", "ig", "mixture")
PROCESSES = ("wiener", "wienermax", "gamma", "corr-bm", "trauma", "competing")


class UsageError(DomainError):
    pass


def parse_grid(text: str, name: str = "grid", allow_zero: bool = True) -> np.ndarray:
    """Parse ``start:stop:step`` (stop inclusive) or a comma list into an ascending array."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if not step > 0 or stop < start:
                raise UsageError(f"{name}: need step > 0 and stop >= start")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            grid = start + step * np.arange(n)
        else:
            grid = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise UsageError(f"{name}: cannot parse {text!r}") from None
    if grid.size == 0:
        raise UsageError(f"{name}: empty")
    if not np.all(np.isfinite(grid)) or np.any(grid < 0) or (not allow_zero and np.any(grid == 0)):
        raise UsageError(f"{name}: values must be finite and {'>= 0' if allow_zero else '> 0'}")
    if np.any(np.diff(grid) <= 0):
        raise UsageError(f"{name}: values must be strictly increasing")
    return grid


def _parse_hazard(text: str):
    kind, _, rest = text.partition(":")
    if kind == "power":
        try:
            scale, power = (float(v) for v in rest.split(":"))
        except ValueError:
            raise UsageError(f"bad hazard {text!r}; expected power:SCALE:POWER") from None
        return PowerLawHazard(scale, power)
    if kind == "table":
        if not rest:
            raise UsageError("table hazard needs a file: table:PATH")
        return read_hazard_table(rest)
    raise UsageError(f"unknown hazard kind {kind!r}; use power:SCALE:POWER or table:PATH")


def _parse_threshold(text: str | None):
    if text is None:
        return None
    if text.lower() in ("exp", "exponential"):
        return "exp"
    try:
        value = float(text)
    except ValueError:
        raise UsageError(f"threshold must be a number, 'inf' or 'exp', got {text!r}") from None
    if not value > 0:
        raise UsageError("threshold must be > 0")
    return value


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _finish(args, command, parameters):
    if args.out not in (None, "-"):
        write_manifest(args.out, command, parameters, args.seed, __version__)
        log.info("wrote %s", args.out)


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} needs --{', --'.join(m.replace('_', '-') for m in missing)}")


def _wiener(args) -> WienerParams:
    _require(args, "eta", "sigma2")
    return WienerParams(eta=args.eta, sigma2=args.sigma2)


# --- survival ---------------------------------------------------------------


def cmd_survival(args):
    ts = parse_grid(args.t_grid, "--t-grid")
    model = args.model
    header = ["t", "survival"]
    if model in ("additive", "maxrule", "bounds", "gumbel"):
        hs = [_parse_hazard(h) for h in args.hazard or []]
        if not hs:
            raise UsageError(f"model {model} needs at least one --hazard")
        if model == "additive":
            cols = [additive_survival(hs, ts)]
        elif model == "maxrule":
            cols = [max_rule_survival(hs, ts)]
        elif model == "bounds":
            cols = list(survival_bounds(hs, ts))
            header = ["t", "lower", "upper"]
        else:
            if len(hs) != 2:
                raise UsageError("model gumbel needs exactly two --hazard curves")
            _require(args, "theta")
            cols = [gumbel_survival(hs[0], hs[1], args.theta, ts)]
    elif model == "trauma-closed":
        cols = [trauma_gamma_closed(ts)]
    elif model == "ig":
        _require(args, "x")
        cols = [1.0 - np.asarray(ig_cdf(ts, args.x, _wiener(args)))]
    elif model == "mixture":
        cols = [1.0 - np.asarray(mixture_lifetime_cdf(ts, _wiener(args), Quadrature()))]
    else:  # argparse restricts choices
        raise UsageError(f"unknown model {model!r}")
    cols = [np.broadcast_to(np.asarray(c, dtype=float), ts.shape) for c in cols]
    with _output(args.out) as fh:
        write_csv(fh, header, zip(ts, *cols))
    _finish(args, "survival", _params(args))


# --- simulate ---------------------------------------------------------------


def _params(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "quiet")}


def _path_rows(process, args, cfg):
    if process in ("wiener", "wienermax"):
        w = _wiener(args)
        for i in range(cfg.n_paths):
            p = sample_wiener_path(w, cfg, i)
            if process == "wienermax":
                p = running_max(p)
            for t, v in zip(p.times, p.values):
                yield (i, t, v)
    elif process == "gamma":
        for i in range(cfg.n_paths):
            p = sample_gamma_path(cfg, i)
            for t, v in zip(p.times, p.values):
                yield (i, t, v)
    elif process == "corr-bm":
        _require(args, "rho")
        for i in range(cfg.n_paths):
            a, b = sample_correlated_bm_pair(args.rho, cfg, i)
            for t, v1, v2 in zip(a.times, a.values, b.values):
                yield (i, t, v1, v2)


def cmd_simulate(args):
    process = args.process
    threshold = _parse_threshold(args.threshold)
    estimator = process in ("trauma", "competing") or (process in ("wiener", "wienermax") and threshold is not None)
    if estimator:
        if args.t_grid is None:
            raise UsageError(f"simulate {process} needs --t-grid")
        ts = parse_grid(args.t_grid, "--t-grid", allow_zero=False)
        horizon = float(ts[-1])
    else:
        ts = None
        horizon = args.horizon
        if not (horizon and horizon > 0):
            raise UsageError("--horizon must be > 0")
    cfg = PathConfig.for_horizon(horizon, args.dt, args.paths, args.seed)

    if estimator:
        if process == "trauma":
            if threshold == "exp":
                raise UsageError("trauma takes a numeric --threshold or inf")
            est = trauma_survival_curve(ts, math.inf if threshold is None else threshold, cfg, args.workers)
            rows = [(t, e.value, e.std_err) for t, e in zip(ts, est)]
        elif process == "competing":
            _require(args, "rho")
            est = competing_survival_curve(args.rho, ts, cfg, args.workers)
            rows = [(t, e.value, e.std_err) for t, e in zip(ts, est)]
        else:
            x = None if threshold == "exp" else threshold
            if x is not None and math.isinf(x):
                raise UsageError("a Wiener hitting threshold must be finite (or 'exp')")
            est = hitting_curve(_wiener(args), ts, cfg, x=x, workers=args.workers)
            rows = [(t, 1.0 - e.value, e.std_err) for t, e in zip(ts, est)]
        header = ["t", "survival", "std_err"]
    else:
        if process in ("trauma", "competing"):
            raise UsageError(f"{process} has no path mode")
        if process in ("wiener", "wienermax"):
            _wiener(args)
        elif process == "corr-bm":
            _require(args, "rho")
            if not -1.0 <= args.rho <= 1.0:
                raise UsageError("--rho must lie in [-1, 1]")
        header = ["path_index", "time", "value_1", "value_2"] if process == "corr-bm" else ["path_index", "time", "value"]
        rows = _path_rows(process, args, cfg)
    with _output(args.out) as fh:
        write_csv(fh, header, rows)
    _finish(args, "simulate", _params(args))


# --- fit / predict ------------------------------------------------------------


def cmd_fit(args):
    if args.out in (None, "-"):
        raise UsageError("fit needs --out PATH for the posterior artifact")
    m = read_marker_csv(args.marker_csv)
    if m.k < 2:
        raise UsageError("fit needs at least two marker observations (sigma2 is unidentifiable from one)")
    p = PriorConfig(a=args.a, b=args.b, beta_p=args.beta_p, beta_q=args.beta_q, delta=args.delta)
    bounds = None
    if args.sigma2_lo is not None or args.sigma2_hi is not None:
        _require(args, "sigma2_lo", "sigma2_hi")
        bounds = (args.sigma2_lo, args.sigma2_hi)
    g = posterior_grid(m, p, n_eta=args.n_eta, n_sigma2=args.n_sigma2, sigma2_bounds=bounds)
    xp = threshold_posterior(m, use_running_max=args.running_max_shift)
    save_posterior(args.out, g, xp, m, p)
    _finish(args, "fit", _params(args))


def cmd_predict(args):
    g, xp, m, _ = load_posterior(args.posterior)
    us = parse_grid(args.u_grid, "--u-grid")
    if us[0] != 0:
        us = np.concatenate([[0.0], us])
    q = Quadrature(rel_tol=args.rel_tol, abs_tol=args.abs_tol)
    surv = residual_life_curve(us, m, g, xp, q)
    with _output(args.out) as fh:
        write_csv(fh, ["u", "residual_survival"], zip(us, surv))
    _finish(args, "predict", _params(args))


def figure1_table(t_max: float = 10.0, t_step: float = 0.05):
    """Rows ``(t, F_1, ..., F_5, F_mixture)`` at eta = sigma = 1."""
    n = int(math.floor(t_max / t_step + 1e-9))
    ts = t_step * np.arange(1, n + 1)
    w = WienerParams(eta=1.0, sigma2=1.0)
    cols = [np.asarray(ig_cdf(ts, float(x), w)) for x in range(1, 6)]
    cols.append(np.asarray(mixture_lifetime_cdf(ts, w, Quadrature())))
    return ts, cols


def cmd_figure1(args):
    if not (args.t_max > 0 and args.t_step > 0):
        raise UsageError("--t-max and --t-step must be > 0")
    ts, cols = figure1_table(args.t_max, args.t_step)
    with _output(args.out) as fh:
        write_csv(fh, ["t", "F_x1", "F_x2", "F_x3", "F_x4", "F_x5", "F_mixture"], zip(ts, *cols))
    _finish(args, "figure1", _params(args))


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--seed", type=int, default=0, help="master seed, unsigned 64-bit")
    common.add_argument("--paths", type=int, default=10_000, help="number of Monte Carlo paths")
    common.add_argument("--dt", type=float, default=1e-3, help="simulation time step")
    common.add_argument("--workers", type=int, default=1, help="worker processes for Monte Carlo")
    common.add_argument("--quiet", action="store_true", help="suppress progress messages")

    parser = argparse.ArgumentParser(prog="hazard-potential", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("survival", parents=[common], help="closed-form survival curves")
    sp.add_argument("model", choices=SURVIVAL_MODELS)
    sp.add_argument("--t-grid", required=True, help="START:STOP:STEP or comma list")
    sp.add_argument("--hazard", action="append", help="power:SCALE:POWER or table:PATH (repeatable)")
    sp.add_argument("--theta", type=float, help="Gumbel dependence, 0..1")
    sp.add_argument("--x", type=float, help="fixed threshold for model ig")
    sp.add_argument("--eta", type=float, help="marker drift")
    sp.add_argument("--sigma2", type=float, help="marker diffusion")
    sp.set_defaults(func=cmd_survival)

    sp = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimators and path dumps")
    sp.add_argument("process", choices=PROCESSES)
    sp.add_argument("--t-grid", help="evaluation times for estimators")
    sp.add_argument("--horizon", type=float, default=1.0, help="path length for path dumps")
    sp.add_argument("--eta", type=float)
    sp.add_argument("--sigma2", type=float)
    sp.add_argument("--rho", type=float, help="Brownian correlation for corr-bm/competing")
    sp.add_argument("--threshold", help="number, 'inf' or 'exp' (Exp(1) per path)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fit", parents=[common], help="grid posterior from marker data")
    sp.add_argument("marker_csv")
    sp.add_argument("--a", type=float, default=math.pi / 8, help="lower drift angle (radians)")
    sp.add_argument("--b", type=float, default=3 * math.pi / 8, help="upper drift angle (radians)")
    sp.add_argument("--beta-p", type=float, default=1.0)
    sp.add_argument("--beta-q", type=float, default=1.0)
    sp.add_argument("--delta", type=int, default=3)
    sp.add_argument("--n-eta", type=int, default=64)
    sp.add_argument("--n-sigma2", type=int, default=64)
    sp.add_argument("--sigma2-lo", type=float)
    sp.add_argument("--sigma2-hi", type=float)
    sp.add_argument("--running-max-shift", action="store_true", help="shift the threshold by max Z instead of Z(t_k)")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("predict", parents=[common], help="residual-life curve")
    sp.add_argument("posterior")
    sp.add_argument("--u-grid", default="0:5:0.25", help="START:STOP:STEP or comma list")
    sp.add_argument("--rel-tol", type=float, default=1e-8)
    sp.add_argument("--abs-tol", type=float, default=1e-10)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("figure1", parents=[common], help="first-passage CDF table")
    sp.add_argument("--t-max", type=float, default=10.0)
    sp.add_argument("--t-step", type=float, default=0.05)
    sp.set_defaults(func=cmd_figure1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(format="%(name)s: %(message)s", stream=sys.stderr)
    log.setLevel(logging.WARNING if args.quiet else logging.INFO)
    try:
        args.func(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
