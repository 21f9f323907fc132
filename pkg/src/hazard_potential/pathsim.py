"""Reproducible path simulation and Monte Carlo lifetime estimators.

Every path draws from its own random substream keyed by ``(seed,
path_index)``, so any path can be regenerated on its own and an estimate
does not depend on how the paths are split between worker processes.

Paths are Euler-discretised on a fixed grid. The discrete running maximum
misses excursions between grid points, so hitting probabilities come out
low (and survival probabilities high) by O(sqrt(dt)).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distcore import WienerParams
from .exceptions import DomainError

__all__ = [
    "PathConfig",
    "SamplePath",
    "McEstimate",
    "path_rng",
    "sample_wiener_path",
    "running_max",
    "sample_gamma_path",
    "sample_correlated_bm_pair",
    "mc_fixed_threshold_hitting",
    "mc_exponential_threshold_hitting",
    "mc_dependent_competing_survival",
    "mc_trauma_survival",
    "hitting_curve",
    "competing_survival_curve",
    "trauma_survival_curve",
]

# substream ids within one path
_INCREMENTS = 0
_SECOND_MOTION = 1
_THRESHOLD = 2

_U64 = 2**64


@dataclass(frozen=True)
class PathConfig:
    """Time grid, number of paths and master seed for a simulation."""

    dt: float
    n_steps: int
    n_paths: int
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise DomainError(f"dt must be > 0, got {self.dt!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise DomainError(f"n_steps must be a positive integer, got {self.n_steps!r}")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise DomainError(f"n_paths must be a positive integer, got {self.n_paths!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < _U64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    @property
    def horizon(self) -> float:
        return self.dt * self.n_steps

    @classmethod
    def for_horizon(cls, horizon: float, dt: float, n_paths: int, seed: int = 0) -> "PathConfig":
        """Smallest grid with spacing ``dt`` that reaches ``horizon``."""
        if not (math.isfinite(dt) and dt > 0):
            raise DomainError(f"dt must be > 0, got {dt!r}")
        if not (math.isfinite(horizon) and horizon > 0):
            raise DomainError(f"horizon must be finite and > 0, got {horizon!r}")
        return cls(dt=dt, n_steps=max(1, math.ceil(horizon / dt - 1e-9)), n_paths=n_paths, seed=seed)

    def step_index(self, t: float) -> int:
        """Index of the last grid point at or before ``t``."""
        if not (math.isfinite(t) and t > 0):
            raise DomainError(f"t must be finite and > 0, got {t!r}")
        if t > self.horizon * (1 + 1e-12):
            raise DomainError(f"t={t} is beyond the simulated horizon {self.horizon}")
        return min(self.n_steps, int(math.floor(t / self.dt + 1e-9)))


@dataclass(frozen=True, eq=False)
class SamplePath:
    """A discretised path on ``times = 0, dt, 2 dt, ...`` with ``values[0] == 0``."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise DomainError("times and values must be 1-D arrays of equal length")
        for arr in (self.times, self.values):
            arr.setflags(write=False)

    def __len__(self):
        return self.times.size


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_err: float
    n_paths: int


def path_rng(seed: int, path_index: int, stream: int = _INCREMENTS) -> np.random.Generator:
    """Generator for substream ``stream`` of path ``path_index``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(path_index), int(stream)))
    return np.random.Generator(np.random.PCG64(ss))


def _check_index(cfg: PathConfig, path_index: int):
    if not 0 <= path_index < cfg.n_paths:
        raise DomainError(f"path_index must lie in [0, {cfg.n_paths}), got {path_index}")


def _grid(dt: float, n: int) -> np.ndarray:
    return np.arange(n + 1) * dt


def _wiener_values(eta, sigma2, dt, n, rng):
    z = np.empty(n + 1)
    z[0] = 0.0
    np.cumsum(eta * dt + math.sqrt(sigma2 * dt) * rng.standard_normal(n), out=z[1:])
    return z


def _gamma_values(dt, n, rng):
    h = np.empty(n + 1)
    h[0] = 0.0
    np.cumsum(rng.standard_gamma(dt, n), out=h[1:])
    return h


def _bm_pair_values(rho, dt, n, seed, path_index):
    z1 = path_rng(seed, path_index, _INCREMENTS).standard_normal(n)
    comp = math.sqrt(max(0.0, 1.0 - rho * rho))
    if comp == 0.0:
        z2 = rho * z1
    else:
        z2 = rho * z1 + comp * path_rng(seed, path_index, _SECOND_MOTION).standard_normal(n)
    scale = math.sqrt(dt)
    w1 = np.empty(n + 1)
    w2 = np.empty(n + 1)
    w1[0] = w2[0] = 0.0
    np.cumsum(scale * z1, out=w1[1:])
    np.cumsum(scale * z2, out=w2[1:])
    return w1, w2


def _prefix_max(values):
    # values[0] == 0, so the prefix maximum is already clamped at 0
    return np.maximum.accumulate(np.maximum(values, 0.0))


def sample_wiener_path(w: WienerParams, cfg: PathConfig, path_index: int) -> SamplePath:
    """Marker path with independent Gaussian(eta dt, sigma2 dt) increments."""
    _check_index(cfg, path_index)
    rng = path_rng(cfg.seed, path_index)
    return SamplePath(_grid(cfg.dt, cfg.n_steps), _wiener_values(w.eta, w.sigma2, cfg.dt, cfg.n_steps, rng))


def running_max(p: SamplePath) -> SamplePath:
    """Running maximum ``max(0, max_{i<=j} values[i])`` of a path."""
    return SamplePath(p.times.copy(), _prefix_max(np.asarray(p.values, dtype=float)))


def sample_gamma_path(cfg: PathConfig, path_index: int) -> SamplePath:
    """Standard gamma process path: increments Gamma(shape=dt, scale=1)."""
    _check_index(cfg, path_index)
    rng = path_rng(cfg.seed, path_index)
    return SamplePath(_grid(cfg.dt, cfg.n_steps), _gamma_values(cfg.dt, cfg.n_steps, rng))


def sample_correlated_bm_pair(rho: float, cfg: PathConfig, path_index: int) -> tuple[SamplePath, SamplePath]:
    """Two standard Brownian paths whose increments have correlation ``rho``."""
    _check_rho(rho)
    _check_index(cfg, path_index)
    w1, w2 = _bm_pair_values(rho, cfg.dt, cfg.n_steps, cfg.seed, path_index)
    times = _grid(cfg.dt, cfg.n_steps)
    return SamplePath(times, w1), SamplePath(times.copy(), w2)


def _check_rho(rho):
    if not (-1.0 <= rho <= 1.0):
        raise DomainError(f"rho must lie in [-1, 1], got {rho!r}")


# --- per-path kernels -------------------------------------------------------
#
# Each kernel returns, for paths start..stop-1, one row of outcomes evaluated
# at the grid indices ``steps``. Kernels live at module level so worker
# processes can unpickle them.


def _kernel_fixed(params, cfg, steps, start, stop):
    eta, sigma2, x = params
    n = int(steps.max())
    out = np.empty((stop - start, steps.size))
    for row, i in enumerate(range(start, stop)):
        m = _prefix_max(_wiener_values(eta, sigma2, cfg.dt, n, path_rng(cfg.seed, i)))
        out[row] = m[steps] >= x
    return out


def _kernel_exponential(params, cfg, steps, start, stop):
    eta, sigma2 = params
    n = int(steps.max())
    out = np.empty((stop - start, steps.size))
    for row, i in enumerate(range(start, stop)):
        m = _prefix_max(_wiener_values(eta, sigma2, cfg.dt, n, path_rng(cfg.seed, i)))
        x = path_rng(cfg.seed, i, _THRESHOLD).standard_exponential()
        out[row] = m[steps] >= x
    return out


def _kernel_competing(params, cfg, steps, start, stop):
    (rho,) = params
    n = int(steps.max())
    out = np.empty((stop - start, steps.size))
    for row, i in enumerate(range(start, stop)):
        w1, w2 = _bm_pair_values(rho, cfg.dt, n, cfg.seed, i)
        both = np.maximum(_prefix_max(w1), _prefix_max(w2))
        x = path_rng(cfg.seed, i, _THRESHOLD).standard_exponential()
        out[row] = both[steps] <= x
    return out


def _kernel_trauma(params, cfg, steps, start, stop):
    (threshold,) = params
    n = int(steps.max())
    out = np.empty((stop - start, steps.size))
    area = np.empty(n + 1)
    area[0] = 0.0
    for row, i in enumerate(range(start, stop)):
        h = _gamma_values(cfg.dt, n, path_rng(cfg.seed, i))
        # trapezoidal integral of the path from 0 to each grid point
        np.cumsum(0.5 * cfg.dt * (h[1:] + h[:-1]), out=area[1:])
        out[row] = np.exp(-area[steps]) * (h[steps] <= threshold)
    return out


_KERNELS = {
    "fixed": _kernel_fixed,
    "exponential": _kernel_exponential,
    "competing": _kernel_competing,
    "trauma": _kernel_trauma,
}


def _dispatch(kind, params, cfg, steps, start, stop):
    return _KERNELS[kind](params, cfg, steps, start, stop)


def _run_paths(kind, params, cfg: PathConfig, steps: np.ndarray, workers: int) -> np.ndarray:
    workers = int(workers)
    if workers < 1:
        raise DomainError("workers must be >= 1")
    if workers == 1 or cfg.n_paths == 1:
        return _dispatch(kind, params, cfg, steps, 0, cfg.n_paths)
    edges = np.linspace(0, cfg.n_paths, min(workers, cfg.n_paths) + 1).astype(int)
    jobs = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=len(jobs)) as pool:
        futures = [pool.submit(_dispatch, kind, params, cfg, steps, a, b) for a, b in jobs]
        chunks = [f.result() for f in futures]
    # blocks come back in path order, so reductions see the same array
    return np.concatenate(chunks, axis=0)


def _steps_for(ts: Sequence[float], cfg: PathConfig) -> np.ndarray:
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if ts.size == 0:
        raise DomainError("need at least one time point")
    return np.array([cfg.step_index(float(t)) for t in ts], dtype=np.intp)


def _bernoulli(col, n):
    v = float(np.mean(col))
    return McEstimate(value=v, std_err=math.sqrt(max(v * (1.0 - v), 0.0) / n), n_paths=n)


def _sample_mean(col, n):
    v = float(np.mean(col))
    se = float(np.std(col, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return McEstimate(value=v, std_err=se, n_paths=n)


def _estimate(kind, params, ts, cfg, workers, summarise):
    steps = _steps_for(ts, cfg)
    values = _run_paths(kind, params, cfg, steps, workers)
    return [summarise(values[:, j], cfg.n_paths) for j in range(steps.size)]


def hitting_curve(w: WienerParams, ts, cfg: PathConfig, x: float | None = None, workers: int = 1) -> list[McEstimate]:
    """Hitting probabilities of the running maximum by each time in ``ts``.

    With ``x`` given the level is fixed; with ``x=None`` every path draws its
    own Exp(1) level. All times share the same paths.
    """
    if x is None:
        return _estimate("exponential", (w.eta, w.sigma2), ts, cfg, workers, _bernoulli)
    if not (math.isfinite(x) and x > 0):
        raise DomainError(f"threshold x must be finite and > 0, got {x!r}")
    return _estimate("fixed", (w.eta, w.sigma2, float(x)), ts, cfg, workers, _bernoulli)


def competing_survival_curve(rho: float, ts, cfg: PathConfig, workers: int = 1) -> list[McEstimate]:
    _check_rho(rho)
    return _estimate("competing", (float(rho),), ts, cfg, workers, _bernoulli)


def trauma_survival_curve(ts, threshold: float, cfg: PathConfig, workers: int = 1) -> list[McEstimate]:
    if not threshold > 0:
        raise DomainError(f"threshold must be > 0 (or inf), got {threshold!r}")
    return _estimate("trauma", (float(threshold),), ts, cfg, workers, _sample_mean)


def mc_fixed_threshold_hitting(w: WienerParams, x: float, t: float, cfg: PathConfig, workers: int = 1) -> McEstimate:
    """Fraction of marker paths whose discrete maximum reaches ``x`` by ``t``.

    Estimates ``ig_cdf(t, x, w)``; biased low by the discrete maximum.
    """
    return hitting_curve(w, [t], cfg, x=x, workers=workers)[0]


def mc_exponential_threshold_hitting(w: WienerParams, t: float, cfg: PathConfig, workers: int = 1) -> McEstimate:
    """Probability the running maximum crosses an Exp(1) threshold by ``t``."""
    return hitting_curve(w, [t], cfg, x=None, workers=workers)[0]


def mc_dependent_competing_survival(rho: float, t: float, cfg: PathConfig, workers: int = 1) -> McEstimate:
    """P(T >= t) when two correlated Brownian maximum processes race to one Exp(1) potential.

    A path pair survives while both running maxima stay at or below the
    shared threshold.
    """
    return competing_survival_curve(rho, [t], cfg, workers=workers)[0]


def mc_trauma_survival(t: float, threshold: float, cfg: PathConfig, workers: int = 1) -> McEstimate:
    """Mean of ``exp(-int_0^t H(s) ds) * 1{H(t) <= threshold}`` over gamma paths.

    The integral uses the trapezoidal rule on the path grid; pass
    ``threshold=math.inf`` for the trauma-only model.
    """
    return trauma_survival_curve([t], threshold, cfg, workers=workers)[0]
