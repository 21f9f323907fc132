"""Bayesian residual-life inference from a discretely observed marker.

The marker ``Z`` is a Wiener process with drift ``eta`` and diffusion
``sigma2``; the unobservable degradation is its running maximum, and the
item fails when that maximum crosses an Exp(1) hazard potential ``X``.

Given observations ``Z(t_1), ..., Z(t_k)`` the joint posterior factorises
into a grid posterior over ``(eta, sigma2)`` and an analytic shifted
exponential for ``X`` (the item is alive, so ``X > Z(t_k)``). Lifetime
predictions integrate the first-passage survival against both factors.
It is assumed, as in the underlying model, that survival past ``t`` is
conditionally independent of the marker data given ``(eta, sigma2, X)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import special, stats

from .distcore import Quadrature, WienerParams, _ig_cdf_core, integrate
from .exceptions import DomainError, NumericError

__all__ = [
    "MarkerSeries",
    "PriorConfig",
    "PosteriorGrid",
    "ThresholdPosterior",
    "log_likelihood",
    "eta_prior_logpdf",
    "sigma2_prior_logpdf",
    "posterior_grid",
    "threshold_posterior",
    "predictive_survival",
    "residual_life_survival",
    "residual_life_curve",
    "mle",
    "MleEstimate",
    "THRESHOLD_TAIL",
]

_LOG_2PI = math.log(2.0 * math.pi)

# width of the threshold integral above the shift; exp(-40) bounds the tail
THRESHOLD_TAIL = 40.0


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MarkerSeries:
    """Marker observations at strictly increasing positive times.

    ``Z(0) = 0`` is implicit and is not part of the series.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = _frozen(self.times)
        values = _frozen(self.values)
        if times.ndim != 1 or times.shape != values.shape:
            raise DomainError("times and values must be 1-D with equal length")
        if times.size < 1:
            raise DomainError("a marker series needs at least one observation")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise DomainError("marker times and values must be finite")
        if times[0] <= 0:
            raise DomainError("observation times must be > 0 (Z(0) = 0 is implicit)")
        bad = np.flatnonzero(np.diff(times) <= 0)
        if bad.size:
            raise DomainError(f"times must be strictly increasing (observation {bad[0] + 1})")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def k(self) -> int:
        return self.times.size

    @property
    def last_time(self) -> float:
        return float(self.times[-1])

    @property
    def last_value(self) -> float:
        return float(self.values[-1])

    def increments(self):
        """``(y, s)``: marker increments and time gaps, starting from ``Z(0) = 0``."""
        y = np.diff(self.values, prepend=0.0)
        s = np.diff(self.times, prepend=0.0)
        return y, s


@dataclass(frozen=True)
class PriorConfig:
    """Prior settings.

    The drift angle ``theta = arctan(eta)`` follows a beta law with shapes
    ``(beta_p, beta_q)`` stretched onto ``(a, b)``. Given ``eta``, ``sigma2``
    is inverse gamma, tuned so that its prior mean is ``eta**2 / delta**2``.
    """

    a: float = math.pi / 8
    b: float = 3 * math.pi / 8
    beta_p: float = 1.0
    beta_q: float = 1.0
    delta: int = 3

    def __post_init__(self):
        if not (0 < self.a < self.b < math.pi / 2):
            raise DomainError(f"need 0 < a < b < pi/2, got a={self.a}, b={self.b}")
        if not (self.beta_p > 0 and self.beta_q > 0):
            raise DomainError("beta shape parameters must be > 0")
        if int(self.delta) != self.delta or self.delta < 1:
            raise DomainError(f"delta must be a positive integer, got {self.delta!r}")

    @property
    def eta_bounds(self):
        return math.tan(self.a), math.tan(self.b)


@dataclass(frozen=True, eq=False)
class PosteriorGrid:
    """Tensor-grid posterior density over ``(eta, sigma2)``.

    ``log_weights[i, j]`` is the log posterior density at node
    ``(eta_nodes[i], sigma2_nodes[j])``; multiplying by the cell area gives
    the cell's probability mass.
    """

    eta_nodes: np.ndarray
    sigma2_nodes: np.ndarray
    log_weights: np.ndarray
    eta_edges: np.ndarray
    sigma2_edges: np.ndarray
    normalized: bool = True
    _masses: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("eta_nodes", "sigma2_nodes", "log_weights", "eta_edges", "sigma2_edges"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        ne, ns = self.eta_nodes.size, self.sigma2_nodes.size
        if self.log_weights.shape != (ne, ns):
            raise DomainError("log_weights must have shape (n_eta, n_sigma2)")
        if self.eta_edges.size != ne + 1 or self.sigma2_edges.size != ns + 1:
            raise DomainError("edges must have one more entry than nodes")
        if np.any(self.eta_nodes <= 0) or np.any(self.sigma2_nodes <= 0):
            raise DomainError("grid nodes must be positive")
        with np.errstate(under="ignore"):
            masses = np.exp(self.log_weights) * np.outer(np.diff(self.eta_edges), np.diff(self.sigma2_edges))
        masses.setflags(write=False)
        object.__setattr__(self, "_masses", masses)

    @classmethod
    def point_mass(cls, eta: float, sigma2: float) -> "PosteriorGrid":
        """A one-cell grid putting all mass on ``(eta, sigma2)``."""
        if not (eta > 0 and sigma2 > 0):
            raise DomainError("point mass needs eta > 0 and sigma2 > 0")
        eta_edges = [eta * (1 - 1e-9), eta * (1 + 1e-9)]
        s2_edges = [sigma2 * (1 - 1e-9), sigma2 * (1 + 1e-9)]
        # use the rounded widths so the single mass is 1 to machine precision
        log_w = -math.log(eta_edges[1] - eta_edges[0]) - math.log(s2_edges[1] - s2_edges[0])
        return cls(
            eta_nodes=[eta],
            sigma2_nodes=[sigma2],
            log_weights=[[log_w]],
            eta_edges=eta_edges,
            sigma2_edges=s2_edges,
        )

    @property
    def masses(self) -> np.ndarray:
        return self._masses

    def eta_mean(self) -> float:
        return float(np.sum(self._masses.sum(axis=1) * self.eta_nodes))

    def sigma2_mean(self) -> float:
        return float(np.sum(self._masses.sum(axis=0) * self.sigma2_nodes))

    def mode(self) -> tuple[float, float]:
        """Grid node with the largest posterior density."""
        i, j = np.unravel_index(np.argmax(self.log_weights), self.log_weights.shape)
        return float(self.eta_nodes[i]), float(self.sigma2_nodes[j])

    def mode_index(self) -> tuple[int, int]:
        i, j = np.unravel_index(np.argmax(self.log_weights), self.log_weights.shape)
        return int(i), int(j)


@dataclass(frozen=True)
class ThresholdPosterior:
    """Unit exponential hazard potential conditioned on ``X > shift``."""

    shift: float

    def __post_init__(self):
        if not (math.isfinite(self.shift) and self.shift >= 0):
            raise DomainError(f"shift must be finite and >= 0, got {self.shift!r}")

    def survival(self, x):
        """``P(X > x)``."""
        x = np.asarray(x, dtype=float)
        out = np.exp(-np.maximum(x - self.shift, 0.0))
        return float(out) if out.ndim == 0 else out

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x > self.shift, np.exp(-(x - self.shift)), 0.0)
        return float(out) if out.ndim == 0 else out


def log_likelihood(w: WienerParams, m: MarkerSeries) -> float:
    """Log-likelihood of the marker increments, ``y_i ~ N(eta s_i, sigma2 s_i)``."""
    y, s = m.increments()
    var = w.sigma2 * s
    return float(-0.5 * np.sum(_LOG_2PI + np.log(var) + (y - w.eta * s) ** 2 / var))


def eta_prior_logpdf(eta, p: PriorConfig):
    """Log prior density of the drift, induced by the beta law on its angle."""
    eta = np.asarray(eta, dtype=float)
    if np.any(~(eta > 0)):
        raise DomainError("eta must be > 0")
    theta = np.arctan(eta)
    u = (theta - p.a) / (p.b - p.a)
    inside = (u > 0) & (u < 1)
    out = np.full(eta.shape, -np.inf)
    out[inside] = (
        stats.beta.logpdf(u[inside], p.beta_p, p.beta_q) - math.log(p.b - p.a) - np.log1p(eta[inside] ** 2)
    )
    return float(out) if out.ndim == 0 else out


def _sigma2_prior_shape_scale(eta, delta):
    return delta * delta / (2.0 * eta) + 1.0, eta / 2.0


def sigma2_prior_logpdf(sigma2, eta, p: PriorConfig):
    """Log inverse-gamma prior of ``sigma2`` given the drift.

    Shape ``delta**2 / (2 eta) + 1`` and scale ``eta / 2``, i.e. a density
    proportional to ``sigma2**-(delta**2/(2 eta) + 2) * exp(-eta / (2 sigma2))``.
    """
    sigma2 = np.asarray(sigma2, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if np.any(~(sigma2 > 0)) or np.any(~(eta > 0)):
        raise DomainError("sigma2 and eta must be > 0")
    alpha, beta = _sigma2_prior_shape_scale(eta, p.delta)
    out = alpha * np.log(beta) - special.gammaln(alpha) - (alpha + 1.0) * np.log(sigma2) - beta / sigma2
    return float(out) if np.ndim(out) == 0 else out


class MleEstimate(NamedTuple):
    eta: float
    sigma2: float

    def as_params(self) -> WienerParams:
        """Convert to :class:`WienerParams`; fails when ``sigma2`` is 0."""
        return WienerParams(eta=self.eta, sigma2=self.sigma2)


def mle(m: MarkerSeries) -> MleEstimate:
    """Closed-form maximum likelihood estimates of drift and diffusion.

    ``eta = Z(t_k) / t_k`` and ``sigma2 = mean((y_i - eta s_i)**2 / s_i)``.
    The diffusion estimate is 0 when the increments follow the drift exactly.
    """
    if m.k < 2:
        raise DomainError("need at least two observations to estimate sigma2")
    return MleEstimate(*_mle_values(m))


def _mle_values(m: MarkerSeries):
    y, s = m.increments()
    eta = m.last_value / m.last_time
    return eta, float(np.mean((y - eta * s) ** 2 / s))


def posterior_grid(
    m: MarkerSeries,
    p: PriorConfig | None = None,
    n_eta: int = 64,
    n_sigma2: int = 64,
    sigma2_bounds: tuple[float, float] | None = None,
    flat_sigma2_prior: bool = False,
) -> PosteriorGrid:
    """Grid posterior of ``(eta, sigma2)``.

    ``eta`` nodes are uniform in angle over ``(a, b)``. ``sigma2`` nodes are
    log-uniform over ``sigma2_bounds``, by default ``[s/100, 100 s]`` around
    the maximum likelihood estimate ``s``. ``flat_sigma2_prior`` replaces the
    inverse-gamma factor by a constant.
    """
    p = p or PriorConfig()
    if n_eta < 2 or n_sigma2 < 2:
        raise DomainError("need at least 2 nodes per axis")
    if sigma2_bounds is None:
        if m.k < 2:
            raise DomainError("need at least two observations to place the sigma2 grid")
        _, s2 = _mle_values(m)
        if not s2 > 0:
            raise DomainError("sigma2 estimate is 0; pass sigma2_bounds explicitly")
        sigma2_bounds = (s2 / 100.0, s2 * 100.0)
    lo, hi = map(float, sigma2_bounds)
    if not 0 < lo < hi < math.inf:
        raise DomainError(f"invalid sigma2 bounds {sigma2_bounds!r}")

    theta_edges = np.linspace(p.a, p.b, n_eta + 1)
    eta_edges = np.tan(theta_edges)
    eta_nodes = np.tan(0.5 * (theta_edges[1:] + theta_edges[:-1]))
    s2_edges = np.geomspace(lo, hi, n_sigma2 + 1)
    log_s2 = 0.5 * (np.log(s2_edges[1:]) + np.log(s2_edges[:-1]))
    s2_nodes = np.exp(log_s2)

    y, s = m.increments()
    # sum_i (y_i - eta s_i)^2 / s_i for every eta node
    quad = np.sum((y[None, :] - eta_nodes[:, None] * s[None, :]) ** 2 / s[None, :], axis=1)
    with np.errstate(over="ignore"):
        loglik = (
            -0.5 * np.sum(_LOG_2PI + np.log(s))
            - 0.5 * m.k * log_s2[None, :]
            - quad[:, None] / (2.0 * s2_nodes[None, :])
        )
        logw = loglik + eta_prior_logpdf(eta_nodes, p)[:, None]
        if not flat_sigma2_prior:
            logw = logw + sigma2_prior_logpdf(s2_nodes[None, :], eta_nodes[:, None], p)

    log_area = np.log(np.diff(eta_edges))[:, None] + np.log(np.diff(s2_edges))[None, :]
    finite = np.isfinite(logw)
    if not np.any(finite):
        raise NumericError("posterior density underflows on every grid cell; widen or move the grid bounds")
    log_norm = special.logsumexp(logw[finite] + log_area[finite])
    if not math.isfinite(log_norm):
        raise NumericError("posterior normaliser is not finite; adjust the grid bounds")
    return PosteriorGrid(
        eta_nodes=eta_nodes,
        sigma2_nodes=s2_nodes,
        log_weights=logw - log_norm,
        eta_edges=eta_edges,
        sigma2_edges=s2_edges,
        normalized=True,
    )


def threshold_posterior(m: MarkerSeries, use_running_max: bool = False) -> ThresholdPosterior:
    """Posterior of the hazard potential: Exp(1) restricted to ``X > shift``.

    The shift is ``Z(t_k)`` clamped at 0. ``use_running_max`` uses the
    largest observed value instead, which is also a valid lower bound on
    ``X`` and never looser.
    """
    level = float(np.max(m.values)) if use_running_max else m.last_value
    return ThresholdPosterior(shift=max(0.0, level))


def predictive_survival(t: float, g: PosteriorGrid, xp: ThresholdPosterior, q: Quadrature | None = None) -> float:
    """``P(T > t; Z)`` averaged over the grid posterior and the threshold posterior.

    For each cell the first-passage survival ``1 - F_x(t)`` is integrated
    against the shifted exponential density of ``x``; the sum over cells is
    taken inside the integral.
    """
    if not g.normalized:
        raise DomainError("posterior grid must be normalized")
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"t must be finite and > 0, got {t!r}")
    masses = g.masses
    keep = masses > 0
    eta = np.broadcast_to(g.eta_nodes[:, None], masses.shape)[keep]
    s2 = np.broadcast_to(g.sigma2_nodes[None, :], masses.shape)[keep]
    w = masses[keep]
    shift = xp.shift

    def integrand(x):
        surv = 1.0 - _ig_cdf_core(t, x, eta, s2)
        return float(np.dot(w, surv)) * math.exp(-(x - shift))

    # x at which the posterior-mean marker sits at time t
    centre = float(np.dot(w, eta)) * t
    lo = shift if shift > 0 else 0.0
    value = integrate(integrand, lo, lo + THRESHOLD_TAIL, q, points=[centre])
    return min(1.0, max(0.0, value))


def residual_life_curve(us, m: MarkerSeries, g: PosteriorGrid, xp: ThresholdPosterior, q: Quadrature | None = None) -> np.ndarray:
    """``P(T > t_k + u) / P(T > t_k)`` for each ``u`` in ``us``."""
    us = np.atleast_1d(np.asarray(us, dtype=float))
    if np.any(~(us >= 0)) or np.any(~np.isfinite(us)):
        raise DomainError("residual times u must be finite and >= 0")
    denom = predictive_survival(m.last_time, g, xp, q)
    if not denom > 1e-300:
        raise NumericError(
            f"predictive survival at the last observation time is {denom!r}; residual life is undefined",
            estimate=denom,
        )
    out = np.empty(us.shape)
    for i, u in enumerate(us):
        num = denom if u == 0 else predictive_survival(m.last_time + float(u), g, xp, q)
        out[i] = min(num / denom, 1.0)
    return out


def residual_life_survival(u: float, m: MarkerSeries, g: PosteriorGrid, xp: ThresholdPosterior, q: Quadrature | None = None) -> float:
    """Probability of surviving ``u`` more time units past the last observation."""
    return float(residual_life_curve([u], m, g, xp, q)[0])
