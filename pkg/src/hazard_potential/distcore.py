"""Special functions and closed-form lifetime laws.

Gaussian CDF, the inverse Gaussian first-passage law of a drifted Wiener
process, the driftless reflection law, and the lifetime law obtained by
averaging the first-passage CDF over a unit-exponential threshold.

All functions broadcast over array arguments and return a Python float when
every input is scalar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _sp_integrate
from scipy import special

from .exceptions import DomainError, NumericError

__all__ = [
    "IgParams",
    "WienerParams",
    "Quadrature",
    "MIXTURE_X_MAX",
    "std_normal_cdf",
    "std_normal_logcdf",
    "std_normal_pdf",
    "ig_params_from_threshold",
    "ig_cdf",
    "ig_pdf",
    "reflection_hitting_cdf",
    "mixture_lifetime_cdf",
    "integrate",
]

# e**-40 ~ 4e-18 bounds the mass dropped by truncating the threshold integral.
MIXTURE_X_MAX = 40.0

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class WienerParams:
    """Drift ``eta`` and diffusion ``sigma2`` of a Wiener marker process.

    ``eta`` may be zero or negative here; operations that need a positive
    drift check it themselves.
    """

    eta: float
    sigma2: float

    def __post_init__(self):
        if not math.isfinite(self.eta):
            raise DomainError(f"eta must be finite, got {self.eta!r}")
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0):
            raise DomainError(f"sigma2 must be finite and > 0, got {self.sigma2!r}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


@dataclass(frozen=True)
class IgParams:
    """Mean ``mu`` and shape ``lam`` of an inverse Gaussian law."""

    mu: float
    lam: float

    def __post_init__(self):
        for name in ("mu", "lam"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be finite and > 0, got {v!r}")


@dataclass(frozen=True)
class Quadrature:
    """Tolerances for adaptive 1-D integration."""

    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_subdivisions: int = 2**14

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("quadrature tolerances must be > 0")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be a positive integer")


def _result(arr):
    arr = np.asarray(arr, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


def _require_positive_drift(w: WienerParams):
    if w.eta <= 0:
        raise DomainError(
            f"drift must be > 0 (got eta={w.eta}); with eta <= 0 the "
            "first-passage time has infinite mean"
        )


def std_normal_cdf(z):
    """Standard Gaussian CDF, accurate to about 1e-16 absolute."""
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise DomainError("std_normal_cdf needs finite input")
    # ndtr evaluates through erf/erfc depending on the argument range.
    return _result(special.ndtr(z))


def std_normal_logcdf(z):
    """log Phi(z), stable far into the lower tail."""
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise DomainError("std_normal_logcdf needs finite input")
    return _result(special.log_ndtr(z))


def std_normal_pdf(z):
    z = np.asarray(z, dtype=float)
    return _result(np.exp(-0.5 * z * z - 0.5 * _LOG_2PI))


def ig_params_from_threshold(x: float, w: WienerParams) -> IgParams:
    """Map a threshold and marker parameters to ``(mu, lam)``."""
    if not x > 0:
        raise DomainError(f"threshold x must be > 0, got {x!r}")
    _require_positive_drift(w)
    return IgParams(mu=x / w.eta, lam=x * x / w.sigma2)


def _check_threshold(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)) or np.any(~np.isfinite(x)):
        raise DomainError("threshold x must be finite and > 0")
    return x


def _check_time(t, *, strict=False):
    t = np.asarray(t, dtype=float)
    bad = ~(t > 0) if strict else ~(t >= 0)
    if np.any(bad):
        raise DomainError(f"time must be {'> 0' if strict else '>= 0'}")
    return t


def ig_cdf(t, x, w: WienerParams):
    """P(T_x <= t): first passage of a drifted Wiener process to level ``x``.

    Evaluates ``Phi(a) + exp(2*eta*x/sigma2) * Phi(b)`` with the second
    product formed in log space, so the exponential factor cannot overflow.
    ``t = 0`` gives exactly 0 and ``t = inf`` gives 1.
    """
    _require_positive_drift(w)
    t = _check_time(t)
    x = _check_threshold(x)
    t, x = np.broadcast_arrays(t, x)
    out = np.zeros(t.shape)
    out[np.isinf(t)] = 1.0
    live = (t > 0) & np.isfinite(t)
    if np.any(live):
        out[live] = _ig_cdf_core(t[live], x[live], w.eta, w.sigma2)
    return _result(np.clip(out, 0.0, 1.0))


def _ig_cdf_core(t, x, eta, sigma2):
    # unchecked; t > 0 finite, x > 0, eta > 0, all broadcastable
    sd = np.sqrt(sigma2 * t)
    first = special.ndtr((eta * t - x) / sd)
    log_second = 2.0 * eta * x / sigma2 + special.log_ndtr(-(eta * t + x) / sd)
    return first + np.exp(log_second)


def ig_pdf(t, x, w: WienerParams):
    """Density of the first-passage time to ``x`` at ``t > 0``."""
    _require_positive_drift(w)
    t = _check_time(t, strict=True)
    x = _check_threshold(x)
    mu = x / w.eta
    lam = x * x / w.sigma2
    with np.errstate(over="ignore"):
        logf = 0.5 * (np.log(lam) - _LOG_2PI - 3.0 * np.log(t)) - lam * (t - mu) ** 2 / (
            2.0 * mu * mu * t
        )
    return _result(np.exp(logf))


def reflection_hitting_cdf(t, x, sigma2: float):
    """P(T_x <= t) for a driftless Wiener process: ``2 * (1 - Phi(x / (sigma sqrt t)))``."""
    if not (math.isfinite(sigma2) and sigma2 > 0):
        raise DomainError("sigma2 must be finite and > 0")
    t = _check_time(t)
    x = _check_threshold(x)
    t, x = np.broadcast_arrays(t, x)
    out = np.zeros(t.shape)
    out[np.isinf(t)] = 1.0
    live = (t > 0) & np.isfinite(t)
    out[live] = 2.0 * special.ndtr(-x[live] / np.sqrt(sigma2 * t[live]))
    return _result(out)


def integrate(f, a: float, b: float, q: Quadrature | None = None, points=None) -> float:
    """Adaptive Gauss-Kronrod integral of ``f`` over ``(a, b)``.

    Either end may be infinite. Raises :class:`NumericError` carrying the
    partial estimate when the requested accuracy
    ``max(abs_tol, rel_tol * |result|)`` is not reached within
    ``q.max_subdivisions`` bisections.
    """
    q = q or Quadrature()
    if not a < b:
        raise DomainError(f"need a < b, got ({a}, {b})")
    finite = math.isfinite(a) and math.isfinite(b)
    pts = None
    if points is not None and finite:
        pts = [p for p in points if a < p < b] or None
    res = _sp_integrate.quad(
        f,
        a,
        b,
        epsabs=q.abs_tol,
        epsrel=q.rel_tol,
        limit=int(q.max_subdivisions),
        points=pts,
        full_output=1,
    )
    value, abserr, info = res[0], res[1], res[2]
    if len(res) > 3:
        # QUADPACK flags roundoff even on well-resolved integrals; only the
        # achieved error bound decides.
        if not abserr <= max(q.abs_tol, q.rel_tol * abs(value)):
            raise NumericError(
                f"quadrature did not converge after {info.get('last', '?')} "
                f"subintervals: {res[3]}",
                estimate=value,
                error=abserr,
            )
    return float(value)


def mixture_lifetime_cdf(t, w: WienerParams, q: Quadrature | None = None, x_max: float = MIXTURE_X_MAX):
    """Lifetime CDF when the failure threshold is unit exponential.

    ``F(t) = int_0^inf ig_cdf(t, x, w) exp(-x) dx``, truncated at ``x_max``.
    This averages the inverse Gaussian CDF over its location and is the
    hitting-time law of the Wiener maximum process to an Exp(1) threshold.
    """
    _require_positive_drift(w)
    t_arr = _check_time(t)
    out = np.empty(t_arr.shape)
    for idx, ti in np.ndenumerate(t_arr):
        if ti == 0:
            out[idx] = 0.0
            continue
        if math.isinf(ti):
            out[idx] = 1.0
            continue
        # the integrand drops most steeply near the expected marker level
        out[idx] = integrate(
            lambda x, ti=ti: ig_cdf(ti, x, w) * math.exp(-x),
            0.0,
            x_max,
            q,
            points=[w.eta * ti],
        )
    return _result(np.clip(out, 0.0, 1.0))
