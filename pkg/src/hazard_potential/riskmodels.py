"""Closed-form survival functions for competing risks.

An item fails when its cumulative hazard crosses its hazard potential, a
unit-exponential resource. How several hazards combine depends on how the
potentials of the competing causes are related:

* independent potentials add the cumulative hazards,
* Gumbel-dependent potentials add an interaction term,
* a single shared potential takes the largest hazard.

The first and last bracket every series-system model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .exceptions import DomainError

__all__ = [
    "PowerLawHazard",
    "TabulatedHazard",
    "HazardCurve",
    "additive_survival",
    "gumbel_survival",
    "max_rule_survival",
    "survival_bounds",
    "trauma_gamma_closed",
]


@dataclass(frozen=True)
class PowerLawHazard:
    """Cumulative hazard ``H(t) = scale * t**power``.

    ``power == 1`` is a normal environment, ``power > 1`` (for t > 1) an
    accelerated one.
    """

    scale: float
    power: float

    def __post_init__(self):
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise DomainError(f"scale must be > 0, got {self.scale!r}")
        if not (math.isfinite(self.power) and self.power > 0):
            raise DomainError(f"power must be > 0, got {self.power!r}")

    def __call__(self, t):
        t = _check_t(t)
        return _scalar(self.scale * np.power(t, self.power))

    def inverse(self, h):
        """Time at which the cumulative hazard reaches ``h``."""
        h = np.asarray(h, dtype=float)
        return _scalar(np.power(h / self.scale, 1.0 / self.power))


class TabulatedHazard:
    """Cumulative hazard given by a nondecreasing table, interpolated linearly.

    The table must start at ``(0, 0)``. Evaluating past the last knot raises
    :class:`DomainError` instead of extrapolating.
    """

    def __init__(self, times, values):
        times = np.array(times, dtype=float)
        values = np.array(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise DomainError("hazard table needs matching 1-D times/values with >= 2 knots")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise DomainError("hazard table must be finite")
        if times[0] != 0 or values[0] != 0:
            raise DomainError("hazard table must start at (0, 0)")
        if np.any(np.diff(times) <= 0):
            raise DomainError("hazard table times must be strictly increasing")
        if np.any(np.diff(values) < 0):
            raise DomainError("hazard table values must be nondecreasing")
        times.setflags(write=False)
        values.setflags(write=False)
        self._times = times
        self._values = values

    @property
    def times(self):
        return self._times

    @property
    def values(self):
        return self._values

    def __call__(self, t):
        t = _check_t(t)
        if np.any(t > self._times[-1]):
            raise DomainError(
                f"t beyond the last table knot {self._times[-1]} would need extrapolation"
            )
        return _scalar(np.interp(t, self._times, self._values))

    def __repr__(self):
        return f"TabulatedHazard(knots={self._times.size}, t_max={self._times[-1]})"


HazardCurve = Union[PowerLawHazard, TabulatedHazard]


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t >= 0)):
        raise DomainError("t must be >= 0")
    return t


def _scalar(arr):
    arr = np.asarray(arr, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


def _stack(hs: Sequence[HazardCurve], t):
    if len(hs) == 0:
        raise DomainError("need at least one hazard curve")
    return np.stack([np.asarray(h(t), dtype=float) for h in hs])


def additive_survival(hs: Sequence[HazardCurve], t):
    """``exp(-sum_i H_i(t))``: independent hazard potentials."""
    return _scalar(np.exp(-_stack(hs, t).sum(axis=0)))


def gumbel_survival(h1: HazardCurve, h2: HazardCurve, theta: float, t):
    """Survival under Gumbel's bivariate exponential potentials.

    ``exp(-(H1 + H2 + theta * H1 * H2))`` with ``0 <= theta <= 1``.
    """
    if not (0.0 <= theta <= 1.0):
        raise DomainError(f"theta must lie in [0, 1], got {theta!r}")
    a = np.asarray(h1(t), dtype=float)
    b = np.asarray(h2(t), dtype=float)
    return _scalar(np.exp(-(a + b + theta * a * b)))


def max_rule_survival(hs: Sequence[HazardCurve], t):
    """``exp(-max_i H_i(t))``: all agents draw on one shared potential."""
    return _scalar(np.exp(-_stack(hs, t).max(axis=0)))


def survival_bounds(hs: Sequence[HazardCurve], t):
    """Return ``(lower, upper)`` = (additive, max-rule) survival."""
    H = _stack(hs, t)
    return _scalar(np.exp(-H.sum(axis=0))), _scalar(np.exp(-H.max(axis=0)))


def trauma_gamma_closed(t):
    """Survival to ``t`` under trauma driven by a standard gamma process.

    Impulses arrive at a rate equal to the current gamma-process level and
    the hazard threshold is infinite: ``exp(t - (1 + t) log(1 + t))``.
    """
    t = _check_t(t)
    return _scalar(np.exp(t - (1.0 + t) * np.log1p(t)))
