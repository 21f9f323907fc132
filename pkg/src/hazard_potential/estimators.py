"""scikit-learn style estimator for residual-life prediction from marker data."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_marker_xy, check_time_column
from .distcore import Quadrature
from .inference import (
    MarkerSeries,
    PriorConfig,
    mle,
    posterior_grid,
    predictive_survival,
    residual_life_curve,
    threshold_posterior,
)


class WienerMaxLifetime(BaseEstimator):
    """Lifetime model for one item whose marker is a drifted Wiener process.

    ``fit(X, y)`` takes observation times ``X`` (shape ``(k,)`` or
    ``(k, 1)``) and marker readings ``y``; it builds the grid posterior of
    drift and diffusion and the shifted-exponential posterior of the hazard
    potential. ``predict(X)`` returns ``P(T > t)`` at the times in ``X`` and
    :meth:`predict_residual` the residual-life survival past the last reading.

    Parameters
    ----------
    a, b : float
        Bounds of the drift angle ``arctan(eta)``, ``0 < a < b < pi/2``.
    beta_p, beta_q : float
        Beta shapes of the rescaled drift angle.
    delta : int
        Tunes the diffusion prior so its mean is ``eta**2 / delta**2``.
    n_eta, n_sigma2 : int
        Grid sizes.
    sigma2_bounds : (float, float) or None
        Diffusion grid range; by default two decades either side of the MLE.
    running_max_shift : bool
        Condition the hazard potential on the largest reading rather than the last.
    rel_tol, abs_tol : float
        Quadrature tolerances for predictions.
    """

    def __init__(
        self,
        a=math.pi / 8,
        b=3 * math.pi / 8,
        beta_p=1.0,
        beta_q=1.0,
        delta=3,
        n_eta=64,
        n_sigma2=64,
        sigma2_bounds=None,
        running_max_shift=False,
        rel_tol=1e-8,
        abs_tol=1e-10,
    ):
        self.a = a
        self.b = b
        self.beta_p = beta_p
        self.beta_q = beta_q
        self.delta = delta
        self.n_eta = n_eta
        self.n_sigma2 = n_sigma2
        self.sigma2_bounds = sigma2_bounds
        self.running_max_shift = running_max_shift
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol

    def fit(self, X, y):
        times, values = check_marker_xy(X, y)
        self.markers_ = MarkerSeries(times, values)
        self.prior_ = PriorConfig(a=self.a, b=self.b, beta_p=self.beta_p, beta_q=self.beta_q, delta=self.delta)
        self.posterior_ = posterior_grid(
            self.markers_, self.prior_, self.n_eta, self.n_sigma2, sigma2_bounds=self.sigma2_bounds
        )
        self.threshold_posterior_ = threshold_posterior(self.markers_, use_running_max=self.running_max_shift)
        self.mle_ = mle(self.markers_)
        self.eta_mean_ = self.posterior_.eta_mean()
        self.sigma2_mean_ = self.posterior_.sigma2_mean()
        self.n_features_in_ = 1
        return self

    def _quadrature(self):
        return Quadrature(rel_tol=self.rel_tol, abs_tol=self.abs_tol)

    def predict(self, X):
        """Posterior predictive survival ``P(T > t; data)`` at each time in ``X``."""
        check_is_fitted(self, "posterior_")
        ts = check_time_column(X)
        q = self._quadrature()
        return np.array([predictive_survival(float(t), self.posterior_, self.threshold_posterior_, q) for t in ts])

    def predict_residual(self, U):
        """Survival of the residual life ``T - t_k`` at each ``u`` in ``U``."""
        check_is_fitted(self, "posterior_")
        us = check_time_column(U, name="U", allow_zero=True)
        return residual_life_curve(us, self.markers_, self.posterior_, self.threshold_posterior_, self._quadrature())
