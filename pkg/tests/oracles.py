"""Independent reference values and samplers used by the tests.

The constants were computed with mpmath at 30 digits from the defining
formulas (see ``recompute``), not from the package under test.
"""

import math

import mpmath as mp
import numpy as np

PHI_1 = 0.841344746068542948
PHI_MINUS_2 = 0.0227501319481792072

# first-passage CDF of a Wiener process with eta = sigma2 = 1
IG_CDF_T1_X1 = 0.668102001223170606
IG_CDF_T1_X2 = 0.232357189191843040
IG_CDF_T2_X1 = 0.885475425986006428
IG_PDF_T1_X1 = 0.398942280401432678
REFLECTION_T1_X1 = 0.317310507862914103

# Exp(1)-threshold mixture at eta = sigma2 = 1
MIXTURE = {
    0.5: 0.520499877813046538,
    1.0: 0.682689492137085897,
    2.0: 0.842700792949714869,
    5.0: 0.974652681322531736,
}

TRAUMA = {
    0.5: 0.897450186952980321,
    1.0: 0.679570457114761309,
    2.0: 0.273668744404838897,
}

# P(both Brownian maxima at t=1 stay below an Exp(1) level)
COMPETING_RHO1 = 0.523156583730246743
COMPETING_RHO0 = 0.379074599932403533

LOGLIK_TWO_EXACT = -1.83787706640934548
FOLDED_CAUCHY_LOG_AT_0 = -0.451582705289454865


def recompute(dps=30):
    """Recompute every constant above with mpmath."""
    mp.mp.dps = dps
    Phi = mp.ncdf

    def F(t, x, eta=1, s2=1):
        s = mp.sqrt(s2)
        rt = mp.sqrt(t)
        return Phi(eta * rt / s - x / (s * rt)) + mp.e ** (2 * eta * x / s2) * Phi(-eta * rt / s - x / (s * rt))

    out = {
        "PHI_1": Phi(1),
        "PHI_MINUS_2": Phi(-2),
        "IG_CDF_T1_X1": F(1, 1),
        "IG_CDF_T1_X2": F(1, 2),
        "IG_CDF_T2_X1": F(2, 1),
        "IG_PDF_T1_X1": 1 / mp.sqrt(2 * mp.pi),
        "REFLECTION_T1_X1": 2 * (1 - Phi(1)),
        "COMPETING_RHO1": mp.quad(lambda x: (2 * Phi(x) - 1) * mp.e**-x, [0, mp.inf]),
        "COMPETING_RHO0": mp.quad(lambda x: (2 * Phi(x) - 1) ** 2 * mp.e**-x, [0, mp.inf]),
        "LOGLIK_TWO_EXACT": -mp.log(2 * mp.pi),
        "FOLDED_CAUCHY_LOG_AT_0": mp.log(2 / mp.pi),
    }
    out["MIXTURE"] = {t: mp.quad(lambda x: F(t, x) * mp.e**-x, [0, 1, 5, mp.inf]) for t in MIXTURE}
    out["TRAUMA"] = {t: mp.e ** (-(1 + t) * mp.log(1 + t) + t) for t in TRAUMA}
    return out


def mixture_closed_form_t1():
    """Hand reduction of the eta = sigma2 = 1, t = 1 mixture integral.

    int Phi(1-x) e^-x dx = Phi(1) - e^{-1/2} Phi(0) and
    int e^x Phi(-1-x) dx = Phi(0) e^{-1/2} - Phi(-1).
    """
    Phi = lambda z: 0.5 * math.erfc(-z / math.sqrt(2))  # noqa: E731
    return (Phi(1) - math.exp(-0.5) * Phi(0)) + (Phi(0) * math.exp(-0.5) - Phi(-1))


def gumbel_conditional_survival(x2, x1, theta):
    """P(X2 > x2 | X1 = x1) for survival exp(-x1 - x2 - theta x1 x2)."""
    return (1.0 + theta * x2) * np.exp(-x2 * (1.0 + theta * x1))


def sample_gumbel_bve(n, theta, rng, iters=200):
    """Draw from Gumbel's bivariate exponential by conditional inversion.

    X1 ~ Exp(1); X2 solves P(X2 > x2 | X1) = U by bisection.
    """
    x1 = rng.standard_exponential(n)
    u = 1.0 - rng.random(n)  # (0, 1]
    lo = np.zeros(n)
    hi = np.full(n, 100.0)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above = gumbel_conditional_survival(mid, x1, theta) > u
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return x1, 0.5 * (lo + hi)


def brute_force_wiener_hits(eta, sigma2, x, t, n_paths, dt, seed):
    """Plain vectorised Euler simulation, independent of the package's RNG layout."""
    rng = np.random.default_rng(seed)
    n = int(round(t / dt))
    hits = 0
    for start in range(0, n_paths, 2000):
        m = min(2000, n_paths - start)
        z = np.cumsum(eta * dt + math.sqrt(sigma2 * dt) * rng.standard_normal((m, n)), axis=1)
        hits += int(np.sum(z.max(axis=1) >= x))
    return hits / n_paths
