"""Online sensor-precision adaptation.

Two routes to the same end: gradient descent on the objective in
log-precision space (always positive by construction), and the conjugate
Gamma posterior over a scalar Gaussian precision.  Either way a failing
sensor loses weight in the estimation and control laws in proportion to
how wrong it is, with no detection threshold involved.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .accel import maybe_njit
from .controller import ZETA_MAX, ZETA_MIN, PrecisionSet
from .errors import UndefinedModeError


class PrecisionMode(str, enum.Enum):
    FIXED = "fixed"
    PL_ALWAYS = "pl-always"
    PL_ON_DETECT = "pl-on-detect"
    BAYESIAN = "bayesian"


def log_precision_gradient(eps, zeta):
    """d(objective)/d(zeta) for one scalar channel: 0.5 (e^zeta eps^2 - 1)."""
    return 0.5 * (np.exp(zeta) * np.asarray(eps) ** 2 - 1.0)


@maybe_njit
def pl_step_kernel(zeta, eps, k_zeta, dt, lo, hi):
    out = np.empty_like(zeta)
    for i in range(zeta.shape[0]):
        grad = 0.5 * (np.exp(zeta[i]) * eps[i] * eps[i] - 1.0)
        z = zeta[i] - k_zeta * grad * dt
        if z < lo:
            z = lo
        elif z > hi:
            z = hi
        out[i] = z
    return out


def step_log_precisions(precisions, eps_q, eps_qdot, eps_v, k_zeta, dt,
                        mode, detected=False):
    """One gradient step on the sensor-channel log-precisions.

    Only the three sensor groups are learned; state and action precisions
    stay fixed.  In pl-on-detect mode nothing moves until a fault has been
    flagged.
    """
    mode = PrecisionMode(mode)
    if mode is PrecisionMode.FIXED:
        raise ValueError("step_log_precisions must not be called in fixed mode")
    if mode is PrecisionMode.PL_ON_DETECT and not detected:
        return precisions
    out = precisions.copy()
    out.zeta_q = pl_step_kernel(precisions.zeta_q, np.asarray(eps_q, dtype=float),
                                k_zeta, dt, ZETA_MIN, ZETA_MAX)
    out.zeta_qdot = pl_step_kernel(precisions.zeta_qdot, np.asarray(eps_qdot, dtype=float),
                                   k_zeta, dt, ZETA_MIN, ZETA_MAX)
    out.zeta_v = pl_step_kernel(precisions.zeta_v, np.asarray(eps_v, dtype=float),
                                k_zeta, dt, ZETA_MIN, ZETA_MAX)
    return out


@dataclass(frozen=True)
class GammaBelief:
    """Gamma distribution over one scalar precision: shape a, rate b."""

    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("Gamma parameters must be positive")


def gamma_prior(sigma, a0=2.0):
    """Prior whose mean matches the nominal precision 1/sigma^2."""
    return GammaBelief(a=a0, b=a0 * sigma ** 2)


def gamma_update(belief, y, c):
    """Conjugate update for one Gaussian observation y with predicted mean c."""
    return GammaBelief(a=belief.a + 0.5, b=belief.b + (y - c) ** 2 / 2.0)


@dataclass(frozen=True)
class GammaEstimates:
    mean: float
    variance: float
    _a: float
    _b: float

    @property
    def mode(self):
        if self._a <= 1.0:
            raise UndefinedModeError(f"Gamma mode undefined for shape a={self._a} <= 1")
        return (self._a - 1.0) / self._b


def gamma_estimates(belief):
    """Point statistics of the precision posterior; mean is the plug-in."""
    return GammaEstimates(
        mean=belief.a / belief.b,
        variance=belief.a / belief.b ** 2,
        _a=belief.a, _b=belief.b,
    )


class GammaBank:
    """Per-channel Gamma beliefs for the six sensor channels.

    Order matches the noise draw order: q1, q2, qd1, qd2, vx, vy.
    """

    def __init__(self, omega_q, omega_qdot, omega_v, a0=2.0):
        means = [omega_q] * 2 + [omega_qdot] * 2 + [omega_v] * 2
        self.beliefs = [GammaBelief(a=a0, b=a0 / m) for m in means]

    def update(self, eps_q, eps_qdot, eps_v):
        errors = np.concatenate([eps_q, eps_qdot, eps_v])
        self.beliefs = [gamma_update(bel, float(e), 0.0)
                        for bel, e in zip(self.beliefs, errors)]

    def apply(self, precisions):
        """Plug posterior-mean precisions into a copy of the precision set."""
        means = np.array([bel.a / bel.b for bel in self.beliefs])
        out = precisions.copy()
        out.zeta_q = np.log(means[0:2])
        out.zeta_qdot = np.log(means[2:4])
        out.zeta_v = np.log(means[4:6])
        return out
