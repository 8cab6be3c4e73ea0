"""Deterministic fault detection, isolation, and recovery baseline.

Residuals are the sensory prediction errors, split into a proprioceptive
group (position + velocity encoders) and a visual group (camera).  Each
group gets a Mahalanobis monitor calibrated from healthy-run samples, with
the distribution-free threshold n/alpha; exceeding it for a configurable
number of consecutive steps declares and isolates a fault, after which the
faulty sensor group's precision is zeroed outright.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError
from .gpr_camera import predict


@dataclass
class ResidualMonitor:
    mean: np.ndarray
    cov: np.ndarray
    cov_inv: np.ndarray
    n: int
    alpha: float

    @property
    def threshold(self):
        return self.n / self.alpha


@dataclass(frozen=True)
class FaultVerdict:
    detected: bool
    isolated_source: str  # 'encoders' | 'camera' | 'none'
    step: int = -1

    def __post_init__(self):
        if self.isolated_source != "none" and not self.detected:
            raise ValueError("isolated fault implies detection")


HEALTHY = FaultVerdict(detected=False, isolated_source="none")


def compute_residual(obs, belief, model, g_v=None):
    """Residual pair (r_p, r_v): the same errors the objective weighs."""
    if g_v is None:
        g_v = predict(model, belief.mu)
    r_p = np.concatenate([obs.y_q - belief.mu, obs.y_qdot - belief.mu_prime])
    r_v = obs.y_v - g_v
    return r_p, r_v


def calibrate(samples, alpha):
    """Build a monitor from healthy residual samples (one row per step)."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[1]
    if samples.shape[0] < 10 * n:
        raise CalibrationError(
            f"need at least {10 * n} samples for dimension {n}, got {samples.shape[0]}")
    if not 0.0 < alpha <= 1.0:
        raise CalibrationError("alpha must be in (0, 1]")
    mean = samples.mean(axis=0)
    cov = np.cov(samples, rowvar=False)
    cov = np.atleast_2d(cov)
    ridge = 1e-12 * np.trace(cov)
    cov = cov + ridge * np.eye(n)
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise CalibrationError("residual covariance is not positive definite") from exc
    return ResidualMonitor(mean=mean, cov=cov, cov_inv=np.linalg.inv(cov),
                           n=n, alpha=alpha)


def mahalanobis(r, monitor):
    d = np.asarray(r, dtype=float) - monitor.mean
    return float(np.sqrt(d @ monitor.cov_inv @ d))


def detect(d_m, monitor):
    """Alarm iff the distance strictly exceeds n/alpha (boundary is healthy)."""
    return d_m > monitor.threshold


class FaultIsolator:
    """Persistence-filtered isolation over the two residual monitors.

    A source is declared only after its monitor alarms for ``persistence``
    consecutive steps; if both alarm, the larger threshold-normalized
    distance wins.  The verdict latches once declared.
    """

    def __init__(self, monitor_p, monitor_v, persistence=10):
        self.monitor_p = monitor_p
        self.monitor_v = monitor_v
        self.persistence = persistence
        self._count_p = 0
        self._count_v = 0
        self._verdict = HEALTHY

    def isolate(self, d_m_p, d_m_v, step):
        if self._verdict.detected:
            return self._verdict
        self._count_p = self._count_p + 1 if detect(d_m_p, self.monitor_p) else 0
        self._count_v = self._count_v + 1 if detect(d_m_v, self.monitor_v) else 0
        over_p = self._count_p >= self.persistence
        over_v = self._count_v >= self.persistence
        if over_p and over_v:
            ratio_p = d_m_p / self.monitor_p.threshold
            ratio_v = d_m_v / self.monitor_v.threshold
            source = "encoders" if ratio_p >= ratio_v else "camera"
        elif over_p:
            source = "encoders"
        elif over_v:
            source = "camera"
        else:
            return HEALTHY
        self._verdict = FaultVerdict(detected=True, isolated_source=source, step=step)
        return self._verdict


class DeadReckoner:
    """Encoder consistency check: position integrated from velocity alone.

    The estimate follows the velocity encoders with only a weak pull
    toward the position encoders, so it keeps moving with the arm when a
    position channel freezes and the residual against that channel grows
    without bound.  This gives the isolator a proprioceptive signal that
    does not depend on the fused belief (which a dominant frozen sensor
    can pin).
    """

    def __init__(self, q0, dt, gain):
        self.est = np.array(q0, dtype=float)
        self.dt = dt
        self.gain = gain

    def step(self, y_q, y_qdot):
        """Advance one tick; returns the position residual y_q - estimate."""
        r = y_q - self.est
        self.est = self.est + y_qdot * self.dt + self.gain * r
        return r


def recover(precisions, verdict):
    """Zero the precision of the isolated sensor group (idempotent)."""
    if not verdict.detected:
        raise ValueError("recover requires a detected fault")
    out = precisions.copy()
    if verdict.isolated_source == "encoders":
        out.zero_q = np.ones(2, dtype=bool)
    elif verdict.isolated_source == "camera":
        out.zero_v = np.ones(2, dtype=bool)
    else:
        raise ValueError(f"cannot recover from source {verdict.isolated_source!r}")
    return out


def save_monitor(monitor, path):
    np.savez(path, mean=monitor.mean, cov=monitor.cov,
             meta=np.array([monitor.n, monitor.alpha]))


def load_monitor(path):
    data = np.load(path)
    cov = data["cov"]
    return ResidualMonitor(mean=data["mean"], cov=cov, cov_inv=np.linalg.inv(cov),
                           n=int(data["meta"][0]), alpha=float(data["meta"][1]))
