"""Sensor bundle: noisy encoders, noisy/distorted camera, scripted faults.

A SensorArray owns one seeded generator and one frozen-value cache, so it
belongs to exactly one scenario run.  Noise draw order per step is fixed:
q1, q2, qd1, qd2, vx, vy.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .plant import CartesianPoint


@dataclass(frozen=True)
class NoiseSpec:
    sigma_q: float = 0.001
    sigma_qdot: float = 0.001
    sigma_v: float = 0.01

    def __post_init__(self):
        if min(self.sigma_q, self.sigma_qdot, self.sigma_v) < 0:
            raise ValueError("noise standard deviations must be >= 0")


@dataclass(frozen=True)
class DistortionSpec:
    """Radial distortion coefficients in normalized workspace coordinates."""

    k1: float = -1.5e-3
    k2: float = 5e-6
    k3: float = 0.0


@dataclass(frozen=True)
class FaultSpec:
    """A scripted sensor fault.

    kind: only 'encoder-freeze' is supported; the channel of y_q holds the
    value it emitted at step k_f (including that step's noise) forever.
    """

    kind: str
    channel: int
    k_f: int

    def __post_init__(self):
        if self.kind != "encoder-freeze":
            raise ConfigError(f"unknown fault kind: {self.kind!r}")
        if self.channel not in (0, 1):
            raise ConfigError(f"fault channel {self.channel} out of range for {self.kind}")
        if self.k_f < 0:
            raise ConfigError("fault activation step must be >= 0")


@dataclass
class SensorBundle:
    y_q: np.ndarray
    y_qdot: np.ndarray
    y_v: np.ndarray


def barrel_distort(p, spec, center, scale):
    """Apply the radial polynomial distortion model around ``center``.

    r is the distance from the center in units of ``scale``; the point is
    scaled radially by 1 + k1 r^2 + k2 r^4 + k3 r^6.
    """
    if scale <= 0:
        raise ValueError("distortion scale must be positive")
    d = p.as_array() - center.as_array()
    r2 = float(d @ d) / (scale * scale)
    factor = 1.0 + spec.k1 * r2 + spec.k2 * r2 ** 2 + spec.k3 * r2 ** 3
    out = center.as_array() + d * factor
    return CartesianPoint(x=float(out[0]), y=float(out[1]))


class SensorArray:
    """Produces one SensorBundle per step from the ground truth."""

    def __init__(self, noise, distortion, faults, center, scale, seed):
        self.noise = noise
        self.distortion = distortion
        self.faults = list(faults)
        self.center = center
        self.scale = scale
        self.rng = np.random.default_rng(seed)
        self._frozen = {}

    def read(self, truth, ee, k):
        """Noisy observation of the arm at step k, with faults applied."""
        eta = self.rng.standard_normal(6)
        y_q = truth.q + self.noise.sigma_q * eta[0:2]
        y_qdot = truth.qdot + self.noise.sigma_qdot * eta[2:4]
        distorted = barrel_distort(ee, self.distortion, self.center, self.scale)
        y_v = distorted.as_array() + self.noise.sigma_v * eta[4:6]

        for i, fault in enumerate(self.faults):
            if k < fault.k_f:
                continue
            if i not in self._frozen:
                # first faulty step: hold the noisy reading emitted right now
                self._frozen[i] = y_q[fault.channel]
            y_q[fault.channel] = self._frozen[i]

        return SensorBundle(y_q=y_q, y_qdot=y_qdot, y_v=y_v)
