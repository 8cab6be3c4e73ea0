"""Ground-truth two-link planar arm.

The controller never sees this model; it only receives the sensor readings
produced from it.  Dynamics are the standard point-mass-at-link-end
two-link equations with viscous joint friction and optional gravity,
integrated with semi-implicit Euler.
"""

from dataclasses import dataclass, field

import numpy as np

from .accel import maybe_njit
from .errors import SimulationDivergedError

GRAVITY = 9.81


@dataclass(frozen=True)
class PlantParams:
    """Physical parameters of the simulated arm."""

    l1: float = 1.0          # link lengths [m]
    l2: float = 1.0
    m1: float = 1.0          # point masses at link ends [kg]
    m2: float = 1.0
    friction: tuple = (0.1, 0.1)  # viscous coefficients [N m s/rad]
    gravity: bool = False
    dt: float = 1e-3         # integration step [s]

    def __post_init__(self):
        if min(self.l1, self.l2, self.m1, self.m2) <= 0:
            raise ValueError("link lengths and masses must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if min(self.friction) < 0:
            raise ValueError("friction coefficients must be >= 0")


@dataclass
class JointState:
    """Joint angles (rad, wrapped to (-pi, pi]) and velocities (rad/s)."""

    q: np.ndarray
    qdot: np.ndarray

    def as_vector(self):
        return np.concatenate([self.q, self.qdot])


@dataclass
class CartesianPoint:
    x: float
    y: float

    def as_array(self):
        return np.array([self.x, self.y])


def wrap_angle(q):
    """Wrap angles to (-pi, pi].  Applied at publication boundaries only."""
    return np.pi - np.mod(np.pi - np.asarray(q, dtype=float), 2.0 * np.pi)


@maybe_njit
def arm_step_kernel(q, qd, tau, l1, l2, m1, m2, b1, b2, g, dt):
    c2 = np.cos(q[1])
    s2 = np.sin(q[1])

    m11 = (m1 + m2) * l1 * l1 + m2 * l2 * l2 + 2.0 * m2 * l1 * l2 * c2
    m12 = m2 * l2 * l2 + m2 * l1 * l2 * c2
    m22 = m2 * l2 * l2

    # Coriolis / centrifugal
    h = m2 * l1 * l2 * s2
    cor1 = -h * (2.0 * qd[0] * qd[1] + qd[1] * qd[1])
    cor2 = h * qd[0] * qd[0]

    g1 = 0.0
    g2 = 0.0
    if g != 0.0:
        c1 = np.cos(q[0])
        c12 = np.cos(q[0] + q[1])
        g1 = (m1 + m2) * g * l1 * c1 + m2 * g * l2 * c12
        g2 = m2 * g * l2 * c12

    t1 = tau[0] - cor1 - g1 - b1 * qd[0]
    t2 = tau[1] - cor2 - g2 - b2 * qd[1]

    det = m11 * m22 - m12 * m12
    qdd1 = (m22 * t1 - m12 * t2) / det
    qdd2 = (m11 * t2 - m12 * t1) / det

    qd_new = np.empty(2)
    qd_new[0] = qd[0] + qdd1 * dt
    qd_new[1] = qd[1] + qdd2 * dt
    q_new = np.empty(2)
    q_new[0] = q[0] + qd_new[0] * dt
    q_new[1] = q[1] + qd_new[1] * dt
    return q_new, qd_new


def step_dynamics(state, torque, params, step=None):
    """Advance the arm one dt under the given joint torques.

    Semi-implicit Euler: velocities update first, positions use the new
    velocities.  Raises SimulationDivergedError if the result is
    non-finite.
    """
    torque = np.asarray(torque, dtype=float)
    b1, b2 = params.friction
    g = GRAVITY if params.gravity else 0.0
    q_new, qd_new = arm_step_kernel(
        np.asarray(state.q, dtype=float), np.asarray(state.qdot, dtype=float),
        torque, params.l1, params.l2, params.m1, params.m2, b1, b2, g, params.dt,
    )
    if not (np.all(np.isfinite(q_new)) and np.all(np.isfinite(qd_new))):
        raise SimulationDivergedError("plant state became non-finite", step=step)
    return JointState(q=wrap_angle(q_new), qdot=qd_new)


def forward_kinematics(q, params):
    """End-effector position of the arm for joint angles q."""
    x = params.l1 * np.cos(q[0]) + params.l2 * np.cos(q[0] + q[1])
    y = params.l1 * np.sin(q[0]) + params.l2 * np.sin(q[0] + q[1])
    return CartesianPoint(x=float(x), y=float(y))


def mechanical_energy(state, params):
    """Kinetic plus gravitational potential energy (integrator diagnostics)."""
    q, qd = state.q, state.qdot
    c2 = np.cos(q[1])
    m11 = (params.m1 + params.m2) * params.l1 ** 2 + params.m2 * params.l2 ** 2 \
        + 2.0 * params.m2 * params.l1 * params.l2 * c2
    m12 = params.m2 * params.l2 ** 2 + params.m2 * params.l1 * params.l2 * c2
    m22 = params.m2 * params.l2 ** 2
    kinetic = 0.5 * (m11 * qd[0] ** 2 + 2.0 * m12 * qd[0] * qd[1] + m22 * qd[1] ** 2)
    potential = 0.0
    if params.gravity:
        s1 = np.sin(q[0])
        s12 = np.sin(q[0] + q[1])
        potential = GRAVITY * (
            params.m1 * params.l1 * s1
            + params.m2 * (params.l1 * s1 + params.l2 * s12)
        )
    return float(kinetic + potential)
