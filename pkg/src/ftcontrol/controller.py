"""Active-inference torque controller.

State estimation and control both follow the gradient of one scalar
objective: the precision-weighted sum of squared prediction errors over
the five Gaussian factors (position encoders, velocity encoders, camera,
state prediction, action), plus the log-precision terms.  The action mean
is emitted directly as the torque command, so goal information never
enters the state estimate except through the action prediction error.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .accel import maybe_njit
from .errors import SimulationDivergedError
from .gpr_camera import predict_with_gradient

ZETA_MIN = -20.0
ZETA_MAX = 20.0


@dataclass
class BeliefState:
    mu: np.ndarray        # believed joint angles (2,)
    mu_prime: np.ndarray  # believed joint velocities (2,)
    mu_u: np.ndarray      # action mean / torque command (2,)

    @classmethod
    def initial(cls, q0):
        return cls(mu=np.array(q0, dtype=float), mu_prime=np.zeros(2), mu_u=np.zeros(2))


@dataclass
class Target:
    mu_d: np.ndarray


@dataclass(frozen=True)
class ControllerGains:
    k_mu: float = 9e-4    # belief gradient step size
    k_u: float = 1e4      # action gradient step size
    dt: float = 1e-3
    kp: float = 25.0      # attractor stiffness
    kd: float = 10.0      # attractor damping
    tau_max: float = 50.0

    def __post_init__(self):
        if min(self.k_mu, self.k_u, self.dt, self.kp, self.kd, self.tau_max) <= 0:
            raise ValueError("controller gains must be positive")


@dataclass
class PrecisionSet:
    """Diagonal precisions of the five Gaussian factors, log-parameterized.

    omega = exp(zeta) per entry, so learned precisions stay positive by
    construction.  The zero masks are the hard-recovery escape hatch: a
    masked channel contributes neither a quadratic nor a log term.
    """

    zeta_q: np.ndarray
    zeta_qdot: np.ndarray
    zeta_v: np.ndarray
    zeta_x: np.ndarray
    zeta_u: np.ndarray
    zero_q: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=bool))
    zero_qdot: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=bool))
    zero_v: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=bool))

    @classmethod
    def from_values(cls, omega_q, omega_qdot, omega_v, omega_x_pos=1e6,
                    omega_x_vel=1.0, omega_u=1e-2):
        """Healthy starting point from per-group precision values.

        The position rows of the state-prediction precision are strong on
        purpose: the belief then integrates the believed velocity
        (predictor-corrector style) instead of leaning on the position
        encoders alone, which is what lets a frozen encoder lose the
        fusion tug-of-war.
        """
        return cls(
            zeta_q=np.full(2, np.log(omega_q)),
            zeta_qdot=np.full(2, np.log(omega_qdot)),
            zeta_v=np.full(2, np.log(omega_v)),
            zeta_x=np.log(np.array([omega_x_pos, omega_x_pos,
                                    omega_x_vel, omega_x_vel])),
            zeta_u=np.full(2, np.log(omega_u)),
        )

    @property
    def omega_q(self):
        return np.where(self.zero_q, 0.0, np.exp(self.zeta_q))

    @property
    def omega_qdot(self):
        return np.where(self.zero_qdot, 0.0, np.exp(self.zeta_qdot))

    @property
    def omega_v(self):
        return np.where(self.zero_v, 0.0, np.exp(self.zeta_v))

    @property
    def omega_x(self):
        return np.exp(self.zeta_x)

    @property
    def omega_u(self):
        return np.exp(self.zeta_u)

    def copy(self):
        return PrecisionSet(
            zeta_q=self.zeta_q.copy(), zeta_qdot=self.zeta_qdot.copy(),
            zeta_v=self.zeta_v.copy(), zeta_x=self.zeta_x.copy(),
            zeta_u=self.zeta_u.copy(), zero_q=self.zero_q.copy(),
            zero_qdot=self.zero_qdot.copy(), zero_v=self.zero_v.copy(),
        )


def predict_state(belief, dt):
    """One-step forward propagation of the belief: [I I*dt; 0 I] mu_x."""
    return np.concatenate([belief.mu + belief.mu_prime * dt, belief.mu_prime])


def attractor(belief, target, gains):
    """PD attractor: the expected action given belief and goal."""
    return gains.kp * (target.mu_d - belief.mu) - gains.kd * belief.mu_prime


@maybe_njit
def belief_grad_kernel(mu, mu_prime, mu_u, y_q, y_qdot, y_v, g_v, jac, xhat,
                       w_q, w_qdot, w_v, w_x, w_u, mu_d, kp, kd):
    """Analytic gradients of the objective w.r.t. (mu, mu_prime, mu_u).

    xhat is held fixed (it was computed from the incoming belief).
    """
    eps_q = y_q - mu
    eps_qdot = y_qdot - mu_prime
    eps_v = y_v - g_v
    eps_xq = mu - xhat[0:2]
    eps_xqd = mu_prime - xhat[2:4]
    fstar = kp * (mu_d - mu) - kd * mu_prime
    eps_u = mu_u - fstar

    wv_eps = w_v * eps_v
    g_mu = -w_q * eps_q + w_x[0:2] * eps_xq + kp * (w_u * eps_u)
    g_mu = g_mu - (jac[0, :] * wv_eps[0] + jac[1, :] * wv_eps[1])
    g_mup = -w_qdot * eps_qdot + w_x[2:4] * eps_xqd + kd * (w_u * eps_u)
    g_mu_u = w_u * eps_u
    return g_mu, g_mup, g_mu_u


def free_energy(belief, obs, xhat, target, precisions, model, gains, g_v=None):
    """Scalar objective (additive constant fixed to zero).

    Channels whose precision has been hard-zeroed by fault recovery drop
    out entirely, log term included.
    """
    if g_v is None:
        g_v = predict_with_gradient(model, belief.mu)[0]
    eps_q = obs.y_q - belief.mu
    eps_qdot = obs.y_qdot - belief.mu_prime
    eps_v = obs.y_v - g_v
    eps_x = np.concatenate([belief.mu, belief.mu_prime]) - xhat
    eps_u = belief.mu_u - attractor(belief, target, gains)

    quad = (
        precisions.omega_q @ (eps_q ** 2)
        + precisions.omega_qdot @ (eps_qdot ** 2)
        + precisions.omega_v @ (eps_v ** 2)
        + precisions.omega_x @ (eps_x ** 2)
        + precisions.omega_u @ (eps_u ** 2)
    )
    logdet = (
        np.sum(precisions.zeta_q[~precisions.zero_q])
        + np.sum(precisions.zeta_qdot[~precisions.zero_qdot])
        + np.sum(precisions.zeta_v[~precisions.zero_v])
        + np.sum(precisions.zeta_x)
        + np.sum(precisions.zeta_u)
    )
    return float(0.5 * (quad - logdet))


def belief_gradients(belief, obs, xhat, target, precisions, gains, g_v, jac):
    """Gradient of the objective in the six belief/action coordinates."""
    return belief_grad_kernel(
        belief.mu, belief.mu_prime, belief.mu_u,
        obs.y_q, obs.y_qdot, obs.y_v, g_v, jac, xhat,
        precisions.omega_q, precisions.omega_qdot, precisions.omega_v,
        precisions.omega_x, precisions.omega_u,
        target.mu_d, gains.kp, gains.kd,
    )


def descend(belief, obs, xhat, target, precisions, gains, g_v, jac, step=None):
    """One Euler step of the belief/action gradient flow with xhat fixed."""
    g_mu, g_mup, g_mu_u = belief_gradients(
        belief, obs, xhat, target, precisions, gains, g_v, jac)
    mu = belief.mu - gains.k_mu * gains.dt * g_mu
    mu_prime = belief.mu_prime - gains.k_mu * gains.dt * g_mup
    mu_u = belief.mu_u - gains.k_u * gains.dt * g_mu_u
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(mu_prime))
            and np.all(np.isfinite(mu_u))):
        raise SimulationDivergedError("belief state became non-finite", step=step)
    return BeliefState(mu=mu, mu_prime=mu_prime, mu_u=mu_u)


def update_beliefs(belief, obs, target, precisions, model, gains, step=None):
    """Full per-tick update: predict, evaluate camera model, descend."""
    xhat = predict_state(belief, gains.dt)
    g_v, jac = predict_with_gradient(model, belief.mu)
    return descend(belief, obs, xhat, target, precisions, gains, g_v, jac, step=step)


def control_output(belief, gains):
    """Torque command: the action mean, clamped to +-tau_max."""
    return np.clip(belief.mu_u, -gains.tau_max, gains.tau_max)
