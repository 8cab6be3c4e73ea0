"""Scenario orchestration: closed loop, scoring, and mode comparison.

One run wires plant -> sensors -> controller -> plant for duration/dt
steps, with the configured recovery strategy layered on top.  Everything
is deterministic given (config, seed): the camera model and the residual
monitors are derived from the config seed, the scenario noise stream from
the run seed.
"""

import csv
import os
from dataclasses import dataclass

import numpy as np

from . import fdi, gpr_camera
from .config import ScenarioConfig
from .controller import PrecisionSet, belief_grad_kernel
from .errors import ConfigError, SimulationDivergedError
from .fdi import HEALTHY, FaultIsolator, mahalanobis
from .gpr_camera import gpr_eval_kernel
from .plant import GRAVITY, CartesianPoint, JointState, arm_step_kernel, \
    forward_kinematics, wrap_angle
from .precision_learning import GammaBank, pl_step_kernel
from .sensors import SensorArray, barrel_distort

# seed-stream salts: camera training, monitor calibration, scenario noise
_SALT_GPR = 101
_SALT_CAL = 202
_SALT_RUN = 303

ZETA_MIN, ZETA_MAX = -20.0, 20.0

CSV_COLUMNS = [
    "t", "q1", "q2", "qd1", "qd2", "mu1", "mu2", "mup1", "mup2",
    "yq1", "yq2", "yv1", "yv2", "tau1", "tau2",
    "wq1", "wq2", "wqd1", "wqd2", "wv1", "wv2",
    "dMp", "dMv", "detected", "isolated",
]

_SOURCE_NAMES = ("none", "encoders", "camera")
_SOURCE_CODES = {name: i for i, name in enumerate(_SOURCE_NAMES)}


@dataclass
class Artifacts:
    """Camera model plus calibrated residual monitors, shared across runs."""

    model: gpr_camera.GprModel
    monitor_p: fdi.ResidualMonitor
    monitor_v: fdi.ResidualMonitor
    monitor_dr: fdi.ResidualMonitor  # dead-reckoning encoder consistency


@dataclass
class RunResult:
    mode: str
    seed: int
    data: dict               # column name -> ndarray, lengths all n_steps
    faulty_joint_mse: float
    healthy_joint_mse: float
    verdict_step: int        # step of fault isolation, -1 if never

    def to_csv(self, path):
        write_run_csv(self.data, path)


def workspace_center(config):
    return CartesianPoint(0.0, 0.0)


def workspace_scale(config):
    return config.plant.l1 + config.plant.l2


def train_camera_model(config):
    """Fit the camera GPR on a joint-space grid of simulated readings."""
    g = config.gpr
    ax0 = np.linspace(g.grid_lo[0], g.grid_hi[0], g.grid_n)
    ax1 = np.linspace(g.grid_lo[1], g.grid_hi[1], g.grid_n)
    X = np.array([[a, b] for a in ax0 for b in ax1])
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, _SALT_GPR]))
    center = workspace_center(config)
    scale = workspace_scale(config)
    Y = np.empty_like(X)
    for i, q in enumerate(X):
        ee = forward_kinematics(q, config.plant)
        Y[i] = barrel_distort(ee, config.distortion, center, scale).as_array()
    Y += config.noise.sigma_v * rng.standard_normal(Y.shape)
    return gpr_camera.fit(X, Y, g.hyper())


def build_artifacts(config):
    """Camera model plus monitors calibrated on a dedicated healthy run."""
    model = train_camera_model(config)
    calib = _simulate(
        config, mode="fixed", seed_seq=[config.seed, _SALT_CAL], model=model,
        monitors=None, duration=config.fdi.calibration_duration,
        faults=[], record=False,
    )
    skip = int(round(config.fdi.calibration_skip / config.plant.dt))
    monitor_p = fdi.calibrate(calib["r_p"][skip:], config.fdi.alpha)
    monitor_v = fdi.calibrate(calib["r_v"][skip:], config.fdi.alpha)
    monitor_dr = fdi.calibrate(calib["r_dr"][skip:], config.fdi.alpha)
    return Artifacts(model=model, monitor_p=monitor_p, monitor_v=monitor_v,
                     monitor_dr=monitor_dr)


def save_artifacts(artifacts, directory):
    os.makedirs(directory, exist_ok=True)
    gpr_camera.save(artifacts.model, os.path.join(directory, "gpr_model.npz"))
    fdi.save_monitor(artifacts.monitor_p, os.path.join(directory, "monitor_p.npz"))
    fdi.save_monitor(artifacts.monitor_v, os.path.join(directory, "monitor_v.npz"))
    fdi.save_monitor(artifacts.monitor_dr, os.path.join(directory, "monitor_dr.npz"))


def load_artifacts(directory):
    return Artifacts(
        model=gpr_camera.load(os.path.join(directory, "gpr_model.npz")),
        monitor_p=fdi.load_monitor(os.path.join(directory, "monitor_p.npz")),
        monitor_v=fdi.load_monitor(os.path.join(directory, "monitor_v.npz")),
        monitor_dr=fdi.load_monitor(os.path.join(directory, "monitor_dr.npz")),
    )


def get_artifacts(config):
    """Load artifacts from the configured directory, or build (and cache) them."""
    directory = config.artifact_dir
    if directory and os.path.exists(os.path.join(directory, "gpr_model.npz")):
        return load_artifacts(directory)
    artifacts = build_artifacts(config)
    if directory:
        save_artifacts(artifacts, directory)
    return artifacts


def _simulate(config, mode, seed_seq, model, monitors, duration, faults,
              record):
    """Core closed loop.  Returns a dict of recorded arrays.

    Always collects the residual series; the full telemetry only when
    ``record`` is set (the calibration run skips it).
    """
    p = config.plant
    dt = p.dt
    n = int(round(duration / dt))
    b1, b2 = p.friction
    grav = GRAVITY if p.gravity else 0.0

    sensors = SensorArray(
        config.noise, config.distortion, faults,
        workspace_center(config), workspace_scale(config),
        np.random.SeedSequence(seed_seq),
    )

    targets = config.target_series(n)

    q = np.array(config.initial_config, dtype=float)
    qd = np.zeros(2)
    mu = q.copy()
    mup = np.zeros(2)
    muu = np.zeros(2)

    pc = config.precision
    prec = PrecisionSet.from_values(pc.omega_q, pc.omega_qdot, pc.omega_v,
                                    pc.omega_x_pos, pc.omega_x_vel, pc.omega_u)
    w_q, w_qdot, w_v = prec.omega_q, prec.omega_qdot, prec.omega_v
    w_x, w_u = prec.omega_x, prec.omega_u

    bank = GammaBank(pc.omega_q, pc.omega_qdot, pc.omega_v,
                     pc.gamma_prior_shape) if mode == "bayesian" else None
    isolator = FaultIsolator(monitors.monitor_p, monitors.monitor_v,
                             config.fdi.persistence) if monitors else None
    reckoner = fdi.DeadReckoner(config.initial_config, dt, config.fdi.drift_gain)
    recovered = False
    detected_latch = False

    ell2 = model.hyper.lengthscale ** 2
    sf2 = model.hyper.signal_var
    gains = config.gains
    k_zeta = config.precision.k_zeta

    out = {"r_p": np.empty((n, 4)), "r_v": np.empty((n, 2)),
           "r_dr": np.empty((n, 2))}
    if record:
        for name in CSV_COLUMNS:
            out[name] = np.empty(n)
        out["dMdr"] = np.empty(n)  # not a CSV column, kept for diagnostics
    verdict = HEALTHY

    for k in range(n):
        ee = forward_kinematics(q, p)
        obs = sensors.read(JointState(q=q, qdot=qd), ee, k)
        y_q, y_qdot, y_v = obs.y_q, obs.y_qdot, obs.y_v

        g_v, jac = gpr_eval_kernel(model.X, model.dual, mu, ell2, sf2)

        eps_q = y_q - mu
        eps_qdot = y_qdot - mup
        eps_v = y_v - g_v
        r_p = np.concatenate([eps_q, eps_qdot])
        r_dr = reckoner.step(y_q, y_qdot)
        out["r_p"][k] = r_p
        out["r_v"][k] = eps_v
        out["r_dr"][k] = r_dr

        d_p = d_v = d_dr = 0.0
        if isolator is not None:
            d_p = mahalanobis(r_p, monitors.monitor_p)
            d_v = mahalanobis(eps_v, monitors.monitor_v)
            d_dr = mahalanobis(r_dr, monitors.monitor_dr)
            # fold the consistency distance into the proprioceptive channel,
            # rescaled so both are compared against the same threshold
            scale = monitors.monitor_p.threshold / monitors.monitor_dr.threshold
            verdict = isolator.isolate(max(d_p, d_dr * scale), d_v, k)
            detected_latch = detected_latch or verdict.detected

        if mode == "deterministic":
            if verdict.detected and not recovered:
                prec = fdi.recover(prec, verdict)
                recovered = True
                w_q, w_qdot, w_v = prec.omega_q, prec.omega_qdot, prec.omega_v
                if verdict.isolated_source == "encoders":
                    # the belief absorbed the frozen reading until now; the
                    # consistency estimate did not, so restart from it
                    mu = reckoner.est.copy()
        elif mode == "pl-always" or (mode == "pl-on-detect" and detected_latch):
            prec.zeta_q = pl_step_kernel(prec.zeta_q, eps_q, k_zeta, dt,
                                         ZETA_MIN, ZETA_MAX)
            prec.zeta_qdot = pl_step_kernel(prec.zeta_qdot, eps_qdot, k_zeta, dt,
                                            ZETA_MIN, ZETA_MAX)
            prec.zeta_v = pl_step_kernel(prec.zeta_v, eps_v, k_zeta, dt,
                                         ZETA_MIN, ZETA_MAX)
            w_q, w_qdot, w_v = prec.omega_q, prec.omega_qdot, prec.omega_v
        elif mode == "bayesian":
            bank.update(eps_q, eps_qdot, eps_v)
            prec = bank.apply(prec)
            w_q, w_qdot, w_v = prec.omega_q, prec.omega_qdot, prec.omega_v

        xhat = np.concatenate([mu + mup * dt, mup])
        g_mu, g_mup, g_muu = belief_grad_kernel(
            mu, mup, muu, y_q, y_qdot, y_v, g_v, jac, xhat,
            w_q, w_qdot, w_v, w_x, w_u, targets[k], gains.kp, gains.kd,
        )
        mu = mu - gains.k_mu * dt * g_mu
        mup = mup - gains.k_mu * dt * g_mup
        muu = muu - gains.k_u * dt * g_muu
        if not (np.isfinite(mu).all() and np.isfinite(mup).all()
                and np.isfinite(muu).all()):
            raise SimulationDivergedError("belief state became non-finite", step=k)

        tau = np.clip(muu, -gains.tau_max, gains.tau_max)

        if record:
            o = out
            o["t"][k] = k * dt
            o["q1"][k], o["q2"][k] = q
            o["qd1"][k], o["qd2"][k] = qd
            o["mu1"][k], o["mu2"][k] = mu
            o["mup1"][k], o["mup2"][k] = mup
            o["yq1"][k], o["yq2"][k] = y_q
            o["yv1"][k], o["yv2"][k] = y_v
            o["tau1"][k], o["tau2"][k] = tau
            o["wq1"][k], o["wq2"][k] = w_q
            o["wqd1"][k], o["wqd2"][k] = w_qdot
            o["wv1"][k], o["wv2"][k] = w_v
            o["dMp"][k] = d_p
            o["dMv"][k] = d_v
            o["dMdr"][k] = d_dr
            o["detected"][k] = float(verdict.detected)
            o["isolated"][k] = float(_SOURCE_CODES[verdict.isolated_source])

        q, qd = arm_step_kernel(q, qd, tau, p.l1, p.l2, p.m1, p.m2,
                                b1, b2, grav, dt)
        if not (np.isfinite(q).all() and np.isfinite(qd).all()):
            raise SimulationDivergedError("plant state became non-finite", step=k)
        q = wrap_angle(q)

    out["verdict_step"] = verdict.step if verdict.detected else -1
    return out


def run_scenario(config, mode=None, seed=None, artifacts=None):
    """Run one closed-loop scenario and score it."""
    mode = mode or config.mode
    seed = config.seed if seed is None else seed
    if artifacts is None:
        artifacts = get_artifacts(config)
    series = _simulate(
        config, mode=mode, seed_seq=[seed, _SALT_RUN], model=artifacts.model,
        monitors=artifacts, duration=config.duration,
        faults=config.fault_specs(), record=True,
    )
    faulty, healthy = compute_mse(series, config.fault_specs(),
                                  config.scoring_window)
    return RunResult(mode=mode, seed=seed, data=series,
                     faulty_joint_mse=faulty, healthy_joint_mse=healthy,
                     verdict_step=series["verdict_step"])


def compute_mse(series, fault_specs, window):
    """Belief-vs-truth position MSE, split into faulty and healthy joints."""
    lo, hi = window
    t = series["t"]
    mask = (t >= lo) & (t <= hi)
    if not mask.any():
        raise ConfigError("scoring window contains no samples")
    faulty_joints = {f.channel for f in fault_specs if f.kind == "encoder-freeze"}
    per_joint = []
    for j in range(2):
        err = series[f"mu{j + 1}"][mask] - series[f"q{j + 1}"][mask]
        per_joint.append(float(np.mean(err ** 2)))
    faulty = [per_joint[j] for j in sorted(faulty_joints)]
    healthy = [per_joint[j] for j in range(2) if j not in faulty_joints]
    return (
        float(np.mean(faulty)) if faulty else float("nan"),
        float(np.mean(healthy)) if healthy else float("nan"),
    )


def run_comparison(config, modes, seeds, artifacts=None):
    """Per-mode mean MSE across seeds; rows mirror the comparison table."""
    if len(seeds) < 5:
        raise ConfigError("comparison needs at least 5 seeds")
    if artifacts is None:
        artifacts = get_artifacts(config)
    rows = []
    for mode in modes:
        results = [run_scenario(config, mode=mode, seed=s, artifacts=artifacts)
                   for s in seeds]
        rows.append({
            "mode": mode,
            "faulty_joint_mse": float(np.mean([r.faulty_joint_mse for r in results])),
            "healthy_joint_mse": float(np.mean([r.healthy_joint_mse for r in results])),
            "seeds": len(seeds),
            "results": results,
        })
    return rows


def _fmt(x):
    return format(x, ".17g")


def write_run_csv(data, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        n = len(data["t"])
        for k in range(n):
            row = []
            for name in CSV_COLUMNS:
                if name == "detected":
                    row.append(str(int(data[name][k])))
                elif name == "isolated":
                    row.append(_SOURCE_NAMES[int(data[name][k])])
                else:
                    row.append(_fmt(data[name][k]))
            writer.writerow(row)


def write_comparison_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mode", "faulty_joint_mse", "healthy_joint_mse", "seeds"])
        for row in rows:
            writer.writerow([row["mode"], _fmt(row["faulty_joint_mse"]),
                             _fmt(row["healthy_joint_mse"]), str(row["seeds"])])
