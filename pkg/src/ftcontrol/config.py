"""Scenario configuration: dataclasses plus a strict YAML loader.

The config file mirrors the field names below exactly; unknown keys are
rejected so typos fail loudly instead of silently running defaults.
"""

from dataclasses import dataclass, field, fields

import numpy as np
import yaml

from .controller import ControllerGains
from .errors import ConfigError
from .gpr_camera import GprHyperParams
from .plant import PlantParams
from .sensors import DistortionSpec, FaultSpec, NoiseSpec

MODES = ("fixed", "pl-always", "pl-on-detect", "bayesian", "deterministic")


@dataclass(frozen=True)
class FaultEntry:
    kind: str = "encoder-freeze"
    channel: int = 0
    time: float = 8.0  # seconds; converted to a step index against plant dt

    def to_spec(self, dt):
        return FaultSpec(kind=self.kind, channel=self.channel,
                         k_f=int(round(self.time / dt)))


@dataclass(frozen=True)
class Waypoint:
    time: float
    target: tuple


@dataclass(frozen=True)
class PrecisionParams:
    omega_q: float = 1e4       # position encoders
    omega_qdot: float = 1e6    # velocity encoders
    omega_v: float = 1e4       # camera
    omega_x_pos: float = 1e6   # state prediction, position rows
    omega_x_vel: float = 1.0   # state prediction, velocity rows
    omega_u: float = 1e-2
    k_zeta: float = 0.03
    gamma_prior_shape: float = 2e4


@dataclass(frozen=True)
class GprTrainingParams:
    grid_lo: tuple = (-1.2, -1.2)
    grid_hi: tuple = (1.2, 1.2)
    grid_n: int = 20
    lengthscale: float = 0.5
    signal_var: float = 1.0
    noise_var: float = 1e-4

    def hyper(self):
        return GprHyperParams(lengthscale=self.lengthscale,
                              signal_var=self.signal_var,
                              noise_var=self.noise_var)


@dataclass(frozen=True)
class FdiParams:
    alpha: float = 0.01
    persistence: int = 10
    calibration_duration: float = 5.0
    calibration_skip: float = 0.5  # initial transient excluded from calibration
    drift_gain: float = 1e-4       # dead-reckoning position correction per step


@dataclass
class ScenarioConfig:
    seed: int = 1234
    duration: float = 15.0
    mode: str = "pl-always"
    output: str | None = None
    artifact_dir: str | None = None
    plant: PlantParams = field(default_factory=PlantParams)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    distortion: DistortionSpec = field(default_factory=DistortionSpec)
    faults: list = field(default_factory=lambda: [FaultEntry()])
    initial_config: tuple = (0.0, 0.0)
    waypoints: list = field(default_factory=lambda: [
        Waypoint(time=0.0, target=(0.6, -0.4)),
        Waypoint(time=7.8, target=(-0.4, 0.6)),
    ])
    # waypoint steps are shaped through a first-order filter with this time
    # constant (seconds); raw steps jerk the arm hard enough to swamp the
    # velocity channel's noise floor.  0 disables shaping.
    target_tau: float = 0.2
    gains: ControllerGains = field(default_factory=ControllerGains)
    precision: PrecisionParams = field(default_factory=PrecisionParams)
    gpr: GprTrainingParams = field(default_factory=GprTrainingParams)
    fdi: FdiParams = field(default_factory=FdiParams)
    scoring_window: tuple = (1.0, 15.0)

    def __post_init__(self):
        if self.duration <= 0:
            raise ConfigError("duration must be positive")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        times = [w.time for w in self.waypoints]
        if times != sorted(times):
            raise ConfigError("waypoint switch times must be increasing")
        if times and times[-1] >= self.duration:
            raise ConfigError("waypoint switch times must precede the duration")
        lo, hi = self.scoring_window
        if not 0.0 <= lo < hi:
            raise ConfigError("scoring window must satisfy 0 <= start < end")
        if self.target_tau < 0:
            raise ConfigError("target_tau must be non-negative")

    @property
    def n_steps(self):
        return int(round(self.duration / self.plant.dt))

    def fault_specs(self):
        return [f.to_spec(self.plant.dt) for f in self.faults]

    def target_at(self, t):
        """Active waypoint target at time t (initial config before the first)."""
        current = np.asarray(self.initial_config, dtype=float)
        for wp in self.waypoints:
            if t >= wp.time:
                current = np.asarray(wp.target, dtype=float)
        return current

    def target_series(self, n):
        """Shaped reference for n steps: waypoints low-passed by target_tau."""
        dt = self.plant.dt
        raw = np.empty((n, 2))
        for k in range(n):
            raw[k] = self.target_at(k * dt)
        if self.target_tau == 0.0:
            return raw
        alpha = dt / self.target_tau
        out = np.empty_like(raw)
        current = np.asarray(self.initial_config, dtype=float)
        for k in range(n):
            current = current + alpha * (raw[k] - current)
            out[k] = current
        return out


def _build(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for f in fields(cls):
        if f.name not in data:
            continue
        value = data[f.name]
        sub = f"{path}.{f.name}"
        if f.name in _NESTED:
            value = _build(_NESTED[f.name], value, sub)
        elif f.name == "faults":
            value = [_build(FaultEntry, item, f"{sub}[{i}]")
                     for i, item in enumerate(value)]
        elif f.name == "waypoints":
            value = [_build(Waypoint, item, f"{sub}[{i}]")
                     for i, item in enumerate(value)]
        elif isinstance(value, list) and f.name in _TUPLE_FIELDS:
            value = tuple(value)
        elif isinstance(value, str) and f.type in ("float", "int", float, int):
            # YAML 1.1 reads exponents without a sign ('1e4') as strings
            try:
                value = float(value) if f.type in ("float", float) else int(value)
            except ValueError:
                raise ConfigError(f"{sub}: expected a number, got {value!r}") from None
        kwargs[f.name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


_NESTED = {
    "plant": PlantParams,
    "noise": NoiseSpec,
    "distortion": DistortionSpec,
    "gains": ControllerGains,
    "precision": PrecisionParams,
    "gpr": GprTrainingParams,
    "fdi": FdiParams,
}
_TUPLE_FIELDS = {"initial_config", "scoring_window", "target",
                 "friction", "grid_lo", "grid_hi"}


def load_config(path):
    """Load and validate a scenario config from a YAML file."""
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is None:
        data = {}
    return build_config(data)


def build_config(data):
    """Build a ScenarioConfig from a plain nested dict (strict keys)."""
    def clean(node):
        if isinstance(node, dict):
            return {
                k: tuple(v) if isinstance(v, list) and k in _TUPLE_FIELDS else clean(v)
                for k, v in node.items()
            }
        if isinstance(node, list):
            return [clean(x) for x in node]
        return node

    return _build(ScenarioConfig, clean(data), "config")
