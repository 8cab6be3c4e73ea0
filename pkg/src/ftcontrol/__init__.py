"""Fault-tolerant active-inference control of a simulated 2-DOF arm."""

from .config import ScenarioConfig, build_config, load_config
from .controller import BeliefState, ControllerGains, PrecisionSet, Target
from .harness import RunResult, run_comparison, run_scenario
from .plant import CartesianPoint, JointState, PlantParams
from .sensors import DistortionSpec, FaultSpec, NoiseSpec, SensorBundle

__version__ = "0.1.0"

__all__ = [
    "BeliefState", "CartesianPoint", "ControllerGains", "DistortionSpec",
    "FaultSpec", "JointState", "NoiseSpec", "PlantParams", "PrecisionSet",
    "RunResult", "ScenarioConfig", "SensorBundle", "Target",
    "build_config", "load_config", "run_comparison", "run_scenario",
]
