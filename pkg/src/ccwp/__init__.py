"""Discrete-time central chilled water plant model.

Every heat exchanger (coil, chiller evaporator and condenser, cooling tower)
has its capacity enforced by a small bounded optimization problem, so the
state stays physically plausible even for extreme inputs.
"""

from .chiller import LEGACY, SATURATED, ChillerInput, ChillerParams, ChillerState, chiller_step
from .coil import CoilInput, CoilParams, CoilState, coil_step
from .controllers import ConstantController, Observation, ReplayController, RuleBasedController
from .core import CCWPError, FeasibilityError, ParameterError, SimConstants, SolverError
from .io import ConfigError, ExogenousSeries, PlantConfig, load_config, load_series, synth_series
from .plant import (
    PlantDisturbance,
    PlantInput,
    PlantOutput,
    PlantParams,
    PlantState,
    check_inputs,
    plant_step,
    plantwide_cop,
)
from .simulate import run_closed_loop, run_saturation_demo
from .tes import TesInput, TesParams, TesState, tes_step
from .tower import TowerInput, TowerParams, TowerState, tower_step

__version__ = "0.1.0"
