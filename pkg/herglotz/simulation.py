import logging
from dataclasses import dataclass, field

import numpy as np
import polars as pl

from .bundle import to_natural
from .contact import integrate_full
from .entities import FullState, GroupStepper, RecordField, Route, Trajectory
from .errors import ConfigError
from .metrics import compare_trajectories
from .reconstruction import ReconstructionResult, reconstruct
from .reduction import full_to_quasi, integrate_reduced
from .scenarios import Scenario

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SimulationResult:
    route: Route
    frame: pl.DataFrame
    summary: dict[str, float] = field(default_factory=dict)


# ----------------------------
# Routes
# ----------------------------

def run_full(*, scenario: Scenario, initial: FullState, t_end: float, dt: float) -> Trajectory:
    return integrate_full(scenario.lagrangian, to_natural(scenario.chart, initial), t_end, dt)


def run_reduced(*, scenario: Scenario, initial: FullState, t_end: float, dt: float) -> Trajectory:
    return integrate_reduced(scenario.reduced_lagrangian, scenario.chart, initial.reduced(), t_end, dt)


def run_reconstruct(
        *,
        scenario: Scenario,
        initial: FullState,
        t_end: float,
        dt: float,
        stepper: GroupStepper = GroupStepper.rkmk4,
) -> ReconstructionResult:
    reduced = run_reduced(scenario=scenario, initial=initial, t_end=t_end, dt=dt)
    return reconstruct(reduced, scenario.chart, scenario.lagrangian, initial, stepper=stepper)


def run_compare(
        *,
        scenario: Scenario,
        initial: FullState,
        t_end: float,
        dt: float,
        stepper: GroupStepper = GroupStepper.rkmk4,
) -> pl.DataFrame:
    """Reconstructed trajectory, the full route in the same columns prefixed ``full_``, and their deviation."""
    rebuilt = run_reconstruct(scenario=scenario, initial=initial, t_end=t_end, dt=dt, stepper=stepper)
    full = full_to_quasi(run_full(scenario=scenario, initial=initial, t_end=t_end, dt=dt), scenario.chart)
    return compare_trajectories(rebuilt.full_trajectory, full)


def _state_frame(trajectory: Trajectory) -> pl.DataFrame:
    data = {RecordField.TIME.value: trajectory.times}
    data |= {name: trajectory.values[:, k] for k, name in enumerate(trajectory.columns)}
    return pl.DataFrame(data)


def _sup(column: pl.Series) -> float:
    return float(column.abs().max()) if len(column) else 0.0


def simulate(
        *,
        scenario: Scenario,
        route: Route,
        t_end: float,
        dt: float,
        initial: FullState | None = None,
        stepper: GroupStepper = GroupStepper.rkmk4,
) -> SimulationResult:
    initial = initial if initial is not None else scenario.default_initial
    logger.info("Simulating %s via the %s route to t=%g with dt=%g", scenario.name, route, t_end, dt)
    summary: dict[str, float] = {}

    match route:
        case Route.full:
            frame = run_full(scenario=scenario, initial=initial, t_end=t_end, dt=dt).to_frame()
            summary["max_dissipation_residual"] = _sup(frame[RecordField.DISSIPATION_RESIDUAL.value])
        case Route.reduced:
            frame = run_reduced(scenario=scenario, initial=initial, t_end=t_end, dt=dt).to_frame()
            summary["max_dissipation_residual"] = _sup(frame[RecordField.DISSIPATION_RESIDUAL.value])
        case Route.reconstruct:
            result = run_reconstruct(scenario=scenario, initial=initial, t_end=t_end, dt=dt, stepper=stepper)
            frame = _state_frame(result.full_trajectory)
        case Route.compare:
            frame = run_compare(scenario=scenario, initial=initial, t_end=t_end, dt=dt, stepper=stepper)
            summary["max_deviation"] = _sup(frame[RecordField.DEVIATION.value])
        case _:
            raise ConfigError(f"unknown route {route!r}")

    summary["final_time"] = float(frame[RecordField.TIME.value][-1])
    summary["final_action"] = float(frame[RecordField.ACTION.value][-1])
    if not np.all(np.isfinite(frame.select(pl.exclude(RecordField.TIME.value)).to_numpy())):
        logger.warning("Non-finite values in the %s output", route)
    return SimulationResult(route=route, frame=frame, summary=summary)
