import itertools
import sys
import time
from typing import Iterable, Protocol, Sized, TypeVar

import polars as pl
from tqdm import tqdm

from .entities import GroupStepper, RecordField, ScenarioName
from .metrics import compute_convergence_metrics
from .scenarios import build_scenario
from .simulation import run_compare, run_full

T = TypeVar("T")


class SizedIterable(Iterable[T], Sized, Protocol):
    ...


# Reference calibration: wall seconds per RK4 step of the compare route on the affine scenario
SECONDS_PER_STEP = 2.5e-3


def _print_eta(total_steps: int, runs: int):
    eta_minutes, eta_secs = divmod(int(total_steps * SECONDS_PER_STEP), 60)
    print(f"Estimated ETA: {eta_minutes}m {eta_secs}s for {runs} runs")


def _print_actual(start: float, runs: int):
    elapsed = time.time() - start
    real_minutes, real_secs = divmod(int(elapsed), 60)
    print(f"✅ Actual time: {real_minutes}m {real_secs}s "
          f"(~{elapsed / max(runs, 1):.2f} s per run)")


def run_convergence_study(
        *,
        scenarios: SizedIterable[ScenarioName],
        steps: SizedIterable[float],
        steppers: SizedIterable[GroupStepper] = (GroupStepper.rkmk4,),
        t_end: float,
        parameters: dict[str, float] | None = None,
) -> pl.DataFrame:
    """
    Cross-route deviation (reconstructed vs full) for every scenario, stepper and
    step size, with the error ratio between successive halvings.
    """
    runs = list(itertools.product(scenarios, steppers, steps))
    _print_eta(sum(int(t_end / dt) for _, _, dt in runs), len(runs))

    start = time.time()
    rows: list[dict] = []
    with tqdm(total=len(runs), desc="Running convergence study", file=sys.stdout) as pbar:
        for name, stepper, dt in runs:
            scenario = build_scenario(name, parameters)
            df = run_compare(
                scenario=scenario,
                initial=scenario.default_initial,
                t_end=t_end,
                dt=dt,
                stepper=stepper,
            )
            rows.append({
                RecordField.SCENARIO.value: str(name),
                RecordField.STEPPER.value: str(stepper),
                RecordField.STEP.value: float(dt),
                RecordField.ERROR.value: float(df[RecordField.DEVIATION.value].max()),
            })
            pbar.update(1)

    _print_actual(start, len(runs))
    return compute_convergence_metrics(
        pl.DataFrame(rows),
        group_by=[RecordField.SCENARIO.value, RecordField.STEPPER.value],
    )


def run_dissipation_sweep(
        *,
        scenario: ScenarioName,
        gammas: SizedIterable[float],
        t_end: float,
        dt: float,
) -> pl.DataFrame:
    """Full-route diagnostics for each damping coefficient, stacked with a ``gamma`` column."""
    _print_eta(len(gammas) * int(t_end / dt), len(gammas))

    start = time.time()
    dfs: list[pl.DataFrame] = []
    with tqdm(total=len(gammas), desc="Running dissipation sweep", file=sys.stdout) as pbar:
        for gamma in gammas:
            built = build_scenario(scenario, {"gamma": gamma})
            df = run_full(scenario=built, initial=built.default_initial, t_end=t_end, dt=dt).to_frame()
            dfs.append(df.with_columns(pl.lit(float(gamma)).alias("gamma")))
            pbar.update(1)

    _print_actual(start, len(gammas))
    return pl.concat(dfs, how="vertical")
