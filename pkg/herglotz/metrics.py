from typing import Iterable

import numpy as np
import polars as pl

from .entities import RecordField, Trajectory


def compare_trajectories(reconstructed: Trajectory, full: Trajectory) -> pl.DataFrame:
    """Side-by-side frame of two trajectories on one grid with the row-wise sup-norm of their difference."""
    if reconstructed.columns != full.columns or len(reconstructed) != len(full):
        raise ValueError("trajectories must share columns and time grid")
    prefix = RecordField.FULL_PREFIX.value
    names = list(reconstructed.columns)

    df = pl.DataFrame(
        {RecordField.TIME.value: reconstructed.times}
        | {name: reconstructed.values[:, k] for k, name in enumerate(names)}
        | {prefix + name: full.values[:, k] for k, name in enumerate(names)}
    )
    return df.with_columns(
        pl.max_horizontal([(pl.col(name) - pl.col(prefix + name)).abs() for name in names])
        .alias(RecordField.DEVIATION.value)
    )


def sup_deviation(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))


def compute_convergence_metrics(
        df: pl.DataFrame,
        *,
        group_by: Iterable[str],
) -> pl.DataFrame:
    """
    Per group, sort by step size and add the error ratio err(2h)/err(h) and the
    observed order log2 of that ratio. The largest step of each group has none.
    """
    group_by = list(group_by)
    step, error = RecordField.STEP.value, RecordField.ERROR.value

    return (
        df.sort(group_by + [step])
        .with_columns(
            (pl.col(error).shift(-1).over(group_by) / pl.col(error))
            .alias(RecordField.RATIO.value)
        )
        .with_columns(
            pl.col(RecordField.RATIO.value).log(base=2).alias(RecordField.ORDER.value)
        )
    )


def compute_dissipation_metrics(
        df: pl.DataFrame,
        *,
        group_by: Iterable[str],
) -> pl.DataFrame:
    """Largest dissipation-law and action-rate residuals per group."""
    return (
        df.group_by(list(group_by))
        .agg([
            pl.col(RecordField.DISSIPATION_RESIDUAL.value).abs().max().alias("max_dissipation_residual"),
            pl.col(RecordField.SDOT_RESIDUAL.value).abs().max().alias("max_sdot_residual"),
            pl.col(RecordField.ENERGY.value).first().alias("initial_energy"),
            pl.col(RecordField.ENERGY.value).last().alias("final_energy"),
        ])
        .sort(list(group_by))
    )
