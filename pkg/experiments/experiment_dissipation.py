import polars as pl

from herglotz.entities import ScenarioName
from herglotz.experiment import run_dissipation_sweep
from herglotz.files import load_csv, write_csv
from herglotz.metrics import compute_dissipation_metrics

file_name = "experiment_dissipation.csv"
all_df = load_csv(file_name)

GAMMAS = [0.05 * n for n in range(0, 11)]

if all_df is None:
    all_df = run_dissipation_sweep(
        scenario=ScenarioName.damped_oscillator,
        gammas=GAMMAS,
        t_end=5.0,
        dt=1e-3,
    )
    write_csv(all_df, file_name)

agg_df = compute_dissipation_metrics(all_df, group_by=["gamma"])
with pl.Config(tbl_rows=len(GAMMAS), float_precision=3):
    print(agg_df)
