from herglotz.entities import GroupStepper, ScenarioName
from herglotz.experiment import run_convergence_study
from herglotz.files import load_csv, write_csv

file_name = "experiment_convergence.csv"
all_df = load_csv(file_name)

STEPS = [0.08 / 2**n for n in range(6)]

if all_df is None:
    all_df = run_convergence_study(
        scenarios=[ScenarioName.affine, ScenarioName.kaluza_klein, ScenarioName.wong],
        steps=STEPS,
        steppers=[GroupStepper.midpoint, GroupStepper.rkmk4],
        t_end=2.0,
    )
    write_csv(all_df, file_name)

print(all_df)
