"""Monte-Carlo sweep through the experiment harness, writing the CSV pair the
plotting package consumes. Equivalent CLI:

  swipt run --sweep gamma --grid 5,15,25 --trials 4 --seed 1 --out sweep.csv

Run:  python3 demos/05_sweep_to_csv.py   (writes demo_sweep.csv[.summary.csv])
"""
from irs_swipt.expcli import SweepSpec, run_sweep, write_rows_csv, write_summary_csv
from irs_swipt.optimizer import Scheme
from irs_swipt.scenario import default_config

spec = SweepSpec(
    kind="gamma",
    grid=(5.0, 15.0, 25.0),
    n_trials=4,
    schemes=tuple(Scheme),
    base=default_config(M=3, N=8, K_I=1, K_E=2),
    seed=1,
)
rows, summary = run_sweep(spec)

with open("demo_sweep.csv", "w", newline="") as f:
    write_rows_csv(rows, f)
with open("demo_sweep.summary.csv", "w", newline="") as f:
    write_summary_csv(summary, f)

print(f"wrote {len(rows)} rows to demo_sweep.csv")
print(f"{'gamma (dB)':>10s} {'scheme':>18s} {'mean (W)':>12s} {'stderr':>10s} {'n':>3s}")
for s in summary:
    print(f"{s['sweep_value']:10.1f} {s['scheme']:>18s} "
          f"{s['mean_objective_watts']:12.4e} {s['stderr_objective_watts']:10.2e} "
          f"{s['n_feasible']:3d}")
