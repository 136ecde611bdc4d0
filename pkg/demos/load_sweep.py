"""The with/without comparison across offered load.

Runs the bundled terrain configuration, writes the CSV next to this script and
prints per-load means for both measurements.
"""

from pathlib import Path

from mtmnet import emit_csv, improvement_summary, run_sweep
from mtmnet.config import load_config
from mtmnet.harness import WITH_MTM, WITHOUT_MTM

here = Path(__file__).resolve().parent
cfg = load_config(here.parent / "configs" / "desk_terrain.ini").sweep
table = run_sweep(cfg)
emit_csv(table, here / "load_sweep.csv")

print(f"{'load':>6} {'traffic with':>13} {'without':>10} {'hops with':>10} {'without':>8}")
for load in table.loads():
    tw = table.mean("traffic_requirement_proxy", load, WITH_MTM)
    to = table.mean("traffic_requirement_proxy", load, WITHOUT_MTM)
    hw = table.mean("max_hops", load, WITH_MTM)
    ho = table.mean("max_hops", load, WITHOUT_MTM)
    print(f"{load:6g} {tw:13.1f} {to:10.1f} {hw:10.1f} {ho:8.1f}")

s = improvement_summary(table)
print(f"\nbest traffic gain {s.max_traffic_gain_percent:.2f}% at load {s.argmax_load:g}, "
      f"best hops gain {s.max_hops_gain_percent:.1f}%")
