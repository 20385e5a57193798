# Rate and cost across cost targets; same as `ratelqg sweep` on configs/sweep.json.
import os
import sys

from ratelqg.cli import cmd_sweep
from ratelqg.config import load_run_config

here = os.path.dirname(os.path.abspath(__file__))
cfg = load_run_config(os.path.join(here, "configs", "sweep.json"))
if len(sys.argv) > 1:
    cfg.T = int(sys.argv[1])
out = os.path.join(here, "out", "sweep")
os.makedirs(out, exist_ok=True)

rows = cmd_sweep(cfg, out)
print(f"{'gamma':>9} {'R':>7} {'upper':>7} {'rate':>7} {'cost/gamma':>10}")
for r in rows:
    if r["status"] != "ok":
        print(f"{r['gamma']:9.3f}  {r['status']}")
        continue
    print(f"{r['gamma']:9.3f} {r['rate_lower']:7.3f} {r['rate_upper']:7.3f} "
          f"{r['empirical_rate']:7.3f} {r['empirical_cost'] / r['gamma']:10.4f}")
print("written to", out)
