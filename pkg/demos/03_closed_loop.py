# Closed-loop run with the cutoffs (8191, 3, 3, 3).  T = 4e5 takes ~1 min.
import sys

import numpy as np

from ratelqg import (CutoffConfig, LqgWeights, Seeds, min_achievable_cost, pendulum_plant,
                     run_closed_loop, synthesize)

T = int(sys.argv[1]) if len(sys.argv) > 1 else 50_000

plant = pendulum_plant()
w = LqgWeights(np.eye(4), np.eye(1))
d = synthesize(plant, w.with_gamma(1.2 * min_achievable_cost(plant, w)))

tr = run_closed_loop(d, CutoffConfig((8191, 3, 3, 3)), T, Seeds(1, 2, 3))

rate, cost = tr.running_rate, tr.running_cost
for t in np.unique(np.geomspace(100, T, 8).astype(int)) - 1:
    print(f"t = {t + 1:7d}   running rate {rate[t]:7.3f} bits   running cost {cost[t] / d.gamma:6.3f} gamma")

print("bounds on rate:", d.rate, d.rate_upper)
print("max |y - Cx| =", tr.max_residual)
print("largest |q| per coordinate:", np.abs(tr.q).max(axis=0))
print("settling over last 25%:", tr.settling())
