# Tail of the shell-ranked quantizer outputs against power-law and exponential envelopes.
import numpy as np

from ratelqg import (CutoffConfig, DiscretePlant, LqgWeights, Seeds, envelope_diagnostics,
                     min_achievable_cost, pendulum_plant, run_closed_loop, shell_bijection,
                     synthesize)

# g orders Z^m by infinity-norm shells
print([shell_bijection((v,)) for v in (0, -1, 1, -2, 2)])
print(shell_bijection((0, 0)), shell_bijection((-1, -1)), shell_bijection((1, 1)))

# m = 4: power-law class
plant = pendulum_plant()
w = LqgWeights(np.eye(4), np.eye(1))
d = synthesize(plant, w.with_gamma(1.2 * min_achievable_cost(plant, w)))
q = run_closed_loop(d, CutoffConfig((8191, 3, 3, 3)), 50_000, Seeds(1, 2, 3)).q
env = envelope_diagnostics(q)
print("m=4: beta(alpha=2) =", env.beta_power, "violations", env.power_violations,
      "support", len(env.support))

# m = 1: exponential class
toy = DiscretePlant([[0.8]], [[1.0]], [[0.5]])
w1 = LqgWeights([[1.0]], [[1.0]])
d1 = synthesize(toy, w1.with_gamma(1.05 * min_achievable_cost(toy, w1)))
q1 = run_closed_loop(d1, CutoffConfig((63,)), 50_000, Seeds(4, 5, 6)).q
env1 = envelope_diagnostics(q1)
print("m=1: alpha =", env1.alpha_exp, "beta =", env1.beta_exp, "violations", env1.exp_violations)
for z, p in list(zip(env1.support, env1.pmf))[:8]:
    print(f"  g={z:3d}  pmf={p:.5f}  bound={env1.beta_exp * np.exp(-env1.alpha_exp * z):.5f}")
