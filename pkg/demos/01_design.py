# Quantizer/controller design for the 100 Hz cart-pole.
import numpy as np

from ratelqg import LqgWeights, min_achievable_cost, pendulum_plant, synthesize

np.set_printoptions(precision=4, suppress=True)

plant = pendulum_plant(tau=0.01)  # W = .005 I, X0 = .05 I
print("A =\n", plant.A)
print("B =", plant.B.ravel())

w = LqgWeights(np.eye(4), np.eye(1))
floor = min_achievable_cost(plant, w)  # Tr(W S), full-information LQR cost
print("Tr(WS) =", floor)

# rate needed as the cost target approaches the floor
for factor in [1.02, 1.05, 1.2, 1.5, 2, 5, 20]:
    d = synthesize(plant, w.with_gamma(factor * floor))
    print(f"gamma = {factor:5.2f} Tr(WS)   R = {d.rate:.4f}   upper = {d.rate_upper:.4f}"
          f"   rho(A-LC) = {d.rho_cl:.4f}")

# the unstable eigenvalues set a hard floor on the rate
lam = np.abs(np.linalg.eigvals(plant.A))
print("sum log2|unstable eig| =", np.log2(lam[lam > 1]).sum())

d = synthesize(plant, w.with_gamma(1.2 * floor))
print("C =\n", d.C)
print("J =\n", d.J)
print("predicted cost / gamma =", d.predicted_cost() / d.gamma)
