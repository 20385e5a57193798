"""Linear-Gaussian plant models and exact zero-order-hold discretization.

The cart-pole model is the standard linearization about the upright
equilibrium with state ``[z, dz/dt, theta, dtheta/dt]`` and a single force
input.  Continuous plants are sampled with a sample-and-hold input, and the
input and noise integrals are evaluated through one block-matrix exponential
(Van Loan's construction) rather than by quadrature.

Note on the noise covariance: some write-ups define the sampled noise term as
the *square root* of the integrated covariance.  Here ``DiscretePlant.W`` is
always the covariance itself; the sampled experiment sets it directly via
``W_override``.
"""
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import DimensionError, InvalidParameterError

__all__ = [
    "PendulumParams",
    "ContinuousPlant",
    "DiscretePlant",
    "build_pendulum",
    "matrix_exponential",
    "discretize",
    "pendulum_plant",
]


@dataclass(frozen=True)
class PendulumParams:
    """Physical cart-pole parameters (SI units)."""

    mu_cart: float = 0.5  # kg
    mu_pend: float = 0.2  # kg
    kappa: float = 0.1  # N/(m s), cart friction
    psi: float = 0.006  # kg m^2, pendulum moment of inertia
    epsilon: float = 0.3  # m, pivot to center of mass
    g: float = 9.8  # m/s^2

    def __post_init__(self):
        for name in ("mu_cart", "mu_pend", "kappa", "psi", "epsilon", "g"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise InvalidParameterError(f"{name} must be positive, got {value!r}")

    @property
    def rho(self):
        return (self.psi * (self.mu_pend + self.mu_cart)
                + self.mu_pend * self.mu_cart * self.epsilon ** 2)


@dataclass(frozen=True)
class ContinuousPlant:
    A_ct: np.ndarray
    B_ct: np.ndarray
    W_ct: np.ndarray = None

    def __post_init__(self):
        A = _as_matrix(self.A_ct, "A_ct")
        B = _as_matrix(self.B_ct, "B_ct")
        m = A.shape[0]
        if A.shape != (m, m):
            raise DimensionError(f"A_ct must be square, got {A.shape}")
        if B.shape[0] != m:
            raise DimensionError(f"B_ct has {B.shape[0]} rows, expected {m}")
        W = np.zeros((m, m)) if self.W_ct is None else _as_matrix(self.W_ct, "W_ct")
        if W.shape != (m, m):
            raise DimensionError(f"W_ct must be {m}x{m}, got {W.shape}")
        _check_psd(W, "W_ct", strict=False)
        object.__setattr__(self, "A_ct", A)
        object.__setattr__(self, "B_ct", B)
        object.__setattr__(self, "W_ct", W)

    @property
    def m(self):
        return self.A_ct.shape[0]


@dataclass(frozen=True)
class DiscretePlant:
    """Sampled plant ``x[t+1] = A x[t] + B u[t] + w[t]`` with ``w ~ N(0, W)``."""

    A: np.ndarray
    B: np.ndarray
    W: np.ndarray
    X0: np.ndarray = None
    tau: float = None

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        B = _as_matrix(self.B, "B")
        W = _as_matrix(self.W, "W")
        m = A.shape[0]
        if A.shape != (m, m):
            raise DimensionError(f"A must be square, got {A.shape}")
        if B.shape[0] != m:
            raise DimensionError(f"B has {B.shape[0]} rows, expected {m}")
        if W.shape != (m, m):
            raise DimensionError(f"W must be {m}x{m}, got {W.shape}")
        X0 = np.zeros((m, m)) if self.X0 is None else _as_matrix(self.X0, "X0")
        if X0.shape != (m, m):
            raise DimensionError(f"X0 must be {m}x{m}, got {X0.shape}")
        _check_psd(W, "W", strict=False)
        _check_psd(X0, "X0", strict=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "X0", X0)

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def u(self):
        return self.B.shape[1]

    def with_noise(self, W=None, X0=None):
        return replace(self,
                       W=self.W if W is None else W,
                       X0=self.X0 if X0 is None else X0)


def _as_matrix(value, name):
    M = np.array(value, dtype=float)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    elif M.ndim == 1:
        M = M.reshape(-1, 1)
    if M.ndim != 2:
        raise DimensionError(f"{name} must be a matrix, got ndim={M.ndim}")
    if not np.all(np.isfinite(M)):
        raise InvalidParameterError(f"{name} has non-finite entries")
    return M


def _check_psd(M, name, strict, tol=1e-10):
    if not np.allclose(M, M.T, rtol=0, atol=tol * max(1.0, np.abs(M).max())):
        raise InvalidParameterError(f"{name} must be symmetric")
    lo = np.linalg.eigvalsh(0.5 * (M + M.T)).min() if M.size else 0.0
    if strict and lo <= 0:
        raise InvalidParameterError(f"{name} must be positive definite")
    if lo < -tol * max(1.0, np.abs(M).max()):
        raise InvalidParameterError(f"{name} must be positive semidefinite")


def build_pendulum(params=PendulumParams()):
    """Linearized cart-pole about the upright equilibrium.

    Returns a :class:`ContinuousPlant` with zero diffusion; callers attach a
    noise model separately.
    """
    mc, mp = params.mu_cart, params.mu_pend
    kappa, psi, eps, g = params.kappa, params.psi, params.epsilon, params.g
    rho = params.rho
    inertia = psi + mp * eps ** 2
    A = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [0.0, -inertia * kappa / rho, mp ** 2 * eps ** 2 * g / rho, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, -mp * eps * kappa / rho, mp * g * eps * (mc + mp) / rho, 0.0],
    ])
    B = np.array([[0.0], [inertia / rho], [0.0], [mp * eps / rho]])
    return ContinuousPlant(A, B)


def matrix_exponential(M):
    """Matrix exponential by scaling and squaring with a Pade approximant."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"matrix_exponential needs a square matrix, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidParameterError("matrix has non-finite entries")
    return scipy.linalg.expm(M)


def discretize(plant, tau, W_override=None, X0=None):
    """Sample ``plant`` with period ``tau`` under zero-order hold.

    Computes ``A = e^{A_ct tau}``, ``B = int_0^tau e^{A_ct s} B_ct ds`` and
    ``W = int_0^tau e^{A_ct s} W_ct e^{A_ct^T s} ds`` from a single
    exponential of the block-diagonal matrix::

        [[-A_ct, W_ct,   0,    0  ],
         [  0,   A_ct^T, 0,    0  ],
         [  0,   0,      A_ct, B_ct],
         [  0,   0,      0,    0  ]] * tau

    ``W_override`` replaces the integrated covariance with a given one.
    """
    if not np.isfinite(tau) or tau <= 0:
        raise InvalidParameterError(f"sampling period must be positive, got {tau!r}")
    A_ct, B_ct, W_ct = plant.A_ct, plant.B_ct, plant.W_ct
    m, nu = B_ct.shape
    size = 3 * m + nu
    Z = np.zeros((size, size))
    Z[:m, :m] = -A_ct
    Z[:m, m:2 * m] = W_ct
    Z[m:2 * m, m:2 * m] = A_ct.T
    Z[2 * m:3 * m, 2 * m:3 * m] = A_ct
    Z[2 * m:3 * m, 3 * m:] = B_ct
    E = matrix_exponential(Z * tau)

    A = E[2 * m:3 * m, 2 * m:3 * m]
    B = E[2 * m:3 * m, 3 * m:]
    # Van Loan: F22 = e^{A^T tau}, W = F22^T F12
    F12 = E[:m, m:2 * m]
    F22 = E[m:2 * m, m:2 * m]
    W = F22.T @ F12
    W = 0.5 * (W + W.T)
    if W_override is not None:
        W = _as_matrix(W_override, "W_override")
    return DiscretePlant(A, B, W, X0=X0, tau=float(tau))


def pendulum_plant(tau=0.01, W=None, X0=None, params=PendulumParams()):
    """The sampled cart-pole used for the rate/cost experiment.

    Defaults: 100 Hz sampling, ``W = 0.005 I``, ``X0 = 0.05 I``.
    """
    W = 0.005 * np.eye(4) if W is None else W
    X0 = 0.05 * np.eye(4) if X0 is None else X0
    return discretize(build_pendulum(params), tau, W_override=W, X0=X0)
