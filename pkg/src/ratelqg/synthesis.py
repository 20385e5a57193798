"""LQR solution, rate-distortion SDP and quantizer/filter design.

The rate-distortion problem is a small max-det program over two symmetric
matrices ``(P, Pi)``::

    minimize    1/2 (log2 det W - log2 det Pi)
    subject to  Tr(Theta P) + Tr(W S) <= gamma
                P <= A P A^T + W
                [[P - Pi, P A^T], [A P, A P A^T + W]] >= 0

It is solved here with a damped-Newton logarithmic-barrier path-following
method directly on the ``m (m + 1)`` free entries of ``(P, Pi)``.  Every
constraint is affine in the unknowns, so gradients and Hessians of the
log-det barriers are exact.
"""
from dataclasses import asdict, dataclass, field
import logging
import math

import numpy as np
import scipy.linalg

from .errors import InfeasibleError, InvalidParameterError, SolverError, SynthesisError
from .plant import DiscretePlant

logger = logging.getLogger(__name__)

__all__ = [
    "LqgWeights",
    "RiccatiSolution",
    "BarrierSettings",
    "RateDistortionSolution",
    "SynthesisResult",
    "solve_dare",
    "dare_residual",
    "min_achievable_cost",
    "solve_rate_distortion",
    "derive_quantizer_matrices",
    "kalman_gain",
    "overhead_bits",
    "rate_bounds",
    "synthesize",
    "spectral_radius",
]

LOG2E = 1.0 / math.log(2.0)
MEASUREMENT_VARIANCE = 1.0 / 12.0


@dataclass(frozen=True)
class LqgWeights:
    Q: np.ndarray
    Phi: np.ndarray
    gamma: float = math.inf

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        Phi = np.atleast_2d(np.asarray(self.Phi, dtype=float))
        if not np.allclose(Q, Q.T) or np.linalg.eigvalsh(Q).min() < -1e-12:
            raise InvalidParameterError("Q must be symmetric positive semidefinite")
        if not np.allclose(Phi, Phi.T) or np.linalg.eigvalsh(Phi).min() <= 0:
            raise InvalidParameterError("Phi must be symmetric positive definite")
        if not self.gamma > 0:
            raise InvalidParameterError(f"gamma must be positive, got {self.gamma!r}")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "Phi", Phi)
        object.__setattr__(self, "gamma", float(self.gamma))

    def with_gamma(self, gamma):
        return LqgWeights(self.Q, self.Phi, gamma)


@dataclass(frozen=True)
class RiccatiSolution:
    S: np.ndarray
    K: np.ndarray
    Theta: np.ndarray
    residual: float


@dataclass(frozen=True)
class BarrierSettings:
    t0: float = 1.0
    mu: float = 10.0
    newton_tol: float = 1e-9
    duality_tol: float = 1e-7
    max_iters: int = 500

    def __post_init__(self):
        if not self.t0 > 0:
            raise InvalidParameterError("t0 must be positive")
        if not self.mu > 1:
            raise InvalidParameterError("mu must exceed 1")
        if not (self.newton_tol > 0 and self.duality_tol > 0):
            raise InvalidParameterError("tolerances must be positive")
        if self.max_iters < 1:
            raise InvalidParameterError("max_iters must be at least 1")


@dataclass(frozen=True)
class RateDistortionSolution:
    P: np.ndarray
    Pi: np.ndarray
    rate: float
    gap: float
    newton_steps: int
    decrement: float


@dataclass
class SynthesisResult:
    """Everything the closed loop needs, plus diagnostics."""

    A: np.ndarray
    B: np.ndarray
    W: np.ndarray
    X0: np.ndarray
    Q: np.ndarray
    Phi: np.ndarray
    gamma: float
    S: np.ndarray
    K: np.ndarray
    Theta: np.ndarray
    P_hat: np.ndarray
    Pi_hat: np.ndarray
    P_plus: np.ndarray
    C: np.ndarray
    J: np.ndarray
    L: np.ndarray
    R_cl: np.ndarray
    rate: float
    b: float
    rate_upper: float
    rho_lqr: float
    rho_cl: float
    min_cost: float
    gap: float = 0.0
    ridge: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        # fixed memory layout: BLAS rounding depends on it, and a design
        # reloaded from JSON must drive a bit-identical simulation
        for name, value in self.__dict__.items():
            if isinstance(value, np.ndarray):
                setattr(self, name, np.ascontiguousarray(value, dtype=float))

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def plant(self):
        return DiscretePlant(self.A, self.B, self.W, X0=self.X0)

    def predicted_cost(self):
        """Steady-state LQG cost ``Tr(Theta P_post) + Tr(W S)`` of the designed loop."""
        return float(np.trace(self.Theta @ self.extra_posterior()) + self.min_cost)

    def extra_posterior(self):
        # steady-state posterior covariance of the filter actually run
        m = self.m
        I = np.eye(m)
        KC = I - self.J @ self.C
        V = MEASUREMENT_VARIANCE * np.eye(self.C.shape[0])
        prior = scipy.linalg.solve_discrete_lyapunov(
            self.A @ KC, self.A @ self.J @ V @ self.J.T @ self.A.T + self.W)
        return KC @ prior @ KC.T + self.J @ V @ self.J.T

    def to_dict(self):
        out = {}
        for key, value in asdict(self).items():
            out[key] = value.tolist() if isinstance(value, np.ndarray) else value
        return out

    @classmethod
    def from_dict(cls, data):
        kwargs = {}
        for name in cls.__dataclass_fields__:
            if name not in data:
                continue
            value = data[name]
            kwargs[name] = np.array(value, dtype=float) if isinstance(value, list) else value
        return cls(**kwargs)


def spectral_radius(M):
    M = np.atleast_2d(M)
    return float(np.max(np.abs(np.linalg.eigvals(M)))) if M.size else 0.0


def dare_residual(A, B, Q, Phi, S):
    G = B.T @ S @ B + Phi
    res = A.T @ S @ A - S - A.T @ S @ B @ np.linalg.solve(G, B.T @ S @ A) + Q
    return float(np.linalg.norm(res, "fro"))


def solve_dare(plant, weights, tol=1e-8, max_refine=50):
    """Stabilizing solution of the discrete algebraic Riccati equation.

    A Schur-based solution is refined with Hewer's Newton iteration until the
    Frobenius residual drops below ``tol``.
    """
    A, B = plant.A, plant.B
    Q, Phi = weights.Q, weights.Phi
    try:
        S = scipy.linalg.solve_discrete_are(A, B, Q, Phi)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SynthesisError(f"DARE has no stabilizing solution: {exc}") from exc
    S = 0.5 * (S + S.T)

    res = dare_residual(A, B, Q, Phi, S)
    for _ in range(max_refine):
        if res <= tol * 1e-2:
            break
        G = B.T @ S @ B + Phi
        K = -np.linalg.solve(G, B.T @ S @ A)
        Acl = A + B @ K
        if spectral_radius(Acl) >= 1:
            break
        S_new = scipy.linalg.solve_discrete_lyapunov(Acl.T, Q + K.T @ Phi @ K)
        S_new = 0.5 * (S_new + S_new.T)
        res_new = dare_residual(A, B, Q, Phi, S_new)
        if not res_new < res:
            break
        S, res = S_new, res_new

    G = B.T @ S @ B + Phi
    K = -np.linalg.solve(G, B.T @ S @ A)
    Theta = K.T @ G @ K
    Theta = 0.5 * (Theta + Theta.T)
    if not np.all(np.isfinite(S)) or res > tol:
        raise SynthesisError(f"DARE residual {res:.3e} exceeds {tol:.0e}")
    if spectral_radius(A + B @ K) >= 1:
        raise SynthesisError("(A, B) is not stabilizable: A + BK is unstable")
    return RiccatiSolution(S=S, K=K, Theta=Theta, residual=res)


def min_achievable_cost(plant, weights, riccati=None):
    """``Tr(W S)``: the LQG cost with perfect state feedback."""
    riccati = riccati or solve_dare(plant, weights)
    return float(np.trace(plant.W @ riccati.S))


def _sym_basis(m):
    basis = []
    for i in range(m):
        for j in range(i, m):
            E = np.zeros((m, m))
            E[i, j] = E[j, i] = 1.0
            basis.append(E)
    return np.array(basis)


def _vech(M):
    return M[np.triu_indices(M.shape[0])]


def _unvech(v, m):
    M = np.zeros((m, m))
    M[np.triu_indices(m)] = v
    return M + np.triu(M, 1).T


class _RateDistortionBarrier:
    """Barrier terms of the max-det program in stacked ``(vech P, vech Pi)``."""

    def __init__(self, A, W, Theta, slack0):
        m = A.shape[0]
        self.m = m
        self.d = m * (m + 1) // 2
        self.A, self.W, self.slack0 = A, W, slack0
        E = _sym_basis(m)
        Z = np.zeros_like(E)
        AE = A @ E
        AEAt = AE @ A.T
        # derivative of each affine matrix function wrt every coordinate
        self.dtrace = np.concatenate([np.einsum("ij,kji->k", Theta, E), np.zeros(self.d)])
        self.dF2 = np.concatenate([AEAt - E, Z])
        top_p = np.concatenate([E, np.transpose(AE, (0, 2, 1))], axis=2)
        bot_p = np.concatenate([AE, AEAt], axis=2)
        dF3_p = np.concatenate([top_p, bot_p], axis=1)
        dF3_pi = np.zeros_like(dF3_p)
        dF3_pi[:, :m, :m] = -E
        self.dF3 = np.concatenate([dF3_p, dF3_pi])
        self.dPi = np.concatenate([Z, E])

    def split(self, x):
        return _unvech(x[:self.d], self.m), _unvech(x[self.d:], self.m)

    def blocks(self, x):
        P, Pi = self.split(x)
        A, W = self.A, self.W
        APAt = A @ P @ A.T
        slack = self.slack0 - float(self.dtrace[:self.d] @ x[:self.d])
        F2 = APAt + W - P
        F3 = np.block([[P - Pi, P @ A.T], [A @ P, APAt + W]])
        return slack, F2, F3, Pi

    def feasible(self, x):
        slack, F2, F3, Pi = self.blocks(x)
        if not slack > 0:
            return False
        for M in (F2, F3, Pi):
            try:
                np.linalg.cholesky(M)
            except np.linalg.LinAlgError:
                return False
        return True

    def value(self, x, t):
        slack, F2, F3, Pi = self.blocks(x)
        total = -math.log(slack)
        for M in (F2, F3):
            sign, logdet = np.linalg.slogdet(M)
            if sign <= 0:
                return math.inf
            total -= logdet
        sign, logdet_pi = np.linalg.slogdet(Pi)
        if sign <= 0:
            return math.inf
        return total - 0.5 * t * logdet_pi

    def derivatives(self, x, t):
        slack, F2, F3, Pi = self.blocks(x)
        g = self.dtrace / slack
        H = np.outer(self.dtrace, self.dtrace) / slack ** 2
        for M, dM, weight in ((F2, self.dF2, 1.0), (F3, self.dF3, 1.0), (Pi, self.dPi, 0.5 * t)):
            G = np.linalg.solve(M, dM)  # M^{-1} dM_k for every k
            g -= weight * np.einsum("kii->k", G)
            H += weight * np.einsum("kab,lba->kl", G, G)
        return g, H

    def objective_bits(self, x):
        _, Pi = self.split(x)
        return 0.5 * (np.linalg.slogdet(self.W)[1] - np.linalg.slogdet(Pi)[1]) * LOG2E


def _newton_direction(H, g):
    # Jacobi scaling first; the barrier Hessian spans many orders of magnitude
    d = 1.0 / np.sqrt(np.clip(np.diag(H), 1e-300, None))
    Hs = H * d[:, None] * d[None, :]
    try:
        c, low = scipy.linalg.cho_factor(Hs, check_finite=False)
        return -d * scipy.linalg.cho_solve((c, low), d * g, check_finite=False)
    except np.linalg.LinAlgError:
        return -d * np.linalg.lstsq(Hs, d * g, rcond=None)[0]


def solve_rate_distortion(plant, weights, settings=BarrierSettings(), riccati=None):
    """Minimum directed-information rate ``R(gamma)`` in bits per step.

    Returns a :class:`RateDistortionSolution`; ``P`` is the optimal posterior
    covariance used to build the quantizer.
    """
    A, W = plant.A, plant.W
    m = plant.m
    w_min = np.linalg.eigvalsh(W).min()
    if not w_min > 0:
        raise InvalidParameterError("process noise covariance W must be positive definite")
    riccati = riccati or solve_dare(plant, weights)
    floor = float(np.trace(W @ riccati.S))
    slack0 = weights.gamma - floor
    if not slack0 > 0:
        raise InfeasibleError(
            f"gamma={weights.gamma:.6g} is not above the full-information cost "
            f"Tr(WS)={floor:.6g}", threshold=floor)

    Theta = riccati.Theta
    barrier = _RateDistortionBarrier(A, W, Theta, slack0)

    eps = 1e-3 * w_min
    while float(np.trace(Theta)) * eps >= 0.5 * slack0:
        eps *= 0.5
    P0 = eps * np.eye(m)
    Pi0 = 0.5 * (P0 - P0 @ A.T @ np.linalg.solve(A @ P0 @ A.T + W, A @ P0))
    x = np.concatenate([_vech(P0), _vech(0.5 * (Pi0 + Pi0.T))])
    if not barrier.feasible(x):
        raise SolverError("initial point is not strictly feasible", {"eps": eps})

    nu = 1 + 3 * m  # total size of the constraint blocks
    t = settings.t0
    steps = 0
    decrement = math.inf
    while True:
        # centering
        for _ in range(settings.max_iters):
            g, H = barrier.derivatives(x, t)
            dx = _newton_direction(H, g)
            decrement = float(-g @ dx)
            if decrement / 2 <= settings.newton_tol:
                break
            f0 = barrier.value(x, t)
            step = 1.0
            while True:
                x_new = x + step * dx
                if barrier.feasible(x_new):
                    f_new = barrier.value(x_new, t)
                    if f_new <= f0 - 0.01 * step * decrement:
                        break
                step *= 0.5
                if step < 1e-14:
                    break
            if step < 1e-14:
                break
            x = x_new
            steps += 1
            # decrease below rounding resolution: centered as well as doubles allow
            if f0 - f_new <= 1e-13 * max(1.0, abs(f0)):
                break
        else:
            raise SolverError("barrier centering did not converge",
                              {"t": t, "decrement": decrement, "newton_steps": steps})
        gap = nu / t * LOG2E
        if gap <= settings.duality_tol:
            break
        if steps > 50 * settings.max_iters:
            raise SolverError("barrier method exceeded iteration budget",
                              {"t": t, "gap": gap, "newton_steps": steps})
        t *= settings.mu

    P, Pi = barrier.split(x)
    rate = float(barrier.objective_bits(x))
    logger.debug("rate-distortion: gamma=%g rate=%.9f steps=%d", weights.gamma, rate, steps)
    return RateDistortionSolution(P=P, Pi=Pi, rate=max(rate, 0.0), gap=gap,
                                  newton_steps=steps, decrement=decrement)


def derive_quantizer_matrices(P_hat, plant, ridge=1e-12, clip_tol=1e-6):
    """Sensing matrix ``C`` with ``C^T C = (P_hat^-1 - P_plus^-1) / 12``.

    Returns ``(C, P_plus)``.  A tiny ridge keeps ``P_hat`` invertible when the
    optimum sits on the boundary.
    """
    A, W = plant.A, plant.W
    m = plant.m
    P_hat = np.asarray(P_hat, dtype=float)
    P_plus = A @ P_hat @ A.T + W
    P_reg = P_hat + ridge * np.eye(m)
    M = (np.linalg.inv(P_reg) - np.linalg.inv(P_plus)) / 12.0
    M = 0.5 * (M + M.T)
    lam, V = np.linalg.eigh(M)
    if lam.min() < -clip_tol * max(1.0, abs(lam).max()):
        raise SynthesisError(
            f"P_hat is not below A P_hat A^T + W (eigenvalue {lam.min():.3e})")
    # strongest measurement direction first, so it gets the largest cutoff
    lam, V = np.clip(lam[::-1], 0.0, None), V[:, ::-1]
    C = np.sqrt(lam)[:, None] * V.T
    return C, P_plus


def kalman_gain(P_plus, C, A, measurement_var=MEASUREMENT_VARIANCE):
    """Time-invariant filter gain and the resulting error dynamics.

    ``J = P_plus C^T (C P_plus C^T + V)^-1`` with ``V = measurement_var * I``;
    returns ``(J, L, R_cl, rho)`` with ``L = A J`` and ``R_cl = A - L C``.
    """
    P_plus = np.asarray(P_plus, dtype=float)
    C = np.asarray(C, dtype=float)
    k = C.shape[0]
    Sigma = C @ P_plus @ C.T + measurement_var * np.eye(k)
    J = np.linalg.solve(Sigma, C @ P_plus).T
    L = A @ J
    R_cl = A - L @ C
    rho = spectral_radius(R_cl)
    if not rho < 1:
        raise SynthesisError(f"estimation error dynamics unstable: rho={rho:.6f}")
    return J, L, R_cl, rho


def overhead_bits(m):
    return m * (1.0 + 0.5 * math.log2(2 * math.pi * math.e / 12))


def rate_bounds(rate, m):
    """``(R, R + b + 1)`` with the dithered-quantizer overhead ``b``."""
    if m < 1:
        raise InvalidParameterError("dimension m must be at least 1")
    if rate < 0:
        raise InvalidParameterError("rate must be nonnegative")
    return rate, rate + overhead_bits(m) + 1.0


def synthesize(plant, weights, settings=BarrierSettings(), measurement_var=MEASUREMENT_VARIANCE):
    """Full quantizer/controller design for one cost target."""
    riccati = solve_dare(plant, weights)
    rd = solve_rate_distortion(plant, weights, settings, riccati=riccati)
    ridge = 1e-12
    C, P_plus = derive_quantizer_matrices(rd.P, plant, ridge=ridge)
    J, L, R_cl, rho = kalman_gain(P_plus, C, plant.A, measurement_var)
    lower, upper = rate_bounds(rd.rate, plant.m)
    return SynthesisResult(
        A=plant.A, B=plant.B, W=plant.W, X0=plant.X0, Q=weights.Q, Phi=weights.Phi,
        gamma=weights.gamma, S=riccati.S, K=riccati.K, Theta=riccati.Theta,
        P_hat=rd.P, Pi_hat=rd.Pi, P_plus=P_plus, C=C, J=J, L=L, R_cl=R_cl,
        rate=lower, b=overhead_bits(plant.m), rate_upper=upper,
        rho_lqr=spectral_radius(plant.A + plant.B @ riccati.K), rho_cl=rho,
        min_cost=float(np.trace(plant.W @ riccati.S)), gap=rd.gap, ridge=ridge,
        extra={"dare_residual": riccati.residual, "newton_steps": rd.newton_steps,
               "measurement_var": measurement_var},
    )
