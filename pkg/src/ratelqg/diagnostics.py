"""Empirical tail diagnostics for shell-ordered quantizer outputs.

The quantizer outputs are mapped to positive integers with
:func:`~ratelqg.symbols.shell_bijection` and their empirical PMF is compared
with power-law (``beta / z**2``) and exponential (``beta * exp(-alpha z)``)
envelopes.  These are descriptive checks only.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .symbols import shell_bijection_array

__all__ = ["EnvelopeDiagnostics", "empirical_pmf", "fit_power_law", "fit_exponential",
           "envelope_diagnostics"]


@dataclass
class EnvelopeDiagnostics:
    m: int
    samples: int
    burn_in: int
    support: list
    pmf: list
    ccdf: list
    alpha_power: float
    beta_power: float
    power_violations: int
    power_class_ok: bool
    alpha_exp: float = None
    beta_exp: float = None
    exp_violations: int = None
    exp_class_ok: bool = None
    ccdf_monotone: bool = True
    extra: dict = field(default_factory=dict)

    @property
    def max_violation(self):
        return max(self.power_violations, self.exp_violations or 0)

    def to_dict(self, max_support=200):
        out = {k: v for k, v in self.__dict__.items() if k not in ("support", "pmf", "ccdf")}
        n = min(len(self.support), max_support)
        # shell indices can exceed 2**63; keep them exact as strings
        out["support"] = [str(z) for z in self.support[:n]]
        out["pmf"] = self.pmf[:n]
        out["ccdf"] = self.ccdf[:n]
        out["support_size"] = len(self.support)
        return out


def empirical_pmf(values):
    """Sorted support, probabilities and ``P[Z >= z]`` for integer samples."""
    counts = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    support = sorted(counts)
    total = len(values)
    pmf = [counts[z] / total for z in support]
    tail = np.cumsum(np.array(pmf[::-1]))[::-1]
    return support, pmf, np.minimum(tail, 1.0).tolist()


def fit_power_law(support, pmf, alpha=2.0):
    """Smallest ``beta`` with ``pmf(z) <= beta / z**alpha`` on the support."""
    return max(p * float(z) ** alpha for z, p in zip(support, pmf))


def fit_exponential(support, pmf):
    """Exponential envelope: tail slope by least squares, then the smallest
    ``beta`` dominating every observed point.  Returns ``(alpha, log_beta)``."""
    z = np.array([float(v) for v in support])
    logp = np.log(np.array(pmf))
    if len(z) >= 2 and np.ptp(z) > 0:
        slope = np.polyfit(z, logp, 1)[0]
        alpha = -slope
    else:
        alpha = 0.0
    if not alpha > 0:
        alpha = 1.0 / max(z.max(), 1.0)
    log_beta = float(np.max(logp + alpha * z))
    return float(alpha), log_beta


def _violations(pmf, bound):
    return int(sum(1 for p, b in zip(pmf, bound) if p > b * (1 + 1e-12)))


def envelope_diagnostics(q, burn_in=0.1):
    """Envelope fits for a ``(T, m)`` record of quantizer outputs.

    The first ``burn_in`` fraction of the record is discarded.
    """
    q = np.asarray(q, dtype=np.int64)
    if q.ndim == 1:
        q = q[:, None]
    T, m = q.shape
    skip = int(math.floor(T * burn_in))
    g = shell_bijection_array(q[skip:])
    support, pmf, ccdf = empirical_pmf(g)

    alpha_p = 2.0
    beta_p = fit_power_law(support, pmf, alpha_p)
    power_bound = [beta_p / float(z) ** alpha_p for z in support]
    zeta2 = math.pi ** 2 / 6
    diag = EnvelopeDiagnostics(
        m=m, samples=len(g), burn_in=skip, support=support, pmf=pmf, ccdf=ccdf,
        alpha_power=alpha_p, beta_power=beta_p,
        power_violations=_violations(pmf, power_bound),
        power_class_ok=bool(beta_p > 2 ** alpha_p / zeta2),
        ccdf_monotone=bool(all(a >= b for a, b in zip(ccdf, ccdf[1:]))),
    )
    if m <= 2:
        alpha_e, log_beta_e = fit_exponential(support, pmf)
        exp_bound = [math.exp(log_beta_e - alpha_e * float(z)) for z in support]
        diag.alpha_exp = alpha_e
        diag.beta_exp = math.exp(log_beta_e) if log_beta_e < 700 else math.inf
        diag.exp_violations = _violations(pmf, exp_bound)
        diag.exp_class_ok = bool(log_beta_e > 2 * alpha_e)
        diag.extra["log_beta_exp"] = log_beta_e
    return diag
