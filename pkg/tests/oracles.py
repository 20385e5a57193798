"""Independent reference implementations used by the tests.

Nothing here imports the package's solvers or coders except where a reference
needs problem data (the scalar Riccati solution for the grid oracle).
"""
from fractions import Fraction
import math

import numpy as np

from ratelqg.plant import DiscretePlant
from ratelqg.synthesis import LqgWeights, solve_dare

SCALAR_W = LqgWeights([[1.0]], [[1.0]])


def scalar(a, b=1.0, w=1.0):
    return DiscretePlant([[a]], [[b]], [[w]])


def grid_rate(a, b, w, gamma, n=1200, rounds=4):
    """Brute force over a log grid in (P, Pi), zooming in on the best cell.

    For scalars the block constraint reduces to Pi <= P w / (a^2 P + w).
    """
    ric = solve_dare(scalar(a, b, w), SCALAR_W)
    S, th = ric.S[0, 0], ric.Theta[0, 0]
    hi = math.log((gamma - w * S) / th)
    lo = math.log(1e-4)
    p_rng, i_rng = (lo, hi), (lo, hi)
    for _ in range(rounds):
        P = np.exp(np.linspace(*p_rng, n))[:, None]
        Pi = np.exp(np.linspace(*i_rng, n))[None, :]
        ok = (th * P + w * S <= gamma) & (P <= a * a * P + w) & (Pi <= P * w / (a * a * P + w))
        obj = np.where(ok, 0.5 * np.log2(w / Pi), np.inf)
        i, j = np.unravel_index(np.argmin(obj), obj.shape)
        best = obj[i, j]
        dp = (p_rng[1] - p_rng[0]) / (n - 1)
        di = (i_rng[1] - i_rng[0]) / (n - 1)
        lp, li = math.log(P[i, 0]), math.log(Pi[0, j])
        p_rng = (lp - 3 * dp, min(lp + 3 * dp, hi))
        i_rng = (li - 3 * di, li + 3 * di)
    return best


def omega_oracle(v):
    """Recursive construction: prepend binary forms of successive lengths."""
    out = "0"
    while v > 1:
        b = bin(v)[2:]
        out = b + out
        v = len(b) - 1
    return out


def sfe_real(L, c, r):
    """First l bits of (L + c/2) / r with l = ceil(log2(r/c)) + 1, from Fractions."""
    ratio = Fraction(r, c)
    k = 0
    while Fraction(2) ** k < ratio:
        k += 1
    length = k + 1
    return math.floor(Fraction(2 * L + c, 2 * r) * 2 ** length), length


def sfe_expansion_table(r_max=255):
    """All (L, c, r) with L + c <= r <= r_max: codeword by binary long division."""
    r, c, L = [], [], []
    for rr in range(1, r_max + 1):
        cc, ll = np.meshgrid(np.arange(1, rr + 1), np.arange(0, rr))
        keep = ll + cc <= rr
        r.append(np.full(keep.sum(), rr))
        c.append(cc[keep])
        L.append(ll[keep])
    r, c, L = (np.concatenate(v).astype(np.int64) for v in (r, c, L))
    k = np.zeros_like(r)
    while np.any(c << k < r):
        k += c << k < r
    length = k + 1
    num, den = 2 * L + c, 2 * r
    word = np.zeros_like(r)
    for b in range(length.max()):
        num = 2 * num
        bit = num >= den
        num = num - bit * den
        active = b < length
        word = np.where(active, 2 * word + bit, word)
    return L, c, r, word, length
