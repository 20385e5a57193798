"""Maps between quantizer outputs on Z^m and the codec's alphabets.

Three maps are involved:

* ``fold`` sends each integer coordinate to a positive integer by
  zig-zagging (``q > 0 -> 2q``, ``q <= 0 -> -2q + 1``).
* ``censor`` replaces coordinates above their cutoff with ``0`` and records
  the raw folded values separately; the truncated tuple is linearly indexed
  in mixed radix ``k_j + 1`` with the first coordinate most significant.
* ``shell_bijection`` orders Z^m by infinity-norm shells, lexicographically
  inside each shell.  It is only used by the tail diagnostics.

The per-step codec path works on tuples of Python ints; numpy is kept for the
vectorized helpers.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import CorruptStreamError, InvalidParameterError

__all__ = [
    "CutoffConfig",
    "CensoredSymbol",
    "fold",
    "unfold",
    "fold_array",
    "unfold_array",
    "censor",
    "uncensor",
    "linear_index",
    "inverse_index",
    "shell_bijection",
    "shell_bijection_array",
]


@dataclass(frozen=True)
class CutoffConfig:
    """Cutoffs ``k`` and arithmetic precision ``p`` (bits).

    The alphabet of truncated tuples has ``n = prod(k_j + 1)`` letters.  ``n``
    must satisfy ``n <= 2**(p/2) - 2`` so that the adaptive model's total
    stays below ``2**(p/2)`` after a rescale followed by an increment.
    """

    k: tuple
    p: int = 64

    def __post_init__(self):
        k = tuple(int(v) for v in np.atleast_1d(self.k))
        if not k:
            raise InvalidParameterError("cutoff vector must be non-empty")
        if any(v < 1 for v in k):
            raise InvalidParameterError(f"cutoffs must be >= 1, got {k}")
        p = int(self.p)
        if p % 2 or not 2 <= p <= 64:
            raise InvalidParameterError(f"precision must be even and in [2, 64], got {p}")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "p", p)
        if self.n > (1 << (p // 2)) - 2:
            raise InvalidParameterError(
                f"alphabet size n={self.n} too large for precision p={p}")

    @property
    def m(self):
        return len(self.k)

    @property
    def n(self):
        return math.prod(v + 1 for v in self.k)

    @property
    def weights(self):
        out = [1] * len(self.k)
        for i in range(len(self.k) - 2, -1, -1):
            out[i] = out[i + 1] * (self.k[i + 1] + 1)
        return tuple(out)


@dataclass(frozen=True)
class CensoredSymbol:
    index: int
    overflows: tuple = ()


def fold(q):
    return tuple(2 * v if v > 0 else 1 - 2 * v for v in (int(x) for x in q))


def unfold(s):
    out = []
    for v in s:
        v = int(v)
        if v < 1:
            raise InvalidParameterError(f"folded symbols must be >= 1, got {v}")
        out.append(v // 2 if v % 2 == 0 else (1 - v) // 2)
    return tuple(out)


def fold_array(q):
    q = np.asarray(q, dtype=np.int64)
    return np.where(q > 0, 2 * q, 1 - 2 * q)


def unfold_array(s):
    s = np.asarray(s, dtype=np.int64)
    if np.any(s < 1):
        raise InvalidParameterError("folded symbols must be >= 1")
    return np.where(s % 2 == 0, s // 2, (1 - s) // 2)


def linear_index(truncated, cfg):
    return sum(v * w for v, w in zip(truncated, cfg.weights))


def inverse_index(index, cfg):
    if not 0 <= index < cfg.n:
        raise CorruptStreamError(f"index {index} outside alphabet of size {cfg.n}")
    out = []
    for w in cfg.weights:
        digit, index = divmod(index, w)
        out.append(digit)
    return tuple(out)


def censor(s, cfg):
    truncated = []
    overflows = []
    for v, k in zip(s, cfg.k):
        if v <= k:
            truncated.append(v)
        else:
            truncated.append(0)
            overflows.append(v)
    return CensoredSymbol(linear_index(truncated, cfg), tuple(overflows))


def uncensor(cs, cfg):
    truncated = inverse_index(cs.index, cfg)
    zeros = sum(1 for v in truncated if v == 0)
    if zeros != len(cs.overflows):
        raise CorruptStreamError(
            f"index {cs.index} has {zeros} escapes but {len(cs.overflows)} overflow values")
    it = iter(cs.overflows)
    s = []
    for v, k in zip(truncated, cfg.k):
        if v == 0:
            v = next(it)
            if v <= k:
                raise CorruptStreamError(f"overflow value {v} does not exceed cutoff {k}")
        s.append(v)
    return tuple(s)


def shell_bijection(q):
    """Position of ``q`` in the infinity-norm shell order of Z^m (1-based).

    ``g(0) = 1``; the points of norm ``i`` occupy ``((2i-1)^m, (2i+1)^m]`` in
    lexicographic order.  Exact for arbitrarily large entries.
    """
    q = tuple(int(v) for v in q)
    m = len(q)
    i = max((abs(v) for v in q), default=0)
    if i == 0:
        return 1
    inner = 2 * i - 1
    outer = 2 * i + 1
    rank = 0
    on_shell = False
    for j, v in enumerate(q):
        rem = m - j - 1
        free = outer ** rem
        # completions that still need some later coordinate at +-i
        hitting = free - inner ** rem
        below = v + i  # candidates in [-i, v - 1]
        if below > 0:
            if on_shell:
                rank += below * free
            else:
                # -i itself lands on the shell; the rest do not
                rank += free + (below - 1) * hitting
        if abs(v) == i:
            on_shell = True
    return inner ** m + rank + 1


def shell_bijection_array(q):
    """Row-wise :func:`shell_bijection` of a ``(T, m)`` array.

    Returns a Python list of ints (values can exceed 64 bits); each distinct
    row is evaluated once.
    """
    q = np.asarray(q, dtype=np.int64)
    if q.ndim == 1:
        q = q[:, None]
    uniq, inv = np.unique(q, axis=0, return_inverse=True)
    vals = [shell_bijection(row) for row in uniq.tolist()]
    return [vals[j] for j in np.ravel(inv)]
