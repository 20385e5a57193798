"""Zero-delay adaptive prefix coding of quantizer outputs.

Each step's codeword is the sorted Shannon-Fano-Elias (SFE) codeword of the
censored symbol's linear index under an adaptive count model, followed by the
Elias omega codes of any escaped coordinates.  The model depends only on past
symbols, so the code used at every step is prefix-free and both ends stay in
lockstep by applying the same update after each symbol.

SFE with the symbols sorted by (count descending, index ascending): a symbol
with count ``c``, cumulative count ``L`` before it and total ``r`` gets the
first ``l = ceil(log2(r / c)) + 1`` bits of the binary expansion of
``(L + c/2) / r``.  Everything is integer arithmetic.
"""
from dataclasses import dataclass

import numpy as np
from sortedcontainers import SortedList

from .bitstream import BitSink, BitSource
from .errors import CodecDesyncError, CorruptStreamError, InvalidParameterError, PrecisionError
from .symbols import CensoredSymbol, censor, fold, inverse_index, uncensor, unfold

__all__ = [
    "ceil_log2_ratio",
    "AdaptiveModel",
    "SortedView",
    "model_update",
    "sfe_codeword",
    "sfe_encode",
    "sfe_decode",
    "omega_codeword",
    "omega_encode",
    "omega_decode",
    "encode_step",
    "decode_step",
    "Encoder",
    "Decoder",
]


def ceil_log2_ratio(r, c):
    """``ceil(log2(r / c))`` for positive ints ``c <= r``, without floats."""
    q = -(-r // c)  # ceil(r / c); 2**k >= r/c iff 2**k >= ceil(r/c)
    return (q - 1).bit_length()


class _Fenwick:
    """Prefix sums over count values 1..size (index 0 unused)."""

    def __init__(self, size):
        self.size = size
        self.tree = [0] * (size + 1)

    def add(self, i, delta):
        tree, size = self.tree, self.size
        while i <= size:
            tree[i] += delta
            i += i & -i

    def prefix(self, i):
        tree = self.tree
        s = 0
        while i > 0:
            s += tree[i]
            i -= i & -i
        return s

    def lower_bound(self, value):
        """Smallest ``i`` with ``prefix(i) >= value`` (``value >= 1``)."""
        tree = self.tree
        pos = 0
        step = 1 << self.size.bit_length()
        while step:
            nxt = pos + step
            if nxt <= self.size and tree[nxt] < value:
                pos = nxt
                value -= tree[nxt]
            step >>= 1
        return pos + 1


@dataclass(frozen=True)
class SortedView:
    """Symbols in coding order and their cumulative counts."""

    order: np.ndarray
    cumulative: np.ndarray

    @classmethod
    def from_counts(cls, counts):
        counts = np.asarray(counts, dtype=np.int64)
        order = np.lexsort((np.arange(len(counts)), -counts))
        cum = np.concatenate([[0], np.cumsum(counts[order])[:-1]])
        return cls(order, cum)


class AdaptiveModel:
    """Count model over ``n`` symbols with halving rescale at ``2**(p/2) - 1``.

    The sorted order is maintained incrementally: symbols are bucketed by
    count, buckets keep their members sorted by index, and a Fenwick tree
    over count values gives the mass of all larger counts in ``O(log)``.
    """

    def __init__(self, n, p=64, counts=None):
        if n < 1:
            raise InvalidParameterError("alphabet must be non-empty")
        self.n = int(n)
        self.p = int(p)
        self.limit = (1 << (self.p // 2)) - 1
        if counts is None:
            counts = [1] * self.n
        counts = [int(c) for c in counts]
        if len(counts) != self.n or min(counts) < 1:
            raise InvalidParameterError("counts must be n positive integers")
        self.rescales = 0
        self._rebuild(counts)

    def _rebuild(self, counts):
        self.counts = counts
        self.total = sum(counts)
        buckets = {}
        for i, c in enumerate(counts):
            buckets.setdefault(c, []).append(i)
        self._buckets = {c: SortedList(v) for c, v in buckets.items()}
        cap = 64
        while cap < max(buckets) + 1:
            cap *= 2
        self._mass = _Fenwick(cap)
        for c, members in buckets.items():
            self._mass.add(c, c * len(members))

    def _grow(self, needed):
        cap = self._mass.size
        while cap < needed:
            cap *= 2
        fen = _Fenwick(cap)
        for c, members in self._buckets.items():
            fen.add(c, c * len(members))
        self._mass = fen

    def copy(self):
        other = AdaptiveModel.__new__(AdaptiveModel)
        other.n, other.p, other.limit, other.rescales = self.n, self.p, self.limit, self.rescales
        other._rebuild(list(self.counts))
        return other

    def __eq__(self, other):
        return (isinstance(other, AdaptiveModel) and self.p == other.p
                and self.total == other.total and self.counts == other.counts)

    def interval(self, symbol):
        """``(L, c)``: cumulative count before ``symbol`` in sorted order, its count."""
        c = self.counts[symbol]
        above = self.total - self._mass.prefix(c)
        return above + c * self._buckets[c].bisect_left(symbol), c

    def lookup(self, target):
        """Symbol whose interval ``[L, L + c)`` contains ``target``."""
        if not 0 <= target < self.total:
            raise CorruptStreamError(f"target {target} outside [0, {self.total})")
        c = self._mass.lower_bound(self.total - target)
        above = self.total - self._mass.prefix(c)
        j = (target - above) // c
        return self._buckets[c][j]

    def sorted_view(self):
        return SortedView.from_counts(self.counts)

    def update(self, symbol):
        if not 0 <= symbol < self.n:
            raise InvalidParameterError(f"symbol {symbol} outside [0, {self.n})")
        if self.total >= self.limit:
            self.rescale()
        c = self.counts[symbol]
        if c + 1 > self._mass.size:
            self._grow(c + 1)
        bucket = self._buckets[c]
        bucket.remove(symbol)
        if not bucket:
            del self._buckets[c]
        nxt = self._buckets.get(c + 1)
        if nxt is None:
            nxt = self._buckets[c + 1] = SortedList()
        nxt.add(symbol)
        self._mass.add(c, -c)
        self._mass.add(c + 1, c + 1)
        self.counts[symbol] = c + 1
        self.total += 1
        return self

    def rescale(self):
        self.rescales += 1
        self._rebuild([(c - 1) // 2 + 1 for c in self.counts])


def model_update(model, symbol_index):
    return model.update(symbol_index)


def sfe_codeword(L, c, r, p=64):
    """``(value, length)`` of the SFE codeword for interval ``[L, L + c)`` of ``r``."""
    length = ceil_log2_ratio(r, c) + 1
    numer = (2 * L + c) << length
    if numer.bit_length() > 2 * p:
        raise PrecisionError(f"intermediate of {numer.bit_length()} bits exceeds 2p={2 * p}")
    return numer // (2 * r), length


def sfe_encode(model, symbol_index, sink):
    L, c = model.interval(symbol_index)
    value, length = sfe_codeword(L, c, model.total, model.p)
    sink.write(value, length)
    return length


def sfe_decode(model, source):
    r = model.total
    lmax = ceil_log2_ratio(r, 1) + 1
    window = source.peek(lmax)
    symbol = model.lookup((window * r) >> lmax)
    L, c = model.interval(symbol)
    value, length = sfe_codeword(L, c, r, model.p)
    if window >> (lmax - length) != value:
        raise CorruptStreamError("bits do not form a codeword of the current model")
    source.read(length)
    return symbol


def omega_codeword(v):
    """``(value, length)`` of the Elias omega code of ``v >= 1``."""
    if v < 1:
        raise InvalidParameterError(f"Elias omega needs v >= 1, got {v}")
    value, length = 0, 1  # terminating zero
    while v > 1:
        nb = v.bit_length()
        value |= v << length
        length += nb
        v = nb - 1
    return value, length


def omega_encode(v, sink):
    value, length = omega_codeword(int(v))
    sink.write(value, length)
    return length


def omega_decode(source):
    v = 1
    while source.read(1):
        if v > 4096:
            raise CorruptStreamError("omega length field out of range")
        v = (1 << v) | source.read(v)
    return v


def encode_step(q, model, cfg, sink):
    """Write one step's codeword for ``q`` and update ``model``; returns its length."""
    cs = censor(fold(q), cfg)
    length = sfe_encode(model, cs.index, sink)
    for v in cs.overflows:
        length += omega_encode(v, sink)
    model.update(cs.index)
    return length


def decode_step(model, cfg, source):
    """Read one step's codeword, update ``model``, return ``q`` as a tuple."""
    index = sfe_decode(model, source)
    escapes = sum(1 for v in inverse_index(index, cfg) if v == 0)
    overflows = tuple(omega_decode(source) for _ in range(escapes))
    s = uncensor(CensoredSymbol(index, overflows), cfg)
    model.update(index)
    return unfold(s)


class Encoder:
    """Sensor-side codec state: produces one packet per step."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.model = AdaptiveModel(cfg.n, cfg.p)

    def encode(self, q):
        sink = BitSink()
        encode_step(q, self.model, self.cfg, sink)
        return sink


class Decoder:
    def __init__(self, cfg):
        self.cfg = cfg
        self.model = AdaptiveModel(cfg.n, cfg.p)

    def decode(self, packet):
        source = BitSource.from_sink(packet) if isinstance(packet, BitSink) else packet
        start = source.pos
        q = decode_step(self.model, self.cfg, source)
        if isinstance(packet, BitSink) and source.pos - start != packet.nbits:
            raise CodecDesyncError(
                f"decoder consumed {source.pos - start} of {packet.nbits} bits")
        return q
