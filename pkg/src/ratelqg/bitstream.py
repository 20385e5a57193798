"""MSB-first bit sinks/sources and the ``.bits`` dump format."""
import struct

from .errors import CorruptStreamError, InvalidParameterError

__all__ = ["BitSink", "BitSource", "write_bits_file", "read_bits_file", "BITS_MAGIC"]

BITS_MAGIC = b"RLQB"
# magic, alphabet size n, precision p, dimension m, number of steps T
_HEADER = struct.Struct(">4sIHHI")


class BitSink:
    """Append-only bit buffer.  Bits are packed MSB-first into bytes."""

    def __init__(self):
        self._buf = bytearray()
        self._acc = 0
        self._pending = 0
        self.nbits = 0

    def write(self, value, nbits):
        if nbits < 0 or value >> nbits:
            raise InvalidParameterError(f"value {value} does not fit in {nbits} bits")
        self._acc = (self._acc << nbits) | value
        self._pending += nbits
        self.nbits += nbits
        while self._pending >= 8:
            self._pending -= 8
            self._buf.append((self._acc >> self._pending) & 0xFF)
        self._acc &= (1 << self._pending) - 1

    def write_bits(self, bits):
        for b in bits:
            self.write(int(b), 1)

    def getvalue(self):
        """Stream contents, final partial byte zero-padded."""
        out = bytes(self._buf)
        if self._pending:
            out += bytes([(self._acc << (8 - self._pending)) & 0xFF])
        return out

    def to_bitstring(self):
        if not self.nbits:
            return ""
        return format(int.from_bytes(self.getvalue(), "big") >> (-self.nbits % 8), f"0{self.nbits}b")

    def __len__(self):
        return self.nbits


class BitSource:
    """Sequential reader.  Peeking past the end yields zero bits; reading
    past it is an error."""

    def __init__(self, data, nbits=None):
        self._data = bytes(data)
        self.nbits = len(self._data) * 8 if nbits is None else nbits
        self.pos = 0

    @classmethod
    def from_int(cls, value, nbits):
        nbytes = (nbits + 7) // 8
        return cls((value << (nbytes * 8 - nbits)).to_bytes(nbytes, "big"), nbits)

    @classmethod
    def from_bitstring(cls, bits):
        return cls.from_int(int(bits, 2) if bits else 0, len(bits))

    @classmethod
    def from_sink(cls, sink):
        return cls(sink.getvalue(), sink.nbits)

    def peek(self, n):
        if n == 0:
            return 0
        pos = self.pos
        start = pos >> 3
        stop = (pos + n + 7) >> 3
        chunk = self._data[start:stop]
        value = int.from_bytes(chunk, "big")
        have = len(chunk) * 8
        want = (stop - start) * 8
        value <<= want - have
        value >>= want - (pos & 7) - n
        value &= (1 << n) - 1
        # bits past the logical end read as zero
        over = pos + n - self.nbits
        if over > 0:
            value = (value >> over) << over if over < n else 0
        return value

    def read(self, n):
        if self.pos + n > self.nbits:
            raise CorruptStreamError(f"read of {n} bits at {self.pos} runs past end ({self.nbits})")
        value = self.peek(n)
        self.pos += n
        return value

    def read_bit(self):
        return self.read(1)

    @property
    def remaining(self):
        return self.nbits - self.pos


def write_bits_file(path, sink, n, p, m, steps):
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(BITS_MAGIC, n, p, m, steps))
        fh.write(sink.getvalue())


def read_bits_file(path):
    """Returns ``(header_dict, BitSource)``."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise CorruptStreamError("file shorter than header")
    magic, n, p, m, steps = _HEADER.unpack_from(raw)
    if magic != BITS_MAGIC:
        raise CorruptStreamError(f"bad magic {magic!r}")
    header = {"n": n, "p": p, "m": m, "steps": steps}
    return header, BitSource(raw[_HEADER.size:])
