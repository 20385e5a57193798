"""Closed-loop simulation of the dithered-quantizer feedback architecture.

Per step ``t``::

    e = x - x_prior                         (encoder side)
    q = round(C e + delta)                  (shared dither delta)
    packet = encode(q)  ->  q' = decode(packet)
    y = q - delta + C x_prior               (both sides)
    x_post = x_prior + J (y - C x_prior)
    u = K x_post
    x <- A x + B u + w
    x_prior <- A x_post + B u

Encoder and decoder keep separate filter states; they are compared bit for
bit after every step.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .bitstream import BitSink
from .coding import Decoder, Encoder
from .errors import (CodecDesyncError, MeasurementIdentityError, QuantizerOverflowError,
                     RunawayError)

__all__ = [
    "DitherStream",
    "Seeds",
    "FilterState",
    "StepRecord",
    "Trace",
    "next_dither",
    "quantize",
    "reconstruct_measurement",
    "kf_measurement_update",
    "control_input",
    "kf_predict",
    "plant_step",
    "psd_sqrt",
    "run_closed_loop",
]

RUNAWAY = 1e12
QUANTIZER_LIMIT = 2.0 ** 31
# |y - C x| <= 1/2 holds exactly in real arithmetic; allow float round-off
RESIDUAL_LIMIT = 0.5 + 1e-9
_BLOCK = 4096


class DitherStream:
    """Counter-based uniform dither on ``[-1/2, 1/2)^m``.

    The value for step ``t`` is a pure function of ``(seed, t)``: step ``t``
    uses Philox counter blocks ``t * ceil(m/4)`` onwards.  ``next`` serves the
    same values from a buffer.
    """

    def __init__(self, seed, m, counter=0):
        self.seed = int(seed)
        self.m = int(m)
        self.counter = int(counter)
        self._blocks = -(-self.m // 4)
        self._buf = None
        self._buf_start = 0

    def _generate(self, start, count):
        bg = np.random.Philox(key=self.seed)
        bg.advance(start * self._blocks)
        u = np.random.Generator(bg).random((count, 4 * self._blocks))
        return u[:, :self.m] - 0.5

    def at(self, t):
        return self._generate(t, 1)[0]

    def next(self):
        t = self.counter
        if self._buf is None or not self._buf_start <= t < self._buf_start + len(self._buf):
            self._buf_start = t
            self._buf = self._generate(t, _BLOCK)
        self.counter += 1
        return self._buf[t - self._buf_start]


def next_dither(stream):
    return stream.next()


@dataclass(frozen=True)
class Seeds:
    dither: int = 0
    noise: int = 1
    init: int = 2

    @classmethod
    def from_base(cls, seed):
        return cls(seed, seed + 1, seed + 2)


@dataclass
class FilterState:
    x_prior: np.ndarray
    x_post: np.ndarray = None


@dataclass(frozen=True)
class StepRecord:
    t: int
    q: tuple
    codeword_len: int
    stage_cost: float
    running_rate: float
    running_cost: float


def quantize(e, delta, C):
    """Nearest-integer quantization of ``C e + delta``; ties go upward."""
    z = C @ e + delta
    if np.any(np.abs(z) > QUANTIZER_LIMIT) or not np.all(np.isfinite(z)):
        raise QuantizerOverflowError(f"quantizer input {z} beyond 2^31")
    return np.floor(z + 0.5).astype(np.int64)


def reconstruct_measurement(q, delta, x_prior, C):
    return q - delta + C @ x_prior


def kf_measurement_update(x_prior, y, J, C):
    return x_prior + J @ (y - C @ x_prior)


def control_input(x_post, K):
    return K @ x_post


def kf_predict(x_post, u, A, B):
    return A @ x_post + B @ u


def plant_step(x, u, w, A, B):
    return A @ x + B @ u + w


def psd_sqrt(M):
    """Symmetric square root of a PSD matrix (tolerates singular ``M``)."""
    lam, V = np.linalg.eigh(0.5 * (M + M.T))
    return (V * np.sqrt(np.clip(lam, 0, None))) @ V.T


@dataclass
class Trace:
    """Per-step results of a closed-loop run."""

    codeword_len: np.ndarray
    stage_cost: np.ndarray
    q: np.ndarray = None
    max_residual: float = 0.0
    gamma: float = math.nan
    stream: BitSink = None
    rescales: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def T(self):
        return len(self.codeword_len)

    @property
    def running_rate(self):
        return np.cumsum(self.codeword_len) / np.arange(1, self.T + 1)

    @property
    def running_cost(self):
        return np.cumsum(self.stage_cost) / np.arange(1, self.T + 1)

    @property
    def average_rate(self):
        return float(np.mean(self.codeword_len))

    @property
    def average_cost(self):
        return float(np.mean(self.stage_cost))

    def records(self):
        rate, cost = self.running_rate, self.running_cost
        for t in range(self.T):
            q = tuple(self.q[t].tolist()) if self.q is not None else None
            yield StepRecord(t, q, int(self.codeword_len[t]), float(self.stage_cost[t]),
                             float(rate[t]), float(cost[t]))

    def settling(self, fraction=0.25):
        """Largest relative deviation of each running average from its final
        value over the last ``fraction`` of the horizon."""
        start = int(self.T * (1 - fraction))
        out = {}
        for name, run in (("rate", self.running_rate), ("cost", self.running_cost)):
            tail = run[start:]
            out[name] = float(np.max(np.abs(tail - run[-1])) / abs(run[-1]))
        return out


def run_closed_loop(synthesis, cfg, T, seeds=Seeds(), plant=None, record_q=True,
                    keep_stream=False, check_sync=True):
    """Simulate ``T`` steps of the quantized loop and return a :class:`Trace`.

    ``plant`` defaults to the one the design was made for; pass another one
    (e.g. with ``W = 0``) to run the same controller against different noise.
    Raises :class:`CodecDesyncError` if a decoded symbol or filter state ever
    differs between the two ends.
    """
    plant = plant or synthesis.plant
    A, B = plant.A, plant.B
    C, J, K = synthesis.C, synthesis.J, synthesis.K
    Q, Phi = synthesis.Q, synthesis.Phi
    m = A.shape[0]
    if cfg.m != C.shape[0]:
        raise ValueError(f"cutoff vector has {cfg.m} entries, quantizer has {C.shape[0]}")

    dither = DitherStream(seeds.dither, C.shape[0])
    noise_rng = np.random.Generator(np.random.PCG64(seeds.noise))
    W_half = psd_sqrt(plant.W)
    x = psd_sqrt(plant.X0) @ np.random.Generator(np.random.PCG64(seeds.init)).standard_normal(m)

    encoder = Encoder(cfg)
    decoder = Decoder(cfg)
    enc = FilterState(np.zeros(m))
    dec = FilterState(np.zeros(m))
    stream = BitSink() if keep_stream else None

    lengths = np.zeros(T, dtype=np.int64)
    costs = np.zeros(T)
    qs = np.zeros((T, C.shape[0]), dtype=np.int64) if record_q else None
    max_residual = 0.0
    noise = None

    for t in range(T):
        if t % _BLOCK == 0:
            noise = noise_rng.standard_normal((_BLOCK, m)) @ W_half.T
        w = noise[t % _BLOCK]
        delta = dither.next()

        # sensor / encoder
        q = quantize(x - enc.x_prior, delta, C)
        q_list = q.tolist()
        packet = encoder.encode(q_list)
        lengths[t] = packet.nbits
        if stream is not None:
            stream.write(int.from_bytes(packet.getvalue(), "big") >> (-packet.nbits % 8),
                         packet.nbits)
        y = reconstruct_measurement(q, delta, enc.x_prior, C)
        enc.x_post = kf_measurement_update(enc.x_prior, y, J, C)
        u_enc = control_input(enc.x_post, K)

        # decoder / controller
        q_dec = decoder.decode(packet)
        if list(q_dec) != q_list:
            raise CodecDesyncError(f"step {t}: decoded {q_dec}, sent {tuple(q_list)}", step=t)
        y_dec = reconstruct_measurement(np.array(q_dec, dtype=np.int64), delta, dec.x_prior, C)
        dec.x_post = kf_measurement_update(dec.x_prior, y_dec, J, C)
        u = control_input(dec.x_post, K)
        if check_sync and not (np.array_equal(enc.x_post, dec.x_post)
                               and np.array_equal(u_enc, u)):
            raise CodecDesyncError(f"step {t}: encoder/decoder filter states differ", step=t)

        residual = float(np.max(np.abs(y - C @ x)))
        if residual > max_residual:
            max_residual = residual
            if residual > RESIDUAL_LIMIT:
                raise MeasurementIdentityError(
                    f"step {t}: |y - C x|_inf = {residual!r} exceeds 1/2", step=t)

        x = plant_step(x, u, w, A, B)
        costs[t] = float(x @ Q @ x + u @ Phi @ u)
        if record_q:
            qs[t] = q
        enc.x_prior = kf_predict(enc.x_post, u_enc, A, B)
        dec.x_prior = kf_predict(dec.x_post, u, A, B)
        if not np.all(np.abs(dec.x_prior) < RUNAWAY) or not np.all(np.abs(x) < RUNAWAY):
            raise RunawayError(f"step {t}: state estimate diverged")

    return Trace(codeword_len=lengths, stage_cost=costs, q=qs, max_residual=max_residual,
                 gamma=synthesis.gamma, stream=stream, rescales=encoder.model.rescales)
