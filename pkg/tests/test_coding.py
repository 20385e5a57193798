import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import omega_oracle, sfe_expansion_table, sfe_real
from ratelqg.bitstream import BitSink, BitSource, read_bits_file, write_bits_file
from ratelqg.coding import (AdaptiveModel, Decoder, Encoder, SortedView, ceil_log2_ratio,
                            decode_step, encode_step, model_update, omega_codeword,
                            omega_decode, omega_encode, sfe_codeword, sfe_decode, sfe_encode)
from ratelqg.errors import CorruptStreamError, InvalidParameterError, PrecisionError
from ratelqg.symbols import CutoffConfig


def bits(value, length):
    return format(value, f"0{length}b")


def codebook(model):
    return {s: sfe_codeword(*model.interval(s), model.total, model.p) for s in range(model.n)}


def assert_prefix_free(book):
    words = sorted(bits(v, l) for v, l in book.values())
    for a, b in zip(words, words[1:]):
        assert not b.startswith(a), (a, b)


# -- model -------------------------------------------------------------------

def test_model_update_examples():
    m = AdaptiveModel(4, 16)
    model_update(m, 2)
    assert m.counts == [1, 1, 2, 1] and m.total == 5
    m = AdaptiveModel(4, 8, counts=[8, 4, 2, 1])
    assert m.total == 15 == m.limit
    model_update(m, 0)
    assert m.counts == [5, 2, 1, 1] and m.total == 9 and m.rescales == 1
    m = AdaptiveModel(3, 8, counts=[1, 1, 13])
    m.rescale()
    assert m.counts == [1, 1, 7]


def test_model_validation():
    with pytest.raises(InvalidParameterError):
        AdaptiveModel(0)
    with pytest.raises(InvalidParameterError):
        AdaptiveModel(2, counts=[1, 0])
    with pytest.raises(InvalidParameterError):
        AdaptiveModel(2).update(2)


def test_rescale_halves_total():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(1, 40))
        counts = rng.integers(1, 1000, n).tolist()
        m = AdaptiveModel(n, 64, counts=counts)
        r = m.total
        m.rescale()
        assert min(m.counts) >= 1
        assert m.total <= r // 2 + n
        assert m.total == sum(m.counts)


def test_sorted_view_matches_incremental_model():
    rng = np.random.default_rng(1)
    m = AdaptiveModel(50, 16)
    for step in range(3000):
        m.update(int(min(rng.geometric(0.15) - 1, 49)))
        if step % 97:
            continue
        view = SortedView.from_counts(m.counts)
        again = SortedView.from_counts(list(m.counts))
        assert np.array_equal(view.order, again.order)
        assert view.cumulative[-1] + m.counts[view.order[-1]] == m.total
        for pos, s in enumerate(view.order):
            assert m.interval(int(s)) == (int(view.cumulative[pos]), m.counts[s])
        for target in range(m.total):
            pos = np.searchsorted(view.cumulative, target, side="right") - 1
            assert m.lookup(target) == view.order[pos]


def test_model_copy_and_equality():
    m = AdaptiveModel(8, 16)
    for s in (1, 1, 5, 7):
        m.update(s)
    c = m.copy()
    assert c == m
    c.update(0)
    assert c != m
    with pytest.raises(CorruptStreamError):
        m.lookup(m.total)


# -- SFE ---------------------------------------------------------------------

def test_sfe_examples():
    m = AdaptiveModel(3, 16, counts=[2, 1, 1])
    assert bits(*sfe_codeword(*m.interval(0), 4)) == "01"
    assert bits(*sfe_codeword(*m.interval(1), 4)) == "101"
    assert bits(*sfe_codeword(*m.interval(2), 4)) == "111"
    u = AdaptiveModel(2, 16)
    book = codebook(u)
    assert [l for _, l in book.values()] == [2, 2]
    assert_prefix_free(book)


def test_ceil_log2_ratio():
    for r in range(1, 600):
        for c in range(1, r + 1):
            k = ceil_log2_ratio(r, c)
            assert c << k >= r and (k == 0 or c << (k - 1) < r)


def test_sfe_integer_equals_real_definition():
    L, c, r, word, length = sfe_expansion_table()
    assert len(r) > 2_700_000
    for i in range(len(r)):
        assert sfe_codeword(int(L[i]), int(c[i]), int(r[i]), 16) == (word[i], length[i])


def test_sfe_oracles_agree():
    rng = np.random.default_rng(2)
    L, c, r, word, length = sfe_expansion_table(64)
    for i in rng.choice(len(r), 3000, replace=False):
        assert sfe_real(int(L[i]), int(c[i]), int(r[i])) == (word[i], length[i])


def test_sfe_precision_guard():
    with pytest.raises(PrecisionError):
        sfe_codeword(2 ** 40, 1, 2 ** 41, p=32)


def test_expected_length_within_two_bits_of_entropy():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(2, 64))
        counts = rng.integers(1, 200, n).tolist()
        m = AdaptiveModel(n, 64, counts=counts)
        p = np.array(counts) / m.total
        lengths = [sfe_codeword(*m.interval(s), m.total)[1] for s in range(n)]
        assert float(p @ lengths) <= float(-(p * np.log2(p)).sum()) + 2


@pytest.mark.parametrize("n", [4, 16, 64])
def test_prefix_kraft_along_updates(n):
    rng = np.random.default_rng(n)
    m = AdaptiveModel(n, 16)
    for _ in range(2000):
        book = codebook(m)
        assert sum(2.0 ** -l for _, l in book.values()) <= 1.0
        for s, (_, l) in book.items():
            assert l == math.ceil(math.log2(m.total / m.counts[s]) - 1e-12) + 1
        assert_prefix_free(book)
        m.update(int(min(rng.zipf(1.5) - 1, n - 1)))
    assert m.rescales > 0 and min(m.counts) >= 1


def test_sfe_round_trip_and_concatenation():
    m = AdaptiveModel(3, 16, counts=[2, 1, 1])
    for s in range(3):
        sink = BitSink()
        sfe_encode(m, s, sink)
        assert sfe_decode(m, BitSource.from_sink(sink)) == s
    enc, dec = AdaptiveModel(3, 16), AdaptiveModel(3, 16)
    seq = (0, 2, 1, 1, 0)
    sink = BitSink()
    for s in seq:
        sfe_encode(enc, s, sink)
        enc.update(s)
    src = BitSource.from_sink(sink)
    out = []
    for _ in seq:
        out.append(sfe_decode(dec, src))
        dec.update(out[-1])
    assert tuple(out) == seq and dec == enc and src.remaining == 0


def test_sfe_decode_pads_at_end():
    m = AdaptiveModel(4, 16, counts=[61, 1, 1, 1])
    sink = BitSink()
    sfe_encode(m, 0, sink)
    src = BitSource.from_sink(sink)
    # 2-bit codeword, but the decoder peeks ceil(log2 64) + 1 = 7 bits
    assert src.nbits == 2
    assert sfe_decode(m, src) == 0 and src.remaining == 0


def test_sfe_decode_rejects_non_codeword():
    m = AdaptiveModel(3, 16, counts=[2, 1, 1])
    with pytest.raises(CorruptStreamError):
        sfe_decode(m, BitSource.from_bitstring("000"))


# -- Elias omega -------------------------------------------------------------

def test_omega_examples():
    assert [bits(*omega_codeword(v)) for v in (1, 2, 3, 4)] == ["0", "100", "110", "101000"]
    assert bits(*omega_codeword(5)) == "101010"


def test_omega_exhaustive():
    sink = BitSink()
    for v in range(1, 10001):
        assert bits(*omega_codeword(v)) == omega_oracle(v)
        omega_encode(v, sink)
    src = BitSource.from_sink(sink)
    assert [omega_decode(src) for _ in range(10000)] == list(range(1, 10001))
    assert src.remaining == 0


def test_omega_big_and_invalid():
    for v in (2 ** 64 - 1, 2 ** 200 + 12345):
        sink = BitSink()
        omega_encode(v, sink)
        assert omega_decode(BitSource.from_sink(sink)) == v
    for bad in (0, -3):
        with pytest.raises(InvalidParameterError):
            omega_codeword(bad)


def test_truncated_stream_is_an_error():
    sink = BitSink()
    omega_encode(1000, sink)
    cut = BitSource.from_bitstring(sink.to_bitstring()[:-3])
    with pytest.raises(CorruptStreamError):
        omega_decode(cut)


# -- per-step codec ------------------------------------------------------------

def test_encode_step_example():
    cfg = CutoffConfig((2, 3), p=16)
    model, sink = AdaptiveModel(cfg.n, cfg.p), BitSink()
    # s = (5, 1), truncated (0, 1) -> index 1, overflow 5
    length = encode_step((-2, 0), model, cfg, sink)
    assert sink.to_bitstring() == "00100" + "101010"
    assert length == 11 and model.counts[1] == 2
    dec = AdaptiveModel(cfg.n, cfg.p)
    assert decode_step(dec, cfg, BitSource.from_sink(sink)) == (-2, 0)
    assert dec == model


def test_zero_vector_is_sfe_only():
    cfg = CutoffConfig((8191, 3, 3, 3))
    model, sink = AdaptiveModel(cfg.n, cfg.p), BitSink()
    length = encode_step((0, 0, 0, 0), model, cfg, sink)
    assert length == ceil_log2_ratio(cfg.n, 1) + 1


def heavy_tailed(rng, size, m, scale=(40, 1, 1, 1)):
    q = rng.standard_cauchy((size, m)) * np.array(scale[:m])
    return np.clip(np.round(q), -2 ** 50, 2 ** 50).astype(np.int64)


def test_round_trip_heavy_tailed():
    cfg = CutoffConfig((8191, 3, 3, 3))
    enc, dec = Encoder(cfg), Decoder(cfg)
    for q in heavy_tailed(np.random.default_rng(4), 100_000, 4).tolist():
        assert dec.decode(enc.encode(q)) == tuple(q)
    assert enc.model == dec.model


def test_stream_round_trip_with_rescales(tmp_path):
    cfg = CutoffConfig((6, 3), p=16)
    rng = np.random.default_rng(5)
    qs = heavy_tailed(rng, 20_000, 2, scale=(2, 1)).tolist()
    model, sink = AdaptiveModel(cfg.n, cfg.p), BitSink()
    for q in qs:
        encode_step(q, model, cfg, sink)
    assert model.rescales >= 100
    path = tmp_path / "run.bits"
    write_bits_file(path, sink, cfg.n, cfg.p, cfg.m, len(qs))
    header, src = read_bits_file(path)
    assert header == {"n": cfg.n, "p": 16, "m": 2, "steps": len(qs)}
    dec = AdaptiveModel(header["n"], header["p"])
    assert [list(decode_step(dec, cfg, src)) for _ in range(header["steps"])] == qs
    assert dec == model


def test_bits_file_bad_magic(tmp_path):
    path = tmp_path / "bad.bits"
    path.write_bytes(b"XXXX" + bytes(12))
    with pytest.raises(CorruptStreamError):
        read_bits_file(path)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-3000, 3000), st.integers(-40, 40), st.integers(-5, 5)),
                min_size=1, max_size=200),
       st.sampled_from([14, 16, 32, 64]))
def test_codec_round_trip_property(qs, p):
    cfg = CutoffConfig((9, 2, 1), p=p)
    enc, dec = Encoder(cfg), Decoder(cfg)
    for q in qs:
        assert dec.decode(enc.encode(q)) == q
        assert enc.model == dec.model


def test_bitsink_source_basics():
    sink = BitSink()
    sink.write(0b101, 3)
    sink.write(0, 0)
    sink.write(0xABCD, 16)
    assert sink.nbits == 19 and sink.to_bitstring() == "101" + format(0xABCD, "016b")
    assert sink.getvalue()[-1] & 0x1F == 0  # zero padding
    src = BitSource.from_sink(sink)
    assert src.peek(3) == 0b101 and src.read(3) == 0b101
    assert src.read(16) == 0xABCD
    assert src.peek(8) == 0 and src.remaining == 0
    with pytest.raises(InvalidParameterError):
        sink.write(4, 2)
