# One step of the codec, by hand, then a stream round trip.
import numpy as np

from ratelqg import (AdaptiveModel, BitSink, BitSource, CutoffConfig, censor, decode_step,
                     encode_step, fold)

cfg = CutoffConfig((2, 3), p=16)
print("alphabet size n =", cfg.n)

q = (-2, 0)
s = fold(q)                # zig-zag: (5, 1)
cs = censor(s, cfg)        # 5 > k_1 escapes
print("q", q, "-> s", s, "-> index", cs.index, "overflows", cs.overflows)

model = AdaptiveModel(cfg.n, cfg.p)  # all counts 1
sink = BitSink()
encode_step(q, model, cfg, sink)
print("codeword:", sink.to_bitstring())  # SFE part then Elias omega(5)

# a longer stream at p = 16 so rescaling kicks in
rng = np.random.default_rng(0)
qs = np.round(rng.standard_cauchy((5000, 2))).astype(int).tolist()
enc, sink = AdaptiveModel(cfg.n, cfg.p), BitSink()
for q in qs:
    encode_step(q, enc, cfg, sink)
print(len(qs), "symbols,", sink.nbits, "bits,", enc.rescales, "rescales")

dec, src = AdaptiveModel(cfg.n, cfg.p), BitSource.from_sink(sink)
back = [list(decode_step(dec, cfg, src)) for _ in qs]
print("lossless:", back == qs, " models equal:", dec == enc)
