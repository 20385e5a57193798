"""
ratelqg
=======

Minimum-bitrate LQG control over a noiseless digital channel.

A linear plant is controlled through a dithered quantizer whose sensing
matrix comes from a rate-distortion log-det program.  Quantizer outputs are
sent with a zero-delay adaptive Shannon-Fano-Elias code, and escaped
coordinates use Elias omega codes.

Subpackages / modules
---------------------
plant        continuous plants, the cart-pole benchmark, Van Loan sampling
synthesis    Riccati solution, log-det barrier solver, quantizer and Kalman gains
symbols      fold map, censoring, linear index, infinity-norm shell ranking
coding       adaptive count model, sorted SFE, Elias omega, per-step codec
bitstream    MSB-first bit sink/source and the ``.bits`` container
loop         dither stream and closed-loop simulation
diagnostics  power-law and exponential envelope fits of shell-ranked outputs
config, cli  JSON configurations and the ``ratelqg`` command
"""
from .errors import *  # noqa: F401,F403
from .plant import (ContinuousPlant, DiscretePlant, PendulumParams, build_pendulum,
                    discretize, matrix_exponential, pendulum_plant)
from .synthesis import (BarrierSettings, LqgWeights, SynthesisResult, derive_quantizer_matrices,
                        kalman_gain, min_achievable_cost, overhead_bits, rate_bounds,
                        solve_dare, solve_rate_distortion, synthesize)
from .symbols import (CutoffConfig, censor, fold, inverse_index, linear_index,
                      shell_bijection, uncensor, unfold)
from .coding import (AdaptiveModel, Decoder, Encoder, decode_step, encode_step,
                     omega_decode, omega_encode, sfe_decode, sfe_encode)
from .bitstream import BitSink, BitSource, read_bits_file, write_bits_file
from .loop import DitherStream, Seeds, Trace, run_closed_loop
from .diagnostics import envelope_diagnostics

__version__ = "0.1.0"
