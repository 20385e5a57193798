import numpy as np
from numpy.testing import assert_allclose
import pytest

from ratelqg import loop
from ratelqg.errors import CodecDesyncError, MeasurementIdentityError, QuantizerOverflowError
from ratelqg.loop import (DitherStream, Seeds, control_input, kf_measurement_update, kf_predict,
                          next_dither, plant_step, psd_sqrt, quantize, reconstruct_measurement,
                          run_closed_loop)
from ratelqg.symbols import CutoffConfig

CFG = CutoffConfig((8191, 3, 3, 3))


def test_dither_deterministic():
    a, b = DitherStream(7, 4), DitherStream(7, 4)
    first = [next_dither(a) for _ in range(5000)]
    second = [next_dither(b) for _ in range(5000)]
    assert np.array_equal(first, second)
    for t in (0, 1, 4095, 4096, 4999):
        assert np.array_equal(DitherStream(7, 4).at(t), first[t])
    assert not np.array_equal(DitherStream(8, 4).at(0), first[0])


@pytest.mark.parametrize("m", [1, 3, 4, 6])
def test_dither_counter_layout(m):
    s = DitherStream(11, m)
    seq = np.array([s.next() for _ in range(10)])
    assert np.array_equal(seq, np.array([DitherStream(11, m).at(t) for t in range(10)]))
    resumed = DitherStream(11, m, counter=6)
    assert np.array_equal(resumed.next(), seq[6])


def test_dither_moments_and_support():
    s = DitherStream(3, 4)
    d = np.array([s.next() for _ in range(100_000)])
    assert np.all(d >= -0.5) and np.all(d < 0.5)
    assert np.all(np.abs(d.mean(axis=0)) <= 0.005)
    assert_allclose(d.var(axis=0), 1 / 12, rtol=0.02)
    assert abs(np.corrcoef(d[:, 0], d[:, 1])[0, 1]) < 0.01


def test_quantize_boundaries():
    I2 = np.eye(2)
    assert quantize(np.array([0.49, -0.5]), np.zeros(2), I2).tolist() == [0, 0]
    assert quantize(np.array([1.5]), np.zeros(1), np.eye(1)).tolist() == [2]
    assert quantize(np.array([-1.51]), np.zeros(1), np.eye(1)).tolist() == [-2]
    assert quantize(np.array([-0.5000001]), np.zeros(1), np.eye(1)).tolist() == [-1]
    with pytest.raises(QuantizerOverflowError):
        quantize(np.array([3e9]), np.zeros(1), np.eye(1))
    with pytest.raises(QuantizerOverflowError):
        quantize(np.array([np.nan]), np.zeros(1), np.eye(1))


def test_measurement_pipeline_example():
    C = np.eye(1)
    x, x_prior, delta = np.array([0.3]), np.zeros(1), np.array([0.1])
    q = quantize(x - x_prior, delta, C)
    y = reconstruct_measurement(q, delta, x_prior, C)
    assert q.tolist() == [0]
    assert_allclose(y, [-0.1])
    assert_allclose(y - C @ x, [-0.4])
    y0 = reconstruct_measurement(np.zeros(2, int), np.zeros(2), np.zeros(2), np.eye(2))
    assert_allclose(y0, np.zeros(2))


def test_filter_and_plant_arithmetic():
    one = np.eye(1)
    x = np.array([1.0])
    assert_allclose(kf_measurement_update(x, one @ x, one, one), x)
    assert_allclose(kf_measurement_update(x, np.array([5.0]), 0 * one, one), x)
    assert_allclose(kf_measurement_update(x, np.array([2.0]), 0.75 * one, one), [1.75])
    assert_allclose(control_input(np.zeros(2), np.ones((1, 2))), [0.0])
    assert_allclose(control_input(np.array([2.0]), -0.618 * one), [-1.236])
    assert_allclose(kf_predict(np.array([1.0]), np.array([-0.5]), 2 * one, one), [1.5])
    assert_allclose(kf_predict(np.array([1.0, 2.0]), np.zeros(1), np.eye(2), np.zeros((2, 1))),
                    [1.0, 2.0])
    assert_allclose(plant_step(np.array([2.0]), np.array([1.0]), np.array([0.1]), 0.5 * one, one),
                    [2.1])
    assert_allclose(plant_step(np.zeros(1), np.zeros(1), np.zeros(1), one, one), [0.0])


def test_psd_sqrt():
    M = np.array([[2.0, 0.5], [0.5, 1.0]])
    R = psd_sqrt(M)
    assert_allclose(R @ R, M, atol=1e-14)
    assert_allclose(psd_sqrt(np.zeros((3, 3))), 0)


def test_short_pendulum_run(pendulum_design):
    tr = run_closed_loop(pendulum_design, CFG, 3000, Seeds(1, 2, 3))
    assert tr.T == 3000 and tr.q.shape == (3000, 4)
    assert tr.max_residual <= 0.5
    assert np.all(np.isfinite(tr.stage_cost))
    assert_allclose(tr.running_rate[-1], tr.codeword_len.mean())
    recs = list(tr.records())
    assert recs[10].running_cost == pytest.approx(tr.stage_cost[:11].mean())
    assert recs[10].q == tuple(tr.q[10])


def test_runs_are_reproducible(pendulum_design):
    a = run_closed_loop(pendulum_design, CFG, 1500, Seeds(4, 5, 6), keep_stream=True)
    b = run_closed_loop(pendulum_design, CFG, 1500, Seeds(4, 5, 6), keep_stream=True)
    assert np.array_equal(a.codeword_len, b.codeword_len)
    assert np.array_equal(a.stage_cost, b.stage_cost)
    assert a.stream.getvalue() == b.stream.getvalue()
    assert a.stream.nbits == a.codeword_len.sum()
    c = run_closed_loop(pendulum_design, CFG, 1500, Seeds(4, 5, 7))
    assert not np.array_equal(a.stage_cost, c.stage_cost)


def test_noiseless_plant_stays_bounded(pendulum_design):
    quiet = pendulum_design.plant.with_noise(W=np.zeros((4, 4)), X0=np.zeros((4, 4)))
    tr = run_closed_loop(pendulum_design, CFG, 3000, Seeds(0, 1, 2), plant=quiet)
    assert np.abs(tr.q).max() <= 1
    assert tr.max_residual <= 0.5
    # only dither-driven estimation error remains; it stays inside the budget
    assert tr.average_cost < pendulum_design.gamma
    assert np.abs(tr.stage_cost).max() < 10 * pendulum_design.gamma


def test_decoder_corruption_is_detected(pendulum_design, monkeypatch):
    real = loop.Decoder.decode

    def flip(self, packet):
        q = real(self, packet)
        return (q[0] + 1,) + tuple(q[1:]) if self.model.total > CFG.n + 20 else q

    monkeypatch.setattr(loop.Decoder, "decode", flip)
    with pytest.raises(CodecDesyncError) as info:
        run_closed_loop(pendulum_design, CFG, 100, Seeds())
    assert info.value.step == 20


def test_measurement_identity_is_enforced(pendulum_design, monkeypatch):
    # a wrong dither at the measurement stage breaks |y - C x| <= 1/2
    monkeypatch.setattr(loop, "reconstruct_measurement",
                        lambda q, delta, x_prior, C: q + 0.75 + C @ x_prior)
    with pytest.raises(MeasurementIdentityError):
        run_closed_loop(pendulum_design, CFG, 50, Seeds())


def test_cutoff_dimension_mismatch(pendulum_design):
    with pytest.raises(ValueError):
        run_closed_loop(pendulum_design, CutoffConfig((3, 3)), 10, Seeds())


def test_settling_definition():
    tr = loop.Trace(codeword_len=np.full(100, 4), stage_cost=np.linspace(1, 2, 100))
    s = tr.settling(0.25)
    assert s["rate"] == 0.0
    run = tr.running_cost
    assert s["cost"] == pytest.approx(np.abs(run[75:] - run[-1]).max() / run[-1])
