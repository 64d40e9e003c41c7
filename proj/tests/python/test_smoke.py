import math

import numpy as np
import pytest

import rspnet


CE_TRAIN, CE_VAL, FUS_TRAIN, FUS_VAL = 1, 2, 3, 4


def tiny_system():
    sys = rspnet.SystemConfig()
    sys.channel.n_subcarriers = 8
    sys.channel.n_subsurfaces = 4
    sys.channel.n_taps = 3
    sys.channel.cp_length = 4
    sys.channel.seed = 11
    return sys


def tiny_train():
    tc = rspnet.TrainConfig()
    tc.n_train = 120
    tc.n_val = 60
    tc.batch = 20
    tc.epochs_ce = 2
    tc.epochs_fus = 2
    tc.seed = 11
    return tc


def test_zadoff_chu_is_unit_modulus():
    zc = rspnet.zadoff_chu(32, 1)
    assert zc.shape == (32,)
    assert np.allclose(np.abs(zc), 1.0, atol=1e-12)


def test_qpsk_round_trip():
    bits = [0, 1, 1, 0, 1, 1, 0, 0]
    symbols = rspnet.qpsk_modulate(bits)
    assert np.allclose(np.abs(symbols), 1.0, atol=1e-12)
    assert list(rspnet.qpsk_demodulate(symbols)) == bits


def test_channel_draws_are_reproducible():
    sys = tiny_system()
    a = rspnet.draw_channel(sys.channel, rspnet.PhaseMode.UNIFORM_RANDOM, rspnet.Rng(3))
    b = rspnet.draw_channel(sys.channel, rspnet.PhaseMode.UNIFORM_RANDOM, rspnet.Rng(3))
    assert np.array_equal(a.h_composite, b.h_composite)
    assert np.allclose(np.abs(a.phase_shifts), 1.0, atol=1e-12)


def test_noiseless_frame_recovers_exactly_with_true_channel():
    sys = tiny_system()
    rng = rspnet.Rng(5)
    ch = rspnet.draw_channel(sys.channel, rspnet.PhaseMode.UNIFORM_RANDOM, rng)
    frame = rspnet.random_frame(sys.pilot(), sys.split, ch.h_composite, 0.0, rng)
    zf = rspnet.zf_equalize(frame.received, ch.h_composite)
    s = rspnet.cancel_pilot(zf.s_zf, frame.pilot, sys.split)
    assert list(rspnet.qpsk_demodulate(s)) == list(frame.data_bits)
    assert rspnet.ber(rspnet.qpsk_demodulate(s), frame.data_bits) == 0.0


def test_ls_estimate_is_exact_on_pure_pilot():
    split = rspnet.PowerSplit()
    split.lambda_ = 1.0
    rng = rspnet.Rng(6)
    pilot = rspnet.zadoff_chu(8, 1)
    cfg = tiny_system().channel
    ch = rspnet.draw_channel(cfg, rspnet.PhaseMode.UNIFORM_RANDOM, rng)
    y = pilot * ch.h_composite
    h_ls = rspnet.ls_estimate(y, pilot, split)
    assert np.allclose(h_ls, ch.h_composite, atol=1e-12)


def test_training_reduces_validation_loss():
    sys = tiny_system()
    tc = tiny_train()
    ce = rspnet.CeNet.create(sys.channel.n_subcarriers, tc.l2_ce, rspnet.Rng(1))
    train_set = rspnet.gen_ce_dataset(tc, sys, tc.n_train, CE_TRAIN)
    val_set = rspnet.gen_ce_dataset(tc, sys, tc.n_val, CE_VAL)
    assert train_set.inputs.shape == (120, 16)
    hist = rspnet.train_ce_net(ce, train_set, val_set, tc)
    assert len(hist.val_loss) == tc.epochs_ce + 1
    assert hist.val_loss[-1] < hist.val_loss[0]
    assert ce.trained


def test_full_chain_and_sweep():
    sys = tiny_system()
    tc = tiny_train()
    ce = rspnet.CeNet.create(sys.channel.n_subcarriers, tc.l2_ce, rspnet.Rng(1))
    rspnet.train_ce_net(
        ce,
        rspnet.gen_ce_dataset(tc, sys, tc.n_train, CE_TRAIN),
        rspnet.gen_ce_dataset(tc, sys, tc.n_val, CE_VAL),
        tc,
    )
    fus = rspnet.FusNet.create(sys.channel.n_subcarriers, tc.l2_fus, rspnet.Rng(2))
    rspnet.train_fus_net(
        fus,
        rspnet.gen_fus_dataset(tc, ce, sys, tc.n_train, FUS_TRAIN),
        rspnet.gen_fus_dataset(tc, ce, sys, tc.n_val, FUS_VAL),
        tc,
    )

    rng = rspnet.Rng(9)
    ch = rspnet.draw_channel(sys.channel, rspnet.PhaseMode.UNIFORM_RANDOM, rng)
    frame = rspnet.random_frame(
        sys.pilot(), sys.split, ch.h_composite, rspnet.snr_to_noise_var(12.0, 1.0), rng
    )
    result, trace = rspnet.run_test_phase(ce, fus, frame)
    assert trace == [
        "ls_estimate",
        "complex_to_real",
        "ce_net_infer",
        "real_to_complex",
        "zf_equalize",
        "cancel_pilot",
        "splice_fus_input",
        "fus_net_infer",
    ]
    assert len(result.detected_bits) == 16
    assert math.isfinite(rspnet.nmse(result.h_ce, ch.h_composite))

    cov = rspnet.estimate_channel_covariance(
        sys.channel, rspnet.PhaseMode.UNIFORM_RANDOM, 300, rspnet.Rng(4)
    )
    cell = rspnet.CellModels(ce, fus, cov)
    rows = rspnet.evaluate_cell(sys, cell, [0.0, 12.0], 25, tc.seed)
    methods = {r.method for r in rows}
    assert methods == {
        "LS-CE",
        "MMSE-CE",
        "CE-Net",
        "MMSE-CE+MMSE-SD",
        "CE-Net+ZF",
        "proposed",
    }
    assert all(r.n_frames == 25 for r in rows)
    assert all(0.0 <= r.ber <= 1.0 for r in rows)


def test_checkpoint_round_trip(tmp_path):
    ce = rspnet.CeNet.create(4, 1e-4, rspnet.Rng(8))
    path = str(tmp_path / "ce.ckpt")
    ce.save(path)
    again = rspnet.CeNet.load(path)
    assert again.n_subcarriers == 4
    probe = np.zeros(4, dtype=complex)
    assert np.array_equal(rspnet.ce_net_infer(ce, probe), rspnet.ce_net_infer(again, probe))


def test_complexity_and_energy_figures():
    rows = rspnet.complexity_table([32, 64])
    assert rows[0].proposed == 86016
    assert rows[0].mmse_chain == 200768
    assert rows[1].proposed == 344064
    assert rows[1].mmse_chain == 1589376

    rm = rspnet.ResourceModel()
    rep = rspnet.energy_accounting(rm)
    assert rep.energy_baseline == pytest.approx(64.0)
    assert rep.energy_superimposed == pytest.approx(32.0)
    assert rep.bandwidth_superimposed == pytest.approx(32.0)


def test_invalid_inputs_raise():
    with pytest.raises(ValueError):
        rspnet.zadoff_chu(8, 8)
    with pytest.raises(ValueError):
        rspnet.nmse(np.zeros(2, dtype=complex), np.zeros(2, dtype=complex))
