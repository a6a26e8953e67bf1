import math

import numpy as np
import pytest

import semsteg


def test_rng_deterministic():
    a = semsteg.Rng(7)
    b = semsteg.Rng(7)
    assert [a.gauss() for _ in range(10)] == [b.gauss() for _ in range(10)]


def test_synth_dataset_shape_and_range():
    imgs = semsteg.synth_dataset(3, 2, [1, 32, 32])
    assert len(imgs) == 2
    for img in imgs:
        assert img.shape == (1, 32, 32)
        assert img.min() >= 0.0 and img.max() <= 1.0


def test_psnr_hand_case():
    a = np.full((1, 4, 4), 0.5)
    b = np.full((1, 4, 4), 0.6)
    assert semsteg.psnr(a, b) == pytest.approx(20.0, abs=1e-9)


def test_ssim_identity():
    img = semsteg.synth_dataset(4, 1, [1, 16, 16])[0]
    assert semsteg.ssim(img, img) == pytest.approx(1.0, abs=1e-9)


def test_auc_hand_case():
    assert semsteg.auc([0.7], [0.3, 0.8]) == pytest.approx(0.5)


def test_power_normalize():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    y = semsteg.power_normalize(x)
    assert np.mean(y**2) == pytest.approx(1.0, abs=1e-12)


def test_awgn_snr():
    rng = semsteg.Rng(9)
    x = rng.gauss_tensor([50000])
    x = semsteg.power_normalize(x)
    y = semsteg.awgn(x, 10.0, rng)
    snr = 10 * math.log10(np.sum(x**2) / np.sum((y - x) ** 2))
    assert abs(snr - 10.0) < 0.3


def test_rayleigh_gain():
    rng = semsteg.Rng(10)
    x = np.ones(16) / np.sqrt(np.mean(np.ones(16) ** 2))
    y, h = semsteg.rayleigh(x, 300.0, True, rng)
    assert h > 0
    np.testing.assert_allclose(y, x, atol=1e-9)


def test_haar_round_trip():
    img = semsteg.synth_dataset(11, 1, [1, 8, 8])[0]
    ll, lh, hl, hh = semsteg.haar_dwt(img)
    rec = semsteg.inverse_haar_dwt(ll, lh, hl, hh)
    np.testing.assert_allclose(rec, img, atol=1e-12)
    energy = sum(np.sum(b**2) for b in (ll, lh, hl, hh))
    assert energy == pytest.approx(np.sum(img**2), abs=1e-9)


def test_pnm_round_trip(tmp_path):
    img = semsteg.synth_dataset(12, 1, [1, 16, 16])[0]
    path = str(tmp_path / "x.pgm")
    semsteg.save_pnm(img, path)
    back = semsteg.load_pnm(path)
    assert np.max(np.abs(back - img)) <= 0.5 / 255.0 + 1e-12


def test_codec_train_and_round_trip():
    cfg = semsteg.CodecConfig()
    cfg.epochs = 2
    imgs = semsteg.synth_dataset(13, 16, [1, 32, 32])
    model, history = semsteg.train_codec(cfg, imgs, 5)
    assert len(history) == 2
    feat = model.encode(imgs[0])
    assert feat.shape == (8, 8, 8)
    assert np.mean(feat**2) == pytest.approx(1.0, abs=1e-9)
    rec = model.decode(feat)
    assert rec.shape == (1, 32, 32)


def test_shape_errors_surface_as_value_error():
    with pytest.raises(ValueError):
        semsteg.power_normalize(np.zeros(4))
