"""SSIM unit behaviour, closed forms, library cross-check, CSV output."""
import numpy as np
import pytest

from qcae.data_io import NoiseSpec, add_gaussian_noise, make_synthetic_digits
from qcae.metrics import RunRecord, SsimConfig, mean_ssim, ssim, write_csv


def test_ssim_identity_is_one():
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = rng.random((28, 28))
        assert abs(ssim(x, x) - 1.0) < 1e-12


def test_ssim_constant_images_closed_form():
    # all-zero vs all-one: variances vanish, so the contrast term cancels to
    # C2/C2 = 1 and the value reduces to C1 / (1 + C1)
    cfg = SsimConfig()
    value = ssim(np.zeros((28, 28)), np.ones((28, 28)), cfg)
    expected = cfg.c1 / (1.0 + cfg.c1)
    assert abs(value - expected) < 1e-10


def test_ssim_symmetry():
    rng = np.random.default_rng(1)
    for _ in range(5):
        a, b = rng.random((28, 28)), rng.random((28, 28))
        assert abs(ssim(a, b) - ssim(b, a)) < 1e-12


def test_ssim_bounded_by_one_in_magnitude():
    rng = np.random.default_rng(2)
    for _ in range(20):
        a, b = rng.random((16, 16)), rng.random((16, 16))
        assert abs(ssim(a, b)) <= 1.0 + 1e-12


def test_ssim_matches_skimage_reference():
    skimage_metrics = pytest.importorskip("skimage.metrics")
    rng = np.random.default_rng(3)
    for _ in range(5):
        a, b = rng.random((28, 28)), rng.random((28, 28))
        ours = ssim(a, b)
        reference = skimage_metrics.structural_similarity(
            a, b, data_range=1.0, gaussian_weights=True, sigma=1.5,
            use_sample_covariance=False,
        )
        assert abs(ours - reference) < 1e-7


def test_ssim_degrades_monotonically_with_noise():
    images = make_synthetic_digits(50, seed=4).images
    means = []
    for i, sigma in enumerate((0.25, 0.5, 0.75, 1.0)):
        noisy = add_gaussian_noise(images, NoiseSpec(sigma, seed=100 + i))
        means.append(mean_ssim(noisy, images))
    assert all(means[i + 1] <= means[i] for i in range(3)), means


def test_uniform_and_gaussian_windows_agree_closely():
    # documented cross-check between the two window choices
    images = make_synthetic_digits(20, seed=5).images
    noisy = add_gaussian_noise(images, NoiseSpec(0.5, seed=6))
    gauss = mean_ssim(noisy, images, SsimConfig(window="gaussian11"))
    uniform = mean_ssim(noisy, images, SsimConfig(window="uniform8"))
    assert abs(gauss - uniform) < 0.02


def test_ssim_shape_and_window_validation():
    with pytest.raises(ValueError):
        ssim(np.zeros((28, 28)), np.zeros((27, 28)))
    with pytest.raises(ValueError):
        ssim(np.zeros((8, 8)), np.zeros((8, 8)))  # smaller than gaussian11
    with pytest.raises(ValueError):
        ssim(np.zeros((28, 28)), np.zeros((28, 28)), SsimConfig(window="box3"))


def test_ssim_accepts_channel_leading_images():
    rng = np.random.default_rng(7)
    a = rng.random((1, 28, 28))
    assert abs(ssim(a, a) - 1.0) < 1e-12


# ----------------------------------------------------------------- CSV

def test_write_csv_single_record(tmp_path):
    path = tmp_path / "curve.csv"
    write_csv([RunRecord(1, 0.25, 0.5, "abc")], path)
    lines = path.read_text().splitlines()
    assert lines == ["config_id,epoch,train_loss,val_ssim", "abc,1,0.250000,0.500000"]


def test_write_csv_is_reproducible(tmp_path):
    records = [RunRecord(e, 0.1 * e, 0.01 * e, "cfg") for e in range(1, 6)]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(records, p1)
    write_csv(records, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_write_csv_row_count(tmp_path):
    records = [RunRecord(e, 0.0, 0.0, c) for c in ("one", "two") for e in range(1, 51)]
    path = tmp_path / "grid.csv"
    write_csv(records, path)
    assert len(path.read_text().splitlines()) == 101


def test_write_csv_rejects_empty(tmp_path):
    with pytest.raises(ValueError):
        write_csv([], tmp_path / "never.csv")
