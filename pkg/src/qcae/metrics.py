"""Structural similarity and run reporting.

ssim follows the windowed form ((2*mu_a*mu_b + C1)(2*cov + C2)) /
((mu_a^2 + mu_b^2 + C1)(var_a + var_b + C2)) averaged over valid window
positions, with biased (weighted-sum) variance estimates. The default
window is the canonical 11x11 Gaussian with sigma 1.5; an 8x8 uniform
window is available as a cross-check. Pixels are assumed in [0, 1], so the
dynamic range defaults to 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d


@dataclass(frozen=True)
class SsimConfig:
    window: str = "gaussian11"  # or "uniform8"
    dynamic_range: float = 1.0
    k1: float = 0.01
    k2: float = 0.03

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2


@dataclass(frozen=True)
class RunRecord:
    """One training epoch's outcome, as persisted to CSV."""

    epoch: int
    train_loss: float
    val_ssim: float
    config_id: str = ""


def _window_kernel(cfg: SsimConfig) -> np.ndarray:
    if cfg.window == "gaussian11":
        radius, sigma = 5, 1.5
        d = np.arange(-radius, radius + 1, dtype=float)
        g = np.exp(-(d * d) / (2.0 * sigma * sigma))
        kernel = np.outer(g, g)
    elif cfg.window == "uniform8":
        kernel = np.ones((8, 8))
    else:
        raise ValueError(f"unknown ssim window {cfg.window!r}")
    return kernel / kernel.sum()


def _as_plane(image) -> np.ndarray:
    image = np.asarray(image, dtype=float)
    if image.ndim == 3 and image.shape[0] == 1:
        image = image[0]
    if image.ndim != 2:
        raise ValueError(f"expected a 2-D image or (1, H, W), got shape {image.shape}")
    return image


def ssim(a, b, cfg: SsimConfig = SsimConfig()) -> float:
    a, b = _as_plane(a), _as_plane(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    kernel = _window_kernel(cfg)
    if a.shape[0] < kernel.shape[0] or a.shape[1] < kernel.shape[1]:
        raise ValueError(f"image {a.shape} smaller than ssim window {kernel.shape}")

    def local_mean(x):
        return convolve2d(x, kernel, mode="valid")

    mu_a, mu_b = local_mean(a), local_mean(b)
    var_a = local_mean(a * a) - mu_a * mu_a
    var_b = local_mean(b * b) - mu_b * mu_b
    cov = local_mean(a * b) - mu_a * mu_b
    c1, c2 = cfg.c1, cfg.c2
    s_map = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    )
    return float(s_map.mean())


def ssim_config_for(image_shape) -> SsimConfig:
    """Default window, falling back to uniform8 when 11x11 does not fit."""
    height, width = image_shape[-2], image_shape[-1]
    if min(height, width) >= 11:
        return SsimConfig()
    if min(height, width) >= 8:
        return SsimConfig(window="uniform8")
    raise ValueError(f"no ssim window fits an image of shape {image_shape}")


def mean_ssim(batch_a, batch_b, cfg: SsimConfig = SsimConfig()) -> float:
    """Mean of per-image ssim over two equally long image stacks."""
    batch_a, batch_b = np.asarray(batch_a, dtype=float), np.asarray(batch_b, dtype=float)
    if batch_a.shape != batch_b.shape:
        raise ValueError(f"shape mismatch: {batch_a.shape} vs {batch_b.shape}")
    if batch_a.ndim < 3:
        raise ValueError("expected a stack of images")
    return float(np.mean([ssim(x, y, cfg) for x, y in zip(batch_a, batch_b)]))


def write_csv(records: list[RunRecord], path) -> None:
    """`config_id,epoch,train_loss,val_ssim` rows, floats at 6 decimals."""
    if not records:
        raise ValueError("no records to write")
    with open(path, "w", newline="") as f:
        f.write("config_id,epoch,train_loss,val_ssim\n")
        for r in records:
            f.write(f"{r.config_id},{r.epoch},{r.train_loss:.6f},{r.val_ssim:.6f}\n")
