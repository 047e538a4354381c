"""Dataset handling: IDX parsing and writing, class filtering, Gaussian
pixel noise, PGM export, and a deterministic synthetic digit corpus for
machines without the real files.

IDX is the big-endian MNIST container: images carry magic 0x00000803 and a
16-byte header (magic, count, rows, cols), labels carry magic 0x00000801
and an 8-byte header, both followed by raw uint8 payload. Pixels are scaled
to [0, 1] on load.
"""
from __future__ import annotations

import gzip
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path
from urllib.request import urlopen

import numpy as np
from scipy.ndimage import gaussian_filter

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

MNIST_FILES = {
    "train-images-idx3-ubyte": 16 + 60000 * 28 * 28,
    "train-labels-idx1-ubyte": 8 + 60000,
    "t10k-images-idx3-ubyte": 16 + 10000 * 28 * 28,
    "t10k-labels-idx1-ubyte": 8 + 10000,
}


class IdxParseError(ValueError):
    """Malformed IDX payload; the message names the offending byte offset."""


@dataclass
class MnistSet:
    """Images (N, 1, H, W) scaled to [0, 1] plus integer labels (N,)."""

    images: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise ValueError(
                f"{len(self.images)} images vs {len(self.labels)} labels"
            )

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian pixel noise; sigma 0 reproduces the input exactly."""

    sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


def _read_header(data: bytes, path, magic_expected: int, n_dims: int):
    header_len = 4 * (1 + n_dims)
    if len(data) < header_len:
        raise IdxParseError(
            f"{path}: truncated header, file ends at offset {len(data)} "
            f"(need {header_len})"
        )
    magic = struct.unpack_from(">I", data, 0)[0]
    if magic != magic_expected:
        raise IdxParseError(
            f"{path}: bad magic 0x{magic:08x} at offset 0 (expected 0x{magic_expected:08x})"
        )
    dims = struct.unpack_from(f">{n_dims}I", data, 4)
    return dims, header_len


def load_idx(images_path, labels_path) -> MnistSet:
    """Parse an images/labels IDX pair into a checked, [0, 1]-scaled set."""
    img_data = Path(images_path).read_bytes()
    (count, rows, cols), offset = _read_header(img_data, images_path, IMAGE_MAGIC, 3)
    expected = count * rows * cols
    if len(img_data) != offset + expected:
        raise IdxParseError(
            f"{images_path}: payload of {expected} bytes expected at offset {offset}, "
            f"file ends at offset {len(img_data)}"
        )
    pixels = np.frombuffer(img_data, dtype=np.uint8, count=expected, offset=offset)
    images = pixels.reshape(count, 1, rows, cols).astype(np.float64) / 255.0

    lbl_data = Path(labels_path).read_bytes()
    (lbl_count,), lbl_offset = _read_header(lbl_data, labels_path, LABEL_MAGIC, 1)
    if len(lbl_data) != lbl_offset + lbl_count:
        raise IdxParseError(
            f"{labels_path}: payload of {lbl_count} bytes expected at offset {lbl_offset}, "
            f"file ends at offset {len(lbl_data)}"
        )
    labels = np.frombuffer(lbl_data, dtype=np.uint8, count=lbl_count,
                           offset=lbl_offset).astype(np.int64)
    if lbl_count != count:
        raise IdxParseError(
            f"count mismatch: {count} images in {images_path} vs "
            f"{lbl_count} labels in {labels_path}"
        )
    return MnistSet(images, labels)


def write_idx(dataset: MnistSet, images_path, labels_path) -> None:
    """Inverse of load_idx; pixel floats are rounded back to uint8."""
    count = len(dataset)
    rows, cols = dataset.images.shape[2], dataset.images.shape[3]
    pixels = np.round(dataset.images * 255.0).astype(np.uint8)
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IMAGE_MAGIC, count, rows, cols))
        f.write(pixels.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", LABEL_MAGIC, count))
        f.write(dataset.labels.astype(np.uint8).tobytes())


def filter_classes(dataset: MnistSet, classes, limit: int | None = None) -> MnistSet:
    """Keep samples whose label is listed, in file order, up to limit.

    Asking for more matches than exist returns everything found and emits a
    warning rather than failing.
    """
    classes = list(classes)
    if not classes:
        raise ValueError("classes must be nonempty")
    mask = np.isin(dataset.labels, classes)
    idx = np.flatnonzero(mask)
    if limit is not None:
        if limit > idx.size:
            warnings.warn(
                f"requested {limit} samples but only {idx.size} match classes {classes}",
                stacklevel=2,
            )
        idx = idx[:limit]
    return MnistSet(dataset.images[idx], dataset.labels[idx])


def add_gaussian_noise(images: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    """clamp(x + sigma * g, 0, 1) with g standard normal from the seeded rng."""
    if spec.sigma == 0.0:
        return images.copy()
    rng = np.random.default_rng(spec.seed)
    noisy = images + spec.sigma * rng.standard_normal(images.shape)
    return np.clip(noisy, 0.0, 1.0)


def export_pgm(image, path) -> None:
    """8-bit binary PGM (P5), maxval 255, row-major."""
    image = np.asarray(image, dtype=float)
    if image.ndim == 3 and image.shape[0] == 1:
        image = image[0]
    if image.ndim != 2:
        raise ValueError(f"expected a 2-D image or (1, H, W), got shape {image.shape}")
    height, width = image.shape
    body = np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        f.write(body.tobytes())


def import_pgm(path) -> np.ndarray:
    """Read a binary PGM written by export_pgm back into (1, H, W) floats."""
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if len(parts) != 4 or parts[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM written by this package")
    width, height = (int(v) for v in parts[1].split())
    maxval = int(parts[2])
    body = np.frombuffer(parts[3], dtype=np.uint8, count=width * height)
    return body.reshape(1, height, width).astype(np.float64) / maxval


def montage(images, cols: int | None = None, gap: int = 1, fill: float = 1.0) -> np.ndarray:
    """Pack equally sized images into one grid image, row-major order."""
    images = [np.asarray(im, dtype=float) for im in images]
    images = [im[0] if im.ndim == 3 and im.shape[0] == 1 else im for im in images]
    if not images:
        raise ValueError("montage needs at least one image")
    height, width = images[0].shape
    if any(im.shape != (height, width) for im in images):
        raise ValueError("all montage tiles must share one shape")
    count = len(images)
    cols = count if cols is None else cols
    n_rows = -(-count // cols)
    canvas = np.full(
        (n_rows * height + (n_rows - 1) * gap, cols * width + (cols - 1) * gap), fill
    )
    for i, im in enumerate(images):
        r, c = divmod(i, cols)
        top, left = r * (height + gap), c * (width + gap)
        canvas[top:top + height, left:left + width] = im
    return canvas


def fetch_mnist(dest_dir, base_url: str, expected_sizes: dict | None = None) -> list[Path]:
    """Download the four IDX files (optionally gzipped) from a mirror.

    Each payload is gunzipped when it carries the gzip magic and its
    decompressed length is checked against the expected table before
    anything is written. Returns the written paths.
    """
    expected_sizes = MNIST_FILES if expected_sizes is None else expected_sizes
    dest_dir = Path(dest_dir)
    dest_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, size in expected_sizes.items():
        url = f"{base_url.rstrip('/')}/{name}.gz"
        with urlopen(url) as resp:
            payload = resp.read()
        if payload[:2] == b"\x1f\x8b":
            payload = gzip.decompress(payload)
        if len(payload) != size:
            raise ValueError(
                f"{url}: expected {size} bytes after decompression, got {len(payload)}"
            )
        path = dest_dir / name
        path.write_bytes(payload)
        written.append(path)
    return written


def make_synthetic_digits(count: int, classes=(0, 1), seed: int = 0,
                          size: int = 28) -> MnistSet:
    """Deterministic MNIST-shaped stand-in corpus of rendered 0s and 1s.

    Strokes vary in position, radius, thickness, slant and intensity, then
    get a light blur for an antialiased look. Only classes 0 and 1 exist;
    use it when the real IDX files are unavailable.
    """
    classes = tuple(classes)
    if not classes or any(c not in (0, 1) for c in classes):
        raise ValueError("synthetic corpus only provides classes 0 and 1")
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(float)
    images = np.zeros((count, 1, size, size))
    labels = np.zeros(count, dtype=np.int64)
    for i in range(count):
        label = classes[rng.integers(len(classes))]
        cx = size / 2 - 0.5 + rng.uniform(-2.0, 2.0)
        cy = size / 2 - 0.5 + rng.uniform(-2.0, 2.0)
        if label == 0:
            rad_x = rng.uniform(5.0, 7.5)
            rad_y = rng.uniform(7.0, 9.5)
            thickness = rng.uniform(0.14, 0.22)
            r = np.sqrt(((xx - cx) / rad_x) ** 2 + ((yy - cy) / rad_y) ** 2)
            img = np.exp(-((r - 1.0) / thickness) ** 2)
        else:
            slant = rng.uniform(-0.18, 0.18)
            half_width = rng.uniform(0.9, 1.6)
            half_len = rng.uniform(8.0, 10.0)
            dist = np.abs(xx - (cx + slant * (yy - cy)))
            img = np.exp(-((dist / half_width) ** 2))
            img *= np.exp(-np.maximum(np.abs(yy - cy) - half_len, 0.0) ** 2)
        img = gaussian_filter(img, sigma=0.6) * rng.uniform(0.85, 1.0)
        images[i, 0] = np.clip(img, 0.0, 1.0)
        labels[i] = label
    return MnistSet(images, labels)
