"""Stochastic augmentation of gray letter images.

Five transforms — elastic deformation, rotation, Gaussian blur, Gaussian
noise, perspective skew — each applied independently with a configurable
probability (default 30%). All transforms operate on uint8 images in
[0, 255], preserve shape, and are bitwise-deterministic given a seeded
numpy Generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

WHITE = 255

TRANSFORM_ORDER = ("elastic", "rotate", "blur", "noise", "skew")


@dataclass(frozen=True)
class AugmentConfig:
    apply_probability: float = 0.30
    rotation_degrees: float = 5.0
    blur_radius: float = 0.5
    noise_std_fraction: float = 0.40
    elastic_alpha: float = 34.0
    elastic_sigma: float = 4.0
    elastic_pad: int = 10
    skew_magnitude_fraction: float = 0.10

    def __post_init__(self):
        if not 0.0 <= self.apply_probability <= 1.0:
            raise ValueError(f"apply_probability must be in [0, 1], got {self.apply_probability}")
        for name in (
            "rotation_degrees",
            "blur_radius",
            "noise_std_fraction",
            "elastic_alpha",
            "elastic_sigma",
            "elastic_pad",
            "skew_magnitude_fraction",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic random source; one per task when running concurrently."""
    return np.random.default_rng(seed)


def _check_gray(image: np.ndarray, min_side: int = 1) -> np.ndarray:
    arr = np.asarray(image)
    if arr.ndim != 2 or arr.dtype != np.uint8:
        raise ValueError(f"expected a 2-D uint8 image, got shape {arr.shape} dtype {arr.dtype}")
    if min(arr.shape) < min_side:
        raise ValueError(f"image sides must be at least {min_side}, got {arr.shape}")
    return arr


def _to_uint8(values: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(values), 0, 255).astype(np.uint8)


def elastic_deform(image: np.ndarray, rng: np.random.Generator, cfg: AugmentConfig) -> np.ndarray:
    """Warp by a smooth random displacement field (Gaussian-filtered noise).

    The image is mirror-padded first so the deformation never drags in
    constant-fill artifacts at the boundary; the pad is cropped back off.
    Row displacement is drawn before column displacement.
    """
    arr = _check_gray(image, min_side=3)
    pad = cfg.elastic_pad
    padded = np.pad(arr, pad, mode="reflect").astype(np.float64)
    d_rows = ndimage.gaussian_filter(rng.uniform(-1, 1, padded.shape), cfg.elastic_sigma) * cfg.elastic_alpha
    d_cols = ndimage.gaussian_filter(rng.uniform(-1, 1, padded.shape), cfg.elastic_sigma) * cfg.elastic_alpha
    rows, cols = np.meshgrid(
        np.arange(padded.shape[0], dtype=np.float64),
        np.arange(padded.shape[1], dtype=np.float64),
        indexing="ij",
    )
    warped = ndimage.map_coordinates(padded, [rows + d_rows, cols + d_cols], order=1, mode="nearest")
    if pad:
        warped = warped[pad:-pad, pad:-pad]
    return _to_uint8(warped)


def random_rotate(image: np.ndarray, rng: np.random.Generator, cfg: AugmentConfig) -> np.ndarray:
    """Rotate by a uniform random angle with nearest-neighbor sampling and
    white fill for exposed pixels."""
    arr = _check_gray(image)
    angle = float(rng.uniform(-cfg.rotation_degrees, cfg.rotation_degrees))
    if angle == 0.0:
        return arr.copy()
    return ndimage.rotate(
        arr, angle, reshape=False, order=0, mode="constant", cval=WHITE, prefilter=False
    )


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1-D Gaussian taps truncated at 3*sigma, normalized to sum 1."""
    if sigma <= 0:
        return np.array([1.0])
    radius = int(math.floor(3.0 * sigma))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(xs**2) / (2.0 * sigma**2))
    return kernel / kernel.sum()


def gaussian_blur(image: np.ndarray, cfg: AugmentConfig) -> np.ndarray:
    """Separable Gaussian smoothing with sigma = blur radius."""
    arr = _check_gray(image)
    kernel = gaussian_kernel(cfg.blur_radius)
    if kernel.size == 1:
        return arr.copy()
    blurred = ndimage.convolve1d(arr.astype(np.float64), kernel, axis=0, mode="reflect")
    blurred = ndimage.convolve1d(blurred, kernel, axis=1, mode="reflect")
    return _to_uint8(blurred)


def noise_field(rng: np.random.Generator, shape: tuple[int, ...], std: float) -> np.ndarray:
    """Zero-mean i.i.d. normal noise, before any clipping."""
    return rng.normal(0.0, std, size=shape)


def gaussian_noise(image: np.ndarray, rng: np.random.Generator, cfg: AugmentConfig) -> np.ndarray:
    """Add zero-mean Gaussian noise with std = fraction of the 255 intensity
    range, then clip back into [0, 255]."""
    arr = _check_gray(image)
    noise = noise_field(rng, arr.shape, cfg.noise_std_fraction * 255.0)
    return _to_uint8(arr.astype(np.float64) + noise)


def homography_from_points(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Solve the 8-DOF projective transform mapping 4 src points to 4 dst
    points; returns the 3x3 matrix H with H[2, 2] = 1."""
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != (4, 2) or dst.shape != (4, 2):
        raise ValueError("need exactly 4 (x, y) point pairs")
    rows = []
    rhs = []
    for (x, y), (u, v) in zip(src, dst):
        rows.append([x, y, 1, 0, 0, 0, -u * x, -u * y])
        rhs.append(u)
        rows.append([0, 0, 0, x, y, 1, -v * x, -v * y])
        rhs.append(v)
    h = np.linalg.solve(np.array(rows), np.array(rhs))
    return np.append(h, 1.0).reshape(3, 3)


def _warp_perspective(image: np.ndarray, matrix: np.ndarray, fill: int = WHITE) -> np.ndarray:
    """Inverse-map `image` through `matrix` with bilinear sampling; pixels
    that map outside the source frame take the fill value."""
    h, w = image.shape
    inv = np.linalg.inv(matrix)
    xs, ys = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    ones = np.ones_like(xs)
    coords = np.stack([xs, ys, ones])
    mapped = np.tensordot(inv, coords, axes=1)
    sx = mapped[0] / mapped[2]
    sy = mapped[1] / mapped[2]
    valid = (sx >= 0) & (sx <= w - 1) & (sy >= 0) & (sy <= h - 1)
    x0 = np.clip(np.floor(sx).astype(np.int64), 0, w - 1)
    y0 = np.clip(np.floor(sy).astype(np.int64), 0, h - 1)
    x1 = np.clip(x0 + 1, 0, w - 1)
    y1 = np.clip(y0 + 1, 0, h - 1)
    fx = np.clip(sx - x0, 0.0, 1.0)
    fy = np.clip(sy - y0, 0.0, 1.0)
    f = image.astype(np.float64)
    top = f[y0, x0] * (1 - fx) + f[y0, x1] * fx
    bottom = f[y1, x0] * (1 - fx) + f[y1, x1] * fx
    out = top * (1 - fy) + bottom * fy
    out[~valid] = fill
    return _to_uint8(out)


def perspective_skew(image: np.ndarray, rng: np.random.Generator, cfg: AugmentConfig) -> np.ndarray:
    """Randomized four-point perspective warp; each corner moves by at most
    the magnitude fraction of the corresponding side length. The warp is
    rendered in the original frame, so the final center crop is implicit."""
    arr = _check_gray(image, min_side=8)
    h, w = arr.shape
    max_x = cfg.skew_magnitude_fraction * w
    max_y = cfg.skew_magnitude_fraction * h
    corners = np.array([[0, 0], [w - 1, 0], [w - 1, h - 1], [0, h - 1]], dtype=np.float64)
    offsets = np.empty_like(corners)
    for i in range(4):
        offsets[i, 0] = rng.uniform(-max_x, max_x)
        offsets[i, 1] = rng.uniform(-max_y, max_y)
    matrix = homography_from_points(corners, corners + offsets)
    return _warp_perspective(arr, matrix)


def augment_pipeline_trace(
    image: np.ndarray, rng: np.random.Generator, cfg: AugmentConfig
) -> tuple[np.ndarray, tuple[str, ...]]:
    """Run the five transforms in fixed order, each gated by an independent
    uniform draw against the apply probability; returns which ones fired."""
    out = _check_gray(image)
    applied = []
    for name in TRANSFORM_ORDER:
        if rng.uniform() >= cfg.apply_probability:
            continue
        if name == "elastic":
            out = elastic_deform(out, rng, cfg)
        elif name == "rotate":
            out = random_rotate(out, rng, cfg)
        elif name == "blur":
            out = gaussian_blur(out, cfg)
        elif name == "noise":
            out = gaussian_noise(out, rng, cfg)
        else:
            out = perspective_skew(out, rng, cfg)
        applied.append(name)
    return out, tuple(applied)


def augment_pipeline(image: np.ndarray, rng: np.random.Generator, cfg: AugmentConfig) -> np.ndarray:
    return augment_pipeline_trace(image, rng, cfg)[0]
