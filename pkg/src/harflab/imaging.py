"""Standardization of raster letter images into 128x128 3-channel model inputs.

The pipeline is: grayscale conversion -> size standardization (white padding
and/or aspect-preserving bilinear resize) -> [0, 1] normalization with
channel triplication. Grayscale images are uint8 H x W arrays with white
(255) background; a model input is a float32 (3, 128, 128) array in [0, 1]
whose channels are identical copies.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

TARGET_SIZE = 128
WHITE = 255

# Rec.601 luminance coefficients for RGB -> gray.
_LUMA = np.array([0.299, 0.587, 0.114], dtype=np.float64)


def to_grayscale(image: np.ndarray) -> np.ndarray:
    """Collapse a 1-, 3-, or 4-channel uint8 raster to single-channel gray."""
    arr = np.asarray(image)
    if arr.size == 0:
        raise ValueError("zero-size image")
    if arr.ndim == 2:
        return arr.astype(np.uint8, copy=True)
    if arr.ndim == 3 and arr.shape[2] in (3, 4):
        rgb = arr[:, :, :3].astype(np.float64)
        gray = rgb @ _LUMA
        return np.clip(np.rint(gray), 0, 255).astype(np.uint8)
    if arr.ndim == 3 and arr.shape[2] == 1:
        return arr[:, :, 0].astype(np.uint8, copy=True)
    raise ValueError(f"expected 1, 3, or 4 channels, got shape {arr.shape}")


def _resize_bilinear(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize with the align-corners=false convention, edge clamped."""
    in_h, in_w = image.shape
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * (in_h / out_h) - 0.5
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * (in_w / out_w) - 0.5
    y0f = np.floor(ys)
    x0f = np.floor(xs)
    wy = (ys - y0f)[:, None]
    wx = (xs - x0f)[None, :]
    y0 = np.clip(y0f.astype(np.int64), 0, in_h - 1)
    y1 = np.clip(y0 + 1, 0, in_h - 1)
    x0 = np.clip(x0f.astype(np.int64), 0, in_w - 1)
    x1 = np.clip(x0 + 1, 0, in_w - 1)
    f = image.astype(np.float64)
    top = f[y0][:, x0] * (1 - wx) + f[y0][:, x1] * wx
    bottom = f[y1][:, x0] * (1 - wx) + f[y1][:, x1] * wx
    out = top * (1 - wy) + bottom * wy
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def _pad_to_target(image: np.ndarray) -> np.ndarray:
    h, w = image.shape
    top = (TARGET_SIZE - h) // 2
    left = (TARGET_SIZE - w) // 2
    out = np.full((TARGET_SIZE, TARGET_SIZE), WHITE, dtype=np.uint8)
    out[top : top + h, left : left + w] = image
    return out


def standardize(image: np.ndarray) -> np.ndarray:
    """Bring a gray image to 128x128: pad small inputs with white, shrink
    large ones along the longer side (aspect preserved) and pad the rest."""
    arr = np.asarray(image)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-D gray image, got shape {arr.shape}")
    arr = arr.astype(np.uint8)
    h, w = arr.shape
    if h <= TARGET_SIZE and w <= TARGET_SIZE:
        return _pad_to_target(arr)
    if h >= w:
        new_h = TARGET_SIZE
        new_w = max(1, round(w * TARGET_SIZE / h))
    else:
        new_w = TARGET_SIZE
        new_h = max(1, round(h * TARGET_SIZE / w))
    return _pad_to_target(_resize_bilinear(arr, new_h, new_w))


def normalize_and_expand(image: np.ndarray) -> np.ndarray:
    """Scale a 128x128 gray image to [0, 1] and replicate it to 3 channels."""
    arr = np.asarray(image)
    if arr.shape != (TARGET_SIZE, TARGET_SIZE):
        raise ValueError(f"expected shape (128, 128), got {arr.shape}")
    plane = arr.astype(np.float32) / 255.0
    return np.repeat(plane[None, :, :], 3, axis=0)


def load_image(path: Path | str) -> np.ndarray:
    """Load a PNG or BMP file as a uint8 array (H x W or H x W x C)."""
    path = Path(path)
    if path.suffix.lower() not in (".png", ".bmp"):
        raise ValueError(f"unsupported image format (want PNG or BMP): {path}")
    with Image.open(path) as im:
        if im.mode in ("1", "P", "I", "F", "I;16", "LA"):
            im = im.convert("RGBA" if "A" in im.mode else "L")
        return np.asarray(im)


def load_standardized(path: Path | str) -> np.ndarray:
    """Load, grayscale, and standardize an image to 128x128 uint8."""
    return standardize(to_grayscale(load_image(path)))


def preprocess(path: Path | str) -> np.ndarray:
    """Full pipeline: file path -> (3, 128, 128) float32 model input."""
    return normalize_and_expand(load_standardized(path))
