"""The six visual augmentations used to build the amateur view.

Images are ``h x w x 3`` uint8 arrays. Every function returns a new array
with the input's dimensions and never mutates its argument.
"""
from __future__ import annotations

import enum

import numpy as np
from PIL import Image

NOISE_STEP = 500
NUM_DIFFUSION_STEPS = 1000
BETA_START, BETA_END = 1e-4, 0.02


class AugmentationKind(str, enum.Enum):
    RANDOM_CROP = "random_crop"
    RANDOM_MASK = "random_mask"
    NOISE = "noise"
    COLOR_INVERSION = "color_inversion"
    HORIZONTAL_FLIP = "horizontal_flip"
    VERTICAL_FLIP = "vertical_flip"

    @property
    def label(self) -> str:
        """Human-readable name as it appears in the selection prompt."""
        return self.value.replace("_", " ")

    @classmethod
    def parse(cls, name: str) -> "AugmentationKind":
        key = name.strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {"hflip": "horizontal_flip", "vflip": "vertical_flip", "invert": "color_inversion",
                   "mask": "random_mask", "crop": "random_crop"}
        return cls(aliases.get(key, key))


def as_raster(image) -> np.ndarray:
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an h x w x 3 image, got shape {arr.shape}")
    if arr.shape[0] < 2 or arr.shape[1] < 2:
        raise ValueError("image must be at least 2 x 2")
    if arr.dtype != np.uint8:
        if np.issubdtype(arr.dtype, np.integer) and arr.min() >= 0 and arr.max() <= 255:
            arr = arr.astype(np.uint8)
        else:
            raise ValueError(f"expected uint8 pixels, got {arr.dtype}")
    return arr


def patch_shape(h: int, w: int) -> tuple[int, int]:
    return -(-h // 2), -(-w // 2)


def _patch_origin(h: int, w: int, rng: np.random.Generator) -> tuple[int, int, int, int]:
    ph, pw = patch_shape(h, w)
    top = int(rng.integers(0, h - ph + 1))
    left = int(rng.integers(0, w - pw + 1))
    return top, left, ph, pw


def horizontal_flip(v: np.ndarray) -> np.ndarray:
    return as_raster(v)[:, ::-1].copy()


def vertical_flip(v: np.ndarray) -> np.ndarray:
    return as_raster(v)[::-1].copy()


def color_inversion(v: np.ndarray) -> np.ndarray:
    return 255 - as_raster(v)


def random_mask(v: np.ndarray, seed: int) -> np.ndarray:
    """Zero a half-size patch placed uniformly inside the image."""
    v = as_raster(v)
    top, left, ph, pw = _patch_origin(*v.shape[:2], np.random.default_rng(seed))
    out = v.copy()
    out[top:top + ph, left:left + pw] = 0
    return out


def random_crop(v: np.ndarray, seed: int) -> np.ndarray:
    """Keep a random half-size patch and resize it back to h x w (bilinear)."""
    v = as_raster(v)
    h, w = v.shape[:2]
    top, left, ph, pw = _patch_origin(h, w, np.random.default_rng(seed))
    patch = Image.fromarray(v[top:top + ph, left:left + pw], mode="RGB")
    return np.asarray(patch.resize((w, h), Image.BILINEAR), dtype=np.uint8).copy()


def alphas_cumprod(num_steps: int = NUM_DIFFUSION_STEPS) -> np.ndarray:
    betas = np.linspace(BETA_START, BETA_END, num_steps, dtype=np.float64)
    return np.cumprod(1.0 - betas)


def add_diffusion_noise(v: np.ndarray, step: int = NOISE_STEP, seed: int = 0) -> np.ndarray:
    """Forward-diffuse the image to ``step`` in closed form.

    ``x_t = sqrt(abar_t) * x_0 + sqrt(1 - abar_t) * eps`` with pixels mapped
    to [-1, 1]; the result is clamped and mapped back to uint8.
    """
    if not 1 <= int(step) <= NUM_DIFFUSION_STEPS:
        raise ValueError(f"step must be in [1, {NUM_DIFFUSION_STEPS}], got {step}")
    v = as_raster(v)
    abar = alphas_cumprod()[int(step) - 1]
    x0 = v.astype(np.float64) / 127.5 - 1.0
    eps = np.random.default_rng(seed).standard_normal(v.shape)
    xt = np.clip(np.sqrt(abar) * x0 + np.sqrt(1.0 - abar) * eps, -1.0, 1.0)
    return np.rint((xt + 1.0) * 127.5).astype(np.uint8)


def apply(kind, v, seed: int = 0) -> np.ndarray:
    """Apply augmentation ``kind`` to ``v``; deterministic in ``(kind, v, seed)``."""
    kind = AugmentationKind(kind)
    if kind is AugmentationKind.HORIZONTAL_FLIP:
        return horizontal_flip(v)
    if kind is AugmentationKind.VERTICAL_FLIP:
        return vertical_flip(v)
    if kind is AugmentationKind.COLOR_INVERSION:
        return color_inversion(v)
    if kind is AugmentationKind.RANDOM_MASK:
        return random_mask(v, seed)
    if kind is AugmentationKind.RANDOM_CROP:
        return random_crop(v, seed)
    return add_diffusion_noise(v, NOISE_STEP, seed)


def load_png(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def save_png(image, path) -> None:
    Image.fromarray(as_raster(image), mode="RGB").save(path, format="PNG")
