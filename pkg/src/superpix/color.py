"""sRGB to CIELAB conversion (D65, 2 degree observer)."""

from __future__ import annotations

import numpy as np

from .types import Image, LabImage

# sRGB linear RGB -> XYZ, D65. Row sums give the reference white.
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE = _RGB_TO_XYZ.sum(axis=1)  # (0.9504700, 1.0000001, 1.0888300)

_DELTA3 = (6.0 / 29.0) ** 3


def _lab_f(t: np.ndarray) -> np.ndarray:
    return np.where(t > _DELTA3, np.cbrt(t), t / (3.0 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)


def rgb_to_lab(img: Image) -> LabImage:
    """Convert an 8-bit-range RGB image to CIELAB."""
    if img.channels != 3:
        raise ValueError("rgb_to_lab requires a 3-channel image")
    srgb = img.data / 255.0
    linear = np.where(srgb > 0.04045, ((srgb + 0.055) / 1.055) ** 2.4, srgb / 12.92)
    xyz = linear @ _RGB_TO_XYZ.T
    f = _lab_f(xyz / _WHITE)
    l = 116.0 * f[..., 1] - 16.0
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return LabImage(np.stack([l, a, b], axis=-1))
