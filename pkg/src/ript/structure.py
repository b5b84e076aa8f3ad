"""Local structure prior built from the image structure tensor."""
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .patches import image_to_tensor


@dataclass
class StructureField:
    """Smoothed gradient outer products ``J11, J22, J12`` per pixel."""

    j11: np.ndarray
    j22: np.ndarray
    j12: np.ndarray
    sigma: float
    alpha: float

    def is_psd(self, tol=1e-9):
        scale = max(float(np.max(np.abs(self.j11), initial=0)),
                    float(np.max(np.abs(self.j22), initial=0)), 1.0)
        tol = tol * scale * scale
        det = self.j11 * self.j22 - self.j12 ** 2
        return bool(np.all(self.j11 >= -tol) and np.all(self.j22 >= -tol)
                    and np.all(det >= -tol))


@dataclass
class EdgeFeatureMap:
    values: np.ndarray
    d_min: float
    d_max: float


def gaussian_kernel(sigma):
    """Normalized sampled Gaussian truncated at ``ceil(3 * sigma)``."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = max(1, math.ceil(3 * sigma))
    x = np.arange(-radius, radius + 1, dtype=float)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(image, sigma):
    """Separable Gaussian smoothing with symmetric (reflect) borders."""
    kernel = gaussian_kernel(sigma)
    out = correlate1d(np.asarray(image, dtype=float), kernel, axis=0, mode="reflect")
    return correlate1d(out, kernel, axis=1, mode="reflect")


def structure_field(image, sigma=3.0, alpha=0.5):
    """Structure tensor ``G_alpha * (grad u_sigma outer grad u_sigma)``.

    Gradients are central differences of the smoothed image (one-sided on
    the border rows/columns). ``J11`` holds the horizontal (column-direction)
    derivative squared, so a vertical step edge gives ``J11 >> J22``.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    u = gaussian_blur(image, sigma)
    g_row, g_col = np.gradient(u)
    j11 = gaussian_blur(g_col * g_col, alpha)
    j22 = gaussian_blur(g_row * g_row, alpha)
    j12 = gaussian_blur(g_col * g_row, alpha)
    return StructureField(j11, j22, j12, float(sigma), float(alpha))


def edge_feature(field):
    """Eigenvalue gap ``2 * sqrt((J22 - J11)^2 + 4 J12^2)`` per pixel.

    No 1/2 factor is applied to the eigenvalue pair; the weight map
    min-max normalizes the gap, so the constant drops out.
    """
    gap = 2.0 * np.sqrt((field.j22 - field.j11) ** 2 + 4.0 * field.j12 ** 2)
    return EdgeFeatureMap(gap, float(gap.min()), float(gap.max()))


def weight_image(feature, h=10.0):
    """Per-pixel weight ``exp(h * (v - d_min) / (d_max - d_min))``."""
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    span = feature.d_max - feature.d_min
    if span <= 0:
        return np.ones_like(feature.values, dtype=float)
    return np.exp(h * (feature.values - feature.d_min) / span)


def local_structure_weight(feature, h, layout):
    """Patch-tensor of the local structure weight, entries in ``[1, e^h]``."""
    return image_to_tensor(weight_image(feature, h), layout)
