"""Sliding-window patch-tensor construction and uniform-average reconstruction."""
from dataclasses import dataclass

import numpy as np


def _axis_origins(length, size, step):
    origins = list(range(0, length - size + 1, step))
    if origins[-1] != length - size:
        origins.append(length - size)
    return origins


@dataclass(frozen=True)
class PatchLayout:
    """Window geometry linking an ``M x N`` image to an ``I x J x P`` tensor.

    Windows are enumerated row-major over their top-left origins. A final
    window flush with the bottom/right border is appended per axis when the
    step does not land on it, so every pixel is covered at least once.
    """

    image_shape: tuple
    patch_shape: tuple
    step: int
    row_origins: tuple
    col_origins: tuple

    @property
    def n_patches(self):
        return len(self.row_origins) * len(self.col_origins)

    @property
    def tensor_shape(self):
        return (self.patch_shape[0], self.patch_shape[1], self.n_patches)

    @property
    def origins(self):
        return [(r, c) for r in self.row_origins for c in self.col_origins]

    def coverage(self):
        """Per-pixel count of windows covering that pixel."""
        m, n = self.image_shape
        pi, pj = self.patch_shape
        rows = np.zeros(m)
        cols = np.zeros(n)
        for r in self.row_origins:
            rows[r:r + pi] += 1
        for c in self.col_origins:
            cols[c:c + pj] += 1
        return np.outer(rows, cols)


def make_layout(m, n, patch_rows, patch_cols, step):
    """Build the sliding-window layout for an ``m x n`` image."""
    if step < 1:
        raise ValueError(f"step must be >= 1, got {step}")
    if patch_rows < 1 or patch_cols < 1:
        raise ValueError("patch dimensions must be positive")
    if patch_rows > m or patch_cols > n:
        raise ValueError(
            f"patch {patch_rows}x{patch_cols} is larger than image {m}x{n}"
        )
    for size, length in ((patch_rows, m), (patch_cols, n)):
        if step > size and size < length:
            raise ValueError(f"step {step} exceeds patch size {size}; pixels would be skipped")
    return PatchLayout(
        image_shape=(int(m), int(n)),
        patch_shape=(int(patch_rows), int(patch_cols)),
        step=int(step),
        row_origins=tuple(_axis_origins(m, patch_rows, step)),
        col_origins=tuple(_axis_origins(n, patch_cols, step)),
    )


def image_to_tensor(image, layout):
    """Stack every window of `image` into slice ``[:, :, k]`` of a tensor."""
    image = np.asarray(image, dtype=float)
    if image.shape != layout.image_shape:
        raise ValueError(
            f"image shape {image.shape} does not match layout {layout.image_shape}"
        )
    pi, pj = layout.patch_shape
    out = np.empty(layout.tensor_shape)
    for k, (r, c) in enumerate(layout.origins):
        out[:, :, k] = image[r:r + pi, c:c + pj]
    return out


def tensor_to_image(tensor, layout):
    """Reconstruct an image by averaging all patch estimates of each pixel."""
    tensor = np.asarray(tensor, dtype=float)
    if tensor.shape != layout.tensor_shape:
        raise ValueError(
            f"tensor shape {tensor.shape} does not match layout {layout.tensor_shape}"
        )
    pi, pj = layout.patch_shape
    origins = layout.origins
    # averaging deviations from one reference estimate keeps the round trip
    # bit-exact when all estimates of a pixel agree
    ref = np.empty(layout.image_shape)
    for k, (r, c) in enumerate(origins):
        ref[r:r + pi, c:c + pj] = tensor[:, :, k]
    acc = np.zeros(layout.image_shape)
    for k, (r, c) in enumerate(origins):
        acc[r:r + pi, c:c + pj] += tensor[:, :, k] - ref[r:r + pi, c:c + pj]
    return ref + acc / layout.coverage()
