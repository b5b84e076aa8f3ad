import numpy as np


def check_image(image):
    """Return `image` as a finite 2-D float array.

    Multi-channel input is rejected instead of being converted.
    """
    arr = np.asarray(image)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim != 2:
        raise ValueError(f"expected a single-channel 2-D image, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("image is empty")
    arr = arr.astype(float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains NaN or Inf")
    return arr
