"""Dense three-way tensor algebra.

Tensors are plain ``numpy`` arrays of shape ``(I, J, P)``. Modes are numbered
1, 2, 3 to match the usual tensor-algebra notation. The mode-n unfolding puts
the mode-n fibers in the columns, with the lower-numbered remaining index
varying fastest.
"""
import numpy as np

L0_TOL = 1e-12


class NumericalError(RuntimeError):
    """Raised when an SVD fails to converge."""


def _check_mode(mode):
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2 or 3, got {mode!r}")


def unfold(tensor, mode):
    """Mode-`mode` matricization of a three-way tensor.

    Parameters
    ----------
    tensor : ndarray of shape (I, J, P)
    mode : {1, 2, 3}

    Returns
    -------
    ndarray of shape (dims[mode - 1], prod(other dims))
    """
    _check_mode(mode)
    tensor = np.asarray(tensor)
    if tensor.ndim != 3:
        raise ValueError(f"expected a 3-way tensor, got ndim={tensor.ndim}")
    ax = mode - 1
    return np.reshape(np.moveaxis(tensor, ax, 0), (tensor.shape[ax], -1), order="F")


def fold(matrix, mode, dims):
    """Inverse of :func:`unfold`."""
    _check_mode(mode)
    matrix = np.asarray(matrix)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise ValueError(f"dims must have three entries, got {dims}")
    ax = mode - 1
    rest = [d for i, d in enumerate(dims) if i != ax]
    if matrix.shape != (dims[ax], rest[0] * rest[1]):
        raise ValueError(
            f"cannot fold matrix of shape {matrix.shape} along mode {mode} into {dims}"
        )
    moved = np.reshape(matrix, (dims[ax], rest[0], rest[1]), order="F")
    return np.moveaxis(moved, 0, ax)


def soft_shrink(x, thresh):
    """Entrywise soft shrinkage ``sign(x) * max(|x| - thresh, 0)``.

    `thresh` may be a scalar or an array broadcastable to `x`. Infinite
    entries are allowed and map the corresponding output to exactly zero.
    """
    x = np.asarray(x, dtype=float)
    thresh = np.asarray(thresh, dtype=float)
    if np.any(np.isnan(thresh)) or np.any(thresh < 0):
        raise ValueError("shrinkage threshold must be non-negative")
    return np.sign(x) * np.maximum(np.abs(x) - thresh, 0.0)


def svt(matrix, mu, method="svd"):
    """Singular value thresholding ``U diag(max(s - mu, 0)) V^T``.

    Parameters
    ----------
    matrix : array_like, 2-D
    mu : float
        Non-negative threshold.
    method : {"svd", "gram"}
        ``"svd"`` uses a thin SVD. ``"gram"`` eigendecomposes the smaller
        Gram matrix and applies ``U diag(max(s - mu, 0) / s) U^T A``; it is
        several times faster on wide matrices but only accurate to about
        ``eps * s_max**2 / s`` for small singular values.
    """
    if mu < 0:
        raise ValueError(f"mu must be non-negative, got {mu}")
    matrix = np.asarray(matrix, dtype=float)
    if method == "gram":
        return _svt_gram(matrix, mu)
    if method != "svd":
        raise ValueError(f"unknown method {method!r}")
    try:
        u, s, vt = np.linalg.svd(matrix, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    s = s - mu
    keep = int(np.count_nonzero(s > 0))
    if keep == 0:
        return np.zeros_like(matrix)
    return (u[:, :keep] * s[:keep]) @ vt[:keep]


def _svt_gram(matrix, mu):
    wide = matrix.shape[0] <= matrix.shape[1]
    a = matrix if wide else matrix.T
    try:
        lam, u = np.linalg.eigh(a @ a.T)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition did not converge: {exc}") from exc
    s = np.sqrt(np.maximum(lam, 0.0))
    keep = s > mu
    if not np.any(keep):
        return np.zeros_like(matrix)
    u = u[:, keep]
    scale = (s[keep] - mu) / s[keep]
    out = (u * scale) @ (u.T @ a)
    return out if wide else out.T


def tensor_svt(tensor, mode, mu, method="svd"):
    """Apply :func:`svt` to the mode-`mode` unfolding and fold back."""
    tensor = np.asarray(tensor, dtype=float)
    return fold(svt(unfold(tensor, mode), mu, method), mode, tensor.shape)


def fro(tensor):
    return float(np.sqrt(np.sum(np.square(tensor))))


def l1(tensor):
    return float(np.sum(np.abs(tensor)))


def l0(tensor, tol=L0_TOL):
    """Number of entries with magnitude above `tol`."""
    return int(np.count_nonzero(np.abs(tensor) > tol))


def hadamard(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a * b
