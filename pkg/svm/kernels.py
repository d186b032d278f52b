import numpy as np

from core.exceptions import DimMismatchError


def rbf_kernel(x: np.ndarray, y: np.ndarray, gamma: float) -> float:
    """
    exp(-gamma * |x - y|^2), a value in (0, 1] that underflows to 0 for far points.

    :raises DimMismatchError: x and y differ in length.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimMismatchError(x.shape[-1], y.shape[-1])
    diff = x - y
    return float(np.exp(-gamma * np.dot(diff, diff)))


def rbf_kernel_matrix(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """
    Kernel values between every row of A and every row of B, shape (len(A), len(B)).
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise DimMismatchError(A.shape[1], B.shape[1])

    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * (A @ B.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)
