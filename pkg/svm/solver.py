"""
Sequential minimal optimization for the rbf-kernel SVM dual

    min_a  1/2 a'Qa - e'a   s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j K(x_i, x_j)

Each step picks the maximal violating index i and, among the indices that can pair
with it, the j with the largest second-order gain, then solves the two-variable
subproblem analytically. The gradient is kept up to date so every step costs two
kernel columns. Ties in the selection are broken by a seeded permutation of the
indices, which makes a run reproducible for a given seed.
"""

import logging
from dataclasses import dataclass

import numpy as np

from core.exceptions import DegenerateInputError, DimMismatchError, SingleClassInputError
from svm.diagnostics import kkt_audit
from svm.kernels import rbf_kernel_matrix
from svm.models import KERNEL_CACHE_LIMIT, BinarySvmModel, TrainParams

logger = logging.getLogger(__name__)

# Floor on the curvature of a two-variable subproblem
TAU = 1e-12


@dataclass
class DualSolution:
    """Full solver state at exit."""

    alpha: np.ndarray
    bias: float
    n_iter: int
    converged: bool
    gap: float


class _KernelColumns:
    """Dense kernel cache for small problems, column-on-demand above the cache limit."""

    def __init__(self, X: np.ndarray, gamma: float):
        self.X = X
        self.gamma = gamma
        self.matrix = None
        if X.shape[0] <= KERNEL_CACHE_LIMIT:
            self.matrix = rbf_kernel_matrix(X, X, gamma)
            np.fill_diagonal(self.matrix, 1.0)

    def column(self, i: int) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix[:, i]
        col = rbf_kernel_matrix(self.X, self.X[i : i + 1], self.gamma)[:, 0]
        col[i] = 1.0
        return col


def _validate(X: np.ndarray, y: np.ndarray) -> None:
    if X.ndim != 2:
        raise ValueError("X must be a 2-D array of embeddings")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} samples but {y.shape[0]} labels")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("binary labels must be -1 or +1")
    if X.shape[0] < 2 or np.unique(y).shape[0] < 2:
        raise SingleClassInputError("binary training needs samples of both classes")
    if np.all(X == X[0]):
        raise DegenerateInputError("all training points are identical")


def _bias(alpha: np.ndarray, y: np.ndarray, grad: np.ndarray, C: float) -> float:
    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if np.any(free):
        rho = float(yg[free].mean())
    else:
        at_upper = alpha >= C
        at_lower = alpha <= 0
        # rho is only bounded by the samples at the box, take the midpoint
        lb_mask = ((y > 0) & at_upper) | ((y < 0) & at_lower)
        ub_mask = ((y > 0) & at_lower) | ((y < 0) & at_upper)
        lb = float(yg[lb_mask].max()) if np.any(lb_mask) else -np.inf
        ub = float(yg[ub_mask].min()) if np.any(ub_mask) else np.inf
        if np.isinf(lb) or np.isinf(ub):
            rho = ub if np.isinf(lb) else lb
        else:
            rho = (lb + ub) / 2.0
    return -rho


def solve_dual(X: np.ndarray, y: np.ndarray, params: TrainParams) -> DualSolution:
    """
    Solves the SVM dual for one binary problem.

    :param X: (n, dim) training points.
    :param y: Labels in {-1, +1}.
    :param params: Hyperparameters and stopping rules.
    :return: DualSolution with the full alpha vector; converged is False when a cap stopped it.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _validate(X, y)

    n = X.shape[0]
    C = params.C
    kernel = _KernelColumns(X, params.gamma)
    order = np.random.default_rng(params.seed).permutation(n)

    alpha = np.zeros(n)
    grad = -np.ones(n)
    cap = params.iteration_cap(n)
    stalls = 0
    converged = False
    gap = np.inf
    n_iter = 0

    for n_iter in range(1, cap + 1):
        score = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))

        up_scores = np.where(up, score, -np.inf)
        i = order[np.argmax(up_scores[order])]
        m = up_scores[i]
        low_min = np.where(low, score, np.inf).min()
        gap = float(m - low_min)
        if gap <= params.kkt_tol:
            converged = True
            break

        k_i = kernel.column(i)
        b = m - score
        a = np.maximum(2.0 - 2.0 * k_i, TAU)
        gains = np.where(low & (score < m), b * b / a, -np.inf)
        j = order[np.argmax(gains[order])]
        k_j = kernel.column(j)

        limit_i = C - alpha[i] if y[i] > 0 else alpha[i]
        limit_j = alpha[j] if y[j] > 0 else C - alpha[j]
        step = min(b[j] / a[j], limit_i, limit_j)

        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        if step == limit_i:
            alpha[i] = C if y[i] > 0 else 0.0
        if step == limit_j:
            alpha[j] = 0.0 if y[j] > 0 else C

        grad += step * y * (k_i - k_j)

        if step <= 1e-15 * C:
            stalls += 1
            if stalls >= params.max_passes:
                logger.warning("SMO stalled after %d steps (gap %.3g).", n_iter, gap)
                break
        else:
            stalls = 0

    if not converged and np.isfinite(gap) and stalls < params.max_passes:
        logger.warning(
            "SMO hit the iteration cap of %d with KKT gap %.3g > %.3g.", cap, gap, params.kkt_tol
        )

    return DualSolution(
        alpha=alpha,
        bias=_bias(alpha, y, grad, C),
        n_iter=n_iter,
        converged=converged,
        gap=gap,
    )


def train_binary_smo(X: np.ndarray, y: np.ndarray, params: TrainParams) -> BinarySvmModel:
    """
    Trains a binary rbf SVM.

    :param X: (n, dim) embeddings.
    :param y: Labels in {-1, +1}, both present.
    :param params: Hyperparameters.
    :return: Model holding the support vectors and their signed dual coefficients.
    :raises SingleClassInputError: Only one label present.
    :raises DegenerateInputError: All points identical.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    solution = solve_dual(X, y, params)

    support = solution.alpha > 0
    model = BinarySvmModel(
        support_vectors=X[support],
        dual_coefs=solution.alpha[support] * y[support],
        bias=solution.bias,
        gamma=params.gamma,
    )
    logger.debug(
        "Trained binary SVM on %d samples: %d support vectors, %d steps, converged=%s.",
        X.shape[0],
        model.n_support,
        solution.n_iter,
        solution.converged,
    )
    violations = kkt_audit(solution.alpha, y, decision_values(model, X), params.C, params.kkt_tol)
    if violations:
        logger.warning(
            "%d training points violate the KKT conditions at tol %g.",
            len(violations),
            params.kkt_tol,
        )
    return model


def decision_values(model: BinarySvmModel, X: np.ndarray) -> np.ndarray:
    """Decision function for every row of X."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.dim:
        raise DimMismatchError(model.dim, X.shape[1])
    return rbf_kernel_matrix(X, model.support_vectors, model.gamma) @ model.dual_coefs + model.bias


def decision_function(model: BinarySvmModel, x: np.ndarray) -> float:
    """
    sum_j dual_coefs[j] * K(sv_j, x) + bias.

    :raises DimMismatchError: x does not match the model dimension.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.dim:
        raise DimMismatchError(model.dim, x.shape[-1])
    return float(decision_values(model, x[None, :])[0])
