import numpy as np

# alpha within this fraction of C counts as sitting on the box
BOUND_EPS = 1e-9


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """Dual objective sum(a) - 1/2 (a*y)' K (a*y), the quantity SMO maximizes."""
    ay = np.asarray(alpha) * np.asarray(y)
    return float(np.sum(alpha) - 0.5 * ay @ K @ ay)


def kkt_audit(
    alpha: np.ndarray, y: np.ndarray, decision: np.ndarray, C: float, tol: float
) -> list[int]:
    """
    Indices whose multiplier violates the KKT conditions of the soft-margin dual:

    - alpha = 0      requires y f(x) >= 1 - tol
    - 0 < alpha < C  requires |y f(x) - 1| <= tol
    - alpha = C      requires y f(x) <= 1 + tol
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    margin = np.asarray(y, dtype=np.float64) * np.asarray(decision, dtype=np.float64)
    eps = BOUND_EPS * C

    at_zero = alpha <= eps
    at_c = alpha >= C - eps
    free = ~(at_zero | at_c)

    bad = (at_zero & (margin < 1 - tol)) | (free & (np.abs(margin - 1) > tol)) | (at_c & (margin > 1 + tol))
    return [int(i) for i in np.flatnonzero(bad)]


def dual_feasibility_error(alpha: np.ndarray, y: np.ndarray) -> float:
    """|sum alpha_i y_i|, zero for a feasible point."""
    return float(abs(np.dot(alpha, y)))
