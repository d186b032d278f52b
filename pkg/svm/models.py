import math
from collections.abc import Hashable
from dataclasses import asdict, dataclass

import numpy as np

from core.exceptions import ConfigError

KERNEL_CACHE_LIMIT = 4096


@dataclass(frozen=True)
class TrainParams:
    """
    Hyperparameters of the rbf-kernel SVM and its SMO solver.

    Attributes:
        C (float): Box constraint on the dual variables.
        gamma (float): rbf width, K(x, y) = exp(-gamma * |x - y|^2).
        kkt_tol (float): Stop once the maximal KKT violation is at most this value.
        max_passes (int): Stop after this many consecutive steps without progress.
        max_iter (int | None): Hard cap on solver steps, None for max(10000, ceil(n^2 / 10)).
        seed (int): Seeds the index order used to break selection ties.
    """

    C: float = 1000.0
    gamma: float = 0.1
    kkt_tol: float = 1e-3
    max_passes: int = 10
    max_iter: int | None = None
    seed: int = 42

    def __post_init__(self):
        if self.C <= 0:
            raise ConfigError(f"C must be positive, got {self.C}")
        if self.gamma <= 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if self.kkt_tol <= 0:
            raise ConfigError(f"kkt_tol must be positive, got {self.kkt_tol}")
        if self.max_passes <= 0:
            raise ConfigError(f"max_passes must be positive, got {self.max_passes}")
        if self.max_iter is not None and self.max_iter <= 0:
            raise ConfigError(f"max_iter must be positive, got {self.max_iter}")

    def iteration_cap(self, n_samples: int) -> int:
        if self.max_iter is not None:
            return self.max_iter
        return max(10000, math.ceil(10 * n_samples * n_samples / 100))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class BinarySvmModel:
    """
    Trained two-class rbf SVM, f(x) = sum_j dual_coefs[j] * K(sv_j, x) + bias.

    Attributes:
        support_vectors (np.ndarray): (n_sv, dim) training points with non-zero alpha.
        dual_coefs (np.ndarray): alpha_j * y_j for each support vector.
        bias (float): Intercept.
        gamma (float): rbf width used in training.
    """

    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    gamma: float

    def __post_init__(self):
        svs = np.atleast_2d(np.asarray(self.support_vectors, dtype=np.float64))
        coefs = np.asarray(self.dual_coefs, dtype=np.float64).reshape(-1)
        if svs.shape[0] != coefs.shape[0]:
            raise ValueError(
                f"{svs.shape[0]} support vectors but {coefs.shape[0]} dual coefficients"
            )
        object.__setattr__(self, "support_vectors", svs)
        object.__setattr__(self, "dual_coefs", coefs)
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def dim(self) -> int:
        return int(self.support_vectors.shape[1])

    @property
    def n_support(self) -> int:
        return int(self.support_vectors.shape[0])

    def __repr__(self) -> str:
        return (
            f"BinarySvmModel(n_support={self.n_support}, dim={self.dim}, "
            f"bias={self.bias:.6g}, gamma={self.gamma:g})"
        )


@dataclass(frozen=True, eq=False)
class MulticlassSvmModel:
    """
    One-vs-one ensemble. `pairwise_models[(i, j)]` with i < j separates
    classes[i] (positive side) from classes[j] (negative side).
    """

    classes: tuple[Hashable, ...]
    pairwise_models: dict[tuple[int, int], BinarySvmModel]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def dim(self) -> int:
        return next(iter(self.pairwise_models.values())).dim

    @property
    def n_support(self) -> int:
        return sum(m.n_support for m in self.pairwise_models.values())

    def pair_labels(self, pair: tuple[int, int]) -> tuple[Hashable, Hashable]:
        return self.classes[pair[0]], self.classes[pair[1]]
