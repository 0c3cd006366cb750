"""Out-of-sample extension of empirical eigenfunctions and embeddings.

A new point x gets the kernel-smoothed estimate

    psi_hat_j(x) = (1/lambda_j) * sum_i A(x, x_i) psi_j(x_i),

where A(x, .) is the same epsilon-bandwidth Gaussian kernel row used in
training, renormalized over the training points.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .dataset import DataSet, frozen_array
from .errors import NumericalError, ValidationError
from .markov import TransitionMatrix
from .spectral import SpectralDecomposition, _check_time

EIGENVALUE_FLOOR = 1e-12


@dataclass(frozen=True)
class ExtensionModel:
    """Everything needed to evaluate eigenfunctions at new points."""

    points: np.ndarray
    decomposition: SpectralDecomposition
    epsilon: float
    diss_kind: str

    def __post_init__(self):
        if self.diss_kind not in ("sqeuclidean", "euclidean"):
            raise ValidationError(
                "out-of-sample extension needs a computable dissimilarity; "
                f"kind {self.diss_kind!r} has no values for unseen points"
            )
        object.__setattr__(self, "points", frozen_array(self.points))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def build_extension(data: DataSet, transition: TransitionMatrix,
                    decomposition: SpectralDecomposition) -> ExtensionModel:
    """Bundle training data with its decomposition, keeping kernel provenance."""
    if transition.n != data.n or decomposition.n != data.n:
        raise ValidationError("dataset, transition, and decomposition sizes disagree")
    return ExtensionModel(
        points=data.points,
        decomposition=decomposition,
        epsilon=transition.epsilon,
        diss_kind=transition.diss_kind,
    )


def kernel_weights(model: ExtensionModel, new_points: np.ndarray) -> np.ndarray:
    """Convex kernel weights A(x, .) over training points, one row per query."""
    q = np.asarray(new_points, dtype=np.float64)
    if q.ndim != 2 or q.shape[1] != model.d:
        raise ValidationError(
            f"query points must be m x {model.d}, got shape {q.shape}"
        )
    if not np.isfinite(q).all():
        raise ValidationError("query points contain non-finite entries")
    if q.shape[0] == 0:
        return np.empty((0, model.n))
    dists = kernels.cross_sq_dists(np.ascontiguousarray(q), model.points)
    if model.diss_kind == "euclidean":
        dists = np.sqrt(dists)
    weights = np.exp(-dists / model.epsilon)
    sums = weights.sum(axis=1)
    if not (sums > 0).all():
        k = int(np.argmin(sums > 0))
        raise NumericalError(
            f"kernel row for query point {k} underflowed to zero; "
            "the point is too far from the training data at this epsilon"
        )
    return weights / sums[:, None]


def _check_eigen_floor(model: ExtensionModel, indices) -> None:
    lams = model.decomposition.eigenvalues
    for j in indices:
        if abs(lams[j - 1]) < EIGENVALUE_FLOOR:
            raise NumericalError(
                f"eigenvalue {j} has magnitude {abs(lams[j - 1]):.3e} below the "
                f"{EIGENVALUE_FLOOR} floor; its extension is undefined"
            )


def extend_eigenfunction(model: ExtensionModel, x: np.ndarray, j: int) -> float:
    """Kernel-smoothed estimate of eigenfunction j (1-based, nontrivial) at x."""
    if not isinstance(j, (int, np.integer)) or not 1 <= j <= model.n - 1:
        raise ValidationError(f"eigenfunction index must lie in [1, {model.n - 1}], got {j!r}")
    _check_eigen_floor(model, [int(j)])
    weights = kernel_weights(model, np.asarray(x, dtype=np.float64).reshape(1, -1))
    psi = model.decomposition.eigenvectors[:, j - 1]
    return float((weights[0] @ psi) / model.decomposition.eigenvalues[j - 1])


def extend_embedding(model: ExtensionModel, new_points: np.ndarray,
                     t: int, r: int) -> np.ndarray:
    """Diffusion coordinates for m new points: row k is (lambda_j^t psi_hat_j(x_k))_j."""
    t = _check_time(t)
    if not isinstance(r, (int, np.integer)) or not 1 <= r <= model.n - 1:
        raise ValidationError(f"embedding dimension r must lie in [1, {model.n - 1}], got {r!r}")
    r = int(r)
    _check_eigen_floor(model, range(1, r + 1))
    weights = kernel_weights(model, new_points)
    psi = model.decomposition.eigenvectors[:, :r]
    lams = model.decomposition.eigenvalues[:r]
    # (1/lambda) * weights @ psi scaled by lambda^t, folded into lambda^(t-1)
    return (weights @ psi) * (lams ** (t - 1))[None, :]
