"""Adaptive regression on the diffusion eigenbasis.

The response is fit by least squares on an intercept plus the leading
diffusion coordinates; the truncation p is chosen by K-fold
cross-validated prediction risk over p = 1..r, and out-of-sample
prediction evaluates the same t-scaled basis through the Nystrom
extension.
"""

from dataclasses import dataclass

import numpy as np

from .dataset import DataSet, frozen_array
from .errors import NumericalError, ValidationError
from .nystrom import ExtensionModel, extend_embedding
from .spectral import DiffusionEmbedding


@dataclass(frozen=True)
class EigenbasisRegression:
    intercept: float
    coefficients: np.ndarray
    p: int
    t: int
    cv_risk_curve: np.ndarray      # risk estimate for each candidate p = 1..r
    extension: ExtensionModel
    folds: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "coefficients", frozen_array(self.coefficients))
        object.__setattr__(self, "cv_risk_curve", frozen_array(self.cv_risk_curve))


def kfold_indices(n: int, folds: int, seed: int):
    """Deterministic shuffled K-fold split; a pure function of (n, folds, seed)."""
    if not 2 <= folds <= n:
        raise ValidationError(f"folds must lie in [2, {n}], got {folds}")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(chunk) for chunk in np.array_split(perm, folds)]


def _design(basis: np.ndarray, p: int) -> np.ndarray:
    return np.column_stack([np.ones(basis.shape[0]), basis[:, :p]])


def basis_risk_curve(basis: np.ndarray, y: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """K-fold CV squared-error risk for each truncation p = 1..r.

    Folds reuse the full-sample basis and refit coefficients only;
    under-determined fold designs at large p fall back to the
    minimum-norm least-squares solution.
    """
    n, r = basis.shape
    fold_sets = kfold_indices(n, folds, seed)
    risks = np.empty(r)
    for p in range(1, r + 1):
        design = _design(basis, p)
        total_sq = 0.0
        for held_out in fold_sets:
            train = np.ones(n, dtype=bool)
            train[held_out] = False
            beta = np.linalg.lstsq(design[train], y[train], rcond=None)[0]
            pred = design[held_out] @ beta
            total_sq += float(np.sum((pred - y[held_out]) ** 2))
        risks[p - 1] = total_sq / n
    return risks


def _refit(basis: np.ndarray, y: np.ndarray, p: int):
    design = _design(basis, p)
    beta, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < p + 1:
        raise NumericalError(
            f"design matrix is rank-deficient at p={p} (rank {rank} < {p + 1}); "
            "duplicate points or numerically repeated eigenvectors"
        )
    return float(beta[0]), beta[1:]


def fit(data: DataSet, emb: DiffusionEmbedding, ext: ExtensionModel,
        folds: int = 10, seed: int = 0) -> EigenbasisRegression:
    """Select p by CV risk and refit on all data at the winning truncation."""
    if data.response is None:
        raise ValidationError("dataset has no response to regress on")
    if not np.array_equal(ext.points, data.points):
        raise ValidationError("extension model was built on different points")
    expected = ext.decomposition.eigenvectors[:, :emb.r] * \
        (ext.decomposition.eigenvalues[:emb.r] ** emb.t)[None, :]
    if not np.array_equal(expected, emb.coords):
        raise ValidationError("embedding and extension derive from different decompositions")
    y = data.response
    risks = basis_risk_curve(emb.coords, y, folds, seed)
    p = int(np.argmin(risks)) + 1  # first minimum, so ties pick the smallest p
    intercept, coefficients = _refit(emb.coords, y, p)
    return EigenbasisRegression(
        intercept=intercept,
        coefficients=coefficients,
        p=p,
        t=emb.t,
        cv_risk_curve=risks,
        extension=ext,
        folds=folds,
        seed=seed,
    )


def predict(model: EigenbasisRegression, new_points: np.ndarray) -> np.ndarray:
    """Evaluate the fitted expansion at new points via the Nystrom extension."""
    new_points = np.asarray(new_points, dtype=np.float64)
    if new_points.ndim != 2:
        raise ValidationError("new points must be an m x d matrix")
    if new_points.shape[0] == 0:
        return np.empty(0)
    coords = extend_embedding(model.extension, new_points, model.t, model.p)
    return model.intercept + coords @ model.coefficients


def risk_curve(model: EigenbasisRegression):
    """CV risk estimates as (p, risk) pairs; the minimum sits at model.p."""
    return tuple((p + 1, float(r)) for p, r in enumerate(model.cv_risk_curve))


def fitted_values(model: EigenbasisRegression, emb: DiffusionEmbedding) -> np.ndarray:
    """In-sample fitted values on the training embedding."""
    return model.intercept + emb.coords[:, :model.p] @ model.coefficients


def pca_scores(points: np.ndarray, r=None) -> np.ndarray:
    """Centered principal-component scores, the linear baseline basis."""
    pts = np.asarray(points, dtype=np.float64)
    centered = pts - pts.mean(axis=0)
    u, s, _ = np.linalg.svd(centered, full_matrices=False)
    scores = u * s
    return scores if r is None else scores[:, :r]
