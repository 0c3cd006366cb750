"""Row-stochastic Markov kernel over observed data and its stationary law."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import frozen_array
from .errors import NumericalError, ValidationError


@dataclass(frozen=True)
class TransitionMatrix:
    """One-step transition matrix A with its bandwidth provenance.

    ``kernel_row_sums`` holds the row sums of the unnormalized Gaussian
    kernel exp(-D/epsilon); since that kernel is symmetric they determine
    the stationary distribution in closed form and drive the symmetric
    eigendecomposition route.
    """

    matrix: np.ndarray
    epsilon: float
    diss_kind: str
    kernel_row_sums: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", frozen_array(self.matrix))
        object.__setattr__(self, "kernel_row_sums", frozen_array(self.kernel_row_sums))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class StationaryDistribution:
    """Length-n probability vector phi0 with phi0^T A = phi0^T."""

    probabilities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probabilities", frozen_array(self.probabilities))


def _validate_dissimilarity_matrix(dmat: np.ndarray) -> np.ndarray:
    dmat = np.asarray(dmat, dtype=np.float64)
    if dmat.ndim != 2 or dmat.shape[0] != dmat.shape[1]:
        raise ValidationError("dissimilarity matrix must be square")
    if dmat.shape[0] < 2:
        raise ValidationError("need at least 2 observations")
    if not np.isfinite(dmat).all():
        raise ValidationError("dissimilarity matrix has non-finite entries")
    if (np.diag(dmat) != 0).any():
        raise ValidationError("dissimilarity matrix diagonal must be zero")
    if (dmat < 0).any():
        raise ValidationError("dissimilarity matrix has negative entries")
    if not np.array_equal(dmat, dmat.T):
        raise ValidationError("dissimilarity matrix must be symmetric")
    return dmat


def build_transition(dmat: np.ndarray, epsilon: float, diss_kind: str = "sqeuclidean",
                     cutoff: Optional[float] = None) -> TransitionMatrix:
    """Gaussian-kernel transition matrix: A_ij = exp(-D_ij/eps) / row sum.

    ``cutoff``, when given, zeroes kernel entries below exp(-cutoff)
    (sparsification; off by default).  On the dense path any entry that
    underflows to zero breaks the strictly-positive-chain invariant and
    raises NumericalError naming the offending row.
    """
    dmat = _validate_dissimilarity_matrix(dmat)
    if not epsilon > 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    weights = np.exp(-dmat / epsilon)
    if cutoff is not None:
        if not cutoff > 0:
            raise ValidationError("cutoff must be positive")
        weights[weights < np.exp(-cutoff)] = 0.0
    elif not weights.all():
        i, j = np.argwhere(weights == 0.0)[0]
        raise NumericalError(
            f"kernel entry underflowed to zero at row {i} (pair {i},{j}); "
            f"epsilon={epsilon!r} is far too small for this dissimilarity scale"
        )
    row_sums = weights.sum(axis=1)
    if not (row_sums > 0).all():
        i = int(np.argmin(row_sums > 0))
        raise NumericalError(
            f"kernel row {i} underflowed to zero; epsilon={epsilon!r} is far too small"
        )
    return TransitionMatrix(
        matrix=weights / row_sums[:, None],
        epsilon=float(epsilon),
        diss_kind=diss_kind,
        kernel_row_sums=row_sums,
    )


def default_epsilon(dmat: np.ndarray) -> float:
    """Median of the strictly-upper-triangle dissimilarities (scale heuristic)."""
    dmat = np.asarray(dmat, dtype=np.float64)
    n = dmat.shape[0]
    if n < 2:
        raise ValidationError("need at least 2 observations")
    upper = dmat[np.triu_indices(n, k=1)]
    med = float(np.median(upper))
    if not med > 0:
        raise ValidationError(
            "off-diagonal dissimilarities are degenerate (median is zero); "
            "are all points identical?"
        )
    return med


def stationary_distribution(transition: TransitionMatrix, method: str = "closed-form",
                            max_iter: int = 10000, tol: float = 1e-13) -> StationaryDistribution:
    """Dominant left eigenvector of A, normalized to a probability vector.

    The closed form exploits detailed balance of the symmetric Gaussian
    kernel: phi0 is proportional to the kernel row sums.  ``method="power"``
    runs left power iteration instead and is kept as a cross-check path.
    """
    if method == "closed-form":
        s = transition.kernel_row_sums
        return StationaryDistribution(probabilities=s / s.sum())
    if method != "power":
        raise ValidationError(f"unknown method {method!r}")
    a = transition.matrix
    v = np.full(transition.n, 1.0 / transition.n)
    for _ in range(max_iter):
        nxt = v @ a
        nxt = nxt / nxt.sum()
        if np.max(np.abs(nxt - v)) <= tol:
            return StationaryDistribution(probabilities=nxt)
        v = nxt
    raise NumericalError(
        f"power iteration did not converge within {max_iter} iterations"
    )
