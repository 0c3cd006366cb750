"""Observed-data containers, tabular ingest, and pairwise dissimilarities."""

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import kernels
from .errors import ValidationError

DISS_KINDS = ("sqeuclidean", "euclidean", "table")


def frozen_array(values, dtype=np.float64) -> np.ndarray:
    """Copy ``values`` into a read-only C-contiguous array."""
    out = np.ascontiguousarray(np.array(values, dtype=dtype))
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DataSet:
    """n observed objects as d-dimensional vectors, with optional responses.

    Invariants enforced at construction: n >= 2, d >= 1, all entries
    finite, ids unique, response (if given) of length n and finite.
    """

    points: np.ndarray
    ids: tuple
    response: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise ValidationError("points must be a 2-D matrix")
        n, d = pts.shape
        if n < 2:
            raise ValidationError(f"need at least 2 observations, got {n}")
        if d < 1:
            raise ValidationError("need at least 1 feature column")
        if not np.isfinite(pts).all():
            raise ValidationError("points contain non-finite entries")
        ids = tuple(str(i) for i in self.ids)
        if len(ids) != n:
            raise ValidationError(f"expected {n} ids, got {len(ids)}")
        if len(set(ids)) != n:
            raise ValidationError("duplicate row identifiers")
        object.__setattr__(self, "points", frozen_array(pts))
        object.__setattr__(self, "ids", ids)
        if self.response is not None:
            resp = np.asarray(self.response, dtype=np.float64)
            if resp.shape != (n,):
                raise ValidationError(
                    f"response must have length {n}, got shape {resp.shape}"
                )
            if not np.isfinite(resp).all():
                raise ValidationError("response contains non-finite entries")
            object.__setattr__(self, "response", frozen_array(resp))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class Dissimilarity:
    """Pairwise dissimilarity choice: a built-in kind or a user-supplied table."""

    kind: str = "sqeuclidean"
    table: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in DISS_KINDS:
            raise ValidationError(
                f"unknown dissimilarity kind {self.kind!r}; expected one of {DISS_KINDS}"
            )
        if self.kind == "table":
            if self.table is None:
                raise ValidationError("table kind requires a table matrix")
            tab = np.asarray(self.table, dtype=np.float64)
            if tab.ndim != 2 or tab.shape[0] != tab.shape[1]:
                raise ValidationError("dissimilarity table must be square")
            if not np.isfinite(tab).all():
                raise ValidationError("dissimilarity table has non-finite entries")
            if (tab < 0).any():
                raise ValidationError("dissimilarity table has negative entries")
            if (np.diag(tab) != 0).any():
                raise ValidationError("dissimilarity table diagonal must be zero")
            if not np.array_equal(tab, tab.T):
                raise ValidationError("dissimilarity table must be symmetric")
            object.__setattr__(self, "table", frozen_array(tab))
        elif self.table is not None:
            raise ValidationError(f"kind {self.kind!r} does not take a table")


def pairwise_dissimilarity(data: DataSet, diss: Dissimilarity) -> np.ndarray:
    """Symmetric nonnegative dissimilarity matrix with a zero diagonal.

    Squared-euclidean entry (i, j) is sum_k (x_ik - x_jk)^2 with a fixed
    per-entry summation order; the euclidean kind is its entrywise square
    root.  A user table is validated against n and returned as-is.
    """
    if diss.kind == "table":
        if diss.table.shape != (data.n, data.n):
            raise ValidationError(
                f"table shape {diss.table.shape} does not match n={data.n}"
            )
        return np.array(diss.table)
    sq = kernels.pairwise_sq_dists(data.points)
    if diss.kind == "euclidean":
        return np.sqrt(sq)
    return sq


def _detect_delimiter(header_line: str) -> str:
    return "\t" if "\t" in header_line else ","


def read_table(source, response_column: Optional[str] = None,
               id_column: Optional[str] = None,
               delimiter: Optional[str] = None):
    """Parse a delimited numeric table into (points, ids, response).

    Feature columns are every column not named as id or response.  Rows
    with a non-numeric or non-finite feature cell are rejected with the
    offending 1-based data-row index.  Ids default to 0-based row indices.
    Row count is not constrained here; query tables may have any m >= 0.
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ValidationError("empty input: header row required")
    if delimiter is None:
        delimiter = _detect_delimiter(lines[0])
    rows = list(csv.reader(io.StringIO(text), delimiter=delimiter))
    header = [name.strip() for name in rows[0]]
    if len(set(header)) != len(header):
        raise ValidationError("duplicate column names in header")

    def _col(name, what):
        if name is None:
            return None
        if name not in header:
            raise ValidationError(f"{what} column {name!r} not found in header")
        return header.index(name)

    resp_idx = _col(response_column, "response")
    id_idx = _col(id_column, "id")
    feature_idx = [k for k in range(len(header))
                   if k != resp_idx and k != id_idx]
    if not feature_idx:
        raise ValidationError("no feature columns remain after id/response")

    points, ids, resp = [], [], []
    for ridx, row in enumerate(r for r in rows[1:] if r):
        if len(row) != len(header):
            raise ValidationError(
                f"malformed row {ridx + 1}: expected {len(header)} cells, got {len(row)}"
            )
        feats = []
        for k in feature_idx:
            try:
                value = float(row[k])
            except ValueError:
                value = np.nan
            if not np.isfinite(value):
                raise ValidationError(
                    f"malformed row {ridx + 1}: non-numeric cell {row[k]!r} "
                    f"in column {header[k]!r}"
                )
            feats.append(value)
        points.append(feats)
        ids.append(row[id_idx] if id_idx is not None else str(ridx))
        if resp_idx is not None:
            try:
                y = float(row[resp_idx])
            except ValueError:
                y = np.nan
            if not np.isfinite(y):
                raise ValidationError(
                    f"malformed row {ridx + 1}: non-numeric response {row[resp_idx]!r}"
                )
            resp.append(y)

    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate row identifiers in id column")
    d = len(feature_idx)
    return (
        np.array(points, dtype=np.float64).reshape(len(points), d),
        tuple(ids),
        np.array(resp) if resp_idx is not None else None,
    )


def load_dataset(source, response_column: Optional[str] = None,
                 id_column: Optional[str] = None,
                 delimiter: Optional[str] = None) -> DataSet:
    """Parse a delimited text table into a validated DataSet (n >= 2)."""
    points, ids, response = read_table(source, response_column=response_column,
                                       id_column=id_column, delimiter=delimiter)
    return DataSet(points=points, ids=ids, response=response)
