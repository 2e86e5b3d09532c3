"""Core data containers: observation matrices, covariance models, CSV ingestion.

Observations are held as an ``n x d`` matrix whose row order is the identity of
the points.  Vectorization is fixed to column stacking: the flat index of
observation ``i`` (0-based), feature ``k`` is ``i + k*n``.  Every Kronecker
identity used elsewhere in the package depends on this order.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .errors import IngestionError

PSD_EIGENVALUE_FLOOR = 1e-8  # relative floor for the explicit-matrix PSD check


@dataclass(frozen=True)
class DataMatrix:
    """An ``n x d`` matrix of finite observation values (d=1 is the univariate case)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-d matrix, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("observation matrix contains non-finite entries")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def vec(self) -> np.ndarray:
        """Column-stacked flat view: entry (i, k) lands at index i + k*n."""
        return self.values.ravel(order="F")

    @staticmethod
    def from_vec(v: np.ndarray, n: int, d: int) -> "DataMatrix":
        v = np.asarray(v, dtype=float)
        if v.size != n * d:
            raise ValueError(f"vector of length {v.size} does not reshape to {n}x{d}")
        return DataMatrix(v.reshape((n, d), order="F"))


def _checked_psd(matrix: np.ndarray | None, m: int, kind: str) -> np.ndarray:
    """Validate an m x m symmetric PSD matrix, returning its symmetrized copy."""
    if matrix is None:
        raise ValueError(f"{kind} covariance needs a matrix")
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (m, m):
        raise ValueError(f"{kind} covariance must be {m}x{m}, got {matrix.shape}")
    scale = np.abs(matrix).max() if matrix.size else 0.0
    if scale > 0 and np.abs(matrix - matrix.T).max() > 1e-8 * scale:
        raise ValueError(f"{kind} covariance is not symmetric")
    sym = 0.5 * (matrix + matrix.T)
    eigs = np.linalg.eigvalsh(sym)
    if eigs[0] < -PSD_EIGENVALUE_FLOOR * max(eigs[-1], 0.0):
        raise ValueError(
            f"{kind} covariance is not positive semidefinite "
            f"(smallest eigenvalue {eigs[0]:.3e})"
        )
    return sym


@dataclass(frozen=True)
class DbscanParams:
    """Neighborhood radius and the minimum neighbor count (self included)."""

    eps: float
    min_pts: int

    def __post_init__(self):
        if not (self.eps > 0):
            raise ValueError(f"eps must be positive, got {self.eps}")
        if int(self.min_pts) != self.min_pts or self.min_pts < 1:
            raise ValueError(f"min_pts must be a positive integer, got {self.min_pts}")
        object.__setattr__(self, "min_pts", int(self.min_pts))


class CovarianceModel:
    """Known covariance of the vectorized data.

    Three kinds are supported:

    * ``scalar`` -- sigma^2 * identity on R^(n*d).
    * ``ar1``    -- rows i.i.d. with feature covariance Xi[k, l] = rho^|k-l|,
      i.e. the vec-space covariance Xi (x) I_n.
    * ``feature`` -- rows i.i.d. with an arbitrary d x d feature covariance.
    * ``explicit`` -- an arbitrary symmetric PSD matrix of size (n*d, n*d).

    ``quad_form`` and ``product`` never materialize the full matrix for the
    scalar and ar1 kinds.
    """

    def __init__(self, kind: str, n: int, d: int, *, sigma2: float | None = None,
                 rho: float | None = None, matrix: np.ndarray | None = None):
        if n < 1 or d < 1:
            raise ValueError("n and d must be at least 1")
        self.kind = kind
        self.n = int(n)
        self.d = int(d)
        self.sigma2 = None
        self.rho = None
        self._matrix = None
        self._feature_cov = None
        if kind == "scalar":
            if sigma2 is None or not (sigma2 > 0):
                raise ValueError(f"scalar covariance needs sigma2 > 0, got {sigma2}")
            self.sigma2 = float(sigma2)
        elif kind == "ar1":
            if rho is None or not (-1.0 < rho < 1.0):
                raise ValueError(f"ar1 covariance needs rho in (-1, 1), got {rho}")
            self.rho = float(rho)
            k = np.arange(d)
            self._feature_cov = self.rho ** np.abs(k[:, None] - k[None, :])
        elif kind == "feature":
            m = self.d
            self._feature_cov = _checked_psd(matrix, m, kind)
        elif kind == "explicit":
            m = self.n * self.d
            self._matrix = _checked_psd(matrix, m, kind)
        else:
            raise ValueError(f"unknown covariance kind {kind!r}")

    @property
    def size(self) -> int:
        return self.n * self.d

    def quad_form(self, eta: np.ndarray) -> float:
        """eta^T Sigma eta."""
        return float(np.dot(eta, self.product(eta)))

    def product(self, eta: np.ndarray) -> np.ndarray:
        """Sigma eta."""
        eta = np.asarray(eta, dtype=float)
        if eta.shape != (self.size,):
            raise ValueError(f"direction must have length {self.size}, got {eta.shape}")
        if self.kind == "scalar":
            return self.sigma2 * eta
        if self._feature_cov is not None:
            h = eta.reshape((self.n, self.d), order="F")
            return (h @ self._feature_cov).ravel(order="F")
        return self._matrix @ eta

    def feature_cov(self) -> np.ndarray | None:
        """The d x d per-row covariance (ar1 and feature kinds)."""
        return None if self._feature_cov is None else self._feature_cov.copy()

    def materialize(self) -> np.ndarray:
        """The full (n*d) x (n*d) matrix; intended for small problems and tests."""
        if self.kind == "scalar":
            return self.sigma2 * np.eye(self.size)
        if self._feature_cov is not None:
            return np.kron(self._feature_cov, np.eye(self.n))
        return self._matrix.copy()

    def __repr__(self) -> str:
        detail = {"scalar": f"sigma2={self.sigma2}", "ar1": f"rho={self.rho}",
                  "feature": "matrix", "explicit": "matrix"}[self.kind]
        return f"CovarianceModel({self.kind}, n={self.n}, d={self.d}, {detail})"


def build_covariance(kind: str, n: int, d: int, *, sigma2: float | None = None,
                     rho: float | None = None, matrix: np.ndarray | None = None
                     ) -> CovarianceModel:
    """Validate parameters and construct a :class:`CovarianceModel`."""
    return CovarianceModel(kind, n, d, sigma2=sigma2, rho=rho, matrix=matrix)


def load_observations(source: str | Path | IO[str] | Iterable[str],
                      has_header: bool = False) -> DataMatrix:
    """Read a numeric CSV (comma separator, '.' decimal) into a DataMatrix.

    Rows become observations in file order.  Raises :class:`IngestionError`
    naming the offending row/column on ragged rows, non-numeric cells, or an
    empty file.  Row numbers are 1-based physical rows (the header counts).
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", newline="") as fh:
            return load_observations(fh, has_header=has_header)
    if isinstance(source, str):  # pragma: no cover - guarded above
        source = io.StringIO(source)

    rows: list[list[float]] = []
    width: int | None = None
    for lineno, record in enumerate(csv.reader(source), start=1):
        if has_header and lineno == 1:
            continue
        if width is None:
            if not record:
                raise IngestionError(f"row {lineno}: blank row")
            width = len(record)
        if len(record) != width:
            raise IngestionError(
                f"row {lineno}: expected {width} column(s), got {len(record)}")
        parsed = []
        for col, cell in enumerate(record, start=1):
            try:
                value = float(cell)
            except ValueError:
                raise IngestionError(
                    f"row {lineno}, column {col}: not a number: {cell.strip()!r}"
                ) from None
            if not np.isfinite(value):
                raise IngestionError(
                    f"row {lineno}, column {col}: non-finite value {cell.strip()!r}")
            parsed.append(value)
        rows.append(parsed)

    if not rows:
        raise IngestionError("empty input: no data rows")
    return DataMatrix(np.asarray(rows, dtype=float))
