"""Standardized regression data.

The model is y = X beta + eps with X column-standardized and y centered,
so no intercept appears anywhere downstream. Standardization uses the
population-style divisor n (not n-1): that convention makes X'X/n have
unit diagonal, which in turn makes the coordinate-descent update a pure
soft-threshold and lambda_max = max_j |x_j'y| / n exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstantColumn, DimensionMismatch

# sds below this are treated as zero variance
_SD_TINY = 1e-12


@dataclass(frozen=True)
class Dataset:
    """Column-standardized design matrix and centered response.

    Attributes
    ----------
    x : ndarray, shape (n, p)
        Each column has mean 0 and standard deviation 1 (divisor n).
    y : ndarray, shape (n,)
        Mean 0.
    column_means, column_sds : ndarray, shape (p,)
        The raw-scale statistics removed from each column.
    y_mean : float
        The raw-scale response mean.
    """

    x: np.ndarray
    y: np.ndarray
    column_means: np.ndarray
    column_sds: np.ndarray
    y_mean: float

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


def standardize(raw_x: np.ndarray, raw_y: np.ndarray) -> Dataset:
    """Center and scale a raw design, center the response.

    Parameters
    ----------
    raw_x : ndarray, shape (n, p)
    raw_y : ndarray, shape (n,)

    Returns
    -------
    Dataset

    Raises
    ------
    DimensionMismatch
        If row counts disagree or shapes are not (n, p) and (n,).
    ConstantColumn
        If any column of raw_x has zero variance.
    """
    raw_x = np.asarray(raw_x, dtype=np.float64)
    raw_y = np.asarray(raw_y, dtype=np.float64)
    if raw_x.ndim != 2 or raw_y.ndim != 1:
        raise DimensionMismatch(f"expected (n, p) and (n,), got {raw_x.shape} and {raw_y.shape}")
    if raw_x.shape[0] != raw_y.shape[0]:
        raise DimensionMismatch(f"{raw_x.shape[0]} rows of x vs {raw_y.shape[0]} of y")
    if raw_x.shape[0] < 2:
        raise DimensionMismatch("need at least 2 rows")

    means = raw_x.mean(axis=0)
    sds = raw_x.std(axis=0)  # divisor n
    bad = np.flatnonzero(sds <= _SD_TINY)
    if bad.size:
        raise ConstantColumn(int(bad[0]))
    x = (raw_x - means) / sds
    y_mean = float(raw_y.mean())
    y = raw_y - y_mean
    return Dataset(x=x, y=y, column_means=means, column_sds=sds, y_mean=y_mean)


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation of two vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    ac = a - a.mean()
    bc = b - b.mean()
    denom = np.sqrt((ac @ ac) * (bc @ bc))
    if denom == 0.0:
        raise ConstantColumn(0, label="a constant input to pearson")
    return float((ac @ bc) / denom)


def correlation_matrix(x: np.ndarray) -> np.ndarray:
    """Pairwise Pearson correlations of the columns of x."""
    x = np.asarray(x, dtype=np.float64)
    xc = x - x.mean(axis=0)
    sd = np.sqrt((xc * xc).sum(axis=0))
    bad = np.flatnonzero(sd <= _SD_TINY)
    if bad.size:
        raise ConstantColumn(int(bad[0]))
    xs = xc / sd
    r = xs.T @ xs
    np.clip(r, -1.0, 1.0, out=r)
    return r
