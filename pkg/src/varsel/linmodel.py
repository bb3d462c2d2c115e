"""Least-squares fitting of linear models restricted to feature subsets.

All fits go through one solver based on an orthogonal decomposition
(SVD via ``numpy.linalg.lstsq``), never raw normal equations: feature
tables in this domain contain near-duplicate columns and conditioning
matters.  A design whose numerical rank (relative singular-value
threshold ``RANK_RCOND``) is below its column count raises
``RankDeficiencyError`` instead of being silently pseudo-inverted, so
search procedures can skip degenerate subsets deterministically.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .data import Dataset, FeatureSubset
from .errors import RankDeficiencyError, VarselError

# Relative singular-value cutoff for declaring a design rank-deficient.
RANK_RCOND = 1e-10

# When True every fit asserts residual orthogonality; enabled by the test
# suite, off in production since it adds a matrix-vector product per fit.
STRICT_RESIDUAL_CHECK = False

_ORTHOGONALITY_TOL = 1e-8


@dataclass(frozen=True)
class DesignMatrix:
    """N x (M+1) matrix: a leading all-ones column then subset columns."""

    values: np.ndarray
    subset: FeatureSubset

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_columns(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class FitResult:
    """Coefficients and error metrics of one least-squares fit."""

    intercept: float
    coefficients: np.ndarray
    residuals: np.ndarray
    mae: float
    mse: float
    rmse: float
    r_squared: float

    @property
    def n_rows(self) -> int:
        return self.residuals.shape[0]


def build_design_matrix(dataset: Dataset, subset: FeatureSubset) -> DesignMatrix:
    """Ones-prepended column selection; M=0 yields the N x 1 ones matrix."""
    subset.validate_against(dataset)
    n = dataset.n_rows
    values = np.empty((n, subset.m + 1), dtype=float)
    values[:, 0] = 1.0
    for j, k in enumerate(subset.indices):
        values[:, j + 1] = dataset.features[:, k - 1]
    return DesignMatrix(values, subset)


def fit_least_squares(design: DesignMatrix, target: np.ndarray) -> FitResult:
    """Fit ``target ~ design`` by least squares and compute error metrics.

    R-squared is ``1 - SS_res / SS_tot`` with SS_tot about the target mean;
    a zero-variance target with a perfect fit reports 0 by convention.

    Raises:
        RankDeficiencyError: numerical rank below the column count.
    """
    x = design.values
    y = np.asarray(target, dtype=float)
    n, p = x.shape
    if y.shape != (n,):
        raise VarselError(f"target length {y.shape} does not match {n} design rows")
    coef, _, rank, _ = np.linalg.lstsq(x, y, rcond=RANK_RCOND)
    if rank < p:
        raise RankDeficiencyError(
            f"design matrix for subset {design.subset.indices} has numerical "
            f"rank {rank} < {p} (relative threshold {RANK_RCOND:g})",
            subset=design.subset,
        )
    residuals = y - x @ coef
    mae = float(np.abs(residuals).mean())
    mse = float((residuals @ residuals) / n)
    ss_res = float(residuals @ residuals)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot > 0.0:
        r_squared = 1.0 - ss_res / ss_tot
    elif ss_res <= 1e-20 * max(1.0, float(y @ y)):
        r_squared = 0.0
    else:
        raise VarselError("zero-variance target with a nonzero residual")

    if STRICT_RESIDUAL_CHECK:
        bound = _ORTHOGONALITY_TOL * np.linalg.norm(x) * np.linalg.norm(y)
        worst = float(np.abs(x.T @ residuals).max())
        if worst > bound:
            raise AssertionError(
                f"residual orthogonality violated: {worst:g} > {bound:g}"
            )

    residuals.setflags(write=False)
    coefs = coef[1:].copy()
    coefs.setflags(write=False)
    return FitResult(
        intercept=float(coef[0]),
        coefficients=coefs,
        residuals=residuals,
        mae=mae,
        mse=mse,
        rmse=math.sqrt(mse),
        r_squared=r_squared,
    )


def fit_subset(dataset: Dataset, subset: FeatureSubset) -> FitResult:
    """Fit the dataset target on the given feature subset (plus intercept)."""
    return fit_least_squares(build_design_matrix(dataset, subset), dataset.target)


def residual_norm_cost(residuals: np.ndarray, p: float, alpha: float) -> float:
    """``||residuals||_p ** alpha`` for any p > 0 (p < 1 allowed)."""
    if p <= 0 or alpha <= 0:
        raise VarselError("cost parameters require p > 0 and alpha > 0")
    abs_res = np.abs(np.asarray(residuals, dtype=float))
    return float(np.sum(abs_res**p) ** (alpha / p))


def subset_cost(
    dataset: Dataset,
    subset: FeatureSubset,
    p: float = 1.0,
    alpha: float = 1.0,
) -> float:
    """Prediction-error cost of a subset: Lp norm of the fit residuals, to
    the power alpha.  The default (p=1, alpha=1) equals N * MAE.

    Raises:
        RankDeficiencyError: propagated from the underlying fit.
    """
    fit = fit_subset(dataset, subset)
    return residual_norm_cost(fit.residuals, p, alpha)


class CostCache:
    """Memo for subset costs keyed by the sorted index tuple.

    The cost function is invariant under subset reordering, so one entry
    serves every ordering.  Degenerate subsets are recorded as +inf, which
    search treats as never-improving and sampling as weight zero.  Size is
    bounded (LRU eviction) so long chains on wide tables stay in memory.
    """

    def __init__(self, dataset: Dataset, p: float = 1.0, alpha: float = 1.0,
                 max_entries: int = 262144):
        self.dataset = dataset
        self.p = p
        self.alpha = alpha
        self.max_entries = max_entries
        self._store: OrderedDict[tuple[int, ...], float] = OrderedDict()
        self.hits = 0
        self.misses = 0

    def cost(self, indices: tuple[int, ...]) -> float:
        """Cost of the subset; +inf when the design is rank-deficient."""
        key = tuple(sorted(indices))
        found = self._store.get(key)
        if found is not None:
            self.hits += 1
            self._store.move_to_end(key)
            return found
        self.misses += 1
        try:
            value = subset_cost(self.dataset, FeatureSubset(key), self.p, self.alpha)
        except RankDeficiencyError:
            value = math.inf
        self._store[key] = value
        if len(self._store) > self.max_entries:
            self._store.popitem(last=False)
        return value
