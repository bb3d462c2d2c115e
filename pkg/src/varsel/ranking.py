"""Best-to-worst feature orderings under six ranking criteria.

Four of the methods are greedy procedures over prediction error (forward
add-min, backward remove-min, remove-max, add-max), one sorts by absolute
Pearson correlation with the target, and one is classical backward
elimination on per-coefficient t-test p-values.

Every method returns the same shape: a best-to-worst permutation of all
features plus the per-prefix MAE curve.  Methods whose native output runs
worst-to-best (backward elimination, add-max) are normalized by reversal;
the raw removal/addition sequence is kept alongside so reports can show
both conventions.  Ties are always broken by the lowest feature index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg
from scipy.stats import t as student_t

from .data import Dataset, FeatureSubset
from .errors import ConfigError, DegenerateStepError, RankDeficiencyError
from .linmodel import build_design_matrix, fit_least_squares, fit_subset


class RankingMethod(str, Enum):
    RM1_FORWARD = "rm1-forward"
    RM2_BACKWARD = "rm2-backward"
    RM3_REMOVE_MAX = "rm3-remove-max"
    RM4_ADD_MAX = "rm4-add-max"
    RM5_CORRELATION = "rm5-correlation"
    PVALUE = "pvalue"


@dataclass(frozen=True)
class Ranking:
    """A method tag, a best-to-worst permutation, and its error curve.

    ``raw_order`` preserves the native removal/addition sequence for the
    methods that produce one (None otherwise).  ``admissible`` is only set
    by the p-value method: entry M-1 says whether the M-feature model kept
    all coefficients below the significance threshold.  ``filled_prefixes``
    lists prefix sizes whose fit was rank-deficient and whose curve entry
    repeats the previous prefix.
    """

    method: RankingMethod
    order: tuple[int, ...]
    error_curve: np.ndarray
    raw_order: tuple[int, ...] | None = None
    admissible: tuple[bool, ...] | None = None
    filled_prefixes: tuple[int, ...] = ()

    def __post_init__(self):
        curve = np.asarray(self.error_curve, dtype=float)
        curve.setflags(write=False)
        object.__setattr__(self, "error_curve", curve)
        r = len(self.order)
        if sorted(self.order) != list(range(1, r + 1)):
            raise ConfigError("order must be a permutation of 1..R")
        if curve.shape != (r,):
            raise ConfigError("error_curve must have one entry per feature")


def error_curve(
    dataset: Dataset, order: tuple[int, ...] | list[int]
) -> tuple[np.ndarray, tuple[int, ...]]:
    """MAE of the least-squares fit on each prefix of ``order``.

    Entry M-1 holds the MAE using the first M features.  A rank-deficient
    prefix repeats the previous prefix's MAE (the intercept-only MAE for
    M=1) and its size is reported in the second return value.
    """
    order = tuple(int(k) for k in order)
    r = dataset.n_features
    if sorted(order) != list(range(1, r + 1)):
        raise ConfigError("order must be a permutation of 1..R")
    curve = np.empty(r, dtype=float)
    filled = []
    previous = fit_subset(dataset, FeatureSubset(())).mae
    for m in range(1, r + 1):
        try:
            previous = fit_subset(dataset, FeatureSubset(order[:m])).mae
        except RankDeficiencyError:
            filled.append(m)
        curve[m - 1] = previous
    return curve, tuple(filled)


def _candidate_mae(dataset: Dataset, indices: tuple[int, ...]) -> float | None:
    """MAE of one candidate fit, or None when rank-deficient."""
    try:
        return fit_subset(dataset, FeatureSubset(indices)).mae
    except RankDeficiencyError:
        return None


def _usable_features(dataset: Dataset) -> tuple[list[int], list[int]]:
    """Split features into a maximal full-rank set and the dropped rest.

    Greedy scan in ascending index order over an incrementally extended
    orthonormal basis (intercept first, always kept): a column is kept iff
    its component orthogonal to the current basis is non-negligible.
    Backward procedures start from the usable set and record the dropped
    indices at the tail of their order.
    """
    n = dataset.n_rows
    basis = np.ones((n, 1)) / math.sqrt(n)
    usable, dropped = [], []
    for k in range(1, dataset.n_features + 1):
        x = dataset.features[:, k - 1]
        scale = np.linalg.norm(x)
        resid = x - basis @ (basis.T @ x)
        resid -= basis @ (basis.T @ resid)  # one reorthogonalization pass
        norm = np.linalg.norm(resid)
        # Cutoff sits well above the solver's singular-value threshold so a
        # kept column can never trip the rank check downstream.
        if scale == 0.0 or norm <= 1e-8 * scale:
            dropped.append(k)
        else:
            basis = np.hstack([basis, (resid / norm)[:, None]])
            usable.append(k)
    return usable, dropped


def _finish(method, dataset, order, raw_order=None, admissible=None) -> Ranking:
    curve, filled = error_curve(dataset, tuple(order))
    return Ranking(
        method=method,
        order=tuple(order),
        error_curve=curve,
        raw_order=None if raw_order is None else tuple(raw_order),
        admissible=None if admissible is None else tuple(admissible),
        filled_prefixes=filled,
    )


def rank_forward_selection(dataset: Dataset) -> Ranking:
    """RM1: grow the model by the feature minimizing the prefix MAE."""
    r = dataset.n_features
    chosen: list[int] = []
    remaining = list(range(1, r + 1))
    while remaining:
        best_k, best_mae = None, math.inf
        for k in remaining:
            mae = _candidate_mae(dataset, tuple(chosen) + (k,))
            if mae is not None and mae < best_mae:
                best_k, best_mae = k, mae
        if best_k is None:
            raise DegenerateStepError(
                f"every candidate extending {chosen} is rank-deficient"
            )
        chosen.append(best_k)
        remaining.remove(best_k)
    return _finish(RankingMethod.RM1_FORWARD, dataset, chosen)


def rank_backward_elimination(dataset: Dataset) -> Ranking:
    """RM2: repeatedly remove the feature whose removal leaves the lowest
    MAE; the reversed removal order is best-to-worst."""
    usable, dropped = _usable_features(dataset)
    removals: list[int] = []
    current = list(usable)
    while current:
        best_k, best_mae = None, math.inf
        for k in current:
            rest = tuple(i for i in current if i != k)
            mae = _candidate_mae(dataset, rest)
            if mae is not None and mae < best_mae:
                best_k, best_mae = k, mae
        if best_k is None:
            raise DegenerateStepError("every removal candidate is rank-deficient")
        removals.append(best_k)
        current.remove(best_k)
    order = list(reversed(removals)) + dropped
    return _finish(RankingMethod.RM2_BACKWARD, dataset, order,
                   raw_order=removals + dropped)


def rank_remove_max_error(dataset: Dataset) -> Ranking:
    """RM3: repeatedly remove the feature whose removal raises the MAE the
    most; the removal order itself is best-to-worst."""
    usable, dropped = _usable_features(dataset)
    removals: list[int] = []
    current = list(usable)
    while current:
        best_k, best_mae = None, -math.inf
        for k in current:
            rest = tuple(i for i in current if i != k)
            mae = _candidate_mae(dataset, rest)
            if mae is not None and mae > best_mae:
                best_k, best_mae = k, mae
        if best_k is None:
            raise DegenerateStepError("every removal candidate is rank-deficient")
        removals.append(best_k)
        current.remove(best_k)
    order = removals + dropped
    return _finish(RankingMethod.RM3_REMOVE_MAX, dataset, order,
                   raw_order=removals + dropped)


def rank_add_max_error(dataset: Dataset) -> Ranking:
    """RM4: grow the model by the feature maximizing the prefix MAE, worst
    to best; the reversed addition order is best-to-worst."""
    r = dataset.n_features
    added: list[int] = []
    remaining = list(range(1, r + 1))
    while remaining:
        best_k, best_mae = None, -math.inf
        for k in remaining:
            mae = _candidate_mae(dataset, tuple(added) + (k,))
            if mae is not None and mae > best_mae:
                best_k, best_mae = k, mae
        if best_k is None:
            raise DegenerateStepError(
                f"every candidate extending {added} is rank-deficient"
            )
        added.append(best_k)
        remaining.remove(best_k)
    return _finish(RankingMethod.RM4_ADD_MAX, dataset,
                   list(reversed(added)), raw_order=added)


def rank_correlation(dataset: Dataset) -> Ranking:
    """RM5: sort by decreasing |Pearson correlation| with the target;
    zero-variance features correlate 0 and rank last."""
    y = dataset.target
    yc = y - y.mean()
    y_norm = np.linalg.norm(yc)
    scores = []
    for k in range(1, dataset.n_features + 1):
        x = dataset.features[:, k - 1]
        xc = x - x.mean()
        x_norm = np.linalg.norm(xc)
        if x_norm == 0.0 or y_norm == 0.0:
            rho = 0.0
        else:
            rho = float(xc @ yc) / (x_norm * y_norm)
        scores.append((-abs(rho), k))
    order = [k for _, k in sorted(scores)]
    return _finish(RankingMethod.RM5_CORRELATION, dataset, order)


def coefficient_pvalues(dataset: Dataset, indices: tuple[int, ...]) -> np.ndarray:
    """Two-sided t-test p-values for each feature coefficient of the fit on
    ``indices`` (intercept excluded).

    Standard errors come from sigma^2 * diag((X^T X)^-1) with the unbiased
    sigma^2 = SS_res / (N - M - 1), computed through the economic QR factor
    rather than an explicit Gram inverse.
    """
    design = build_design_matrix(dataset, FeatureSubset(indices))
    fit = fit_least_squares(design, dataset.target)
    x = design.values
    n, p = x.shape
    dof = n - p
    if dof < 1:
        raise ConfigError(f"p-values need N >= M + 2 (N={n}, M={p - 1})")
    _, r_factor = scipy.linalg.qr(x, mode="economic")
    r_inv = scipy.linalg.solve_triangular(r_factor, np.eye(p))
    gram_inv_diag = (r_inv**2).sum(axis=1)
    sigma2 = float(fit.residuals @ fit.residuals) / dof
    se = np.sqrt(sigma2 * gram_inv_diag[1:])
    coefs = fit.coefficients
    pvalues = np.empty(len(indices), dtype=float)
    for i, (b, s) in enumerate(zip(coefs, se)):
        if s == 0.0:
            pvalues[i] = 0.0 if b != 0.0 else 1.0
        else:
            pvalues[i] = 2.0 * float(student_t.sf(abs(b) / s, dof))
    return pvalues


def rank_pvalues(dataset: Dataset, alpha_threshold: float = 0.05) -> Ranking:
    """Backward stepwise elimination on t-test p-values.

    Repeatedly drops the coefficient with the largest p-value; the reversed
    removal order is best-to-worst.  For each model size M the ``admissible``
    flag records whether all retained coefficients had p < alpha, which is
    where the classical stopping rule would halt.
    """
    usable, dropped = _usable_features(dataset)
    removals: list[int] = []
    current = list(usable)
    r = dataset.n_features
    admissible = [False] * r
    while current:
        pvalues = coefficient_pvalues(dataset, tuple(current))
        m = len(current)
        admissible[m - 1] = bool(np.max(pvalues) < alpha_threshold)
        worst_pos = int(np.argmax(pvalues))  # argmax: first (lowest index) wins ties
        removals.append(current.pop(worst_pos))
    order = list(reversed(removals)) + dropped
    return _finish(RankingMethod.PVALUE, dataset, order,
                   raw_order=removals + dropped, admissible=admissible)


_DISPATCH = {
    RankingMethod.RM1_FORWARD: rank_forward_selection,
    RankingMethod.RM2_BACKWARD: rank_backward_elimination,
    RankingMethod.RM3_REMOVE_MAX: rank_remove_max_error,
    RankingMethod.RM4_ADD_MAX: rank_add_max_error,
    RankingMethod.RM5_CORRELATION: rank_correlation,
}


def rank_features(dataset: Dataset, method: RankingMethod,
                  alpha_threshold: float = 0.05) -> Ranking:
    """Run one ranking method by tag."""
    if method == RankingMethod.PVALUE:
        return rank_pvalues(dataset, alpha_threshold)
    return _DISPATCH[method](dataset)
