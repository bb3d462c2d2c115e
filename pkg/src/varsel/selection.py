"""Selection of the effective number of variables along a ranking.

An information criterion scores each prefix of a ranking with a Gaussian
fitting term plus a complexity penalty, 2 * xi * M; the constant xi is all
that distinguishes AIC, BIC and HQIC.  The p-value rule instead stops
backward elimination at the largest model whose coefficients all pass the
significance threshold.  Elbow detection on the error curve stays a report
annotation, never a selection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .data import Dataset, FeatureSubset
from .errors import ConfigError, RankDeficiencyError
from .linmodel import FitResult, fit_subset
from .ranking import Ranking, RankingMethod


class Criterion(str, Enum):
    AIC = "aic"
    BIC = "bic"
    HQIC = "hqic"
    PVALUE = "pvalue"


@dataclass(frozen=True)
class OrderSelection:
    """Chosen model size plus the per-prefix criterion curve.

    For the information criteria the curve holds criterion values (+inf for
    rank-deficient prefixes, -inf for perfect fits); for the p-value rule it
    holds 0/1 admissibility flags.
    """

    criterion: Criterion
    m_star: int
    curve: np.ndarray
    ranking_method: RankingMethod | None = None

    def __post_init__(self):
        curve = np.asarray(self.curve, dtype=float)
        curve.setflags(write=False)
        object.__setattr__(self, "curve", curve)
        if not 1 <= self.m_star <= len(self.curve):
            raise ConfigError("m_star must lie in [1, R]")


def penalty_constant(criterion: Criterion, n: int) -> float:
    """The xi multiplier of the complexity penalty 2 * xi * M."""
    if criterion == Criterion.AIC:
        return 1.0
    if criterion == Criterion.BIC:
        return math.log(n) / 2.0
    if criterion == Criterion.HQIC:
        return math.log(math.log(n))
    raise ConfigError(f"{criterion} has no penalty constant")


def information_criterion_value(
    fit: FitResult, n: int, m: int, criterion: Criterion,
    penalty_offset: int = 0,
) -> float:
    """Gaussian -2 log-likelihood at the MLE plus the complexity penalty.

    With sigma^2 estimated by the in-sample MSE the fitting term closes to
    n*log(2*pi*mse) + n.  The penalty counts the m features only;
    ``penalty_offset`` adds a constant parameter count (e.g. 1 for the
    intercept) for sensitivity analysis.  A perfect fit (mse = 0) returns
    -inf, a sentinel that always wins the argmin.
    """
    if n < m + 2:
        raise ConfigError(f"need n >= m + 2 (n={n}, m={m})")
    if fit.mse == 0.0:
        return -math.inf
    fitting = n * math.log(2.0 * math.pi * fit.mse) + n
    return fitting + 2.0 * penalty_constant(criterion, n) * (m + penalty_offset)


def select_order(
    dataset: Dataset, ranking: Ranking, criterion: Criterion,
    penalty_offset: int = 0,
) -> OrderSelection:
    """Evaluate the criterion along ranking prefixes and return the argmin.

    Rank-deficient prefixes score +inf and are never selected; ties go to
    the smallest model.
    """
    if criterion == Criterion.PVALUE:
        raise ConfigError("use pvalue_stopping for the p-value rule")
    n = dataset.n_rows
    r = dataset.n_features
    curve = np.full(r, math.inf)
    for m in range(1, r + 1):
        try:
            fit = fit_subset(dataset, FeatureSubset(ranking.order[:m]))
            curve[m - 1] = information_criterion_value(fit, n, m, criterion,
                                                       penalty_offset)
        except (RankDeficiencyError, ConfigError):
            continue  # unscorable prefix (rank-deficient or n < m + 2)
    if not (curve < math.inf).any():
        raise ConfigError("every ranking prefix is rank-deficient")
    m_star = int(np.argmin(curve)) + 1
    return OrderSelection(criterion=criterion, m_star=m_star, curve=curve,
                          ranking_method=ranking.method)


def pvalue_stopping(
    dataset: Dataset, pv_ranking: Ranking, alpha_threshold: float = 0.05
) -> OrderSelection:
    """Largest model size at which backward elimination on p-values stops,
    i.e. every retained coefficient satisfies p < alpha.

    Falls back to m_star = 1 when no prefix is admissible (the rule would
    reject even the single best feature).
    """
    if pv_ranking.admissible is None:
        raise ConfigError("pvalue_stopping needs a ranking from rank_pvalues")
    flags = np.array(pv_ranking.admissible, dtype=float)
    admissible_sizes = [m for m, ok in enumerate(pv_ranking.admissible, start=1) if ok]
    m_star = max(admissible_sizes) if admissible_sizes else 1
    return OrderSelection(criterion=Criterion.PVALUE, m_star=m_star, curve=flags,
                          ranking_method=pv_ranking.method)


def elbow_annotation(error_curve: np.ndarray) -> int | None:
    """Prefix size of maximum curvature of the error curve in log-log axes.

    Purely a report annotation mirroring visual elbow inspection; returns
    None when the curve is too short or degenerate to bend.
    """
    values = np.asarray(error_curve, dtype=float)
    r = len(values)
    if r < 3:
        return None
    positive = values[values > 0]
    if positive.size == 0:
        return None
    floor = positive.min() * 1e-6
    u = np.log(np.arange(1, r + 1, dtype=float))
    v = np.log(np.maximum(values, floor))
    best_m, best_curvature = None, 0.0
    for i in range(1, r - 1):
        du, dv = u[i + 1] - u[i - 1], v[i + 1] - v[i - 1]
        d2u = u[i + 1] - 2 * u[i] + u[i - 1]
        d2v = v[i + 1] - 2 * v[i] + v[i - 1]
        speed = math.hypot(du, dv)
        if speed == 0.0:
            continue
        curvature = abs(du * d2v - dv * d2u) / speed**3
        if curvature > best_curvature:
            best_m, best_curvature = i + 1, curvature
    return best_m
