"""Scikit-learn style front end for the accrual model.

``fit`` consumes the per-day counts of first participations and samples the
hyper-posterior; ``predict`` returns median new-participant counts for a set
of future horizons. Hyper-parameters live in ``__init__`` so the estimator
composes with ``get_params`` / ``set_params``, cloning, and grid search.
"""

from __future__ import annotations

import numbers
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import RequestError
from .forecast import ForecastDistribution, ForecastRequest, forecast
from .model import BetaSummary, DailyCounts, PopulationSpec, beta_summary
from .sampler import SamplerConfig, sample_hyper_posterior
from .forecast import resolve_n0

__all__ = ["AccrualForecaster"]


class AccrualForecaster(BaseEstimator):
    """Forecast how many new individuals will participate in future periods.

    Parameters
    ----------
    horizons : sequence of int, default (7, 14, 21, 28)
        Days beyond the fitted period to predict, strictly increasing.
    lambda_ : float, default 10.0
        Multiplier on the observed participant total used to estimate the
        non-participant pool when ``known_n0`` is not given.
    known_n0 : int or None, default None
        Exact count of individuals who did not participate in the fitted
        period; overrides ``lambda_`` when set.
    n_draws : int, default 1000
        Posterior sample size.
    seed : int, default 0
        Seed for the whole pipeline; fixed seed means identical forecasts.
    max_rejections_per_draw : int, default 10000
        Sampler rejection budget per requested draw.
    mode_tolerance : float, default 1e-8
        Convergence tolerance of the posterior-mode search.

    Examples
    --------
    >>> counts = [310, 260, 210, 180, 160, 140, 130]
    >>> model = AccrualForecaster(lambda_=10.0, seed=42).fit(counts)
    >>> model.predict([7, 14]).shape
    (2,)
    """

    def __init__(
        self,
        horizons: Sequence[int] = (7, 14, 21, 28),
        lambda_: float = 10.0,
        known_n0: int | None = None,
        n_draws: int = 1000,
        seed: int = 0,
        max_rejections_per_draw: int = 10_000,
        mode_tolerance: float = 1e-8,
    ):
        self.horizons = horizons
        self.lambda_ = lambda_
        self.known_n0 = known_n0
        self.n_draws = n_draws
        self.seed = seed
        self.max_rejections_per_draw = max_rejections_per_draw
        self.mode_tolerance = mode_tolerance

    def _population(self) -> PopulationSpec:
        if self.known_n0 is not None:
            return PopulationSpec.known(self.known_n0)
        return PopulationSpec.scaled(self.lambda_)

    def _sampler_cfg(self) -> SamplerConfig:
        return SamplerConfig(
            n_draws=self.n_draws,
            seed=self.seed,
            max_rejections_per_draw=self.max_rejections_per_draw,
            mode_tolerance=self.mode_tolerance,
        )

    def fit(self, y, X=None):
        """Fit the hyper-posterior to per-day first-participation counts.

        Parameters
        ----------
        y : array-like of shape (d,)
            counts[t-1] = number of individuals first participating on day t.
        X : ignored
            Present for scikit-learn API compatibility.
        """
        counts = np.asarray(y)
        if counts.ndim != 1 or counts.size == 0:
            raise ValueError("y must be a non-empty 1-d sequence of daily counts")
        if not all(isinstance(c, numbers.Integral) or float(c).is_integer() for c in counts):
            raise ValueError("daily counts must be integers")
        self.daily_counts_ = DailyCounts.from_counts(int(c) for c in counts)
        self.resolved_n0_ = resolve_n0(self._population(), self.daily_counts_)
        self.posterior_ = sample_hyper_posterior(
            self.daily_counts_, self.resolved_n0_, self._sampler_cfg()
        )
        return self

    def predict(self, horizons: Sequence[int] | None = None) -> np.ndarray:
        """Median predicted new participants for each horizon."""
        return self.predict_distribution(horizons).point_estimate

    def predict_distribution(
        self, horizons: Sequence[int] | None = None
    ) -> ForecastDistribution:
        """Full posterior-predictive distribution for each horizon."""
        check_is_fitted(self)
        hs = tuple(int(h) for h in (self.horizons if horizons is None else horizons))
        if not hs:
            raise RequestError("horizon list must not be empty")
        req = ForecastRequest(
            data=self.daily_counts_,
            population=self._population(),
            horizons=hs,
            sampler_cfg=self._sampler_cfg(),
        )
        return forecast(req, posterior=self.posterior_)

    def posterior_mean_summary(self) -> BetaSummary:
        """Population mean/sd of pi at the posterior-mean hyper-parameters."""
        check_is_fitted(self)
        return beta_summary(self.posterior_.mean_hyperparams())
