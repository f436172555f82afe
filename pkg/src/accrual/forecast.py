"""Posterior-predictive forecasts of new-participant accrual.

For each posterior draw of (alpha, beta) the count of individuals who stay
out through a horizon of ``d_star`` further days is Binomial(n0, q0). The
horizons of one request are coupled through sequential binomial thinning:
survivors at one horizon are re-thinned to the next with the conditional
probability ``q0(next) / q0(previous)``. Each horizon keeps its exact
Binomial(n0, q0) marginal while per-draw paths become monotone, so weekly
increments can never go negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, RequestError
from .model import DailyCounts, HyperParams, PopulationSpec, _log_q0_arrays, q0
from .sampler import PosteriorDraws, SamplerConfig, sample_hyper_posterior

__all__ = [
    "ForecastRequest",
    "ForecastDistribution",
    "QUANTILE_PROBS",
    "resolve_n0",
    "simulate_n00",
    "forecast",
]

QUANTILE_PROBS = (0.025, 0.25, 0.5, 0.75, 0.975)

# independent RNG stream for the binomial stage, so the posterior draws for a
# given seed stay identical whether or not a forecast is run on top of them
_THINNING_STREAM = 0x6E30


@dataclass(frozen=True)
class ForecastRequest:
    """Everything one forecast needs: data, population, horizons, sampler config."""

    data: DailyCounts
    population: PopulationSpec
    horizons: tuple[int, ...]
    sampler_cfg: SamplerConfig

    def __post_init__(self):
        horizons = tuple(int(h) for h in self.horizons)
        if len(horizons) == 0:
            raise RequestError("horizon list must not be empty")
        if horizons[0] < 1 or any(b <= a for a, b in zip(horizons, horizons[1:])):
            raise RequestError(
                f"horizons must be strictly increasing positive integers, got {horizons}"
            )
        object.__setattr__(self, "horizons", horizons)


@dataclass(frozen=True)
class ForecastDistribution:
    """Per-horizon posterior-predictive samples and summaries.

    ``samples[j, k]`` is the number of new participants by horizon
    ``horizons[k]`` under posterior draw ``j``; ``weekly_curve_samples[j, k]``
    is the increment between consecutive horizons (anchored at the end of the
    first period), i.e. the week-by-week accrual when horizons are weekly.
    """

    horizons: tuple[int, ...]
    resolved_n0: int
    samples: np.ndarray  # (n_draws, n_horizons) new participants
    weekly_curve_samples: np.ndarray  # (n_draws, n_horizons) increments
    quantile_probs: tuple[float, ...]
    quantiles: np.ndarray  # (n_horizons, n_quantile_probs)
    point_estimate: np.ndarray  # (n_horizons,) across-draw medians
    posterior: PosteriorDraws

    def quantile(self, horizon: int, prob: float) -> float:
        k = self.horizons.index(horizon)
        p = self.quantile_probs.index(prob)
        return float(self.quantiles[k, p])

    def interval(self, horizon: int, level: float = 0.95) -> tuple[float, float]:
        lo = (1.0 - level) / 2.0
        return self.quantile(horizon, lo), self.quantile(horizon, 1.0 - lo)


def resolve_n0(population: PopulationSpec, data: DailyCounts) -> int:
    """Number of first-period non-participants to forecast over.

    Known counts pass through verbatim; a multiplier scales the observed
    participant total and rounds to the nearest integer (ties away from
    zero).
    """
    if population.known_n0 is not None:
        return population.known_n0
    total = data.total_participants()
    if total == 0:
        raise DataError("cannot scale a participant total of zero to estimate n0")
    return int(math.floor(population.multiplier * total + 0.5))


def simulate_n00(
    hp: HyperParams,
    n0: int,
    d: int,
    d_star: int,
    rng: np.random.Generator,
) -> int:
    """One Binomial(n0, q0) draw: how many of n0 non-participants stay out
    through d_star further days."""
    if n0 < 0:
        raise ValueError(f"n0 must be >= 0, got {n0}")
    return int(rng.binomial(n0, q0(hp, d, d_star)))


def _thinned_paths(
    alpha: np.ndarray,
    beta: np.ndarray,
    n0: int,
    d: int,
    horizons: tuple[int, ...],
    rng: np.random.Generator,
) -> np.ndarray:
    """Coupled per-draw n00 paths, one column per horizon, non-increasing."""
    log_q = _log_q0_arrays(alpha[:, None], beta[:, None], d, np.asarray(horizons, dtype=float))
    # conditional survival from one horizon to the next; first column is vs. day 0
    log_cond = np.diff(log_q, axis=1, prepend=0.0)
    cond = np.minimum(np.exp(log_cond), 1.0)

    n_draws = len(alpha)
    paths = np.empty((n_draws, len(horizons)), dtype=np.int64)
    survivors = np.full(n_draws, n0, dtype=np.int64)
    for k in range(len(horizons)):
        survivors = rng.binomial(survivors, cond[:, k])
        paths[:, k] = survivors
    return paths


def forecast(req: ForecastRequest, posterior: PosteriorDraws | None = None) -> ForecastDistribution:
    """Full posterior-predictive forecast for every requested horizon.

    Runs the posterior sampler (unless ``posterior`` is supplied from an
    earlier fit with the same data), then thins the resolved non-participant
    pool through the horizon sequence per draw. Point estimates are
    across-draw medians; quantiles are empirical with linear interpolation.
    Deterministic for a fixed request.
    """
    n0 = resolve_n0(req.population, req.data)
    if posterior is None:
        posterior = sample_hyper_posterior(req.data, n0, req.sampler_cfg)
    elif len(posterior) != req.sampler_cfg.n_draws:
        raise RequestError(
            f"supplied posterior has {len(posterior)} draws, config wants {req.sampler_cfg.n_draws}"
        )

    rng = np.random.default_rng([req.sampler_cfg.seed, _THINNING_STREAM])
    paths = _thinned_paths(
        posterior.alpha, posterior.beta, n0, req.data.d, req.horizons, rng
    )
    new_participants = n0 - paths
    weekly = np.diff(new_participants, axis=1, prepend=0)

    probs = np.asarray(QUANTILE_PROBS)
    quantiles = np.quantile(new_participants, probs, axis=0).T
    point = np.quantile(new_participants, 0.5, axis=0)
    return ForecastDistribution(
        horizons=req.horizons,
        resolved_n0=n0,
        samples=new_participants,
        weekly_curve_samples=weekly,
        quantile_probs=QUANTILE_PROBS,
        quantiles=quantiles,
        point_estimate=point,
        posterior=posterior,
    )
