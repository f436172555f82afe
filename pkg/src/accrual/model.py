"""Core probability model for first-participation data.

Each individual participates for the first time on any given day with an
unknown daily probability ``pi``; the first-participation day within an
observation window of ``d`` days therefore follows a geometric distribution
censored at ``d`` (day ``0`` encodes "never participated in the window").
The ``pi`` values are drawn from a Beta(alpha, beta) population distribution,
and the pair (alpha, beta) carries the improper hyperprior
``p(alpha, beta) ∝ (alpha + beta)^(-5/2)``, which is uniform in the mean
``alpha/(alpha+beta)`` and the dispersion proxy ``(alpha+beta)^(-1/2)``.

Everything in this module is a pure function evaluated in log-gamma space;
raw gamma ratios overflow already for a few hundred observations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .errors import ModelError, NumericalError

__all__ = [
    "DailyCounts",
    "HyperParams",
    "PopulationSpec",
    "BetaSummary",
    "censored_geometric_pmf",
    "log_hyper_posterior",
    "conditional_posterior_pi",
    "q0",
    "predictive_pmf_second_period",
    "beta_summary",
    "ensure_proper_posterior",
]


def _check_int(name: str, value, low: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if low is not None and value < low:
        raise ValueError(f"{name} must be >= {low}, got {value}")
    return value


@dataclass(frozen=True)
class DailyCounts:
    """Sufficient statistics of a first period: day count ``d`` and per-day
    totals ``counts[t-1]`` of individuals whose first participation fell on
    day ``t``.

    Individuals who never participated in the period are *not* part of
    ``counts``; their number enters the model separately (see
    :class:`PopulationSpec`).
    """

    d: int
    counts: tuple[int, ...]

    def __post_init__(self):
        d = _check_int("d", self.d, low=1)
        counts = tuple(_check_int(f"counts[{i}]", c, low=0) for i, c in enumerate(self.counts))
        if len(counts) != d:
            raise ValueError(f"counts must have length d={d}, got {len(counts)}")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "DailyCounts":
        """Build from a plain sequence; the period length is its length."""
        counts = tuple(counts)
        return cls(d=len(counts), counts=counts)

    def total_participants(self) -> int:
        return sum(self.counts)

    def has_interior_day(self) -> bool:
        """True when some first participation happened on a day t < d."""
        return any(c > 0 for c in self.counts[: self.d - 1])


@dataclass(frozen=True)
class HyperParams:
    """Parameters (alpha, beta) of the Beta population distribution."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or isinstance(v, bool):
                raise ValueError(f"{name} must be a positive real, got {v!r}")
            v = float(v)
            if not math.isfinite(v) or v <= 0.0:
                raise ValueError(f"{name} must be finite and > 0, got {v}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class PopulationSpec:
    """How to obtain ``n0``, the number of first-period non-participants.

    Exactly one of ``known_n0`` (exact count) and ``multiplier`` (scale the
    observed participant total by ``lambda``) is set.
    """

    known_n0: int | None = None
    multiplier: float | None = None

    def __post_init__(self):
        if (self.known_n0 is None) == (self.multiplier is None):
            raise ValueError("exactly one of known_n0 and multiplier must be set")
        if self.known_n0 is not None:
            object.__setattr__(self, "known_n0", _check_int("known_n0", self.known_n0, low=0))
        else:
            lam = self.multiplier
            if not isinstance(lam, (int, float, np.floating, np.integer)) or isinstance(lam, bool):
                raise ValueError(f"multiplier must be a positive real, got {lam!r}")
            lam = float(lam)
            if not math.isfinite(lam) or lam <= 0.0:
                raise ValueError(f"multiplier must be finite and > 0, got {lam}")
            object.__setattr__(self, "multiplier", lam)

    @classmethod
    def known(cls, n0: int) -> "PopulationSpec":
        return cls(known_n0=n0)

    @classmethod
    def scaled(cls, multiplier: float) -> "PopulationSpec":
        return cls(multiplier=multiplier)


@dataclass(frozen=True)
class BetaSummary:
    """Mean and standard deviation of a Beta(alpha, beta) variable."""

    mean: float
    sd: float


def censored_geometric_pmf(x: int, pi: float, d: int) -> float:
    """Probability that the first participation day equals ``x``.

    ``x`` in ``1..d`` has probability ``(1-pi)^(x-1) * pi``; ``x = 0``
    collects everything beyond day ``d`` with probability ``(1-pi)^d``.
    ``pi = 0`` is outside the domain: an individual who can never
    participate is the ``pi -> 0`` limit handled by the Beta mixture.
    """
    d = _check_int("d", d, low=1)
    x = _check_int("x", x, low=0)
    if x > d:
        raise ValueError(f"x must be in 0..d={d}, got {x}")
    if not isinstance(pi, (int, float, np.floating, np.integer)) or isinstance(pi, bool):
        raise ValueError(f"pi must be a real in (0, 1], got {pi!r}")
    pi = float(pi)
    if not (0.0 < pi <= 1.0):
        raise ValueError(f"pi must be in (0, 1], got {pi}")
    if x == 0:
        return (1.0 - pi) ** d
    return (1.0 - pi) ** (x - 1) * pi


def _log_hyper_posterior_arrays(alpha, beta, counts: tuple[int, ...], n0: int):
    """Vectorized unnormalized log posterior density of (alpha, beta).

    ``alpha`` and ``beta`` broadcast against each other; the day axis is
    reduced internally. Grouped sufficient-statistic form: the fit cost is
    O(d) regardless of how many individuals the counts represent.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    d = len(counts)
    s = np.asarray(counts, dtype=float)
    t = np.arange(1, d + 1, dtype=float)
    n = n0 + float(s.sum())

    a = alpha[..., None]
    b = beta[..., None]
    out = -2.5 * np.log(alpha + beta)
    out = out + n * (gammaln(alpha + beta) - gammaln(alpha) - gammaln(beta))
    out = out + np.sum(s * (gammaln(a + 1.0) + gammaln(b + t - 1.0) - gammaln(a + b + t)), axis=-1)
    out = out + n0 * (gammaln(alpha) + gammaln(beta + d) - gammaln(alpha + beta + d))
    return out


def log_hyper_posterior(hp: HyperParams, data: DailyCounts, n0: int) -> float:
    """Unnormalized log density of (alpha, beta) given grouped counts.

    Combines the ``(alpha+beta)^(-5/2)`` hyperprior with the marginal
    likelihood of ``counts`` plus ``n0`` fully censored individuals, all
    individuals' latent ``pi`` integrated out.
    """
    if not isinstance(hp, HyperParams):
        hp = HyperParams(*hp)
    if not isinstance(data, DailyCounts):
        raise ValueError("data must be a DailyCounts")
    n0 = _check_int("n0", n0, low=0)
    value = float(_log_hyper_posterior_arrays(hp.alpha, hp.beta, data.counts, n0))
    if not math.isfinite(value):
        raise NumericalError(
            f"log posterior overflowed at alpha={hp.alpha}, beta={hp.beta} (value {value})"
        )
    return value


def conditional_posterior_pi(hp: HyperParams, x: int, d: int) -> HyperParams:
    """Beta parameters of an individual's ``pi`` given its outcome ``x``.

    A participant on day ``x > 0`` contributes one success and ``x - 1``
    failures; a non-participant (``x = 0``) contributes ``d`` failures.
    """
    if not isinstance(hp, HyperParams):
        hp = HyperParams(*hp)
    d = _check_int("d", d, low=1)
    x = _check_int("x", x, low=0)
    if x > d:
        raise ValueError(f"x must be in 0..d={d}, got {x}")
    if x == 0:
        return HyperParams(hp.alpha, hp.beta + d)
    return HyperParams(hp.alpha + 1.0, hp.beta + (x - 1.0))


def _log_q0_arrays(alpha, beta, d: int, d_star):
    """log of the continued non-participation probability; broadcasts."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    d_star = np.asarray(d_star, dtype=float)
    return (
        gammaln(beta + d + d_star)
        + gammaln(alpha + beta + d)
        - gammaln(alpha + beta + d + d_star)
        - gammaln(beta + d)
    )


def q0(hp: HyperParams, d: int, d_star: int) -> float:
    """Probability that a first-period non-participant stays out for
    ``d_star`` further days, with its ``pi`` integrated over the
    Beta(alpha, beta + d) conditional posterior.

    Evaluated in log space; ``d_star = 0`` returns exactly 1.
    """
    if not isinstance(hp, HyperParams):
        hp = HyperParams(*hp)
    d = _check_int("d", d, low=1)
    d_star = _check_int("d_star", d_star, low=0)
    return float(np.exp(_log_q0_arrays(hp.alpha, hp.beta, d, d_star)))


def predictive_pmf_second_period(hp: HyperParams, x_star: int, d: int, d_star: int) -> float:
    """Predictive probability that a first-period non-participant first
    participates on day ``x_star`` of a second period of ``d_star`` days
    (``x_star = 0``: not at all).

    This is the censored geometric pmf averaged over
    Beta(alpha, beta + d); the ``x_star = 0`` branch *is* :func:`q0`.
    """
    if not isinstance(hp, HyperParams):
        hp = HyperParams(*hp)
    d = _check_int("d", d, low=1)
    d_star_i = _check_int("d_star", d_star, low=1)
    x_star = _check_int("x_star", x_star, low=0)
    if x_star > d_star_i:
        raise ValueError(f"x_star must be in 0..d_star={d_star_i}, got {x_star}")
    if x_star == 0:
        return q0(hp, d, d_star_i)
    a, b = hp.alpha, hp.beta
    log_p = (
        gammaln(a + 1.0)
        + gammaln(b + d + x_star - 1.0)
        - gammaln(a + b + d + x_star)
        + gammaln(a + b + d)
        - gammaln(a)
        - gammaln(b + d)
    )
    return float(np.exp(log_p))


def beta_summary(hp: HyperParams) -> BetaSummary:
    """Mean and sd of pi under Beta(alpha, beta)."""
    if not isinstance(hp, HyperParams):
        hp = HyperParams(*hp)
    mean = hp.alpha / (hp.alpha + hp.beta)
    sd = math.sqrt(mean * (1.0 - mean) / (hp.alpha + hp.beta + 1.0))
    return BetaSummary(mean=mean, sd=sd)


def ensure_proper_posterior(data: DailyCounts) -> None:
    """Raise :class:`ModelError` unless some first participation fell on a
    day t with 0 < t < d.

    The improper hyperprior only yields a proper posterior under this
    condition; datasets failing it (e.g. everything on the last day, or no
    participants at all) are refused before any sampling starts.
    """
    if not data.has_interior_day():
        raise ModelError(
            "posterior may be improper: no first participation on any day t < d "
            f"(counts={data.counts})"
        )
