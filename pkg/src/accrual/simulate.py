"""Forward simulators used as ground-truth generators and test oracles.

Two population flavors: a discrete one (a handful of groups sharing a daily
participation probability) and the continuous Beta mixture the inference
code assumes. First-participation days are drawn by inverting the geometric
CDF, which stays exact and fast at millions of individuals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import DailyCounts, HyperParams

__all__ = [
    "DiscretePopulation",
    "SimulatedExperiment",
    "expected_first_participation",
    "simulate_discrete",
    "simulate_beta_geometric",
]


@dataclass(frozen=True)
class DiscretePopulation:
    """Groups of individuals sharing one daily participation probability."""

    groups: tuple[tuple[float, int], ...]

    def __post_init__(self):
        groups = []
        seen = set()
        for i, (pi, count) in enumerate(self.groups):
            pi = float(pi)
            if not (0.0 < pi <= 1.0):
                raise ValueError(f"groups[{i}]: pi must be in (0, 1], got {pi}")
            if pi in seen:
                raise ValueError(f"groups[{i}]: duplicate pi value {pi}")
            seen.add(pi)
            count = int(count)
            if count < 0:
                raise ValueError(f"groups[{i}]: count must be >= 0, got {count}")
            groups.append((pi, count))
        object.__setattr__(self, "groups", tuple(groups))

    @classmethod
    def percent_grid(cls, group_sizes: Sequence[int]) -> "DiscretePopulation":
        """100 groups at pi = 0.01, 0.02, ..., 1.00 with the given sizes."""
        sizes = tuple(int(c) for c in group_sizes)
        if len(sizes) != 100:
            raise ValueError(f"percent_grid needs 100 group sizes, got {len(sizes)}")
        return cls(groups=tuple(((i + 1) / 100.0, c) for i, c in enumerate(sizes)))

    def size(self) -> int:
        return sum(c for _, c in self.groups)


@dataclass(frozen=True)
class SimulatedExperiment:
    """One synthetic run: first-period counts, the true censored pool, and
    realized daily counts for the days after the first period."""

    first_period: DailyCounts
    n0_true: int
    future_daily: tuple[int, ...]
    seed: int

    def realized_new_by_week(self) -> tuple[int, ...]:
        """Sum future daily counts into consecutive 7-day blocks."""
        daily = self.future_daily
        return tuple(
            sum(daily[i : i + 7]) for i in range(0, len(daily) - len(daily) % 7, 7)
        )


def expected_first_participation(pi: float, n: int, day: int) -> float:
    """Expected number out of ``n`` with daily probability ``pi`` whose first
    participation falls exactly on ``day``: (1-pi)^(day-1) * pi * n."""
    pi = float(pi)
    if not (0.0 < pi <= 1.0):
        raise ValueError(f"pi must be in (0, 1], got {pi}")
    n = int(n)
    if n < 0:
        raise ValueError(f"N must be >= 0, got {n}")
    day = int(day)
    if day < 1:
        raise ValueError(f"day must be >= 1, got {day}")
    return (1.0 - pi) ** (day - 1) * pi * n


def _first_days(pi: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Geometric first-participation days via inverse CDF; pi = 1 gives day 1.

    Returns float days (can be inf in principle); callers compare against a
    horizon, so no integer overflow concerns.
    """
    u = rng.random(pi.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        days = np.ceil(np.log(u) / np.log1p(-pi))
    # pi -> 1 drives the ratio to +-0.0; participation is then certain on day 1
    return np.maximum(days, 1.0)


def simulate_discrete(
    pop: DiscretePopulation, total_days: int, seed: int
) -> tuple[int, ...]:
    """Per-day counts of first participations over ``total_days`` days.

    Individuals whose first day falls beyond ``total_days`` are simply not
    counted anywhere.
    """
    total_days = int(total_days)
    if total_days < 1:
        raise ValueError(f"total_days must be >= 1, got {total_days}")
    rng = np.random.default_rng(seed)
    counts = np.zeros(total_days, dtype=np.int64)
    for pi, n in pop.groups:
        if n == 0:
            continue
        days = _first_days(np.full(n, pi), rng)
        in_range = days[days <= total_days].astype(np.int64)
        counts += np.bincount(in_range, minlength=total_days + 1)[1:]
    return tuple(int(c) for c in counts)


def simulate_beta_geometric(
    n: int,
    hp: HyperParams,
    first_period_d: int,
    total_days: int,
    seed: int,
) -> SimulatedExperiment:
    """Simulate ``n`` individuals with pi ~ Beta(alpha, beta) and geometric
    first days, split into first-period sufficient statistics, the true
    censored count, and realized daily counts after the first period."""
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    first_period_d = int(first_period_d)
    total_days = int(total_days)
    if first_period_d < 1:
        raise ValueError(f"first_period_d must be >= 1, got {first_period_d}")
    if total_days < first_period_d:
        raise ValueError(
            f"total_days ({total_days}) must be >= first_period_d ({first_period_d})"
        )
    if not isinstance(hp, HyperParams):
        hp = HyperParams(*hp)

    rng = np.random.default_rng(seed)
    pi = rng.beta(hp.alpha, hp.beta, size=n)
    days = _first_days(pi, rng)

    in_range = days[days <= total_days].astype(np.int64)
    per_day = np.bincount(in_range, minlength=total_days + 1)[1:]
    first = DailyCounts.from_counts(int(c) for c in per_day[:first_period_d])
    n0_true = n - first.total_participants()
    future = tuple(int(c) for c in per_day[first_period_d:])
    return SimulatedExperiment(
        first_period=first, n0_true=n0_true, future_daily=future, seed=int(seed)
    )
