"""Age-of-Loop bookkeeping: per-feature ages in query-interval units.

Ages grow by one each interval and reset to 1 when delivered state feedback
closes the loop for a feature (the closing interval itself is one unit old).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import ConfigError, InputError


@dataclass(frozen=True)
class AolTracker:
    ages: tuple[int, ...]
    thresholds: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.ages) != len(self.thresholds):
            raise ConfigError("one threshold per feature is required")
        if any(a < 0 for a in self.ages):
            raise InputError("ages must be nonnegative")
        if any(t < 1 for t in self.thresholds):
            raise ConfigError("thresholds must be at least 1")

    @classmethod
    def fresh(cls, thresholds: Iterable[int]) -> "AolTracker":
        ts = tuple(int(t) for t in thresholds)
        return cls(ages=(0,) * len(ts), thresholds=ts)

    def tick(self) -> "AolTracker":
        """Every feature's loop ages by one interval."""
        return AolTracker(tuple(a + 1 for a in self.ages), self.thresholds)

    def close_loop(self, features: Iterable[int]) -> "AolTracker":
        """Reset the listed features to age 1; others are untouched."""
        closing = set(features)
        if any(k < 0 or k >= len(self.ages) for k in closing):
            raise InputError("feature index out of range")
        ages = tuple(1 if k in closing else a for k, a in enumerate(self.ages))
        return AolTracker(ages, self.thresholds)

    def violated(self) -> tuple[int, ...]:
        """Features whose age exceeds the tolerable maximum this interval."""
        return tuple(k for k, (a, t) in enumerate(zip(self.ages, self.thresholds)) if a > t)
