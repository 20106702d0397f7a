"""Parameter ensembles represented by posterior draws.

A :class:`DrawMatrix` holds ``n`` units by ``S`` draws (unit-major). The
empirical CDF and its generalized inverse defined here are the plug-in
versions of each unit's posterior CDF and quantile function; every other
module goes through them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "ClassificationEstimate",
    "DecisionConfig",
    "DrawMatrix",
    "EnsembleError",
    "ExceedanceProfile",
    "count_at_or_below",
    "ecdf_at",
    "exceedance_profile",
    "quantile",
    "upper_tail_quantile",
]


class EnsembleError(ValueError):
    """Invalid ensemble input (shape, finiteness, identifiers, levels)."""


def _as_draws(draws: Sequence[float]) -> np.ndarray:
    arr = np.asarray(draws, dtype=float)
    if arr.ndim != 1:
        raise EnsembleError("draws for a unit must be one-dimensional")
    if arr.size == 0:
        raise EnsembleError("empty ensemble unit")
    return arr


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DrawMatrix:
    """Joint posterior draws of a parameter ensemble.

    ``draws[i, s]`` is draw ``s`` of unit ``i``. Non-finite values, duplicate
    identifiers and empty shapes are rejected here so that downstream
    operations never have to re-check.
    """

    unit_ids: tuple[str, ...]
    draws: np.ndarray

    def __init__(self, unit_ids: Sequence[str], draws) -> None:
        ids = tuple(str(u) for u in unit_ids)
        arr = np.asarray(draws, dtype=float)
        if arr.ndim != 2:
            raise EnsembleError(f"draws must be a 2-D array, got shape {arr.shape}")
        n, S = arr.shape
        if n < 1:
            raise EnsembleError("a draw matrix needs at least one unit")
        if S < 1:
            raise EnsembleError("empty ensemble unit")
        if len(ids) != n:
            raise EnsembleError(f"{len(ids)} unit ids for {n} rows of draws")
        if len(set(ids)) != n:
            seen: set[str] = set()
            dup = next(u for u in ids if u in seen or seen.add(u))
            raise EnsembleError(f"duplicate unit id {dup!r}")
        if not np.all(np.isfinite(arr)):
            i, s = np.argwhere(~np.isfinite(arr))[0]
            raise EnsembleError(
                f"non-finite draw {arr[i, s]} for unit {ids[i]!r} at draw {s}"
            )
        object.__setattr__(self, "unit_ids", ids)
        object.__setattr__(self, "draws", _readonly(arr))
        object.__setattr__(self, "_sorted", None)

    @property
    def n(self) -> int:
        return self.draws.shape[0]

    @property
    def S(self) -> int:
        return self.draws.shape[1]

    @property
    def sorted_draws(self) -> np.ndarray:
        """Per-unit ascending draws, computed once."""
        cached = self._sorted
        if cached is None:
            cached = _readonly(np.sort(self.draws, axis=1))
            object.__setattr__(self, "_sorted", cached)
        return cached

    def unit(self, unit_id: str) -> np.ndarray:
        return self.draws[self.unit_ids.index(unit_id)]

    def counts_at_or_below(self, x: float) -> np.ndarray:
        """Number of draws ``<= x`` for every unit (integer array)."""
        srt = self.sorted_draws
        return np.array(
            [np.searchsorted(row, x, side="right") for row in srt], dtype=np.int64
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DrawMatrix):
            return NotImplemented
        return self.unit_ids == other.unit_ids and np.array_equal(
            self.draws, other.draws
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class DecisionConfig:
    """Threshold ``C`` and false-positive weight ``p`` of a TCL_p problem."""

    threshold: float
    weight: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "threshold", float(self.threshold))
        object.__setattr__(self, "weight", float(self.weight))
        if not math.isfinite(self.threshold):
            raise EnsembleError("threshold must be finite")
        if not 0.0 <= self.weight <= 1.0:
            raise EnsembleError(f"weight must lie in [0, 1], got {self.weight}")


@dataclass(frozen=True)
class ClassificationEstimate:
    """Per-unit point estimates and the above/below labels they induce.

    ``estimates`` may be ``None`` when only labels are known (for example a
    labels file handed to the CLI); ``labels[i]`` is True for "above".
    """

    unit_ids: tuple[str, ...]
    labels: np.ndarray
    threshold: float
    estimates: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        ids = tuple(str(u) for u in self.unit_ids)
        labels = np.asarray(self.labels, dtype=bool)
        if labels.shape != (len(ids),):
            raise EnsembleError("labels must have one entry per unit")
        object.__setattr__(self, "unit_ids", ids)
        object.__setattr__(self, "labels", _readonly(labels))
        object.__setattr__(self, "threshold", float(self.threshold))
        if self.estimates is not None:
            est = np.asarray(self.estimates, dtype=float)
            if est.shape != (len(ids),):
                raise EnsembleError("estimates must have one entry per unit")
            if not np.all(np.isfinite(est)):
                raise EnsembleError("estimates must be finite")
            if not np.array_equal(est > self.threshold, labels):
                raise EnsembleError("labels disagree with estimates > threshold")
            object.__setattr__(self, "estimates", _readonly(est))

    @classmethod
    def from_estimates(
        cls, unit_ids: Sequence[str], estimates, threshold: float
    ) -> "ClassificationEstimate":
        est = np.asarray(estimates, dtype=float)
        return cls(tuple(unit_ids), est > threshold, threshold, est)

    @classmethod
    def from_labels(
        cls, unit_ids: Sequence[str], labels, threshold: float
    ) -> "ClassificationEstimate":
        return cls(tuple(unit_ids), np.asarray(labels, dtype=bool), threshold)

    def labels_at(self, threshold: float) -> np.ndarray:
        """Labels relative to ``threshold``.

        Estimates are re-thresholded; a labels-only estimate is only valid
        for the threshold it was made for.
        """
        if self.estimates is not None:
            return self.estimates > threshold
        if threshold != self.threshold:
            raise EnsembleError(
                f"labels were made for threshold {self.threshold}, not {threshold}"
            )
        return np.array(self.labels)


@dataclass(frozen=True)
class ExceedanceProfile:
    unit_ids: tuple[str, ...]
    counts_at_or_below: np.ndarray
    S: int
    prob_above: np.ndarray = field(init=False)
    prob_at_or_below: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        k = np.asarray(self.counts_at_or_below, dtype=np.int64)
        object.__setattr__(self, "counts_at_or_below", _readonly(k))
        object.__setattr__(self, "prob_at_or_below", _readonly(k / self.S))
        object.__setattr__(self, "prob_above", _readonly((self.S - k) / self.S))


def count_at_or_below(draws_for_unit: Sequence[float], x: float) -> int:
    return int(np.count_nonzero(_as_draws(draws_for_unit) <= x))


def ecdf_at(draws_for_unit: Sequence[float], x: float) -> float:
    """Empirical CDF ``#{s: draw_s <= x} / S`` (right-continuous)."""
    arr = _as_draws(draws_for_unit)
    return int(np.count_nonzero(arr <= x)) / arr.size


def quantile(draws_for_unit: Sequence[float], q: float) -> float:
    """Type-1 quantile: the smallest draw ``x`` with ``ecdf_at(x) >= q``.

    No interpolation. ``q = 0`` gives the minimum and ``q = 1`` the maximum.
    """
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise EnsembleError(f"invalid quantile level {q}")
    srt = np.sort(_as_draws(draws_for_unit))
    S = srt.size
    # ECDF at the k-th order statistic is at least k/S; compare in the
    # same float arithmetic as ecdf_at so the two stay Galois-consistent.
    levels = np.arange(1, S + 1) / S
    k = int(np.searchsorted(levels, q, side="left"))
    return float(srt[min(k, S - 1)])


def _upper_tail_index(S: int, tail: float) -> int:
    """Smallest 0-based order index ``k`` whose upper-tail mass ``(S-k-1)/S``
    does not exceed ``tail``."""
    # (S - m)/S <= tail  <=>  m >= S - tail*S, evaluated exactly in rationals
    m = S - math.floor(Fraction(tail) * S)
    return max(m, 1) - 1


def upper_tail_quantile(draws_for_unit: Sequence[float], tail: float) -> float:
    """Type-1 ``(1 - tail)``-quantile computed from the upper-tail mass.

    Equals ``quantile(draws, 1 - tail)`` except where forming ``1 - tail`` in
    floating point would round; here the level is handled exactly, so that
    for ``tail < 1`` the result exceeds ``C`` exactly when the fraction of
    draws above ``C`` exceeds ``tail``.
    """
    tail = float(tail)
    if not 0.0 <= tail <= 1.0:
        raise EnsembleError(f"invalid quantile level {1.0 - tail}")
    srt = np.sort(_as_draws(draws_for_unit))
    return float(srt[_upper_tail_index(srt.size, tail)])


def matrix_upper_tail_quantiles(m: DrawMatrix, tail: float) -> np.ndarray:
    tail = float(tail)
    if not 0.0 <= tail <= 1.0:
        raise EnsembleError(f"invalid quantile level {1.0 - tail}")
    return m.sorted_draws[:, _upper_tail_index(m.S, tail)].copy()


def exceedance_profile(m: DrawMatrix, C: float) -> ExceedanceProfile:
    """Plug-in posterior masses above and at-or-below ``C`` for every unit.

    A draw equal to ``C`` counts as at-or-below.
    """
    C = float(C)
    if not math.isfinite(C):
        raise EnsembleError("threshold must be finite")
    return ExceedanceProfile(m.unit_ids, m.counts_at_or_below(C), m.S)
