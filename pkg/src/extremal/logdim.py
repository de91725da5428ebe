"""Magnitudes stored as base-2 logarithms.

Quantities such as ``2**(10**12)`` or ``exp(-10**34)`` are far outside the
float64 range, but their exponents are ordinary numbers. :class:`LogDim`
keeps only ``log2(magnitude)`` and implements sums and comparisons on that
representation. The magnitude zero is ``log2 = -inf``.

Precision contract: ``log2_value`` is a float64, so a result is exact to
about 16 significant digits *of the exponent*.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import total_ordering

import numpy as np

from .errors import ArgumentError, DomainError

LN2 = math.log(2.0)
_SECONDS_PER_YEAR = 365 * 24 * 3600


@total_ordering
@dataclass(frozen=True)
class LogDim:
    """A nonnegative magnitude represented by its base-2 logarithm."""

    log2_value: float

    def __post_init__(self):
        v = float(self.log2_value)
        if math.isnan(v) or v == math.inf:
            raise DomainError(f"log2 value must be finite or -inf, got {self.log2_value!r}")
        object.__setattr__(self, "log2_value", v)

    @classmethod
    def zero(cls) -> "LogDim":
        return cls(-math.inf)

    @classmethod
    def from_value(cls, x: float) -> "LogDim":
        if x < 0 or math.isnan(x):
            raise DomainError(f"magnitude must be >= 0, got {x!r}")
        return cls(math.log2(x)) if x > 0 else cls.zero()

    @classmethod
    def from_ln(cls, ln_value: float) -> "LogDim":
        return cls(ln_value / LN2)

    @property
    def is_zero(self) -> bool:
        return self.log2_value == -math.inf

    @property
    def ln_value(self) -> float:
        return self.log2_value * LN2

    def magnitude(self) -> float:
        """The plain float value; overflows to ``inf`` above ~2**1024."""
        try:
            return 2.0**self.log2_value
        except OverflowError:
            return math.inf

    def __lt__(self, other):
        if not isinstance(other, LogDim):
            return NotImplemented
        return self.log2_value < other.log2_value

    def __add__(self, other):
        if not isinstance(other, LogDim):
            return NotImplemented
        return logdim_sum([self, other])

    def __mul__(self, other):
        if not isinstance(other, LogDim):
            return NotImplemented
        return LogDim(self.log2_value + other.log2_value)

    def __truediv__(self, other):
        if not isinstance(other, LogDim):
            return NotImplemented
        if other.is_zero:
            raise ZeroDivisionError("division by a zero magnitude")
        return LogDim(self.log2_value - other.log2_value)

    def __float__(self):
        return self.log2_value

    def __repr__(self):
        return f"LogDim(log2={self.log2_value!r})"


class LogDimArray(Sequence):
    """Immutable vector of base-2 log magnitudes; items are :class:`LogDim`."""

    def __init__(self, log2_values):
        arr = np.array(log2_values, dtype=float)
        if arr.ndim != 1:
            raise ArgumentError("LogDimArray expects a one-dimensional sequence")
        if np.any(np.isnan(arr) | (arr == np.inf)):
            raise DomainError("log2 values must be finite or -inf")
        arr.setflags(write=False)
        self.log2 = arr

    def __len__(self):
        return len(self.log2)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return LogDimArray(self.log2[i])
        return LogDim(self.log2[i])

    def max(self) -> LogDim:
        return LogDim(self.log2.max()) if len(self) else LogDim.zero()

    def sorted_desc(self) -> "LogDimArray":
        return LogDimArray(np.sort(self.log2)[::-1])

    def __repr__(self):
        return f"LogDimArray(n={len(self)}, max_log2={self.max().log2_value!r})"


def log2_sum_exp2(x, axis=None):
    """``log2(sum(2**x))`` along ``axis``, anchored at the maximum.

    ``-inf`` entries are zeros; an empty or all-zero reduction gives ``-inf``.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return -math.inf if axis is None else np.full(np.delete(x.shape, axis), -np.inf)
    top = np.max(x, axis=axis, keepdims=True)
    safe_top = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(invalid="ignore"):
        total = np.sum(np.exp2(x - safe_top), axis=axis, keepdims=True)
    with np.errstate(divide="ignore"):
        out = np.log2(total) + safe_top
    out = np.where(np.isneginf(top), -np.inf, out)
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def logdim_sum(values) -> LogDim:
    """Sum of magnitudes, computed entirely in the log domain.

    Terms are scaled by the largest element before summation and summed with
    ``math.fsum`` (correctly rounded), which makes the result independent of
    input order. Addends too small to register relative to the largest term
    are absorbed.
    """
    logs = [v.log2_value if isinstance(v, LogDim) else float(v) for v in values]
    if not logs:
        return LogDim.zero()
    top = max(logs)
    if top == -math.inf:
        return LogDim.zero()
    total = math.fsum(2.0 ** (v - top) for v in logs)
    return LogDim(top + math.log2(total))


def _check_sorted(bits: np.ndarray, axis=-1):
    if bits.shape[axis] < 2:
        raise ArgumentError("need at least two values")
    if np.any(np.diff(bits, axis=axis) > 0):
        raise ArgumentError("input must be sorted in descending order")
    if np.any(np.isnan(bits)):
        raise ArgumentError("input contains NaN")


def dominance_fraction(sorted_bits) -> LogDim:
    """Share of ``sum(2**X_i)`` lying outside the largest term.

    Returns ``log2(sum_{i>=2} 2**X_i / 2**X_1)`` for a descending sequence
    ``X_1 >= X_2 >= ...``. The result never exceeds
    :func:`dominance_bound` (``log2(N-1) + X_2 - X_1``): the rest-sum is
    anchored at ``X_2`` so every scaled term is at most 1 and the rounded
    sum cannot exceed ``N - 1``.
    """
    bits = np.asarray(sorted_bits, dtype=float)
    if bits.ndim != 1:
        raise ArgumentError("expected a one-dimensional sequence")
    _check_sorted(bits)
    gap = bits[1] - bits[0]
    rest = math.fsum(np.exp2(bits[1:] - bits[1]).tolist())
    return LogDim(gap + math.log2(rest))


def dominance_bound(sorted_bits) -> LogDim:
    """Analytic upper bound ``log2(N-1) + X_2 - X_1`` on the dominance fraction."""
    bits = np.asarray(sorted_bits, dtype=float)
    _check_sorted(bits)
    gap = bits[1] - bits[0]
    return LogDim(gap + math.log2(len(bits) - 1))


def dominance_fraction_rows(bits) -> np.ndarray:
    """Row-wise :func:`dominance_fraction` (log2 values) for a 2-D array.

    Rows need not be sorted.
    """
    bits = np.asarray(bits, dtype=float)
    if bits.ndim != 2 or bits.shape[1] < 2:
        raise ArgumentError("expected a 2-D array with at least two columns")
    srt = -np.sort(-bits, axis=1)
    gap = srt[:, 1] - srt[:, 0]
    rest = np.sum(np.exp2(srt[:, 1:] - srt[:, 1:2]), axis=1)
    return gap + np.log2(rest)


def nat_to_log2(ln_value: float) -> LogDim:
    """Re-express a natural-log magnitude in base 2."""
    return LogDim.from_ln(ln_value)


def extremal_amplitude_log2(rate: float, lifetime: float, branches_per_event: int = 2) -> LogDim:
    """Amplitude of one branch after ``rate * lifetime`` equal-amplitude splits.

    Each event splits into ``branches_per_event`` branches of equal weight,
    so the log2 amplitude is ``-rate * lifetime * log2(branches_per_event)``.
    ``lifetime`` is in seconds.
    """
    if not rate > 0 or not lifetime > 0:
        raise DomainError("rate and lifetime must be positive")
    if branches_per_event < 2:
        raise DomainError("need at least two branches per event")
    return LogDim(-float(rate) * float(lifetime) * math.log2(branches_per_event))


def years_to_seconds(years: float) -> float:
    """Convert years of 365 days to seconds."""
    return float(years) * _SECONDS_PER_YEAR
