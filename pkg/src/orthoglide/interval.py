"""Vectorised interval arithmetic with outward rounding.

An :class:`Interval` holds numpy arrays ``lo`` and ``hi`` of equal shape,
so one object can carry the enclosures of a whole batch of boxes.  Every
operation rounds its result outward by one ulp (``np.nextafter``), which
keeps enclosures sound under IEEE round-to-nearest.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Interval", "sqr", "sqrt", "hull"]


def _down(x):
    return np.nextafter(x, -np.inf)


def _up(x):
    return np.nextafter(x, np.inf)


class Interval:
    __slots__ = ("lo", "hi")
    __array_priority__ = 1000

    def __init__(self, lo, hi=None):
        lo = np.asarray(lo, dtype=float)
        hi = lo if hi is None else np.asarray(hi, dtype=float)
        lo, hi = np.broadcast_arrays(lo, hi)
        if np.any(lo > hi):
            raise ValueError("interval lower bound exceeds upper bound")
        self.lo = lo
        self.hi = hi

    @classmethod
    def _raw(cls, lo, hi):
        obj = cls.__new__(cls)
        obj.lo = lo
        obj.hi = hi
        return obj

    def __repr__(self):
        if self.lo.ndim == 0:
            return f"Interval([{self.lo}, {self.hi}])"
        return f"Interval(shape={self.lo.shape})"

    @property
    def mid(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def rad(self):
        # upper bound of the half width
        return _up(0.5 * (self.hi - self.lo))

    @property
    def width(self):
        return self.hi - self.lo

    def __getitem__(self, idx):
        return Interval._raw(self.lo[idx], self.hi[idx])

    def contains(self, x):
        return (self.lo <= x) & (x <= self.hi)

    @staticmethod
    def _coerce(other):
        if isinstance(other, Interval):
            return other
        x = np.asarray(other, dtype=float)
        return Interval._raw(x, x)

    def __neg__(self):
        return Interval._raw(-self.hi, -self.lo)

    def __add__(self, other):
        o = self._coerce(other)
        return Interval._raw(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return Interval._raw(_down(self.lo - o.hi), _up(self.hi - o.lo))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        prods = np.stack(
            [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi]
        )
        # 0 * inf yields nan; those products contribute 0
        prods = np.where(np.isnan(prods), 0.0, prods)
        return Interval._raw(_down(prods.min(axis=0)), _up(prods.max(axis=0)))

    __rmul__ = __mul__

    def reciprocal(self):
        """``1/x``; intervals containing zero map to (-inf, inf)."""
        spans_zero = (self.lo <= 0) & (self.hi >= 0)
        with np.errstate(divide="ignore"):
            lo = np.where(spans_zero, -np.inf, _down(1.0 / self.hi))
            hi = np.where(spans_zero, np.inf, _up(1.0 / self.lo))
        return Interval._raw(lo, hi)

    def __truediv__(self, other):
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()


def sqr(x: Interval) -> Interval:
    """Exact range of ``x**2`` (tighter than ``x * x``)."""
    a2 = x.lo * x.lo
    b2 = x.hi * x.hi
    spans_zero = (x.lo <= 0) & (x.hi >= 0)
    lo = np.where(spans_zero, 0.0, np.minimum(a2, b2))
    hi = np.maximum(a2, b2)
    return Interval._raw(np.maximum(_down(lo), 0.0), _up(hi))


def sqrt(x: Interval) -> Interval:
    """Square root over the non-negative part of ``x``."""
    lo = np.sqrt(np.maximum(x.lo, 0.0))
    hi = np.sqrt(np.maximum(x.hi, 0.0))
    return Interval._raw(np.maximum(_down(lo), 0.0), _up(hi))


def hull(*xs: Interval) -> Interval:
    return Interval._raw(
        np.minimum.reduce([x.lo for x in xs]), np.maximum.reduce([x.hi for x in xs])
    )
