"""Truncated Taylor series arithmetic.

A :class:`Jet` holds the coefficients ``c[k]`` of ``f(t0 + h) = sum c[k] h**k``.
Feeding a jet through an algebraic expression yields its exact Taylor
coefficients, so derivatives of the kernels at the endpoints carry rounding
error only.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np

Scalar = Union[float, int]


class Jet:
    __slots__ = ("c",)
    __array_priority__ = 1000

    def __init__(self, coeffs) -> None:
        self.c = np.asarray(coeffs, dtype=float)

    @classmethod
    def variable(cls, t0: float, order: int) -> "Jet":
        c = np.zeros(order + 1)
        c[0] = t0
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value: float, order: int) -> "Jet":
        c = np.zeros(order + 1)
        c[0] = value
        return cls(c)

    @property
    def order(self) -> int:
        return len(self.c) - 1

    def derivative(self, k: int) -> float:
        return float(self.c[k] * math.factorial(k))

    def derivatives(self, upto: int) -> np.ndarray:
        return np.array([self.derivative(k) for k in range(upto + 1)])

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(float(other), self.order)

    def __add__(self, other) -> "Jet":
        other = self._lift(other)
        return Jet(self.c + other.c)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(-self.c)

    def __sub__(self, other) -> "Jet":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Jet":
        return self._lift(other) - self

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.c * float(other))
        return Jet(np.convolve(self.c, other.c)[: len(self.c)])

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.c / float(other))
        b = other.c
        if b[0] == 0.0:
            raise ZeroDivisionError("jet division by a series vanishing at the expansion point")
        out = np.zeros_like(self.c)
        for k in range(len(out)):
            out[k] = (self.c[k] - np.dot(b[1 : k + 1], out[k - 1 :: -1][:k])) / b[0]
        return Jet(out)

    def __rtruediv__(self, other) -> "Jet":
        return self._lift(other) / self

    def __pow__(self, n: int) -> "Jet":
        if not isinstance(n, int) or n < 0:
            raise ValueError("jets support non-negative integer powers only")
        out = Jet.constant(1.0, self.order)
        for _ in range(n):
            out = out * self
        return out

    def sqrt(self) -> "Jet":
        a = self.c
        if a[0] <= 0.0:
            raise ValueError("jet square root needs a positive leading coefficient")
        s = np.zeros_like(a)
        s[0] = math.sqrt(a[0])
        for k in range(1, len(a)):
            acc = np.dot(s[1:k], s[k - 1 : 0 : -1]) if k > 1 else 0.0
            s[k] = (a[k] - acc) / (2.0 * s[0])
        return Jet(s)

    def shift_mul_t(self, t0: float) -> "Jet":
        """Multiply by the independent variable t = t0 + h."""
        return self * Jet.variable(t0, self.order)


def sqrt(x):
    """Square root that dispatches on jets and numpy values."""
    if isinstance(x, Jet):
        return x.sqrt()
    return np.sqrt(x)
