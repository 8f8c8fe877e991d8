"""Truncated Taylor arithmetic (forward-mode differentiation to fixed order).

A ``Jet`` of order n at points x stores c[j] = f^(j)(x) / j! for j <= n,
vectorised over an array of points.  Only the operations the weight
functions need are provided.
"""
from __future__ import annotations

import math

import numpy as np


class Jet:
    __slots__ = ("c",)

    def __init__(self, c):
        self.c = np.asarray(c, dtype=np.result_type(np.asarray(c).dtype, np.float64))

    @classmethod
    def variable(cls, x, order: int, scale: float = 1.0, shift: float = 0.0) -> "Jet":
        """The jet of u = scale * x + shift."""
        x = np.asarray(x, dtype=np.float64)
        c = np.zeros((order + 1,) + x.shape)
        c[0] = scale * x + shift
        if order >= 1:
            c[1] = scale
        return cls(c)

    @classmethod
    def constant(cls, value, order: int, shape=()) -> "Jet":
        c = np.zeros((order + 1,) + tuple(shape), dtype=np.result_type(value, np.float64))
        c[0] = value
        return cls(c)

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    def derivatives(self) -> np.ndarray:
        fact = np.array([math.factorial(j) for j in range(self.order + 1)], dtype=np.float64)
        return self.c * fact.reshape((-1,) + (1,) * (self.c.ndim - 1))

    # -- arithmetic
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        c = np.zeros_like(self.c, dtype=np.result_type(self.c, other))
        c[0] = other
        return Jet(c)

    def __add__(self, other):
        o = self._coerce(other)
        return Jet(self.c + o.c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        o = self._coerce(other)
        return Jet(self.c - o.c)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * other)
        n = self.order
        out = np.zeros(np.broadcast_shapes(self.c.shape, other.c.shape), dtype=np.result_type(self.c, other.c))
        for j in range(n + 1):
            for i in range(j + 1):
                out[j] += self.c[i] * other.c[j - i]
        return Jet(out)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        a = self.c
        n = self.order
        h = np.zeros_like(a)
        h[0] = 1.0 / a[0]
        for j in range(1, n + 1):
            s = np.zeros_like(a[0])
            for i in range(1, j + 1):
                s = s + a[i] * h[j - i]
            h[j] = -s * h[0]
        return Jet(h)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def exp(self) -> "Jet":
        a = self.c
        n = self.order
        h = np.zeros_like(a)
        h[0] = np.exp(a[0])
        for j in range(1, n + 1):
            s = np.zeros_like(a[0])
            for i in range(1, j + 1):
                s = s + i * a[i] * h[j - i]
            h[j] = s / j
        return Jet(h)

    def log(self) -> "Jet":
        a = self.c
        n = self.order
        h = np.zeros_like(a)
        h[0] = np.log(a[0])
        for j in range(1, n + 1):
            s = np.zeros_like(a[0])
            for i in range(1, j):
                s = s + i * h[i] * a[j - i]
            h[j] = (a[j] - s / j) / a[0]
        return Jet(h)

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            out = Jet.constant(1.0, self.order, self.c.shape[1:])
            for _ in range(int(p)):
                out = out * self
            return out
        # general real/complex power of a positive base
        return (self.log() * p).exp()
