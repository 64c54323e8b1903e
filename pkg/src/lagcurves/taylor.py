"""Truncated Taylor arithmetic for exact high-order jets.

A :class:`Taylor` value stores normalized coefficients ``c[k] = f^(k)(t0)/k!``
with shape ``(K + 1, *shape)``, so a whole grid of expansion points is handled
at once. The numpy ufuncs sin, cos, sinh, cosh, exp, log, sqrt and power
dispatch here, which lets curve formulas written with ``np.sin`` etc. be
evaluated on floats, arrays or Taylor values alike.
"""

from math import factorial

import numpy as np


class Taylor:
    __array_priority__ = 100

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)

    @classmethod
    def variable(cls, t, order):
        t = np.asarray(t, dtype=float)
        c = np.zeros((order + 1,) + t.shape)
        c[0] = t
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value, order, shape=()):
        c = np.zeros((order + 1,) + np.broadcast_shapes(np.shape(value), shape))
        c[0] = value
        return cls(c)

    @property
    def order(self):
        return self.c.shape[0] - 1

    @property
    def shape(self):
        return self.c.shape[1:]

    def derivatives(self):
        """Array of ``f^(k)(t0)`` for k = 0..K."""
        f = np.array([factorial(k) for k in range(self.order + 1)], dtype=float)
        return self.c * f.reshape((-1,) + (1,) * (self.c.ndim - 1))

    def deriv(self):
        """Taylor expansion of the derivative (one order lower)."""
        k = np.arange(1, self.order + 1, dtype=float)
        return Taylor(self.c[1:] * k.reshape((-1,) + (1,) * (self.c.ndim - 1)))

    def truncate(self, order):
        return Taylor(self.c[: order + 1])

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Taylor(self.c[(slice(None),) + idx])

    def __repr__(self):
        return f"Taylor(order={self.order}, shape={self.shape})"

    # arithmetic

    def _lift(self, other):
        if isinstance(other, Taylor):
            return other
        other = np.asarray(other, dtype=float)
        c = np.zeros((self.order + 1,) + np.broadcast_shapes(other.shape, self.c.shape[1:]))
        c[0] = other
        return Taylor(c)

    @staticmethod
    def _align(a, b):
        k = min(a.order, b.order)
        return a.c[: k + 1], b.c[: k + 1]

    def __add__(self, other):
        if not isinstance(other, Taylor):
            c = self.c.copy() + 0.0 * np.asarray(other, dtype=float)
            c[0] = self.c[0] + other
            return Taylor(c)
        a, b = self._align(self, other)
        return Taylor(a + b)

    __radd__ = __add__

    def __neg__(self):
        return Taylor(-self.c)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Taylor):
            return Taylor(self.c * np.asarray(other, dtype=float))
        a, b = self._align(self, other)
        K = a.shape[0] - 1
        shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
        out = np.zeros((K + 1,) + shape)
        for k in range(K + 1):
            acc = np.zeros(shape)
            for j in range(k + 1):
                acc = acc + a[j] * b[k - j]
            out[k] = acc
        return Taylor(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Taylor):
            return Taylor(self.c / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self):
        a = self.c
        K = self.order
        out = np.zeros_like(a)
        out[0] = 1.0 / a[0]
        for k in range(1, K + 1):
            acc = np.zeros(a.shape[1:])
            for j in range(1, k + 1):
                acc = acc + a[j] * out[k - j]
            out[k] = -acc / a[0]
        return Taylor(out)

    def __pow__(self, p):
        if isinstance(p, Taylor):
            return np.exp(p * np.log(self))
        if float(p) == int(p) and int(p) >= 0:
            return self._ipow(int(p))
        if float(p) == int(p):
            return self._ipow(-int(p)).reciprocal()
        return self._rpow(float(p))

    def __rpow__(self, base):
        return np.exp(self * np.log(base))

    def _ipow(self, n):
        result = self._lift(np.ones(self.shape))
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def _rpow(self, p):
        # y = a^p satisfies a y' = p a' y
        a = self.c
        K = self.order
        out = np.zeros_like(a)
        out[0] = a[0] ** p
        for k in range(1, K + 1):
            acc = np.zeros(a.shape[1:])
            for j in range(1, k + 1):
                acc = acc + ((p + 1.0) * j - k) * a[j] * out[k - j]
            out[k] = acc / (k * a[0])
        return Taylor(out)

    # elementary functions

    def _exp(self):
        a = self.c
        out = np.zeros_like(a)
        out[0] = np.exp(a[0])
        for k in range(1, self.order + 1):
            acc = np.zeros(a.shape[1:])
            for j in range(1, k + 1):
                acc = acc + j * a[j] * out[k - j]
            out[k] = acc / k
        return Taylor(out)

    def _log(self):
        a = self.c
        out = np.zeros_like(a)
        out[0] = np.log(a[0])
        for k in range(1, self.order + 1):
            acc = np.zeros(a.shape[1:])
            for j in range(1, k):
                acc = acc + j * out[j] * a[k - j]
            out[k] = (a[k] - acc / k) / a[0]
        return Taylor(out)

    def _sincos(self, hyperbolic=False):
        a = self.c
        s = np.zeros_like(a)
        c = np.zeros_like(a)
        if hyperbolic:
            s[0], c[0] = np.sinh(a[0]), np.cosh(a[0])
        else:
            s[0], c[0] = np.sin(a[0]), np.cos(a[0])
        sign = 1.0 if hyperbolic else -1.0
        for k in range(1, self.order + 1):
            acc_s = np.zeros(a.shape[1:])
            acc_c = np.zeros(a.shape[1:])
            for j in range(1, k + 1):
                acc_s = acc_s + j * a[j] * c[k - j]
                acc_c = acc_c + j * a[j] * s[k - j]
            s[k] = acc_s / k
            c[k] = sign * acc_c / k
        return Taylor(s), Taylor(c)

    _UNARY = {
        "sin": lambda x: x._sincos()[0],
        "cos": lambda x: x._sincos()[1],
        "sinh": lambda x: x._sincos(True)[0],
        "cosh": lambda x: x._sincos(True)[1],
        "tan": lambda x: (lambda sc: sc[0] / sc[1])(x._sincos()),
        "tanh": lambda x: (lambda sc: sc[0] / sc[1])(x._sincos(True)),
        "exp": lambda x: x._exp(),
        "log": lambda x: x._log(),
        "sqrt": lambda x: x._rpow(0.5),
        "negative": lambda x: -x,
        "positive": lambda x: x,
        "square": lambda x: x * x,
        "reciprocal": lambda x: x.reciprocal(),
    }

    _BINARY = {
        "add": lambda a, b: a + b,
        "subtract": lambda a, b: a - b,
        "multiply": lambda a, b: a * b,
        "true_divide": lambda a, b: a / b,
        "divide": lambda a, b: a / b,
        "power": lambda a, b: a ** b,
    }

    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if method != "__call__" or kwargs:
            return NotImplemented
        name = ufunc.__name__
        if len(inputs) == 1 and name in self._UNARY:
            return self._UNARY[name](inputs[0])
        if len(inputs) == 2 and name in self._BINARY:
            a, b = inputs
            if name == "power" and not isinstance(a, Taylor):
                return a ** b if not isinstance(b, Taylor) else b.__rpow__(a)
            if not isinstance(a, Taylor):
                a = b._lift(a)
            return self._BINARY[name](a, b)
        return NotImplemented


def taylor_stack(components, order, shape=()):
    """Stack scalar-or-Taylor components into one Taylor with a trailing axis."""
    cs = []
    for comp in components:
        if isinstance(comp, Taylor):
            cs.append(comp.truncate(order).c)
        else:
            cs.append(Taylor.constant(comp, order, shape).c)
    full = np.broadcast_shapes(*[c.shape for c in cs])
    return Taylor(np.stack([np.broadcast_to(c, full) for c in cs], axis=-1))
