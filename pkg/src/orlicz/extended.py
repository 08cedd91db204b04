"""Arithmetic on the extended half-line [0, inf].

Every place in the package that has to combine values which may be infinite
goes through these helpers, so the conventions live in one spot:

* ``inf - finite = inf`` and ``finite - inf = -inf``; ``inf - inf`` is never
  formed (callers exclude such pairs, the helper returns ``nan`` to make a
  slip visible).
* ``1 / 0 = inf`` and ``1 / inf = 0``.
* ``0 * inf = 0`` (measure-theoretic convention).
"""

from __future__ import annotations

import numpy as np

INF = float("inf")


def as_array(u) -> np.ndarray:
    return np.asarray(u, dtype=float)


def restore(result: np.ndarray, like):
    """Return a python float when the caller passed a scalar."""
    if np.ndim(like) == 0:
        return float(result)
    return result


def sub(a, b):
    a = as_array(a)
    b = as_array(b)
    with np.errstate(invalid="ignore"):
        return a - b


def recip(x):
    x = as_array(x)
    with np.errstate(divide="ignore"):
        out = np.where(x == 0.0, INF, 1.0 / np.where(x == 0.0, 1.0, x))
    return np.where(np.isinf(x), 0.0, out)


def mul(a, b):
    a = as_array(a)
    b = as_array(b)
    with np.errstate(invalid="ignore"):
        out = a * b
    return np.where((a == 0.0) | (b == 0.0), 0.0, out)


def fmt(x: float) -> str | float:
    """JSON-friendly rendering: infinities become the string ``"inf"``."""
    x = float(x)
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    if np.isnan(x):
        return "nan"
    return x
