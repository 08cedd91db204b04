"""Young functions with values in [0, inf].

A Young function is convex, non-decreasing, vanishes at zero and may jump to
``inf``.  Each closed-form family is a frozen dataclass so instances are
hashable and compare structurally (the expression language relies on this).

All evaluation methods are vectorised: they accept a scalar or an array and
return the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .extended import INF, as_array, recip, restore


class YoungFunction:
    """Base class; subclasses implement the closed-form pieces."""

    # --- to be provided by subclasses -------------------------------------

    def _eval(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _inverse(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def a_phi(self) -> float:
        raise NotImplementedError

    @property
    def b_phi(self) -> float:
        raise NotImplementedError

    @property
    def finite_at_b(self) -> bool:
        return True

    def kinks(self) -> tuple[float, ...]:
        """Points where the function is not differentiable (finite ones)."""
        return ()

    # --- shared behaviour ---------------------------------------------------

    def evaluate(self, u):
        arr = as_array(u)
        with np.errstate(over="ignore", invalid="ignore"):
            out = self._eval(arr)
        return restore(out, u)

    __call__ = evaluate

    def evaluate_left(self, u):
        """Left limit ``lim_{t -> u-} phi(t)``; differs from :meth:`evaluate`
        only at ``u = b_phi`` when ``phi(b_phi) = inf``."""
        arr = as_array(u)
        with np.errstate(over="ignore", invalid="ignore"):
            out = self._eval_left(arr)
        return restore(out, u)

    def _eval_left(self, u: np.ndarray) -> np.ndarray:
        return self._eval(u)

    def right_inverse(self, v):
        """``inf{u >= 0 : phi(u) > v}``.

        At ``v = inf`` the set is empty; we return the limit ``b_phi`` of the
        inverse as ``v`` grows, which is ``inf`` for finite-valued functions.
        """
        arr = as_array(v)
        if np.any(arr < 0):
            raise ValueError("right_inverse is defined for v >= 0")
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            out = self._inverse(np.where(np.isinf(arr), 0.0, arr))
        out = np.where(np.isinf(arr), self.b_phi, out)
        return restore(out, v)

    def degeneracy_params(self) -> tuple[float, float, bool]:
        return self.a_phi, self.b_phi, self.finite_at_b

    def is_infinite_at(self, u, left: bool = False) -> np.ndarray:
        """True where the value is a genuine ``inf`` (not a float overflow)."""
        u = as_array(u)
        b = self.b_phi
        if left or self.finite_at_b:
            return u > b
        return u >= b


# ---------------------------------------------------------------------------
# closed-form families


@dataclass(frozen=True)
class Power(YoungFunction):
    """``scale * u**p`` with ``p >= 1``."""

    p: float
    scale: float = 1.0

    def __post_init__(self):
        if not self.p >= 1.0:
            raise ValueError(f"Power needs p >= 1, got {self.p}")
        if not self.scale > 0.0:
            raise ValueError(f"Power needs scale > 0, got {self.scale}")

    def _eval(self, u):
        return self.scale * u**self.p

    def _inverse(self, v):
        return (v / self.scale) ** (1.0 / self.p)

    a_phi = property(lambda self: 0.0)
    b_phi = property(lambda self: INF)


@dataclass(frozen=True)
class ExpMinusOne(YoungFunction):
    """``scale * (exp(u) - 1)``."""

    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0.0:
            raise ValueError(f"ExpMinusOne needs scale > 0, got {self.scale}")

    def _eval(self, u):
        return self.scale * np.expm1(u)

    def _inverse(self, v):
        return np.log1p(v / self.scale)

    a_phi = property(lambda self: 0.0)
    b_phi = property(lambda self: INF)


@dataclass(frozen=True)
class LinearAboveKnee(YoungFunction):
    """``max(0, u - knee)``."""

    knee: float

    def __post_init__(self):
        if not self.knee >= 0.0:
            raise ValueError(f"knee must be >= 0, got {self.knee}")

    def _eval(self, u):
        return np.maximum(0.0, u - self.knee)

    def _inverse(self, v):
        return self.knee + v

    a_phi = property(lambda self: float(self.knee))
    b_phi = property(lambda self: INF)

    def kinks(self):
        return (float(self.knee),) if self.knee > 0 else ()


@dataclass(frozen=True)
class Identity(YoungFunction):
    def _eval(self, u):
        return u.copy()

    def _inverse(self, v):
        return v.copy()

    a_phi = property(lambda self: 0.0)
    b_phi = property(lambda self: INF)


# ---------------------------------------------------------------------------
# piecewise-linear machinery shared by Piecewise and SampledYoung


def _split_finite(xs: np.ndarray, ys: np.ndarray):
    finite = np.isfinite(ys)
    n_fin = int(np.argmin(finite)) if not finite.all() else len(ys)
    return xs[:n_fin], ys[:n_fin], n_fin < len(ys)


def _pl_eval(xs, ys, tail_inf, u, left=False):
    """Linear interpolation on finite data, linear extrapolation past the
    last node unless the data ends in an ``inf`` suffix."""
    out = np.interp(u, xs, ys)
    last = xs[-1]
    beyond = u > last
    if tail_inf:
        out = np.where(beyond, INF, out)
    elif len(xs) > 1:
        slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
        out = np.where(beyond, ys[-1] + slope * (u - last), out)
    return out


def _pl_inverse(xs, ys, tail_inf, v):
    k = np.searchsorted(ys, v, side="right")  # first node with value > v
    n = len(xs)
    kk = np.clip(k, 1, n - 1) if n > 1 else np.zeros_like(k)
    if n > 1:
        x0, x1 = xs[kk - 1], xs[kk]
        y0, y1 = ys[kk - 1], ys[kk]
        with np.errstate(divide="ignore", invalid="ignore"):
            inside = x0 + (v - y0) / (y1 - y0) * (x1 - x0)
    else:
        inside = np.zeros_like(v)
    if tail_inf:
        past = np.full_like(v, xs[-1])
    elif n > 1:
        slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
        with np.errstate(divide="ignore"):
            past = xs[-1] + (v - ys[-1]) / slope if slope > 0 else np.full_like(v, INF)
    else:
        past = np.full_like(v, INF)
    return np.where(k >= n, past, inside)


def _pl_a(xs, ys, tail_inf):
    zero = np.nonzero(ys == 0.0)[0]
    last_zero = int(zero[-1])
    if last_zero == len(xs) - 1:
        # flat at zero up to the end of the data: either b or a degenerate tail
        return float(xs[-1])
    return float(xs[last_zero])


def _pl_check(xs, ys, what: str):
    if len(xs) < 1 or xs[0] != 0.0 or ys[0] != 0.0:
        raise ValueError(f"{what} must start at (0, 0)")
    if np.any(np.diff(xs) <= 0):
        raise ValueError(f"{what} breakpoints must be strictly increasing")
    fx, fy, tail = _split_finite(xs, ys)
    if np.any(~np.isfinite(ys[len(fx):])) and not np.all(np.isinf(ys[len(fx):])):
        raise ValueError(f"{what}: once infinite, values must stay infinite")
    if np.any(np.diff(fy) < 0):
        raise ValueError(f"{what} values must be non-decreasing")
    if len(fx) >= 3:
        slopes = np.diff(fy) / np.diff(fx)
        scale = np.maximum(np.abs(slopes[1:]), 1.0)
        if np.any(np.diff(slopes) < -1e-12 * scale):
            raise ValueError(f"{what} values must be convex")
    if not tail and np.all(fy == 0.0):
        raise ValueError(f"{what} is identically zero, which is not a Young function")
    return fx, fy, tail


@dataclass(frozen=True)
class Piecewise(YoungFunction):
    """Linear interpolation through ``(u, value)`` breakpoints.

    Values may end in an ``inf`` suffix; the function is then ``inf`` strictly
    after the last finite breakpoint.  Without such a suffix the last segment
    is extended linearly.
    """

    points: tuple[tuple[float, float], ...]
    _cache: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        pts = tuple((float(a), float(b)) for a, b in self.points)
        object.__setattr__(self, "points", pts)
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        object.__setattr__(self, "_cache", _pl_check(xs, ys, "Piecewise"))

    def _eval(self, u):
        return _pl_eval(*self._cache, u)

    def _inverse(self, v):
        return _pl_inverse(*self._cache, v)

    @property
    def a_phi(self):
        return _pl_a(*self._cache)

    @property
    def b_phi(self):
        xs, _, tail = self._cache
        return float(xs[-1]) if tail else INF

    def kinks(self):
        xs = self._cache[0]
        return tuple(float(x) for x in xs[1:])


# ---------------------------------------------------------------------------
# combinators


@dataclass(frozen=True)
class Dilated(YoungFunction):
    """``inner(a * u)``."""

    inner: YoungFunction
    a: float

    def __post_init__(self):
        if not self.a > 0.0:
            raise ValueError(f"dilation factor must be > 0, got {self.a}")

    def _eval(self, u):
        return self.inner._eval(self.a * u)

    def _eval_left(self, u):
        return self.inner._eval_left(self.a * u)

    def _inverse(self, v):
        return self.inner._inverse(v) / self.a

    a_phi = property(lambda self: self.inner.a_phi / self.a)
    b_phi = property(lambda self: self.inner.b_phi / self.a)
    finite_at_b = property(lambda self: self.inner.finite_at_b)

    def kinks(self):
        return tuple(k / self.a for k in self.inner.kinks())


@dataclass(frozen=True)
class CutOff(YoungFunction):
    """``inner`` on ``[0, b)``, ``value_at_b`` at ``b`` and ``inf`` beyond."""

    inner: YoungFunction
    b: float
    value_at_b: float = INF

    def __post_init__(self):
        if not self.b > 0.0:
            raise ValueError(f"cut-off point must be > 0, got {self.b}")
        if self.b > self.inner.b_phi:
            raise ValueError("cut-off point lies beyond where the inner function is finite")
        left = float(self.inner.evaluate_left(self.b))
        if not self.value_at_b >= left:
            raise ValueError(
                f"value at the cut-off ({self.value_at_b}) is below the left limit {left}"
            )

    def _eval(self, u):
        inner = self.inner._eval(np.minimum(u, self.b))
        return np.where(u < self.b, inner, np.where(u == self.b, self.value_at_b, INF))

    def _eval_left(self, u):
        inner = self.inner._eval_left(np.minimum(u, self.b))
        return np.where(u <= self.b, inner, INF)

    def _inverse(self, v):
        return np.minimum(self.inner._inverse(v), self.b)

    a_phi = property(lambda self: min(self.inner.a_phi, self.b))
    b_phi = property(lambda self: float(self.b))
    finite_at_b = property(lambda self: bool(np.isfinite(self.value_at_b)))

    def kinks(self):
        return tuple(k for k in self.inner.kinks() if k < self.b) + (float(self.b),)


# ---------------------------------------------------------------------------
# convenient constructors


def linfty_generator(c: float = 1.0) -> YoungFunction:
    """0 on ``[0, c]`` and ``inf`` above; its Orlicz space is ``L^inf``."""
    return CutOff(LinearAboveKnee(c), c, 0.0)


def infinite_generator() -> YoungFunction:
    """``inf`` for every ``u > 0``; its Orlicz space is ``{0}``."""
    return Piecewise(((0.0, 0.0), (1.0, INF)))


def dilate(phi: YoungFunction, a: float) -> YoungFunction:
    return Dilated(phi, float(a))


def fundamental_function(phi, t):
    """Norm of a characteristic function of a set of measure ``t``."""
    t = as_array(t)
    if np.any(t <= 0):
        raise ValueError("fundamental function needs t > 0")
    with np.errstate(divide="ignore", over="ignore"):
        out = recip(phi.right_inverse(1.0 / t))
    return restore(out, t)


# ---------------------------------------------------------------------------
# sampled representation


@dataclass(frozen=True)
class GridSpec:
    """Log-spaced grid on ``[u_min, u_max]`` with ``0`` prepended."""

    u_min: float = 1e-6
    u_max: float = 1e6
    n: int = 4097

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("grid needs at least 2 points")
        if not 0.0 < self.u_min < self.u_max:
            raise ValueError("grid needs 0 < u_min < u_max")

    def points(self) -> np.ndarray:
        pts = np.logspace(math.log10(self.u_min), math.log10(self.u_max), self.n)
        pts[0], pts[-1] = self.u_min, self.u_max
        return np.concatenate([[0.0], pts])


@dataclass(frozen=True, eq=False)
class SampledYoung(YoungFunction):
    """Piecewise-linear carrier of a Young function on a fixed grid."""

    grid: np.ndarray
    values: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.shape != values.shape or grid.ndim != 1:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        fx, fy, tail = _split_finite(grid, values)
        object.__setattr__(self, "_fin", (fx, fy, tail))

    def _eval(self, u):
        fx, fy, tail = self._fin
        if len(fx) == 0:
            return np.full_like(u, INF)
        return _pl_eval(fx, fy, tail, u)

    def _inverse(self, v):
        fx, fy, tail = self._fin
        if len(fx) == 0:
            return np.zeros_like(v)
        return _pl_inverse(fx, fy, tail, v)

    @property
    def a_phi(self):
        fx, fy, tail = self._fin
        if len(fx) == 0:
            return 0.0
        return _pl_a(fx, fy, tail)

    @property
    def b_phi(self):
        fx, _, tail = self._fin
        if len(fx) == 0:
            return 0.0
        return float(fx[-1]) if tail else INF

    def kinks(self):
        return tuple(float(x) for x in self._fin[0][1:])

    def infinite_from(self) -> int:
        """Index of the first ``inf`` value (``len`` when all finite)."""
        return len(self._fin[0])

    def is_discretely_convex(self, rtol: float = 1e-12) -> bool:
        fx, fy, _ = self._fin
        if np.any(np.diff(fy) < 0):
            return False
        if len(fx) < 3:
            return True
        slopes = np.diff(fy) / np.diff(fx)
        return bool(np.all(np.diff(slopes) >= -rtol * np.maximum(np.abs(slopes[1:]), 1e-300)))

    def invariant_problems(self) -> list[str]:
        problems = []
        finite = np.isfinite(self.values)
        if finite.any() and not finite[: self.infinite_from()].all():
            problems.append("inf values do not form a suffix")
        if np.any(~finite[: self.infinite_from()]):
            problems.append("non-finite value inside the finite region")
        if self.grid[0] == 0.0 and self.values[0] != 0.0:
            problems.append("value at 0 is not 0")
        if not np.all(np.isinf(self.values[self.infinite_from():])):
            problems.append("finite value after an inf")
        if not self.is_discretely_convex(1e-9):
            problems.append("not discretely convex / monotone")
        return problems


def sample(phi: YoungFunction, grid_spec: GridSpec | None = None, provenance: str = "") -> SampledYoung:
    grid_spec = grid_spec or GridSpec()
    grid = grid_spec.points()
    values = np.asarray(phi.evaluate(grid), dtype=float)
    # a node sitting exactly on a jump to inf keeps the left limit, so the
    # inf suffix starts strictly after b_phi
    at_b = (grid == phi.b_phi) & np.isinf(values)
    if at_b.any():
        values[at_b] = np.asarray(phi.evaluate_left(grid[at_b]), dtype=float)
    # once a genuine inf appears every later value is inf as well
    first_inf = np.argmax(np.isinf(values)) if np.isinf(values).any() else len(values)
    values[first_inf:] = INF
    return SampledYoung(grid, values, provenance or repr(phi))


def convexity_violations(phi: YoungFunction, us: Sequence[float], rtol: float = 1e-12) -> int:
    """Count chord-inequality failures over consecutive finite triples."""
    us = np.sort(as_array(us))
    vals = as_array(phi.evaluate(us))
    keep = np.isfinite(vals)
    us, vals = us[keep], vals[keep]
    if len(us) < 3:
        return 0
    u1, u2, u3 = us[:-2], us[1:-1], us[2:]
    f1, f2, f3 = vals[:-2], vals[1:-1], vals[2:]
    t = (u3 - u2) / (u3 - u1)
    chord = t * f1 + (1 - t) * f3
    return int(np.sum(f2 > chord + rtol * np.maximum(np.abs(chord), 1e-300)))
