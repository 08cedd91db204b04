"""Factorization criterion ``phi1^-1 * phi2^-1 ~ phi^-1`` with ``phi2 = phi (-) phi1``.

``L^phi1 . M(L^phi1, L^phi) = L^phi`` holds exactly when the product of the
inverses is equivalent to ``phi^-1``: for all arguments on spaces of infinite
measure, for large arguments on spaces of finite measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .conjugation import ominus
from .measure import Kind, MeasureSpace, SimpleFunction, luxemburg_norm, modular
from .young import GridSpec, YoungFunction

STABILITY_RTOL = 0.01
EXTRA_DECADES = 3


class Mode(str, Enum):
    ALL = "all"
    LARGE = "large"


@dataclass
class EquivalenceReport:
    c: float
    C: float
    u0: float
    verdict: bool
    ratio_trace: np.ndarray  # rows (u, ratio)
    mode: Mode = Mode.ALL
    excluded: np.ndarray = field(default_factory=lambda: np.zeros(0))
    diagnostic: str = ""

    @property
    def spread(self) -> float:
        if self.c > 0 and math.isfinite(self.C):
            return self.C / self.c
        return math.inf


def _ratios(phi, phi1, phi2, u):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        num = np.asarray(phi1.right_inverse(u), dtype=float) * np.asarray(phi2.right_inverse(u), dtype=float)
        den = np.asarray(phi.right_inverse(u), dtype=float)
        r = num / den
    both_zero = (num == 0) & (den == 0)
    both_inf = np.isinf(num) & np.isinf(den)
    undefined = both_zero | both_inf
    return np.where(undefined, np.nan, r), undefined


def _extremes(phi, phi1, phi2, lo, hi, per_decade):
    n = max(16, int(round(per_decade * math.log10(hi / lo))) + 1)
    u = np.logspace(math.log10(lo), math.log10(hi), n)
    r, undefined = _ratios(phi, phi1, phi2, u)
    r = r[~undefined]
    if len(r) == 0:
        return math.nan, math.nan
    return float(np.min(r)), float(np.max(r))


def _settled(a, b, rtol=STABILITY_RTOL):
    """Relative change between two extremes is below ``rtol``."""
    if not (math.isfinite(a) and math.isfinite(b)) or a <= 0 or b <= 0:
        return False
    return abs(b - a) <= rtol * max(a, b)


def equivalence_check(phi, phi1, phi2, mode: Mode | str = Mode.ALL, u_range=(1e-3, 1e3), n: int = 241, rtol: float = STABILITY_RTOL) -> EquivalenceReport:
    """Constants ``c, C`` with ``c phi^-1 <= phi1^-1 phi2^-1 <= C phi^-1``.

    The trace is taken on ``n`` log-spaced points of ``u_range``.  Boundedness
    is judged by widening the range decade by decade: the verdict requires the
    extremes to have settled (relative change below 1%) between the last two
    widenings, on both ends in ``all`` mode and on the upper end only in
    ``large`` mode.  Points where both sides vanish are excluded and listed.
    """
    mode = Mode(mode)
    if n < 16:
        raise ValueError("need at least 16 trace points")
    lo, hi = map(float, u_range)
    if not (0 < lo < hi):
        raise ValueError("u_range must satisfy 0 < lo < hi")
    u = np.logspace(math.log10(lo), math.log10(hi), n)
    r, undefined = _ratios(phi, phi1, phi2, u)
    excluded = u[undefined]
    valid = ~undefined
    if not valid.any():
        raise ValueError("no point of the range has a defined ratio")
    trace = np.column_stack([u, r])
    per_decade = (n - 1) / math.log10(hi / lo)

    if mode is Mode.ALL:
        rv = r[valid]
        c, C = float(np.min(rv)), float(np.max(rv))
        u0 = 0.0
        ok = c > 0 and math.isfinite(C)
        diag = ""
        if not ok:
            diag = "ratio vanishes" if c == 0 else "ratio is infinite"
        else:
            # widen both ends; extremes must settle
            k = EXTRA_DECADES
            prev = _extremes(phi, phi1, phi2, lo / 10 ** (k - 1), hi * 10 ** (k - 1), per_decade)
            last = _extremes(phi, phi1, phi2, lo / 10**k, hi * 10**k, per_decade)
            ok = _settled(prev[0], last[0], rtol) and _settled(prev[1], last[1], rtol)
            if not ok:
                diag = "ratio extremes keep moving as the range widens"
        return EquivalenceReport(c, C, u0, bool(ok), trace, mode, excluded, diag)

    # large arguments: smallest grid u0 with a positive finite, settled tail
    good = valid & (r > 0) & np.isfinite(r)
    k = EXTRA_DECADES
    # the tail of the trace must be usable at all
    if not good[-1]:
        return EquivalenceReport(0.0, math.inf, hi, False, trace, mode, excluded, "ratio degenerate at the top of the range")
    # last index where the ratio is bad; the tail starts after it
    bad = np.nonzero(~good & valid)[0]
    start = int(bad[-1]) + 1 if len(bad) else 0
    while start < n and undefined[start]:
        start += 1
    u0 = float(u[start])
    prev = _extremes(phi, phi1, phi2, u0, hi * 10 ** (k - 1), per_decade)
    last = _extremes(phi, phi1, phi2, u0, hi * 10**k, per_decade)
    tail = r[start:][good[start:]]
    c, C = float(np.min(tail)), float(np.max(tail))
    ok = _settled(prev[0], last[0], rtol) and _settled(prev[1], last[1], rtol)
    diag = "" if ok else "tail extremes keep moving as the range widens"
    return EquivalenceReport(c, C, u0, bool(ok), trace, mode, excluded, diag)


def mode_for(kind: Kind | str) -> Mode:
    """Infinite measure needs all arguments; finite measure only large ones."""
    return Mode.ALL if Kind(kind) is Kind.SIGMA_FINITE_INFINITE else Mode.LARGE


def factorization_check(phi, phi1, measure_kind: Kind | str = Kind.SIGMA_FINITE_INFINITE, grid: GridSpec | None = None, u_range=(1e-3, 1e3), n: int = 241, mode: Mode | str | None = None, rtol: float = STABILITY_RTOL) -> EquivalenceReport:
    """Does ``L^phi1 . M(L^phi1, L^phi) = L^phi`` hold?"""
    mode = Mode(mode) if mode is not None else mode_for(measure_kind)
    gen = ominus(phi, phi1, grid or GridSpec()).function
    vals = gen.values
    if np.all(np.isinf(vals[gen.grid > 0])):
        lo, hi = u_range
        u = np.logspace(math.log10(lo), math.log10(hi), n)
        trace = np.column_stack([u, np.zeros_like(u)])
        return EquivalenceReport(
            0.0, 0.0, 0.0 if mode is Mode.ALL else float(lo), False, trace, mode,
            diagnostic="generator is infinite for u > 0, so phi2^-1 = 0 and M = {0}",
        )
    return equivalence_check(phi, phi1, gen, mode, u_range, n, rtol)


@dataclass
class Decomposition:
    x: SimpleFunction
    y: SimpleFunction
    modular_z: float  # I_phi(z)
    modular_x: float  # I_phi1(x)
    norm_z: float
    norm_x: float
    norm_y: float  # in L^(phi (-) phi1); inf if y escapes
    product_error: float  # max |x y - z| on the support of z


def decompose(z: SimpleFunction, phi, phi1, sp: MeasureSpace, generator: YoungFunction | None = None) -> Decomposition:
    """Split ``z = x y`` with ``x = phi1^-1(phi(|z|))`` and ``y = z / x``.

    ``I_phi1(x) <= I_phi(z)`` by construction.  ``generator`` is the
    ``phi (-) phi1`` used for the norm of ``y`` (sampled if omitted).
    """
    zv = z.values
    az = np.abs(zv)
    xv = np.where(az > 0, np.asarray(phi1.right_inverse(np.asarray(phi.evaluate(az), dtype=float)), dtype=float), 0.0)
    if np.any(~np.isfinite(xv)):
        raise ValueError("phi(|z|) is infinite on some cell; normalise z first")
    with np.errstate(divide="ignore", invalid="ignore"):
        yv = np.where(xv > 0, zv / xv, 0.0)
    x, y = SimpleFunction(xv), SimpleFunction(yv)
    gen = generator if generator is not None else ominus(phi, phi1).function
    support = az > 0
    err = float(np.max(np.abs(xv * yv - zv)[support])) if support.any() else 0.0
    lost = support & (xv == 0)
    norm_y = luxemburg_norm(gen, y, sp)
    if lost.any():
        norm_y = math.inf
    return Decomposition(
        x=x,
        y=y,
        modular_z=modular(phi, z, sp),
        modular_x=modular(phi1, x, sp),
        norm_z=luxemburg_norm(phi, z, sp),
        norm_x=luxemburg_norm(phi1, x, sp),
        norm_y=norm_y,
        product_error=err,
    )
