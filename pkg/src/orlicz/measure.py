"""Discretised measure spaces, simple functions, modulars and Luxemburg norms.

A non-atomic space is modelled by a finite partition into cells of positive
measure; simple functions are constant on cells.  An infinite (sigma-finite)
space is a finite prefix of cells plus a rule for appending more cells of a
fixed measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .extended import INF
from .young import YoungFunction, fundamental_function

LUX_RTOL = 1e-10


class Kind(str, Enum):
    FINITE = "finite"
    SIGMA_FINITE_INFINITE = "infinite"


@dataclass(frozen=True, eq=False)
class MeasureSpace:
    measures: np.ndarray
    kind: Kind = Kind.FINITE
    tail_measure: float | None = None

    def __post_init__(self):
        m = np.asarray(self.measures, dtype=float)
        if m.ndim != 1 or len(m) == 0:
            raise ValueError("a measure space needs at least one cell")
        if np.any(~np.isfinite(m)) or np.any(m <= 0):
            raise ValueError("cell measures must be finite and > 0")
        object.__setattr__(self, "measures", m)
        if self.kind is Kind.SIGMA_FINITE_INFINITE and not (self.tail_measure or 0) > 0:
            raise ValueError("an infinite space needs a positive tail cell measure")

    @property
    def n_cells(self) -> int:
        return len(self.measures)

    @property
    def total(self) -> float:
        if self.kind is Kind.SIGMA_FINITE_INFINITE:
            return INF
        return float(np.sum(self.measures))

    def extend(self, k: int) -> MeasureSpace:
        """Append ``k`` tail cells (infinite spaces only)."""
        if self.kind is not Kind.SIGMA_FINITE_INFINITE:
            raise ValueError("only infinite spaces can be extended")
        extra = np.full(k, self.tail_measure)
        return MeasureSpace(np.concatenate([self.measures, extra]), self.kind, self.tail_measure)

    def refine(self, k: int) -> MeasureSpace:
        """Split every cell into ``k`` equal cells."""
        if k < 1:
            raise ValueError("refinement factor must be >= 1")
        tail = None if self.tail_measure is None else self.tail_measure / k
        return MeasureSpace(np.repeat(self.measures / k, k), self.kind, tail)


@dataclass(frozen=True, eq=False)
class SimpleFunction:
    """Values per cell; cell ``i`` of the companion space carries ``values[i]``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("simple function values must be 1-d")
        if np.any(~np.isfinite(v)):
            raise ValueError("simple function values must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_levels(cls, levels, n_cells: int) -> SimpleFunction:
        """Build from ``(cell_id, value)`` pairs; unlisted cells are 0."""
        v = np.zeros(n_cells)
        for cell, value in levels:
            if not 0 <= int(cell) < n_cells:
                raise ValueError(f"cell id {cell} outside 0..{n_cells - 1}")
            v[int(cell)] = value
        return cls(v)

    @classmethod
    def zero(cls, n_cells: int) -> SimpleFunction:
        return cls(np.zeros(n_cells))

    @classmethod
    def indicator(cls, cells, n_cells: int, value: float = 1.0) -> SimpleFunction:
        v = np.zeros(n_cells)
        v[np.asarray(cells, dtype=int)] = value
        return cls(v)

    @property
    def levels(self) -> list[tuple[int, float]]:
        nz = np.nonzero(self.values)[0]
        return [(int(i), float(self.values[i])) for i in nz]

    def __mul__(self, other):
        if isinstance(other, SimpleFunction):
            return SimpleFunction(self.values * other.values)
        return SimpleFunction(self.values * float(other))

    __rmul__ = __mul__

    def abs(self) -> SimpleFunction:
        return SimpleFunction(np.abs(self.values))

    def restrict(self, cells) -> SimpleFunction:
        v = np.zeros_like(self.values)
        idx = np.asarray(cells, dtype=int)
        v[idx] = self.values[idx]
        return SimpleFunction(v)

    def refine(self, k: int) -> SimpleFunction:
        return SimpleFunction(np.repeat(self.values, k))

    def pad(self, n_cells: int) -> SimpleFunction:
        if n_cells < len(self.values):
            raise ValueError("cannot pad to fewer cells")
        return SimpleFunction(np.concatenate([self.values, np.zeros(n_cells - len(self.values))]))


def make_space(kind: Kind | str = Kind.FINITE, cell_count: int = 64, cell_measure=None) -> MeasureSpace:
    """Finite spaces default to the unit interval in equal cells; infinite
    ones to cells of measure 1 with an unbounded tail of the same cells.

    ``cell_measure`` may be a scalar (equal cells) or a sequence of measures.
    """
    kind = Kind(kind)
    if cell_count < 1:
        raise ValueError("cell_count must be positive")
    if cell_measure is None:
        cell_measure = 1.0 / cell_count if kind is Kind.FINITE else 1.0
    if np.ndim(cell_measure) == 0:
        measures = np.full(cell_count, float(cell_measure))
    else:
        measures = np.asarray(cell_measure, dtype=float)
        if len(measures) != cell_count:
            raise ValueError("cell_measure length does not match cell_count")
    tail = float(np.min(measures)) if kind is Kind.SIGMA_FINITE_INFINITE else None
    return MeasureSpace(measures, kind, tail)


def _check(x: SimpleFunction, sp: MeasureSpace):
    if len(x.values) != sp.n_cells:
        raise ValueError(f"function has {len(x.values)} cells, space has {sp.n_cells}")


def _modular_rows(phi, X: np.ndarray, measures: np.ndarray) -> np.ndarray:
    vals = np.asarray(phi.evaluate(np.abs(X)), dtype=float)
    vals = np.where(X == 0.0, 0.0, vals)
    return np.sum(vals * measures, axis=-1)


def modular(phi: YoungFunction, x: SimpleFunction, sp: MeasureSpace) -> float:
    """``sum_cells phi(|x|) * measure``; ``inf`` if any cell contributes ``inf``."""
    _check(x, sp)
    return float(_modular_rows(phi, x.values, sp.measures))


def luxemburg_norms(phi, X, measures, *, rtol: float = LUX_RTOL, lower: bool = False) -> np.ndarray:
    """Luxemburg norms of the rows of ``X`` by bisection in ``log(lambda)``.

    Returns the upper end of the final bracket (the modular there is ``<= 1``),
    or the lower end when ``lower`` is set, which makes the result a
    certified lower bound up to rounding.
    """
    X = np.atleast_2d(np.abs(np.asarray(X, dtype=float)))
    measures = np.asarray(measures, dtype=float)
    k = X.shape[0]
    out = np.zeros(k)
    peak = X.max(axis=1)
    rows = np.nonzero(peak > 0)[0]
    if len(rows) == 0:
        return out
    Xr = X[rows]
    support = np.sum(np.where(Xr > 0, measures, 0.0), axis=1)
    if hasattr(phi, "right_inverse"):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            guess = peak[rows] * np.asarray(fundamental_function(phi, support), dtype=float)
    else:
        guess = peak[rows]
    guess = np.where(np.isfinite(guess) & (guess > 0), guess, peak[rows])

    def ok(lam):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return _modular_rows(phi, Xr / lam[:, None], measures) <= 1.0

    lo = guess * 2.0**-60
    hi = guess * 2.0**60
    # widen until the bracket is valid (rarely needed)
    for _ in range(15):
        bad_hi = ~ok(hi)
        bad_lo = ok(lo)
        if not (bad_hi.any() or bad_lo.any()):
            break
        hi = np.where(bad_hi, np.minimum(hi * 2.0**60, 1e300), hi)
        lo = np.where(bad_lo, np.maximum(lo * 2.0**-60, 1e-300), lo)
    never = ~ok(hi)
    llo, lhi = np.log(lo), np.log(hi)
    tol = math.log1p(rtol)
    # rows with no admissible lambda are left alone (their norm is inf)
    live = ~never
    while np.any(live & (lhi - llo > tol)):
        mid = 0.5 * (llo + lhi)
        good = ok(np.exp(mid))
        lhi = np.where(good, mid, lhi)
        llo = np.where(good, llo, mid)
    res = np.exp(llo if lower else lhi)
    res[never] = INF
    out[rows] = res
    return out


def luxemburg_norm(phi: YoungFunction, x: SimpleFunction, sp: MeasureSpace, *, lower: bool = False) -> float:
    """``inf{lambda > 0 : I_phi(x / lambda) <= 1}``."""
    _check(x, sp)
    return float(luxemburg_norms(phi, x.values[None, :], sp.measures, lower=lower)[0])


def charfn_norm(phi: YoungFunction, t: float) -> float:
    """Norm of a characteristic function of a set of measure ``t``."""
    return fundamental_function(phi, t)


@dataclass(frozen=True)
class NormModularReport:
    norm: float
    modular: float
    holds: bool


def check_norm_modular(phi, x: SimpleFunction, sp: MeasureSpace, slack: float = 1e-12) -> NormModularReport:
    """``||x|| <= 1`` implies ``I(x) <= ||x||`` (vacuous when the norm exceeds 1)."""
    norm = luxemburg_norm(phi, x, sp)
    mod = modular(phi, x, sp)
    holds = norm > 1.0 or mod <= norm * (1.0 + slack)
    return NormModularReport(norm, mod, bool(holds))


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class VerificationPlan:
    t_a: float
    groups: tuple[np.ndarray, ...]
    target: float  # the requested bound 1/a on ||chi_A||

    def group_measures(self, sp: MeasureSpace) -> np.ndarray:
        return np.array([sp.measures[g].sum() for g in self.groups])


def threshold_measure(phi1: YoungFunction, bound: float, t_max: float = INF) -> float:
    """Largest ``t`` (capped at ``t_max``) with ``||chi_A||_phi1 <= bound``
    whenever ``mu(A) <= t``, found by bisection on ``t``."""

    def ok(t):
        return charfn_norm(phi1, t) <= bound

    hi = t_max if math.isfinite(t_max) else 1.0
    if ok(hi):
        if math.isfinite(t_max):
            return t_max
        while ok(hi) and hi < 1e300:
            hi *= 2.0
        if ok(hi):
            return INF
    lo = hi
    for _ in range(2000):
        lo *= 0.5
        if lo == 0.0 or ok(lo):
            break
    if lo == 0.0 or not ok(lo):
        limit = 1.0 / phi1.b_phi if math.isfinite(phi1.b_phi) else 0.0
        raise PartitionError(
            f"no set of positive measure has ||chi_A|| <= {bound:g}; "
            f"the achievable bound is {limit:g} (limit as mu(A) -> 0)"
        )
    hi = min(2.0 * lo, hi)
    while hi / lo > 1.0 + 1e-13:
        mid = math.sqrt(lo * hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def plan_partition(phi1: YoungFunction, sp: MeasureSpace, a: float) -> VerificationPlan:
    """Group consecutive cells into blocks of measure ``<= t_a`` where
    ``t_a`` guarantees ``||chi_A||_phi1 <= 1/a`` for ``mu(A) <= t_a``."""
    if not a > 0:
        raise ValueError("a must be > 0")
    bound = 1.0 / a
    t_a = threshold_measure(phi1, bound, sp.total)
    big = np.max(sp.measures)
    if big > t_a * (1.0 + 1e-12):
        raise PartitionError(
            f"cells of measure {big:g} exceed t_a = {t_a:g}; refine the space by "
            f"{math.ceil(big / t_a)}"
        )
    groups = []
    current: list[int] = []
    acc = 0.0
    for i, m in enumerate(sp.measures):
        if current and acc + m > t_a * (1.0 + 1e-12):
            groups.append(np.array(current))
            current, acc = [], 0.0
        current.append(i)
        acc += m
    if current:
        groups.append(np.array(current))
    return VerificationPlan(t_a, tuple(groups), bound)


# ---------------------------------------------------------------------------
# plain-text table: cell_id,measure,value


def dump_table(sp: MeasureSpace, x: SimpleFunction | None = None) -> str:
    values = np.zeros(sp.n_cells) if x is None else x.values
    lines = ["cell_id,measure,value"]
    lines += [f"{i},{m!r},{v!r}" for i, (m, v) in enumerate(zip(sp.measures.tolist(), values.tolist()))]
    return "\n".join(lines) + "\n"


def load_table(text: str, kind: Kind | str = Kind.FINITE) -> tuple[MeasureSpace, SimpleFunction]:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#") or line.lower().startswith("cell_id"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected cell_id,measure,value")
        rows.append((int(parts[0]), float(parts[1]), float(parts[2])))
    if not rows:
        raise ValueError("table has no cells")
    rows.sort()
    ids = [r[0] for r in rows]
    if ids != list(range(len(ids))):
        raise ValueError("cell ids must be 0..n-1 without gaps")
    measures = np.array([r[1] for r in rows])
    kind = Kind(kind)
    tail = float(measures.min()) if kind is Kind.SIGMA_FINITE_INFINITE else None
    return MeasureSpace(measures, kind, tail), SimpleFunction(np.array([r[2] for r in rows]))
