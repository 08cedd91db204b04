"""Pointwise multipliers ``M(L^phi1, L^phi)``.

The multiplier space from ``L^phi1`` into ``L^phi`` is the Orlicz space of
``phi (-) phi1``, with

    ||y||_M <= 4 ||y||_{phi (-) phi1}

and a reverse estimate whose constant depends on which of ``b_phi``,
``b_phi1`` are finite.  This module classifies the pair, reports those
constants, and replays the reverse estimate numerically on simple functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .conjugation import OminusResult, PointwiseOminus, ominus, ominus_at, s_domain
from .extended import INF
from .measure import (
    MeasureSpace,
    PartitionError,
    SimpleFunction,
    charfn_norm,
    luxemburg_norm,
    luxemburg_norms,
    modular,
    plan_partition,
)
from .young import GridSpec, SampledYoung, YoungFunction

EMBED_CONST = 4.0
CHAIN_SLACK = 1e-9


class Classification(str, Enum):
    TRIVIAL = "trivial"
    INSIDE_LINFTY = "inside_linfty"
    GENERAL = "general"


class Triviality(str, Enum):
    TRIVIAL_ZERO = "trivial_zero"
    BOUNDED_BY_LINFTY = "bounded_by_linfty"
    NO_RESTRICTION = "no_restriction"


def triviality_check(phi: YoungFunction, phi1: YoungFunction) -> Triviality:
    b, b1 = phi.b_phi, phi1.b_phi
    if math.isfinite(b) and math.isinf(b1):
        return Triviality.TRIVIAL_ZERO
    if math.isfinite(b):
        return Triviality.BOUNDED_BY_LINFTY
    return Triviality.NO_RESTRICTION


def linfty_constant(phi: YoungFunction, phi1: YoungFunction, t_ref: float = 1e-6) -> float:
    """Constant ``c >= 1`` with ``||y||_inf <= c ||y||_M`` measured on sets of
    measure ``t_ref``: ``c = b_phi * ||chi_A||_phi1``."""
    return max(1.0, phi.b_phi * charfn_norm(phi1, t_ref))


def reverse_constant(phi: YoungFunction, phi1: YoungFunction, t_ref: float = 1e-6) -> float | None:
    """Constant in ``||y||_{phi (-) phi1} <= C ||y||_M`` for the regime."""
    b, b1 = phi.b_phi, phi1.b_phi
    if math.isinf(b) and math.isinf(b1):
        return 2.0
    if math.isinf(b):
        # the argument needs b_phi1 > 1 (reached by dilation otherwise)
        return 2.0 * max(b1, 1.0)
    if math.isinf(b1):
        return None
    return 4.0 * linfty_constant(phi, phi1, t_ref)


@dataclass(frozen=True, eq=False)
class MultiplierSpace:
    generator: OminusResult
    classification: Classification
    embed_const: float
    reverse_const: float | None

    def growth_exponent(self, u_lo: float = 1e-2, u_hi: float = 1e2) -> float | None:
        """Log-log slope of the generator where it is finite and positive."""
        u = self.generator.grid
        v = self.generator.values
        m = (u >= u_lo) & (u <= u_hi) & np.isfinite(v) & (v > 0)
        if m.sum() < 2:
            return None
        return float(np.polyfit(np.log(u[m]), np.log(v[m]), 1)[0])

    def describe(self) -> str:
        label = {
            Classification.TRIVIAL: "Trivial",
            Classification.INSIDE_LINFTY: "InsideLinfty",
            Classification.GENERAL: "General",
        }[self.classification]
        if self.classification is Classification.TRIVIAL:
            return f"{label}, M = {{0}}"
        slope = self.growth_exponent()
        if slope is None:
            v = self.generator.values
            if np.all(np.isinf(v[1:]) | (v[1:] == 0)):
                return f"{label}, generator is the L^inf generator"
            return f"{label}, generator has no power-law range"
        shown = f"{round(slope)}" if abs(slope - round(slope)) < 0.05 else f"{slope:.3g}"
        return f"{label}, generator ~ u^{shown}"


def resolve(phi1: YoungFunction, phi: YoungFunction, grid: GridSpec | None = None) -> MultiplierSpace:
    """``M(L^phi1, L^phi) = L^(phi (-) phi1)``; note the argument order."""
    grid = grid or GridSpec()
    triv = triviality_check(phi, phi1)
    if triv is Triviality.TRIVIAL_ZERO:
        us = grid.points()
        values = np.where(us > 0, INF, 0.0)
        _, _, conv = s_domain(phi1)
        gen = OminusResult(
            SampledYoung(us, values, "trivial"),
            np.column_stack([us, np.where(us > 0, INF, 0.0)]),
            INF,
            conv,
        )
        return MultiplierSpace(gen, Classification.TRIVIAL, EMBED_CONST, None)
    gen = ominus(phi, phi1, grid)
    if np.all(np.isinf(gen.values[gen.grid > 0])):
        cls = Classification.TRIVIAL
    elif triv is Triviality.BOUNDED_BY_LINFTY:
        cls = Classification.INSIDE_LINFTY
    else:
        cls = Classification.GENERAL
    rc = None if cls is Classification.TRIVIAL else reverse_constant(phi, phi1)
    return MultiplierSpace(gen, cls, EMBED_CONST, rc)


# ---------------------------------------------------------------------------
# Hölder direction


@dataclass(frozen=True)
class HolderReport:
    product_norm: float
    x_norm: float
    y_norm: float
    ratio: float
    holds: bool
    skipped: bool = False


def holder_bound_check(phi, phi1, x: SimpleFunction, y: SimpleFunction, sp: MeasureSpace, generator=None) -> HolderReport:
    """Check ``||x y||_phi <= 4 ||x||_phi1 ||y||_{phi (-) phi1}``."""
    gen = generator if generator is not None else PointwiseOminus(phi, phi1)
    pn = luxemburg_norm(phi, x * y, sp)
    xn = luxemburg_norm(phi1, x, sp)
    yn = luxemburg_norm(gen, y, sp)
    return _holder_report(pn, xn, yn)


def _holder_report(pn, xn, yn) -> HolderReport:
    if math.isinf(yn) or math.isinf(xn):
        return HolderReport(pn, xn, yn, math.nan, True, skipped=True)
    bound = EMBED_CONST * xn * yn
    if bound == 0.0:
        return HolderReport(pn, xn, yn, 0.0 if pn == 0 else INF, pn == 0.0)
    return HolderReport(pn, xn, yn, pn / (xn * yn), bool(pn <= bound))


def holder_sweep(phi, phi1, X: np.ndarray, Y: np.ndarray, sp: MeasureSpace, generator) -> list[HolderReport]:
    """Batched :func:`holder_bound_check` over rows of ``X`` and ``Y``."""
    pn = luxemburg_norms(phi, X * Y, sp.measures)
    xn = luxemburg_norms(phi1, X, sp.measures)
    yn = luxemburg_norms(generator, Y, sp.measures)
    return [_holder_report(a, b, c) for a, b, c in zip(pn, xn, yn)]


# ---------------------------------------------------------------------------
# witness and reverse estimate


@dataclass(frozen=True, eq=False)
class WitnessResult:
    x: SimpleFunction
    conjugate_values: np.ndarray
    residuals: np.ndarray
    truncation: float

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals)) if len(self.residuals) else 0.0


def construct_witness(phi, phi1, a: float, y: SimpleFunction) -> WitnessResult:
    """For each level ``a_k`` of ``y`` pick ``b_k in [0, a]`` attaining the
    truncated conjugate: ``phi(a_k b_k) = (phi (-)_a phi1)(a_k) + phi1(b_k)``."""
    top, closed, _ = s_domain(phi1, a)
    levels = np.abs(y.values)
    vals, bk = ominus_at(phi, phi1, levels, truncation=a)
    bk = np.where(np.isfinite(bk), bk, top)
    at_open_end = (bk == top) & (not closed)
    lhs = np.where(at_open_end, phi.evaluate_left(levels * bk), phi.evaluate(levels * bk))
    f1 = np.where(at_open_end, phi1.evaluate_left(bk), phi1.evaluate(bk))
    with np.errstate(invalid="ignore"):
        gap = np.abs(lhs - vals - f1)
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(f1)))
    residuals = np.where(gap <= 1e-8, gap, gap / scale)
    return WitnessResult(SimpleFunction(bk), vals, residuals, float(a))


@dataclass
class DrillStep:
    n: int
    block_norm: float  # ||y x chi_{A_n}||_phi
    block_bound: float  # (a/2) ||chi_{A_n}||_phi1
    block_modular: float  # I_phi1(x chi_{A_n})
    prefix_modular_phi1: float  # I_phi1(x_n)
    prefix_modular_phi: float  # I_phi(y x_n)
    prefix_norm: float  # ||y x_n||_phi
    ok: bool


@dataclass
class DrillReport:
    passed: bool
    a: float
    t_a: float
    n_groups: int
    witness_max: float
    witness_residual: float
    final_conjugate_modular: float  # I_{phi (-)_a phi1}(y)
    final_product_modular: float  # I_phi(y x)
    final_product_norm: float  # ||y x||_phi
    x_norm: float
    failed_step: int | None = None
    failures: list[str] = field(default_factory=list)
    steps: list[DrillStep] = field(default_factory=list)
    refinement: int = 1


def rescale_for_drill(phi, phi1, y: SimpleFunction, sp: MeasureSpace, target: float = 0.5, generator=None) -> SimpleFunction:
    """Scale ``y`` so that the Hölder estimate ``4 ||y||_{phi (-) phi1}``
    equals ``target`` (hence ``||y||_M <= target``).

    ``generator`` may be a precomputed sampled ``phi (-) phi1``; chord
    interpolation of a convex function sits above it, so the sampled norm is
    an overestimate and the rescaled ``y`` stays inside the hypothesis.
    """
    gen = generator if generator is not None else PointwiseOminus(phi, phi1)
    n = luxemburg_norm(gen, y, sp)
    if n == 0.0:
        return y
    if math.isinf(n):
        raise ValueError("y is not in the multiplier space")
    return y * (target / (EMBED_CONST * n))


def reverse_estimate_drill(phi, phi1, y: SimpleFunction, sp: MeasureSpace, a: float) -> DrillReport:
    """Run the reverse-estimate argument step by step on a simple ``y``.

    Assumes ``b_phi = b_phi1 = inf`` and that ``y`` already satisfies
    ``||y||_M <= 1/2`` (see :func:`rescale_for_drill`).  Every inequality of the
    chain is evaluated; a failure names the step that broke.
    """
    if math.isfinite(phi.b_phi) or math.isfinite(phi1.b_phi):
        raise ValueError("the drill covers the case b_phi = b_phi1 = inf")
    if not a > 1.0:
        raise ValueError("the drill needs a > 1")
    witness = construct_witness(phi, phi1, a, y)
    x = witness.x
    failures: list[str] = []
    if np.any(x.values > a * (1 + 1e-12)):
        failures.append("witness exceeds the truncation level")

    refinement = 1
    try:
        plan = plan_partition(phi1, sp, a)
    except PartitionError:
        from .measure import threshold_measure

        t_a = threshold_measure(phi1, 1.0 / a, sp.total)
        refinement = int(math.ceil(np.max(sp.measures) / t_a))
        sp, x, y = sp.refine(refinement), x.refine(refinement), y.refine(refinement)
        plan = plan_partition(phi1, sp, a)

    slack = 1.0 + CHAIN_SLACK
    half = 0.5 * slack
    groups = plan.groups
    n_cells = sp.n_cells
    xy = (x * y).values

    block_X = np.zeros((len(groups), n_cells))
    prefix = np.zeros((len(groups), n_cells))
    covered = np.zeros(n_cells, dtype=bool)
    for k, g in enumerate(groups):
        block_X[k, g] = xy[g]
        covered[g] = True
        prefix[k] = np.where(covered, xy, 0.0)
    block_norms = luxemburg_norms(phi, block_X, sp.measures)
    prefix_norms = luxemburg_norms(phi, prefix, sp.measures)
    xv = x.values

    steps = []
    failed = None
    for k, g in enumerate(groups):
        mu = float(sp.measures[g].sum())
        bound = 0.5 * a * charfn_norm(phi1, mu)
        block_mod = float(np.sum(np.asarray(phi1.evaluate(xv[g])) * sp.measures[g]))
        mask = np.zeros(n_cells, dtype=bool)
        for gg in groups[: k + 1]:
            mask[gg] = True
        pm1 = float(np.sum(np.where(mask, np.asarray(phi1.evaluate(xv)), 0.0) * sp.measures))
        pm = float(np.sum(np.where(mask, np.asarray(phi.evaluate(np.abs(xy))), 0.0) * sp.measures))
        ok = (
            block_norms[k] <= half
            and bound <= half
            and block_mod <= half
            and pm1 <= pm * slack + 1e-300
            and pm <= prefix_norms[k] * slack
            and prefix_norms[k] <= half
            and pm1 <= half
        )
        steps.append(DrillStep(k + 1, float(block_norms[k]), bound, block_mod, pm1, pm, float(prefix_norms[k]), ok))
        if not ok and failed is None:
            failed = k + 1
            failures.append(f"inductive step {k + 1} failed")

    x_norm = luxemburg_norm(phi1, x, sp)
    if x_norm > slack:
        failures.append(f"||x||_phi1 = {x_norm:g} exceeds 1")
    prod_norm = luxemburg_norm(phi, SimpleFunction(xy), sp)
    prod_mod = modular(phi, SimpleFunction(xy), sp)
    conj_vals = np.repeat(witness.conjugate_values, refinement) if refinement > 1 else witness.conjugate_values
    conj_mod = float(np.sum(conj_vals * sp.measures))
    if not conj_mod <= prod_mod * slack + 1e-300:
        failures.append("conjugate modular exceeds product modular")
    if not prod_mod <= prod_norm * slack:
        failures.append("product modular exceeds product norm")
    if not prod_norm <= half:
        failures.append(f"||y x||_phi = {prod_norm:g} exceeds 1/2")
    if not conj_mod <= 0.5:
        failures.append(f"I(phi (-)_a phi1)(y) = {conj_mod:g} exceeds 1/2")
    if witness.max_residual > 1e-8:
        failures.append(f"witness residual {witness.max_residual:g} exceeds 1e-8")

    return DrillReport(
        passed=not failures,
        a=float(a),
        t_a=plan.t_a,
        n_groups=len(groups),
        witness_max=float(np.max(x.values)) if len(x.values) else 0.0,
        witness_residual=witness.max_residual,
        final_conjugate_modular=conj_mod,
        final_product_modular=prod_mod,
        final_product_norm=prod_norm,
        x_norm=x_norm,
        failed_step=failed,
        failures=failures,
        steps=steps,
        refinement=refinement,
    )


# ---------------------------------------------------------------------------
# operator norm from below


def operator_norm_lower(phi1, phi, y: SimpleFunction, sp: MeasureSpace, candidate_count: int = 256) -> float:
    """Certified lower bound of ``||y||_M = sup_{||x||_phi1 <= 1} ||x y||_phi``.

    Candidates, in order: the conjugate maximisers of the levels of ``y``
    (the witness, untruncated when finite, otherwise truncated at a few
    levels), indicators of the top-k level sets, and single cells.  Each is
    normalised with an upper estimate of its ``phi1`` norm while the product
    norm is taken from below, so every ratio is a valid lower bound.
    """
    n = sp.n_cells
    yv = np.abs(y.values)
    if not np.any(yv > 0):
        return 0.0
    cands = []
    _, s_star = ominus_at(phi, phi1, yv)
    if np.all(np.isfinite(s_star)) and np.any(s_star > 0):
        cands.append(s_star)
    b1 = phi1.b_phi
    for a in (1.0, 10.0, 100.0):
        a = min(a, b1)
        try:
            _, s_a = ominus_at(phi, phi1, yv, truncation=a)
        except ValueError:
            continue
        s_a = np.where(np.isfinite(s_a), s_a, a)
        if np.any(s_a > 0):
            cands.append(s_a)
    order = np.argsort(-yv, kind="stable")
    for k in range(1, n + 1):
        v = np.zeros(n)
        v[order[:k]] = 1.0
        cands.append(v)
    for i in order:
        v = np.zeros(n)
        v[i] = 1.0
        cands.append(v)
    X = np.array(cands[:candidate_count])
    xn = luxemburg_norms(phi1, X, sp.measures)
    keep = (xn > 0) & np.isfinite(xn)
    if not keep.any():
        return 0.0
    Xn = X[keep] / xn[keep, None]
    prod = luxemburg_norms(phi, Xn * yv[None, :], sp.measures, lower=True)
    return float(np.max(prod))


def linfty_chain_quantity(phi, phi1, level: float, measure: float) -> float:
    """``level / (b_phi ||chi_A||_phi1)`` with ``mu(A) = measure``: the lower
    bound of ``||level * chi_A||_M`` used to show ``M`` sits inside ``L^inf``."""
    return level / (phi.b_phi * charfn_norm(phi1, measure))
