"""Property suites shared by ``orlicz verify`` and the acceptance tests.

Every suite is deterministic given its seed and returns a :class:`SuiteResult`.
``fault=True`` is a test hook: the suite checks a deliberately wrong bound,
so a healthy build must report a failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import presets
from .conjugation import ominus, ominus_at
from .measure import (
    SimpleFunction,
    charfn_norm,
    luxemburg_norm,
    luxemburg_norms,
    make_space,
    _modular_rows,
)
from .multipliers import (
    EMBED_CONST,
    holder_sweep,
    operator_norm_lower,
    reverse_estimate_drill,
    rescale_for_drill,
)
from .young import (
    CutOff,
    ExpMinusOne,
    GridSpec,
    Identity,
    LinearAboveKnee,
    Power,
    dilate,
)

YOUNG_RTOL = 1e-9
DILATION_RTOL = 1e-6
TRUNCATION_RTOL = 1e-6


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: int
    violations: int
    detail: str = ""
    metrics: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{status} {self.name}: {self.checks} checks, {self.violations} violations{extra}"


_GEN_CACHE: dict = {}


def generator(name: str, grid: GridSpec | None = None):
    """Sampled ``phi (-) phi1`` for a preset, cached per process."""
    key = (name, grid)
    if key not in _GEN_CACHE:
        phi, phi1 = presets.get(name).functions()
        _GEN_CACHE[key] = ominus(phi, phi1, grid or GridSpec())
    return _GEN_CACHE[key]


def random_simple(rng: np.random.Generator, n_cells: int, rows: int, decades: float = 2.0, zero_frac: float = 0.3) -> np.ndarray:
    """Rows of random step functions: a few levels, log-uniform magnitudes,
    some cells zeroed."""
    out = np.empty((rows, n_cells))
    for i in range(rows):
        k = int(rng.integers(1, 6))
        levels = 10.0 ** rng.uniform(-decades, decades, k)
        out[i] = levels[rng.integers(0, k, n_cells)]
        out[i, rng.random(n_cells) < zero_frac] = 0.0
    return out


# ---------------------------------------------------------------------------


def suite_young(seed: int = 0, fault: bool = False, names=None, size: int = 200) -> SuiteResult:
    """``phi(u v) <= (phi (-) phi1)(u) + phi1(v)`` on a ``size x size`` grid."""
    names = names or presets.YOUNG_SWEEP
    u = np.logspace(-3, 3, size)
    v = np.logspace(-3, 3, size)
    U, V = np.meshgrid(u, v, indexing="ij")
    checks = violations = 0
    worst = []
    for name in names:
        phi, phi1 = presets.get(name).functions()
        gen = generator(name).function
        lhs = np.asarray(phi.evaluate(U * V))
        g = np.asarray(gen.evaluate(u))[:, None]
        if fault:
            g = 0.5 * g
        rhs = g + np.asarray(phi1.evaluate(V))
        with np.errstate(invalid="ignore"):
            bad = np.isfinite(lhs) & np.isfinite(rhs) & (lhs > rhs * (1 + YOUNG_RTOL) + 1e-300)
        bad |= np.isinf(lhs) & np.isfinite(rhs)
        checks += lhs.size
        nb = int(bad.sum())
        violations += nb
        if nb:
            worst.append(name)
    return SuiteResult("young-inequality", violations == 0, checks, violations, ", ".join(worst))


def suite_dilation(seed: int = 0, fault: bool = False, names=None, factors=((2.0, 3.0), (0.5, 4.0))) -> SuiteResult:
    """``(dilate(phi,a) (-) dilate(phi1,b))(u) = (phi (-) phi1)(a u / b)``."""
    names = names or ["holder", "linfty", "l1-exp", "square-exp", "cutoff-equal", "cutoff-closed"]
    grid = GridSpec(1e-3, 1e3, 241)
    checks = violations = 0
    worst = 0.0
    for name in names:
        phi, phi1 = presets.get(name).functions()
        for a, b in factors:
            lhs = ominus(dilate(phi, a), dilate(phi1, b), grid)
            u = lhs.grid
            arg = a * u / b * (1.01 if fault else 1.0)
            rhs, _ = ominus_at(phi, phi1, arg)
            l, r = lhs.values, np.asarray(rhs)
            same_inf = np.isinf(l) & np.isinf(r)
            both = np.isfinite(l) & np.isfinite(r)
            with np.errstate(invalid="ignore"):
                rel = np.where(both, np.abs(l - r) / np.maximum(np.maximum(np.abs(l), np.abs(r)), 1e-300), 0.0)
                rel = np.where(both & (np.abs(l - r) <= 1e-300), 0.0, rel)
            bad = ~(same_inf | both) | (rel > DILATION_RTOL)
            checks += len(u)
            violations += int(bad.sum())
            worst = max(worst, float(rel.max()))
    return SuiteResult("dilation-identity", violations == 0, checks, violations, f"max rel err {worst:.2e}")


def truncation_profile(phi, phi1, u, a_list):
    """Max relative gap ``|phi (-)_a phi1 - phi (-) phi1|`` over ``u`` per ``a``,
    and the largest argmax (the recorded bound past which the gap closes)."""
    full, s_star = ominus_at(phi, phi1, u)
    bound = float(np.max(s_star))
    gaps = []
    for a in a_list:
        va, _ = ominus_at(phi, phi1, u, truncation=a)
        scale = np.maximum(np.abs(full), 1e-300)
        gaps.append(float(np.max(np.abs(full - va) / scale)))
    return np.array(gaps), bound


def suite_truncation(seed: int = 0, fault: bool = False, names=None) -> SuiteResult:
    """The truncated conjugates increase to the full one."""
    names = names or presets.UNBOUNDED
    a_list = 2.0 ** np.arange(-4, 11)
    checks = violations = 0
    notes = []
    for name in names:
        phi, phi1 = presets.get(name).functions()
        u = np.logspace(-1, 1, 41)
        full, _ = ominus_at(phi, phi1, u)
        u = u[np.isfinite(full)]
        gaps, bound = truncation_profile(phi, phi1, u, a_list)
        if fault:
            gaps = gaps[::-1]
        # rounding noise of the two supremum solves is ~1e-15 relative
        mono = np.all(np.diff(gaps) <= 1e-12)
        closed = np.all(gaps[a_list >= bound] <= TRUNCATION_RTOL) if math.isfinite(bound) else False
        checks += 2
        if not mono:
            violations += 1
            notes.append(f"{name}: gap not monotone")
        if not closed:
            violations += 1
            notes.append(f"{name}: gap open past argmax bound {bound:g}")
    return SuiteResult("truncation-sweep", violations == 0, checks, violations, "; ".join(notes))


def suite_holder(seed: int = 0, fault: bool = False, trials: int = 10000, names=None, n_cells: int = 64) -> SuiteResult:
    """``||x y||_phi <= 4 ||x||_phi1 ||y||_{phi (-) phi1}`` on random pairs."""
    names = names or presets.HOLDER_SWEEP
    rng = np.random.default_rng(seed)
    sp = make_space("finite", n_cells)
    const = 0.25 if fault else EMBED_CONST
    per = [trials // len(names) + (1 if i < trials % len(names) else 0) for i in range(len(names))]
    checks = violations = skipped = 0
    worst = 0.0
    for name, count in zip(names, per):
        if count == 0:
            continue
        phi, phi1 = presets.get(name).functions()
        gen = generator(name).function
        X = random_simple(rng, n_cells, count)
        Y = random_simple(rng, n_cells, count)
        for rep in holder_sweep(phi, phi1, X, Y, sp, gen):
            if rep.skipped:
                skipped += 1
                continue
            checks += 1
            bound = const * rep.x_norm * rep.y_norm
            if rep.product_norm > bound * (1 + 1e-12):
                violations += 1
            if math.isfinite(rep.ratio):
                worst = max(worst, rep.ratio)
    return SuiteResult(
        "holder-sweep", violations == 0, checks, violations,
        f"max ratio {worst:.3f}, {skipped} skipped", {"max_ratio": worst, "skipped": skipped},
    )


def lp_norm(y: np.ndarray, measures: np.ndarray, p: float) -> float:
    return float(np.sum(np.abs(y) ** p * measures) ** (1.0 / p))


def suite_operator_norm(seed: int = 0, fault: bool = False, trials: int = 20, n_cells: int = 64) -> SuiteResult:
    """For L^3 -> L^2 the certified lower bound reaches 95% of ``||y||_6``."""
    rng = np.random.default_rng(seed)
    phi, phi1 = presets.get("holder").functions()
    sp = make_space("finite", n_cells)
    need = 1.05 if fault else 0.95
    worst = math.inf
    violations = 0
    for row in random_simple(rng, n_cells, trials, decades=1.0):
        y = SimpleFunction(row)
        l6 = lp_norm(row, sp.measures, 6.0)
        if l6 == 0:
            continue
        lb = operator_norm_lower(phi1, phi, y, sp)
        worst = min(worst, lb / l6)
        if lb < need * l6:
            violations += 1
    return SuiteResult("operator-norm-lower", violations == 0, trials, violations, f"min lower/L6 {worst:.4f}")


def suite_drill(seed: int = 0, fault: bool = False, trials: int = 100, names=None, n_cells: int = 64, a: float = 2.0) -> SuiteResult:
    """The reverse-estimate pipeline ends with ``I_{phi (-)_a phi1}(y) <= 1/2``."""
    names = names or presets.UNBOUNDED
    rng = np.random.default_rng(seed)
    sp = make_space("finite", n_cells)
    checks = violations = 0
    worst_mod = worst_res = 0.0
    failing = []
    for name in names:
        phi, phi1 = presets.get(name).functions()
        gen = generator(name).function
        for row in random_simple(rng, n_cells, trials, decades=1.0):
            y = rescale_for_drill(phi, phi1, SimpleFunction(row), sp, target=1.0 if fault else 0.5, generator=gen)
            if fault:
                y = y * 50.0
            rep = reverse_estimate_drill(phi, phi1, y, sp, a)
            checks += 1
            worst_mod = max(worst_mod, rep.final_conjugate_modular)
            worst_res = max(worst_res, rep.witness_residual)
            if not rep.passed:
                violations += 1
                if name not in failing:
                    failing.append(name)
    detail = f"max final modular {worst_mod:.3g}, max witness residual {worst_res:.1e}"
    if failing:
        detail += "; failing: " + ", ".join(failing)
    return SuiteResult("reverse-drill", violations == 0, checks, violations, detail,
                       {"max_modular": worst_mod, "max_residual": worst_res})


_NORM_FUNCS = [
    Power(2.0), Power(3.0), Power(1.5, 2.0), Identity(), ExpMinusOne(), LinearAboveKnee(1.0),
    CutOff(Power(2.0), 1.0), CutOff(Power(2.0), 2.0, 4.0),
]


def suite_norm_modular(seed: int = 0, fault: bool = False, trials: int = 10000, n_cells: int = 64) -> SuiteResult:
    """``||x|| <= 1`` implies ``I(x) <= ||x||``, on random simple functions."""
    rng = np.random.default_rng(seed)
    sp = make_space("finite", n_cells)
    checks = violations = 0
    factor = 0.5 if fault else 1.0
    per = trials // len(_NORM_FUNCS)
    for k, phi in enumerate(_NORM_FUNCS):
        count = per + (trials - per * len(_NORM_FUNCS) if k == 0 else 0)
        X = random_simple(rng, n_cells, count, decades=1.0)
        norms = luxemburg_norms(phi, X, sp.measures)
        mods = _modular_rows(phi, X, sp.measures)
        active = norms <= 1.0
        bad = active & (mods > norms * factor * (1 + 1e-12))
        checks += count
        violations += int(bad.sum())
    return SuiteResult("norm-modular", violations == 0, checks, violations)


def suite_charfn(seed: int = 0, fault: bool = False, trials: int = 50) -> SuiteResult:
    """Norms of characteristic functions against ``1 / phi^-1(1 / mu(A))``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    violations = 0
    for _ in range(trials):
        phi = _NORM_FUNCS[int(rng.integers(len(_NORM_FUNCS)))]
        t = float(10 ** rng.uniform(-4, 2))
        space = make_space("finite", 1, cell_measure=t)
        got = luxemburg_norm(phi, SimpleFunction(np.ones(1)), space)
        want = charfn_norm(phi, t) * (1.1 if fault else 1.0)
        err = abs(got - want) / want
        worst = max(worst, err)
        if err > 1e-8:
            violations += 1
    return SuiteResult("charfn-norm", violations == 0, trials, violations, f"max rel err {worst:.1e}")


SUITES = {
    "young": suite_young,
    "dilation": suite_dilation,
    "truncation": suite_truncation,
    "holder": suite_holder,
    "opnorm": suite_operator_norm,
    "drill": suite_drill,
    "norm-modular": suite_norm_modular,
    "charfn": suite_charfn,
}

# lighter defaults for interactive runs; the acceptance tests use full sizes
QUICK_TRIALS = {"holder": 2000, "drill": 10, "norm-modular": 2000}


def run(names, seed: int = 0, trials: int | None = None, fault: str | None = None) -> list[SuiteResult]:
    out = []
    for name in names:
        fn = SUITES[name]
        kwargs = {"seed": seed, "fault": fault == name}
        if trials is not None and name in ("holder", "drill", "norm-modular", "opnorm", "charfn"):
            kwargs["trials"] = trials
        elif name in QUICK_TRIALS:
            kwargs["trials"] = QUICK_TRIALS[name]
        out.append(fn(**kwargs))
    return out
