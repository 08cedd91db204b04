"""Generalised Young conjugate ``phi (-) phi1``.

``(phi (-) phi1)(u) = sup_s { phi(s u) - phi1(s) }`` where ``s`` runs over

* ``(0, inf)`` when ``phi1`` is finite everywhere,
* ``(0, b]`` when ``phi1`` is finite up to and including ``b = b_phi1``,
* ``(0, b)`` when ``phi1(b) = inf`` (the value at ``b`` is replaced by the
  left limit so that ``inf - inf`` never occurs).

Three routes are provided:

``ominus_at`` / ``ominus``
    works on closed-form Young functions: scans a wide log grid in ``s``,
    polishes the discrete maximiser with golden-section search and detects
    suprema that escape to ``s = inf``.
``ominus_bruteforce``
    exhaustive maximisation over all pairs of two sampled functions.
``ominus_monotone``
    the same maximisation exploiting that the maximiser is non-decreasing in
    ``u`` (row maxima of a totally monotone matrix, divide and conquer).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .extended import INF, as_array
from .young import (
    GridSpec,
    Identity,
    Power,
    SampledYoung,
    YoungFunction,
    infinite_generator,
    linfty_generator,
)

_S_DECADES = 40  # unbounded s-range is [1e-40, 1e40]
_S_DECADES_BOUNDED = 80  # bounded s-range is [top * 1e-80, top]
_PER_DECADE = 16
_RHO = 10.0 ** (1.0 / _PER_DECADE)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_GOLDEN_ITERS = 64
_CHUNK = 256


class DomainConvention(str, Enum):
    OPEN_AT_B = "open_at_b"
    CLOSED_AT_B = "closed_at_b"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class OminusResult:
    function: SampledYoung
    argmax_profile: np.ndarray  # columns: u, s*(u)
    truncation: float
    domain_convention: DomainConvention
    fallback: bool = False

    @property
    def grid(self) -> np.ndarray:
        return self.function.grid

    @property
    def values(self) -> np.ndarray:
        return self.function.values

    @property
    def argmax(self) -> np.ndarray:
        return self.argmax_profile[:, 1]


def s_domain(phi1: YoungFunction, truncation: float | None = None):
    """Return ``(top, closed, convention)`` describing the range of ``s``."""
    b1 = phi1.b_phi
    if truncation is None:
        if math.isinf(b1):
            return INF, False, DomainConvention.UNBOUNDED
        if phi1.finite_at_b:
            return b1, True, DomainConvention.CLOSED_AT_B
        return b1, False, DomainConvention.OPEN_AT_B
    a = float(truncation)
    if not a > 0.0:
        raise ValueError(f"truncation must be > 0, got {a}")
    if a > b1:
        raise ValueError(f"truncation {a} exceeds b_phi1 = {b1}")
    if a == b1 and not phi1.finite_at_b:
        return a, False, DomainConvention.OPEN_AT_B
    return a, True, DomainConvention.CLOSED_AT_B


_EPS = 4.0 * np.finfo(float).eps


def _objective(phi, phi1, s, u, left=False, with_noise=False):
    """``phi(s u) - phi1(s)``; ``-inf`` marks excluded pairs, ``+inf`` a
    genuinely infinite first term.

    With ``with_noise`` also returns a rounding-error bound for the
    difference; candidates are ranked by ``value - noise`` so that
    cancellation between two huge terms cannot win the supremum.
    """
    x = s * u
    if left:
        f = np.asarray(phi.evaluate_left(x))
        f1 = np.asarray(phi1.evaluate_left(s))
    else:
        f = np.asarray(phi.evaluate(x))
        f1 = np.asarray(phi1.evaluate(s))
    genuine = phi.is_infinite_at(x, left=left)
    with np.errstate(invalid="ignore"):
        g = f - f1
    f_inf = np.isinf(f)
    f1_inf = np.isinf(np.broadcast_to(f1, g.shape))
    plus = f_inf & genuine & ~f1_inf
    bad = f1_inf | (f_inf & ~genuine) | np.isnan(g)
    g = np.where(plus, INF, np.where(bad, -INF, g))
    if not with_noise:
        return g
    with np.errstate(invalid="ignore"):
        noise = _EPS * (np.abs(f) + np.abs(f1))
    return g, np.where(np.isfinite(g), noise, 0.0)


def _s_grid(top: float) -> np.ndarray:
    if math.isinf(top):
        return np.logspace(-_S_DECADES, _S_DECADES, 2 * _S_DECADES * _PER_DECADE + 1)
    grid = top * np.logspace(-_S_DECADES_BOUNDED, 0, _S_DECADES_BOUNDED * _PER_DECADE + 1)
    grid[-1] = top
    return grid


def _sup_chunk(phi, phi1, u, grid, top, closed):
    unbounded = math.isinf(top)
    n = len(u)
    U = u[:, None]
    K = len(grid)
    if unbounded or closed:
        G, N = _objective(phi, phi1, grid[None, :], U, with_noise=True)
    else:
        G0, N0 = _objective(phi, phi1, grid[None, :-1], U, with_noise=True)
        G1, N1 = _objective(phi, phi1, grid[None, -1:], U, left=True, with_noise=True)
        G, N = np.concatenate([G0, G1], axis=1), np.concatenate([N0, N1], axis=1)
    S = np.broadcast_to(grid, (n, K))

    # kinks of phi1 (fixed s) and of phi (s = kink / u) join the candidates
    k1 = np.array([k for k in phi1.kinks() if 0 < k < top or (k == top and closed)])
    if len(k1):
        gk, nk = _objective(phi, phi1, k1[None, :], U, with_noise=True)
        S = np.concatenate([S, np.broadcast_to(k1, (n, len(k1)))], axis=1)
        G, N = np.concatenate([G, gk], axis=1), np.concatenate([N, nk], axis=1)
    k0 = np.array(phi.kinks())
    if len(k0):
        sk = k0[None, :] / U
        inside = (sk > 0) & ((sk < top) | ((sk == top) & closed))
        gk, nk = _objective(phi, phi1, np.where(inside, sk, 0.0), U, with_noise=True)
        gk = np.where(inside, gk, -INF)
        S = np.concatenate([S, sk], axis=1)
        G, N = np.concatenate([G, gk], axis=1), np.concatenate([N, nk], axis=1)

    values = np.zeros(n)
    argmax = np.zeros(n)
    rows = np.arange(n)

    plus = np.any(G == INF, axis=1)
    score = G - N
    best = np.argmax(score, axis=1)
    gbest = G[rows, best]
    sbest = S[rows, best]
    positive = (score[rows, best] > 0) & ~plus

    values[plus] = INF
    argmax[plus] = INF

    # supremum escaping to s = inf: look at the growth of the last increments
    tail = np.zeros(n, dtype=bool)
    if unbounded:
        valid = np.isfinite(G[:, :K])
        has_valid = valid.any(axis=1)
        jl = K - 1 - np.argmax(valid[:, ::-1], axis=1)
        idx = rows[positive & has_valid & (jl >= 2)]
        if len(idx):
            j = jl[idx]
            g0, g1, g2 = G[idx, j - 2], G[idx, j - 1], G[idx, j]
            n1, n2 = N[idx, j - 1], N[idx, j]
            at_end = (score[idx, j] >= score[idx, best[idx]]) & np.isfinite(g0) & np.isfinite(g1)
            d1 = g1 - g0
            d2 = g2 - g1
            growing = at_end & (d2 > n1 + n2)
            with np.errstate(divide="ignore", invalid="ignore"):
                r = np.where(d1 > 0, d2 / d1, INF)
            diverges = growing & (r >= 1.0)
            converges = growing & (r < 1.0)
            values[idx[diverges]] = INF
            argmax[idx[diverges]] = INF
            rc = r[converges]
            values[idx[converges]] = g2[converges] + d2[converges] * rc / (1.0 - rc)
            argmax[idx[converges]] = INF
            tail[idx[growing]] = True

    idx = rows[positive & ~tail]
    if len(idx):
        s0 = sbest[idx]
        uu = u[idx]
        lo = np.log(s0 / _RHO)
        hi = np.log(np.minimum(s0 * _RHO, top))
        best_v = gbest[idx].copy()
        best_sc = score[idx, best[idx]].copy()
        best_s = s0.copy()

        def f(logs):
            s = np.minimum(np.exp(logs), top)
            g, nz = _objective(phi, phi1, s, uu, with_noise=True)
            return s, g, g - nz

        def keep(s_, g_, sc_):
            nonlocal best_v, best_sc, best_s
            better = sc_ > best_sc
            best_v = np.where(better, g_, best_v)
            best_sc = np.where(better, sc_, best_sc)
            best_s = np.where(better, s_, best_s)

        a, b = lo, hi
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        sc_, gc, fc = f(c)
        keep(sc_, gc, fc)
        sd_, gd, fd = f(d)
        keep(sd_, gd, fd)
        for _ in range(_GOLDEN_ITERS):
            left = fc >= fd
            a_n = np.where(left, a, c)
            b_n = np.where(left, d, b)
            c_n = np.where(left, b_n - _GOLDEN * (b_n - a_n), d)
            d_n = np.where(left, c, a_n + _GOLDEN * (b_n - a_n))
            s_new, g_new, f_new = f(np.where(left, c_n, d_n))
            keep(s_new, g_new, f_new)
            fc, fd = np.where(left, f_new, fd), np.where(left, fc, f_new)
            a, b, c, d = a_n, b_n, c_n, d_n
        values[idx] = best_v
        argmax[idx] = best_s
    return values, argmax


def ominus_at(phi: YoungFunction, phi1: YoungFunction, u, truncation: float | None = None):
    """Pointwise ``(phi (-) phi1)(u)`` or its truncation to ``s <= truncation``.

    Returns ``(values, argmax)``; ``argmax`` is ``inf`` where the supremum is
    infinite or approached only as ``s -> inf``, and ``0`` where it is ``0``.
    """
    top, closed, _ = s_domain(phi1, truncation)
    scalar = np.ndim(u) == 0
    uu = np.atleast_1d(as_array(u)).ravel()
    if np.any(uu < 0):
        raise ValueError("u must be >= 0")
    values = np.zeros(len(uu))
    argmax = np.zeros(len(uu))
    grid = _s_grid(top)
    pos = np.nonzero(uu > 0)[0]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for start in range(0, len(pos), _CHUNK):
            sel = pos[start : start + _CHUNK]
            v, s = _sup_chunk(phi, phi1, uu[sel], grid, top, closed)
            values[sel] = v
            argmax[sel] = s
    if scalar:
        return float(values[0]), float(argmax[0])
    shape = np.shape(u)
    return values.reshape(shape), argmax.reshape(shape)


def _result(grid, values, argmax, truncation, convention, provenance, fallback=False):
    values = np.asarray(values, dtype=float).copy()
    # the conjugate is non-decreasing, so a genuine inf persists to the right
    inf_seen = np.maximum.accumulate(np.isinf(values))
    values[inf_seen] = INF
    return OminusResult(
        function=SampledYoung(grid, values, provenance),
        argmax_profile=np.column_stack([grid, argmax]),
        truncation=truncation,
        domain_convention=convention,
        fallback=fallback,
    )


def _name(phi) -> str:
    from .funcdsl import format_expr

    try:
        return format_expr(phi)
    except TypeError:
        return getattr(phi, "provenance", "") or type(phi).__name__


def ominus(phi: YoungFunction, phi1: YoungFunction, grid: GridSpec | None = None) -> OminusResult:
    """Sample ``phi (-) phi1`` on a log grid (``0`` prepended)."""
    grid = grid or GridSpec()
    us = grid.points()
    _, _, convention = s_domain(phi1)
    values, argmax = ominus_at(phi, phi1, us)
    return _result(us, values, argmax, INF, convention, f"ominus({_name(phi)},{_name(phi1)})")


def ominus_truncated(phi, phi1, a: float, grid: GridSpec | None = None) -> OminusResult:
    """Sample the truncated conjugate, supremum over ``0 <= s <= a``."""
    grid = grid or GridSpec()
    us = grid.points()
    _, _, convention = s_domain(phi1, a)
    values, argmax = ominus_at(phi, phi1, us, truncation=a)
    return _result(us, values, argmax, float(a), convention, f"ominus_{a:g}({_name(phi)},{_name(phi1)})")


def classical_conjugate(phi1: YoungFunction, grid: GridSpec | None = None) -> OminusResult:
    return ominus(Identity(), phi1, grid)


def truncation_sweep(phi, phi1, a_list, grid: GridSpec | None = None) -> list[OminusResult]:
    a_list = [float(a) for a in a_list]
    if any(b <= a for a, b in zip(a_list, a_list[1:])):
        raise ValueError("truncation levels must be strictly increasing")
    return [ominus_truncated(phi, phi1, a, grid) for a in a_list]


def ominus_b(phi: YoungFunction, phi1: YoungFunction) -> float:
    """``b`` parameter of ``phi (-) phi1``.

    Exact when at least one argument has a finite ``b``; otherwise located by
    bisection on finiteness of the pointwise conjugate.
    """
    b, b1 = phi.b_phi, phi1.b_phi
    if math.isfinite(b) and math.isinf(b1):
        return 0.0
    if math.isinf(b) and math.isfinite(b1):
        return INF
    if math.isfinite(b) and math.isfinite(b1):
        return b / b1
    lo, hi = -12.0, 12.0
    if math.isfinite(ominus_at(phi, phi1, 10.0**hi)[0]):
        return INF
    if math.isinf(ominus_at(phi, phi1, 10.0**lo)[0]):
        return 0.0
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if math.isinf(ominus_at(phi, phi1, 10.0**mid)[0]):
            hi = mid
        else:
            lo = mid
    return 10.0**lo


class PointwiseOminus:
    """Callable ``phi (-) phi1`` evaluated exactly at requested points.

    Slower than the sampled result but free of interpolation error; used where
    norms are compared at tight tolerances.
    """

    def __init__(self, phi, phi1, truncation: float | None = None):
        self.phi = phi
        self.phi1 = phi1
        self.truncation = truncation

    def evaluate(self, u):
        return ominus_at(self.phi, self.phi1, u, self.truncation)[0]

    __call__ = evaluate


def power_ominus(phi: Power | Identity, phi1: Power | Identity) -> YoungFunction:
    """Closed form of ``(a u^p) (-) (b s^q)``.

    ``q > p`` gives ``c u^(pq/(q-p))``; ``q = p`` gives the ``L^inf``
    generator with jump at ``(b/a)^(1/p)``; ``q < p`` is infinite for u > 0.
    """

    def coeffs(f):
        if isinstance(f, Identity):
            return 1.0, 1.0
        if isinstance(f, Power):
            return f.p, f.scale
        raise TypeError("closed form only for Power/Identity pairs")

    p, alpha = coeffs(phi)
    q, beta = coeffs(phi1)
    if q < p:
        return infinite_generator()
    if q == p:
        return linfty_generator((beta / alpha) ** (1.0 / p))
    r = p * q / (q - p)
    coef = alpha * (1.0 - p / q) * (p * alpha / (q * beta)) ** (p / (q - p))
    return Power(r, coef)


def power_argmax(phi: Power | Identity, phi1: Power | Identity, u):
    """Maximiser ``s*(u) = (p a u^p / (q b))^(1/(q-p))`` for ``q > p``."""
    p, alpha = (1.0, 1.0) if isinstance(phi, Identity) else (phi.p, phi.scale)
    q, beta = (1.0, 1.0) if isinstance(phi1, Identity) else (phi1.p, phi1.scale)
    if not q > p:
        raise ValueError("maximiser is finite only when q > p")
    return (p * alpha * as_array(u) ** p / (q * beta)) ** (1.0 / (q - p))


# ---------------------------------------------------------------------------
# sampled routes


def _sampled_setup(phis: SampledYoung, phi1s: SampledYoung):
    us = phis.grid
    ss = phi1s.grid
    f1 = phi1s.values
    n_valid = phi1s.infinite_from()
    if n_valid == 0:
        raise ValueError("phi1 sample has no finite values")
    s_last = ss[n_valid - 1]
    row_inf = np.isinf(np.asarray(phis.evaluate(s_last * us)))
    return us, ss[:n_valid], f1[:n_valid], row_inf


def _entries(phis, u, s, f1):
    with np.errstate(invalid="ignore"):
        return np.asarray(phis.evaluate(s * u)) - f1


def _sampled_convention(phi1s: SampledYoung):
    if phi1s.infinite_from() < len(phi1s.values):
        return DomainConvention.CLOSED_AT_B
    return DomainConvention.UNBOUNDED


def bruteforce_rows(phis: SampledYoung, phi1s: SampledYoung, rows=None):
    """Exhaustive row maxima for the selected grid rows of ``phis``.

    Returns ``(values, argmax)`` for those rows; used directly for timing
    the oracle on a subset of rows.
    """
    us, ss, f1, row_inf = _sampled_setup(phis, phi1s)
    rows = np.arange(len(us)) if rows is None else np.asarray(rows, dtype=int)
    values = np.full(len(rows), INF)
    argmax = np.full(len(rows), INF)
    live = np.nonzero(~row_inf[rows])[0]
    chunk = max(1, 2_000_000 // max(len(ss), 1))
    for start in range(0, len(live), chunk):
        sel = live[start : start + chunk]
        M = _entries(phis, us[rows[sel], None], ss[None, :], f1[None, :])
        k = np.argmax(M, axis=1)
        values[sel] = M[np.arange(len(sel)), k]
        argmax[sel] = ss[k]
    return values, argmax


def ominus_bruteforce(phis: SampledYoung, phi1s: SampledYoung) -> OminusResult:
    """Exhaustive maximisation over every (u, s) grid pair."""
    values, argmax = bruteforce_rows(phis, phi1s)
    name = f"bruteforce({phis.provenance},{phi1s.provenance})"
    return _result(phis.grid, values, argmax, INF, _sampled_convention(phi1s), name)


def _monotone_rows(phis, us, ss, f1):
    """Leftmost row maxima of ``M[i, j] = phis(ss[j] us[i]) - f1[j]``
    assuming the leftmost maximiser is non-decreasing in ``i``."""
    R, m = len(us), len(ss)
    best_col = np.zeros(R, dtype=np.int64)
    best_val = np.zeros(R)
    lo_r = np.array([0])
    hi_r = np.array([R])
    lo_c = np.array([0])
    hi_c = np.array([m - 1])
    while len(lo_r):
        mid = (lo_r + hi_r) // 2
        lens = hi_c - lo_c + 1
        offsets = np.concatenate([[0], np.cumsum(lens)[:-1]])
        total = int(lens.sum())
        pos = np.arange(total)
        cols = np.repeat(lo_c - offsets, lens) + pos
        rws = np.repeat(mid, lens)
        vals = _entries(phis, us[rws], ss[cols], f1[cols])
        segmax = np.maximum.reduceat(vals, offsets)
        hit = np.where(vals == np.repeat(segmax, lens), pos, total)
        first = np.minimum.reduceat(hit, offsets)
        first = np.minimum(first, total - 1)
        k = cols[first]
        best_col[mid] = k
        best_val[mid] = segmax

        left = mid > lo_r
        right = mid + 1 < hi_r
        lo_r = np.concatenate([lo_r[left], mid[right] + 1])
        hi_r = np.concatenate([mid[left], hi_r[right]])
        lo_c = np.concatenate([lo_c[left], k[right]])
        hi_c = np.concatenate([k[left], hi_c[right]])
    return best_val, best_col


def ominus_monotone(phis: SampledYoung, phi1s: SampledYoung) -> OminusResult:
    """Divide-and-conquer row maxima; O((n + m) log n) entry evaluations.

    Falls back to :func:`ominus_bruteforce` (``fallback=True``) when either
    input is not discretely convex, since the maximiser is then no longer
    guaranteed to be monotone.
    """
    if not (phis.is_discretely_convex() and phi1s.is_discretely_convex()):
        res = ominus_bruteforce(phis, phi1s)
        return OminusResult(res.function, res.argmax_profile, res.truncation, res.domain_convention, True)
    us, ss, f1, row_inf = _sampled_setup(phis, phi1s)
    values = np.full(len(us), INF)
    argmax = np.full(len(us), INF)
    rows = np.nonzero(~row_inf)[0]
    if len(rows):
        v, k = _monotone_rows(phis, us[rows], ss, f1)
        values[rows] = v
        argmax[rows] = ss[k]
    name = f"monotone({phis.provenance},{phi1s.provenance})"
    return _result(us, values, argmax, INF, _sampled_convention(phi1s), name)
