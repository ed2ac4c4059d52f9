"""Scalar convex search on open intervals and numeric convex conjugates.

All 1-D searches run on a smoothly transformed unbounded coordinate so that
open interval endpoints (where the objectives of interest typically blow up)
are never evaluated directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize as sciopt

INF = float("inf")
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi
_BIG = 1e300


@dataclass(frozen=True)
class ScalarObjective:
    """A scalar extended-real objective on an open interval (lo, hi)."""

    fn: Callable[[float], float]
    lo: float = -INF
    hi: float = INF
    convexity: str = "unknown"  # "convex", "concave" or "unknown"


@dataclass
class OptResult:
    arg: float
    value: float
    iterations: int
    bracket: Tuple[float, float]
    converged: bool
    boundary: bool = False


def _transform(lo: float, hi: float) -> Callable[[float], float]:
    """Smooth bijection from the real line onto the open interval (lo, hi)."""
    if lo == -INF and hi == INF:
        return lambda s: s
    if lo > -INF and hi == INF:
        return lambda s: lo + math.exp(min(s, 700.0))
    if lo == -INF:
        return lambda s: hi - math.exp(min(-s, 700.0))
    span = hi - lo

    def to_x(s: float) -> float:
        # logistic map; clamp to avoid overflow in exp
        if s > 700.0:
            return hi - span * 1e-300
        if s < -700.0:
            return lo + span * 1e-300
        return lo + span / (1.0 + math.exp(-s))

    return to_x


def _safe(fn: Callable[[float], float]) -> Callable[[float], float]:
    def f(x: float) -> float:
        try:
            v = fn(x)
        except (OverflowError, ValueError):
            return INF
        if v != v:  # nan
            return INF
        return v

    return f


def _golden(f: Callable[[float], float], a: float, b: float, tol: float):
    """Golden-section minimization of f on [a, b]; returns (arg, value, iters)."""
    c = b - (b - a) * _INVPHI
    d = a + (b - a) * _INVPHI
    fc, fd = f(c), f(d)
    it = 0
    while abs(b - a) > tol and it < 400:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * _INVPHI
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * _INVPHI
            fd = f(d)
        it += 1
    s = c if fc <= fd else d
    return s, min(fc, fd), it


def minimize_1d(
    obj: ScalarObjective,
    tol: float = 1e-8,
    coarse: int = 121,
    s_lo: float = -30.0,
    s_hi: float = 30.0,
) -> OptResult:
    """Minimize a (nominally convex) scalar objective on its open domain.

    Strategy: coarse scan on the transformed coordinate, geometric bracket
    expansion if the minimum sits at the scan edge, then golden section.
    Monotone-to-boundary objectives come back with ``boundary=True`` and the
    boundary-limit estimate as the value.
    """
    to_x = _transform(obj.lo, obj.hi)
    raw = _safe(obj.fn)
    f = lambda s: raw(to_x(s))

    grid = np.linspace(s_lo, s_hi, coarse)
    vals = [f(s) for s in grid]
    if all(v == INF for v in vals):
        raise ValueError("objective is not finite anywhere in the probed domain")
    i = int(np.argmin(vals))
    evals = coarse

    step = grid[1] - grid[0]
    boundary = False
    if i == 0 or i == coarse - 1:
        # expand outward by geometric doubling until the objective turns up
        direction = -1.0 if i == 0 else 1.0
        s_best, v_best = grid[i], vals[i]
        expansions = 0
        while expansions < 200:
            s_next = s_best + direction * step
            v_next = f(s_next)
            evals += 1
            if v_next >= v_best:
                break
            s_best, v_best = s_next, v_next
            step *= 2.0
            expansions += 1
        else:
            x = to_x(s_best)
            return OptResult(x, v_best, evals, (to_x(s_best - step), to_x(s_best + step)),
                             converged=False, boundary=True)
        if expansions >= 100:
            boundary = True
        if (obj.lo > -INF or obj.hi < INF) and abs(s_best) >= 550.0:
            # exp-scale coordinate ran off: the infimum sits at an open end
            boundary = True
        a, b = s_best - step, s_best + step
    else:
        a, b = grid[i - 1], grid[i + 1]

    s_star, v_star, it = _golden(f, a, b, tol)
    evals += 2 * it + 2
    # three-point probe: certify local optimality at the working tolerance
    delta = max(10.0 * tol, 1e-7)
    ok = f(s_star) <= min(f(s_star - delta), f(s_star + delta)) + 1e-12 + abs(v_star) * 1e-9
    x_star = to_x(s_star)
    return OptResult(x_star, v_star, evals, (to_x(a), to_x(b)),
                     converged=ok and not boundary, boundary=boundary)


def maximize_1d(obj: ScalarObjective, tol: float = 1e-8, **kw) -> OptResult:
    """Maximize by minimizing the negation."""
    neg = ScalarObjective(lambda x: -obj.fn(x), obj.lo, obj.hi,
                          {"concave": "convex", "convex": "concave"}.get(obj.convexity, "unknown"))
    res = minimize_1d(neg, tol=tol, **kw)
    res.value = -res.value
    return res


_FY_PROBES = np.random.default_rng(20240817).normal(size=(20, 2)) * 2.0


def _conjugate_with_arg(
    f: Callable[[Sequence[float]], float],
    x: Sequence[float],
    starts: Optional[Sequence[Sequence[float]]] = None,
    maxiter: int = 600,
    xatol: float = 1e-10,
    fatol: float = 1e-13,
):
    x = np.asarray(x, dtype=float)
    opts = {"xatol": xatol, "fatol": fatol, "maxiter": maxiter}

    def neg_phi(lam: np.ndarray) -> float:
        fv = f(lam)
        if not np.isfinite(fv):
            return _BIG
        return fv - float(lam @ x)

    if starts is None:
        g = (-1.0, 0.0, 1.0)
        starts = [np.array([u, v]) for u in g for v in g]
    best_val, best_lam = -INF, np.zeros(2)
    for s0 in starts:
        r = sciopt.minimize(neg_phi, np.asarray(s0, dtype=float), method="Nelder-Mead",
                            options=opts)
        v = -r.fun
        if v > best_val:
            best_val, best_lam = v, r.x
    # Fenchel-Young audit: any probe beating the incumbent restarts the ascent
    for lam in _FY_PROBES:
        fv = f(lam)
        if np.isfinite(fv) and float(lam @ x) - fv > best_val + 1e-10:
            r = sciopt.minimize(neg_phi, lam, method="Nelder-Mead", options=opts)
            if -r.fun > best_val:
                best_val, best_lam = -r.fun, r.x
    if best_val > 1e12 or np.max(np.abs(best_lam)) > 1e8:
        return INF, best_lam
    return best_val, best_lam


def fenchel_conjugate_2d(f: Callable[[Sequence[float]], float], x: Sequence[float],
                         starts: Optional[Sequence[Sequence[float]]] = None,
                         **budget) -> float:
    """Numeric Legendre-Fenchel conjugate sup_lam <lam, x> - f(lam) on R^2.

    f must be convex with f(0) finite; +inf values of f mark the outside of
    its effective domain. Returns +inf when the supremum is unbounded (x
    outside the closure of the gradient range). Keyword arguments cap the
    inner search budget (maxiter, xatol, fatol).
    """
    val, _ = _conjugate_with_arg(f, x, starts=starts, **budget)
    return val
