"""Bracketed one-dimensional and small multi-dimensional optimizers.

Everything here is deterministic and dependency-free: golden-section line
search on an interval, a grid-seeded maximizer for possibly kinked
one-dimensional objectives, and a coordinate-descent / Nelder-Mead hybrid
for boxed few-parameter minimization.
"""

from __future__ import annotations

import math

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

__all__ = ["golden_min", "golden_max", "grid_golden_max", "grid_golden_min", "boxed_minimize"]


def golden_min(fun, lo, hi, xtol=1e-13, max_iter=200):
    """Golden-section minimization on [lo, hi]; returns (x, f(x))."""
    a, b = float(lo), float(hi)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fun(d)
        if b - a <= xtol:
            break
    x = 0.5 * (a + b)
    return x, fun(x)


def golden_max(fun, lo, hi, xtol=1e-13, max_iter=200):
    x, f = golden_min(lambda t: -fun(t), lo, hi, xtol=xtol, max_iter=max_iter)
    return x, -f


def grid_golden_max(fun, lo, hi, n_grid=60, xtol=1e-13, extra_points=()):
    """Maximize on [lo, hi]: grid seed, then golden refinement of every
    grid-local maximum.

    Refining all local maxima (not just the best cell) is essential when
    the objective carries near-tied peaks separated by a kink or jump;
    ``extra_points`` lets callers inject known kink locations so the seed
    never straddles one.
    """
    lo, hi = float(lo), float(hi)
    if hi <= lo:
        return lo, fun(lo)
    pts = [lo + (hi - lo) * i / n_grid for i in range(n_grid + 1)]
    for p in extra_points:
        if lo < p < hi:
            pts.append(float(p))
    pts = sorted(set(pts))
    vals = [fun(p) for p in pts]
    last = len(pts) - 1
    candidates = [
        i for i in range(len(pts))
        if (i == 0 or vals[i] >= vals[i - 1]) and (i == last or vals[i] >= vals[i + 1])
    ]
    i_best = max(range(len(pts)), key=lambda i: vals[i])
    x_best, f_best = pts[i_best], vals[i_best]
    for i in candidates:
        a = pts[max(0, i - 1)]
        b = pts[min(last, i + 1)]
        x, f = golden_max(fun, a, b, xtol=xtol)
        if f > f_best:
            x_best, f_best = x, f
    return x_best, f_best


def grid_golden_min(fun, lo, hi, n_grid=60, xtol=1e-13, extra_points=()):
    """Minimize on [lo, hi]; see :func:`grid_golden_max`."""
    x, f = grid_golden_max(lambda t: -fun(t), lo, hi, n_grid=n_grid,
                           xtol=xtol, extra_points=extra_points)
    return x, -f


def _nelder_mead(fun, x0, step=0.05, max_iter=4000, ftol=1e-14, xtol=1e-12):
    n = len(x0)
    pts = [list(x0)]
    for i in range(n):
        p = list(x0)
        p[i] = min(1.0 - 1e-9, max(1e-9, p[i] + step))
        pts.append(p)
    vals = [fun(p) for p in pts]
    for _ in range(max_iter):
        order = sorted(range(n + 1), key=lambda i: vals[i])
        pts = [pts[i] for i in order]
        vals = [vals[i] for i in order]
        spread = max(abs(pts[-1][j] - pts[0][j]) for j in range(n))
        if vals[-1] - vals[0] < ftol * max(1.0, abs(vals[0])) and spread < xtol:
            break
        cen = [sum(p[j] for p in pts[:-1]) / n for j in range(n)]
        xr = [cen[j] + (cen[j] - pts[-1][j]) for j in range(n)]
        fr = fun(xr)
        if fr < vals[0]:
            xe = [cen[j] + 2.0 * (cen[j] - pts[-1][j]) for j in range(n)]
            fe = fun(xe)
            pts[-1], vals[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < vals[-2]:
            pts[-1], vals[-1] = xr, fr
        else:
            xc = [cen[j] + 0.5 * (pts[-1][j] - cen[j]) for j in range(n)]
            fc = fun(xc)
            if fc < vals[-1]:
                pts[-1], vals[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    pts[i] = [pts[0][j] + 0.5 * (pts[i][j] - pts[0][j]) for j in range(n)]
                    vals[i] = fun(pts[i])
    i_best = min(range(n + 1), key=lambda i: vals[i])
    return pts[i_best], vals[i_best]


def _coordinate_descent(fun, x0, sweeps=25, tol=1e-13):
    th = list(x0)
    fv = fun(th)
    prev = list(th)
    n = len(th)
    for _ in range(sweeps):
        f_start = fv
        for i in range(n):
            def f1(x, i=i):
                cand = list(th)
                cand[i] = x
                return fun(cand)

            x, v = golden_min(f1, 1e-9, 1.0 - 1e-9)
            if v < fv:
                th[i] = x
                fv = v
        direction = [th[i] - prev[i] for i in range(n)]
        if any(abs(d) > 1e-15 for d in direction):
            def f_line(t):
                return fun([th[i] + t * direction[i] for i in range(n)])

            t, v = golden_min(f_line, -2.0, 4.0)
            if v < fv:
                th = [min(1.0 - 1e-9, max(1e-9, th[i] + t * direction[i])) for i in range(n)]
                fv = v
        prev = list(th)
        if f_start - fv < tol * max(1.0, abs(fv)):
            break
    return th, fv


def boxed_minimize(fun, seeds, energy_tol=1e-10):
    """Minimize fun over the unit box from several seeds.

    Each seed runs coordinate descent (golden-section line searches with a
    Powell-style acceleration step), a Nelder-Mead polish, and a final
    descent pass.  Returns (x_best, f_best); infeasible seeds (fun = inf)
    are skipped.
    """
    best_x, best_f = None, math.inf
    for seed in seeds:
        th = [min(1.0 - 1e-9, max(1e-9, v)) for v in seed]
        if not math.isfinite(fun(th)):
            continue
        th, fv = _coordinate_descent(fun, th, sweeps=25, tol=energy_tol * 1e-3)
        th, fv = _nelder_mead(fun, th, step=0.03)
        th, fv = _coordinate_descent(fun, th, sweeps=10, tol=energy_tol * 1e-3)
        if fv < best_f:
            best_x, best_f = th, fv
    return best_x, best_f
