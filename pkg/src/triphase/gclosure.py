"""G-closure boundary from the envelope of the r-parametrized bound family.

With the doubled convention B(r) = k*1 + r^2 k*2, the envelope of the
family gives

    k*1(r) = B - (r/2) dB/dr,      k*2(r) = (1/2r) dB/dr,

which reproduces every per-region closed form (checked in the acceptance
suite).  In regions A, B, C, D the derivative dB/dr is analytic; in region
E it is taken by central finite differences and the point is flagged
non-exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import CompositeSpec, DomainError
from .bounds import EXACT_REGIONS, Region, lower_bound, t_cr1

__all__ = [
    "GClosurePoint",
    "gclosure_point",
    "gclosure_curve",
    "comparison_bounds",
    "envelope_residual",
    "region_B_K",
    "region_A_K",
    "region_D_K",
    "region_C_point",
    "relation_residual",
]

R_MIN = 1e-6


@dataclass(frozen=True)
class GClosurePoint:
    r: float
    k_star1: float
    k_star2: float
    region: Region
    exact: bool


def _harmonic(spec: CompositeSpec) -> float:
    return 1.0 / (spec.m1 / spec.k1 + spec.m2 / spec.k2)


def _H1(spec: CompositeSpec) -> float:
    return 1.0 / (spec.m1 / (2 * spec.k1) + spec.m2 / (spec.k1 + spec.k2))


def _H2(spec: CompositeSpec) -> float:
    return 1.0 / (spec.m1 / (2 * spec.k1) + spec.m2 / (2 * spec.k2))


# Printed per-region closed forms, used to cross-check the envelope path.

def region_B_K(spec: CompositeSpec, rho: float) -> float:
    """K(rho) such that (k*1, k*2) = (K(r), K(1/r)) in region B."""
    s = math.sqrt(rho * spec.m2)
    return spec.k1 * (1 - s) * (1 + rho - 2 * s) / spec.m1 + rho * spec.k2


def region_A_K(spec: CompositeSpec, rho: float) -> float:
    return 0.5 * (1 + rho) * _H2(spec) - rho * spec.k2


def region_D_K(spec: CompositeSpec, rho: float) -> float:
    return 0.5 * (1 + rho) * _H1(spec) - rho * spec.k1


def region_C_point(spec: CompositeSpec) -> tuple[float, float]:
    k1s = ((1 - spec.m2) ** 2 * spec.k1 + spec.m1 * spec.m2 * spec.k2) / spec.m1
    return k1s, spec.k2 / spec.m2


def _dB_dr_analytic(spec: CompositeSpec, r: float, region: Region) -> float:
    if region in (Region.A1, Region.A2):
        return _H2(spec) * (1 + r) - 2 * spec.k2
    if region is Region.B:
        u = 1 + r - 2 * math.sqrt(r * spec.m2)
        return 2 * spec.k1 * u * (1 - math.sqrt(spec.m2 / r)) / spec.m1 + 2 * spec.k2
    if region is Region.C:
        return 2 * spec.k2 * r / spec.m2
    if region in (Region.D1, Region.D2):
        return _H1(spec) * (1 + r) - 2 * spec.k1
    raise ValueError(f"no analytic derivative in region {region}")


def gclosure_point(spec: CompositeSpec, r: float) -> GClosurePoint:
    """Envelope point (k*1(r), k*2(r)) of the bound family.

    Region E uses a finite-difference dB/dr (step 1e-6 * max(r, 1e-3)) and
    is flagged non-exact, as is region D2 where the translation bound is
    presumed unattainable.
    """
    if r < R_MIN:
        raise DomainError(f"gclosure_point requires r >= {R_MIN}, got {r}")
    res = lower_bound(spec, r)
    region = res.region
    if region is Region.E:
        h = 1e-6 * max(r, 1e-3)
        h = min(h, (1.0 - r) / 2 if r < 1.0 else h, r / 2)
        b_plus = lower_bound(spec, r + h).B
        b_minus = lower_bound(spec, r - h).B
        db = (b_plus - b_minus) / (2 * h)
    else:
        db = _dB_dr_analytic(spec, r, region)
    k1s = res.B - 0.5 * r * db
    k2s = db / (2 * r)
    return GClosurePoint(r=r, k_star1=k1s, k_star2=k2s, region=region,
                         exact=region in EXACT_REGIONS)


def gclosure_curve(spec: CompositeSpec, r_grid) -> list[GClosurePoint]:
    """Envelope points for an increasing grid of r values in (0, 1]."""
    pts = [gclosure_point(spec, r) for r in sorted(r_grid)]
    return pts


def comparison_bounds(spec: CompositeSpec, r: float):
    """Harmonic-mean bound and the plain translation-bound point.

    The superconducting phase contributes zero resistivity to the harmonic
    mean.  The translation point is the region-D parametrization evaluated
    regardless of its validity region, for comparison plots.
    """
    harmonic = _harmonic(spec)
    return harmonic, (region_D_K(spec, r), region_D_K(spec, 1.0 / r))


def envelope_residual(spec: CompositeSpec, r: float) -> float:
    """Relative residual |k*1 + r^2 k*2 - B(r)| / B(r)."""
    pt = gclosure_point(spec, r)
    b = lower_bound(spec, r).B
    return abs(pt.k_star1 + r**2 * pt.k_star2 - b) / abs(b)


def relation_residual(spec: CompositeSpec, pt: GClosurePoint) -> float:
    """Residual of the closed-form pointwise relation for the point's region.

    Region A:  1/(k*1-k2) + 1/(k*2-k2) = 2/(H2 - 2 k2)
    Region D:  1/(k*1-k1) + 1/(k*2-k1) = 2/(H1 - 2 k1)
    Region B:  1/(k*1-t) + 1/(k*2-t) = 2/(H0(t) - 2t) at t = t_cr1(r)
    Region C:  distance to the constant point.
    """
    k1, k2 = spec.k1, spec.k2
    if pt.region in (Region.A1, Region.A2):
        lhs = 1.0 / (pt.k_star1 - k2) + 1.0 / (pt.k_star2 - k2)
        return abs(lhs - 2.0 / (_H2(spec) - 2 * k2))
    if pt.region in (Region.D1, Region.D2):
        lhs = 1.0 / (pt.k_star1 - k1) + 1.0 / (pt.k_star2 - k1)
        return abs(lhs - 2.0 / (_H1(spec) - 2 * k1))
    if pt.region is Region.B:
        t = t_cr1(spec, pt.r)
        h0 = 1.0 / (spec.m1 / (2 * k1) + spec.m2 / (k2 + t))
        lhs = 1.0 / (pt.k_star1 - t) + 1.0 / (pt.k_star2 - t)
        return abs(lhs - 2.0 / (h0 - 2 * t))
    if pt.region is Region.C:
        k1c, k2c = region_C_point(spec)
        return max(abs(pt.k_star1 - k1c), abs(pt.k_star2 - k2c))
    raise ValueError(f"no closed-form relation in region {pt.region}")
