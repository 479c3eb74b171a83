"""Cross-cutting verification campaigns.

Attainability sweeps over the (m1, r) plane, the region-E bound/structure
gap experiment, the rank-one incompatibility witness that explains why the
region-E bound cannot be attained, the special meeting points of the region
map, and an aggregated invariant suite for the CLI ``verify`` command.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import SQRT2, CompositeSpec, DomainError, EmptyRegion, OutOfApplicability
from .translation import Regime, translated_cell_energy_closed, oracle_minimizer
from .bounds import (
    Region,
    boundary_curves,
    brute_force_bound,
    classify_region,
    lower_bound,
    phi_D2E_defining,
    region_E_value,
)
from .gclosure import envelope_residual, gclosure_point, relation_residual
from .laminate import (
    InnerSplitTopology,
    Leaf,
    build_optimal_structure,
    det_average,
    effective_tensor,
    layering,
    leaf_fractions,
    optimize_structure_params,
    structure_energy_from_fields,
)

__all__ = [
    "GapRecord",
    "SweepRow",
    "attainability_sweep",
    "region_E_gap_curve",
    "incompatibility_witness",
    "special_points",
    "run_invariant_suite",
    "CheckResult",
]


@dataclass(frozen=True)
class SweepRow:
    m1: float
    r: float
    region: Region
    B: float
    W_struct: float
    delta_rel: float
    error: str = ""


@dataclass(frozen=True)
class GapRecord:
    r: float
    alpha_opt: float
    W_struct: float
    B: float
    delta_rel: float


def attainability_sweep(spec_base: CompositeSpec, m1_grid, r_grid,
                        optimize_d1: bool = True) -> list[SweepRow]:
    """Classify, bound and build a structure at every grid point.

    Per-point failures are recorded as rows rather than raised, so a sweep
    always returns the full grid.  ``optimize_d1=False`` skips the costly
    D1-interior optimization (those rows carry the closed-form D bound and
    a NaN structure energy).
    """
    rows = []
    for m1 in m1_grid:
        spec = CompositeSpec(spec_base.k1, spec_base.k2, m1, spec_base.m2)
        for r in r_grid:
            try:
                region = classify_region(spec, r)
                bound = lower_bound(spec, r).B
                if region is Region.D1 and not optimize_d1:
                    rows.append(SweepRow(m1, r, region, bound, math.nan, math.nan, "skipped"))
                    continue
                res = build_optimal_structure(spec, r, region)
                rows.append(SweepRow(m1, r, region, bound, res.energy, res.gap))
            except (OutOfApplicability, DomainError, ValueError) as exc:
                rows.append(SweepRow(m1, r, Region.E, math.nan, math.nan, math.nan, str(exc)))
    return rows


def region_E_r0(spec: CompositeSpec) -> float:
    """Upper end of region E in r: the D/E threshold phi_D2E."""
    if spec.m1 <= 0.0:
        raise EmptyRegion("region E requires m1 > 0")
    try:
        r0 = phi_D2E_defining(spec)
    except DomainError as exc:
        raise EmptyRegion(f"region E is empty for this composite: {exc}") from exc
    lower = 0.0
    if spec.k_tilde < spec.k1:
        lower = boundary_curves(spec)["psi_CE"](spec.m1)
    if r0 <= max(0.0, lower):
        raise EmptyRegion("region E is empty for this composite")
    return r0


def region_E_gap_curve(spec: CompositeSpec, n_points: int = 200,
                       decades: float = 3.0) -> list[GapRecord]:
    """Relative gap between the best L(13,2,1) and the bound across region E.

    Samples ``n_points`` r values spanning ``decades`` decades of distance
    below r0 = phi_D2E, measured from region E's lower edge (0, or psi_CE
    when a C region sits underneath).  The gap is positive throughout and
    decays toward zero at the lower edge.
    """
    r0 = region_E_r0(spec)
    lower = 0.0
    if spec.k_tilde < spec.k1 and spec.m1 > 0.0:
        lower = max(0.0, boundary_curves(spec)["psi_CE"](spec.m1))
    topo = InnerSplitTopology()
    records = []
    for i in range(n_points):
        frac = 10.0 ** (-decades * (1.0 - i / (n_points - 1.0)))
        r = lower + (r0 - lower) * frac
        bound, _ = region_E_value(spec, r)
        params, energy = optimize_structure_params(topo, spec, r)
        records.append(GapRecord(r=r, alpha_opt=params["alpha"], W_struct=energy,
                                 B=bound, delta_rel=(energy - bound) / bound))
    return records


def incompatibility_witness(spec: CompositeSpec, r: float, n_grid: int = 201) -> dict:
    """Show that the constant region-E minimizer fields are incompatible.

    The bound's optimal fields E1, E2 are constant in each material; a
    laminate would need det(c E1 + (1-c) E2 - E3) = 0 for some mixture, but
    with E3 = 0 the determinant of c E1 + (1-c) E2 never vanishes on [0, 1].
    Returns the minimum |det| over a c-grid and the roots of the quadratic.
    """
    region = classify_region(spec, r)
    if region is not Region.E:
        raise EmptyRegion(f"(m1={spec.m1}, r={r}) lies in region {region.value}, not E")
    _, t_opt = region_E_value(spec, r)
    _, avg = translated_cell_energy_closed(spec, r, t_opt, Regime.E)
    alpha1 = (avg.S11 + avg.D11) / SQRT2
    beta1 = (avg.S11 - avg.D11) / SQRT2
    alpha2 = (avg.S21 + avg.D21) / SQRT2
    beta2 = (avg.S21 - avg.D21) / SQRT2

    def det_mix(c):
        return (c * alpha1 + (1 - c) * alpha2) * (c * beta1 + (1 - c) * beta2)

    min_abs = min(abs(det_mix(i / (n_grid - 1))) for i in range(n_grid))
    roots = []
    if alpha1 != alpha2:
        roots.append(alpha2 / (alpha2 - alpha1))
    if beta1 != beta2:
        roots.append(beta2 / (beta2 - beta1))
    return {
        "t_opt": t_opt,
        "E1": (alpha1, beta1),
        "E2": (alpha2, beta2),
        "min_abs_det": min_abs,
        "roots": tuple(roots),
        "roots_outside_unit_interval": all(c < 0.0 or c > 1.0 for c in roots),
    }


def special_points(spec: CompositeSpec) -> dict:
    """The three meeting points of the region map, with curve residuals.

    P1 = (r = m2, m1 = k1(1-m2)/(2k2)):  A1, A2, B, C meet.
    P2 = (r = m2, m1 = k1(1-m2)/(k1+k2)): B, C, D, E meet.
    P3 = (r = 0,  m1 = k1(1-m2)/k2):      A2, C, E meet.
    """
    k1, k2, m2 = spec.k1, spec.k2, spec.m2
    curves = boundary_curves(spec)
    p1_m1 = k1 * (1 - m2) / (2 * k2)
    p2_m1 = k1 * (1 - m2) / (k1 + k2)
    p3_m1 = k1 * (1 - m2) / k2
    res = {
        "P1": {
            "r": m2, "m1": p1_m1,
            "residuals": {
                "psi_A1A2": abs(curves["psi_A1A2"](p1_m1) - m2),
                "psi_AB": abs(curves["psi_AB"](p1_m1) - m2),
                "psi_BC": abs(curves["psi_BC"](p1_m1) - m2),
            },
        },
        "P2": {
            "r": m2, "m1": p2_m1,
            "residuals": {
                "psi_BD": abs(curves["psi_BD"](p2_m1) - m2),
                "psi_CE": abs(curves["psi_CE"](p2_m1) - m2),
                "phi_D2E": abs(curves["phi_D2E_defining"](p2_m1) - m2),
                "psi_BC": abs(curves["psi_BC"](p2_m1) - m2),
            },
        },
        "P3": {
            "r": 0.0, "m1": p3_m1,
            "residuals": {
                "psi_AC": abs(curves["psi_AC"](p3_m1) - 0.0),
                "psi_CE": abs(curves["psi_CE"](p3_m1) - 0.0),
            },
        },
    }
    return res


def p3_conductivity_property(spec: CompositeSpec) -> float:
    """At P3 the T-structure and the simple laminate share the x1 eigenvalue.

    Returns the relative mismatch between the two x1 conductivities for the
    composite with m1 moved to the P3 value (documented limit property).
    """
    k1, k2, m2 = spec.k1, spec.k2, spec.m2
    m1 = k1 * (1 - m2) / k2
    sp = CompositeSpec(k1, k2, m1, m2)
    w = m1 / (1 - m2)
    t_structure = layering(2, [(layering(1, [(Leaf(1), w), (Leaf(3), 1 - w)]), 1 - m2),
                               (Leaf(2), m2)])
    simple = layering(1, [(Leaf(1), m1), (Leaf(2), m2), (Leaf(3), sp.m3)])
    lam_t = effective_tensor(t_structure, sp).lam1
    lam_s = effective_tensor(simple, sp).lam1
    return abs(lam_t - lam_s) / lam_s


def bound_boundary_mismatch(spec: CompositeSpec, eps: float = 1e-7) -> float:
    """Largest mismatch of adjacent closed-form bound values on boundaries.

    For every boundary curve that exists at the composite's m1 and is active
    (classification flips across it), both regions' bound expressions are
    evaluated at the boundary r; continuity of B demands they coincide.
    """
    from .bounds import (
        region_A_value, region_B_value, region_C_value, region_D_value,
    )

    values = {
        "A": region_A_value,
        "B": region_B_value,
        "C": region_C_value,
        "D": region_D_value,
        "E": lambda sp, r: region_E_value(sp, r)[0],
    }
    curves = boundary_curves(spec)
    worst = 0.0
    for name in ("psi_BC", "psi_BD", "psi_AB", "psi_AC", "psi_CE", "phi_D2E_defining"):
        try:
            r_b = curves[name](spec.m1)
        except DomainError:
            continue
        if not (eps < r_b <= 1.0 - eps):
            continue
        below = classify_region(spec, r_b - eps).value[0]
        above = classify_region(spec, r_b + eps).value[0]
        if below == above:
            continue  # the curve is not an active boundary at this m1
        worst = max(worst, abs(values[below](spec, r_b) - values[above](spec, r_b)))
    return worst


# ---------------------------------------------------------------------------
# Aggregated invariant suite (CLI `verify`).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    max_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance


def _linspace(lo, hi, n):
    if n == 1:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def run_invariant_suite(fast: bool = True) -> list[CheckResult]:
    """Run the module-level invariants on reference composites.

    ``fast`` shrinks grid sizes; the acceptance test suite runs the full
    versions.  Returns one CheckResult per invariant group.
    """
    checks: list[CheckResult] = []
    specs = [CompositeSpec(1, 3, 0.1, 0.5), CompositeSpec(1, 2, 0.15, 0.5),
             CompositeSpec(1, 3, 0.3, 0.5)]
    n = 6 if fast else 20

    # oracle agreement
    worst = 0.0
    for sp in specs:
        for r in _linspace(0.05, 1.0, n):
            b_cf = lower_bound(sp, r).B
            b_or, _ = brute_force_bound(sp, r, n_grid=150 if fast else 600)
            worst = max(worst, abs(b_cf - b_or) / abs(b_or))
    checks.append(CheckResult("oracle_agreement", worst, 1e-7))

    # oracle minimizer feasibility
    worst = 0.0
    for sp in specs[:2]:
        for r in (0.2, 0.6, 1.0):
            for t in (0.3, sp.k1, 0.5 * (sp.k1 + sp.k2), sp.k2, 1.1 * sp.k2):
                _, avg = oracle_minimizer(sp, r, t)
                worst = max(worst, max(abs(x) for x in avg.constraint_residuals(sp, r)))
    checks.append(CheckResult("oracle_constraints", worst, 1e-10))

    # continuity of Y in t away from the t = k1 kink, where the disk
    # constraint switching on can produce a genuine jump; at the kink the
    # jump must match the closed-form difference Y_C(k1) - Y_D exactly.
    worst = 0.0
    for sp in specs:
        for r in (0.3, 0.7):
            probes = [t for t in _linspace(1e-6, sp.k2 + 10.0, 40 if fast else 200)
                      if abs(t - sp.k1) > 1e-6] + [sp.k2]
            for t0 in probes:
                left = oracle_minimizer(sp, r, max(0.0, t0 - 1e-9))[0]
                right = oracle_minimizer(sp, r, t0 + 1e-9)[0]
                worst = max(worst, abs(left - right))
            jump = (oracle_minimizer(sp, r, sp.k1 + 1e-9)[0]
                    - oracle_minimizer(sp, r, sp.k1 - 1e-9)[0])
            y_d, avg_d = translated_cell_energy_closed(sp, r, sp.k1, Regime.D)
            if avg_d.D11 <= avg_d.S11 + 1e-12:
                predicted = 0.0
            else:
                kt = sp.k_tilde
                s11 = (sp.k2 + r * sp.k1) / (SQRT2 * kt)
                s21 = ((1 + r) / SQRT2 - sp.m1 * s11) / sp.m2
                d21 = ((1 - r) / SQRT2 - sp.m1 * s11) / sp.m2
                y_c = (2 * sp.m1 * sp.k1 * s11**2 + sp.m2 * (sp.k2 + sp.k1) * s21**2
                       + sp.m2 * (sp.k2 - sp.k1) * d21**2)
                predicted = y_c - y_d
            worst = max(worst, abs(jump - predicted))
    checks.append(CheckResult("oracle_continuity_in_t", worst, 1e-6))

    # bound continuity: the two adjacent closed forms agree at the boundary
    worst = 0.0
    for sp in specs:
        worst = max(worst, bound_boundary_mismatch(sp))
    checks.append(CheckResult("bound_continuity", worst, 1e-8))

    # attainability in the closed-form regions
    worst = 0.0
    base = CompositeSpec(1, 3, 0.1, 0.5)
    rows = attainability_sweep(base, _linspace(0.02, 0.45, n), _linspace(0.05, 1.0, n),
                               optimize_d1=False)
    for row in rows:
        if row.region in (Region.A1, Region.A2, Region.B, Region.C) and not row.error:
            worst = max(worst, abs(row.delta_rel))
    checks.append(CheckResult("attainability_ABC", worst, 1e-8))

    # conservation laws on built structures
    worst_frac, worst_cons, worst_quasi, worst_paths = 0.0, 0.0, 0.0, 0.0
    for row in rows:
        if row.error or row.region in (Region.D1,):
            continue
        sp = CompositeSpec(base.k1, base.k2, row.m1, base.m2)
        res = build_optimal_structure(sp, row.r, row.region)
        fracs = leaf_fractions(res.node)
        worst_frac = max(worst_frac, abs(fracs[1] - sp.m1), abs(fracs[2] - sp.m2),
                         abs(fracs[3] - sp.m3))
        avg1 = sum(pf.fraction * pf.field[0] for pf in res.fields)
        avg2 = sum(pf.fraction * pf.field[1] for pf in res.fields)
        worst_cons = max(worst_cons, abs(avg1 - 1.0), abs(avg2 - row.r))
        worst_quasi = max(worst_quasi, abs(det_average(res.fields) - row.r))
        e2 = structure_energy_from_fields(res.node, sp, row.r)
        worst_paths = max(worst_paths, abs(res.energy - e2) / abs(res.energy))
    checks.append(CheckResult("fraction_accounting", worst_frac, 1e-10))
    checks.append(CheckResult("field_conservation", worst_cons, 1e-12))
    checks.append(CheckResult("quasiaffine_determinant", worst_quasi, 1e-10))
    checks.append(CheckResult("energy_path_equivalence", worst_paths, 1e-11))

    # G-closure invariants
    worst_env, worst_rel = 0.0, 0.0
    for sp in specs[:2]:
        for r in _linspace(0.15, 1.0, n):
            pt = gclosure_point(sp, r)
            worst_env = max(worst_env, envelope_residual(sp, r))
            if pt.region is not Region.E:
                worst_rel = max(worst_rel, relation_residual(sp, pt))
    checks.append(CheckResult("envelope_identity", worst_env, 1e-5))
    checks.append(CheckResult("gclosure_relations", worst_rel, 1e-9))

    # special points
    worst = 0.0
    for sp in specs:
        for data in special_points(sp).values():
            worst = max(worst, max(data["residuals"].values()))
    checks.append(CheckResult("special_points", worst, 1e-9))

    # region-E gap magnitudes
    sp = CompositeSpec(1, 3, 0.2, 0.5)
    records = region_E_gap_curve(sp, n_points=25 if fast else 200)
    max_gap = max(rec.delta_rel for rec in records)
    min_gap = min(rec.delta_rel for rec in records)
    gap_ok = (1e-5 <= max_gap <= 1e-3) and min_gap >= -1e-10 \
        and records[0].delta_rel <= 1e-6
    checks.append(CheckResult("region_E_gap_order", 0.0 if gap_ok else 1.0, 0.5))

    # incompatibility witness
    witness = incompatibility_witness(sp, 0.05)
    wit_ok = witness["min_abs_det"] > 0.0 and witness["roots_outside_unit_interval"]
    checks.append(CheckResult("incompatibility_witness", 0.0 if wit_ok else 1.0, 0.5))

    return checks
