"""Hierarchical laminates: effective tensors, phase fields, optimal builders.

A laminate is a tree whose leaves are materials 1, 2, 3 (3 = superconductor)
and whose internal nodes layer their children orthogonally to one of the
fixed axes.  Along the layering normal the effective eigenvalue is the
fraction-weighted harmonic mean of the children, along the tangent the
arithmetic mean; infinities propagate exactly.

Builders are provided for every optimal structure: L(13,2,13) in region B,
the T-structure L(13,2) in region C, L(13,2,13,2) in region A1, L(123,2) in
region A2, L(13,2,1) on the D1/D2 boundary, the numerically optimized
L(13,2,13,1,1) in the D1 interior, and the presumptive L(13,2,1) family
with a free material-1 split in regions D2 and E.

Structure parameters for regions A1, A2 and the D1 boundary are derived
from the rank-one continuity relations and the sufficient optimality
conditions in the fixed frame E0 = diag(1, r); they are validated against
the bound values, fraction accounting and field conservation in the test
suite.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .core import (
    INF,
    CompositeSpec,
    ExtendedConductivity,
    IncompatibleLoading,
    InfeasibleTopology,
    OutOfApplicability,
    arithmetic_mean,
    harmonic_mean,
)
from .bounds import Region, classify_region, lower_bound, boundary_curves
from .optimize import boxed_minimize, grid_golden_min

__all__ = [
    "Leaf",
    "Layering",
    "layering",
    "PhaseField",
    "StructureResult",
    "effective_tensor",
    "phase_fields",
    "structure_energy",
    "structure_energy_from_fields",
    "leaf_fractions",
    "det_average",
    "build_optimal_structure",
    "optimize_structure_params",
    "check_optimality_conditions",
    "OptimalityReport",
    "ParametricTopology",
    "FixedTopology",
    "RankFiveTranslationTopology",
    "RankFiveTranslationTopologyAlt",
    "InnerSplitTopology",
    "optimize_rank5_structure",
    "node_to_json",
    "node_from_json",
    "node_to_text",
    "structure_to_json",
]

_DROP_TOL = 1e-14


@dataclass(frozen=True)
class Leaf:
    """Pure material occupying a whole layer."""

    material: int

    def __post_init__(self):
        if self.material not in (1, 2, 3):
            raise ValueError(f"material must be 1, 2 or 3, got {self.material}")


@dataclass(frozen=True)
class Layering:
    """Orthogonal layering of children along ``normal`` (axis 1 or 2)."""

    normal: int
    children: tuple  # tuple of (node, fraction)

    def __post_init__(self):
        if self.normal not in (1, 2):
            raise ValueError(f"normal must be axis 1 or 2, got {self.normal}")
        total = sum(f for _, f in self.children)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"child fractions sum to {total}, expected 1")
        for _, f in self.children:
            if not (0.0 < f <= 1.0):
                raise ValueError(f"child fraction {f} outside (0, 1]")


def layering(normal: int, children) -> "Layering | Leaf":
    """Layering constructor that drops vanished children and collapses
    single-child nodes (degenerate structures at region boundaries)."""
    kept = [(n, f) for n, f in children if f > _DROP_TOL]
    if not kept:
        raise ValueError("layering has no children with positive fraction")
    if len(kept) == 1:
        return kept[0][0]
    total = sum(f for _, f in kept)
    kept = [(n, f / total) for n, f in kept]
    return Layering(normal, tuple(kept))


@dataclass(frozen=True)
class PhaseField:
    """Field diag(alpha, beta) in one leaf, with its absolute fraction."""

    path: tuple
    material: int
    fraction: float
    field: tuple  # (alpha, beta) along (x1, x2)


def effective_tensor(node, spec: CompositeSpec) -> ExtendedConductivity:
    """Effective conductivity of a laminate tree (axis eigenvalues)."""
    if isinstance(node, Leaf):
        return ExtendedConductivity.isotropic(spec.conductivity(node.material))
    tensors = [effective_tensor(child, spec) for child, _ in node.children]
    weights = [f for _, f in node.children]
    normal, tangent = node.normal, 3 - node.normal
    lam = {
        normal: harmonic_mean([t.along(normal) for t in tensors], weights),
        tangent: arithmetic_mean([t.along(tangent) for t in tensors], weights),
    }
    return ExtendedConductivity(lam[1], lam[2])


def phase_fields(node, spec: CompositeSpec, e_avg) -> list[PhaseField]:
    """Per-leaf fields for a prescribed diagonal average field.

    Top-down recursion: the tangential component passes unchanged to every
    child; normal components carry equal flux, so each child receives
    j / lambda_child with j set by the parent's effective eigenvalue.
    Children with an infinite eigenvalue receive a zero component; loading
    a direction whose eigenvalue is infinite raises IncompatibleLoading.
    """
    out: list[PhaseField] = []
    scale = max(1.0, abs(e_avg[0]), abs(e_avg[1]))
    tol = 1e-12 * scale

    def walk(n, fld, frac, path):
        if isinstance(n, Leaf):
            out.append(PhaseField(path=path, material=n.material, fraction=frac, field=fld))
            return
        normal, tangent = n.normal, 3 - n.normal
        e_n, e_t = fld[normal - 1], fld[tangent - 1]
        tensors = [effective_tensor(child, spec) for child, _ in n.children]
        lam_n = harmonic_mean([t.along(normal) for t in tensors],
                              [f for _, f in n.children])
        if math.isinf(lam_n):
            if abs(e_n) > tol:
                raise IncompatibleLoading(
                    f"normal axis x{normal} has infinite conductivity but carries field {e_n}")
            flux = 0.0
        else:
            flux = lam_n * e_n
        for i, ((child, f_child), tensor) in enumerate(zip(n.children, tensors)):
            if math.isinf(tensor.along(tangent)):
                if abs(e_t) > tol:
                    raise IncompatibleLoading(
                        f"tangent axis x{tangent} of a child is superconducting "
                        f"but carries field {e_t}")
                c_t = 0.0
            else:
                c_t = e_t
            c_n = 0.0 if math.isinf(tensor.along(normal)) else flux / tensor.along(normal)
            child_field = (c_n, c_t) if normal == 1 else (c_t, c_n)
            walk(child, child_field, frac * f_child, path + (i,))

    walk(node, (float(e_avg[0]), float(e_avg[1])), 1.0, ())
    return out


def structure_energy(node, spec: CompositeSpec, r: float) -> float:
    """Doubled cell energy Tr(K* E0 E0^T) = lam1 + r^2 lam2 for E0 = diag(1, r)."""
    k = effective_tensor(node, spec)
    if math.isinf(k.lam1):
        raise IncompatibleLoading("effective tensor is infinite along x1")
    if math.isinf(k.lam2):
        if r > 0.0:
            raise IncompatibleLoading("effective tensor is infinite along x2 with r > 0")
        return k.lam1
    return k.lam1 + r * r * k.lam2


def structure_energy_from_fields(node, spec: CompositeSpec, r: float) -> float:
    """Same energy through the per-leaf field sum (independent path)."""
    total = 0.0
    for pf in phase_fields(node, spec, (1.0, r)):
        if pf.material == 3:
            continue
        k = spec.conductivity(pf.material)
        a, b = pf.field
        total += pf.fraction * k * (a * a + b * b)
    return total


def leaf_fractions(node) -> dict:
    """Aggregated absolute fractions per material."""
    acc = {1: 0.0, 2: 0.0, 3: 0.0}

    def walk(n, frac):
        if isinstance(n, Leaf):
            acc[n.material] += frac
        else:
            for child, f in n.children:
                walk(child, frac * f)

    walk(node, 1.0)
    return acc


def det_average(fields) -> float:
    """Fraction-weighted average of det over the leaves (quasiaffine check)."""
    return sum(pf.fraction * pf.field[0] * pf.field[1] for pf in fields)


# ---------------------------------------------------------------------------
# Optimal structure builders.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StructureResult:
    region: Region
    node: object
    params: dict
    energy: float
    bound: float
    fields: tuple = field(default_factory=tuple)

    @property
    def gap(self) -> float:
        return (self.energy - self.bound) / self.bound


def _require(condition: bool, inequality: str):
    if not condition:
        raise OutOfApplicability(f"violated: {inequality}")


def _build_B(spec: CompositeSpec, r: float):
    k1, k2, m1, m2 = spec.k1, spec.k2, spec.m1, spec.m2
    _require(m1 > 0.0, "m1 > 0")
    _require(r >= m2, "mu_2 = sqrt(m2/r) <= 1 requires r >= m2")
    s = math.sqrt(r * m2)
    beta = ((1 + r) - 2 * s) / m1
    alpha1 = math.sqrt(r / m2)
    mu2 = math.sqrt(m2 / r)
    mu4 = s
    mu11 = r * m1 / ((1 + r) * s - 2 * r * m2)
    mu31 = m1 / ((1 + r) - 2 * s)
    _require(0.0 < mu11 <= 1.0, "mu_11 in (0, 1] requires m1 <= (1+r)sqrt(m2/r) - 2 m2")
    _require(0.0 < mu31 <= 1.0, "mu_31 in (0, 1] requires m1 <= (1+r) - 2 sqrt(r m2)")

    inner13 = layering(2, [(Leaf(1), mu11), (Leaf(3), 1 - mu11)])
    block = layering(1, [(inner13, 1 - mu2), (Leaf(2), mu2)])
    outer13 = layering(1, [(Leaf(1), mu31), (Leaf(3), 1 - mu31)])
    node = layering(2, [(block, mu4), (outer13, 1 - mu4)])
    params = {"mu_11": mu11, "mu_2": mu2, "mu_31": mu31, "mu_4": mu4,
              "beta": beta, "alpha_1": alpha1}
    return node, params


def _build_C(spec: CompositeSpec, r: float):
    k1, k2, m1, m2 = spec.k1, spec.k2, spec.m1, spec.m2
    _require(m1 > 0.0, "m1 > 0")
    _require(r <= m2, "the T-structure is optimal for r <= m2")
    _require(m2 < 1.0, "m2 < 1")
    w = m1 / (1.0 - m2)
    _require(0.0 < w <= 1.0, "relative fraction m1/(1-m2) in (0, 1]")
    inner13 = layering(1, [(Leaf(1), w), (Leaf(3), 1 - w)])
    node = layering(2, [(inner13, 1 - m2), (Leaf(2), m2)])
    params = {"w": w, "alpha_1": (1 - m2) / m1, "alpha_2": 1.0, "beta_2": r / m2}
    return node, params


def _build_A1(spec: CompositeSpec, r: float):
    k1, k2, m1, m2 = spec.k1, spec.k2, spec.m1, spec.m2
    kt = spec.k_tilde
    _require(m1 > 0.0, "m1 > 0")
    _require(2 * m1 * k2 < k1 * (1 - m2) + 1e-15,
             "mu_2 <= 1 requires m1 <= k1(1-m2)/(2k2)")
    x = k1 * (1 + r) / (2 * kt)           # alpha_1 = beta_1
    beta = k2 * (1 + r) / kt
    mu11 = k1 / (2 * k2)
    mu4 = r / x
    mu5 = (r * (1 + r) - 2 * r * x + (1 - m2) * x * x) / (x - r) ** 2
    _require(mu5 <= 1.0 + 1e-12, "mu_5 <= 1 requires r <= psi_A1B")
    mu5 = min(mu5, 1.0)
    mu2 = (m2 - 1 + mu5) * x / (r * mu5)
    _require(mu2 > 0.0, "mu_2 > 0 requires r > psi_A1A2")
    _require(mu2 <= 1.0 + 1e-12, "mu_2 <= 1 requires m1 <= k1(1-m2)/(2k2)")
    mu2 = min(mu2, 1.0)
    mu31 = mu2 * x / beta
    alpha2 = 2 * x - r

    inner13 = layering(2, [(Leaf(1), mu11), (Leaf(3), 1 - mu11)])
    block = layering(1, [(inner13, 1 - mu2), (Leaf(2), mu2)])
    outer13 = layering(1, [(Leaf(1), mu31), (Leaf(3), 1 - mu31)])
    core = layering(2, [(block, mu4), (outer13, 1 - mu4)])
    node = layering(1, [(core, mu5), (Leaf(2), 1 - mu5)])
    params = {"mu_11": mu11, "mu_2": mu2, "mu_31": mu31, "mu_4": mu4, "mu_5": mu5,
              "beta": beta, "alpha_1": x, "alpha_2": alpha2}
    return node, params


def _build_A2(spec: CompositeSpec, r: float):
    k1, k2, m1, m2 = spec.k1, spec.k2, spec.m1, spec.m2
    kt = spec.k_tilde
    _require(kt < k1, "L(123,2) requires k_tilde < k1, i.e. m1 < k1(1-m2)/k2")
    q = (k1 - kt) * (1 + r) / (k1 * (1 + r) - kt)
    c1 = m1 / q
    c2 = (m2 - 1 + q) / q
    c3 = spec.m3 / q
    _require(c2 >= -1e-14, "inner material-2 fraction >= 0 requires r <= psi_A1A2")
    c2 = max(c2, 0.0)
    a1 = k2 * (1 + r) / kt
    a2 = k1 * (1 + r) / kt
    b22 = a2 - 1.0

    inner = layering(1, [(Leaf(1), c1), (Leaf(2), c2), (Leaf(3), c3)])
    node = layering(2, [(inner, q), (Leaf(2), 1 - q)])
    params = {"q": q, "c_1": c1, "c_2": c2, "c_3": c3,
              "alpha_1": a1, "alpha_2": a2, "alpha_22": 1.0, "beta_22": b22}
    return node, params


def _build_D1_boundary(spec: CompositeSpec, r: float):
    """Closed-form L(13,2,1); exact only on the curve r = psi_D1D2."""
    k1, k2, m1, m2, m3 = spec.k1, spec.k2, spec.m1, spec.m2, spec.m3
    inner_m1 = k1 * m3 / k2                # absolute material-1 fraction inside L(13)
    p = inner_m1 / m1 if m1 > 0 else 0.0
    _require(p <= 1.0 + 1e-12, "p = k1 m3 / (m1 k2) <= 1 requires m1 >= k1(1-m2)/(k1+k2)")
    u = 1.0 - m1 + inner_m1
    a_block = m3 * (k1 + k2) / k2          # v * u
    v = a_block / u
    w = k1 / (k1 + k2)
    g = r * u / m2
    y11 = r * u * a_block / (m2 * inner_m1) if inner_m1 > 0 else 0.0
    x31 = y11 - r

    inner13 = layering(1, [(Leaf(1), w), (Leaf(3), 1 - w)])
    block = layering(2, [(inner13, v), (Leaf(2), 1 - v)])
    node = layering(1, [(block, u), (Leaf(1), 1 - u)])
    params = {"p": p, "w": w, "v": v, "u": u, "g": g, "y_11": y11, "x_31": x31}
    return node, params


class ParametricTopology:
    """A laminate topology with boxed free parameters in (0, 1).

    Subclasses implement ``build(spec, r, params)`` which either returns a
    tree honoring the global fraction constraints or raises
    InfeasibleTopology.
    """

    name = "abstract"
    param_names: tuple = ()

    def build(self, spec: CompositeSpec, r: float, params):
        raise NotImplementedError

    def seeds(self, spec: CompositeSpec, r: float):
        return ()


class FixedTopology(ParametricTopology):
    """Zero-parameter wrapper around a concrete tree (degenerate case)."""

    name = "fixed"
    param_names = ()

    def __init__(self, node):
        self.node = node

    def build(self, spec, r, params):
        return self.node


class RankFiveTranslationTopology(ParametricTopology):
    """L(13,2,13,1,1) with free (a, c, e, f); b and d are eliminated.

    Fractions: a, d are the material-1 shares of the two L(13) blocks, b the
    L(13) share of the rank-2 core, c the core share of the rank-3 block,
    e and f the block shares of the two outer material-1 laminations.
    """

    name = "L(13,2,13,1,1)"
    param_names = ("a", "c", "e", "f")

    def resolve(self, spec: CompositeSpec, params):
        a, c, e, f = params
        if not all(0.0 < x < 1.0 for x in (a, c, e)) or not (0.0 < f <= 1.0):
            raise InfeasibleTopology("parameters outside the unit box")
        cef = c * e * f
        if cef <= spec.m2:
            raise InfeasibleTopology("c e f <= m2 leaves no room for material 2")
        b = 1.0 - spec.m2 / cef
        share = spec.m3 / (e * f) - (1.0 - a) * b * c
        if share <= 0.0 or share > (1.0 - c) + 1e-15:
            raise InfeasibleTopology("material-3 balance infeasible")
        d = 1.0 - min(share / (1.0 - c), 1.0)
        return a, b, c, d, e, f

    def build(self, spec, r, params):
        a, b, c, d, e, f = self.resolve(spec, params)
        inner13 = layering(2, [(Leaf(1), a), (Leaf(3), 1 - a)])
        core = layering(1, [(inner13, b), (Leaf(2), 1 - b)])
        second13 = (Leaf(3) if d <= _DROP_TOL
                    else layering(1, [(Leaf(1), d), (Leaf(3), 1 - d)]))
        rank3 = layering(2, [(core, c), (second13, 1 - c)])
        rank4 = layering(1, [(rank3, e), (Leaf(1), 1 - e)])
        return layering(2, [(rank4, f), (Leaf(1), 1 - f)])

    def seeds(self, spec, r):
        a0 = spec.k1 / (spec.k1 + spec.k2)
        return (
            (a0, 0.70, 0.90, 0.95),
            (a0, 0.85, 0.80, 0.97),
            (0.50, 0.60, 0.90, 0.90),
            (a0, 0.95, 0.95, 0.99),
            (0.30, 0.75, 0.85, 0.92),
        )


class RankFiveTranslationTopologyAlt(ParametricTopology):
    """L(13,2,13,1,1) with free (a, b, d, e); c and f are eliminated.

    Complementary chart to RankFiveTranslationTopology: it parametrizes the
    corner where the second L(13) block nearly vanishes (c -> 1) smoothly,
    which the primary chart reaches only through a thin feasible sliver.
    """

    name = "L(13,2,13,1,1)/alt"
    param_names = ("a", "b", "d", "e")

    def resolve(self, spec: CompositeSpec, params):
        a, b, d, e = params
        if not all(0.0 < x < 1.0 for x in (a, b, d, e)):
            raise InfeasibleTopology("parameters outside the unit box")
        den = (1.0 - d) + spec.m3 * (1.0 - b) / spec.m2 - (1.0 - a) * b
        if den <= 0.0:
            raise InfeasibleTopology("material-3 balance infeasible")
        c = (1.0 - d) / den
        if not (0.0 < c < 1.0 + 1e-12):
            raise InfeasibleTopology("core share outside (0, 1]")
        c = min(c, 1.0)
        f = spec.m2 / ((1.0 - b) * c * e)
        if not (0.0 < f <= 1.0):
            raise InfeasibleTopology("outer share outside (0, 1]")
        return a, b, c, d, e, f

    def build(self, spec, r, params):
        a, b, c, d, e, f = self.resolve(spec, params)
        inner13 = layering(2, [(Leaf(1), a), (Leaf(3), 1 - a)])
        core = layering(1, [(inner13, b), (Leaf(2), 1 - b)])
        second13 = (Leaf(3) if d <= _DROP_TOL
                    else layering(1, [(Leaf(1), d), (Leaf(3), 1 - d)]))
        rank3 = core if 1.0 - c <= _DROP_TOL else layering(2, [(core, c), (second13, 1 - c)])
        rank4 = layering(1, [(rank3, e), (Leaf(1), 1 - e)])
        return layering(2, [(rank4, f), (Leaf(1), 1 - f)])

    def seeds(self, spec, r):
        a0 = spec.k1 / (spec.k1 + spec.k2)
        b_max = (spec.m3 / spec.m2) / ((1 - a0) + spec.m3 / spec.m2)
        return (
            (a0, 0.40 * b_max, 0.40, 0.85),
            (a0, 0.70 * b_max, 0.50, 0.90),
            (a0, 0.90 * b_max, 0.30, 0.80),
            (0.35, 0.50 * b_max, 0.60, 0.90),
            (a0, 0.20 * b_max, 0.50, 0.95),
        )


def optimize_rank5_structure(spec: CompositeSpec, r: float, seed: int = 0):
    """Best L(13,2,13,1,1) through both parameter charts.

    Returns (node, full params dict, energy); raises InfeasibleTopology if
    neither chart admits the fractions.
    """
    best = None
    for topo in (RankFiveTranslationTopology(), RankFiveTranslationTopologyAlt()):
        try:
            params, energy = optimize_structure_params(topo, spec, r, seed=seed)
        except InfeasibleTopology:
            continue
        if best is None or energy < best[0]:
            full = topo.resolve(spec, tuple(params[n] for n in topo.param_names))
            node = topo.build(spec, r, tuple(params[n] for n in topo.param_names))
            best = (energy, node, dict(zip(("a", "b", "c", "d", "e", "f"), full)))
    if best is None:
        raise InfeasibleTopology("L(13,2,13,1,1): no feasible parameters for this spec")
    return best[1], best[2], best[0]


class InnerSplitTopology(ParametricTopology):
    """L(13,2,1) with one free parameter: the material-1 split alpha.

    alpha * m1 joins the superconductor in the inner L(13); the remainder
    forms the outer layer.  The presumptive optimal structure in D2 and E.
    """

    name = "L(13,2,1)"
    param_names = ("alpha",)

    def build(self, spec, r, params):
        (alpha,) = params
        if not (0.0 <= alpha <= 1.0):
            raise InfeasibleTopology("alpha outside [0, 1]")
        m1, m2, m3 = spec.m1, spec.m2, spec.m3
        u = 1.0 - (1.0 - alpha) * m1
        if u <= m2:
            raise InfeasibleTopology("outer layer absorbs too much material 1")
        v = 1.0 - m2 / u
        vu = v * u
        if vu <= _DROP_TOL:
            inner = Leaf(2)
            return layering(1, [(inner, u), (Leaf(1), 1 - u)])
        w = alpha * m1 / vu
        inner13 = Leaf(3) if w <= _DROP_TOL else layering(1, [(Leaf(1), w), (Leaf(3), 1 - w)])
        block = layering(2, [(inner13, v), (Leaf(2), 1 - v)])
        return layering(1, [(block, u), (Leaf(1), 1 - u)])


def optimize_structure_params(topology: ParametricTopology, spec: CompositeSpec,
                              r: float, free_params=None, seed: int = 0,
                              energy_tol: float = 1e-10):
    """Minimize structure energy over the topology's boxed free parameters.

    Equality (fraction) constraints are eliminated inside the topology;
    optimization runs nested bracketed 1-D descent with deterministic
    restarts.  Returns (params dict, energy).
    """
    names = topology.param_names
    if not names:
        node = topology.build(spec, r, ())
        return {}, structure_energy(node, spec, r)

    def objective(values):
        try:
            node = topology.build(spec, r, values)
        except InfeasibleTopology:
            return INF
        try:
            return structure_energy(node, spec, r)
        except IncompatibleLoading:
            return INF

    if len(names) == 1:
        x, f_val = grid_golden_min(lambda t: objective((t,)), 0.0, 1.0,
                                   n_grid=64, xtol=1e-13)
        if not math.isfinite(f_val):
            raise InfeasibleTopology(f"{topology.name}: no feasible parameter value")
        return {names[0]: x}, f_val

    seeds = list(free_params or ()) or list(topology.seeds(spec, r))
    # deterministic fallback lattice, shifted by the seed index
    base = [0.2 + 0.15 * ((seed + i) % 5) for i in range(len(names))]
    seeds.append(tuple(min(0.95, b) for b in base))
    best_x, best_f = boxed_minimize(objective, seeds, energy_tol=energy_tol)
    if best_x is None:
        raise InfeasibleTopology(f"{topology.name}: all seeds infeasible for this spec")
    return dict(zip(names, best_x)), best_f


def build_optimal_structure(spec: CompositeSpec, r: float,
                            region: Region | None = None, seed: int = 0) -> StructureResult:
    """Optimal (or presumptive, in D2/E) laminate for the given region.

    Raises OutOfApplicability with the violated fraction inequality when
    (spec, r) lies outside the named region's applicability.
    """
    if region is None:
        region = classify_region(spec, r)
    region = Region(region)
    bound = lower_bound(spec, r).B

    if region is Region.B:
        node, params = _build_B(spec, r)
    elif region is Region.C:
        node, params = _build_C(spec, r)
    elif region is Region.A1:
        node, params = _build_A1(spec, r)
    elif region is Region.A2:
        node, params = _build_A2(spec, r)
    elif region is Region.D1:
        try:
            psi = boundary_curves(spec)["psi_D1D2"](spec.m1)
        except Exception:
            psi = None
        if psi is not None and abs(r - psi) <= 1e-9 * max(1.0, psi):
            node, params = _build_D1_boundary(spec, r)
        else:
            node, params, _ = optimize_rank5_structure(spec, r, seed=seed)
    elif region in (Region.D2, Region.E):
        topo = InnerSplitTopology()
        params, _ = optimize_structure_params(topo, spec, r, seed=seed)
        node = topo.build(spec, r, (params["alpha"],))
    else:
        raise ValueError(f"unknown region {region}")

    energy = structure_energy(node, spec, r)
    fields = tuple(phase_fields(node, spec, (1.0, r)))
    return StructureResult(region=region, node=node, params=params,
                           energy=energy, bound=bound, fields=fields)


# ---------------------------------------------------------------------------
# Optimality-condition checks.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OptimalityReport:
    region: Region
    conditions: dict
    required: tuple

    def ok(self, tol: float = 1e-9) -> bool:
        return all(self.conditions[name] <= tol for name in self.required)


def _material_fields(fields, material):
    return [pf for pf in fields if pf.material == material]


def check_optimality_conditions(fields, region: Region) -> OptimalityReport:
    """Residuals of the sufficient optimality conditions for the region.

    Conditions follow the bound derivations: material-1 fields with zero
    determinant and constant magnitude in regions A and B, material-2 field
    proportional to the identity in regions B and D, the trace ratio k2/k1
    between the materials in region A, and constant per-material fields in
    region E (where the presumptive structure violates material-1 constancy
    by design; the residual reports it).
    """
    region = Region(region)
    m1f = _material_fields(fields, 1)
    m2f = _material_fields(fields, 2)
    cond: dict[str, float] = {}

    if m1f:
        cond["material1_det"] = max(abs(pf.field[0] * pf.field[1]) for pf in m1f)
        mags = [pf.field[0] ** 2 + pf.field[1] ** 2 for pf in m1f]
        cond["material1_magnitude_spread"] = max(mags) - min(mags)
        traces = [pf.field[0] + pf.field[1] for pf in m1f]
        cond["material1_trace_spread"] = max(traces) - min(traces)
    if m2f:
        cond["material2_identity"] = max(abs(pf.field[0] - pf.field[1]) for pf in m2f)
        traces2 = [pf.field[0] + pf.field[1] for pf in m2f]
        cond["material2_trace_spread"] = max(traces2) - min(traces2)
    disk = 0.0
    for pf in m1f + m2f:
        a, b = pf.field
        disk = max(disk, max(0.0, -a * b))  # d^2 <= s^2 iff alpha*beta >= 0
    cond["disk_violation"] = disk

    if region in (Region.A1, Region.A2):
        required = ("material1_det", "material1_magnitude_spread", "material2_trace_spread")
    elif region is Region.B:
        required = ("material1_det", "material1_magnitude_spread", "material2_identity")
    elif region is Region.C:
        required = ("material1_det", "material1_trace_spread", "material2_trace_spread")
    elif region in (Region.D1, Region.D2):
        required = ("material1_trace_spread", "material2_identity", "disk_violation")
    else:
        required = ("material1_trace_spread", "material2_identity")
    return OptimalityReport(region=region, conditions=cond, required=required)


def check_trace_ratio(fields, spec: CompositeSpec) -> float:
    """Residual of the region-A relation trace(e1)/trace(e2) = k2/k1."""
    m1f = _material_fields(fields, 1)
    m2f = _material_fields(fields, 2)
    tr1 = sum(pf.field[0] + pf.field[1] for pf in m1f) / len(m1f)
    tr2 = sum(pf.field[0] + pf.field[1] for pf in m2f) / len(m2f)
    return abs(tr1 / tr2 - spec.k2 / spec.k1)


# ---------------------------------------------------------------------------
# Serialization: machine JSON and human-readable text.
# ---------------------------------------------------------------------------

def node_to_json(node) -> dict:
    if isinstance(node, Leaf):
        return {"type": "leaf", "material": node.material}
    return {
        "type": "layering",
        "normal": f"x{node.normal}",
        "children": [
            {"fraction": f, "node": node_to_json(child)} for child, f in node.children
        ],
    }


def node_from_json(data: dict):
    if data["type"] == "leaf":
        return Leaf(data["material"])
    normal = int(data["normal"][1])
    children = tuple(
        (node_from_json(entry["node"]), entry["fraction"]) for entry in data["children"]
    )
    return Layering(normal, children)


def node_to_text(node, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(node, Leaf):
        return f"{pad}material {node.material}"
    lines = [f"{pad}layering normal=x{node.normal}"]
    for child, f in node.children:
        lines.append(f"{pad}  fraction {f:.12g}:")
        lines.append(node_to_text(child, indent + 2))
    return "\n".join(lines)


def structure_to_json(result: StructureResult) -> str:
    """Full machine-readable structure report (bit-exact floats)."""
    payload = {
        "region": result.region.value,
        "node": node_to_json(result.node),
        "params": result.params,
        "energy": result.energy,
        "bound": result.bound,
        "gap": result.gap,
        "fields": [
            {
                "path": list(pf.path),
                "material": pf.material,
                "fraction": pf.fraction,
                "field": list(pf.field),
            }
            for pf in result.fields
        ],
    }
    return json.dumps(payload, indent=2)
