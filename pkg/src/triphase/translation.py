"""Translated-energy machinery.

The cell energy is relaxed by adding the quasiaffine term 2t*det(E) to the
integrand, which turns each material's contribution into a "well" value
V_i(S, D) whose algebraic form depends on sign(k_i - t):

* ``k_i > t``  (convex):      V_i = m_i (k_i+t)|S_i|^2 + m_i (k_i-t)|D_i|^2
* ``k_i <= t`` (degenerate or nonconvex):  V_i = 2 k_i m_i |S_i|^2, with the
  averaged d-components confined to the disk |D_i| <= |S_i|.

Minimizing V_1 + V_2 over the per-material averages subject to the linear
averaging constraints gives the relaxed cell energy Y(r, t).  This module
provides Y both in closed form (one formula per regime of t) and through an
independent constrained-minimization oracle that enumerates KKT active sets
of the disk constraints.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import SQRT2, CompositeSpec, Loading, RegimeMismatch

__all__ = [
    "WellCase",
    "Regime",
    "PhaseAverages",
    "classify_well",
    "well_value",
    "translated_cell_energy_closed",
    "translated_cell_energy_oracle",
    "oracle_minimizer",
]

_CASE_TOL = 1e-14


class WellCase(enum.Enum):
    CONVEX = "convex"          # k_i - t > 0
    DEGENERATE = "degenerate"  # k_i - t = 0
    NONCONVEX = "nonconvex"    # k_i - t < 0


class Regime(str, enum.Enum):
    """Validity interval of the per-regime closed form for Y."""

    A = "A"  # t = k2
    B = "B"  # k1 < t < k2, d-average carried by material 1 alone
    C = "C"  # k1 < t < k2, material-1 disk saturated
    D = "D"  # t = k1
    E = "E"  # 0 <= t < k1


@dataclass(frozen=True)
class PhaseAverages:
    """Averaged field components per finite material (material 3 is zero)."""

    S11: float
    S12: float
    S21: float
    S22: float
    D11: float
    D12: float
    D21: float
    D22: float

    def constraint_residuals(self, spec: CompositeSpec, r: float) -> tuple[float, ...]:
        """Residuals of the four linear averaging constraints."""
        load = Loading(r)
        return (
            spec.m1 * self.S11 + spec.m2 * self.S21 - load.S01,
            spec.m1 * self.S12 + spec.m2 * self.S22,
            spec.m1 * self.D11 + spec.m2 * self.D21 - load.D01,
            spec.m1 * self.D12 + spec.m2 * self.D22,
        )

    def disk_violation(self, material: int) -> float:
        """Positive part of |D_i|^2 - |S_i|^2 for material i in {1, 2}."""
        if material == 1:
            v = self.D11**2 + self.D12**2 - self.S11**2 - self.S12**2
        else:
            v = self.D21**2 + self.D22**2 - self.S21**2 - self.S22**2
        return max(0.0, v)


def classify_well(k_i: float, t: float) -> WellCase:
    if abs(k_i - t) <= _CASE_TOL * max(k_i, 1.0):
        return WellCase.DEGENERATE
    return WellCase.CONVEX if k_i > t else WellCase.NONCONVEX


def well_value(k_i: float, m_i: float, t: float,
               S: tuple[float, float], D: tuple[float, float]) -> float:
    """Per-material minimum of the translated energy at fixed averages.

    In the nonconvex and degenerate cases the value is independent of the
    d-averages (they only enter through the disk constraint).
    """
    s_sq = S[0] ** 2 + S[1] ** 2
    if classify_well(k_i, t) is WellCase.CONVEX:
        d_sq = D[0] ** 2 + D[1] ** 2
        return m_i * (k_i + t) * s_sq + m_i * (k_i - t) * d_sq
    return 2.0 * k_i * m_i * s_sq


def _h_plus(spec: CompositeSpec, t: float) -> float:
    return 1.0 / (spec.m1 / (spec.k1 + t) + spec.m2 / (spec.k2 + t))


def _h_minus(spec: CompositeSpec, t: float) -> float:
    return 1.0 / (spec.m1 / (spec.k1 - t) + spec.m2 / (spec.k2 - t))


def _h0(spec: CompositeSpec, t: float) -> float:
    return 1.0 / (spec.m1 / (2.0 * spec.k1) + spec.m2 / (spec.k2 + t))


def translated_cell_energy_closed(spec: CompositeSpec, r: float, t: float, regime: Regime):
    """Closed-form relaxed cell energy Y(r, t) with its minimizing averages.

    Raises RegimeMismatch if t lies outside the regime's validity interval
    (t = k2 for A, k1 < t < k2 for B and C, t = k1 for D, 0 <= t < k1 for E).
    """
    regime = Regime(regime)
    load = Loading(r)
    S01, D01 = load.S01, load.D01
    k1, k2, m1, m2 = spec.k1, spec.k2, spec.m1, spec.m2
    tol = 1e-12 * max(k2, 1.0)

    if regime is Regime.A:
        if abs(t - k2) > tol:
            raise RegimeMismatch(f"regime A requires t = k2, got t={t}")
        h2 = 1.0 / (m1 / (2.0 * k1) + m2 / (2.0 * k2))
        s11 = h2 * S01 / (2.0 * k1)
        s21 = h2 * S01 / (2.0 * k2)
        d11 = min(s11, D01 / m1) if m1 > 0 else 0.0
        d21 = (D01 - m1 * d11) / m2 if m2 > 0 else 0.0
        return h2 * S01**2, PhaseAverages(s11, 0.0, s21, 0.0, d11, 0.0, d21, 0.0)

    if regime is Regime.D:
        if abs(t - k1) > tol:
            raise RegimeMismatch(f"regime D requires t = k1, got t={t}")
        h1 = 1.0 / (m1 / (2.0 * k1) + m2 / (k1 + k2))
        s11 = h1 * S01 / (2.0 * k1)
        s21 = h1 * S01 / (k1 + k2)
        d11 = D01 / m1 if m1 > 0 else 0.0
        return h1 * S01**2, PhaseAverages(s11, 0.0, s21, 0.0, d11, 0.0, 0.0, 0.0)

    if regime is Regime.E:
        if not (-tol <= t < k1 - tol):
            raise RegimeMismatch(f"regime E requires 0 <= t < k1, got t={t}")
        hp, hm = _h_plus(spec, t), _h_minus(spec, t)
        avg = PhaseAverages(
            S11=S01 * hp / (k1 + t), S12=0.0,
            S21=S01 * hp / (k2 + t), S22=0.0,
            D11=D01 * hm / (k1 - t), D12=0.0,
            D21=D01 * hm / (k2 - t), D22=0.0,
        )
        return hp * S01**2 + hm * D01**2, avg

    if not (k1 + tol < t < k2 - tol):
        raise RegimeMismatch(f"regimes B/C require k1 < t < k2, got t={t}")

    if regime is Regime.B:
        h0 = _h0(spec, t)
        s11 = h0 * S01 / (2.0 * k1)
        s21 = h0 * S01 / (k2 + t)
        return h0 * S01**2, PhaseAverages(s11, 0.0, s21, 0.0, D01 / m1, 0.0, 0.0, 0.0)

    return c_branch(spec, r, t)


def c_branch(spec: CompositeSpec, r: float, t: float):
    """Disk-saturated branch (D11 = S11) for any t in [k1, k2].

    Valid on the closed interval: at t = k1 the material-1 well is
    degenerate and the disk still applies, which makes this the value of
    the relaxed energy at the kink whenever the plain t = k1 averages
    violate the disk.
    """
    load = Loading(r)
    S01, D01 = load.S01, load.D01
    k1, k2, m1, m2 = spec.k1, spec.k2, spec.m1, spec.m2
    kt = spec.k_tilde
    s11 = (k2 + r * t) / (SQRT2 * kt)
    s21 = (S01 - m1 * s11) / m2
    d21 = (D01 - m1 * s11) / m2
    y = 2.0 * m1 * k1 * s11**2 + m2 * (k2 + t) * s21**2 + m2 * (k2 - t) * d21**2
    return y, PhaseAverages(s11, 0.0, s21, 0.0, s11, 0.0, d21, 0.0)


# ---------------------------------------------------------------------------
# Independent oracle: active-set enumeration for the inner minimization.
# ---------------------------------------------------------------------------

def _solve_pattern(coeff_s, coeff_d, disk, active, m, S01, D01):
    """Equality-constrained KKT solve for one disk active-set pattern.

    Variables x = (S1, S2, D1, D2) are the j=1 components of the two finite
    materials (j=2 components vanish at the optimum).  Returns
    (value, x, feasible); feasibility covers primal slack of inactive disks
    and dual sign of active ones.
    """
    n = 4
    q = np.zeros((n, n))
    q[0, 0], q[1, 1] = 2.0 * coeff_s[0], 2.0 * coeff_s[1]
    q[2, 2], q[3, 3] = 2.0 * coeff_d[0], 2.0 * coeff_d[1]

    rows = [[m[0], m[1], 0.0, 0.0], [0.0, 0.0, m[0], m[1]]]
    rhs = [S01, D01]
    for i in range(2):
        if active[i]:
            row = [0.0] * n
            row[i] = -1.0
            row[2 + i] = 1.0
            rows.append(row)
            rhs.append(0.0)
    a = np.array(rows)
    n_c = a.shape[0]
    kkt = np.zeros((n + n_c, n + n_c))
    kkt[:n, :n] = q
    kkt[:n, n:] = a.T
    kkt[n:, :n] = a
    f = np.concatenate([np.zeros(n), np.array(rhs)])
    try:
        sol = np.linalg.solve(kkt, f)
    except np.linalg.LinAlgError:
        return math.inf, None, False
    x = sol[:n]

    feasible = True
    mult_index = n + 2
    for i in range(2):
        if disk[i] and not active[i] and x[2 + i] - x[i] > 1e-11:
            feasible = False
        if active[i]:
            if sol[mult_index] < -1e-11:
                feasible = False
            mult_index += 1
    value = (coeff_s[0] * x[0] ** 2 + coeff_s[1] * x[1] ** 2
             + coeff_d[0] * x[2] ** 2 + coeff_d[1] * x[3] ** 2)
    return value, x, feasible


def _single_material(k: float, m: float, t: float, S01: float, D01: float):
    """Oracle limit when the other finite fraction vanishes."""
    s, d = S01 / m, D01 / m
    if classify_well(k, t) is WellCase.CONVEX:
        return m * (k + t) * s**2 + m * (k - t) * d**2, s, d
    return 2.0 * k * m * s**2, s, d


def oracle_minimizer(spec: CompositeSpec, r: float, t: float):
    """Minimize V1 + V2 over the averages; returns (Y, PhaseAverages).

    The inner problem is a small constrained QP: four linear averaging
    constraints plus, for each material in the nonconvex or degenerate case,
    the disk constraint |D_i| <= |S_i|.  It is solved exactly by enumerating
    disk active-set patterns; no iterative solver is involved.
    """
    if t < 0.0:
        raise ValueError(f"translation parameter must be nonnegative, got {t}")
    load = Loading(r)
    S01, D01 = load.S01, load.D01

    if spec.m1 == 0.0 or spec.m2 == 0.0:
        if spec.m1 == 0.0 and spec.m2 == 0.0:
            return 0.0, PhaseAverages(0, 0, 0, 0, 0, 0, 0, 0)
        if spec.m1 == 0.0:
            y, s, d = _single_material(spec.k2, spec.m2, t, S01, D01)
            return y, PhaseAverages(0.0, 0.0, s, 0.0, 0.0, 0.0, d, 0.0)
        y, s, d = _single_material(spec.k1, spec.m1, t, S01, D01)
        return y, PhaseAverages(s, 0.0, 0.0, 0.0, d, 0.0, 0.0, 0.0)

    coeff_s, coeff_d, disk = [], [], []
    for k_i, m_i in ((spec.k1, spec.m1), (spec.k2, spec.m2)):
        if classify_well(k_i, t) is WellCase.CONVEX:
            coeff_s.append(m_i * (k_i + t))
            coeff_d.append(m_i * (k_i - t))
            disk.append(False)
        else:
            coeff_s.append(2.0 * k_i * m_i)
            coeff_d.append(0.0)
            disk.append(True)
    m = [spec.m1, spec.m2]

    if all(disk):
        # t >= k2: both wells are d-independent; solve the S-part alone and
        # split the d-average proportionally (feasible since D01 <= S01).
        denom = m[0] ** 2 / coeff_s[0] + m[1] ** 2 / coeff_s[1]
        lam = S01 / denom
        s1, s2 = lam * m[0] / coeff_s[0], lam * m[1] / coeff_s[1]
        scale = D01 / S01
        avg = PhaseAverages(s1, 0.0, s2, 0.0, scale * s1, 0.0, scale * s2, 0.0)
        return coeff_s[0] * s1**2 + coeff_s[1] * s2**2, avg

    # At most one disk below t = k2: enumerate its active-set patterns.
    patterns = [(False, False)]
    for i in range(2):
        if disk[i]:
            patterns.append(tuple(j == i for j in range(2)))

    best_val, best_x = math.inf, None
    for active in patterns:
        val, x, feasible = _solve_pattern(coeff_s, coeff_d, disk, active, m, S01, D01)
        if feasible and val < best_val:
            best_val, best_x = val, x
    if best_x is None:
        raise RuntimeError(f"no feasible active-set pattern at t={t} (unexpected)")

    x = best_x
    avg = PhaseAverages(x[0], 0.0, x[1], 0.0, x[2], 0.0, x[3], 0.0)
    return best_val, avg


def translated_cell_energy_oracle(spec: CompositeSpec, r: float, t: float) -> float:
    """Relaxed cell energy Y(r, t) from the active-set oracle."""
    return oracle_minimizer(spec, r, t)[0]
