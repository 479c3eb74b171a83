import math

import pytest

from triphase.core import CompositeSpec, DomainError, InvalidSpec
from triphase.bounds import (
    Region,
    boundary_curves,
    brute_force_bound,
    classify_region,
    lower_bound,
    region_D_value,
    t_cr1,
    t_opt_C,
)

SPEC_B = CompositeSpec(1.0, 3.0, 0.1, 0.5)
SPEC_2 = CompositeSpec(1.0, 2.0, 0.15, 0.5)


def linspace(lo, hi, n):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


class TestBoundaryCurves:
    def test_bc_line_is_m2(self):
        for m2 in (0.3, 0.5, 0.7):
            sp = CompositeSpec(1.0, 3.0, 0.1, m2)
            curves = boundary_curves(sp)
            for m1 in (0.05, 0.2):
                assert curves["psi_BC"](m1) == m2

    def test_psi_AB_example(self):
        # k1=1, k2=3, m1=0.2, m2=0.5: k_tilde = 1.1
        sp = CompositeSpec(1.0, 3.0, 0.2, 0.5)
        expected = 0.5 * (1.0 / (1.1 + math.sqrt(1.1**2 - 0.5))) ** 2
        got = boundary_curves(sp)["psi_AB"](0.2)
        assert got == pytest.approx(expected, rel=1e-14)
        assert got == pytest.approx(0.1325, abs=5e-5)

    def test_psi_AB_is_where_tcr1_hits_k2(self):
        sp = SPEC_B
        r_b = boundary_curves(sp)["psi_AB"](sp.m1)
        assert t_cr1(sp, r_b) == pytest.approx(sp.k2, rel=1e-12)

    def test_psi_BD_is_where_tcr1_hits_k1(self):
        # the B/D boundary exists only for m1 past the P2 ordinate
        sp = CompositeSpec(1.0, 3.0, 0.2, 0.5)
        r_b = boundary_curves(sp)["psi_BD"](sp.m1)
        assert t_cr1(sp, r_b) == pytest.approx(sp.k1, rel=1e-12)
        with pytest.raises(DomainError):
            boundary_curves(SPEC_B)["psi_BD"](SPEC_B.m1)

    def test_psi_AC_CE_are_where_tC_hits_k2_k1(self):
        sp = CompositeSpec(1.0, 3.0, 0.1, 0.5)
        curves = boundary_curves(sp)
        assert t_opt_C(sp, curves["psi_AC"](sp.m1)) == pytest.approx(sp.k2, rel=1e-12)
        assert t_opt_C(sp, curves["psi_CE"](sp.m1)) == pytest.approx(sp.k1, rel=1e-12)

    def test_P3_on_axis(self):
        # m1 = k1 (1 - m2) / k2 -> 1/6 for k1=1, k2=3, m2=0.5
        assert 1.0 * (1 - 0.5) / 3.0 == pytest.approx(1 / 6)
        sp = CompositeSpec(1.0, 3.0, 1 / 6, 0.5)
        assert boundary_curves(sp)["psi_AC"](1 / 6) == pytest.approx(0.0, abs=1e-15)

    def test_phi_D2E_explicit_matches_defining(self):
        for k1, k2, m2 in ((1.0, 3.0, 0.5), (1.0, 2.0, 0.4), (2.0, 5.0, 0.3)):
            sp = CompositeSpec(k1, k2, 0.3, m2)
            curves = boundary_curves(sp)
            for m1 in linspace(k1 * (1 - m2) / (k1 + k2) + 0.01, 1 - m2 - 0.01, 9):
                try:
                    explicit = curves["phi_D2E"](m1)
                except DomainError:
                    continue
                defining = curves["phi_D2E_defining"](m1)
                assert explicit == pytest.approx(defining, abs=1e-8)

    def test_domain_error_for_missing_curve(self):
        sp = CompositeSpec(1.0, 3.0, 0.01, 0.5)
        with pytest.raises(DomainError):
            boundary_curves(sp)["psi_AB"](0.01)


class TestClassification:
    def test_region_B_example(self):
        assert t_cr1(SPEC_B, 0.7) == pytest.approx(1.368, abs=5e-4)
        assert classify_region(SPEC_B, 0.7) is Region.B

    def test_region_E_example(self):
        sp = CompositeSpec(1.0, 3.0, 0.2, 0.5)
        assert classify_region(sp, 0.05) is Region.E

    def test_bc_tie(self):
        sp = CompositeSpec(1.0, 3.0, 0.1, 0.5)
        res = lower_bound(sp, sp.m2)
        assert res.region is Region.C
        assert Region.B in res.tie

    def test_tiny_m1_is_A(self):
        sp = CompositeSpec(1.0, 3.0, 1e-4, 0.5)
        assert classify_region(sp, 1.0) in (Region.A1, Region.A2)

    def test_region_sequence_reference_composite(self):
        # k1=1, k2=2, m1=0.15, m2=0.5: decreasing r crosses D, B, C, A
        seen = []
        for r in linspace(1.0, 0.02, 120):
            reg = classify_region(SPEC_2, r).value[0]
            if not seen or seen[-1] != reg:
                seen.append(reg)
        assert seen == ["D", "B", "C", "A"]

    def test_region_map_topology(self):
        # k1=1, k2=3, m2=0.5: A at small m1, E at small r with larger m1,
        # D at large m1 and large r
        assert classify_region(CompositeSpec(1, 3, 0.02, 0.5), 0.2).value[0] == "A"
        assert classify_region(CompositeSpec(1, 3, 0.02, 0.5), 0.9).value[0] == "A"
        assert classify_region(CompositeSpec(1, 3, 0.3, 0.5), 0.1) is Region.E
        assert classify_region(CompositeSpec(1, 3, 0.4, 0.5), 0.9) is Region.D1

    def test_invalid_r(self):
        with pytest.raises(InvalidSpec):
            classify_region(SPEC_B, 0.0)
        with pytest.raises(InvalidSpec):
            classify_region(SPEC_B, 1.5)


class TestLowerBound:
    def test_region_B_value_example(self):
        res = lower_bound(SPEC_B, 0.7)
        expected = 10.0 * (1.7 - 2 * math.sqrt(0.35)) ** 2 + 2 * 0.7 * 3.0
        assert res.region is Region.B
        assert res.B == pytest.approx(expected, rel=1e-14)
        assert res.B == pytest.approx(6.871, abs=5e-4)

    def test_region_C_value_example(self):
        # k1=1, k2=2, m1=0.15, m2=0.5: B = 2.6667 + 4 r^2 in region C
        for r in (0.36, 0.42, 0.48):
            res = lower_bound(SPEC_2, r)
            assert res.region is Region.C
            assert res.B == pytest.approx(0.4 / 0.15 + 4 * r**2, rel=1e-13)

    def test_region_D_two_phase_limit(self):
        # m2 -> 0 reduces to the two-phase translation bound H1 = 2 k1 / m1
        sp = CompositeSpec(1.0, 3.0, 0.4, 1e-13)
        r = 0.6
        res = lower_bound(sp, r)
        assert res.region in (Region.D1, Region.D2)
        h1 = 1.0 / (sp.m1 / (2 * sp.k1) + sp.m2 / (sp.k1 + sp.k2))
        assert res.B == pytest.approx(h1 * (1 + r) ** 2 / 2 - 2 * r * sp.k1, rel=1e-12)
        assert res.B == pytest.approx(2 * sp.k1 / sp.m1 * (1 + r) ** 2 / 2 - 2 * r * sp.k1,
                                      rel=1e-9)

    def test_t_opt_in_range(self):
        for m1 in (0.03, 0.1, 0.2, 0.3):
            sp = CompositeSpec(1.0, 3.0, m1, 0.5)
            for r in (0.05, 0.3, 0.7, 1.0):
                res = lower_bound(sp, r)
                assert -1e-12 <= res.t_opt <= sp.k2 + 1e-12

    def test_dominates_fixed_translation(self):
        # B(r) >= the t = k1 member of the family
        for m1 in (0.05, 0.15, 0.3):
            sp = CompositeSpec(1.0, 3.0, m1, 0.5)
            for r in (0.1, 0.5, 0.9):
                assert lower_bound(sp, r).B >= region_D_value(sp, r) - 1e-12

    def test_interior_stationarity(self):
        # at an interior optimum d(Y - 2rt)/dt vanishes
        from triphase.translation import translated_cell_energy_oracle as oracle
        sp, r = SPEC_B, 0.7
        res = lower_bound(sp, r)
        h = 1e-6
        g = lambda t: oracle(sp, r, t) - 2 * t * r
        deriv = (g(res.t_opt + h) - g(res.t_opt - h)) / (2 * h)
        assert abs(deriv) < 1e-6


class TestBruteForce:
    def test_agrees_with_closed_forms(self):
        for m1 in (0.05, 0.12, 0.2, 0.32):
            sp = CompositeSpec(1.0, 3.0, m1, 0.5)
            for r in (0.08, 0.35, 0.62, 0.95):
                b_cf = lower_bound(sp, r).B
                b_or, _ = brute_force_bound(sp, r, n_grid=200)
                assert b_cf == pytest.approx(b_or, rel=1e-7)

    def test_isotropic_case(self):
        # r = 1 reproduces the isotropic bound values
        for m1 in (0.05, 0.15, 0.3):
            sp = CompositeSpec(1.0, 3.0, m1, 0.5)
            b_cf = lower_bound(sp, 1.0).B
            b_or, _ = brute_force_bound(sp, 1.0, n_grid=200)
            assert b_cf == pytest.approx(b_or, rel=1e-7)

    def test_t_opt_at_k2_in_region_A(self):
        sp = CompositeSpec(1.0, 3.0, 0.03, 0.5)
        assert classify_region(sp, 0.9) in (Region.A1, Region.A2)
        _, t_opt = brute_force_bound(sp, 0.9, n_grid=200)
        assert t_opt == pytest.approx(sp.k2, abs=1e-5)

    def test_validates_arguments(self):
        with pytest.raises(ValueError):
            brute_force_bound(SPEC_B, 0.5, t_max=1.0)
        with pytest.raises(ValueError):
            brute_force_bound(SPEC_B, 0.5, n_grid=50)


class TestSpecialPointsOnCurves:
    @pytest.mark.parametrize("k1,k2,m2", [(1.0, 3.0, 0.5), (1.0, 2.0, 0.5), (2.0, 7.0, 0.4)])
    def test_P2_lies_on_its_curves(self, k1, k2, m2):
        m1 = k1 * (1 - m2) / (k1 + k2)
        sp = CompositeSpec(k1, k2, m1, m2)
        curves = boundary_curves(sp)
        assert curves["psi_BD"](m1) == pytest.approx(m2, abs=1e-9)
        assert curves["psi_CE"](m1) == pytest.approx(m2, abs=1e-9)
        assert curves["phi_D2E_defining"](m1) == pytest.approx(m2, abs=1e-9)

    @pytest.mark.parametrize("k1,k2,m2", [(1.0, 3.0, 0.5), (1.0, 2.0, 0.5), (2.0, 7.0, 0.4)])
    def test_P1_lies_on_its_curves(self, k1, k2, m2):
        m1 = k1 * (1 - m2) / (2 * k2)
        sp = CompositeSpec(k1, k2, m1, m2)
        curves = boundary_curves(sp)
        assert curves["psi_A1A2"](m1) == pytest.approx(m2, abs=1e-9)
        assert curves["psi_AB"](m1) == pytest.approx(m2, abs=1e-9)

    def test_meeting_point_coordinates(self):
        # k1=1, k2=3, m2=0.5: P1 = (0.5, 1/12), P2 = (0.5, 0.125), P3 = (0, 1/6)
        assert 1.0 * 0.5 / 6 == pytest.approx(1 / 12)
        assert 1.0 * 0.5 / 4 == pytest.approx(0.125)
        assert 1.0 * 0.5 / 3 == pytest.approx(1 / 6)
