"""Inverse-branch cover tests: sandwich disks, Newton branches, cylinders.

The tangent census makes every quantity checkable against closed forms
(poles at half-integer multiples of pi, residues -1), so the sandwich,
inversion and cylinder bounds are exercised there; one Airy pole keeps
the non-elementary path honest.
"""

import cmath
import math
from dataclasses import replace

import pytest

from escdim.census import synthetic_census
from escdim.covers import (
    NewtonDiverged,
    admissibility_threshold,
    branch_info,
    cylinder_diameter,
    empirical_cylinder_diameter,
    koebe_sandwich_check,
    newton_inverse,
    verify_nesting,
)
from escdim.geometry import SpherePoint, chordal_distance
from escdim.nevanlinna import spec_airy, spec_tan


@pytest.fixture(scope="module")
def tan_spec():
    return spec_tan()


@pytest.fixture(scope="module")
def airy_spec():
    return spec_airy()


class TestBranchInfo:
    def test_tan_pi_half_disks(self, tan20):
        info = branch_info(tan20, 1, 10.0)
        assert abs(info.inner.radius - 1.0 / 40) <= 1e-9
        assert abs(info.outer.radius - 1.0 / 5) <= 1e-9
        assert abs(info.diam_bound - 2.0 / 5) <= 1e-9
        assert info.inner.radius < info.outer.radius
        assert info.diam_bound == 2.0 * info.outer.radius

    def test_doubling_R_halves_outer(self, tan20):
        r10 = branch_info(tan20, 1, 10.0).outer.radius
        r20 = branch_info(tan20, 1, 20.0).outer.radius
        assert abs(r20 - 0.5 * r10) <= 1e-14 * r10

    def test_containment_flag(self, tan20, tan50):
        assert not branch_info(tan20, 1, 10.0).contained_in_BR
        assert branch_info(tan50, 32, 10.0).contained_in_BR

    def test_derivative_bound_value(self, tan20):
        info = branch_info(tan20, 1, 10.0)
        want = 12.0 * abs(info.b) / abs(info.a) ** 2
        assert abs(info.derivative_bound(info.a) - want) <= 1e-15 * want

    def test_rank_validation(self, tan20):
        with pytest.raises(ValueError):
            branch_info(tan20, 0, 10.0)
        with pytest.raises(ValueError):
            branch_info(tan20, 13, 10.0)

    def test_radius_validation(self, tan20):
        with pytest.raises(ValueError):
            branch_info(tan20, 1, 0.0)


class TestAdmissibility:
    def test_tan50_threshold(self, tan50):
        assert admissibility_threshold(tan50, 10.0) == 7

    def test_fully_admissible_synthetic(self):
        s = synthetic_census(0, 20.0, 0.1, 30)
        assert admissibility_threshold(s, 10.0) == 1


class TestSandwich:
    def test_pi_half_passes(self, tan_spec, tan20):
        report = koebe_sandwich_check(tan_spec, branch_info(tan20, 1, 10.0), 64)
        assert report.status == "pass"
        assert report.samples == 128
        assert 4.5 <= report.worst_margin <= 5.5

    def test_outer_margin_matches_closed_form(self, tan_spec, tan20):
        report = koebe_sandwich_check(tan_spec, branch_info(tan20, 1, 10.0), 64)
        worst_tan = max(
            abs(cmath.tan(math.pi / 2 + 0.2 * cmath.exp(2j * math.pi * t / 256)))
            for t in range(256))
        assert abs(report.worst_margin - (10.0 - worst_tan)) <= 0.05

    def test_not_applicable_below_threshold(self, tan_spec, tan20):
        report = koebe_sandwich_check(tan_spec, branch_info(tan20, 1, 1.0), 64)
        assert report.status == "not-applicable"
        assert math.isnan(report.worst_margin)
        assert report.samples == 0

    @pytest.mark.parametrize("j", [7, 19, 32])
    def test_admissible_tan_poles_pass(self, tan_spec, tan50, j):
        report = koebe_sandwich_check(tan_spec, branch_info(tan50, j, 10.0), 64)
        assert report.status == "pass"
        assert report.worst_margin > 0

    def test_airy_admissible_pole_passes(self, airy_spec, airy26):
        j = admissibility_threshold(airy26, 10.0)
        report = koebe_sandwich_check(airy_spec, branch_info(airy26, j, 10.0), 64)
        assert report.status == "pass"
        assert report.worst_margin > 0

    def test_rejects_tiny_sample_count(self, tan_spec, tan20):
        with pytest.raises(ValueError):
            koebe_sandwich_check(tan_spec, branch_info(tan20, 1, 10.0), 4)


class TestNewtonInverse:
    def test_arctan_oracle(self, tan_spec, tan20):
        z = newton_inverse(tan_spec, tan20.records[0], 100.0, 10.0)
        assert abs(z - math.atan(100.0)) <= 1e-10

    def test_infinite_target_returns_pole(self, tan_spec, tan20):
        rec = tan20.records[0]
        assert newton_inverse(tan_spec, rec, math.inf, 10.0) == rec.a
        assert newton_inverse(tan_spec, rec, SpherePoint.infinity(), 10.0) == rec.a

    def test_round_trip_random_targets(self, tan_spec, tan50, rng):
        rec = tan50.records[6]
        for _ in range(100):
            w = (10.0 * math.exp(rng.uniform(0.01, 0.99) * math.log(100.0))
                 * cmath.exp(2j * math.pi * rng.random()))
            z = newton_inverse(tan_spec, rec, w, 10.0)
            val = tan_spec.evaluate(z)
            assert not val.infinite
            assert abs(val.value - w) <= 1e-8 * abs(w)

    def test_target_inside_disk_rejected(self, tan_spec, tan20):
        with pytest.raises(ValueError):
            newton_inverse(tan_spec, tan20.records[0], 5.0, 10.0)

    def test_corrupt_seed_raises_diverged(self, tan_spec, tan50):
        # a residue off by orders of magnitude shrinks the certified step
        # cap and disk so far that 50 capped steps cannot reach a solution
        bad = replace(tan50.records[6], b=1e-6 + 0j)
        with pytest.raises(NewtonDiverged):
            newton_inverse(tan_spec, bad, 100.0, 10.0)


class TestCylinderBounds:
    def test_depth1_recovers_diam_bound(self, tan50):
        est = cylinder_diameter(tan50, (7,), 10.0)
        want = branch_info(tan50, 7, 10.0).diam_bound
        assert abs(est.euclid_diam_bound - want) <= 1e-15 * want

    def test_depth2_product_value(self, tan50):
        rec = tan50.records[20]
        assert abs(rec.a - 10.5 * math.pi) <= 1e-9
        est = cylinder_diameter(tan50, (21, 21), 10.0)
        assert abs(est.euclid_diam_bound - 4.41e-3) <= 5e-5

    def test_sphere_formula_identity(self, tan50):
        est = cylinder_diameter(tan50, (21, 22, 23), 10.0)
        want = (4.0 * est.C1 / 10.0) * est.C ** 2
        for j in (21, 22, 23):
            rec = tan50.records[j - 1]
            want *= abs(rec.b) / abs(rec.a) ** 2
        assert abs(est.sphere_diam_bound - want) <= 1e-15 * want

    def test_appending_symbol_contracts(self, tan50):
        est2 = cylinder_diameter(tan50, (21, 21), 10.0)
        est3 = cylinder_diameter(tan50, (21, 21, 21), 10.0)
        rec = tan50.records[20]
        factor = est3.C * abs(rec.b) / abs(rec.a) ** 2
        assert factor < 1
        ratio = est3.euclid_diam_bound / est2.euclid_diam_bound
        assert abs(ratio - factor) <= 1e-12

    def test_symbol_validation(self, tan50):
        with pytest.raises(ValueError):
            cylinder_diameter(tan50, (1,), 10.0)
        with pytest.raises(ValueError):
            cylinder_diameter(tan50, (21, 3), 10.0)
        with pytest.raises(ValueError):
            cylinder_diameter(tan50, (), 10.0)


class TestNesting:
    def test_depth2_passes(self, tan_spec, tan50):
        report = verify_nesting(tan_spec, tan50, (21, 23), 10.0, 16)
        assert report.status == "pass"
        assert report.worst_margin > 0
        assert report.samples == 16

    def test_depth3_passes(self, tan_spec, tan50):
        report = verify_nesting(tan_spec, tan50, (7, 21, 9), 10.0, 8)
        assert report.status == "pass"
        assert report.worst_margin > 0

    def test_depth1_vacuous(self, tan_spec, tan50):
        report = verify_nesting(tan_spec, tan50, (7,), 10.0, 16)
        assert report.status == "pass"
        assert report.samples == 0
        assert math.isinf(report.worst_margin)

    def test_inadmissible_symbol_rejected(self, tan_spec, tan50):
        with pytest.raises(ValueError):
            verify_nesting(tan_spec, tan50, (3, 21), 10.0, 16)


class TestEmpiricalDiameter:
    def test_depth1_sits_between_sandwich_brackets(self, tan_spec, tan50):
        emp = empirical_cylinder_diameter(tan_spec, tan50, (7,), 10.0, 16)
        rb = abs(tan50.records[6].b)
        assert rb / 20.0 <= emp <= 4.0 * rb / 10.0
        assert abs(emp - 2.0 * rb / 10.0) <= 0.02

    def test_depth_1_and_2_dominated_by_analytic(self, tan_spec, tan50, rng):
        ranks = list(range(13, 33))
        codes = [(j,) for j in ranks]
        codes += [(rng.choice(ranks), rng.choice(ranks)) for _ in range(12)]
        for code in codes:
            emp = empirical_cylinder_diameter(tan_spec, tan50, code, 10.0, 16)
            bound = cylinder_diameter(tan50, code, 10.0).euclid_diam_bound
            assert emp <= bound

    def test_sampling_density_stability(self, tan_spec, tan50):
        e16 = empirical_cylinder_diameter(tan_spec, tan50, (21, 21), 10.0, 16)
        e64 = empirical_cylinder_diameter(tan_spec, tan50, (21, 21), 10.0, 64)
        assert abs(e16 - e64) <= 0.10 * e64

    def test_depth_cap(self, tan_spec, tan50):
        with pytest.raises(ValueError):
            empirical_cylinder_diameter(tan_spec, tan50, (21, 21, 21, 21), 10.0)


class TestSphericalConversion:
    def test_chordal_diameter_bounded_by_scaled_euclidean(self, tan50, rng):
        info = branch_info(tan50, 21, 10.0)
        scale = 4.0 / abs(info.a) ** 2
        for _ in range(50):
            z = info.a + info.outer.radius * rng.random() * cmath.exp(
                2j * math.pi * rng.random())
            w = info.a + info.outer.radius * rng.random() * cmath.exp(
                2j * math.pi * rng.random())
            assert chordal_distance(z, w) <= scale * abs(z - w) + 1e-15
