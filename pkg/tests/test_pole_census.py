"""Census tests: pole positions, residues, rank fits, serialization.

The tangent family gives exact oracles: poles at (k+1/2)pi with residue -1
(scaled by lambda for the lambda*tan variants).  The Airy and Weber cases
check the asymptotic rank laws instead, at the tolerances the exponent
fits are expected to meet on censuses of this depth.
"""

import io
import math
from dataclasses import replace

import pytest

from escdim.census import (
    counting_function_order,
    find_poles,
    fit_modulus_exponent,
    fit_residue_exponent,
    read_census_csv,
    residue_at,
    synthetic_census,
    write_census_csv,
)
from escdim.census import _annulus_checks
from escdim.nevanlinna import (
    infinity_asymptotic_screen,
    spec_lambda_tan,
    spec_tan,
)


def _nearest_half_integer_pole(a: complex) -> complex:
    k = round(a.real / math.pi - 0.5)
    return (k + 0.5) * math.pi + 0j


class TestTanOracles:
    def test_pole_count_and_positions_radius_20(self, tan20):
        assert len(tan20.records) == 12
        want = sorted(((k + 0.5) * math.pi for k in range(-6, 6)),
                      key=lambda x: (abs(x), 0.0 if x > 0 else math.pi))
        for rec, w in zip(tan20.records, want):
            assert abs(rec.a - w) <= 1e-9
            assert abs(rec.a.imag) <= 1e-9

    def test_nearest_pole_is_pi_half(self, tan20):
        assert abs(tan20.records[0].a - math.pi / 2) <= 1e-9

    def test_pole_count_radius_50(self, tan50):
        assert len(tan50.records) == 32
        for rec in tan50.records:
            assert abs(rec.a - _nearest_half_integer_pole(rec.a)) <= 1e-9

    def test_annulus_20_40_holds_14_poles(self, tan50):
        n = sum(1 for rec in tan50.records if 20.0 < abs(rec.a) <= 40.0)
        assert n == 14

    def test_residues_are_minus_one(self, tan50):
        for rec in tan50.records:
            assert abs(rec.b + 1.0) <= 1e-6

    def test_negative_axis_residue(self, tan20):
        rec = next(r for r in tan20.records if abs(r.a + math.pi / 2) < 1e-6)
        assert abs(rec.b + 1.0) <= 1e-8

    def test_counting_order_near_one(self, tan50):
        assert abs(counting_function_order(tan50) - 1.0) <= 0.05

    def test_residue_slope_near_zero(self, tan50):
        fit = fit_residue_exponent(tan50)
        assert abs(fit.exponent) <= 1e-6
        assert abs(fit.constant - 1.0) <= 1e-6

    def test_small_census_has_no_annulus_checks(self, tan20):
        assert tan20.annuli == ()
        assert not tan20.flagged_incomplete


class TestLambdaTan:
    def test_residue_scales_with_lambda(self):
        lam = 2.0 - 1.0j
        census = find_poles(spec_lambda_tan(lam), 4.0)
        assert len(census.records) == 2
        for rec in census.records:
            assert abs(rec.b + lam) <= 1e-8


class TestResidueContour:
    def test_radius_halving_invariance(self):
        r1 = residue_at(spec_tan(), math.pi / 2 + 0j, 0.4)
        r2 = residue_at(spec_tan(), math.pi / 2 + 0j, 0.2)
        assert abs(r1 - r2) <= 1e-8

    def test_rejects_nonpositive_radius(self):
        with pytest.raises(ValueError):
            residue_at(spec_tan(), math.pi / 2 + 0j, 0.0)


class TestAiryLaws:
    def test_census_depth(self, airy26):
        assert len(airy26.records) >= 60

    def test_modulus_exponent(self, airy26):
        fit = fit_modulus_exponent(airy26)
        assert abs(fit.exponent - 2.0 / 3.0) <= 0.05

    def test_residue_exponent(self, airy26):
        fit = fit_residue_exponent(airy26)
        assert abs(fit.exponent + 1.0 / 3.0) <= 0.07

    def test_counting_order(self, airy26):
        assert abs(counting_function_order(airy26) - 1.5) <= 0.1

    def test_poles_cluster_on_critical_rays(self, airy26):
        rays = (0.0, 2 * math.pi / 3, 4 * math.pi / 3)
        for rec in airy26.records:
            theta = math.atan2(rec.a.imag, rec.a.real) % (2 * math.pi)
            dist = min(min(abs(theta - ray), 2 * math.pi - abs(theta - ray))
                       for ray in rays)
            assert dist <= 0.5

    def test_outermost_residue_predicted_by_inner_fit(self, airy26):
        inner = airy26.records[: len(airy26.records) // 2]
        logs = [math.log(abs(r.b) * abs(r.a) ** 0.5) for r in inner]
        cprime = math.exp(sum(logs) / len(logs))
        last = airy26.records[-1]
        ratio = abs(last.b) / (cprime * abs(last.a) ** -0.5)
        assert 0.5 <= ratio <= 2.0

    def test_annulus_ladder_clean(self, airy26):
        assert airy26.annuli
        assert not airy26.flagged_incomplete
        for lower, upper in zip(airy26.annuli, airy26.annuli[1:]):
            assert lower.r_outer == upper.r_inner
        assert airy26.annuli[-1].r_outer == airy26.search_radius


class TestWeberLaws:
    def test_census_depth(self, weber12):
        assert len(weber12.records) >= 80

    def test_modulus_exponent(self, weber12):
        fit = fit_modulus_exponent(weber12)
        assert abs(fit.exponent - 0.5) <= 0.05

    def test_residue_exponent(self, weber12):
        fit = fit_residue_exponent(weber12)
        assert abs(fit.exponent + 0.5) <= 0.07

    def test_counting_order(self, weber12):
        assert abs(counting_function_order(weber12) - 2.0) <= 0.1

    def test_not_flagged(self, weber12):
        assert not weber12.flagged_incomplete


class TestRecordInvariants:
    @pytest.fixture(params=["tan50", "airy26", "weber12"])
    def census(self, request):
        return request.getfixturevalue(request.param)

    def test_residuals_below_budget(self, census):
        for rec in census.records:
            assert rec.newton_residual <= 1e-10 * (1.0 + abs(rec.a))

    def test_residues_nonzero(self, census):
        for rec in census.records:
            assert rec.b != 0

    def test_sorted_by_modulus_with_consecutive_ranks(self, census):
        mods = [abs(rec.a) for rec in census.records]
        assert mods == sorted(mods)
        assert [rec.j for rec in census.records] == \
            list(range(1, len(census.records) + 1))


class TestSyntheticCensus:
    @pytest.mark.parametrize("m", [0, 1, 2, 3, 4, 6])
    def test_fits_recover_the_laws_exactly(self, m):
        s = synthetic_census(m, 1.3, 0.7, 400, rays=(0.0, 2.1))
        fm = fit_modulus_exponent(s)
        fb = fit_residue_exponent(s)
        assert abs(fm.exponent - 2.0 / (m + 2)) <= 1e-12
        assert abs(fb.exponent + m / (m + 2.0)) <= 1e-12
        assert abs(fm.constant - 1.3) <= 1e-9
        assert abs(fb.constant - 0.7) <= 1e-9

    def test_tangent_like_structure(self):
        s = synthetic_census(0, math.pi / 2, 1.0, 10,
                             rays=(0.0, math.pi))
        assert s.synthetic
        assert abs(s.records[0].a - math.pi / 2) <= 1e-15
        for rec in s.records:
            assert rec.b == 1.0
            theta = math.atan2(rec.a.imag, rec.a.real) % (2 * math.pi)
            want = 0.0 if rec.j % 2 == 1 else math.pi
            assert abs(theta - want) <= 1e-12

    def test_quadratic_case_rank_16(self):
        s = synthetic_census(2, 0.9, 0.6, 16)
        rec = s.records[-1]
        assert rec.j == 16
        assert abs(abs(rec.a) - 4 * 0.9) <= 1e-12
        assert abs(rec.b - 0.6 / 4) <= 1e-12

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            synthetic_census(-1, 1.0, 1.0, 10)
        with pytest.raises(ValueError):
            synthetic_census(0, 1.0, 1.0, 0)
        with pytest.raises(ValueError):
            synthetic_census(0, 1.0, 1.0, 10, rays=())

    def test_band_dropout_flags_incomplete(self):
        s = synthetic_census(2, 1.0, 0.5, 200)
        kept = [r for r in s.records if not (13 <= r.j <= 32)]
        kept = [replace(r, j=i + 1) for i, r in enumerate(kept)]
        depleted = replace(s, records=tuple(kept))
        checks = _annulus_checks(depleted)
        assert any(ch.flagged for ch in checks)


class TestSearchValidation:
    def test_radius_must_clear_basepoint(self):
        with pytest.raises(ValueError):
            find_poles(spec_tan(), 0.5)

    def test_radius_below_first_pole_gives_empty_census(self):
        census = find_poles(spec_tan(), 1.2)
        assert census.records == ()
        assert not census.flagged_incomplete
        with pytest.raises(ValueError):
            fit_modulus_exponent(census)


class TestSerialization:
    def test_csv_round_trip(self, tan20):
        buf = io.StringIO()
        write_census_csv(tan20, buf)
        back = read_census_csv(io.StringIO(buf.getvalue()),
                               tan20.function_id)
        assert back.function_id == tan20.function_id
        assert len(back.records) == len(tan20.records)
        for got, want in zip(back.records, tan20.records):
            assert got.j == want.j
            assert got.a == want.a
            assert got.b == want.b
            assert got.newton_residual == want.newton_residual
            assert got.ray_label == want.ray_label


class TestWindingScreen:
    def test_census_passes_asymptotic_screen(self, tan20):
        report = infinity_asymptotic_screen(spec_tan(), 18.0, tan20)
        assert report.status == "pass"
        assert len(report.entries) == len(tan20.records)
