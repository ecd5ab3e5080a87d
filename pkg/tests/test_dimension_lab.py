"""Dimension-lab oracles: pressure roots, McMullen bounds, box counting.

The numeric targets here were frozen before the module was written.
Two- and three-symbol Moran systems have closed-form roots, synthetic
censuses obey their power laws exactly (so the tail exponent and the
finite-alphabet pressure root have analytic values), and the McMullen
ratio collapses to a single number for geometric density/diameter
sequences.  The tan and Airy targets restate Theorem-level constants:
escaping-set dimension 1/2 at degree 0 and 3/5 at degree 1.
"""

import math
from dataclasses import replace

import pytest

from escdim.census import Census, synthetic_census
from escdim.covers import admissibility_threshold, branch_info
from escdim.dimension import (
    EmptyAnnulus,
    EscapeRaster,
    FitUnstable,
    HIT_POLE,
    McMullenInput,
    NoRoot,
    STAYED,
    UNDEFINED,
    balanced_escape_radius,
    bk_upper_bound,
    bowen_root,
    box_count,
    cylinder_cover,
    escape_grid,
    mcmullen_bound,
    mcmullen_closed_form,
    mcmullen_lower,
    moran_root,
    pressure_curve,
    report,
    tail_critical_exponent,
    theoretical_dimension,
)
from escdim.geometry import Disk
from escdim.nevanlinna import spec_tan


LOG2_OVER_LOG3 = 0.6309297535714574


@pytest.fixture(scope="module")
def syn2():
    return synthetic_census(2, 1.0, 0.15, 400)


@pytest.fixture(scope="module")
def syn2_big():
    return synthetic_census(2, 1.0, 0.15, 16000)


@pytest.fixture(scope="module")
def tan60():
    from escdim.census import find_poles

    return find_poles(spec_tan(), 60.0)


def _tail_radius(census, rank: int) -> float:
    """Radius putting the admissibility threshold near the given rank."""
    return abs(census.records[rank - 1].a) * 0.98


class TestTheory:
    def test_known_values(self):
        assert theoretical_dimension(0) == 0.5
        assert theoretical_dimension(1) == 0.6
        assert bk_upper_bound(0) == pytest.approx(2.0 / 3.0, abs=1e-15)
        assert bk_upper_bound(1) == pytest.approx(6.0 / 7.0, abs=1e-15)

    def test_large_degree_stays_below_one(self):
        val = theoretical_dimension(100)
        assert val == pytest.approx(102.0 / 104.0, abs=1e-15)
        assert 0.98 <= val < 1.0

    def test_ordering_all_degrees(self):
        for m in range(101):
            assert theoretical_dimension(m) <= bk_upper_bound(m) + 1e-15
            assert theoretical_dimension(m) < 1.0

    def test_degree_validation(self):
        with pytest.raises(ValueError):
            theoretical_dimension(-1)
        with pytest.raises(ValueError):
            bk_upper_bound(-2)


class TestTailExponent:
    def test_synthetic_m2_exact(self, syn2):
        t = tail_critical_exponent(syn2, _tail_radius(syn2, 30))
        assert abs(t - 2.0 / 3.0) < 1e-10

    @pytest.mark.parametrize("m", [0, 1, 2, 3, 4, 6])
    def test_synthetic_family(self, m):
        census = synthetic_census(m, 1.0, 0.15, 400)
        t = tail_critical_exponent(census, _tail_radius(census, 30))
        assert abs(t - (m + 2.0) / (m + 4.0)) < 1e-6

    def test_tan_half(self, tan50):
        t = tail_critical_exponent(tan50, 10.0)
        assert abs(t - 0.5) < 0.02

    def test_airy_three_fifths(self, airy26):
        t = tail_critical_exponent(airy26, 10.0)
        assert abs(t - 0.6) < 0.05

    def test_weber_two_thirds(self, weber12):
        t = tail_critical_exponent(weber12, 6.0)
        assert abs(t - 2.0 / 3.0) < 0.05

    def test_broken_tail_law_is_unstable(self, syn2):
        # flatten the residues over the outer half of the tail: the two
        # half-window fits then disagree far beyond the 0.05 gate
        records = tuple(
            rec if rec.j <= 200 else replace(rec, b=0.15 + 0j)
            for rec in syn2.records)
        broken = replace(syn2, records=records)
        with pytest.raises(FitUnstable):
            tail_critical_exponent(broken, _tail_radius(syn2, 30))

    def test_non_decaying_tail_is_unstable(self, syn2):
        records = tuple(replace(rec, b=abs(rec.a) ** 2 + 0j)
                        for rec in syn2.records)
        flat = replace(syn2, records=records)
        with pytest.raises(FitUnstable):
            tail_critical_exponent(flat, _tail_radius(syn2, 30))

    def test_short_tail_rejected(self, syn2):
        with pytest.raises(ValueError):
            tail_critical_exponent(syn2, abs(syn2.records[-3].a))


class TestPressureCurve:
    def test_strictly_decreasing(self, syn2):
        curve = pressure_curve(syn2, _tail_radius(syn2, 30))
        vals = curve.values()
        assert all(x > y for x, y in zip(vals, vals[1:]))

    def test_value_at_zero_counts_alphabet(self, syn2):
        R = _tail_radius(syn2, 30)
        M = admissibility_threshold(syn2, R)
        curve = pressure_curve(syn2, R)
        assert curve.value(0.0) == pytest.approx(len(syn2.records) - M + 1)

    def test_factors_are_kappa_tau(self, syn2):
        R = _tail_radius(syn2, 30)
        M = admissibility_threshold(syn2, R)
        curve = pressure_curve(syn2, R)
        rec = syn2.records[M - 1]
        kappa = 192.0 / R
        assert curve.factors[0] == pytest.approx(
            kappa * abs(rec.b) / abs(rec.a) ** 2, rel=1e-12)

    def test_expansion_rejected(self, syn2):
        # tiny R inflates kappa until the first factor reaches 1
        with pytest.raises(ValueError):
            pressure_curve(syn2, 1e-6, tail_start=1)


class TestMoranRoot:
    def test_classic_pair(self):
        assert moran_root([0.5, 0.5]) == pytest.approx(1.0, abs=1e-9)

    def test_cantor_pair(self):
        assert moran_root([1.0 / 3.0, 1.0 / 3.0]) == pytest.approx(
            LOG2_OVER_LOG3, abs=1e-9)

    def test_quarter_pair(self):
        assert moran_root([0.25, 0.25]) == pytest.approx(0.5, abs=1e-9)

    def test_single_symbol_has_no_root(self):
        with pytest.raises(NoRoot) as err:
            moran_root([0.25])
        assert "1" in str(err.value)

    def test_empty_and_invalid_factors(self):
        with pytest.raises(ValueError):
            moran_root([])
        with pytest.raises(ValueError):
            moran_root([0.5, 1.0])
        with pytest.raises(ValueError):
            moran_root([0.5, -0.1])


class TestBowenRoot:
    def test_single_symbol_alphabet(self, syn2):
        R = _tail_radius(syn2, 30)
        M = admissibility_threshold(syn2, R)
        with pytest.raises(NoRoot):
            bowen_root(syn2, R, tail_start=M, tail_stop=M)

    def test_balanced_ladder_m2(self, syn2_big):
        R = balanced_escape_radius(syn2_big, 10000)
        assert 20.0 < R < 120.0
        M = admissibility_threshold(syn2_big, R)
        roots = [bowen_root(syn2_big, R, tail_start=M,
                            tail_stop=M + size - 1)
                 for size in (100, 1000, 10000)]
        assert roots[0] < roots[1] < roots[2]
        assert abs(roots[2] - 2.0 / 3.0) < 0.05

    def test_alphabet_beyond_census_rejected(self, syn2):
        with pytest.raises(ValueError):
            bowen_root(syn2, _tail_radius(syn2, 30), tail_start=30,
                       tail_stop=10 * len(syn2.records))


class TestMcMullenBound:
    def test_unit_density_gives_two(self):
        inp = McMullenInput((1.0, 1.0, 1.0), (0.5, 0.25, 0.125), "degenerate")
        assert mcmullen_bound(inp) == 2.0

    def test_geometric_collapse(self):
        inp = McMullenInput((0.25,) * 4, tuple(0.1 ** k for k in range(1, 5)),
                            "geometric")
        expected = 2.0 - math.log(4.0) / math.log(10.0)
        assert mcmullen_bound(inp) == pytest.approx(expected, abs=1e-12)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            McMullenInput((1.5,), (0.5,), "bad density")
        with pytest.raises(ValueError):
            McMullenInput((0.5,), (-0.5,), "bad diameter")
        with pytest.raises(ValueError):
            McMullenInput((0.5, 0.5), (0.25, 0.5), "growing diameters")
        with pytest.raises(ValueError):
            McMullenInput((0.5, 0.5), (0.25,), "length mismatch")

    @pytest.mark.parametrize("m", [0, 1, 2, 3, 4, 6])
    def test_closed_form_limit(self, m):
        val = mcmullen_closed_form(m, 1e12)
        assert abs(val - (m + 2.0) / (m + 4.0)) < 1e-3

    def test_synthetic_ladder_m0(self):
        census = synthetic_census(0, 1.0, 0.15, 500)
        vals = [mcmullen_lower(census, R, m=0)
                for R in (1e2, 1e3, 1e4, 1e5)]
        assert all(x < y for x, y in zip(vals, vals[1:]))
        assert vals[-1] >= 0.4

    @pytest.mark.parametrize("m", [1, 2, 3, 4, 6])
    def test_synthetic_ladders_monotone(self, m):
        census = synthetic_census(m, 1.0, 0.15, 500)
        vals = [mcmullen_lower(census, R, m=m) for R in (1e2, 1e3, 1e4)]
        assert all(x < y for x, y in zip(vals, vals[1:]))
        assert all(v <= theoretical_dimension(m) for v in vals)

    def test_extrapolation_matches_covered_annulus(self):
        covered = synthetic_census(0, 1.0, 0.15, 500)
        truncated = synthetic_census(0, 1.0, 0.15, 150)
        a = mcmullen_lower(covered, 100.0, m=0)
        b = mcmullen_lower(truncated, 100.0, m=0)
        assert abs(a - b) < 1e-6

    def test_tan_ladder(self, tan50):
        vals = [mcmullen_lower(tan50, R, m=0)
                for R in (1e2, 1e3, 1e4, 1e5)]
        assert all(x < y for x, y in zip(vals, vals[1:]))
        assert 0.25 < vals[0] < 0.45
        assert vals[-1] >= 0.4

    def test_empty_annulus(self, tan50):
        with pytest.raises(EmptyAnnulus):
            mcmullen_lower(tan50, 0.5, m=0)

    def test_tan_annulus_census_density(self, tan50):
        count = sum(1 for rec in tan50.records if 20.0 < abs(rec.a) < 40.0)
        assert count == 14


class TestEscapeGrid:
    def test_far_window_drops_at_zero(self):
        raster = escape_grid(spec_tan(), (2.0, 3.0, 0.0, 1.0), 8, 4, 2, 50.0)
        assert all(code == 0 for row in raster.codes for code in row)

    def test_exact_pole_pixel(self, tan50):
        spec = spec_tan()
        spec.attach_census(tan50)
        a = 10.5 * math.pi
        raster = escape_grid(spec, (a - 0.01, a + 0.01, -0.01, 0.01),
                             1, 1, 2, 10.0)
        assert raster.codes[0][0] == HIT_POLE

    def test_survivors_cluster_in_branch_disks(self, tan50):
        spec = spec_tan()
        spec.attach_census(tan50)
        raster = escape_grid(spec, (30.0, 40.0, -1.0, 1.0), 200, 40, 3, 10.0)
        poles = [10.5 * math.pi, 11.5 * math.pi, 12.5 * math.pi]
        survivors = raster.survived_through(1)
        assert survivors, "no pixel survived one iterate"
        assert len(survivors) < 120
        outer = 2.0 * 1.0035 / 10.0  # radius bound 2|b|/R near these poles
        slack = raster.pixel_diagonal()
        near = dict.fromkeys(range(len(poles)), 0)
        for ix, iy in survivors:
            z = raster.pixel_center(ix, iy)
            dists = [abs(z - p) for p in poles]
            k = min(range(len(poles)), key=dists.__getitem__)
            assert dists[k] <= outer + slack
            near[k] += 1
        assert all(count > 0 for count in near.values())
        # no pixel in this window sits inside |z| <= R
        assert all(code != 0 for row in raster.codes for code in row)

    def test_beyond_evaluation_window_is_undefined(self):
        spec = spec_tan()
        raster = escape_grid(spec, (2e6, 2e6 + 1.0, 0.0, 1.0), 2, 2, 2, 10.0)
        assert all(code == UNDEFINED for row in raster.codes for code in row)


class TestBoxCount:
    def test_cantor_cover(self):
        covers = [
            tuple(Disk(complex(j, 0.0), 0.5 * 3.0 ** -level)
                  for j in range(2 ** level))
            for level in range(1, 6)
        ]
        slope = box_count(covers)
        assert abs(slope - LOG2_OVER_LOG3) < 1e-3

    def test_single_disk_every_scale(self):
        covers = [(Disk(0j, 0.5),)] * 4
        slope = box_count(covers, scales=(1.0, 0.1, 0.01, 0.001))
        assert abs(slope) < 1e-12

    def test_needs_three_scales(self):
        covers = [(Disk(0j, 0.5),)] * 2
        with pytest.raises(ValueError):
            box_count(covers, scales=(1.0, 0.1))

    def test_full_row_raster_has_dimension_one(self):
        nx, ny = 243, 81
        codes = tuple(
            tuple(STAYED if iy == 40 else 0 for _ in range(nx))
            for iy in range(ny))
        raster = EscapeRaster((0.0, 1.0, 0.0, 1.0 / 3.0), nx, ny, codes,
                              3, 10.0)
        slope = box_count(raster, scales=(1, 3, 9, 27))
        assert abs(slope - 1.0) < 1e-9

    def test_empty_raster_rejected(self):
        codes = ((0, 0), (0, 0))
        raster = EscapeRaster((0.0, 1.0, 0.0, 1.0), 2, 2, codes, 3, 10.0)
        with pytest.raises(ValueError):
            box_count(raster, scales=(1, 2, 4))

    def test_tan_depth3_cover(self, tan60):
        M = admissibility_threshold(tan60, 10.0)
        assert M == 7
        symbols = range(M, M + 30)
        covers = [cylinder_cover(tan60, 10.0, depth, symbols)
                  for depth in (1, 2, 3)]
        assert [len(c) for c in covers] == [30, 900, 27000]
        slope = box_count(covers)
        assert 0.35 < slope < 0.65

    def test_cover_disks_match_branch_scale(self, tan60):
        M = admissibility_threshold(tan60, 10.0)
        cover = cylinder_cover(tan60, 10.0, 1, [M])
        info = branch_info(tan60, M, 10.0)
        assert cover[0].radius == pytest.approx(info.outer.radius, rel=1e-12)
        assert cover[0].center == info.a


class TestReport:
    def test_synthetic_m2_report(self, syn2_big):
        rep = report(syn2_big, (1e2, 1e3, 1e4), m=2,
                     alphabet_sizes=(100, 1000))
        assert rep.m == 2
        assert rep.theoretical == pytest.approx(2.0 / 3.0)
        assert rep.bk_upper == pytest.approx(1.0)
        assert abs(rep.tail_exponent - 2.0 / 3.0) < 1e-6
        assert [size for size, _ in rep.bowen] == [100, 1000]
        roots = [root for _, root in rep.bowen]
        assert roots[0] < roots[1]
        mc = [val for _, val in rep.mcmullen]
        assert all(x < y for x, y in zip(mc, mc[1:]))
        assert rep.ordering_ok
        assert rep.errors == ()

    def test_degree_inferred_from_census(self, tan50):
        rep = report(tan50, (1e2,), alphabet_sizes=())
        assert rep.m == 0
        assert rep.theoretical == 0.5

    def test_report_survives_subestimator_failure(self):
        tiny = synthetic_census(2, 1.0, 0.15, 120)
        rep = report(tiny, (1e2,), m=2, alphabet_sizes=(10000,))
        assert rep.bowen == ()
        assert rep.errors
        assert rep.theoretical == pytest.approx(2.0 / 3.0)
