"""Meromorphic functions with polynomial Schwarzian derivative.

A function here is the data (p, M, z0): the ratio f = (a w1 + b w2) /
(c w1 + d w2) of a fundamental pair of w'' + p w = 0 anchored at z0 with
data (1,0) and (0,1), pushed through the Moebius coefficients of M.  Its
Schwarzian derivative is 2p, which `schwarzian_residual` verifies by
finite differences.

Evaluation continues the fundamental pair from the nearest previously
visited point (an anchor cache), so clustered evaluations (grids, orbits,
difference stencils, contour walks) cost short integration hops rather
than repeated marches from the basepoint.  Long hops are split into legs
with per-leg Wronskian certification.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .geometry import MoebiusMap, Polynomial, SpherePoint, zero_clearance
from .ode import PairState, continue_pair

__all__ = [
    "AccuracyBudgetExceeded",
    "StencilNearPole",
    "GridResult",
    "NevanlinnaSpec",
    "OrbitRecord",
    "SchwarzianReport",
    "InfinityScreenReport",
    "infinity_asymptotic_screen",
    "spec_airy",
    "spec_exp_like",
    "spec_lambda_tan",
    "spec_tan",
    "spec_weber",
]

_CACHE_CAP = 512
# spacing between trail anchors seeded along a long march
_ANCHOR_SPACING = 2.0
# a continuation arriving with a worse ratio-accuracy floor than this is
# re-derived from the pristine basepoint anchor instead
_REDO_FLOOR = 1e-10
# Integration error is absolute at the scale of the pair, roughly 1e-13 of
# the largest component over typical hop lengths.  A numerator or
# denominator smaller than 1e-7 of that scale therefore carries more than
# 1e-6 relative error, the strict-evaluation budget.
_SIG_FLOOR = 1e-7


class AccuracyBudgetExceeded(Exception):
    """Strict evaluation hit a region of catastrophic coefficient cancellation."""


class StencilNearPole(Exception):
    """A finite-difference stencil point landed too close to a pole."""


@dataclass(frozen=True)
class OrbitRecord:
    """Forward orbit of one point with its escape/drop classification.

    classification is one of "stayed" (all |f^k| > R through step N),
    "dropped" (|f^k| <= R first at the recorded step; step 0 means the
    start itself, which is also the verdict for the R = inf sentinel),
    "hit-pole" (f^k = infinity at the recorded step), or "undefined"
    (the orbit left the evaluable window or the accuracy budget before
    the recorded step could be completed).
    """

    start: complex
    points: tuple[SpherePoint, ...]
    classification: str
    step: int


@dataclass(frozen=True)
class SchwarzianReport:
    samples: tuple[complex, ...]
    residuals: tuple[float, ...]
    max_residual: float
    h: float


@dataclass(frozen=True)
class GridResult:
    """Row-major grid of values; None cells carry an entry in errors."""

    xs: tuple[float, ...]
    ys: tuple[float, ...]
    values: tuple[tuple[SpherePoint | None, ...], ...]
    errors: tuple[tuple[int, int, str], ...]


class NevanlinnaSpec:
    """Immutable function identity (p, M, z0) with an internal anchor cache.

    The cache only affects cost, never values beyond integrator tolerance;
    a fixed call sequence is deterministic.
    """

    def __init__(self, p: Polynomial, moebius: MoebiusMap, z0: complex = 0j,
                 ode_tol: float = 1e-12, max_eval_radius: float = 1e6):
        if p.is_zero:
            raise ValueError("coefficient polynomial must be nonzero")
        self.p = p
        self.moebius = moebius
        self.z0 = complex(z0)
        self.ode_tol = float(ode_tol)
        self.max_eval_radius = float(max_eval_radius)
        # denominator at the basepoint is c*w1 + d*w2 = c
        if abs(moebius.c) < 1e-300:
            raise ValueError("basepoint is a pole of f (denominator vanishes at z0)")
        self._p_zeros = [complex(r) for r in p.roots()]
        self._anchors: list[PairState] = [PairState(self.z0, 1 + 0j, 0j, 0j, 1 + 0j, 0.0)]
        self._census = None
        self._laurent_c0: dict[int, complex] = {}

    @property
    def m(self) -> int:
        return self.p.degree

    def attach_census(self, census) -> None:
        """Give evaluation access to pole records for near-pole shortcuts."""
        self._census = census
        self._laurent_c0.clear()

    # ------------------------------------------------------------- plumbing

    def _route(self, a: complex, b: complex) -> list[complex]:
        """Straight segment with tiny detours around the zeros of p."""
        if a == b:
            return [a]
        seg = b - a
        seg_len = abs(seg)
        detours = []
        for q in self._p_zeros:
            t = ((q - a).real * seg.real + (q - a).imag * seg.imag) / (seg_len * seg_len)
            if not 0.0 < t < 1.0:
                continue
            foot = a + t * seg
            clear = 2.0 * zero_clearance(q)
            d = abs(foot - q)
            if d >= clear:
                continue
            if d > 1e-300:
                nrm = (foot - q) / d
            else:
                nrm = 1j * seg / seg_len
            detours.append((t, q + 2.0 * clear * nrm))
        detours.sort(key=lambda item: item[0])
        return [a] + [v for _, v in detours] + [b]

    def _push_anchor(self, state: PairState) -> None:
        self._anchors.append(state)
        if len(self._anchors) > _CACHE_CAP:
            # keep the basepoint anchor alive at slot 0
            del self._anchors[1]

    def pair_at(self, z: complex) -> PairState:
        """Fundamental-pair state at z, continued from the nearest anchor.

        A march whose magnitude profile descends inherits amplified noise
        in the locally recessive direction (PairState.value_floor); when
        the nearest anchor would hand over a poor floor, the point is
        re-derived from the basepoint anchor and the better result wins.
        """
        z = complex(z)
        anchor = min(self._anchors, key=lambda s: abs(s.z - z))
        if anchor.z == z:
            return anchor
        state, trail = self._march(anchor, z)
        if state.value_floor > _REDO_FLOOR and anchor is not self._anchors[0]:
            alt, alt_trail = self._march(self._anchors[0], z)
            if alt.value_floor < state.value_floor:
                state, trail = alt, alt_trail
        last = anchor.z
        for st in trail:
            if abs(st.z - last) >= _ANCHOR_SPACING and st.z != z:
                self._push_anchor(st)
                last = st.z
        self._push_anchor(state)
        return state

    def _march(self, anchor: PairState, z: complex):
        route = self._route(anchor.z, z)
        collect: list[PairState] = []
        state = anchor
        for a, b in zip(route, route[1:]):
            state = continue_pair(self.p, state, [state.z, b], self.ode_tol,
                                  collect=collect,
                                  ref_logw=complex(-2.0 * state.log_scale))
        return state, collect

    def _ratio(self, state: PairState, strict: bool) -> SpherePoint:
        M = self.moebius
        num = M.a * state.w1 + M.b * state.w2
        den = M.c * state.w1 + M.d * state.w2
        if strict:
            if state.value_floor > 1e-6:
                raise AccuracyBudgetExceeded(
                    f"pair state at z={state.z} certifies ratios only to "
                    f"{state.value_floor:.2e} relative")
            pair_norm = max(abs(state.w1), abs(state.w2), abs(state.dw1), abs(state.dw2))
            num_scale = pair_norm * max(abs(M.a), abs(M.b))
            den_scale = pair_norm * max(abs(M.c), abs(M.d))
            for val, scale in ((num, num_scale), (den, den_scale)):
                if scale > 0 and abs(val) < _SIG_FLOOR * scale:
                    raise AccuracyBudgetExceeded(
                        f"value lost under integration noise at z={state.z}: "
                        f"significance {abs(val) / scale:.2e}"
                    )
        if abs(den) < 1e-13 * abs(num):
            return SpherePoint.infinity()
        return SpherePoint.finite(num / den)

    # ----------------------------------------------------------- evaluation

    def evaluate(self, z: complex, strict: bool = False,
                 pole_radius_hint: float | None = None) -> SpherePoint:
        """f(z) by pair continuation; infinity when the denominator vanishes.

        With a census attached and a classification radius hinted, points
        inside the Laurent zone |z - a_j| < |b_j| / (10 R) of a censused
        pole use the local model b_j/(z - a_j) + c0 instead of direct
        integration, which loses accuracy where |f| is huge.
        """
        z = complex(z)
        if pole_radius_hint is not None and self._census is not None:
            hit = self._laurent_lookup(z, pole_radius_hint)
            if hit is not None:
                return hit
        return self._ratio(self.pair_at(z), strict)

    def derivative(self, z: complex) -> complex:
        """f'(z) = -det(M) / (true denominator)^2 from the unit Wronskian."""
        st = self.pair_at(z)
        M = self.moebius
        den = M.c * st.w1 + M.d * st.w2
        if den == 0:
            return math.inf + 0j
        # quotient rule collapses to -det(M) * (w1 w2' - w2 w1'), and the
        # Wronskian of the fundamental pair is identically 1; the stored
        # denominator carries exp(log_scale)
        return -self.moebius.det * cmath.exp(-2.0 * st.log_scale) / (den * den)

    def _laurent_lookup(self, z: complex, radius_hint: float):
        census = self._census
        for j, rec in enumerate(census.records):
            zone = abs(rec.b) / (10.0 * radius_hint)
            dist = abs(z - rec.a)
            if dist >= zone or zone <= 0:
                continue
            if j not in self._laurent_c0:
                r = zone
                c0 = 0j
                for k in range(4):
                    zeta = rec.a + r * cmath.exp(1j * (2 * k + 1) * math.pi / 4)
                    val = self._ratio(self.pair_at(zeta), False)
                    if val.infinite:
                        c0 = 0j
                        break
                    c0 += (val.value - rec.b / (zeta - rec.a)) / 4.0
                self._laurent_c0[j] = c0
            if dist == 0:
                return SpherePoint.infinity()
            return SpherePoint.finite(rec.b / (z - rec.a) + self._laurent_c0[j])
        return None

    def evaluate_grid(self, window, nx: int, ny: int) -> GridResult:
        """Evaluate on a rectangle, continuing the pair along each column.

        window = (x_min, x_max, y_min, y_max); a collapsed axis with one
        node degenerates to evaluation at the point.  Failures are
        recorded per cell, never aborting the grid.
        """
        x0, x1, y0, y1 = (float(v) for v in window)
        if nx < 1 or ny < 1:
            raise ValueError("grid needs nx, ny >= 1")
        xs = [x0 + (x1 - x0) * (i / (nx - 1)) if nx > 1 else 0.5 * (x0 + x1)
              for i in range(nx)]
        ys = [y0 + (y1 - y0) * (i / (ny - 1)) if ny > 1 else 0.5 * (y0 + y1)
              for i in range(ny)]
        cols: list[list[SpherePoint | None]] = []
        errors: list[tuple[int, int, str]] = []
        for ix, x in enumerate(xs):
            col: list[SpherePoint | None] = []
            state = None
            for iy, y in enumerate(ys):
                z = complex(x, y)
                try:
                    if state is None:
                        state = self.pair_at(z)
                    else:
                        state = continue_pair(
                            self.p, state, [state.z, z], self.ode_tol,
                            ref_logw=complex(-2.0 * state.log_scale))
                        if state.value_floor > _REDO_FLOOR:
                            # column walked downhill through a mode flip;
                            # re-derive and let fresh anchors take over
                            state = self.pair_at(z)
                    col.append(self._ratio(state, False))
                except Exception as exc:  # per-cell flag, keep going
                    errors.append((ix, iy, f"{type(exc).__name__}: {exc}"))
                    col.append(None)
                    state = None
            cols.append(col)
        rows = tuple(tuple(cols[ix][iy] for ix in range(nx)) for iy in range(ny))
        return GridResult(tuple(xs), tuple(ys), rows, tuple(errors))

    # ----------------------------------------------------- Schwarzian check

    def _stencil_values(self, z: complex, offsets, h: float):
        base = self.pair_at(z)
        vals = {}
        for off in offsets:
            zeta = z + off
            st = base if off == 0 else continue_pair(
                self.p, base, [base.z, zeta], self.ode_tol,
                ref_logw=complex(-2.0 * base.log_scale))
            pt = self._ratio(st, False)
            if pt.infinite or abs(pt.value) > 1.0 / h:
                raise StencilNearPole(f"stencil point {zeta} has |f| > 1/h")
            vals[off] = pt.value
        return vals

    def _schwarzian_once(self, z: complex, h: float) -> complex:
        centers = (0j, h + 0j, -h + 0j, 1j * h, -1j * h)
        offsets = set()
        for c in centers:
            for k in (-2, -1, 0, 1, 2):
                offsets.add(c + k * h)
        vals = self._stencil_values(z, sorted(offsets, key=lambda o: (o.real, o.imag)), h)

        def q_at(c: complex) -> complex:
            fm2, fm1, f0, fp1, fp2 = (vals[c + k * h] for k in (-2, -1, 0, 1, 2))
            d1 = (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h)
            d2 = (16.0 * (fp1 + fm1) - (fp2 + fm2) - 30.0 * f0) / (12.0 * h * h)
            if d1 == 0:
                raise StencilNearPole(f"critical point of f in stencil at {z + c}")
            return d2 / d1

        q0 = q_at(0j)
        # opposite-sign h^2 truncation in the real and imaginary directions
        qr = (q_at(h + 0j) - q_at(-h + 0j)) / (2.0 * h)
        qi = (q_at(1j * h) - q_at(-1j * h)) / (2j * h)
        return 0.5 * (qr + qi) - 0.5 * q0 * q0

    def schwarzian_residual(self, samples, h: float) -> SchwarzianReport:
        """max |S_f - 2p| over samples, S_f by nested central differences.

        Each sample is computed at steps h and h/2 and Richardson-combined;
        both underlying estimates are O(h^4) after direction averaging.
        """
        if h <= 0:
            raise ValueError("finite-difference step must be positive")
        zs = [complex(z) for z in samples]
        residuals = []
        for z in zs:
            s_h = self._schwarzian_once(z, h)
            s_h2 = self._schwarzian_once(z, h / 2)
            s_best = (16.0 * s_h2 - s_h) / 15.0
            residuals.append(abs(s_best - 2.0 * self.p(z)))
        return SchwarzianReport(tuple(zs), tuple(residuals), max(residuals), h)

    # --------------------------------------------------------------- orbits

    def iterate(self, z: complex, n_steps: int, radius: float) -> OrbitRecord:
        """Forward orbit classification against the modulus threshold R.

        See OrbitRecord for the classification vocabulary.  The R = inf
        sentinel drops every finite start at step 0.
        """
        if n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        if radius <= 0:
            raise ValueError("radius must be positive")
        start = complex(z)
        if not abs(start) > radius:
            return OrbitRecord(start, (), "dropped", 0)
        pts: list[SpherePoint] = []
        cur = start
        for k in range(1, n_steps + 1):
            if abs(cur) > self.max_eval_radius:
                return OrbitRecord(start, tuple(pts), "undefined", k)
            pole = self._pole_underfoot(cur)
            if pole is not None and abs(cur - pole) <= 1e-9 * (1.0 + abs(pole)):
                pts.append(SpherePoint.infinity())
                return OrbitRecord(start, tuple(pts), "hit-pole", k)
            try:
                val = self.evaluate(cur, strict=True, pole_radius_hint=radius)
            except AccuracyBudgetExceeded:
                # a plain evaluation may still prove an exact pole hit
                val = self.evaluate(cur, pole_radius_hint=radius)
                if val.infinite:
                    pts.append(val)
                    return OrbitRecord(start, tuple(pts), "hit-pole", k)
                return OrbitRecord(start, tuple(pts), "undefined", k)
            if val.infinite:
                pts.append(val)
                return OrbitRecord(start, tuple(pts), "hit-pole", k)
            pts.append(val)
            if not abs(val.value) > radius:
                return OrbitRecord(start, tuple(pts), "dropped", k)
            cur = val.value
        return OrbitRecord(start, tuple(pts), "stayed", n_steps)

    def _pole_underfoot(self, z: complex):
        if self._census is None:
            return None
        best = None
        best_d = math.inf
        for rec in self._census.records:
            d = abs(z - rec.a)
            if d < best_d:
                best, best_d = rec.a, d
        return best


# ------------------------------------------------------------ infinity screen


@dataclass(frozen=True)
class ScreenEntry:
    index: int
    pole: complex
    boundary_ok: bool
    max_boundary_modulus: float
    winding: int


@dataclass(frozen=True)
class InfinityScreenReport:
    """Evidence (not proof) about "infinity is not an asymptotic value".

    status: "pass" when every censused pole sits in a bounded preimage
    component with a simple pole; "violations" when some check failed;
    "no-poles-found" when a genuine search produced nothing (evidence that
    infinity may be an asymptotic value); "inconclusive" when the input
    cannot support any verdict.
    """

    status: str
    entries: tuple[ScreenEntry, ...]
    notes: tuple[str, ...]


def infinity_asymptotic_screen(spec: NevanlinnaSpec, radius: float, census) -> InfinityScreenReport:
    """Boundary and winding checks of the pole components at threshold R.

    ``census`` is either a census result object (``.records`` attribute) or
    a bare sequence of records; records expose ``.a`` and ``.b``.
    """
    records = list(getattr(census, "records", census))
    if not records:
        searched = float(getattr(census, "search_radius", 0.0))
        if radius >= 1e6 or searched <= 2.0 * (1.0 + abs(spec.z0)):
            return InfinityScreenReport(
                "inconclusive", (),
                ("empty census cannot be screened at this threshold",))
        return InfinityScreenReport(
            "no-poles-found", (),
            (f"no poles found to radius {searched:g}; a function of this kind "
             f"with infinity not asymptotic would show poles along every "
             f"critical ray",))

    entries = []
    notes = []
    all_ok = True
    for j, rec in enumerate(records):
        neighbor = min((abs(rec.a - other.a) for i, other in enumerate(records)
                        if i != j), default=math.inf)
        r_out = 2.0 * abs(rec.b) / radius
        if r_out >= 0.5 * neighbor:
            r_out = 0.4 * neighbor
            notes.append(f"pole {j}: outer disk clipped to neighbor gap")
        max_mod = 0.0
        ok = True
        for k in range(16):
            zeta = rec.a + r_out * cmath.exp(2j * math.pi * k / 16)
            val = spec.evaluate(zeta)
            mod = math.inf if val.infinite else abs(val.value)
            max_mod = max(max_mod, mod)
            if not mod <= 1.25 * radius:
                ok = False
        r_w = min(0.5 * r_out, 0.35 * neighbor)
        winding = _winding_of_reciprocal(spec, rec.a, r_w)
        if winding != 1:
            ok = False
            notes.append(f"pole {j}: winding of 1/f is {winding}, not simple")
        entries.append(ScreenEntry(j, rec.a, ok, max_mod, winding))
        all_ok = all_ok and ok
    return InfinityScreenReport("pass" if all_ok else "violations",
                                tuple(entries), tuple(notes))


def _winding_of_reciprocal(spec: NevanlinnaSpec, center: complex, r: float,
                           n: int = 64) -> int:
    total = 0.0
    prev = None
    for k in range(n + 1):
        zeta = center + r * cmath.exp(2j * math.pi * k / n)
        val = spec.evaluate(zeta)
        if val.infinite or val.value == 0:
            return -999
        ang = cmath.phase(1.0 / val.value)
        if prev is not None:
            d = ang - prev
            while d > math.pi:
                d -= 2.0 * math.pi
            while d < -math.pi:
                d += 2.0 * math.pi
            total += d
        prev = ang
    return round(total / (2.0 * math.pi))


# ------------------------------------------------------------- shipped specs


def spec_tan() -> NevanlinnaSpec:
    """f = tan: p = 1, pair (cos, sin) at 0, reciprocal-free Moebius (0,1,1,0)."""
    return NevanlinnaSpec(Polynomial((1,)), MoebiusMap(0, 1, 1, 0), 0)


def spec_lambda_tan(lam: complex) -> NevanlinnaSpec:
    """f = lambda tan, the one-parameter family over the tangent."""
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    return NevanlinnaSpec(Polynomial((1,)), MoebiusMap(0, lam, 1, 0), 0)


def spec_airy() -> NevanlinnaSpec:
    """Ratio of solutions of w'' + z w = 0 (degree 1, order 3/2)."""
    return NevanlinnaSpec(Polynomial((0, 1)), MoebiusMap(1, 0, 1, 1), 0)


def spec_weber() -> NevanlinnaSpec:
    """Ratio of solutions of w'' + z^2 w = 0 (degree 2, order 2)."""
    return NevanlinnaSpec(Polynomial((0, 0, 1)), MoebiusMap(1, 0, 1, 1), 0)


def spec_exp_like() -> NevanlinnaSpec:
    """f = e^z realized as a pair ratio for p = -1/4; no poles at all."""
    return NevanlinnaSpec(Polynomial((-0.25,)), MoebiusMap(1, 0.5, 1, -0.5), 0)
