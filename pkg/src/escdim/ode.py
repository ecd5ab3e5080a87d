"""Adaptive integration of w'' + p(z) w = 0 along complex polylines.

The integrator is an embedded Dormand-Prince 5(4) pair specialized to the
first-order system (w, w')' = (w', -p w), advancing a fundamental pair of
solutions together so the Wronskian can be monitored at every accepted step.
Error is controlled per unit of path length.  Solution frames are rescaled
when components grow past 1e100 (the true values carry an exp(log_scale)
factor), which keeps deep-sector integrations finite where solutions grow
like exp(|Z|).

Also here: the Liouville coordinate Z = int p^(1/2), the forcing term F of
the transformed equation W'' + (1 + F) W = 0, critical-ray enumeration, and
the asymptotic-form check W ~ A e^(iZ) + B e^(-iZ) with residual decay
fitting.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    Polynomial,
    poly_derivatives,
    sqrt_branch_along_path,
    zero_clearance,
)


class StepUnderflow(Exception):
    """Adaptive step fell below 1e-14 of the total path length."""


class WronskianDrift(Exception):
    """Relative Wronskian drift of a fundamental pair exceeded 1e-8."""


class DivisionNearZero(Exception):
    """An expression with p(z) in a denominator was evaluated too close to a zero."""


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5, _C6 = 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_A71, _A73, _A74, _A75, _A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

_RESCALE_AT = 1e100
_DRIFT_LIMIT = 1e-8
_UNDERFLOW_FRACTION = 1e-14


@dataclass(frozen=True)
class ODEState:
    """A single solution sample: position, value, derivative."""

    z: complex
    w: complex
    dw: complex


@dataclass(frozen=True)
class PairState:
    """Joint sample of a fundamental pair.

    True solution values are the stored components times exp(log_scale);
    the factor is shared by both solutions, so any Moebius combination of
    the pair is scale-free.

    noise_floor is the worst relative cancellation noise the determinant
    of this pair has been exposed to anywhere along its history.  Drift
    below that floor is unmeasurable in fixed precision, and the floor
    never goes back down: passing through a regime dominated by one
    exponential direction destroys determinant digits permanently even
    though the component values themselves stay accurate.

    value_floor bounds the relative error of Moebius ratios formed from
    this state.  Whenever the magnitude profile of the pair descends by D
    from an earlier peak, the coefficient of the locally recessive
    solution direction inherits roundoff amplified by exp(2D), so states
    downhill of a peak cannot certify ratios better than this floor.
    """

    z: complex
    w1: complex
    dw1: complex
    w2: complex
    dw2: complex
    log_scale: float = 0.0
    noise_floor: float = 0.0
    value_floor: float = 1e-13

    @property
    def wronskian(self) -> complex:
        return self.w1 * self.dw2 - self.w2 * self.dw1


@dataclass(frozen=True)
class FundamentalPair:
    """Evolution of the canonical pair with data (1,0) and (0,1) at the basepoint."""

    basepoint: complex
    states: tuple[PairState, ...]
    wronskian0: complex
    max_drift: float

    @property
    def final(self) -> PairState:
        return self.states[-1]


def _drive_pair(p, path, start: PairState, tol: float, ref_logw: complex,
                collect: list | None):
    """Advance a pair state along a polyline with DP45 and drift monitoring.

    Returns (final_state, max_drift).  Appends every accepted state to
    ``collect`` when given (the start state is the caller's business).
    """
    verts = [complex(v) for v in path]
    total_len = sum(abs(b - a) for a, b in zip(verts, verts[1:]))
    if total_len == 0:
        return start, 0.0
    h_min = _UNDERFLOW_FRACTION * total_len
    pcall = p.__call__

    w1, d1, w2, d2 = start.w1, start.dw1, start.w2, start.dw2
    ls = start.log_scale
    ref = ref_logw
    max_drift = 0.0
    # determinant information destroyed by cancellation anywhere along the
    # pair's history is never recovered later, so the certification floor
    # is the worst noise level seen, carried in from the start state
    big0 = abs(w1) * abs(d2) + abs(w2) * abs(d1)
    noise_floor = start.noise_floor
    if big0 > 0:
        entry = math.exp(min(700.0, math.log(big0) - ref.real)) * 1e-14
        if entry > noise_floor:
            noise_floor = entry
    # ratio accuracy degrades by exp(2 * descent) whenever the magnitude
    # profile comes down off a peak (see PairState.value_floor)
    pn0 = max(abs(w1), abs(w2), abs(d1), abs(d2))
    level_peak = ls + (math.log(pn0) if pn0 > 0 else 0.0)
    descent = 0.0
    value_floor = max(1e-13, start.value_floor)
    h = None

    for a, b in zip(verts, verts[1:]):
        seg = b - a
        seg_len = abs(seg)
        if seg_len == 0:
            continue
        u = seg / seg_len
        t = 0.0
        if h is None:
            h = min(seg_len, 0.1 / max(1.0, abs(pcall(a)) ** 0.5))
        # stage 1 (FSAL carrier)
        z = a
        pv = pcall(z)
        k1 = (u * d1, -u * pv * w1, u * d2, -u * pv * w2)
        while True:
            remaining = seg_len - t
            if remaining <= 1e-12 * seg_len:
                break
            last = h >= remaining
            if last:
                h = remaining
            if h < h_min:
                raise StepUnderflow(
                    f"step {h:.3e} below {_UNDERFLOW_FRACTION:g} of path length near z={z}"
                )
            while True:
                z2 = z + u * (_C2 * h)
                pv = pcall(z2)
                y0 = w1 + h * _A21 * k1[0]
                y1 = d1 + h * _A21 * k1[1]
                y2 = w2 + h * _A21 * k1[2]
                y3 = d2 + h * _A21 * k1[3]
                k2 = (u * y1, -u * pv * y0, u * y3, -u * pv * y2)

                z3 = z + u * (_C3 * h)
                pv = pcall(z3)
                y0 = w1 + h * (_A31 * k1[0] + _A32 * k2[0])
                y1 = d1 + h * (_A31 * k1[1] + _A32 * k2[1])
                y2 = w2 + h * (_A31 * k1[2] + _A32 * k2[2])
                y3 = d2 + h * (_A31 * k1[3] + _A32 * k2[3])
                k3 = (u * y1, -u * pv * y0, u * y3, -u * pv * y2)

                z4 = z + u * (_C4 * h)
                pv = pcall(z4)
                y0 = w1 + h * (_A41 * k1[0] + _A42 * k2[0] + _A43 * k3[0])
                y1 = d1 + h * (_A41 * k1[1] + _A42 * k2[1] + _A43 * k3[1])
                y2 = w2 + h * (_A41 * k1[2] + _A42 * k2[2] + _A43 * k3[2])
                y3 = d2 + h * (_A41 * k1[3] + _A42 * k2[3] + _A43 * k3[3])
                k4 = (u * y1, -u * pv * y0, u * y3, -u * pv * y2)

                z5 = z + u * (_C5 * h)
                pv = pcall(z5)
                y0 = w1 + h * (_A51 * k1[0] + _A52 * k2[0] + _A53 * k3[0] + _A54 * k4[0])
                y1 = d1 + h * (_A51 * k1[1] + _A52 * k2[1] + _A53 * k3[1] + _A54 * k4[1])
                y2 = w2 + h * (_A51 * k1[2] + _A52 * k2[2] + _A53 * k3[2] + _A54 * k4[2])
                y3 = d2 + h * (_A51 * k1[3] + _A52 * k2[3] + _A53 * k3[3] + _A54 * k4[3])
                k5 = (u * y1, -u * pv * y0, u * y3, -u * pv * y2)

                z6 = z + u * h
                pv = pcall(z6)
                y0 = w1 + h * (_A61 * k1[0] + _A62 * k2[0] + _A63 * k3[0] + _A64 * k4[0] + _A65 * k5[0])
                y1 = d1 + h * (_A61 * k1[1] + _A62 * k2[1] + _A63 * k3[1] + _A64 * k4[1] + _A65 * k5[1])
                y2 = w2 + h * (_A61 * k1[2] + _A62 * k2[2] + _A63 * k3[2] + _A64 * k4[2] + _A65 * k5[2])
                y3 = d2 + h * (_A61 * k1[3] + _A62 * k2[3] + _A63 * k3[3] + _A64 * k4[3] + _A65 * k5[3])
                k6 = (u * y1, -u * pv * y0, u * y3, -u * pv * y2)

                # 5th-order solution (b row equals the a7 row; FSAL)
                n0 = w1 + h * (_A71 * k1[0] + _A73 * k3[0] + _A74 * k4[0] + _A75 * k5[0] + _A76 * k6[0])
                n1 = d1 + h * (_A71 * k1[1] + _A73 * k3[1] + _A74 * k4[1] + _A75 * k5[1] + _A76 * k6[1])
                n2 = w2 + h * (_A71 * k1[2] + _A73 * k3[2] + _A74 * k4[2] + _A75 * k5[2] + _A76 * k6[2])
                n3 = d2 + h * (_A71 * k1[3] + _A73 * k3[3] + _A74 * k4[3] + _A75 * k5[3] + _A76 * k6[3])
                k7 = (u * n1, -u * pv * n0, u * n3, -u * pv * n2)

                e0 = h * (_E1 * k1[0] + _E3 * k3[0] + _E4 * k4[0] + _E5 * k5[0] + _E6 * k6[0] + _E7 * k7[0])
                e1 = h * (_E1 * k1[1] + _E3 * k3[1] + _E4 * k4[1] + _E5 * k5[1] + _E6 * k6[1] + _E7 * k7[1])
                e2 = h * (_E1 * k1[2] + _E3 * k3[2] + _E4 * k4[2] + _E5 * k5[2] + _E6 * k6[2] + _E7 * k7[2])
                e3 = h * (_E1 * k1[3] + _E3 * k3[3] + _E4 * k4[3] + _E5 * k5[3] + _E6 * k6[3] + _E7 * k7[3])

                err = 0.0
                for e, y_old, y_new in ((e0, w1, n0), (e1, d1, n1), (e2, w2, n2), (e3, d2, n3)):
                    sc = max(1.0, abs(y_old), abs(y_new))
                    r = abs(e) / sc
                    if r > err:
                        err = r

                bound = tol * h
                if err <= bound:
                    break
                h *= min(0.9, max(0.2, 0.9 * (bound / err) ** 0.2))
                last = False
                if h < h_min:
                    raise StepUnderflow(
                        f"step {h:.3e} below {_UNDERFLOW_FRACTION:g} of path length near z={z}"
                    )

            t += h
            z = b if last else a + u * t
            w1, d1, w2, d2 = n0, n1, n2, n3
            k1 = k7

            m = max(abs(w1), abs(d1), abs(w2), abs(d2))
            if m > _RESCALE_AT:
                inv = 1.0 / m
                w1 *= inv
                d1 *= inv
                w2 *= inv
                d2 *= inv
                k1 = (k1[0] * inv, k1[1] * inv, k1[2] * inv, k1[3] * inv)
                lm = math.log(m)
                ls += lm
                ref -= 2.0 * lm

            # Drift is certified only up to the cancellation floor of the
            # Wronskian formula itself: when the pair is dominated by one
            # growing solution, |w1 d2| + |w2 d1| dwarfs their difference
            # and roundoff of that size is unavoidable in fixed precision.
            big = abs(w1) * abs(d2) + abs(w2) * abs(d1)
            if big == 0.0:
                raise WronskianDrift(f"fundamental pair collapsed at z={z}")
            noise_rel = math.exp(min(700.0, math.log(big) - ref.real)) * 1e-14
            if noise_rel > noise_floor:
                noise_floor = noise_rel
            pn = max(abs(w1), abs(w2), abs(d1), abs(d2))
            level = ls + math.log(pn)
            if level > level_peak:
                level_peak = level
            elif level_peak - level > descent:
                descent = level_peak - level
            wr = w1 * d2 - w2 * d1
            # wr rounding to exactly zero is a cancellation artifact, not a
            # collapsed pair; score it as 100% deviation so the noise
            # allowance can still excuse it in the deep-growth regime
            drift = (1.0 if wr == 0
                     else abs(cmath.exp(cmath.log(wr) - ref) - 1.0))
            if drift > max(_DRIFT_LIMIT, noise_floor):
                raise WronskianDrift(f"relative Wronskian drift {drift:.3e} at z={z}")
            if noise_floor <= _DRIFT_LIMIT and drift > max_drift:
                max_drift = drift

            if collect is not None:
                fl = value_floor * math.exp(min(700.0, 2.0 * descent))
                collect.append(
                    PairState(z, w1, d1, w2, d2, ls, noise_floor, fl))

            if err > 0.0:
                h *= min(5.0, max(0.2, 0.9 * (bound / err) ** 0.2))
            else:
                h *= 5.0

    return PairState(verts[-1], w1, d1, w2, d2, ls, noise_floor,
                     value_floor * math.exp(min(700.0, 2.0 * descent))), max_drift


def fundamental_pair(p: Polynomial, z0: complex, path, tol: float) -> FundamentalPair:
    """Co-integrate the canonical pair with data (1,0) and (0,1) from z0.

    The path must start at z0.  The Wronskian equals 1 at the basepoint by
    construction and is checked against 1 at every accepted step.
    """
    _check_p(p)
    if tol <= 0:
        raise ValueError("tol must be positive")
    verts = [complex(v) for v in path]
    if not verts or abs(verts[0] - complex(z0)) > 1e-12 * (1 + abs(z0)):
        raise ValueError("path must start at the basepoint")
    start = PairState(complex(z0), 1.0 + 0j, 0j, 0j, 1.0 + 0j, 0.0)
    collect: list[PairState] = [start]
    final, max_drift = _drive_pair(p, verts, start, tol, 0j, collect)
    return FundamentalPair(complex(z0), tuple(collect), 1.0 + 0j, max_drift)


def continue_pair(p: Polynomial, state: PairState, path, tol: float,
                  collect: list | None = None,
                  ref_logw: complex | None = None) -> PairState:
    """Advance an existing pair state along a polyline starting at state.z.

    ref_logw, when given, is the log of the stored-frame Wronskian the
    drift monitor certifies against.  Callers who know the pair's true
    Wronskian analytically should pass it: the stored determinant loses
    all digits once the pair is dominated by one exponential direction,
    so a measured reference can be pure rounding noise there.
    """
    verts = [complex(v) for v in path]
    if not verts or abs(verts[0] - state.z) > 1e-9 * (1 + abs(state.z)):
        raise ValueError("path must start at the current state position")
    if ref_logw is None:
        wr = state.wronskian
        if wr == 0:
            raise WronskianDrift("cannot continue a degenerate pair state")
        ref_logw = cmath.log(wr)
    final, _ = _drive_pair(p, verts, state, tol, ref_logw, collect)
    return final


def integrate(p: Polynomial, path, init: ODEState, tol: float) -> list[ODEState]:
    """Integrate one solution with the given initial data along a polyline.

    Internally advances the canonical fundamental pair and forms the linear
    combination init.w * w1 + init.dw * w2, which solves the equation with
    exactly the requested data.
    """
    verts = [complex(v) for v in path]
    if not verts:
        raise ValueError("empty path")
    if abs(verts[0] - init.z) > 1e-12 * (1 + abs(init.z)):
        raise ValueError("path must start at the initial state position")
    fp = fundamental_pair(p, init.z, verts, tol)
    al, be = init.w, init.dw
    out = []
    for s in fp.states:
        try:
            scale = math.exp(s.log_scale)
        except OverflowError:
            scale = math.inf
        out.append(ODEState(s.z, scale * (al * s.w1 + be * s.w2),
                            scale * (al * s.dw1 + be * s.dw2)))
    return out


def _check_p(p: Polynomial):
    if p.is_zero:
        raise ValueError("coefficient polynomial must be nonzero")


# ---------------------------------------------------------------- geometry of rays


def critical_rays(p: Polynomial) -> list[float]:
    """The m+2 directions where arg(a_m) + (m+2) theta = 0 (mod 2 pi), sorted."""
    _check_p(p)
    m = p.degree
    base = -cmath.phase(p.leading) / (m + 2)
    rays = []
    for k in range(m + 2):
        th = (base + 2.0 * math.pi * k / (m + 2)) % (2.0 * math.pi)
        if 2.0 * math.pi - th < 1e-12:
            th = 0.0
        rays.append(th)
    return sorted(rays)


# ------------------------------------------------------------- Liouville frame


def _branch_at_nodes(p, nodes, seed):
    """Track sqrt(p) through an ordered node list, returning one value per node."""
    samples = sqrt_branch_along_path(p, nodes, seed)
    vals = []
    it = iter(samples)
    for target in nodes:
        for z, v in it:
            if z == target:
                vals.append(v)
                break
        else:
            raise RuntimeError("branch tracking skipped a requested node")
    return vals


def liouville_Z(p: Polynomial, path, seed: complex) -> complex:
    """Branch-tracked int p(s)^(1/2) ds along a polyline.

    Composite Gauss-Legendre per segment, node count doubled until two
    refinement levels agree to 1e-12 relative.
    """
    _check_p(p)
    verts = [complex(v) for v in path]
    if len(verts) < 2:
        raise ValueError("path needs at least two vertices")
    vert_vals = _branch_at_nodes(p, verts, seed)
    total = 0j
    for (a, b), sa in zip(zip(verts, verts[1:]), vert_vals):
        if a == b:
            continue
        prev = None
        n = 16
        while True:
            x, wts = np.polynomial.legendre.leggauss(n)
            ts = 0.5 * (x + 1.0)
            nodes = [a] + [a + t * (b - a) for t in ts] + [b]
            vals = _branch_at_nodes(p, nodes, sa)[1:-1]
            seg = (b - a) * 0.5 * sum(w * v for w, v in zip(wts, vals))
            if prev is not None and abs(seg - prev) <= 1e-12 * (1.0 + abs(seg)):
                break
            if n >= 1024:
                break
            prev = seg
            n *= 2
        total += seg
    return total


def liouville_F(p: Polynomial, z: complex) -> complex:
    """F = p''/(4 p^2) - 5 p'^2/(16 p^3), the forcing of the transformed equation."""
    _check_p(p)
    pz = p(z)
    if abs(pz) < zero_clearance(z):
        raise DivisionNearZero(f"|p({z})| = {abs(pz):.3e} inside zero clearance")
    d1, d2 = poly_derivatives(p)
    return d2(z) / (4.0 * pz * pz) - 5.0 * d1(z) ** 2 / (16.0 * pz**3)


# ------------------------------------------------------------- sector asymptotics


@dataclass(frozen=True)
class SectorSpec:
    """Sector |arg z - theta0| < half_width, |z| > inner_radius.

    half_width = 2 pi/(m+2) - margin for the degree m in play; the margin
    keeps the sector strictly inside the maximal one.
    """

    theta0: float
    half_width: float
    inner_radius: float
    margin: float

    def __post_init__(self):
        if not (self.margin > 0 and self.half_width > 0):
            raise ValueError("sector margin and half_width must be positive")
        if self.inner_radius <= 0:
            raise ValueError("sector inner radius must be positive")


def make_sector(p: Polynomial, theta0: float, inner_radius: float,
                margin: float | None = None) -> SectorSpec:
    """Sector around a direction with the default margin 0.1 * (2 pi/(m+2))."""
    _check_p(p)
    full = 2.0 * math.pi / (p.degree + 2)
    if margin is None:
        margin = 0.1 * full
    if not 0 < margin < full:
        raise ValueError("margin must lie in (0, 2 pi/(m+2))")
    return SectorSpec(float(theta0), full - margin, float(inner_radius), float(margin))


@dataclass(frozen=True)
class AsymptoticReport:
    """Residuals of the two-exponential asymptotic form along a radius ladder."""

    radii: tuple[float, ...]
    z_mags: tuple[float, ...]
    eps: tuple[float, ...]
    decay_exponent: float | None
    k_bound: float


def _log_or_none(v: complex):
    return None if v == 0 else cmath.log(v)


def asymptotic_check(p: Polynomial, sector: SectorSpec, ladder) -> AsymptoticReport:
    """Integrate along the sector bisector and fit W ~ A e^(iZ) + B e^(-iZ).

    The fit is exact at the outermost ladder radius (two conditions, W and
    dW/dZ, for the two coefficients); eps at each other radius is the
    relative mismatch of the frozen fit, and the decay exponent is the
    slope of log eps against log |Z| over the non-fit points.
    """
    _check_p(p)
    radii = sorted(float(r) for r in ladder)
    if len(radii) < 2:
        raise ValueError("ladder needs at least two radii")
    if radii[0] < sector.inner_radius:
        raise ValueError("ladder radii must be at least the sector inner radius")
    u = cmath.exp(1j * sector.theta0)
    z_start = sector.inner_radius * u

    tol = 1e-12
    verts = [z_start] + [r * u for r in radii]
    fp = fundamental_pair(p, z_start, verts, tol)
    by_vert = {}
    for s in fp.states:
        by_vert[s.z] = s

    s0 = cmath.sqrt(p(z_start))
    branch = _branch_at_nodes(p, verts, s0)

    # accumulated Z and quarter-power branch at the ladder vertices
    d1p, _ = poly_derivatives(p)
    Z = 0j
    q = cmath.sqrt(s0)
    rows = []  # (r, Z, W_log_parts...) per ladder vertex
    for k, r in enumerate(radii):
        a, b = verts[k], verts[k + 1]
        Z += liouville_Z(p, [a, b], branch[k])
        s = branch[k + 1]
        cand = cmath.sqrt(s)
        q = cand if abs(cand - q) <= abs(-cand - q) else -cand
        st = by_vert[b]
        # any fixed combination works; use the first solution of the pair
        w, dw = st.w1, st.dw1
        W = q * w
        dWdZ = d1p(b) * w / (4.0 * s * s * q) + dw / q
        rows.append((r, Z, W, dWdZ, st.log_scale))

    r_R, Z_R, W_R, dW_R, ls_R = rows[-1]
    P = 0.5 * (W_R - 1j * dW_R)  # A e^{iZ_R} up to the shared scale
    Q = 0.5 * (W_R + 1j * dW_R)  # B e^{-iZ_R}
    # A one-point solve cannot separate a subdominant exponential from the
    # dominant one's slowly-varying correction: the recovered coefficient is
    # contaminated at scale |other| * |F|.  Anything at or below that scale
    # (or the roundoff floor) is unidentifiable and must not be extrapolated,
    # since e^{2 Im Z} would amplify the contamination inward.
    f_mag = abs(liouville_F(p, r_R * u))
    floor = 1e-12 * (abs(W_R) + abs(dW_R))
    drop_p = abs(P) <= max(floor, 10.0 * abs(Q) * f_mag)
    drop_q = abs(Q) <= max(floor, 10.0 * abs(P) * f_mag)
    if drop_p and drop_q:
        drop_p = abs(P) < abs(Q)
        drop_q = not drop_p
    logP = _log_or_none(0j if drop_p else P)
    logQ = _log_or_none(0j if drop_q else Q)

    eps = []
    z_mags = []
    for r, Zr, Wr, dWr, ls in rows:
        dZ = Zr - Z_R
        L1 = None if logP is None else logP + ls_R + 1j * dZ
        L2 = None if logQ is None else logQ + ls_R - 1j * dZ
        re1 = -math.inf if L1 is None else L1.real
        re2 = -math.inf if L2 is None else L2.real
        if Wr == 0:
            wlog_re = -math.inf
        else:
            wlog_re = cmath.log(Wr).real + ls
        M = max(re1, re2, wlog_re)
        if M == -math.inf:
            eps.append(0.0)
            z_mags.append(abs(Zr))
            continue
        t1 = cmath.exp(L1 - M) if L1 is not None else 0j
        t2 = cmath.exp(L2 - M) if L2 is not None else 0j
        wv = cmath.exp(cmath.log(Wr) + ls - M) if Wr != 0 else 0j
        denom = abs(t1) + abs(t2)
        if denom == 0:
            eps.append(abs(wv))
        else:
            eps.append(abs(wv - t1 - t2) / denom)
        z_mags.append(abs(Zr))

    k_bound = 0.0
    for r, Zr, *_ in rows:
        if abs(Zr) > 0:
            k_bound = max(k_bound, abs(liouville_F(p, r * u)) * abs(Zr) ** 2)

    decay = None
    if max(eps) >= 1e-11:
        xs, ys = [], []
        for e, zm in zip(eps[:-1], z_mags[:-1]):
            if e > 0 and zm > 0:
                xs.append(math.log(zm))
                ys.append(math.log(e))
        if len(xs) >= 2:
            n = len(xs)
            mx = sum(xs) / n
            my = sum(ys) / n
            sxx = sum((x - mx) ** 2 for x in xs)
            if sxx > 0:
                decay = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx

    return AsymptoticReport(tuple(radii), tuple(z_mags), tuple(eps), decay, k_bound)


# ------------------------------------------------------------------ defect probe


def defect_samples(p: Polynomial, states, n_sub: int = 8):
    """|w'' + p w| sampled between accepted states via quintic Hermite pieces.

    Each piece matches value, first, and second derivative (the latter from
    the equation itself) at both endpoints, so the defect measures genuine
    mid-step solution quality with no finite-difference noise.
    """
    out = []
    for s0, s1 in zip(states, states[1:]):
        hc = s1.z - s0.z
        if hc == 0:
            continue
        f0, f1 = s0.w, s1.w
        d0, d1 = s0.dw * hc, s1.dw * hc
        a0, a1 = -p(s0.z) * s0.w * hc * hc, -p(s1.z) * s1.w * hc * hc
        for j in range(1, n_sub):
            t = j / n_sub
            t2, t3, t4, t5 = t * t, t**3, t**4, t**5
            H = (f0 * (1 - 10 * t3 + 15 * t4 - 6 * t5)
                 + d0 * (t - 6 * t3 + 8 * t4 - 3 * t5)
                 + a0 * (0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5)
                 + f1 * (10 * t3 - 15 * t4 + 6 * t5)
                 + d1 * (-4 * t3 + 7 * t4 - 3 * t5)
                 + a1 * (0.5 * t3 - t4 + 0.5 * t5))
            H2 = (f0 * (-60 * t + 180 * t2 - 120 * t3)
                  + d0 * (-36 * t + 96 * t2 - 60 * t3)
                  + a0 * (1 - 9 * t + 18 * t2 - 10 * t3)
                  + f1 * (60 * t - 180 * t2 + 120 * t3)
                  + d1 * (-24 * t + 84 * t2 - 60 * t3)
                  + a1 * (3 * t - 12 * t2 + 10 * t3))
            z = s0.z + t * hc
            out.append((z, abs(H2 / (hc * hc) + p(z) * H)))
    return out
