"""Dimension estimates for the escaping set: three estimators plus checks.

The covering-sum side fits the per-symbol contraction ratios
tau_j = |b_j| / |a_j|^2 on the admissible tail; the series sum(tau_j^t)
switches between divergence and convergence at t* = 1/beta, the
critical exponent of the fitted decay tau_j ~ K j^{-beta}.  The
finite-alphabet Bowen root solves sum((kappa tau_j)^t) = 1 and climbs
toward that exponent as the alphabet grows.  The McMullen lower bound
measures a branch-disk density and a per-symbol diameter factor in an
annulus and evaluates the depth-collapsed ratio they induce.  Box
counting of rasters and cylinder covers is a crude cross-check only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .census import (
    Census,
    _shared_slope_fit,
    counting_function_order,
    fit_modulus_exponent,
    fit_residue_exponent,
)
from .covers import DERIVATIVE_CONSTANT, SPHERE_CONSTANT, admissibility_threshold
from .geometry import Annulus, Disk, annulus_spherical_area
from .nevanlinna import _REDO_FLOOR, NevanlinnaSpec
from .ode import continue_pair

__all__ = [
    "DimensionReport",
    "EmptyAnnulus",
    "EscapeRaster",
    "FitUnstable",
    "HIT_POLE",
    "McMullenInput",
    "NoRoot",
    "PressureCurve",
    "STAYED",
    "UNDEFINED",
    "balanced_escape_radius",
    "bk_upper_bound",
    "bowen_root",
    "box_count",
    "cylinder_cover",
    "escape_grid",
    "mcmullen_bound",
    "mcmullen_closed_form",
    "mcmullen_input",
    "mcmullen_lower",
    "moran_root",
    "pressure_curve",
    "report",
    "tail_critical_exponent",
    "theoretical_dimension",
]

_BISECTION_TOL = 1e-10
# half-window fits of the tail law must agree this closely on t*
_HALF_GAP = 0.05
_MIN_TAIL = 12


class FitUnstable(Exception):
    """Tail-law fit fails its half-window consistency gate."""


class NoRoot(Exception):
    """Pressure equation has no positive root on the given alphabet."""


class EmptyAnnulus(Exception):
    """No admissible pole lies in the measurement annulus."""


def _check_degree(m: int) -> int:
    m = int(m)
    if m < 0:
        raise ValueError("degree m must be nonnegative")
    return m


def theoretical_dimension(m: int) -> float:
    """Escaping-set dimension (m+2)/(m+4) for Schwarzian degree m."""
    m = _check_degree(m)
    return (m + 2.0) / (m + 4.0)


def bk_upper_bound(m: int) -> float:
    """Julia-set upper bound (2m+4)/(m+6); always above the escaping value."""
    m = _check_degree(m)
    return (2.0 * m + 4.0) / (m + 6.0)


def _tau(rec) -> float:
    return abs(rec.b) / abs(rec.a) ** 2


# ----------------------------------------------------------- pressure curve


@dataclass(frozen=True)
class PressureCurve:
    """Finite-alphabet pressure sum S(t) = sum(factors^t).

    factors are the per-symbol contractions kappa * tau_j over the rank
    alphabet [tail_start, tail_start + len(factors) - 1]; construction
    rejects any factor at or above 1, so S is strictly decreasing and
    finite for every t >= 0.
    """

    function_id: str
    R: float
    tail_start: int
    factors: tuple[float, ...]
    t_grid: tuple[float, ...]

    def value(self, t: float) -> float:
        return float(np.sum(np.asarray(self.factors) ** float(t)))

    def values(self) -> tuple[float, ...]:
        arr = np.asarray(self.factors)
        return tuple(float(np.sum(arr ** t)) for t in self.t_grid)


def pressure_curve(census: Census, R: float, tail_start: int | None = None,
                   tail_stop: int | None = None,
                   t_grid=None) -> PressureCurve:
    """Build S(t) from a census; the alphabet defaults to the admissible tail.

    An explicit tail_start below the admissibility threshold is allowed
    (the curve is a plain sum over the requested ranks), but the factors
    must all be contractions.
    """
    if R <= 0:
        raise ValueError("escape radius R must be positive")
    n = len(census.records)
    M = admissibility_threshold(census, R) if tail_start is None else int(tail_start)
    N = n if tail_stop is None else int(tail_stop)
    if M < 1:
        raise ValueError("alphabet start must be at least rank 1")
    if N > n:
        raise ValueError(f"alphabet top {N} beyond census of {n} records")
    if M > N:
        raise ValueError(f"empty alphabet [{M}, {N}]")
    kappa = 4.0 * SPHERE_CONSTANT * DERIVATIVE_CONSTANT / R
    factors = tuple(kappa * _tau(rec) for rec in census.records[M - 1:N])
    worst = max(factors)
    if worst >= 1.0:
        raise ValueError(
            f"per-symbol factor {worst:.3g} at R={R:g} is not a contraction")
    if t_grid is None:
        t_grid = tuple(0.125 * i for i in range(17))
    return PressureCurve(census.function_id, float(R), M, factors,
                         tuple(float(t) for t in t_grid))


def moran_root(factors, tol: float = _BISECTION_TOL) -> float:
    """Solve sum(f_i^t) = 1 by bisection for contraction factors f_i."""
    vals = [float(f) for f in factors]
    if not vals:
        raise ValueError("at least one contraction factor is required")
    if any(not 0.0 < f < 1.0 for f in vals):
        raise ValueError("contraction factors must lie in (0, 1)")
    arr = np.asarray(vals)
    if len(vals) <= 1:
        raise NoRoot(
            f"alphabet size {len(vals)} gives S(0) = {float(len(vals)):g} <= 1")

    def s(t: float) -> float:
        return float(np.sum(arr ** t))

    hi = 1.0
    while s(hi) > 1.0:
        hi *= 2.0
        if hi > 1e9:
            raise NoRoot("pressure sum does not fall below 1")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if s(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bowen_root(census: Census, R: float, tail_start: int | None = None,
               tail_stop: int | None = None) -> float:
    """Root of the finite-alphabet pressure equation at escape radius R."""
    curve = pressure_curve(census, R, tail_start, tail_stop)
    return moran_root(curve.factors)


def _tau_law(census: Census) -> tuple[float, float]:
    """Fitted (K, beta) of tau_j ~ K j^{-beta} from the census rank laws."""
    mod = fit_modulus_exponent(census)
    res = fit_residue_exponent(census)
    beta = 2.0 * mod.exponent - res.exponent
    return res.constant / mod.constant ** 2, beta


def balanced_escape_radius(census: Census, alphabet_size: int,
                           t_hint: float | None = None) -> float:
    """Radius at which the size-N pressure root lands near the tail exponent.

    The root of sum((kappa K j^{-beta})^t) = 1 over j in [M(R), M(R)+N-1]
    sits near t = 1/beta exactly when the prefactor (kappa K)^t balances
    the near-harmonic alphabet sum, and both kappa = 4 C1 C / R and the
    threshold M(R) move monotonically with R, so the balance point is a
    one-dimensional root in R.
    """
    if alphabet_size < 2:
        raise ValueError("alphabet must have at least two symbols")
    n = len(census.records)
    K, beta = _tau_law(census)
    if beta <= 0:
        raise ValueError("contraction ratios do not decay with rank")
    t = 1.0 / beta if t_hint is None else float(t_hint)
    s = beta * t
    kap_num = 4.0 * SPHERE_CONSTANT * DERIVATIVE_CONSTANT
    # vectorized admissibility_threshold; the scalar version costs O(n)
    # per probe and the bisection makes a hundred probes
    am = np.array([abs(rec.a) for rec in census.records])
    bm = np.array([abs(rec.b) for rec in census.records])

    def excess(radius: float) -> float | None:
        bad = np.nonzero(am - 2.0 * bm / radius <= radius)[0]
        M = int(bad[-1]) + 2 if bad.size else 1
        top = M + alphabet_size - 1
        if top > n:
            return None
        ranks = np.arange(M, top + 1, dtype=float)
        return (kap_num / radius * K) ** t * float(np.sum(ranks ** -s)) - 1.0

    r_lo = 0.5 * abs(census.records[0].a)
    r_hi = abs(census.records[-1].a)
    lo = hi = None
    for k in range(49):
        radius = r_lo * (r_hi / r_lo) ** (k / 48.0)
        val = excess(radius)
        if val is None:
            continue
        if val > 0.0:
            lo = radius
        elif lo is not None:
            hi = radius
            break
    if lo is None or hi is None:
        raise ValueError(
            f"census of {n} records cannot balance an alphabet of "
            f"{alphabet_size} symbols")
    for _ in range(80):
        mid = math.sqrt(lo * hi)
        val = excess(mid)
        if val is not None and val > 0.0:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


# ------------------------------------------------------- tail critical fit


def _fit_t_star(recs, j_lo: int) -> float:
    fit = _shared_slope_fit([math.log(rec.j) for rec in recs],
                            [math.log(_tau(rec)) for rec in recs],
                            [rec.ray_label for rec in recs], j_lo)
    beta = -fit.exponent
    if beta <= 0.05:
        raise FitUnstable(
            f"contraction ratios do not decay over ranks "
            f"{recs[0].j}..{recs[-1].j} (beta = {beta:.3g})")
    return 1.0 / beta


def tail_critical_exponent(census: Census, R: float) -> float:
    """Critical exponent t* = 1/beta of the admissible-tail tau law.

    Fitted with the shared-slope per-ray estimator; the window is split
    in half and refitted, and a disagreement above 0.05 in t* raises
    FitUnstable rather than returning a number the window cannot support.
    """
    M = admissibility_threshold(census, R)
    recs = census.records[M - 1:]
    if not recs:
        # every branch disk overruns its annulus: no contracting tail
        raise FitUnstable(f"no admissible branches at R={R:g}")
    if len(recs) < _MIN_TAIL:
        raise ValueError(
            f"admissible tail has {len(recs)} records at R={R:g}; "
            f"need {_MIN_TAIL}")
    t_full = _fit_t_star(recs, M)
    half = len(recs) // 2
    try:
        t_a = _fit_t_star(recs[:half], M)
        t_b = _fit_t_star(recs[half:], M + half)
    except ValueError as exc:
        raise FitUnstable(f"half-window fit degenerate: {exc}") from exc
    if abs(t_a - t_b) > _HALF_GAP:
        raise FitUnstable(
            f"tail halves disagree: t* = {t_a:.4f} vs {t_b:.4f} "
            f"over ranks {M}..{census.records[-1].j}")
    return t_full


# ----------------------------------------------------------- McMullen bound


@dataclass(frozen=True)
class McMullenInput:
    """Per-depth density lower bounds and diameter upper bounds."""

    densities: tuple[float, ...]
    diameters: tuple[float, ...]
    provenance: str

    def __post_init__(self):
        dens = tuple(float(v) for v in self.densities)
        diam = tuple(float(v) for v in self.diameters)
        object.__setattr__(self, "densities", dens)
        object.__setattr__(self, "diameters", diam)
        if len(dens) != len(diam) or not dens:
            raise ValueError("need equal-length, non-empty sequences")
        if any(not 0.0 < v <= 1.0 for v in dens):
            raise ValueError("densities must lie in (0, 1]")
        if any(not v > 0.0 for v in diam):
            raise ValueError("diameters must be positive")
        if any(y >= x for x, y in zip(diam[:-1], diam[1:], strict=False)):
            raise ValueError("diameters must decrease with depth")


def mcmullen_bound(inp: McMullenInput) -> float:
    """2 - max over depths of sum(|log density|) / |log diameter|.

    For geometric inputs the ratio is depth-independent, so the max
    equals the single-depth value; the max is the conservative finite
    stand-in for the limsup.
    """
    best = None
    cum = 0.0
    for delta, diam in zip(inp.densities, inp.diameters):
        cum -= math.log(delta)
        if diam < 1.0:
            ratio = cum / -math.log(diam)
            best = ratio if best is None else max(best, ratio)
    if best is None:
        raise ValueError("no depth has diameter below 1")
    return 2.0 - best


def mcmullen_closed_form(m: int, R: float, B: float = 1.0,
                         B1: float = 1.0) -> float:
    """Depth-collapsed value 2 - (log B - (m/2+3) log R)/(log B1 - (m/2+2) log R)."""
    m = _check_degree(m)
    if R <= 1.0:
        raise ValueError("R must exceed 1")
    if B <= 0 or B1 <= 0:
        raise ValueError("constants must be positive")
    num = math.log(B) - (0.5 * m + 3.0) * math.log(R)
    den = math.log(B1) - (0.5 * m + 2.0) * math.log(R)
    if den >= 0.0:
        raise ValueError("diameter factor is not a contraction at this R")
    return 2.0 - num / den


def _infer_degree(census: Census) -> int:
    rho = counting_function_order(census)
    m = round(2.0 * rho - 2.0)
    if abs(2.0 * rho - 2.0 - m) > 0.35 or m < 0:
        raise ValueError(
            f"counting order {rho:.3f} does not identify an integer degree; "
            f"pass m explicitly")
    return m


def _cap_areas(am: np.ndarray, rad: np.ndarray) -> np.ndarray:
    """Vectorized spherical_area_closed over center moduli and radii."""
    alpha = np.arctan2(2.0 * rad, 1.0 + am * am - rad * rad)
    return 4.0 * math.pi * np.sin(0.5 * alpha) ** 2


_EXACT_RANK_LIMIT = 2_000_000
_QUAD_SAMPLES = 200_001


@dataclass(frozen=True)
class _AnnulusPoles:
    """Pole-moduli samples in (R, 2R): sum(w * f(am, bm)) stands in for
    the per-pole sum, with unit weights when ranks are enumerated and
    trapezoid weights (plus the Euler-Maclaurin half-endpoint term) when
    the rank span is too large to enumerate."""

    am: np.ndarray
    bm: np.ndarray
    weights: np.ndarray
    count: float
    max_b: float
    extrapolated: bool


def _annulus_branch_moduli(census: Census, R: float, m: int) -> _AnnulusPoles:
    """Admissible-pole moduli in the annulus (R, 2R), plus max |b|.

    When the census reaches 2R the actual records are used; beyond that
    the rank laws are extrapolated, which is flagged in the provenance.
    """
    if census.search_radius >= 2.0 * R:
        am = np.array([abs(rec.a) for rec in census.records])
        bm = np.array([abs(rec.b) for rec in census.records])
        keep = (am > R) & (am < 2.0 * R) & (am - 2.0 * bm / R > R)
        threshold = admissibility_threshold(census, R)
        tail = census.records[threshold - 1:]
        max_b = max((abs(rec.b) for rec in tail), default=0.0)
        n = int(np.count_nonzero(keep))
        return _AnnulusPoles(am[keep], bm[keep], np.ones(n), float(n),
                             max_b, False)
    mod = fit_modulus_exponent(census)
    res = fit_residue_exponent(census)

    def amod(j): return mod.constant * j ** mod.exponent
    def bmod(j): return res.constant * j ** res.exponent
    def admissible(j): return amod(j) - 2.0 * bmod(j) / R > R

    empty = _AnnulusPoles(np.empty(0), np.empty(0), np.empty(0), 0.0, 0.0,
                          True)
    # admissibility implies |a| > R and both sides grow with rank, so the
    # window start is the first admissible rank
    lo = max(1.0, math.floor((R / mod.constant) ** (1.0 / mod.exponent)) - 2)
    hi = math.ceil((2.0 * R / mod.constant) ** (1.0 / mod.exponent)) + 2
    if not admissible(hi):
        return empty
    if admissible(lo):
        js = lo
    else:
        a, b = lo, float(hi)
        while b - a > 0.5:
            mid = round(0.5 * (a + b))
            if not a < mid < b:
                break
            if admissible(mid):
                b = mid
            else:
                a = mid
        js = b
    if amod(js) >= 2.0 * R:
        return empty
    # largest rank still inside the annulus; ranks can exceed the float
    # integer range, so bisect instead of stepping
    if amod(float(hi)) < 2.0 * R:
        je = float(hi)
    else:
        a, b = js, float(hi)
        while b - a > 0.5:
            mid = round(0.5 * (a + b))
            if not a < mid < b:
                break
            if amod(mid) < 2.0 * R:
                a = mid
            else:
                b = mid
        je = a
    max_b = max(bmod(js), bmod(je))
    count = je - js + 1.0
    if count <= _EXACT_RANK_LIMIT:
        ranks = np.arange(js, je + 1.0)
        am = amod(ranks)
        bm = bmod(ranks)
        keep = (am > R) & (am < 2.0 * R) & (am - 2.0 * bm / R > R)
        n = int(np.count_nonzero(keep))
        return _AnnulusPoles(am[keep], bm[keep], np.ones(n), float(n),
                             max_b, True)
    ranks = np.linspace(js, je, _QUAD_SAMPLES)
    step = (je - js) / (_QUAD_SAMPLES - 1)
    weights = np.full(_QUAD_SAMPLES, step)
    weights[0] = weights[-1] = 0.5 * step + 0.5
    return _AnnulusPoles(amod(ranks), bmod(ranks), weights, count, max_b,
                         True)


def mcmullen_input(census: Census, R: float, depth_max: int = 8,
                   m: int | None = None) -> McMullenInput:
    """Measure the density/diameter sequences for the McMullen bound.

    Density: exact spherical area of the union of branch components
    D(a_j, |b_j|/R) over admissible poles in the annulus (R, 2R),
    against the exact spherical annulus area.  Diameter factor per
    symbol: sup |g'| ~ max|b| / R^2 over admissible branches.
    """
    m = _check_degree(m) if m is not None else _infer_degree(census)
    if R <= 0.0:
        raise ValueError("R must be positive")
    if depth_max < 1:
        raise ValueError("depth_max must be at least 1")
    poles = _annulus_branch_moduli(census, R, m)
    if poles.am.size == 0:
        raise EmptyAnnulus(
            f"no admissible poles in annulus ({R:g}, {2 * R:g})")
    area = float(np.sum(poles.weights * _cap_areas(poles.am, poles.bm / R)))
    density = area / annulus_spherical_area(Annulus(R))
    if not 0.0 < density <= 1.0:
        raise ValueError(f"measured density {density:g} out of range")
    d1 = poles.max_b / R ** 2
    if not 0.0 < d1 < 1.0:
        raise ValueError(
            f"per-symbol diameter factor {d1:g} is not a contraction")
    provenance = (f"R={R:g} annulus=({R:g},{2 * R:g}) poles={poles.count:g} "
                  f"m={m} extrapolated={poles.extrapolated}")
    return McMullenInput((density,) * depth_max,
                         tuple(d1 ** k for k in range(1, depth_max + 1)),
                         provenance)


def mcmullen_lower(census: Census, R: float, depth_max: int = 8,
                   m: int | None = None) -> float:
    """Measured McMullen lower bound at escape radius R."""
    return mcmullen_bound(mcmullen_input(census, R, depth_max, m))


# -------------------------------------------------------------- escape grid

STAYED = -1
HIT_POLE = -2
UNDEFINED = -3


@dataclass(frozen=True)
class EscapeRaster:
    """Per-pixel orbit classification over a window.

    codes[iy][ix] is the first step at which the orbit dropped to
    modulus <= R (0 means the start itself), or STAYED / HIT_POLE /
    UNDEFINED.  Pixels sample the centers of an nx-by-ny partition of
    the window, not its edge nodes.
    """

    window: tuple[float, float, float, float]
    nx: int
    ny: int
    codes: tuple[tuple[int, ...], ...]
    n_steps: int
    R: float

    def __post_init__(self):
        if len(self.codes) != self.ny or any(len(row) != self.nx
                                             for row in self.codes):
            raise ValueError("codes shape must be ny rows of nx entries")

    def pixel_center(self, ix: int, iy: int) -> complex:
        x0, x1, y0, y1 = self.window
        return complex(x0 + (ix + 0.5) * (x1 - x0) / self.nx,
                       y0 + (iy + 0.5) * (y1 - y0) / self.ny)

    def pixel_diagonal(self) -> float:
        x0, x1, y0, y1 = self.window
        return math.hypot((x1 - x0) / self.nx, (y1 - y0) / self.ny)

    def survived_through(self, k: int) -> tuple[tuple[int, int], ...]:
        """Pixels whose orbit stayed above R through step k.

        A pole hit counts as surviving (the orbit reached infinity, never
        dropping below R); undefined pixels are excluded.
        """
        out = []
        for iy, row in enumerate(self.codes):
            for ix, code in enumerate(row):
                if code == STAYED or code == HIT_POLE or code > k:
                    out.append((ix, iy))
        return tuple(out)

    def tally(self) -> dict[str, int]:
        names = {STAYED: "stayed", HIT_POLE: "hit-pole",
                 UNDEFINED: "undefined"}
        counts: dict[str, int] = {}
        for row in self.codes:
            for code in row:
                key = names.get(code, "dropped")
                counts[key] = counts.get(key, 0) + 1
        return counts


def escape_grid(spec: NevanlinnaSpec, window, nx: int, ny: int,
                n_steps: int, R: float) -> EscapeRaster:
    """Classify every pixel center of the window against the orbit test.

    The first iterate is evaluated column by column with a continued
    fundamental pair (cheap); only pixels that survive it walk the full
    orbit.  Verdicts for those pixels come from the canonical iterate
    path, so boundary classifications match single-point runs.
    """
    if nx < 1 or ny < 1:
        raise ValueError("grid needs nx, ny >= 1")
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    if R <= 0:
        raise ValueError("radius must be positive")
    x0, x1, y0, y1 = (float(v) for v in window)
    codes = [[UNDEFINED] * nx for _ in range(ny)]
    survivors: list[tuple[int, int, complex]] = []
    M = spec.moebius
    for ix in range(nx):
        state = None
        for iy in range(ny):
            z = complex(x0 + (ix + 0.5) * (x1 - x0) / nx,
                        y0 + (iy + 0.5) * (y1 - y0) / ny)
            if not abs(z) > R:
                codes[iy][ix] = 0
                continue
            if abs(z) > spec.max_eval_radius:
                codes[iy][ix] = UNDEFINED
                continue
            pole = spec._pole_underfoot(z)
            if pole is not None and abs(z - pole) <= 1e-9 * (1.0 + abs(pole)):
                codes[iy][ix] = HIT_POLE
                continue
            try:
                if state is None:
                    state = spec.pair_at(z)
                else:
                    state = continue_pair(
                        spec.p, state, [state.z, z], spec.ode_tol,
                        ref_logw=complex(-2.0 * state.log_scale))
                    if state.value_floor > _REDO_FLOOR:
                        state = spec.pair_at(z)
            except Exception:
                state = None
                try:
                    state = spec.pair_at(z)
                except Exception:
                    codes[iy][ix] = UNDEFINED
                    continue
            den = M.c * state.w1 + M.d * state.w2
            if den == 0:
                codes[iy][ix] = HIT_POLE
                continue
            num = M.a * state.w1 + M.b * state.w2
            if not abs(num / den) > R:
                codes[iy][ix] = 1
            else:
                survivors.append((ix, iy, z))
    for ix, iy, z in survivors:
        rec = spec.iterate(z, n_steps, R)
        if rec.classification == "stayed":
            codes[iy][ix] = STAYED
        elif rec.classification == "dropped":
            codes[iy][ix] = rec.step
        elif rec.classification == "hit-pole":
            codes[iy][ix] = HIT_POLE
        else:
            codes[iy][ix] = UNDEFINED
    return EscapeRaster((x0, x1, y0, y1), nx, ny,
                        tuple(tuple(row) for row in codes), n_steps, float(R))


# --------------------------------------------------------------- box counts


def cylinder_cover(census: Census, R: float, depth: int,
                   symbols) -> tuple[Disk, ...]:
    """Disks of estimated diameter for every depth-length code over symbols.

    Diameter estimate is the itinerary product with unit distortion
    constant (typical size, not the certified bound); each disk sits at
    the first symbol's pole, which is where the cylinder lives.
    """
    ranks = [int(s) for s in symbols]
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if not ranks:
        raise ValueError("at least one symbol is required")
    threshold = admissibility_threshold(census, R)
    n = len(census.records)
    for rank in ranks:
        if not 1 <= rank <= n:
            raise ValueError(f"rank {rank} outside census of {n} records")
        if rank < threshold:
            raise ValueError(
                f"symbol {rank} below admissibility threshold {threshold}")
    if len(ranks) ** depth > 2_000_000:
        raise ValueError("cover would exceed two million cylinders")
    recs = {rank: census.records[rank - 1] for rank in ranks}
    lead = {rank: 4.0 * abs(recs[rank].b) / R for rank in ranks}
    taus = {rank: _tau(recs[rank]) for rank in ranks}
    disks = []
    for code in product(ranks, repeat=depth):
        diam = lead[code[0]]
        for rank in code[1:]:
            diam *= taus[rank]
        disks.append(Disk(recs[code[0]].a, 0.5 * diam))
    return tuple(disks)


def _cover_scale(cover) -> float:
    """Characteristic scale of a disk cover: geometric mean diameter."""
    if not cover:
        raise ValueError("empty cover has no scale")
    return math.exp(math.fsum(math.log(2.0 * d.radius) for d in cover)
                    / len(cover))


def box_count(obj, scales=None) -> float:
    """Least-squares slope of log N against log(1/scale).

    obj is either an EscapeRaster (scales are integer pixel-block sizes;
    boxes count blocks containing a surviving pixel) or a sequence of
    disk covers, one per scale (boxes are the cover disks themselves;
    a missing scale ladder defaults to each cover's geometric mean
    diameter).
    """
    if isinstance(obj, EscapeRaster):
        if scales is None:
            raise ValueError("raster box counting needs explicit block sizes")
        blocks = [int(b) for b in scales]
        if any(b < 1 for b in blocks):
            raise ValueError("block sizes must be positive")
        occupied = [(ix, iy)
                    for iy, row in enumerate(obj.codes)
                    for ix, code in enumerate(row)
                    if code == STAYED or code == HIT_POLE]
        if not occupied:
            raise ValueError("raster has no surviving pixels to count")
        x0, x1, _, _ = obj.window
        px = (x1 - x0) / obj.nx if x1 > x0 else 1.0
        pairs = [(b * px, len({(ix // b, iy // b) for ix, iy in occupied}))
                 for b in blocks]
    else:
        covers = list(obj)
        if scales is None:
            scales = [_cover_scale(cover) for cover in covers]
        scales = [float(s) for s in scales]
        if len(scales) != len(covers):
            raise ValueError("one scale per cover is required")
        pairs = [(eps, len(cover)) for eps, cover in zip(scales, covers)]
    if len(pairs) < 3:
        raise ValueError("box counting needs at least 3 scales")
    if any(count < 1 for _, count in pairs):
        raise ValueError("every scale must cover at least one box")
    xs = [-math.log(eps) for eps, _ in pairs]
    ys = [math.log(count) for _, count in pairs]
    if max(xs) - min(xs) <= 0.0:
        raise ValueError("scales do not vary")
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)


# ------------------------------------------------------------------ report


@dataclass(frozen=True)
class DimensionReport:
    """All estimators side by side, with failures noted rather than fatal."""

    m: int
    theoretical: float
    bk_upper: float
    tail_exponent: float | None
    tail_window: tuple[int, int] | None
    bowen_R: float | None
    bowen: tuple[tuple[int, float], ...]
    mcmullen: tuple[tuple[float, float], ...]
    box_estimate: float | None
    tolerances: tuple[tuple[str, float], ...]
    ordering_ok: bool
    errors: tuple[str, ...]


def report(census: Census, R_ladder, m: int | None = None,
           alphabet_sizes=(100, 1000, 10000), depth_max: int = 8,
           tail_R: float | None = None,
           ordering_slack: float = 0.02) -> DimensionReport:
    """Aggregate the estimators over an escape-radius ladder.

    Sub-estimator failures are collected as messages and leave their
    fields empty; only a census that cannot even identify the degree
    refuses to produce a report.
    """
    errors: list[str] = []
    m = _check_degree(m) if m is not None else _infer_degree(census)
    theo = theoretical_dimension(m)
    bk = bk_upper_bound(m)
    ladder = [float(R) for R in R_ladder]

    tail_exponent = None
    tail_window = None
    r_tail = tail_R if tail_R is not None else (min(ladder) if ladder else None)
    if r_tail is None:
        errors.append("tail: no radius available")
    else:
        try:
            tail_exponent = tail_critical_exponent(census, r_tail)
            tail_window = (admissibility_threshold(census, r_tail),
                           len(census.records))
        except (FitUnstable, ValueError) as exc:
            errors.append(f"tail: {type(exc).__name__}: {exc}")

    bowen_R = None
    bowen: list[tuple[int, float]] = []
    sizes = [int(s) for s in alphabet_sizes]
    if sizes:
        try:
            bowen_R = balanced_escape_radius(census, max(sizes))
        except ValueError as exc:
            errors.append(f"bowen: ValueError: {exc}")
        if bowen_R is not None:
            start = admissibility_threshold(census, bowen_R)
            for size in sizes:
                try:
                    root = bowen_root(census, bowen_R, tail_start=start,
                                      tail_stop=start + size - 1)
                    bowen.append((size, root))
                except (NoRoot, ValueError) as exc:
                    errors.append(
                        f"bowen size {size}: {type(exc).__name__}: {exc}")

    mcm: list[tuple[float, float]] = []
    for R in ladder:
        try:
            mcm.append((R, mcmullen_lower(census, R, depth_max, m=m)))
        except (EmptyAnnulus, ValueError) as exc:
            errors.append(f"mcmullen R={R:g}: {type(exc).__name__}: {exc}")

    ordering_ok = all(val <= theo + ordering_slack for _, val in mcm) \
        and theo <= bk + 1e-12
    if not ordering_ok:
        errors.append("ordering: mcmullen <= theoretical <= bk violated")

    return DimensionReport(
        m=m, theoretical=theo, bk_upper=bk,
        tail_exponent=tail_exponent, tail_window=tail_window,
        bowen_R=bowen_R, bowen=tuple(bowen), mcmullen=tuple(mcm),
        box_estimate=None,
        tolerances=(("ordering_slack", ordering_slack),
                    ("bisection", _BISECTION_TOL),
                    ("fit_half_gap", _HALF_GAP)),
        ordering_ok=ordering_ok, errors=tuple(errors))
