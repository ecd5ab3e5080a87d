"""Inverse-branch geometry: sandwich disks, Newton branches, cylinders.

Each censused pole a_j with residue b_j owns a preimage component U_j of
the outer region {|w| > R}.  Distortion theory pins U_j between the disks
D(a_j, |b_j|/(4R)) and D(a_j, 2|b_j|/R), bounds the inverse-branch
derivative by 12 |b_j| / |z|^2, and chaining those bounds through an
itinerary of branches gives the cylinder diameter products evaluated
here.  Every analytic bound has an empirical cross-check built from
Newton inversion of f itself.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .geometry import Disk
from .nevanlinna import NevanlinnaSpec

# numerator constant of the derivative bound 12|b|/|z|^2
DERIVATIVE_CONSTANT = 12.0
# Euclidean-to-spherical diameter factor C1/|a|^2 on the radius-1 sphere
SPHERE_CONSTANT = 4.0

_NEWTON_CAP = 50
_NEWTON_TOL = 1e-8
# outer disks must stay this far under the neighbour gap for the local
# Laurent geometry the sandwich relies on to be meaningful
_SEPARATION_FRACTION = 0.25


class NewtonDiverged(Exception):
    """Branch inversion failed to land inside the branch disk."""


@dataclass(frozen=True)
class BranchInfo:
    """Sandwich-disk geometry of one inverse-branch component U_j."""

    j: int
    a: complex
    b: complex
    R: float
    inner: Disk
    outer: Disk
    diam_bound: float
    contained_in_BR: bool
    nearest_gap: float

    def derivative_bound(self, z: complex) -> float:
        """Upper bound for |g_j'(z)| valid outside the censused disks."""
        return DERIVATIVE_CONSTANT * abs(self.b) / abs(z) ** 2


@dataclass(frozen=True)
class SandwichReport:
    pole_index: int
    R: float
    status: str
    worst_margin: float
    samples: int
    failures: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass(frozen=True)
class NestingReport:
    code: tuple[int, ...]
    status: str
    worst_margin: float
    samples: int
    failures: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass(frozen=True)
class CylinderEstimate:
    """Analytic diameter bounds for the cylinder of one itinerary."""

    code: tuple[int, ...]
    euclid_diam_bound: float
    sphere_diam_bound: float
    C: float
    C1: float

    @property
    def depth(self) -> int:
        return len(self.code)


def _record(census, j: int):
    if not 1 <= j <= len(census.records):
        raise ValueError(f"pole rank {j} outside census of "
                         f"{len(census.records)} records")
    rec = census.records[j - 1]
    if rec.j != j:
        raise ValueError(f"census record order broken at rank {j}")
    return rec


def branch_info(census, j: int, R: float) -> BranchInfo:
    if R <= 0:
        raise ValueError("branch radius R must be positive")
    rec = _record(census, j)
    rb = abs(rec.b)
    outer = Disk(rec.a, 2.0 * rb / R)
    return BranchInfo(
        j=j,
        a=rec.a,
        b=rec.b,
        R=R,
        inner=Disk(rec.a, rb / (4.0 * R)),
        outer=outer,
        diam_bound=2.0 * outer.radius,
        contained_in_BR=abs(rec.a) - 2.0 * rb / R > R,
        nearest_gap=census.nearest_neighbor_gap(j - 1),
    )


def admissibility_threshold(census, R: float) -> int:
    """Smallest rank whose entire tail has branch disks outside radius R.

    Ranks below the threshold own components that leave the outer region
    {|z| > R}; itineraries are built from ranks at or above it.
    """
    worst = 0
    for rec in census.records:
        if not abs(rec.a) - 2.0 * abs(rec.b) / R > R:
            worst = rec.j
    return worst + 1


def koebe_sandwich_check(spec: NevanlinnaSpec, info: BranchInfo,
                         n_samples: int = 64) -> SandwichReport:
    """Verify D(a, |b|/4R) inside U_j inside D(a, 2|b|/R) by sampling.

    |f| must exceed R on the inner disk (boundary included) and stay at
    most R on the outer circle.  When the outer disk does not separate
    cleanly from the neighbouring poles the local model behind the
    sandwich is meaningless and the report says so instead of failing.
    """
    if n_samples < 8:
        raise ValueError("sandwich check needs at least 8 samples")
    if (not info.outer.radius < _SEPARATION_FRACTION * info.nearest_gap
            or info.outer.radius >= abs(info.a)):
        return SandwichReport(
            info.j, info.R, "not-applicable", math.nan, 0,
            ("outer disk does not separate from neighbouring poles at "
             f"R={info.R:g}",))
    failures: list[str] = []
    worst = math.inf
    radii = (1.0, 0.5, 0.75, 0.25)
    for i in range(n_samples):
        rf = radii[i % 4]
        z = info.a + info.inner.radius * rf * cmath.exp(
            2j * math.pi * i / n_samples)
        margin = spec.evaluate(z).modulus - info.R
        worst = min(worst, margin)
        if margin <= 0:
            failures.append(
                f"inner point {z:.6g}: |f| under R by {-margin:.3e}")
    for i in range(n_samples):
        z = info.a + info.outer.radius * cmath.exp(
            2j * math.pi * (i + 0.5) / n_samples)
        margin = info.R - spec.evaluate(z).modulus
        worst = min(worst, margin)
        if margin < 0:
            failures.append(
                f"outer point {z:.6g}: |f| over R by {-margin:.3e}")
    status = "pass" if not failures else "fail"
    return SandwichReport(info.j, info.R, status, worst, 2 * n_samples,
                          tuple(failures))


def _f_and_fprime(spec: NevanlinnaSpec, z: complex) -> tuple[complex, complex, complex]:
    """(denominator, f, f') from one pair state; f' uses the unit Wronskian."""
    st = spec.pair_at(z)
    M = spec.moebius
    num = M.a * st.w1 + M.b * st.w2
    den = M.c * st.w1 + M.d * st.w2
    if den == 0:
        return den, complex(math.inf), complex(math.inf)
    fp = -M.det * cmath.exp(-2.0 * st.log_scale) / (den * den)
    return den, num / den, fp


def newton_inverse(spec: NevanlinnaSpec, record, w, R: float) -> complex:
    """Point of U_j mapping to w, from the Laurent seed a + b/w.

    Accepts the closed exterior |w| >= R so cylinder boundaries (which
    map exactly onto |w| = R) stay invertible; an infinite w returns the
    pole itself.  Convergence means residual at most 1e-8 |w| AND the
    iterate sits inside the outer sandwich disk; anything else raises
    NewtonDiverged with the trace.
    """
    a, b = record.a, record.b
    if getattr(w, "infinite", False):
        return a
    if hasattr(w, "to_complex"):
        w = w.to_complex()
    w = complex(w)
    if not cmath.isfinite(w):
        return a
    if abs(w) < R * (1.0 - 1e-12):
        raise ValueError(f"target |w|={abs(w):g} inside the radius-{R:g} disk")
    outer_r = 2.0 * abs(b) / R
    z = a + b / w
    trace = [z]
    for _ in range(_NEWTON_CAP):
        den, f, fp = _f_and_fprime(spec, z)
        if den == 0:
            z += 1e-12 * (1.0 + abs(a))
            trace.append(z)
            continue
        resid = abs(f - w)
        if resid <= _NEWTON_TOL * abs(w):
            if abs(z - a) > outer_r * (1.0 + 1e-6):
                raise NewtonDiverged(
                    f"converged to {z:.6g} outside the branch disk of "
                    f"rank {getattr(record, 'j', '?')} "
                    f"(|z-a|={abs(z - a):.3e}, outer={outer_r:.3e})")
            return z
        step = (f - w) / fp
        if abs(step) > 0.5 * outer_r:
            step *= 0.5 * outer_r / abs(step)
        z -= step
        trace.append(z)
    raise NewtonDiverged(
        f"no convergence in {_NEWTON_CAP} iterations from seed "
        f"{trace[0]:.6g}; last iterates "
        + ", ".join(f"{t:.6g}" for t in trace[-3:]))


def _admissible_records(census, code, R: float):
    if not code:
        raise ValueError("cylinder code must be non-empty")
    threshold = admissibility_threshold(census, R)
    recs = []
    for j in code:
        rec = _record(census, j)
        if j < threshold:
            raise ValueError(
                f"symbol {j} below admissibility threshold {threshold} "
                f"at R={R:g}")
        recs.append(rec)
    return recs


def cylinder_diameter(census, code, R: float,
                      C: float = DERIVATIVE_CONSTANT,
                      C1: float = SPHERE_CONSTANT) -> CylinderEstimate:
    """Analytic diameter bounds for the itinerary product formula.

    Euclidean: C^{l-1} (4/R) |b_1| prod_{k>=2} |b_k|/|a_k|^2.
    Spherical: C^{l-1} (4 C1/R) prod_{k>=1} |b_k|/|a_k|^2.
    """
    recs = _admissible_records(census, code, R)
    ell = len(recs)
    euclid = C ** (ell - 1) * (4.0 / R) * abs(recs[0].b)
    for rec in recs[1:]:
        euclid *= abs(rec.b) / abs(rec.a) ** 2
    sphere = C ** (ell - 1) * (4.0 * C1 / R)
    for rec in recs:
        sphere *= abs(rec.b) / abs(rec.a) ** 2
    return CylinderEstimate(tuple(code), euclid, sphere, C, C1)


def verify_nesting(spec: NevanlinnaSpec, census, code, R: float,
                   samples: int = 16) -> NestingReport:
    """Pull the last symbol's outer circle through the earlier branches.

    Every pulled-back sample must land inside the outer disk of the
    branch it just went through; those disks certify that each depth-l
    cylinder sits inside its depth-(l-1) parent.  Depth 1 has no parent
    and passes vacuously.
    """
    recs = _admissible_records(census, code, R)
    if len(recs) == 1:
        return NestingReport(tuple(code), "pass", math.inf, 0)
    last = recs[-1]
    pts = [last.a + (2.0 * abs(last.b) / R) * cmath.exp(2j * math.pi * k / samples)
           for k in range(samples)]
    worst = math.inf
    failures: list[str] = []
    for rec in reversed(recs[:-1]):
        outer_r = 2.0 * abs(rec.b) / R
        pulled = []
        for w in pts:
            try:
                z = newton_inverse(spec, rec, w, R)
            except NewtonDiverged as exc:
                failures.append(str(exc))
                continue
            worst = min(worst, outer_r - abs(z - rec.a))
            pulled.append(z)
        pts = pulled
    status = "pass" if not failures and worst > 0 else "fail"
    return NestingReport(tuple(code), status, worst,
                         samples * (len(recs) - 1), tuple(failures))


def empirical_cylinder_diameter(spec: NevanlinnaSpec, census, code,
                                R: float, samples: int = 16) -> float:
    """Measured diameter of the cylinder, the brute-force oracle.

    The cylinder boundary is the image of the circle |w| = R under the
    full inverse itinerary, so the circle is pulled through every branch
    of the code and the maximal pairwise distance of the images is
    returned.  Depth is capped at 3 for cost.
    """
    recs = _admissible_records(census, code, R)
    if len(recs) > 3:
        raise ValueError("empirical oracle capped at depth 3")
    if samples < 4:
        raise ValueError("need at least 4 boundary samples")
    pts: list[complex] = [R * cmath.exp(2j * math.pi * (k + 0.3) / samples)
                          for k in range(samples)]
    for rec in reversed(recs):
        pts = [newton_inverse(spec, rec, w, R) for w in pts]
    best = 0.0
    for i in range(len(pts)):
        for k in range(i + 1, len(pts)):
            best = max(best, abs(pts[i] - pts[k]))
    return best
