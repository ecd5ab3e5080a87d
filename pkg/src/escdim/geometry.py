"""Complex-plane and Riemann-sphere primitives shared by the whole package.

Conventions fixed here and used everywhere else:

* The Riemann sphere is the radius-1 sphere.  The chordal distance between
  two finite points is ``2|z - w| / sqrt((1 + |z|^2)(1 + |w|^2))``, at most 2
  (antipodal pairs), and the total spherical area is ``4 * pi``.  The area
  density against planar Lebesgue measure is ``4 / (1 + |z|^2)^2``.
* Square roots along paths are continued by nearest-value tracking with
  automatic subdivision, never by evaluating the principal branch pointwise.
* ``zero_clearance(z) = 1e-6 * (1 + |z|)`` is the radius inside which a zero
  of a polynomial is considered "hit" by branch-sensitive operations.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np


class ZeroClearanceViolated(Exception):
    """A branch-tracked path passed inside the clearance radius of a zero."""


def zero_clearance(z: complex) -> float:
    return 1e-6 * (1.0 + abs(z))


# ----------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class Polynomial:
    """Polynomial with complex coefficients, constant term first.

    The zero polynomial is representable (needed as a second derivative of
    low-degree input); callers that require a nonzero leading coefficient
    must check ``is_zero`` themselves.
    """

    coeffs: tuple[complex, ...]

    def __post_init__(self):
        cs = tuple(complex(c) for c in self.coeffs)
        while len(cs) > 1 and cs[-1] == 0:
            cs = cs[:-1]
        if not cs:
            cs = (0j,)
        object.__setattr__(self, "coeffs", cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> complex:
        return self.coeffs[-1]

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def __call__(self, z: complex) -> complex:
        # Horner evaluation, highest coefficient first.
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial((0j,))
        return Polynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def roots(self) -> np.ndarray:
        """All complex roots (empty array for constants)."""
        if self.degree == 0:
            return np.empty(0, dtype=complex)
        return np.roots(list(reversed(self.coeffs)))


def poly_derivatives(p: Polynomial) -> tuple[Polynomial, Polynomial]:
    """First and second derivative of ``p``."""
    d1 = p.derivative()
    return d1, d1.derivative()


# ----------------------------------------------------------------------------
# sphere points and Moebius maps


@dataclass(frozen=True)
class SpherePoint:
    """A point of the Riemann sphere: a finite complex number or infinity."""

    value: complex = 0j
    infinite: bool = False

    @classmethod
    def finite(cls, z: complex) -> "SpherePoint":
        return cls(complex(z), False)

    @classmethod
    def infinity(cls) -> "SpherePoint":
        return cls(0j, True)

    @property
    def modulus(self) -> float:
        return math.inf if self.infinite else abs(self.value)

    def to_complex(self) -> complex:
        if self.infinite:
            raise ValueError("point at infinity has no complex value")
        return self.value

    def __repr__(self):
        return "SpherePoint(inf)" if self.infinite else f"SpherePoint({self.value!r})"


@dataclass(frozen=True)
class MoebiusMap:
    """Moebius transformation z -> (a z + b) / (c z + d) with a d - b c != 0."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        scale = max(abs(self.a) * abs(self.d), abs(self.b) * abs(self.c), 1e-300)
        if abs(self.det) <= 1e-14 * scale:
            raise ValueError("degenerate Moebius map: a*d - b*c = 0")

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """Matrix product, i.e. the map ``z -> self(other(z))``."""
        return MoebiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def apply(self, g) -> SpherePoint:
        """Apply to a SpherePoint or complex number.

        Conventions: M(infinity) = a/c (infinity when c = 0) and
        M(-d/c) = infinity.
        """
        if isinstance(g, SpherePoint) and g.infinite:
            if self.c == 0:
                return SpherePoint.infinity()
            return SpherePoint.finite(self.a / self.c)
        z = g.to_complex() if isinstance(g, SpherePoint) else complex(g)
        num = self.a * z + self.b
        den = self.c * z + self.d
        if den == 0 or abs(den) < 1e-300 * max(1.0, abs(num)):
            return SpherePoint.infinity()
        return SpherePoint.finite(num / den)


def moebius_apply(m: MoebiusMap, g) -> SpherePoint:
    return m.apply(g)


# ----------------------------------------------------------------------------
# disks, annuli, chordal geometry


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    def contains(self, z: complex) -> bool:
        return abs(z - self.center) < self.radius


@dataclass(frozen=True)
class Annulus:
    """Round annulus s < |z| < 2 s about the origin."""

    s: float

    def __post_init__(self):
        object.__setattr__(self, "s", float(self.s))
        if not self.s > 0:
            raise ValueError("annulus inner radius must be positive")

    @property
    def inner(self) -> float:
        return self.s

    @property
    def outer(self) -> float:
        return 2.0 * self.s

    def contains(self, z: complex) -> bool:
        r = abs(z)
        return self.inner < r < self.outer


def _as_sphere(z) -> SpherePoint:
    if isinstance(z, SpherePoint):
        return z
    return SpherePoint.finite(z)


def chordal_distance(z, w) -> float:
    """Chordal distance on the radius-1 sphere (maximum value 2)."""
    zp, wp = _as_sphere(z), _as_sphere(w)
    if zp.infinite and wp.infinite:
        return 0.0
    if zp.infinite:
        return 2.0 / math.sqrt(1.0 + abs(wp.value) ** 2)
    if wp.infinite:
        return 2.0 / math.sqrt(1.0 + abs(zp.value) ** 2)
    a, b = zp.value, wp.value
    return 2.0 * abs(a - b) / math.sqrt((1.0 + abs(a) ** 2) * (1.0 + abs(b) ** 2))


def spherical_area(disk: Disk, tol: float = 1e-9, max_doublings: int = 10) -> float:
    """Spherical area of a planar disk by polar quadrature about its center.

    Gauss-Legendre in radius and a uniform (trapezoidal) rule in angle,
    refined by doubling both node counts until two successive levels agree
    to ``tol`` relative.
    """
    a, r = disk.center, disk.radius
    # radial substitution rho = tan(v) keeps the integrand smooth and bounded
    # for disks of any radius (for a = 0 it is exactly 2 sin 2v)
    v_max = math.atan(r)
    prev = None
    n_r, n_t = 16, 32
    for _ in range(max_doublings):
        x, wts = np.polynomial.legendre.leggauss(n_r)
        v = 0.5 * v_max * (x + 1.0)
        wv = 0.5 * v_max * wts
        rho = np.tan(v)
        jac = rho * (1.0 + rho * rho)
        theta = 2.0 * math.pi * np.arange(n_t) / n_t
        zz = a + rho[:, None] * np.exp(1j * theta)[None, :]
        dens = 4.0 / (1.0 + np.abs(zz) ** 2) ** 2
        area = float((2.0 * math.pi / n_t) * np.sum((dens * jac[:, None]) * wv[:, None]))
        if prev is not None and abs(area - prev) <= tol * max(1.0, abs(area)):
            return area
        prev = area
        n_r *= 2
        n_t *= 2
    return prev


def spherical_area_closed(disk: Disk) -> float:
    """Closed-form spherical area of a planar disk.

    A planar disk maps to a spherical cap.  Its angular extent along the
    great circle through the origin direction runs between the latitudes of
    the two radial endpoints ``|a| - r`` and ``|a| + r`` (the first signed),
    giving cap area ``2 pi (1 - cos alpha)`` with
    ``alpha = atan(|a| + r) - atan(|a| - r)``.

    Evaluated as ``4 pi sin^2(alpha/2)`` with the difference of arctangents
    collapsed through atan2; the textbook form loses the area entirely to
    cancellation once ``alpha`` drops below the cosine's representable gap.
    """
    s = abs(disk.center)
    r = disk.radius
    alpha = math.atan2(2.0 * r, 1.0 + s * s - r * r)
    return 4.0 * math.pi * math.sin(0.5 * alpha) ** 2


def annulus_spherical_area(ann: Annulus) -> float:
    # difference of the two cap complements, combined over a common
    # denominator so distant annuli keep full relative precision
    s2 = ann.inner**2
    return 12.0 * math.pi * s2 / ((1.0 + s2) * (1.0 + 4.0 * s2))


# ----------------------------------------------------------------------------
# square-root branch tracking


def sqrt_branch_along_path(
    p: Polynomial,
    path: list[complex],
    seed: complex,
    *,
    max_arg_step: float = 0.3,
) -> list[tuple[complex, complex]]:
    """Continue a branch of sqrt(p) along a polyline.

    ``seed`` must square to ``p(path[0])``.  The branch is tracked by
    choosing, at each sample, the square root nearest the previous value;
    steps are subdivided until consecutive samples differ by less than
    ``max_arg_step`` radians in argument.  Raises ``ZeroClearanceViolated``
    when a sample comes within the zero clearance radius of a zero of p.

    Returns the list of ``(z, branch_value)`` samples, endpoints included.
    """
    if len(path) < 2:
        raise ValueError("path needs at least two vertices")
    z0 = complex(path[0])
    p0 = p(z0)
    if abs(p0) < zero_clearance(z0):
        raise ZeroClearanceViolated(f"p vanishes at path start {z0}")
    v = complex(seed)
    if abs(v * v - p0) > 1e-6 * (1.0 + abs(p0)):
        raise ValueError("seed does not square to p at the path start")

    samples: list[tuple[complex, complex]] = [(z0, v)]
    cur = z0
    for vertex in path[1:]:
        pending = [complex(vertex)]
        while pending:
            zt = pending[-1]
            pz = p(zt)
            if abs(pz) < zero_clearance(zt):
                raise ZeroClearanceViolated(f"p within clearance of zero near {zt}")
            w = cmath.sqrt(pz)
            s = w if abs(w - v) <= abs(-w - v) else -w
            if abs(cmath.phase(s / v)) > max_arg_step:
                if abs(zt - cur) <= 1e-13 * (1.0 + abs(zt)):
                    raise ZeroClearanceViolated(
                        f"branch of sqrt(p) not continuable through {zt}"
                    )
                pending.append(0.5 * (cur + zt))
                continue
            pending.pop()
            samples.append((zt, s))
            v = s
            cur = zt
    return samples
