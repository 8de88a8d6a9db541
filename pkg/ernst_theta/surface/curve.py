"""
Hyperelliptic Curves

Curves μ² = Π(λ − λ_m) with 2g+2 branch points, the Ernst family with branch set
{ξ, ξ̄, E_m, F_m}, points on the two-sheeted cover and the cut system that fixes
the homology basis.

Sheet convention: on sheet + the function μ is the product of one factor per
cut, s_j(λ) = (λ − a_j)·√((λ − b_j)/(λ − a_j)), each analytic off its own cut
[a_j, b_j] and asymptotic to λ − (a_j + b_j)/2. Hence μ/λ^{g+1} → +1 at ∞⁺ and
μ is single valued on ℂ minus the cuts.
"""

import hashlib
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ernst_theta.config import settings
from ernst_theta.exceptions import (
    BranchCollision,
    DuplicateBranchPoint,
    OddBranchCount,
    OnAxis,
    RealityViolation,
)
from ernst_theta.logger import get_logger

logger = get_logger(__name__)


# ============================================================================
# GEOMETRY HELPERS
# ============================================================================


def _point_segment_distance(p: complex, a: complex, b: complex) -> float:
    d = b - a
    if d == 0:
        return abs(p - a)
    t = ((p - a) * d.conjugate()).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * d))


def _cross(u: complex, v: complex) -> float:
    return (u.conjugate() * v).imag


def segments_cross(p: complex, q: complex, a: complex, b: complex) -> bool:
    """True if the closed segments [p, q] and [a, b] share a point."""
    d1 = _cross(q - p, a - p)
    d2 = _cross(q - p, b - p)
    d3 = _cross(b - a, p - a)
    d4 = _cross(b - a, q - a)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0:
        return True
    scale = max(abs(q - p), abs(b - a), 1e-300)
    eps = 1e-14 * scale * scale
    if abs(d1) <= eps and _point_segment_distance(a, p, q) <= 1e-14 * scale:
        return True
    if abs(d2) <= eps and _point_segment_distance(b, p, q) <= 1e-14 * scale:
        return True
    if abs(d3) <= eps and _point_segment_distance(p, a, b) <= 1e-14 * scale:
        return True
    if abs(d4) <= eps and _point_segment_distance(q, a, b) <= 1e-14 * scale:
        return True
    return False


def segment_distance(p: complex, q: complex, a: complex, b: complex) -> float:
    """Euclidean distance between the segments [p, q] and [a, b]."""
    if segments_cross(p, q, a, b):
        return 0.0
    return min(
        _point_segment_distance(p, a, b),
        _point_segment_distance(q, a, b),
        _point_segment_distance(a, p, q),
        _point_segment_distance(b, p, q),
    )


# ============================================================================
# DOMAIN TYPES
# ============================================================================


@dataclass(frozen=True)
class Cut:
    """Straight branch cut from ``start`` to ``end``."""

    start: complex
    end: complex

    @property
    def mid(self) -> complex:
        return 0.5 * (self.start + self.end)

    @property
    def half(self) -> complex:
        return 0.5 * (self.end - self.start)

    @property
    def length(self) -> float:
        return abs(self.end - self.start)

    def factor(self, lam: np.ndarray) -> np.ndarray:
        """Sheet-+ factor s(λ) of μ belonging to this cut (undefined on the cut itself)."""
        lam = np.asarray(lam, dtype=complex)
        return (lam - self.start) * np.sqrt((lam - self.end) / (lam - self.start))

    def bank(self, t: np.ndarray, side: int = -1) -> Tuple[np.ndarray, np.ndarray]:
        """
        Boundary values along the cut at λ = mid + half·sin t.

        Args:
            t: Parameter values in [-π/2, π/2]
            side: +1 for the left bank (seen walking start -> end), -1 for the right bank

        Returns:
            (λ, s(λ)) on the requested bank
        """
        lam = self.mid + self.half * np.sin(t)
        return lam, side * 1j * self.half * np.cos(t)

    def distance_to(self, other: "Cut") -> float:
        return segment_distance(self.start, self.end, other.start, other.end)


@dataclass(frozen=True)
class SurfacePoint:
    """
    Point on the two-sheeted cover.

    A finite point is (λ, sheet); a branch point carries its index into the
    curve's branch list and always sheet +1; infinity has ``lam is None``.
    """

    lam: Optional[complex]
    sheet: int = 1
    branch_index: Optional[int] = None

    @classmethod
    def finite(cls, lam: complex, sheet: int = 1) -> "SurfacePoint":
        return cls(complex(lam), 1 if sheet >= 0 else -1)

    @classmethod
    def infinity(cls, sheet: int) -> "SurfacePoint":
        return cls(None, 1 if sheet >= 0 else -1)

    @property
    def is_infinity(self) -> bool:
        return self.lam is None

    @property
    def is_branch(self) -> bool:
        return self.branch_index is not None

    def involution(self) -> "SurfacePoint":
        """Image under the hyperelliptic involution (λ, μ) -> (λ, -μ)."""
        if self.is_branch:
            return self
        return SurfacePoint(self.lam, -self.sheet)

    def label(self) -> str:
        sign = "+" if self.sheet > 0 else "-"
        if self.is_infinity:
            return f"inf{sign}"
        if self.is_branch:
            return f"P{self.branch_index}"
        return f"({self.lam.real:.6g}{self.lam.imag:+.6g}i){sign}"


@dataclass
class HomologySpec:
    """
    Cut system and cycle description.

    a_α encircles cut α counter-clockwise (α = 1..g). b_α leaves the base point
    (first endpoint of cut 0) on sheet +, reaches the first endpoint of cut α and
    returns on sheet −. ``correction`` is the integer upper-triangular matrix of
    b-cycle re-routings that makes B exactly symmetric and ``intersections`` the
    matrix a_α∘b_β counted on the paths the b-periods were integrated along;
    both are filled by compute_periods.
    """

    cuts: Tuple[Cut, ...]
    correction: Optional[np.ndarray] = field(default=None, compare=False)
    intersections: Optional[np.ndarray] = field(default=None, compare=False)

    @property
    def genus(self) -> int:
        return len(self.cuts) - 1

    @property
    def base_point(self) -> complex:
        return self.cuts[0].start

    def b_target(self, alpha: int) -> complex:
        """Endpoint on cut ``alpha`` (1-based) reached by b_α."""
        return self.cuts[alpha].start

    def intersection_matrix(self, b_paths: Sequence[Sequence[complex]], radius: float) -> np.ndarray:
        """
        Intersection numbers a_α∘b_β counted on realized b-paths.

        ``b_paths[β - 1]`` holds the sheet-+ vertices of b_β. a_α is the boundary
        of the ``radius`` neighbourhood of cut α on sheet +; each step of the
        path into that neighbourhood counts +1 and each step out of it −1. The
        sheet − leg runs on the other sheet and never meets a_α. Paths must keep
        more than ``radius`` from every cut between vertices.
        """
        g = self.genus
        matrix = np.zeros((g, len(b_paths)), dtype=int)
        for beta, vertices in enumerate(b_paths):
            for alpha in range(1, g + 1):
                cut = self.cuts[alpha]
                inside = [segment_distance(v, v, cut.start, cut.end) <= radius for v in vertices]
                matrix[alpha - 1, beta] = sum(int(b) - int(a) for a, b in zip(inside[:-1], inside[1:]))
        return matrix


# ============================================================================
# CURVES
# ============================================================================


class GeneralCurve:
    """
    Hyperelliptic curve with 2g+2 distinct branch points.

    Branch points are stored cut by cut: ``branch_points[2j]`` and
    ``branch_points[2j+1]`` are the endpoints of cut j. Immutable after
    construction.
    """

    def __init__(self, cuts: Sequence[Cut], delta_sep: float):
        self.cuts: Tuple[Cut, ...] = tuple(cuts)
        self.genus: int = len(self.cuts) - 1
        self.delta_sep = delta_sep
        self.branch_points = np.array(
            [p for cut in self.cuts for p in (cut.start, cut.end)], dtype=complex
        )
        self.homology = HomologySpec(self.cuts)
        self._check_cuts_disjoint()

    # ------------------------------------------------------------------
    # construction checks
    # ------------------------------------------------------------------

    def _check_cuts_disjoint(self) -> None:
        for i in range(len(self.cuts)):
            for j in range(i + 1, len(self.cuts)):
                if self.cuts[i].distance_to(self.cuts[j]) <= self.delta_sep:
                    raise BranchCollision(
                        f"Cuts {i} and {j} intersect",
                        details={"cut_i": [self.cuts[i].start, self.cuts[i].end],
                                 "cut_j": [self.cuts[j].start, self.cuts[j].end]},
                    )

    # ------------------------------------------------------------------
    # properties
    # ------------------------------------------------------------------

    @property
    def diameter(self) -> float:
        bp = self.branch_points
        return float(np.max(np.abs(bp[:, None] - bp[None, :])))

    @property
    def base_point(self) -> complex:
        return self.homology.base_point

    @property
    def min_gap(self) -> float:
        """Smallest distance between two different cuts."""
        gaps = [
            self.cuts[i].distance_to(self.cuts[j])
            for i in range(len(self.cuts))
            for j in range(i + 1, len(self.cuts))
        ]
        return min(gaps)

    def fingerprint(self) -> str:
        """Short stable hash of the branch points (12 significant digits)."""
        text = ";".join(f"{p.real:.12e},{p.imag:.12e}" for p in self.branch_points)
        return hashlib.sha1(text.encode("utf-8")).hexdigest()[:12]

    # ------------------------------------------------------------------
    # points
    # ------------------------------------------------------------------

    def branch_point(self, m: int) -> SurfacePoint:
        return SurfacePoint(complex(self.branch_points[m]), 1, m)

    def infinity(self, sheet: int) -> SurfacePoint:
        return SurfacePoint.infinity(sheet)

    def point(self, lam: complex, sheet: int = 1) -> SurfacePoint:
        """Canonical surface point over λ; snaps to a branch point within δ_sep."""
        lam = complex(lam)
        distances = np.abs(self.branch_points - lam)
        m = int(np.argmin(distances))
        if distances[m] <= self.delta_sep:
            return self.branch_point(m)
        return SurfacePoint.finite(lam, sheet)

    def cut_of(self, m: int) -> int:
        return m // 2

    # ------------------------------------------------------------------
    # the function μ
    # ------------------------------------------------------------------

    def mu_plus(self, lam: np.ndarray, skip: Optional[int] = None) -> np.ndarray:
        """μ on sheet + at λ (vectorised), optionally without the factor of cut ``skip``."""
        lam = np.asarray(lam, dtype=complex)
        value = np.ones_like(lam)
        for j, cut in enumerate(self.cuts):
            if j != skip:
                value = value * cut.factor(lam)
        return value

    def mu(self, point: SurfacePoint) -> complex:
        if point.is_infinity:
            raise ValueError("mu is not finite at infinity")
        if point.is_branch:
            return 0j
        return complex(point.sheet * self.mu_plus(np.array([point.lam]))[0])

    def sqrt_at_branch(self, m: int) -> complex:
        """Principal √(Π_{n≠m}(λ_m − λ_n)), the fixed root used for the parameter √(λ−λ_m)."""
        others = np.delete(self.branch_points, m)
        return complex(np.sqrt(np.prod(self.branch_points[m] - others)))

    def polynomial(self, lam: np.ndarray) -> np.ndarray:
        """Π(λ − λ_m)."""
        lam = np.asarray(lam, dtype=complex)
        return np.prod(lam[..., None] - self.branch_points, axis=-1)

    def with_branch_point(self, m: int, value: complex) -> "GeneralCurve":
        """Copy of the curve with branch point m moved, cut topology unchanged."""
        cuts: List[Cut] = list(self.cuts)
        j = self.cut_of(m)
        cut = cuts[j]
        cuts[j] = Cut(complex(value), cut.end) if m % 2 == 0 else Cut(cut.start, complex(value))
        return GeneralCurve(cuts, self.delta_sep)

    def __repr__(self) -> str:
        return f"GeneralCurve(genus={self.genus}, fingerprint={self.fingerprint()})"


class ErnstCurve(GeneralCurve):
    """
    The ξ-dependent curve with branch set {ξ, ξ̄, E_m, F_m}.

    Cut 0 is [ξ, ξ̄] (vertical, oriented upwards since ξ = ζ − iρ with ρ > 0);
    cut m is [E_m, F_m].
    """

    def __init__(self, xi: complex, pairs: Sequence[Tuple[complex, complex]], delta_sep: float):
        self.xi = complex(xi)
        self.pairs: Tuple[Tuple[complex, complex], ...] = tuple(
            (complex(e), complex(f)) for e, f in pairs
        )
        cuts = [Cut(self.xi, self.xi.conjugate())] + [Cut(e, f) for e, f in self.pairs]
        super().__init__(cuts, delta_sep)

    @property
    def rho(self) -> float:
        return -self.xi.imag

    @property
    def zeta(self) -> float:
        return self.xi.real

    @property
    def xi_point(self) -> SurfacePoint:
        return self.branch_point(0)

    @property
    def xibar_point(self) -> SurfacePoint:
        return self.branch_point(1)

    def at(self, xi: complex) -> "ErnstCurve":
        """Same family member at another ξ."""
        return new_ernst_curve(xi, self.pairs)

    def __repr__(self) -> str:
        return f"ErnstCurve(xi={self.xi}, genus={self.genus})"


# ============================================================================
# CONSTRUCTORS
# ============================================================================


def _separation(points: np.ndarray) -> float:
    diameter = float(np.max(np.abs(points[:, None] - points[None, :]))) if len(points) else 0.0
    return settings.separation_factor * max(diameter, 1.0)


def _check_distinct(points: np.ndarray, delta_sep: float, error_cls) -> None:
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if abs(points[i] - points[j]) <= delta_sep:
                raise error_cls(
                    f"Branch points {i} and {j} coincide",
                    details={"i": points[i], "j": points[j], "delta_sep": delta_sep},
                )


def new_general_curve(branch_points: Sequence[complex]) -> GeneralCurve:
    """
    Build a curve from its branch points.

    Cuts join consecutive points after sorting by (Re, Im).

    Args:
        branch_points: 2g+2 distinct complex numbers

    Returns:
        GeneralCurve: Curve of genus len/2 - 1

    Raises:
        OddBranchCount: If the count is odd or smaller than 4
        DuplicateBranchPoint: If two points lie within δ_sep
        BranchCollision: If the resulting cuts intersect
    """
    points = np.asarray([complex(p) for p in branch_points], dtype=complex)
    if len(points) % 2 == 1 or len(points) < 4:
        raise OddBranchCount(
            f"Need an even number >= 4 of branch points, got {len(points)}",
            details={"count": len(points)},
        )
    delta_sep = _separation(points)
    _check_distinct(points, delta_sep, DuplicateBranchPoint)

    ordered = sorted(points.tolist(), key=lambda z: (z.real, z.imag))
    cuts = [Cut(ordered[i], ordered[i + 1]) for i in range(0, len(ordered), 2)]
    curve = GeneralCurve(cuts, delta_sep)
    logger.debug("Built general curve", extra={"genus": curve.genus})
    return curve


def new_ernst_curve(xi: complex, pairs: Sequence[Tuple[complex, complex]]) -> ErnstCurve:
    """
    Build the Ernst curve at ξ = ζ − iρ.

    Args:
        xi: Complex point with ρ = −Im ξ > 0
        pairs: g pairs (E_m, F_m), each conjugate or both real

    Returns:
        ErnstCurve: Curve of genus len(pairs)

    Raises:
        OnAxis: If ρ <= 0
        RealityViolation: If a pair is neither conjugate nor real
        BranchCollision: If a branch point meets ξ, ξ̄ or another branch point,
            or two cuts intersect
    """
    xi = complex(xi)
    pairs = [(complex(e), complex(f)) for e, f in pairs]
    if len(pairs) < 1:
        raise OddBranchCount("An Ernst curve needs at least one pair", details={"count": 2})
    if -xi.imag <= 0.0:
        raise OnAxis("xi must satisfy rho = -Im xi > 0", details={"xi": xi})

    for index, (e, f) in enumerate(pairs):
        scale = max(abs(e), abs(f), 1.0)
        conjugate = abs(e - f.conjugate()) <= 1e-12 * scale
        real = abs(e.imag) <= 1e-12 * scale and abs(f.imag) <= 1e-12 * scale
        if not (conjugate or real):
            raise RealityViolation(
                f"Pair {index} is neither conjugate nor real",
                details={"E": e, "F": f},
            )

    points = np.array([xi, xi.conjugate()] + [p for pair in pairs for p in pair], dtype=complex)
    delta_sep = _separation(points)
    _check_distinct(points, delta_sep, BranchCollision)
    return ErnstCurve(xi, pairs, delta_sep)


def mu(curve: GeneralCurve, point: SurfacePoint) -> complex:
    """μ at a point of the curve; 0 at branch points."""
    return curve.mu(point)
