"""
Integration Paths

Cut-avoiding polylines in the λ-plane and their quadrature rules. A path never
crosses a cut; it may start or end at a branch point. All path integrals are
evaluated with the substitution λ = mid + half·sin t (segments) or
λ = P + d·x/(1 − x), x = (1 + sin t)/2 (rays to infinity), which removes the
inverse square-root singularity at branch-point endpoints.
"""

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from ernst_theta.exceptions import PathThroughBranchPoint
from ernst_theta.logger import get_logger
from ernst_theta.surface.curve import Cut, GeneralCurve, segment_distance

logger = get_logger(__name__)

MIN_ANGLE = 0.1


@lru_cache(maxsize=32)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-π/2, π/2] (cached per order)."""
    x, w = leggauss(order)
    return 0.5 * np.pi * x, 0.5 * np.pi * w


@dataclass(frozen=True)
class Path:
    """Polyline through ``vertices``; a final ray in direction ``ray`` when set."""

    vertices: Tuple[complex, ...]
    ray: Optional[complex] = None

    @property
    def start(self) -> complex:
        return self.vertices[0]

    def describe(self) -> str:
        text = " -> ".join(f"{v.real:.4g}{v.imag:+.4g}i" for v in self.vertices)
        return text + (f" -> inf({self.ray.real:+.3g}{self.ray.imag:+.3g}i)" if self.ray else "")


# ============================================================================
# QUADRATURE RULES
# ============================================================================


def segment_rule(p: complex, q: complex, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes λ_k and weights w_k (dλ included) for ∫_p^q f(λ) dλ."""
    t, w = gauss_legendre(order)
    mid, half = 0.5 * (p + q), 0.5 * (q - p)
    return mid + half * np.sin(t), w * half * np.cos(t)


def ray_rule(p: complex, direction: complex, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ∫ from p to ∞ along p + direction·[0, ∞)."""
    t, w = gauss_legendre(order)
    x = 0.5 * (1.0 + np.sin(t))
    one_minus = 0.5 * (1.0 - np.sin(t))
    lam = p + direction * x / one_minus
    weights = w * direction * 0.5 * np.cos(t) / one_minus**2
    return lam, weights


def path_rule(path: Path, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Concatenated quadrature rule of a whole path."""
    nodes: List[np.ndarray] = []
    weights: List[np.ndarray] = []
    for p, q in zip(path.vertices[:-1], path.vertices[1:]):
        lam, w = segment_rule(p, q, order)
        nodes.append(lam)
        weights.append(w)
    if path.ray is not None:
        lam, w = ray_rule(path.vertices[-1], path.ray, order)
        nodes.append(lam)
        weights.append(w)
    if not nodes:
        return np.zeros(0, dtype=complex), np.zeros(0, dtype=complex)
    return np.concatenate(nodes), np.concatenate(weights)


# ============================================================================
# PLANNER
# ============================================================================


class PathPlanner:
    """
    Deterministic planner of cut-avoiding paths for one curve.

    Tries the straight segment, then one and two detour waypoints placed around
    the cuts, shortest first.
    """

    def __init__(self, curve: GeneralCurve):
        self.curve = curve
        base = max(curve.diameter, 1.0)
        gap = curve.min_gap
        self.clearances = [
            max(10 * curve.delta_sep, 0.05 * gap),
            max(10 * curve.delta_sep, 0.005 * gap),
        ]
        self.far = 10.0 * (base + float(np.max(np.abs(curve.branch_points))))

    # ------------------------------------------------------------------

    def segment_clear(self, p: complex, q: complex, clearance: float) -> bool:
        if abs(q - p) <= self.curve.delta_sep:
            return True
        for cut in self.curve.cuts:
            shared = None
            for endpoint, other in ((cut.start, cut.end), (cut.end, cut.start)):
                if abs(p - endpoint) <= self.curve.delta_sep:
                    shared = (endpoint, other, q)
                elif abs(q - endpoint) <= self.curve.delta_sep:
                    shared = (endpoint, other, p)
            if shared is not None:
                endpoint, other, free = shared
                direction = free - endpoint
                along = other - endpoint
                angle = abs(np.angle(direction / along))
                if angle < MIN_ANGLE:
                    return False
                if segment_distance(p, q, other, other) < clearance:
                    return False
                continue
            if segment_distance(p, q, cut.start, cut.end) < clearance:
                return False
        return True

    def _polyline_clear(self, vertices: Sequence[complex], clearance: float) -> bool:
        return all(self.segment_clear(a, b, clearance) for a, b in zip(vertices[:-1], vertices[1:]))

    def _waypoints(self, clearance: float) -> List[complex]:
        points: List[complex] = []
        for cut in self.curve.cuts:
            u = (cut.end - cut.start) / cut.length
            n = 1j * u
            for scale in (0.15, 0.6):
                d = max(3.0 * clearance, scale * cut.length)
                points.extend(
                    [
                        cut.start - d * u,
                        cut.end + d * u,
                        cut.mid + d * n,
                        cut.mid - d * n,
                        cut.start - d * u + d * n,
                        cut.start - d * u - d * n,
                        cut.end + d * u + d * n,
                        cut.end + d * u - d * n,
                    ]
                )
        far_from_cuts = [
            w for w in points
            if all(segment_distance(w, w, c.start, c.end) >= clearance for c in self.curve.cuts)
        ]
        return far_from_cuts

    def plan(self, start: complex, end: complex) -> Path:
        """
        Plan a path from ``start`` to ``end`` that does not cross any cut.

        Raises:
            PathThroughBranchPoint: If no admissible path is found
        """
        start, end = complex(start), complex(end)
        if abs(end - start) <= self.curve.delta_sep:
            return Path((start, end))
        for clearance in self.clearances:
            if self.segment_clear(start, end, clearance):
                return Path((start, end))
            waypoints = self._waypoints(clearance)
            singles = sorted(waypoints, key=lambda w: abs(w - start) + abs(end - w))
            for w in singles:
                if self._polyline_clear((start, w, end), clearance):
                    return Path((start, w, end))
            doubles = sorted(
                itertools.permutations(waypoints, 2),
                key=lambda pair: abs(pair[0] - start) + abs(pair[1] - pair[0]) + abs(end - pair[1]),
            )
            for w1, w2 in doubles:
                if self._polyline_clear((start, w1, w2, end), clearance):
                    return Path((start, w1, w2, end))
        raise PathThroughBranchPoint(
            "No cut-avoiding path found",
            details={"start": start, "end": end},
        )

    def plan_ray(self, start: complex, preferred: complex) -> Path:
        """
        Plan a path from ``start`` to infinity, ending in a straight ray.

        Rotations of ``preferred`` are tried first, then detours through waypoints.
        """
        start = complex(start)
        preferred = complex(preferred) / abs(preferred)
        angles = [0.0] + [s * k * np.pi / 12 for k in range(1, 12) for s in (1, -1)] + [np.pi]
        for clearance in self.clearances:
            for angle in angles:
                direction = preferred * np.exp(1j * angle)
                if self.segment_clear(start, start + self.far * direction, clearance):
                    return Path((start,), ray=direction)
            for w in sorted(self._waypoints(clearance), key=lambda w: abs(w - start)):
                if not self.segment_clear(start, w, clearance):
                    continue
                for angle in angles:
                    direction = preferred * np.exp(1j * angle)
                    if self.segment_clear(w, w + self.far * direction, clearance):
                        return Path((start, w), ray=direction)
        raise PathThroughBranchPoint("No cut-avoiding ray found", details={"start": start})


def cut_rule(cut: Cut, order: int, side: int = -1) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Bank rule of a cut: λ_k, the cut's own factor s(λ_k) on that bank, and dλ weights.
    """
    t, w = gauss_legendre(order)
    lam, own = cut.bank(t, side)
    return lam, own, w * cut.half * np.cos(t)
