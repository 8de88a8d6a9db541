"""
Seeded Random Configurations

Random curves, Ernst pairs, generic surface points and admissible solutions for
the identity suite. Every sampler takes a numpy Generator so a suite run is
reproducible from one seed.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from ernst_theta.config import settings
from ernst_theta.exceptions import BranchCollision, CurveError, ErnstThetaError
from ernst_theta.logger import get_logger
from ernst_theta.solution.ernst import ErnstSolution, admissible_characteristics, evaluate
from ernst_theta.surface.curve import GeneralCurve, SurfacePoint, new_ernst_curve, new_general_curve, segment_distance

logger = get_logger(__name__)

Pair = Tuple[complex, complex]

MAX_ATTEMPTS = 200


def make_rng(seed: Optional[int] = None) -> np.random.Generator:
    return np.random.default_rng(settings.seed if seed is None else seed)


def _min_distance(points: Sequence[complex]) -> float:
    points = np.asarray(points, dtype=complex)
    diff = np.abs(points[:, None] - points[None, :])
    diff[np.diag_indices(len(points))] = np.inf
    return float(diff.min())


def sample_general_curve(
    rng: np.random.Generator,
    genus: int,
    box: Optional[float] = None,
    min_separation: float = 0.3,
) -> GeneralCurve:
    """
    Curve with 2g+2 branch points uniform in [−box, box]².

    Draws are rejected until the points are ``min_separation`` apart and the
    cuts are disjoint.

    Raises:
        BranchCollision: If no admissible draw is found
    """
    box = box or settings.random_box
    for _ in range(MAX_ATTEMPTS):
        raw = rng.uniform(-box, box, size=(2 * genus + 2, 2))
        points = raw[:, 0] + 1j * raw[:, 1]
        if _min_distance(points) < min_separation:
            continue
        try:
            return new_general_curve(points)
        except CurveError:
            continue
    raise BranchCollision("Could not sample a curve", details={"genus": genus, "box": box})


def sample_pairs(
    rng: np.random.Generator,
    genus: int,
    box: Optional[float] = None,
    min_separation: float = 0.3,
) -> List[Pair]:
    """
    g pairs, each conjugate (|Im| > 0.2) or real, with disjoint cuts.

    Raises:
        BranchCollision: If no admissible draw is found
    """
    box = box or settings.random_box
    probe = complex(2.0 * box + 1.0, -1.0)
    for _ in range(MAX_ATTEMPTS):
        pairs: List[Pair] = []
        for _ in range(genus):
            if rng.random() < 0.5:
                e = complex(rng.uniform(-box, box), rng.uniform(0.2, box) * rng.choice([-1.0, 1.0]))
                pairs.append((e, e.conjugate()))
            else:
                x1, x2 = np.sort(rng.uniform(-box, box, size=2))
                pairs.append((complex(x1), complex(x2)))
        points = [x for pair in pairs for x in pair]
        if _min_distance(points) < min_separation:
            continue
        try:
            new_ernst_curve(probe, pairs)
        except CurveError:
            continue
        return pairs
    raise BranchCollision("Could not sample Ernst pairs", details={"genus": genus, "box": box})


def sample_generic_points(
    rng: np.random.Generator,
    curve: GeneralCurve,
    count: int,
    clearance: float = 0.2,
) -> List[SurfacePoint]:
    """
    Finite points off the cuts, ``clearance`` away from every cut and from each other.

    Sheets are drawn at random.
    """
    reach = float(np.max(np.abs(curve.branch_points))) + 1.0
    points: List[complex] = []
    for _ in range(MAX_ATTEMPTS * count):
        if len(points) == count:
            break
        lam = complex(rng.uniform(-reach, reach), rng.uniform(-reach, reach))
        if any(segment_distance(lam, lam, cut.start, cut.end) < clearance for cut in curve.cuts):
            continue
        if any(abs(lam - other) < clearance for other in points):
            continue
        points.append(lam)
    if len(points) < count:
        raise BranchCollision("Could not place generic points", details={"count": count})
    sheets = rng.choice([-1, 1], size=count)
    return [SurfacePoint.finite(lam, int(s)) for lam, s in zip(points, sheets)]


def sample_xi(rng: np.random.Generator, pairs: Sequence[Pair], clearance: float = 0.4) -> complex:
    """
    ξ = ζ − iρ with ρ in [0.3, 2] and ζ within one unit of the pairs' span.

    ξ may lie between, above or beneath the pairs; draws whose cut [ξ, ξ̄]
    comes within ``clearance`` of a pair's cut are rejected.

    Raises:
        BranchCollision: If no admissible draw is found
    """
    reals = [x.real for pair in pairs for x in pair]
    low, high = min(reals) - 1.0, max(reals) + 1.0
    for _ in range(MAX_ATTEMPTS):
        xi = complex(rng.uniform(low, high), -rng.uniform(0.3, 2.0))
        if all(segment_distance(xi, xi.conjugate(), e, f) >= clearance for e, f in pairs):
            return xi
    raise BranchCollision("Could not place xi off the cuts", details={"pairs": len(pairs)})


def sample_xi_near(
    rng: np.random.Generator,
    pairs: Sequence[Pair],
    xi: complex,
    count: int,
    reach: float = 0.5,
    clearance: float = 0.4,
) -> List[complex]:
    """
    ``count`` points ξ' within ``reach`` of ``xi`` that stay in its strip.

    Every vertical line through a pair's cut is a barrier for ξ, so the points
    keep ζ' on the same side of each pair as ζ and ρ' above 0.3.

    Raises:
        BranchCollision: If the strip leaves no room for the points
    """
    xi = complex(xi)
    points: List[complex] = []
    for _ in range(MAX_ATTEMPTS * count):
        if len(points) == count:
            return points
        candidate = complex(
            xi.real + rng.uniform(-reach, reach),
            min(-0.3, xi.imag + rng.uniform(-reach, reach)),
        )
        same_side = all(
            (min(e.real, f.real) - xi.real) * (min(e.real, f.real) - candidate.real) > 0
            and (max(e.real, f.real) - xi.real) * (max(e.real, f.real) - candidate.real) > 0
            for e, f in pairs
        )
        clear = all(
            segment_distance(candidate, candidate.conjugate(), e, f) >= clearance for e, f in pairs
        )
        if same_side and clear:
            points.append(candidate)
    if len(points) < count:
        raise BranchCollision("Could not place points near xi", details={"xi": xi, "count": count})
    return points


def sample_solution(
    rng: np.random.Generator,
    genus: int,
    quad_order: Optional[int] = None,
    corrupt_b: float = 0.0,
) -> Tuple[ErnstSolution, complex]:
    """
    Admissible solution together with a regular point ξ.

    The characteristics are p = 0, q = −h/4 + i·shift with a random shift, fixed
    at ξ, which may lie anywhere off the cuts; draws with a singular ξ are
    rejected.

    Raises:
        BranchCollision: If no admissible draw is found
    """
    for _ in range(MAX_ATTEMPTS // 10):
        pairs = sample_pairs(rng, genus)
        xi = sample_xi(rng, pairs)
        shift = rng.uniform(-0.3, 0.3, size=genus)
        try:
            chars = admissible_characteristics(new_ernst_curve(xi, pairs), shift)
            sol = ErnstSolution(pairs, chars, quad_order=quad_order, probe_xi=xi, corrupt_b=corrupt_b)
            evaluate(sol, xi)
            if not corrupt_b:
                sol.signs
        except ErnstThetaError as exc:
            logger.debug("Rejected random solution", extra={"reason": exc.message, "xi": xi})
            continue
        return sol, xi
    raise BranchCollision("Could not sample a regular solution", details={"genus": genus})
