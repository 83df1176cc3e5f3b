"""One-well radial machinery in desingularized coordinates.

For the density W = r^2 (1 + b r^2) about a single well, the substitution
R = |curve|^2, alpha = 4 * (cumulative polar area) turns the weighted length
into

    Et(R, alpha) = integral  sqrt(1 + b R)/2 * sqrt(R'^2 + alpha'^2),

a Riemannian (non-degenerate) length whose geodesics through the axis R = 0
are parabola graphs

    alpha = f_C1(R) = -(2 C1 / b) sqrt(1 - C1^2 + b R) + D,   |C1| <= 1.

A graph from (R0, 0) to the axis delivers polar area f_C1(0)/4, which is
capped at sqrt(R0)/(2 sqrt(b)): beyond that cap no planar curve attains the
area and the optimal lifted path acquires a vertical segment along the axis.
Mapping a parabola back to the plane yields a logarithmic spiral-like curve
with infinite winding number and infinite Euclidean arclength.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import (GapTooLarge, InvalidC1, InvalidCoefficient,
                     InvalidDensity, NonExistence, NotInNonexistenceRegime)
from .functionals import Curve


@dataclass
class DesingularizedPath:
    """Polyline in (R, alpha) coordinates together with the coefficient b."""

    R: np.ndarray
    alpha: np.ndarray
    b: float = 0.0

    def __post_init__(self):
        self.R = np.asarray(self.R, dtype=float)
        self.alpha = np.asarray(self.alpha, dtype=float)
        if self.R.shape != self.alpha.shape or self.R.ndim != 1:
            raise ValueError("R and alpha must be 1-d arrays of equal length")
        if self.R.size < 2:
            raise ValueError("a path needs at least two samples")
        if np.any(self.R < -1e-12):
            raise ValueError("R must be nonnegative")
        self.R = np.maximum(self.R, 0.0)
        same = (np.diff(self.R) == 0.0) & (np.diff(self.alpha) == 0.0)
        if np.any(same):
            raise ValueError("consecutive samples must differ")

    @property
    def samples(self):
        return list(zip(self.R.tolist(), self.alpha.tolist()))


def to_RA(curve: Curve, center, b: float = 0.0) -> DesingularizedPath:
    """Desingularize a planar curve about a center.

    R is the squared distance to the center per vertex; alpha accumulates
    four times the polar area form, segment by segment with the midpoint
    rule (exact on straight segments).
    """
    q = curve.vertices - np.asarray(center, dtype=float)
    if curve.closed:
        q = np.vstack([q, q[:1]])
    R = q[:, 0]**2 + q[:, 1]**2
    mid = 0.5 * (q[:-1] + q[1:])
    seg = np.diff(q, axis=0)
    inc = 2.0 * (mid[:, 0] * seg[:, 1] - mid[:, 1] * seg[:, 0])
    alpha = np.concatenate([[0.0], np.cumsum(inc)])
    # duplicate plane vertices collapse to duplicate samples; drop them
    keep = np.concatenate([[True], (np.diff(R) != 0.0) | (inc != 0.0)])
    return DesingularizedPath(R[keep], alpha[keep], float(b))


def energy_RA(path: DesingularizedPath) -> float:
    """Midpoint-rule value of the desingularized length functional."""
    Rm = 0.5 * (path.R[:-1] + path.R[1:])
    dens = 1.0 + path.b * Rm
    if np.any(dens <= 0.0):
        raise InvalidDensity("1 + b R is not positive at a segment midpoint")
    ds = np.hypot(np.diff(path.R), np.diff(path.alpha))
    return float(np.sum(0.5 * np.sqrt(dens) * ds))


def existence_threshold(R0: float, b: float) -> float:
    """Largest attainable |polar area| for a graph path hitting the axis."""
    if b <= 0.0 or R0 <= 0.0:
        raise InvalidCoefficient("threshold requires b > 0 and R0 > 0")
    return math.sqrt(R0) / (2.0 * math.sqrt(b))


def delivered_area(C1: float, R0: float, b: float) -> float:
    """Polar area f_C1(0)/4 delivered by the parabola graph on [0, R0]."""
    a = math.sqrt(max(0.0, 1.0 - C1 * C1))
    u0 = math.sqrt(a * a + b * R0)
    return C1 * (u0 - a) / (2.0 * b)


def parabola_geodesic(C1: float, b: float, R0: float, n: int) -> DesingularizedPath:
    """Geodesic graph from (R0, 0) to the axis, sampled at n points.

    Sampling is uniform in u = sqrt(1 - C1^2 + b R), in which the graph's
    alpha component is linear, so the polyline hugs the parabola tightly.
    """
    if abs(C1) > 1.0:
        raise InvalidC1(f"|C1| = {abs(C1)} exceeds 1")
    if b <= 0.0 or R0 <= 0.0:
        raise InvalidCoefficient("parabola geodesics require b > 0 and R0 > 0")
    if n < 2:
        raise ValueError("n must be at least 2")
    a = math.sqrt(max(0.0, 1.0 - C1 * C1))
    u0 = math.sqrt(a * a + b * R0)
    u = np.linspace(u0, a, n)
    R = (u * u - a * a) / b
    R[0], R[-1] = R0, 0.0
    alpha = (2.0 * C1 / b) * (u0 - u)
    return DesingularizedPath(R, alpha, b)


def solve_C1_for_area(R0: float, A_tilde: float, b: float) -> float:
    """Invert the odd, strictly increasing map C1 -> delivered polar area."""
    thr = existence_threshold(R0, b)
    if abs(A_tilde) > thr:
        raise NonExistence(
            f"|area| = {abs(A_tilde)} exceeds the attainable cap {thr}")
    if A_tilde == 0.0:
        return 0.0
    if abs(A_tilde) == thr:
        return math.copysign(1.0, A_tilde)
    lo, hi = (0.0, 1.0) if A_tilde > 0.0 else (-1.0, 0.0)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if delivered_area(mid, R0, b) < A_tilde:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14:
            break
    c = 0.5 * (lo + hi)
    # Newton polish; the map is smooth away from |C1| = 1
    for _ in range(3):
        h = 1e-7
        f0 = delivered_area(c, R0, b) - A_tilde
        d = (delivered_area(min(1.0, c + h), R0, b)
             - delivered_area(max(-1.0, c - h), R0, b)) / (2.0 * h)
        if d == 0.0:
            break
        c = min(1.0, max(-1.0, c - f0 / d))
    return c


def lagrange_multiplier_radial(C1: float) -> float:
    """Area-constraint multiplier of the spiral with parameter C1."""
    if abs(C1) > 1.0:
        raise InvalidC1(f"|C1| = {abs(C1)} exceeds 1")
    return 2.0 * C1


def parabola_energy(C1: float, R0: float, b: float) -> float:
    """Exact desingularized length of the parabola graph on [0, R0].

    In the u substitution the integrand is polynomial:
    ((u0^3 - a^3)/3 + C1^2 (u0 - a)) / b with a = sqrt(1 - C1^2).
    """
    if abs(C1) > 1.0:
        raise InvalidC1(f"|C1| = {abs(C1)} exceeds 1")
    if b <= 0.0 or R0 <= 0.0:
        raise InvalidCoefficient("parabola energy requires b > 0 and R0 > 0")
    a = math.sqrt(max(0.0, 1.0 - C1 * C1))
    u0 = math.sqrt(a * a + b * R0)
    return ((u0**3 - a**3) / 3.0 + C1 * C1 * (u0 - a)) / b


def _theta_of_r(r, C1: float, b: float, r_outer: float, theta0: float):
    """Winding angle along the spiral, theta(r_outer) = theta0.

    Integrates d(theta)/dr = -C1 / (r sqrt(1 - C1^2 + b r^2)) in closed form.
    """
    r = np.asarray(r, dtype=float)
    a2 = max(0.0, 1.0 - C1 * C1)
    a = math.sqrt(a2)
    u = np.sqrt(a2 + b * r * r)
    u0 = math.sqrt(a2 + b * r_outer**2)
    if a < 1e-9:
        return theta0 + (C1 / math.sqrt(b)) * (1.0 / r - 1.0 / r_outer)
    return theta0 + (C1 / a) * (np.log((a + u) / r)
                                - math.log((a + u0) / r_outer))


def _r_of_theta(theta, C1: float, b: float, r_outer: float, theta0: float):
    theta = np.asarray(theta, dtype=float)
    a2 = max(0.0, 1.0 - C1 * C1)
    a = math.sqrt(a2)
    if a < 1e-9:
        return 1.0 / (1.0 / r_outer + (math.sqrt(b) / C1) * (theta - theta0))
    u0 = math.sqrt(a2 + b * r_outer**2)
    w = (a / C1) * (theta - theta0) + math.log((a + u0) / r_outer)
    ew = np.exp(w)
    return 2.0 * a / (ew - b / ew)


def spiral_from_C1(C1: float, b: float, r_outer: float, r_inner: float,
                   theta0: float = 0.0, theta_step: float = None) -> Curve:
    """Planar spiral realizing the parabola geodesic, traversed inward.

    The curve starts on the circle of radius r_outer at angle theta0 and
    winds down to r_inner (strictly positive: for |C1| = 1 the winding
    diverges like 1/r).  Positive C1 winds counterclockwise going inward.
    Sample points combine a log-spaced radius ladder with a uniform angular
    grid so neither slow spirals nor tight winding are under-resolved.
    """
    if abs(C1) > 1.0:
        raise InvalidC1(f"|C1| = {abs(C1)} exceeds 1")
    if not (0.0 < r_inner < r_outer):
        raise ValueError("need 0 < r_inner < r_outer")
    if b <= 0.0:
        raise InvalidCoefficient("spiral reconstruction requires b > 0")

    n_log = max(2, int(60 * math.log10(r_outer / r_inner)) + 1)
    r = np.geomspace(r_outer, r_inner, n_log)
    if C1 != 0.0:
        th_in = float(_theta_of_r(r_inner, C1, b, r_outer, theta0))
        wind = abs(th_in - theta0)
        if theta_step is None:
            # cap total samples; at the cap the chord deficit per segment
            # is step^2/24, still ~1e-4 for the deepest tangent spirals
            theta_step = max(5e-3, wind / 2e6)
        n_th = int(wind / theta_step)
        if n_th > 1:
            th = theta0 + np.sign(th_in - theta0) * theta_step * np.arange(1, n_th + 1)
            r_th = _r_of_theta(th, C1, b, r_outer, theta0)
            r = np.concatenate([r, r_th])
    r = np.clip(r, r_inner, r_outer)
    r = np.unique(r)[::-1]
    theta = _theta_of_r(r, C1, b, r_outer, theta0)
    pts = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
    return Curve(pts)


def vertical_segment_resolution(R0: float, A_tilde: float,
                                b: float, n: int = 1024
                                ) -> Tuple[DesingularizedPath, float]:
    """Optimal lifted path when the requested area exceeds the cap.

    Returns the tangent |C1| = 1 parabola extended by a vertical segment
    along the axis R = 0 carrying the excess area, plus the segment's
    alpha-extent.  The vertical piece sits at the parabola's tangency point;
    position along the axis is cost-free.
    """
    thr = existence_threshold(R0, b)
    if abs(A_tilde) <= thr:
        raise NotInNonexistenceRegime(
            f"|area| = {abs(A_tilde)} is attainable (cap {thr})")
    s = math.copysign(1.0, A_tilde)
    base = parabola_geodesic(s, b, R0, n)
    extent = 4.0 * (abs(A_tilde) - thr)
    R = np.concatenate([base.R, [0.0]])
    alpha = np.concatenate([base.alpha, [4.0 * A_tilde]])
    return DesingularizedPath(R, alpha, b), extent


def compare_b_negative(b: float, alpha_gap: float) -> Tuple[float, float]:
    """Cost of bridging an axis gap by parabola versus vertical segment, b < 0.

    With negative b the density decreases away from the axis, so the geodesic
    joining (0, 0) to (0, alpha_gap) bows into R > 0: it is the symmetric
    parabola pair with the larger admissible C1 root.  Returns both costs;
    the parabola is strictly cheaper for every admissible gap.
    """
    if not (-1.0 < b < 0.0):
        raise InvalidCoefficient("comparison requires -1 < b < 0")
    if alpha_gap <= 0.0:
        raise ValueError("alpha_gap must be positive")
    g = abs(b) * alpha_gap / 4.0
    if g > 0.5:
        raise GapTooLarge(
            f"alpha_gap = {alpha_gap} exceeds the geodesic reach 2/|b| = {2.0 / abs(b)}")
    c1_sq = 0.5 * (1.0 + math.sqrt(1.0 - 4.0 * g * g))
    C1 = math.sqrt(c1_sq)
    a = math.sqrt(1.0 - c1_sq)
    parabola_cost = (2.0 / abs(b)) * (c1_sq * a + a**3 / 3.0)
    vertical_cost = alpha_gap / 2.0
    return parabola_cost, vertical_cost


def figure1_bundle(R0: float, A_tilde: float, b: float) -> dict:
    """Summary dictionary for the existence/non-existence picture.

    Below the area cap: the minimizing parabola and its cost.  Above it:
    the tangent |C1| = 1 parabola plus a vertical segment whose alpha-extent
    carries the excess area at marginal cost 1/2 per unit of alpha.
    """
    thr = existence_threshold(R0, b)
    if abs(A_tilde) <= thr:
        c1 = solve_C1_for_area(R0, A_tilde, b)
        extent = 0.0
    else:
        c1 = math.copysign(1.0, A_tilde)
        extent = 4.0 * (abs(A_tilde) - thr)
    parabola_cost = parabola_energy(c1, R0, b)
    vertical_cost = 0.5 * extent
    return {"b": b, "R0": R0, "A_tilde": A_tilde, "C1": c1,
            "threshold": thr, "vertical_extent": extent,
            "parabola_cost": parabola_cost, "vertical_cost": vertical_cost,
            "total_cost": parabola_cost + vertical_cost}


def path_to_csv(path: DesingularizedPath) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["R", "alpha"])
    for R, alpha in zip(path.R, path.alpha):
        writer.writerow([repr(float(R)), repr(float(alpha))])
    return buf.getvalue()


def path_from_csv(text: str, b: float = 0.0) -> DesingularizedPath:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["R", "alpha"]:
        raise ValueError("expected header R,alpha")
    data = np.array([[float(x) for x in row] for row in rows[1:]])
    return DesingularizedPath(data[:, 0], data[:, 1], b)
