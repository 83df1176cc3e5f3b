"""Discrete curves and the two functionals of the constrained problem.

A curve is a polyline.  The weighted length ("energy") uses the midpoint
rule per segment,

    E = sum_k F(midpoint_k) * |segment_k|,

and the signed area uses the midpoint rule for the 1-form p1 dp2, which is
exact on straight segments.  For closed polylines the area quadrature
reproduces the shoelace value exactly, and the midpoint rule for the polar
form (1/2) r^2 dtheta about any center is exact as well, so the two area
notions differ only by the endpoint term of an exact 1-form.

Accumulations (lift, running area) use a single cumulative-sum pass so the
final lifted height and the reported area agree bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import ZeroDensityInterior
from .potential import Potential


@dataclass
class Curve:
    """Polyline in the plane; closed means the last vertex joins the first
    implicitly (first and last stored vertices are distinct)."""

    vertices: np.ndarray
    closed: bool = False

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 2:
            raise ValueError("vertices must have shape (n >= 2, 2)")
        self.vertices = v

    @property
    def n(self) -> int:
        return self.vertices.shape[0]

    def segments(self) -> np.ndarray:
        v = self.vertices
        if self.closed:
            return np.vstack([v[1:] - v[:-1], v[:1] - v[-1:]])
        return v[1:] - v[:-1]

    def midpoints(self) -> np.ndarray:
        v = self.vertices
        if self.closed:
            return np.vstack([0.5 * (v[1:] + v[:-1]), 0.5 * (v[:1] + v[-1:])])
        return 0.5 * (v[1:] + v[:-1])


@dataclass
class Curve3:
    """Polyline in R^3; the horizontal projection of a lifted plane curve."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3 or v.shape[0] < 2:
            raise ValueError("vertices must have shape (n >= 2, 3)")
        self.vertices = v

    def project(self) -> Curve:
        return Curve(self.vertices[:, :2].copy(), closed=False)

    @property
    def third_delta(self) -> float:
        return float(self.vertices[-1, 2] - self.vertices[0, 2])


# ---------------------------------------------------------------------------
# functionals
# ---------------------------------------------------------------------------

def euclid_length(curve: Curve) -> float:
    return float(np.linalg.norm(curve.segments(), axis=1).sum())


def energy(curve: Curve, potential: Potential) -> float:
    """Weighted length integral F ds by the midpoint rule."""
    seg = curve.segments()
    mid = curve.midpoints()
    f = potential.eval_F(mid)
    return float((f * np.linalg.norm(seg, axis=1)).sum())


def _area_increments(curve: Curve) -> np.ndarray:
    """Per-segment midpoint-rule increments of p1 dp2 (exact on segments)."""
    seg = curve.segments()
    mid = curve.midpoints()
    return mid[:, 0] * seg[:, 1]


def area(curve: Curve) -> float:
    """Signed area integral of p1 dp2 along the curve.

    For a closed polyline this equals the shoelace area.  Computed as the
    tail of a cumulative sum so that lift() is consistent bit for bit.
    """
    inc = _area_increments(curve)
    return float(np.cumsum(inc)[-1])


def area_polar(curve: Curve, center=(0.0, 0.0)) -> float:
    """Signed integral of (1/2) r^2 dtheta about `center`.

    The per-segment integrand is linear in the parameter, so the midpoint
    rule is exact here too; on closed curves the value coincides with
    area() because the difference of the two forms is exact.
    """
    c = np.asarray(center, dtype=float)
    seg = curve.segments()
    mid = curve.midpoints() - c
    inc = 0.5 * (mid[:, 0] * seg[:, 1] - mid[:, 1] * seg[:, 0])
    return float(np.cumsum(inc)[-1])


def lift(curve: Curve, p3_start: float = 0.0) -> Curve3:
    """Horizontal lift: third coordinate accumulates the area increments.

    A closed input is traversed once around, so the lifted polyline has one
    more vertex than the input and its height gain equals area(curve).
    """
    inc = _area_increments(curve)
    p3 = p3_start + np.concatenate([[0.0], np.cumsum(inc)])
    v = curve.vertices
    if curve.closed:
        xy = np.vstack([v, v[:1]])
    else:
        xy = v
    return Curve3(np.column_stack([xy, p3]))


# ---------------------------------------------------------------------------
# reparametrization
# ---------------------------------------------------------------------------

def _resample_by_weight(curve: Curve, weights: np.ndarray, n_out: int) -> Curve:
    """Place n_out vertices along the polyline equidistributed in the
    cumulative weight (one weight per segment)."""
    v = curve.vertices
    if curve.closed:
        v = np.vstack([v, v[:1]])
    cum = np.concatenate([[0.0], np.cumsum(weights)])
    total = cum[-1]
    if total <= 0.0:
        raise ValueError("cannot resample a curve of zero total weight")
    if curve.closed:
        targets = np.linspace(0.0, total, n_out, endpoint=False)
    else:
        targets = np.linspace(0.0, total, n_out)
    idx = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0,
                  len(weights) - 1)
    w = weights[idx]
    frac = np.where(w > 0.0, (targets - cum[idx]) / np.where(w > 0, w, 1.0), 0.0)
    pts = v[idx] + frac[:, None] * (v[idx + 1] - v[idx])
    if not curve.closed:
        pts[0] = v[0]
        pts[-1] = v[-1]
    return Curve(pts, closed=curve.closed)


def _check_interior_density(curve: Curve, potential: Potential):
    """Interior vertices must not sit on a zero of F unless it is a well
    (well endpoints are fine; the quadrature never evaluates F there)."""
    interior = curve.vertices if curve.closed else curve.vertices[1:-1]
    if interior.shape[0] == 0:
        return
    w = potential.eval_W(interior)
    bad = np.flatnonzero(w <= 0.0)
    for i in bad:
        p = interior[i]
        if not any(np.allclose(p, well.location, atol=1e-12)
                   for well in potential.wells):
            raise ZeroDensityInterior(
                f"density vanishes at interior vertex {p}")


def reparam_degenerate_arclength(curve: Curve, potential: Potential,
                                 n_out: int) -> Curve:
    """Resample so vertices are equidistributed in the weighted length F ds.

    Endpoint segments touching a well get their one-sided midpoint weight,
    which is positive, so curves ending at wells are handled naturally.
    """
    _check_interior_density(curve, potential)
    seg = curve.segments()
    mid = curve.midpoints()
    w = potential.eval_F(mid) * np.linalg.norm(seg, axis=1)
    return _resample_by_weight(curve, w, n_out)


def reparam_equipartition(curve: Curve, potential: Potential, n_out: int,
                          w_cut: Optional[float] = None
                          ) -> Tuple[Curve, np.ndarray]:
    """Resample in the parameter y defined by dy = ds / sqrt(2 W).

    y diverges logarithmically into a well, so the curve is first truncated
    where W < w_cut (default 1e-8 times the max of W over the curve); the
    returned uniform y grid is centered so y = 0 sits mid-profile.  Doubling
    the number of decades kept (squaring the cut radius) doubles the y span.
    """
    _check_interior_density(curve, potential)
    v = curve.vertices
    if curve.closed:
        raise ValueError("equipartition reparametrization expects an arc")
    w_vert = potential.eval_W(v)
    if w_cut is None:
        w_cut = 1e-8 * float(w_vert.max())

    # Clip each end while its vertices sit below the cut.
    lo = 0
    while lo < len(v) - 1 and w_vert[lo] < w_cut:
        lo += 1
    hi = len(v) - 1
    while hi > lo and w_vert[hi] < w_cut:
        hi -= 1
    if hi - lo < 1:
        raise ValueError("w_cut removes the whole curve")
    vv = v[lo:hi + 1]

    trimmed = Curve(vv.copy())
    seg = trimmed.segments()
    mid = trimmed.midpoints()
    w_mid = np.maximum(potential.eval_W(mid), w_cut * 1e-6)
    dy = np.linalg.norm(seg, axis=1) / np.sqrt(2.0 * w_mid)
    out = _resample_by_weight(trimmed, dy, n_out)
    span = float(dy.sum())
    y = np.linspace(-0.5 * span, 0.5 * span, n_out)
    return out, y


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def curve_to_csv(curve: Curve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["p1", "p2"])
    for p in curve.vertices:
        writer.writerow([repr(float(p[0])), repr(float(p[1]))])
    return buf.getvalue()


def curve3_to_csv(curve: Curve3) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["p1", "p2", "p3"])
    for p in curve.vertices:
        writer.writerow([repr(float(p[0])), repr(float(p[1])), repr(float(p[2]))])
    return buf.getvalue()


def curve_from_csv(text: str):
    """Read a curve from CSV with header p1,p2 or p1,p2,p3."""
    rows = list(csv.reader(io.StringIO(text)))
    header = [h.strip() for h in rows[0]]
    data = np.array([[float(x) for x in row] for row in rows[1:] if row])
    if header == ["p1", "p2"]:
        return Curve(data)
    if header == ["p1", "p2", "p3"]:
        return Curve3(data)
    raise ValueError(f"unrecognized curve header {header}")


def curve_to_json_dict(curve: Curve) -> dict:
    return {"closed": bool(curve.closed),
            "vertices": [[float(a), float(b)] for a, b in curve.vertices]}


def curve_from_json_dict(data: dict) -> Curve:
    return Curve(np.asarray(data["vertices"], dtype=float),
                 closed=bool(data.get("closed", False)))


def curve_to_json(curve: Curve) -> str:
    return json.dumps(curve_to_json_dict(curve), sort_keys=True)


def curve_from_json(text: str) -> Curve:
    return curve_from_json_dict(json.loads(text))
