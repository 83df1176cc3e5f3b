"""Closed-form machinery for the homogeneous quadratic density.

With W = l1^2 p1^2 + l2^2 p2^2 and F = sqrt(W), the one-parameter family of
unit-degenerate-speed fields

    V_beta = cos(beta) * Theta - sin(beta) * Rad,
    Theta  = (-l2 p2, l1 p1) / F^2,      Rad = grad(rt) / F^2,
    rt(p)  = (l1 p1^2 + l2 p2^2) / 2,

satisfies |V_beta| * F = 1 identically, and along its integral curves the
level function rt decreases at the constant rate sin(beta).  Consequently an
arc flowing from p0 into the well has weighted length exactly

    L(beta) = rt(p0) / sin(beta),

and the enclosed signed area is a continuous, strictly decreasing function
of beta, which this module inverts numerically to hit a prescribed area.
The closed level set {rt = rt(p0)} is the area-minimizing loop; its weighted
length per unit enclosed area is l1 + l2, which is also the cost rate of a
purely vertical displacement of the lifted third coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NoRoot, NonConvergence, ZeroBeta
from .functionals import Curve, area, energy
from .potential import make_homogeneous

_ROOT_BUDGET = 200


def rtilde(p, lambda1: float, lambda2: float):
    """Level function whose sublevel sets are the invariant ellipses."""
    p = np.asarray(p, dtype=float)
    return 0.5 * (lambda1 * p[..., 0]**2 + lambda2 * p[..., 1]**2)


def field_V_beta(p, beta: float, lambda1: float, lambda2: float):
    """The unit-degenerate-speed field; vectorized over points."""
    p = np.asarray(p, dtype=float)
    f2 = lambda1**2 * p[..., 0]**2 + lambda2**2 * p[..., 1]**2
    theta = np.stack([-lambda2 * p[..., 1], lambda1 * p[..., 0]], axis=-1)
    rad = np.stack([lambda1 * p[..., 0], lambda2 * p[..., 1]], axis=-1)
    return (math.cos(beta) * theta - math.sin(beta) * rad) / f2[..., None]


def homogeneous_length(p0, beta: float, lambda1: float, lambda2: float) -> float:
    """Weighted length of the arc from p0 to the well at field angle beta."""
    if beta == 0.0:
        raise ZeroBeta("beta = 0 keeps the flow on the closed level set")
    return float(rtilde(p0, lambda1, lambda2) / abs(math.sin(beta)))


def vertical_fiber_distance(A: float, lambda1: float, lambda2: float) -> float:
    """Cost of moving the lifted height by A while sitting over the well."""
    return (lambda1 + lambda2) * abs(A)


def _integrate_with_area(p0, beta: float, lambda1: float, lambda2: float,
                         stop_radius: Optional[float] = None,
                         rtol: float = 1e-10,
                         n_out: Optional[int] = None):
    """Integrate the arc and the running area; returns (Curve, arc area).

    The area rides along as a third state (the p1 dp2 form evaluated on the
    actual velocity), so the reported value carries the integrator's
    accuracy rather than the output polyline's quadrature error.  The tiny
    closing segment to the appended origin vertex is accounted exactly.
    """
    p0 = np.asarray(p0, dtype=float)
    if beta == 0.0:
        raise NonConvergence("beta = 0: the flow cycles on its level set and "
                             "never reaches the stop radius")
    if not (-math.pi / 2 <= beta <= math.pi / 2):
        raise ValueError("beta must lie in [-pi/2, pi/2]")
    norm0 = float(np.linalg.norm(p0))
    if norm0 == 0.0:
        raise ValueError("p0 must differ from the well")
    if stop_radius is None:
        stop_radius = 1e-6 * norm0
    lam_min = min(lambda1, lambda2)
    rt0 = float(rtilde(p0, lambda1, lambda2))
    rt_stop = 0.5 * lam_min * stop_radius**2
    if rt_stop >= rt0:
        raise ValueError("stop_radius does not separate p0 from the well")

    sign = 1.0 if beta > 0.0 else -1.0
    s = abs(math.sin(beta))
    t_end = (rt0 - rt_stop) / s

    def rhs(_t, y):
        f2 = lambda1**2 * y[0]**2 + lambda2**2 * y[1]**2
        vx = math.cos(beta) * (-lambda2 * y[1]) - math.sin(beta) * lambda1 * y[0]
        vy = math.cos(beta) * (lambda1 * y[0]) - math.sin(beta) * lambda2 * y[1]
        dx, dy = sign * vx / f2, sign * vy / f2
        return (dx, dy, y[0] * dy)

    t_eval = None
    if n_out is not None:
        # log-spaced level values give near-uniform turning per sample
        rts = rt0 * (rt_stop / rt0) ** (np.arange(n_out) / (n_out - 1))
        t_eval = (rt0 - rts) / s
        t_eval[0] = 0.0
        t_eval[-1] = t_end

    sol = solve_ivp(rhs, (0.0, t_end), (p0[0], p0[1], 0.0), method="RK45",
                    rtol=rtol, atol=1e-13 * norm0, t_eval=t_eval,
                    dense_output=False)
    if not sol.success:
        raise NonConvergence(f"integration failed: {sol.message}")
    pts = sol.y.T[:, :2]
    px, py = pts[-1]
    arc_area = float(sol.y[2, -1]) - 0.5 * px * py
    pts = np.vstack([pts, [0.0, 0.0]])
    return Curve(pts), arc_area


def integrate_integral_curve(p0, beta: float, lambda1: float, lambda2: float,
                             stop_radius: Optional[float] = None,
                             rtol: float = 1e-10,
                             n_out: Optional[int] = None) -> Curve:
    """Integrate the arc from p0 toward the well and return it as a polyline.

    For beta < 0 the flow of V_beta leaves the well, so the reversed field
    is integrated instead; either way the returned polyline runs from p0 to
    an appended exact origin vertex.  Integration stops once |p| is certified
    below stop_radius (default 1e-6 |p0|) via the level function, whose decay
    rate |sin beta| fixes the required time span in closed form.

    n_out requests a denser output polyline sampled equidistributed in the
    logarithm of the level function, which equidistributes winding.
    """
    curve, _ = _integrate_with_area(p0, beta, lambda1, lambda2,
                                    stop_radius=stop_radius, rtol=rtol,
                                    n_out=n_out)
    return curve


def _winding(curve: Curve) -> float:
    v = curve.vertices[:-1]  # drop appended origin
    ang = np.unwrap(np.arctan2(v[:, 1], v[:, 0]))
    return float(np.abs(np.diff(ang)).sum())


def _area_at(p0, beta, lambda1, lambda2, rtol):
    c, a = _integrate_with_area(p0, beta, lambda1, lambda2, rtol=rtol)
    return a, c


def solve_beta_for_area(p0, A: float, lambda1: float, lambda2: float,
                        tol_A: Optional[float] = None,
                        beta_hint: Optional[float] = None,
                        rtol: float = 1e-9) -> float:
    """Invert the monotone map beta -> enclosed area of the arc to the well.

    The map decreases from +inf (beta -> 0+) through the beta = pi/2 value
    and on down to -inf (beta -> 0-); both half-branches are searched with a
    bracketing secant/bisection hybrid on the integrator-accurate running
    area (the output polyline's own quadrature error does not enter).
    """
    p0 = np.asarray(p0, dtype=float)
    if tol_A is None:
        tol_A = 1e-8 * (1.0 + abs(A))

    a_mid, _ = _area_at(p0, math.pi / 2, lambda1, lambda2, rtol)
    if abs(A - a_mid) <= tol_A:
        return math.pi / 2

    def f(beta):
        val, _ = _area_at(p0, beta, lambda1, lambda2, rtol)
        return val - A

    if beta_hint is not None and beta_hint != 0.0:
        lo = max(-math.pi / 2, beta_hint - 0.05)
        hi = min(math.pi / 2, beta_hint + 0.05)
        if lo != 0.0 and hi != 0.0 and np.sign(lo) == np.sign(hi):
            flo, fhi = f(lo), f(hi)
            if flo == 0.0:
                return lo
            if fhi == 0.0:
                return hi
            if flo * fhi < 0.0:
                return _refine(f, lo, hi, flo, fhi, tol_A)

    if A > a_mid:
        # positive branch: area decreases from +inf at 0+ to a_mid at pi/2
        hi = math.pi / 2
        fhi = a_mid - A  # negative
        lo = math.pi / 4
        flo = f(lo)
        budget = _ROOT_BUDGET
        while flo < 0.0 and budget > 0:
            hi, fhi = lo, flo
            lo *= 0.5
            flo = f(lo)
            budget -= 1
        if flo < 0.0:
            raise NoRoot("failed to bracket the requested area above pi/2 value")
        return _refine(f, lo, hi, flo, fhi, tol_A)

    # negative branch: area decreases from the pi/2 value at -pi/2 to -inf at 0-
    lo = -math.pi / 2
    flo = a_mid - A  # positive
    hi = -math.pi / 4
    fhi = f(hi)
    budget = _ROOT_BUDGET
    while fhi > 0.0 and budget > 0:
        lo, flo = hi, fhi
        hi *= 0.5
        fhi = f(hi)
        budget -= 1
    if fhi > 0.0:
        raise NoRoot("failed to bracket the requested area below the -pi/2 value")
    return _refine(f, lo, hi, flo, fhi, tol_A)


def _refine(f, lo, hi, flo, fhi, ftol):
    """Bracketing root refinement: secant steps with bisection fallback."""
    width = abs(hi - lo)
    for _ in range(_ROOT_BUDGET):
        if fhi != flo:
            x = hi - fhi * (hi - lo) / (fhi - flo)
        else:
            x = 0.5 * (lo + hi)
        pad = 0.01 * abs(hi - lo)
        if not (min(lo, hi) + pad < x < max(lo, hi) - pad):
            x = 0.5 * (lo + hi)
        fx = f(x)
        if abs(fx) <= ftol:
            return x
        if (fx > 0.0) == (flo > 0.0):
            lo, flo = x, fx
        else:
            hi, fhi = x, fx
        new_width = abs(hi - lo)
        if new_width > 0.7 * width:
            # force a bisection to keep the bracket shrinking
            x = 0.5 * (lo + hi)
            fx = f(x)
            if abs(fx) <= ftol:
                return x
            if (fx > 0.0) == (flo > 0.0):
                lo, flo = x, fx
            else:
                hi, fhi = x, fx
        width = abs(hi - lo)
    raise NonConvergence("area root refinement exhausted its budget")


def minimizing_ellipse(p0, lambda1: float, lambda2: float, n: int):
    """Closed level set of rt through p0, traversed counterclockwise.

    Returns (curve, weighted length of the polyline).  The continuum loop
    earns exactly (l1 + l2) per unit enclosed area.
    """
    p0 = np.asarray(p0, dtype=float)
    rt0 = float(rtilde(p0, lambda1, lambda2))
    if rt0 <= 0.0:
        raise ValueError("p0 must differ from the well")
    ax = math.sqrt(2.0 * rt0 / lambda1)
    ay = math.sqrt(2.0 * rt0 / lambda2)
    phi0 = math.atan2(p0[1] / ay, p0[0] / ax)
    phi = phi0 + np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    pts = np.stack([ax * np.cos(phi), ay * np.sin(phi)], axis=1)
    curve = Curve(pts, closed=True)
    pot = make_homogeneous(lambda1, lambda2)
    return curve, energy(curve, pot)


@dataclass
class HomogeneousSolution:
    """Solution bundle for one area-constrained homogeneous problem."""

    p0: np.ndarray
    beta: float
    curve: Curve
    energy: float
    area: float
    lambda1: float
    lambda2: float


def solve_homogeneous(p0, A: float, lambda1: float, lambda2: float,
                      beta_hint: Optional[float] = None) -> HomogeneousSolution:
    """Select beta for the requested area and return a finely sampled arc.

    The output polyline is dense enough that its measured weighted length
    reproduces rt(p0)/sin(beta) to about 1e-6 relative.
    """
    p0 = np.asarray(p0, dtype=float)
    beta = solve_beta_for_area(p0, A, lambda1, lambda2, beta_hint=beta_hint)
    coarse = integrate_integral_curve(p0, beta, lambda1, lambda2)
    wind = _winding(coarse)
    n_out = int(min(2e5, max(4000, wind / 2e-3)))
    fine = integrate_integral_curve(p0, beta, lambda1, lambda2,
                                    rtol=1e-10, n_out=n_out)
    pot = make_homogeneous(lambda1, lambda2)
    return HomogeneousSolution(p0=p0, beta=beta, curve=fine,
                               energy=energy(fine, pot), area=area(fine),
                               lambda1=lambda1, lambda2=lambda2)
