"""Nonnegative potentials W >= 0 with isolated zeros (wells).

The conformal density of the degenerate metric is F = sqrt(W); every curve
functional downstream evaluates W, its gradient, or its Hessian through the
`Potential` wrapper defined here.  All evaluators are vectorized: they accept
a single point of shape (2,) or a batch of shape (N, 2).

Built-in families:

* homogeneous quadratic     W = l1^2 p1^2 + l2^2 p2^2, single well at 0
* radial quartic            W = r^2 + b r^4 about a center, single well
* two-well composite        W = g(dist to nearest of (-1,0), (1,0)) with
                            g(r) = r^2 + (k^2-1) r^4 capped at k^2 for r >= 1
* custom                    user callable, optional analytic derivatives

The two-well composite is Lipschitz but not C^1 across the unit circles and
the vertical axis; derivative queries on those sets return the one-sided
value from inside the near disc.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    DegenerateHessian,
    InvalidCoefficient,
    InvalidK,
    NonPositiveEigenvalue,
)

# Step used by the finite-difference fallback of custom potentials.
FD_STEP_SCALE = 1e-5


@dataclass(frozen=True)
class Well:
    """A zero of W with the local quadratic data W ~ l1^2 q1^2 + l2^2 q2^2.

    `frame` has the unit eigenvectors of the Hessian as columns, ordered so
    that column i belongs to lambda_i; lambda1 <= lambda2.  The Hessian
    eigenvalues themselves are 2*lambda_i^2 (second derivative of l^2 q^2).
    """

    location: np.ndarray
    lambda1: float
    lambda2: float
    frame: np.ndarray

    def separation_scale(self) -> float:
        return float(np.hypot(*self.location))


class Potential:
    """Bundle of W and its derivatives plus declared wells."""

    def __init__(self, kind, params, wells_locations, eval_W, grad_W=None,
                 hess_W=None, vectorized=True, trust_radius=None):
        self.kind = kind
        self.params = dict(params)
        self._eval = eval_W
        self._grad = grad_W
        self._hess = hess_W
        self._vectorized = vectorized
        # Radius inside which the caller promises the quadratic well model is
        # adequate.  Not inferred; user-set, None means "no promise".
        self.trust_radius = trust_radius
        locs = [np.asarray(w, dtype=float) for w in wells_locations]
        self.wells = [self._make_well(loc) for loc in locs]

    # -- evaluation ---------------------------------------------------------

    def _batched(self, fn, p, out_shape):
        """Run a scalar-point callable over a batch."""
        p = np.asarray(p, dtype=float)
        if p.ndim == 1:
            return np.asarray(fn(p), dtype=float)
        out = np.empty((p.shape[0],) + out_shape, dtype=float)
        for i in range(p.shape[0]):
            out[i] = fn(p[i])
        return out

    def eval_W(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self._vectorized:
            return np.asarray(self._eval(p), dtype=float)
        return self._batched(self._eval, p, ())

    def grad_W(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self._grad is not None:
            if self._vectorized:
                return np.asarray(self._grad(p), dtype=float)
            return self._batched(self._grad, p, (2,))
        return self._fd_grad(p)

    def hess_W(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self._hess is not None:
            if self._vectorized:
                return np.asarray(self._hess(p), dtype=float)
            return self._batched(self._hess, p, (2, 2))
        return self._fd_hess(p)

    def eval_F(self, p) -> np.ndarray:
        """Conformal density sqrt(W); zero exactly at the wells."""
        return np.sqrt(np.maximum(self.eval_W(p), 0.0))

    def grad_F(self, p) -> np.ndarray:
        """Gradient of sqrt(W); bounded near wells, guarded against W = 0."""
        w = np.maximum(self.eval_W(p), 1e-300)
        g = self.grad_W(p)
        denom = 2.0 * np.sqrt(w)
        if g.ndim == 1:
            return g / denom
        return g / denom[:, None]

    # -- finite differences -------------------------------------------------

    def _fd_step(self, p):
        norm = np.linalg.norm(p, axis=-1)
        return FD_STEP_SCALE * np.maximum(1.0, norm)

    def _fd_grad(self, p):
        single = p.ndim == 1
        pts = p[None, :] if single else p
        h = self._fd_step(pts)
        out = np.empty_like(pts)
        for j in range(2):
            e = np.zeros(2)
            e[j] = 1.0
            out[:, j] = (self.eval_W(pts + h[:, None] * e)
                         - self.eval_W(pts - h[:, None] * e)) / (2.0 * h)
        return out[0] if single else out

    def _fd_hess(self, p):
        single = p.ndim == 1
        pts = p[None, :] if single else p
        h = self._fd_step(pts)
        n = pts.shape[0]
        out = np.empty((n, 2, 2))
        w0 = self.eval_W(pts)
        for j in range(2):
            e = np.zeros(2)
            e[j] = 1.0
            wp = self.eval_W(pts + h[:, None] * e)
            wm = self.eval_W(pts - h[:, None] * e)
            out[:, j, j] = (wp - 2.0 * w0 + wm) / h**2
        ex = np.array([1.0, 0.0])
        ey = np.array([0.0, 1.0])
        wpp = self.eval_W(pts + h[:, None] * (ex + ey))
        wpm = self.eval_W(pts + h[:, None] * (ex - ey))
        wmp = self.eval_W(pts - h[:, None] * (ex - ey))
        wmm = self.eval_W(pts - h[:, None] * (ex + ey))
        out[:, 0, 1] = out[:, 1, 0] = (wpp - wpm - wmp + wmm) / (4.0 * h**2)
        return out[0] if single else out

    # -- wells --------------------------------------------------------------

    def _make_well(self, loc) -> Well:
        hess = self.hess_W(loc)
        hess = 0.5 * (hess + hess.T)
        eigval, eigvec = np.linalg.eigh(hess)
        if np.any(eigval <= 1e-10):
            raise DegenerateHessian(
                f"well at {loc}: Hessian eigenvalues {eigval} not positive")
        # W ~ l^2 q^2 along an eigendirection means the Hessian eigenvalue
        # is 2 l^2, hence l = sqrt(eig / 2).
        lam = np.sqrt(eigval / 2.0)
        loc = loc.copy()
        loc.setflags(write=False)
        frame = eigvec.copy()
        frame.setflags(write=False)
        return Well(location=loc, lambda1=float(lam[0]),
                    lambda2=float(lam[1]), frame=frame)

    def well_separation(self) -> Optional[float]:
        """Largest pairwise distance between wells, None if fewer than two."""
        if len(self.wells) < 2:
            return None
        locs = np.array([w.location for w in self.wells])
        d = np.linalg.norm(locs[:, None, :] - locs[None, :, :], axis=-1)
        return float(d.max())

    def min_on_far_circle(self, R_far=None, n=720) -> float:
        """Minimum of W on a circle of radius R_far about the well centroid.

        Used as a coercivity proxy: the infimum of W outside every compact
        set containing the wells should stay positive.
        """
        if self.wells:
            locs = np.array([w.location for w in self.wells])
            center = locs.mean(axis=0)
            spread = self.well_separation() or 1.0
        else:
            center = np.zeros(2)
            spread = 1.0
        if R_far is None:
            R_far = 10.0 * spread
        th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        pts = center + R_far * np.stack([np.cos(th), np.sin(th)], axis=1)
        return float(self.eval_W(pts).min())

    # -- serialization ------------------------------------------------------

    def to_json_dict(self) -> dict:
        if self.kind == "custom":
            raise ValueError("custom potentials carry callables and are not "
                             "JSON serializable")
        return {"kind": self.kind, "params": dict(self.params)}


def from_json_dict(data: dict) -> Potential:
    """Rebuild a built-in potential from {"kind": ..., "params": {...}}."""
    kind = data["kind"]
    params = data.get("params", {})
    if kind == "homogeneous":
        return make_homogeneous(params["lambda1"], params["lambda2"])
    if kind == "radial_quartic":
        return make_radial_quartic(params["b"],
                                   center=tuple(params.get("center", (0.0, 0.0))),
                                   r_max=params.get("r_max", 1.0))
    if kind == "two_well":
        return make_two_well_k(params["k"])
    raise ValueError(f"unknown potential kind {kind!r}")


# ---------------------------------------------------------------------------
# built-in families
# ---------------------------------------------------------------------------

def make_homogeneous(lambda1: float, lambda2: float) -> Potential:
    """W(p) = lambda1^2 p1^2 + lambda2^2 p2^2, single well at the origin."""
    if lambda1 <= 0.0 or lambda2 <= 0.0:
        raise NonPositiveEigenvalue("both rates must be positive")
    l1s, l2s = lambda1**2, lambda2**2

    def w(p):
        p = np.asarray(p, dtype=float)
        return l1s * p[..., 0]**2 + l2s * p[..., 1]**2

    def grad(p):
        p = np.asarray(p, dtype=float)
        return np.stack([2.0 * l1s * p[..., 0], 2.0 * l2s * p[..., 1]], axis=-1)

    def hess(p):
        p = np.asarray(p, dtype=float)
        base = np.array([[2.0 * l1s, 0.0], [0.0, 2.0 * l2s]])
        if p.ndim == 1:
            return base
        return np.broadcast_to(base, (p.shape[0], 2, 2)).copy()

    return Potential("homogeneous",
                     {"lambda1": float(lambda1), "lambda2": float(lambda2)},
                     [(0.0, 0.0)], w, grad, hess)


def make_radial_quartic(b: float, center=(0.0, 0.0), r_max: float = 1.0) -> Potential:
    """W(p) = r^2 + b r^4 with r = |p - center|.

    For b < 0 the density vanishes on the circle r = 1/sqrt(-b); the
    working disc of radius r_max must stay strictly inside it.
    """
    b = float(b)
    if b <= 0.0 and b <= -1.0 / r_max**2:
        raise InvalidCoefficient(
            f"b = {b} makes W vanish within the working disc of radius {r_max}")
    c = np.asarray(center, dtype=float)

    def w(p):
        p = np.asarray(p, dtype=float)
        r2 = (p[..., 0] - c[0])**2 + (p[..., 1] - c[1])**2
        return r2 + b * r2**2

    def grad(p):
        p = np.asarray(p, dtype=float)
        q = p - c
        r2 = q[..., 0]**2 + q[..., 1]**2
        return (2.0 + 4.0 * b * r2)[..., None] * q

    def hess(p):
        p = np.asarray(p, dtype=float)
        single = p.ndim == 1
        q = np.atleast_2d(p) - c
        r2 = q[:, 0]**2 + q[:, 1]**2
        out = np.zeros((q.shape[0], 2, 2))
        iso = 2.0 + 4.0 * b * r2
        out[:, 0, 0] = iso + 8.0 * b * q[:, 0]**2
        out[:, 1, 1] = iso + 8.0 * b * q[:, 1]**2
        out[:, 0, 1] = out[:, 1, 0] = 8.0 * b * q[:, 0] * q[:, 1]
        return out[0] if single else out

    return Potential("radial_quartic",
                     {"b": b, "center": [float(c[0]), float(c[1])],
                      "r_max": float(r_max)},
                     [tuple(c)], w, grad, hess)


def make_two_well_k(k: float) -> Potential:
    """Two-well composite with wells at (-1, 0) and (1, 0).

    About the nearer well, W = g(r) with g(r) = r^2 + (k^2 - 1) r^4 for
    r <= 1 and g = k^2 outside; even under p1 -> -p1.  Inside either unit
    disc this is the radial quartic with b = k^2 - 1.
    """
    k = float(k)
    if k <= 1.0:
        raise InvalidK("need k > 1 so the plateau sits above the quartic bowl")
    b = k * k - 1.0

    def split(p):
        p = np.atleast_2d(np.asarray(p, dtype=float))
        cx = np.where(p[:, 0] <= 0.0, -1.0, 1.0)
        q = p.copy()
        q[:, 0] -= cx
        return q, cx

    def w(p):
        arr = np.asarray(p, dtype=float)
        single = arr.ndim == 1
        q, _ = split(arr)
        r2 = q[:, 0]**2 + q[:, 1]**2
        out = np.where(r2 >= 1.0, k * k, r2 + b * r2**2)
        return out[0] if single else out

    def grad(p):
        arr = np.asarray(p, dtype=float)
        single = arr.ndim == 1
        q, _ = split(arr)
        r2 = q[:, 0]**2 + q[:, 1]**2
        scale = np.where(r2 <= 1.0, 2.0 + 4.0 * b * r2, 0.0)
        out = scale[:, None] * q
        return out[0] if single else out

    def hess(p):
        arr = np.asarray(p, dtype=float)
        single = arr.ndim == 1
        q, _ = split(arr)
        r2 = q[:, 0]**2 + q[:, 1]**2
        inside = r2 <= 1.0
        out = np.zeros((q.shape[0], 2, 2))
        iso = np.where(inside, 2.0 + 4.0 * b * r2, 0.0)
        quart = np.where(inside, 8.0 * b, 0.0)
        out[:, 0, 0] = iso + quart * q[:, 0]**2
        out[:, 1, 1] = iso + quart * q[:, 1]**2
        out[:, 0, 1] = out[:, 1, 0] = quart * q[:, 0] * q[:, 1]
        return out[0] if single else out

    return Potential("two_well", {"k": k}, [(-1.0, 0.0), (1.0, 0.0)],
                     w, grad, hess)


def make_custom(eval_W: Callable, wells=(), grad_W=None, hess_W=None,
                vectorized: bool = True, trust_radius=None) -> Potential:
    """Wrap a user potential; missing derivatives fall back to central
    finite differences with step 1e-5 * max(1, |p|)."""
    return Potential("custom", {}, list(wells), eval_W, grad_W, hess_W,
                     vectorized=vectorized, trust_radius=trust_radius)


def well_frame(potential: Potential, index: int) -> Well:
    """Recompute the quadratic well data at wells[index] from the Hessian."""
    loc = potential.wells[index].location
    return potential._make_well(np.asarray(loc, dtype=float))
