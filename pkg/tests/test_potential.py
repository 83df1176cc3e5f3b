import numpy as np
import pytest

from degeo import (DegenerateHessian, InvalidCoefficient, InvalidK,
                   NonPositiveEigenvalue, from_json_dict, make_custom,
                   make_homogeneous, make_radial_quartic, make_two_well_k,
                   well_frame)

RNG = np.random.default_rng(7)


def _smooth_double_well(wells):
    w0 = np.asarray(wells[0], dtype=float)
    w1 = np.asarray(wells[1], dtype=float)

    def W(p):
        p = np.asarray(p, dtype=float)
        d0 = np.sum((p - w0) ** 2, axis=-1)
        d1 = np.sum((p - w1) ** 2, axis=-1)
        return d0 * d1

    return W


def test_homogeneous_values_and_derivatives():
    pot = make_homogeneous(1.5, 2.0)
    p = np.array([2.0, 3.0])
    assert pot.eval_W(p) == pytest.approx(1.5**2 * 4.0 + 4.0 * 9.0)
    assert pot.grad_W(p) == pytest.approx([2 * 1.5**2 * 2.0, 2 * 4.0 * 3.0])
    assert pot.hess_W(p) == pytest.approx(np.diag([2 * 1.5**2, 8.0]))
    # batched evaluation agrees with pointwise
    pts = RNG.normal(size=(5, 2))
    assert pot.eval_W(pts) == pytest.approx([pot.eval_W(q) for q in pts])
    assert pot.grad_W(pts).shape == (5, 2)
    assert pot.hess_W(pts).shape == (5, 2, 2)


def test_homogeneous_well_recovers_rates():
    pot = make_homogeneous(0.7, 1.9)
    (well,) = pot.wells
    assert well.location == pytest.approx([0.0, 0.0])
    assert well.lambda1 == pytest.approx(0.7)
    assert well.lambda2 == pytest.approx(1.9)
    # columns of the frame are orthonormal Hessian eigendirections
    assert well.frame.T @ well.frame == pytest.approx(np.eye(2), abs=1e-12)


def test_homogeneous_rejects_nonpositive_rates():
    with pytest.raises(NonPositiveEigenvalue):
        make_homogeneous(0.0, 1.0)
    with pytest.raises(NonPositiveEigenvalue):
        make_homogeneous(1.0, -2.0)


def test_radial_quartic_values():
    pot = make_radial_quartic(1.0)
    p = np.array([0.6, 0.8])  # r = 1
    assert pot.eval_W(p) == pytest.approx(2.0)
    assert pot.grad_W(p) == pytest.approx(6.0 * p)
    # off-center copy
    pot2 = make_radial_quartic(1.0, center=(1.0, -1.0))
    assert pot2.eval_W(np.array([1.6, -0.2])) == pytest.approx(2.0)
    assert pot2.wells[0].location == pytest.approx([1.0, -1.0])


def test_radial_quartic_negative_b_guard():
    # vanishing circle at 1/sqrt(-b) must lie outside the working disc
    make_radial_quartic(-0.25, r_max=1.0)
    with pytest.raises(InvalidCoefficient):
        make_radial_quartic(-1.0, r_max=1.0)
    with pytest.raises(InvalidCoefficient):
        make_radial_quartic(-0.25, r_max=2.0)


def test_two_well_plateau_and_wells():
    pot = make_two_well_k(4.0)
    assert pot.eval_W(np.array([-1.0, 0.0])) == pytest.approx(0.0)
    assert pot.eval_W(np.array([1.0, 0.0])) == pytest.approx(0.0)
    # outside either unit disc W is the constant plateau k^2
    assert pot.eval_W(np.array([3.0, 4.0])) == pytest.approx(16.0)
    assert pot.eval_W(np.array([0.0, 5.0])) == pytest.approx(16.0)
    # quartic bowl inside: r^2 + (k^2-1) r^4 about the nearer well
    r = 0.3
    expected = r**2 + 15.0 * r**4
    assert pot.eval_W(np.array([1.0 + r, 0.0])) == pytest.approx(expected)
    assert pot.eval_W(np.array([-1.0, r])) == pytest.approx(expected)
    # continuous across the matching circle r = 1 about the well at (1, 0)
    inside = pot.eval_W(np.array([2.0 - 1e-9, 0.0]))
    assert inside == pytest.approx(16.0, rel=1e-6)
    assert pot.eval_W(np.array([0.0, 0.0])) == pytest.approx(16.0)
    assert [w.lambda1 for w in pot.wells] == pytest.approx([1.0, 1.0])


def test_two_well_requires_k_above_one():
    for bad in (1.0, 0.5, -3.0):
        with pytest.raises(InvalidK):
            make_two_well_k(bad)


def test_custom_well_data_from_hessian():
    wells = [(-1.0, 0.0), (1.0, 0.0)]
    pot = make_custom(_smooth_double_well(wells), wells=wells)
    assert len(pot.wells) == 2
    for well in pot.wells:
        # W ~ 4 |p - well|^2 near either well, so both rates are sqrt(8/2)
        assert well.lambda1 == pytest.approx(2.0, rel=1e-4)
        assert well.lambda2 == pytest.approx(2.0, rel=1e-4)


def test_custom_finite_difference_fallback():
    pot_fd = make_custom(lambda p: np.sum(np.asarray(p) ** 2, axis=-1) ** 2,
                         wells=())
    for _ in range(10):
        p = RNG.normal(size=2)
        r2 = float(p @ p)
        g_exact = 4.0 * r2 * p
        h_exact = 4.0 * r2 * np.eye(2) + 8.0 * np.outer(p, p)
        assert pot_fd.grad_W(p) == pytest.approx(g_exact, rel=1e-6, abs=1e-8)
        assert pot_fd.hess_W(p) == pytest.approx(h_exact, rel=1e-4, abs=1e-4)


def test_custom_scalar_callable_path():
    def W(p):
        return float(p[0] ** 2 + 4.0 * p[1] ** 2)

    pot = make_custom(W, wells=[(0.0, 0.0)], vectorized=False)
    pts = RNG.normal(size=(6, 2))
    assert pot.eval_W(pts) == pytest.approx(pts[:, 0] ** 2 + 4 * pts[:, 1] ** 2)
    assert pot.grad_W(pts).shape == (6, 2)
    assert pot.wells[0].lambda2 == pytest.approx(2.0, rel=1e-4)


def test_degenerate_well_rejected():
    def W(p):
        return np.sum(np.asarray(p) ** 4, axis=-1)

    def hess(p):
        p = np.asarray(p, dtype=float)
        out = 12.0 * p[..., :, None] ** 2 * np.eye(2)
        return out

    with pytest.raises(DegenerateHessian):
        make_custom(W, wells=[(0.0, 0.0)], hess_W=hess)


def test_grad_F_bounded_at_well():
    pot = make_homogeneous(1.0, 2.0)
    g = pot.grad_F(np.array([1e-12, 0.0]))
    assert np.all(np.isfinite(g))
    assert np.linalg.norm(g) <= 2.0 + 1e-6


def test_json_roundtrip_builtin_kinds():
    originals = [make_homogeneous(1.3, 2.2),
                 make_radial_quartic(0.8, center=(0.5, 0.0), r_max=2.0),
                 make_two_well_k(3.0)]
    pts = RNG.normal(size=(8, 2))
    for pot in originals:
        clone = from_json_dict(pot.to_json_dict())
        assert clone.kind == pot.kind
        assert clone.eval_W(pts) == pytest.approx(pot.eval_W(pts))
    with pytest.raises(ValueError):
        from_json_dict({"kind": "nope", "params": {}})
    with pytest.raises(ValueError):
        make_custom(lambda p: 1.0, wells=()).to_json_dict()


def test_well_frame_matches_stored_well():
    pot = make_two_well_k(2.0)
    w = well_frame(pot, 1)
    assert w.location == pytest.approx(pot.wells[1].location)
    assert w.lambda1 == pytest.approx(pot.wells[1].lambda1)
    with pytest.raises(IndexError):
        well_frame(pot, 5)


def test_well_separation_and_far_circle():
    pot = make_two_well_k(2.0)
    assert pot.well_separation() == pytest.approx(2.0)
    assert pot.min_on_far_circle() > 0.0
    assert make_homogeneous(1.0, 1.0).well_separation() is None
