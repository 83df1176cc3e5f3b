import math

import numpy as np
import pytest

from degeo import (Curve, SolveResult, SolverConfig, area_sweep,
                   detect_area_leakage, discrete_area_gradient,
                   discrete_energy_gradient, el_residual, energy,
                   estimate_multiplier, geodesic_curvature, make_custom,
                   make_homogeneous, make_radial_quartic, make_two_well_k,
                   minimize_constrained, minimize_unconstrained,
                   parabola_energy, solve_C1_for_area, solve_homogeneous,
                   spiral_from_C1, vertex_normals)

RNG = np.random.default_rng(31)
FAST = SolverConfig(n_vertices=96)


@pytest.fixture(scope="module")
def radial_solve():
    pot = make_radial_quartic(1.0)
    return pot, minimize_constrained((1.0, 0.0), (0.0, 0.0), 0.1, pot, FAST)


@pytest.fixture(scope="module")
def homogeneous_solve():
    pot = make_homogeneous(1.0, 2.0)
    return pot, minimize_constrained((1.0, 0.0), (0.0, 0.0), 0.05, pot, FAST)


def _random_loose_curve(n):
    # random open polyline kept away from the origin well
    base = np.linspace([1.0, 0.2], [2.0, -0.3], n)
    return base + 0.05 * RNG.normal(size=(n, 2))


def test_energy_gradient_matches_finite_differences():
    pot = make_radial_quartic(0.7)
    v = _random_loose_curve(12)
    E, g = discrete_energy_gradient(v, pot)
    assert E == pytest.approx(energy(Curve(v), pot), rel=1e-13)
    h = 1e-7
    for idx in [(0, 0), (3, 1), (7, 0), (11, 1)]:
        vp, vm = v.copy(), v.copy()
        vp[idx] += h
        vm[idx] -= h
        fd = (discrete_energy_gradient(vp, pot)[0]
              - discrete_energy_gradient(vm, pot)[0]) / (2 * h)
        assert g[idx] == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_area_gradient_matches_finite_differences():
    v = _random_loose_curve(10)
    A, g = discrete_area_gradient(v)
    h = 1e-7
    for idx in [(0, 1), (4, 0), (9, 1)]:
        vp, vm = v.copy(), v.copy()
        vp[idx] += h
        vm[idx] -= h
        fd = (discrete_area_gradient(vp)[0]
              - discrete_area_gradient(vm)[0]) / (2 * h)
        assert g[idx] == pytest.approx(fd, rel=1e-7, abs=1e-12)


def test_vertex_normals_unit_and_orthogonal():
    v = _random_loose_curve(20)
    N = vertex_normals(v)
    assert N.shape == v.shape
    assert np.linalg.norm(N, axis=1) == pytest.approx(np.ones(20), rel=1e-12)
    t_int = v[2:] - v[:-2]
    dots = np.einsum("ij,ij->i", N[1:-1], t_int)
    assert dots == pytest.approx(np.zeros(18), abs=1e-12)


def test_geodesic_curvature_euclidean_circle():
    # constant density reduces to plain curvature 1/R
    flat = make_custom(lambda p: np.ones(np.asarray(p).shape[:-1]), wells=())
    R = 0.7
    th = np.linspace(0.0, 2.0 * math.pi, 512, endpoint=False)
    c = Curve(np.stack([R * np.cos(th), R * np.sin(th)], axis=1), closed=True)
    kg = geodesic_curvature(c, flat)
    assert np.median(kg) == pytest.approx(1.0 / R, rel=1e-3)


def test_estimate_multiplier_on_exact_spiral():
    pot = make_radial_quartic(1.0)
    for c1 in (0.25, 0.5, 0.8):
        c = spiral_from_C1(c1, 1.0, 1.0, 0.02)
        lam, iqr = estimate_multiplier(c, pot)
        assert lam == pytest.approx(2.0 * c1, abs=2e-3)
        assert iqr < 1e-3


def test_el_residual_discriminates_multiplier():
    pot = make_radial_quartic(1.0)
    c = spiral_from_C1(0.5, 1.0, 1.0, 0.02)
    assert el_residual(c, pot, 1.0) < 2e-3
    assert el_residual(c, pot, 0.0) > 0.1


def test_unconstrained_geodesic_on_radial_ray():
    # for F = |p| the ray through the well is the geodesic; cost r^2/2 gap
    pot = make_homogeneous(1.0, 1.0)
    res = minimize_unconstrained((1.0, 0.0), (2.0, 0.0), pot, FAST)
    assert res.converged
    assert res.energy == pytest.approx(1.5, rel=1e-6)
    assert np.abs(res.curve.vertices[:, 1]).max() < 1e-6
    assert res.multiplier == 0.0
    with pytest.raises(ValueError):
        minimize_unconstrained((1.0, 0.0), (1.0, 0.0), pot, FAST)


def test_constrained_matches_radial_closed_form(radial_solve):
    pot, res = radial_solve
    c1 = solve_C1_for_area(1.0, 0.1, 1.0)
    Eref = parabola_energy(c1, 1.0, 1.0)
    assert res.converged
    assert not res.nonexistence_suspected
    assert res.energy == pytest.approx(Eref, rel=5e-3)
    assert res.area_achieved == pytest.approx(0.1, abs=1e-7)
    assert res.multiplier == pytest.approx(2.0 * c1, abs=2e-2)
    assert res.el_residual_max < 1e-2


def test_constrained_matches_homogeneous_closed_form(homogeneous_solve):
    pot, res = homogeneous_solve
    ref = solve_homogeneous(np.array([1.0, 0.0]), 0.05, 1.0, 2.0)
    assert res.converged
    assert res.energy == pytest.approx(ref.energy, rel=5e-3)
    assert res.area_achieved == pytest.approx(0.05, abs=1e-7)


def test_result_json_dict_shape(radial_solve):
    _, res = radial_solve
    d = res.to_json_dict()
    assert d["converged"] is True
    assert set(d) == {"A_target", "area_achieved", "energy", "multiplier",
                      "el_residual_max", "converged",
                      "nonexistence_suspected", "leakage"}
    assert all({"well", "radius", "area_in", "arclength_in"} == set(e)
               for e in d["leakage"])


def test_mirror_symmetry_of_constrained_cost():
    pot = make_homogeneous(1.0, 2.0)
    up = minimize_constrained((1.0, 0.0), (0.0, 0.0), 0.05, pot, FAST)
    dn = minimize_constrained((1.0, 0.0), (0.0, 0.0), -0.05, pot, FAST)
    assert up.energy == pytest.approx(dn.energy, rel=1e-4)
    assert up.multiplier == pytest.approx(-dn.multiplier, abs=1e-3)


def _coil(center, r, turns, n_per_turn=60):
    th = np.linspace(0.0, 2.0 * math.pi * turns, n_per_turn * turns + 1)
    return np.stack([center[0] + r * np.cos(th),
                     center[1] + r * np.sin(th)], axis=1)


def _fake_result(curve, multiplier, A_target):
    c = Curve(curve)
    return SolveResult(curve=c, energy=energy(c, make_two_well_k(4.0)),
                       area_achieved=A_target, multiplier=multiplier,
                       el_residual_max=0.0, leakage_report={},
                       converged=True, nonexistence_suspected=False,
                       A_target=A_target)


def test_leakage_flags_persistent_coil_at_packing_rate():
    pot = make_two_well_k(4.0)
    cfg = SolverConfig(n_vertices=64)
    # trunk plus a coil tighter than the smallest probe radius
    trunk = np.linspace([-1.0, 0.0], [1.0 - 1e-3, 0.0], 50)
    coil = _coil((1.0, 0.0), 8e-4, 3)
    v = np.vstack([trunk, coil])
    report = detect_area_leakage(_fake_result(v, 2.0, 0.5), pot, cfg)
    assert report["nonexistence_suspected"]
    flagged = report["wells"][1]
    assert flagged["flagged"]
    assert all(r > 0.5 for r in flagged["ratios"])
    assert not report["wells"][0]["flagged"]


def test_leakage_not_flagged_when_multiplier_low():
    pot = make_two_well_k(4.0)
    cfg = SolverConfig(n_vertices=64)
    trunk = np.linspace([-1.0, 0.0], [1.0 - 1e-3, 0.0], 50)
    v = np.vstack([trunk, _coil((1.0, 0.0), 8e-4, 3)])
    report = detect_area_leakage(_fake_result(v, 0.9, 0.5), pot, cfg)
    assert not report["nonexistence_suspected"]


def test_leakage_not_flagged_when_area_escapes_shrinking_radii():
    pot = make_two_well_k(4.0)
    cfg = SolverConfig(n_vertices=64)
    # coil radius sits between the first and second probe radii
    trunk = np.linspace([-1.0, 0.0], [0.95, 0.0], 50)
    v = np.vstack([trunk, _coil((1.0, 0.0), 0.05, 2)])
    report = detect_area_leakage(_fake_result(v, 2.0, 0.5), pot, cfg)
    assert not report["nonexistence_suspected"]


def test_nonexistence_run_packs_area_at_a_well():
    pot = make_two_well_k(4.0)
    res = minimize_constrained((-1.0, 0.0), (1.0, 0.0), 2.0, pot,
                               SolverConfig(n_vertices=128))
    assert res.nonexistence_suspected
    # plateau cost: trunk plus the packing rate (l1 + l2) per unit area
    assert res.energy == pytest.approx(2.8 + 2.0 * 2.0, rel=1e-3)
    assert res.multiplier == pytest.approx(2.0, abs=1e-3)
    trapped = max(w["trapped_fraction"] for w in res.leakage_report["wells"])
    assert trapped > 0.9


def test_area_sweep_slope_tracks_multiplier():
    pot = make_radial_quartic(1.0)
    rows = area_sweep((1.0, 0.0), (0.0, 0.0), [0.08, 0.10, 0.12], pot, FAST)
    assert [r["A"] for r in rows] == [0.08, 0.10, 0.12]
    assert rows[0]["slope_fd"] is None and rows[-1]["slope_fd"] is None
    mid = rows[1]
    assert mid["converged"] and not mid["flagged"]
    assert mid["slope_fd"] == pytest.approx(mid["multiplier"], rel=5e-2)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tol_grad=0.0)
    with pytest.raises(ValueError):
        SolverConfig(penalty_growth=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(well_radius_schedule=[0.1, 0.2])
    cfg = SolverConfig(well_radius_schedule=[0.2, 0.02])
    assert cfg.schedule(make_two_well_k(2.0), 1.0) == [0.2, 0.02]
