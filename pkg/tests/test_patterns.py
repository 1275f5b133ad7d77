import numpy as np
import pytest

from linefield.errors import InvalidProjectionError, TubeOverlapError
from linefield.geometry import DomainSpec, FourierCurve
from linefield.grid import rasterize
from linefield.patterns import (PATTERN_NAMES, LineField, constant_field, exact_tubular_solution,
                                grain_boundary_field, make_pattern, uturn_field, vortex_field)


def test_line_field_entries_and_invariants(disk_grid):
    f = constant_field(disk_grid, 2.0)
    a, b, c = f.abc
    m = f.mask
    assert np.allclose(a[m], np.cos(2.0) ** 2) and np.allclose(b[m], np.sin(2.0) * np.cos(2.0))
    d = f.check_invariants()
    assert max(d.values()) < 1e-15


def test_theta_reduced_mod_pi(disk_grid):
    th = np.where(disk_grid.inside, 3 * np.pi / 2, np.nan)
    f = LineField(th, disk_grid)
    assert np.allclose(f.theta[f.mask], np.pi / 2)
    assert np.all((f.theta[f.mask] >= 0) & (f.theta[f.mask] < np.pi))


def test_nonfinite_theta_on_mask_rejected(disk_grid):
    th = np.full(disk_grid.shape, np.nan)
    with pytest.raises(InvalidProjectionError):
        LineField(th, disk_grid, disk_grid.inside)


def test_tampered_entries_fail_invariants(disk_grid):
    f = constant_field(disk_grid, 0.5)
    a, b, c = (v.copy() for v in f.abc)
    b[f.mask] += 1e-6
    g = LineField(f.theta, disk_grid, f.mask, entries=(a, b, c))
    with pytest.raises(InvalidProjectionError):
        g.check_invariants()


def test_exact_solution_is_tangent_to_circles(annulus, annulus_grid):
    f = exact_tubular_solution(annulus, annulus_grid)
    X, Y = annulus_grid.centers()
    ref = np.mod(np.arctan2(Y, X) + np.pi / 2, np.pi)
    d = np.abs(np.angle(np.exp(2j * (f.theta - ref))))[f.mask] / 2
    assert d.max() < 1e-9


def test_exact_solution_on_ellipse_tube_is_rank_one():
    spec = DomainSpec(FourierCurve.ellipse(1.2, 1.0), 0.3)
    f = exact_tubular_solution(spec, rasterize(spec, 1 / 32))
    assert max(f.projection_defects().values()) < 1e-14


def test_exact_solution_rejects_overlap():
    spec = DomainSpec(FourierCurve.circle(1.0), 1.2)
    with pytest.raises(TubeOverlapError):
        exact_tubular_solution(spec, None)


def test_vortex_is_unit_and_tangential(disk_grid):
    v = vortex_field(disk_grid)
    assert v.max_norm_defect() < 1e-14
    X, Y = disk_grid.centers()
    radial = v.m[..., 0] * X + v.m[..., 1] * Y
    assert np.abs(radial[v.mask]).max() < 1e-14
    assert not v.mask[np.hypot(X, Y) <= 2 * disk_grid.h].any()


def test_uturn_geometry(disk_grid):
    f = uturn_field(disk_grid)
    X, Y = disk_grid.centers()
    below = f.mask & (Y < 0)
    assert np.allclose(f.theta[below], np.pi / 2)
    above = f.mask & (Y > 0)
    radial = np.cos(f.theta) * X + np.sin(f.theta) * Y
    assert np.abs(radial[above]).max() < 1e-12


def test_grain_sides(disk_grid):
    f = grain_boundary_field(disk_grid, 0.0, np.pi / 3)
    X, _ = disk_grid.centers()
    assert np.allclose(f.theta[f.mask & (X < 0)], 0.0)
    assert np.allclose(f.theta[f.mask & (X > 0)], np.pi / 3)
    with pytest.raises(ValueError):
        grain_boundary_field(disk_grid, 0.2, 0.2 + np.pi)


def test_make_pattern_all_names(annulus, disk):
    for name in PATTERN_NAMES:
        spec = annulus if name == "tubular" else disk
        f = make_pattern(name, spec, 1 / 16)
        assert f.name == name and f.mask.any()
    with pytest.raises(KeyError):
        make_pattern("spiral", disk, 1 / 16)


def test_rotation_invariance_of_solution():
    spec = DomainSpec(FourierCurve.ellipse(1.2, 1.0), 0.3)
    ang = 0.7
    rot = spec.transformed(ang)
    pts = np.array([[1.25, 0.05], [0.1, 1.1], [-1.0, -0.4]])
    R = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
    from linefield.patterns import tubular_direction
    t0, _ = tubular_direction(spec, pts)
    t1, _ = tubular_direction(rot, pts @ R.T)
    d = np.angle(np.exp(2j * (t1 - t0 - ang))) / 2
    assert np.abs(d).max() < 1e-9
