import numpy as np
import pytest

from linefield.analysis import (characteristic_constancy, chord_sign_changes, kinetic_field, lift,
                                propagation_check)
from linefield.analysis.kinetic import directions
from linefield.patterns import exact_tubular_solution, grain_boundary_field


@pytest.fixture(scope="module")
def tube_lift(annulus, annulus_grid):
    f = exact_tubular_solution(annulus, annulus_grid)
    return f, lift(f).field


def test_directions_cover_circle():
    d = directions(16)
    assert np.allclose(np.linalg.norm(d, axis=1), 1)
    assert np.allclose(d.sum(axis=0), 0, atol=1e-12)


def test_kinetic_values(tube_lift):
    _, m = tube_lift
    chi = kinetic_field(m, np.array([1.0, 0.0]))
    assert set(np.unique(chi.values[m.mask])) <= {0, 1}
    assert np.all(chi.values[~m.mask] == -1)
    with pytest.raises(ValueError):
        kinetic_field(m, np.array([2.0, 0.0]))


def test_annulus_has_no_sign_changes(tube_lift):
    _, m = tube_lift
    res = characteristic_constancy(m, 16, 64)
    assert res["passed"] and res["max_changes"] == 0 and res["n_chords"] >= 16 * 64


def test_grain_changes_across_interface(disk_grid):
    f = grain_boundary_field(disk_grid, 0.0, np.pi / 3)
    m = lift(f).field
    # m is (1, 0) on the left and (1/2, sqrt3/2) on the right; this xi separates them
    xi = np.array([0.5, -np.sqrt(3) / 2])
    chi = kinetic_field(m, xi)
    X, _ = disk_grid.centers()
    assert np.all(chi.values[m.mask & (X < 0)] == 1)
    assert np.all(chi.values[m.mask & (X > 0)] == 0)
    runs = chord_sign_changes(chi, 64)
    crossing = []
    for r in runs:
        p0, p1 = np.array(r["start"]), np.array(r["end"])
        if p0[0] < -disk_grid.h and p1[0] > disk_grid.h:
            crossing.append(r)
    assert len(crossing) > 10
    assert all(r["changes"] >= 1 for r in crossing)


def test_grain_fails_constancy(disk_grid):
    m = lift(grain_boundary_field(disk_grid, 0.0, np.pi / 3)).field
    assert characteristic_constancy(m, 16, 64)["max_changes"] >= 1


def test_propagation_on_tube(tube_lift, rng):
    f, _ = tube_lift
    g = f.grid
    cells = np.argwhere(f.mask)
    for j, i in cells[rng.choice(len(cells), 20, replace=False)]:
        r = propagation_check(f, (int(j), int(i)))
        assert r.variation <= 5 * g.h
        assert not r.degenerate


def test_propagation_detects_grain(disk_grid):
    f = grain_boundary_field(disk_grid, np.pi / 2, 0.0)
    r = propagation_check(f, np.array([-0.3, 0.0]))
    assert r.variation == pytest.approx(np.pi / 2)


def test_propagation_outside_mask(tube_lift):
    f, _ = tube_lift
    with pytest.raises(ValueError):
        propagation_check(f, np.array([0.0, 0.0]))
