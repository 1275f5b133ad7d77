import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linefield.analysis import circle_loop, hole_loops, lift, plaquette_scan, scan_defects, trace_ring, winding_number
from linefield.errors import InvalidLoopError, RoughFieldError
from linefield.geometry import DomainSpec, FourierCurve
from linefield.grid import box_grid, rasterize
from linefield.patterns import (LineField, constant_field, exact_tubular_solution, grain_boundary_field,
                                target_field, uturn_field, vortex_field)

from oracles import brute_winding


def _reproduces(P, res):
    m = res.field.m
    T = np.einsum("...i,...j->...ij", m, m)
    return np.abs(T - P.tensor())[P.mask].max()


def test_lift_constant(disk_grid):
    f = constant_field(disk_grid, 1.0)
    res = lift(f)
    assert res.orientable and _reproduces(f, res) < 1e-15


def test_lift_tube(annulus, annulus_grid):
    f = exact_tubular_solution(annulus, annulus_grid)
    res = lift(f)
    assert res.orientable and _reproduces(f, res) < 1e-15
    assert res.field.max_norm_defect() < 1e-14


def test_lift_sign_flips_field(annulus, annulus_grid):
    f = exact_tubular_solution(annulus, annulus_grid)
    a, b = lift(f, sign=1).field.m, lift(f, sign=-1).field.m
    assert np.allclose(a, -b)


def test_lift_uturn_gives_half_witness(disk_grid):
    res = lift(uturn_field(disk_grid))
    assert not res.orientable and res.field is None
    assert res.witness_winding == 0.5
    assert res.to_dict()["witness_winding"] == 0.5


def test_lift_rough_grain_raises(disk_grid):
    with pytest.raises(RoughFieldError):
        lift(grain_boundary_field(disk_grid, 0.0, np.pi / 2))


def test_lift_each_piece_separately():
    g = box_grid(0, 0, 2, 1, 1 / 16)
    X, _ = g.centers()
    mask = g.inside & (np.abs(X - 1) > 0.2)
    f = LineField(np.where(mask, 0.3, np.nan), g, mask)
    res = lift(f)
    assert res.orientable and len(res.seeds) == 2


def test_vortex_winding_is_one(disk_grid):
    f = vortex_field(disk_grid).line_field()
    loop = circle_loop(disk_grid, (0, 0), 0.5)
    assert winding_number(f, loop) == 1.0
    assert winding_number(f, loop[::-1]) == -1.0


def test_winding_matches_brute_force(disk_grid):
    f = uturn_field(disk_grid)
    loop = circle_loop(disk_grid, (0, 0), 0.5)

    def th(x, y):
        return np.where(y > 0, np.arctan2(x, -y), np.pi / 2)
    assert winding_number(f, loop) == pytest.approx(brute_winding(th, (0, 0), 0.5), abs=1e-9)


def test_winding_off_center_loop_is_zero(disk_grid):
    f = target_field(disk_grid)
    assert winding_number(f, circle_loop(disk_grid, (0.5, 0.0), 0.2)) == 0.0


def test_winding_invalid_loops(disk_grid):
    f = vortex_field(disk_grid).line_field()
    with pytest.raises(InvalidLoopError):
        winding_number(f, np.array([[0, 0], [0, 1]]))
    loop = circle_loop(disk_grid, (0, 0), 0.5)
    with pytest.raises(InvalidLoopError):
        winding_number(f, loop[::3])
    with pytest.raises(InvalidLoopError):
        winding_number(f, circle_loop(disk_grid, (0, 0), 1.3))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(-0.4, 0.4), st.floats(-0.4, 0.4), st.integers(-2, 2))
def test_winding_is_half_integer(radius, cx, cy, k):
    g = _box()
    X, Y = g.centers()
    th = 0.5 * k * np.arctan2(Y - 0.1, X + 0.2) + 0.3 * X
    f = LineField(np.where(g.inside, th, np.nan), g)
    r = min(radius, 0.95 - max(abs(cx), abs(cy)))
    loop = circle_loop(g, (cx, cy), max(r, 0.05))
    w = winding_number(f, loop)
    assert abs(2 * w - round(2 * w)) < 1e-9


_BOX = []


def _box():
    if not _BOX:
        _BOX.append(box_grid(-1, -1, 1, 1, 1 / 32))
    return _BOX[0]


def test_trace_ring_is_closed_ccw_loop():
    region = np.zeros((10, 10), bool)
    region[2:8, 3:7] = True
    region[4:6, 4:6] = False
    loop = trace_ring(region)
    step = np.abs(np.roll(loop, -1, 0) - loop).max(axis=1)
    assert step.max() == 1
    x, y = loop[:, 1], loop[:, 0]
    assert np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) > 0


def test_scan_uturn_core_half(disk_grid):
    scan = scan_defects(uturn_field(disk_grid))
    charges = [d["charge"] for d in scan["defects"]]
    assert charges == [0.5]
    assert scan["defects"][0]["source"] == "core"


def test_scan_vortex_and_constant(disk_grid):
    scan = scan_defects(target_field(disk_grid))
    assert [d["charge"] for d in scan["defects"]] == [1.0]
    assert scan_defects(constant_field(disk_grid))["defects"] == []


def test_annulus_hole_winding(annulus, annulus_grid):
    f = exact_tubular_solution(annulus, annulus_grid)
    holes = hole_loops(f)
    assert len(holes) == 1 and holes[0].kind == "boundary" and holes[0].winding == 1.0
    scan = scan_defects(f)
    assert scan["defects"] == [] and scan["boundary_holes"][0]["charge"] == 1.0


def test_plaquette_scan_finds_free_half_defect():
    g = box_grid(-1, -1, 1, 1, 1 / 32)
    X, Y = g.centers()
    th = 0.5 * np.arctan2(Y - 0.013, X - 0.021)
    f = LineField(np.where(g.inside, th, np.nan), g)
    d = plaquette_scan(f)["defects"]
    assert len(d) == 1 and d[0]["charge"] == 0.5
    assert abs(d[0]["x"] - 0.021) < g.h and abs(d[0]["y"] - 0.013) < g.h


def test_rough_plaquettes_are_not_defects(disk_grid):
    res = plaquette_scan(grain_boundary_field(disk_grid, 0.0, np.pi / 2))
    assert res["n_rough"] > 0 and res["defects"] == []
