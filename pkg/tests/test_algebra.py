import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linefield.analysis import determinant, gradient_recovery
from linefield.errors import InvalidProjectionError
from linefield.grid import box_grid, divergence_tensor
from linefield.patterns import LineField


def test_determinant_identity_random(rng):
    th = rng.uniform(0, np.pi, 10_000)
    a, b = np.cos(th) ** 2, np.sin(th) * np.cos(th)
    assert np.abs(determinant(a, b) - 0.25).max() <= 1e-12


@settings(max_examples=300, deadline=None)
@given(st.floats(0, np.pi, exclude_max=True))
def test_determinant_identity_property(th):
    a, b = np.cos(th) ** 2, np.sin(th) * np.cos(th)
    assert abs(determinant(a, b) - 0.25) <= 1e-12


def _fixture(theta_fn, h):
    g = box_grid(0, 0, 1, 1, h, pad=2)
    X, Y = g.centers()
    f = LineField(np.where(g.inside, theta_fn(X, Y), np.nan), g)
    P = f.tensor()
    d = divergence_tensor(P, g, mask=f.mask)
    res = np.einsum("...ij,...j->...i", P, d)
    return g, f, d, res


@pytest.mark.parametrize("kind", ["x", "x+y/2"])
def test_gradient_recovery_second_order(kind):
    def theta(X, Y):
        return X if kind == "x" else X + Y / 2

    def exact_a1(X, Y):
        return -np.sin(2 * theta(X, Y))  # d/dx cos^2(theta) with d theta/dx = 1

    errs = []
    for h in (1 / 32, 1 / 64, 1 / 128):
        g, f, d, res = _fixture(theta, h)
        a1, a2, det = gradient_recovery(f.a, f.b, d[..., 0], d[..., 1], residual=res)
        X, Y = g.centers()
        deep = g.inside & (g.sdf < -2 * h)
        assert np.abs(det[f.mask] - 0.25).max() < 1e-12
        errs.append(np.abs(a1 - exact_a1(X, Y))[deep].max())
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 1.8)


def test_gradient_recovery_matches_central_differences():
    g, f, d, res = _fixture(lambda X, Y: X + Y / 2, 1 / 64)
    a1, a2, _ = gradient_recovery(f.a, f.b, d[..., 0], d[..., 1], residual=res)
    deep = g.inside & (g.sdf < -2 * g.h)
    cx = (np.roll(f.a, -1, 1) - np.roll(f.a, 1, 1)) / (2 * g.h)
    cy = (np.roll(f.a, -1, 0) - np.roll(f.a, 1, 0)) / (2 * g.h)
    # with the discrete residual supplied the system reproduces the stencil exactly
    assert np.abs(a1 - cx)[deep].max() < 1e-12
    assert np.abs(a2 - cy)[deep].max() < 1e-12


def test_gradient_recovery_for_solution_rhs():
    # P div P = 0 with a residual of zero reproduces the default right-hand side
    a, b = np.array([0.25]), np.array([np.sqrt(3) / 4])
    f, g = np.array([0.3]), np.array([-0.2])
    x = gradient_recovery(a, b, f, g)
    y = gradient_recovery(a, b, f, g, residual=np.zeros((1, 2)))
    assert np.allclose(x[0], y[0]) and np.allclose(x[1], y[1])


def test_gradient_recovery_rejects_invalid_projection(caplog):
    with pytest.raises(InvalidProjectionError):
        gradient_recovery(np.array([0.5]), np.array([0.1]), np.zeros(1), np.zeros(1))
    with caplog.at_level(logging.WARNING):
        gradient_recovery(np.array([0.5]), np.array([0.5 + 1e-8]), np.zeros(1), np.zeros(1))
    assert "deviates" in caplog.text
