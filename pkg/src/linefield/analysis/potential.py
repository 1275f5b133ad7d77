"""Potential of the rotated lifting: grad phi = m_perp."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..errors import FieldError, NotAGradientError
from ..geometry import rot90
from ..grid import gradient, interpolate
from ..patterns import OrientedField

CURL_LIMIT = 0.1


@dataclass
class PotentialResult:
    phi: np.ndarray  # NaN off the mask
    curl_residual: float  # largest closing error of a fundamental cycle
    constants: list  # mean boundary value per grid component, outer first
    spreads: list  # std of the boundary values per component
    gap: float | None  # |c_1 - c_0| for two components
    gradient_error: float  # max |grad phi - m_perp| on cells >= 3h inside


def potential(m: OrientedField, root=None) -> PotentialResult:
    """Integrate ``m_perp`` along a BFS spanning tree of the mask.

    phi is fixed by phi(root) = 0, then shifted so that its minimum over the
    outermost boundary component is 0. Boundary values are extrapolated from
    1.5h inside along the normal with the local slope ``m_perp . n``.
    """
    grid = m.grid
    mask = m.mask
    if not mask.any():
        raise FieldError("empty mask")
    mp = rot90(m.m)
    mp = np.where(mask[..., None], mp, 0.0)
    if root is None:
        root = tuple(int(v[0]) for v in np.nonzero(mask))
    phi, seen, worst = _kernels.tree_potential(
        np.ascontiguousarray(mp[..., 0]), np.ascontiguousarray(mp[..., 1]), mask, root[0], root[1], grid.h)
    if worst > CURL_LIMIT:
        raise NotAGradientError(f"curl residual {worst:.3g} > {CURL_LIMIT}: m_perp is not a gradient")
    if not seen[mask].all():
        raise FieldError("mask is not connected; potential needs a connected field")
    phi = np.where(mask, phi, np.nan)

    values = []
    off = 1.5 * grid.h
    for comp in grid.components:
        q = comp.points - off * comp.normals
        pq = interpolate(phi, grid, q, mask=mask, strict=False)
        mq = interpolate(mp, grid, q, mask=mask, strict=False)
        vb = pq + off * np.einsum("ki,ki->k", mq, comp.normals)
        values.append(vb[np.isfinite(vb)])
    outer = next((k for k, c in enumerate(grid.components) if c.outermost), 0)
    shift = float(values[outer].min()) if values and values[outer].size else 0.0
    phi = phi - shift
    values = [v - shift for v in values]
    constants = [float(v.mean()) for v in values]
    spreads = [float(v.std()) for v in values]
    gap = abs(constants[1] - constants[0]) if len(constants) == 2 else None

    g = gradient(phi, grid, mask)
    deep = mask & (grid.sdf < -3 * grid.h)
    err = np.linalg.norm(g - mp, axis=-1)[deep]
    gerr = float(np.nanmax(err)) if err.size else 0.0
    return PotentialResult(phi, float(worst), constants, spreads, gap, gerr)
