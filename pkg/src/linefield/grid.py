"""Rasterized domains and discrete field calculus.

Arrays are indexed ``[iy, ix]`` with ``y`` increasing with ``iy``; cell
``(iy, ix)`` has centre ``(x0 + (ix + 1/2) h, y0 + (iy + 1/2) h)``. Scalar
fields are ``(ny, nx)`` arrays with NaN outside their mask, vector fields
``(ny, nx, 2)`` and tensor fields ``(ny, nx, 2, 2)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import _kernels
from .errors import InterpolationError, ResolutionError, ZeroMeasureError
from .geometry import BoundaryComponent, DomainSpec, signed_distance

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RasterGrid:
    x0: float
    y0: float
    h: float
    nx: int
    ny: int
    inside: np.ndarray
    sdf: np.ndarray
    node_sdf: np.ndarray
    labels: np.ndarray
    components: tuple = field(default_factory=tuple)
    spec: DomainSpec | None = None

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def bbox(self):
        return (self.x0, self.y0, self.x0 + self.nx * self.h, self.y0 + self.ny * self.h)

    @property
    def band(self):
        """Inside cells within 2h of the boundary."""
        return self.inside & (self.sdf > -2 * self.h)

    @property
    def n_components(self) -> int:
        return int(self.labels.max())

    def centers(self):
        x = self.x0 + (np.arange(self.nx) + 0.5) * self.h
        y = self.y0 + (np.arange(self.ny) + 0.5) * self.h
        return np.meshgrid(x, y)

    def center(self, j, i):
        return np.array([self.x0 + (i + 0.5) * self.h, self.y0 + (j + 0.5) * self.h])

    def cell_of(self, points):
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        i = np.floor((p[:, 0] - self.x0) / self.h).astype(int)
        j = np.floor((p[:, 1] - self.y0) / self.h).astype(int)
        return j, i

    def in_bounds(self, j, i):
        return (j >= 0) & (i >= 0) & (j < self.ny) & (i < self.nx)

    def face_fractions(self):
        """Inside fractions of vertical ``(ny, nx+1)`` and horizontal ``(ny+1, nx)`` faces."""
        s = self.node_sdf
        return _frac(s[:-1, :], s[1:, :]), _frac(s[:, :-1], s[:, 1:])

    @property
    def outermost(self) -> BoundaryComponent | None:
        for c in self.components:
            if c.outermost:
                return c
        return None


def _frac(a, b):
    """Length fraction of a segment with endpoint signed distances a, b that lies inside."""
    out = np.where((a < 0) & (b < 0), 1.0, 0.0)
    cut = (a < 0) != (b < 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        neg = np.where(a < 0, a, b)
        pos = np.where(a < 0, b, a)
        f = -neg / (pos - neg)
    return np.where(cut, f, out)


def _label_outside(inside):
    labels, n = ndimage.label(~inside)
    return labels, n


def _attach_labels(components, labels, x0, y0, h):
    ny, nx = labels.shape
    out = []
    for c in components:
        probe = c.points + 2 * h * c.normals
        i = np.clip(np.floor((probe[:, 0] - x0) / h).astype(int), 0, nx - 1)
        j = np.clip(np.floor((probe[:, 1] - y0) / h).astype(int), 0, ny - 1)
        lab = labels[j, i]
        lab = lab[lab > 0]
        val = int(np.bincount(lab).argmax()) if lab.size else -1
        out.append(BoundaryComponent(c.points, c.normals, c.tangents, c.outermost, val))
    return tuple(out)


def rasterize(spec: DomainSpec, h: float, bbox=None) -> RasterGrid:
    """Classify cells of a uniform raster covering the domain padded by 4h."""
    if not h > 0:
        raise ValueError("h must be positive")
    if spec.mode == "tubular" and 2 * spec.delta / h < 8:
        raise ResolutionError(
            f"h={h:g} resolves the tube with {2 * spec.delta / h:.1f} cells across 2*delta (< 8)")
    if bbox is None:
        bx0, by0, bx1, by1 = spec.bbox
        x0, y0 = bx0 - 4 * h, by0 - 4 * h
        nx = int(np.ceil((bx1 + 4 * h - x0) / h))
        ny = int(np.ceil((by1 + 4 * h - y0) / h))
    else:
        x0, y0, x1, y1 = bbox
        nx = int(round((x1 - x0) / h))
        ny = int(round((y1 - y0) / h))
    xs = x0 + (np.arange(nx) + 0.5) * h
    ys = y0 + (np.arange(ny) + 0.5) * h
    X, Y = np.meshgrid(xs, ys)
    sdf = signed_distance(spec, np.stack([X, Y], -1))
    xn = x0 + np.arange(nx + 1) * h
    yn = y0 + np.arange(ny + 1) * h
    Xn, Yn = np.meshgrid(xn, yn)
    node_sdf = signed_distance(spec, np.stack([Xn, Yn], -1))
    inside = sdf < 0
    labels, n = _label_outside(inside)
    comps = _attach_labels(spec.boundary(spacing=h), labels, x0, y0, h)
    if n != len(comps) or sorted(c.label for c in comps) != list(range(1, n + 1)):
        raise ResolutionError(
            f"raster at h={h:g} shows {n} boundary component(s) but the domain has {len(comps)}")
    return RasterGrid(float(x0), float(y0), float(h), nx, ny, inside, sdf, node_sdf, labels, comps, spec)


def box_grid(x0, y0, x1, y1, h, pad=4) -> RasterGrid:
    """Axis-aligned rectangle ``[x0,x1] x [y0,y1]`` rasterized with ``pad`` outside cells."""
    gx0, gy0 = x0 - pad * h, y0 - pad * h
    nx = int(round((x1 - x0) / h)) + 2 * pad
    ny = int(round((y1 - y0) / h)) + 2 * pad
    cx, cy, hx, hy = (x0 + x1) / 2, (y0 + y1) / 2, (x1 - x0) / 2, (y1 - y0) / 2

    def box_sdf(X, Y):
        qx, qy = np.abs(X - cx) - hx, np.abs(Y - cy) - hy
        outside = np.hypot(np.maximum(qx, 0), np.maximum(qy, 0))
        return outside + np.minimum(np.maximum(qx, qy), 0)

    X, Y = np.meshgrid(gx0 + (np.arange(nx) + 0.5) * h, gy0 + (np.arange(ny) + 0.5) * h)
    Xn, Yn = np.meshgrid(gx0 + np.arange(nx + 1) * h, gy0 + np.arange(ny + 1) * h)
    sdf = box_sdf(X, Y)
    inside = sdf < 0
    labels, _ = _label_outside(inside)
    per = max(4, int(round(2 * hx / h)))
    t = (np.arange(per) + 0.5) / per
    bottom = np.stack([x0 + t * (x1 - x0), np.full(per, y0)], 1)
    right = np.stack([np.full(per, x1), y0 + t * (y1 - y0)], 1)
    top = np.stack([x1 - t * (x1 - x0), np.full(per, y1)], 1)
    left = np.stack([np.full(per, x0), y1 - t * (y1 - y0)], 1)
    pts = np.vstack([bottom, right, top, left])
    nrm = np.vstack([np.tile([0.0, -1.0], (per, 1)), np.tile([1.0, 0.0], (per, 1)),
                     np.tile([0.0, 1.0], (per, 1)), np.tile([-1.0, 0.0], (per, 1))])
    tan = np.stack([-nrm[:, 1], nrm[:, 0]], 1)
    comps = _attach_labels([BoundaryComponent(pts, nrm, tan, True)], labels, gx0, gy0, h)
    return RasterGrid(float(gx0), float(gy0), float(h), nx, ny, inside, sdf, box_sdf(Xn, Yn), labels, comps, None)


def grid_from_mask(x0, y0, h, inside, components=()) -> RasterGrid:
    """Grid known only through its cell mask (staircase boundary)."""
    inside = np.asarray(inside, dtype=bool)
    ny, nx = inside.shape
    sdf = np.where(inside, -0.5 * h, 0.5 * h)
    pad = np.zeros((ny + 2, nx + 2), dtype=bool)
    pad[1:-1, 1:-1] = inside
    all_in = pad[:-1, :-1] & pad[:-1, 1:] & pad[1:, :-1] & pad[1:, 1:]
    node_sdf = np.where(all_in, -0.5 * h, 0.5 * h)
    labels, _ = _label_outside(inside)
    return RasterGrid(float(x0), float(y0), float(h), nx, ny, inside, sdf, node_sdf, labels, tuple(components), None)


# --------------------------------------------------------------------------
# differentiation
# --------------------------------------------------------------------------
def _shift(a, k, axis, fill):
    """``out[i] = a[i + k]`` along ``axis``; ``fill`` past the edge."""
    out = np.full_like(a, fill)
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    n = a.shape[axis]
    if k > 0:
        src[axis], dst[axis] = slice(k, n), slice(0, n - k)
    else:
        src[axis], dst[axis] = slice(0, n + k), slice(-k, n)
    out[tuple(dst)] = a[tuple(src)]
    return out


def _partial(f, m, h, axis):
    """Derivative along ``axis``: centred where possible, else one-sided (2nd, then 1st order)."""
    fv = np.where(m, f, 0.0)
    vals = {k: _shift(fv, k, axis, 0.0) for k in (-2, -1, 1, 2)}
    ms = {k: _shift(m, k, axis, False) for k in (-2, -1, 1, 2)}
    out = np.full(f.shape, np.nan)
    done = np.zeros(f.shape, dtype=bool)
    rules = [
        (ms[1] & ms[-1], (vals[1] - vals[-1]) / (2 * h)),
        (ms[1] & ms[2], (-3 * fv + 4 * vals[1] - vals[2]) / (2 * h)),
        (ms[-1] & ms[-2], (3 * fv - 4 * vals[-1] + vals[-2]) / (2 * h)),
        (ms[1], (vals[1] - fv) / h),
        (ms[-1], (fv - vals[-1]) / h),
    ]
    for cond, v in rules:
        sel = m & cond & ~done
        out[sel] = v[sel]
        done |= sel
    return out


def gradient(f, grid: RasterGrid, mask=None):
    """Gradient ``(ny, nx, 2)``; NaN on cells with no usable neighbour."""
    f = np.asarray(f, dtype=float)
    m = np.isfinite(f) if mask is None else (np.asarray(mask, bool) & np.isfinite(f))
    gx = _partial(f, m, grid.h, axis=1)
    gy = _partial(f, m, grid.h, axis=0)
    return np.stack([gx, gy], -1)


def divergence_tensor(P, grid: RasterGrid, extended: bool = False, mask=None):
    """Row-wise divergence ``(div P)_i = sum_j d_j P_ij``.

    ``extended=False`` differentiates inside the mask only (one-sided near the
    edge). ``extended=True`` returns the distributional divergence of P
    extended by zero, as cut-cell face fluxes over every raster cell: a
    non-zero boundary trace Pn shows up as an O(1/h) band.
    """
    P = np.asarray(P, dtype=float)
    if mask is None:
        mask = grid.inside & np.all(np.isfinite(P), axis=(-2, -1))
    mask = np.asarray(mask, dtype=bool)
    if not extended:
        out = np.zeros(P.shape[:2] + (2,))
        for i in range(2):
            out[..., i] = _partial(P[..., i, 0], mask, grid.h, 1) + _partial(P[..., i, 1], mask, grid.h, 0)
        return out
    state, Pe = _extension(P, mask, grid)
    fx, fy = grid.face_fractions()
    return _kernels.flux_divergence(np.ascontiguousarray(Pe), state, fx, fy, grid.h)


def _extension(P, mask, grid):
    """Cell states for the flux kernel and P copied into cut cells from the nearest mask cell."""
    s = grid.node_sdf
    touched = (s[:-1, :-1] < 0) | (s[:-1, 1:] < 0) | (s[1:, :-1] < 0) | (s[1:, 1:] < 0)
    state = np.zeros(mask.shape, dtype=np.int8)
    cut = touched & ~grid.inside
    state[cut] = _kernels.CUT
    state[grid.inside & ~mask] = _kernels.HOLE
    state[mask] = _kernels.IN
    Pe = np.where(mask[..., None, None], P, 0.0)
    if cut.any() and mask.any():
        _, (jj, ii) = ndimage.distance_transform_edt(~mask, return_indices=True)
        Pe[cut] = Pe[jj[cut], ii[cut]]
    return state, Pe


# --------------------------------------------------------------------------
# norms, traces, interpolation
# --------------------------------------------------------------------------
def lp_norm(values, p: float, region, h: float, root: bool = True) -> float:
    """``(sum |v|^p h^2)^(1/p)`` over ``region``; vectors are measured by Euclidean length."""
    if not p >= 1 or not np.isfinite(p):
        raise ValueError("p must be finite and >= 1")
    v = np.asarray(values, dtype=float)
    if v.ndim == 3:
        v = np.linalg.norm(v, axis=-1)
    region = np.asarray(region, dtype=bool)
    if not region.any():
        raise ZeroMeasureError("empty region")
    vals = np.abs(v[region])
    if not np.all(np.isfinite(vals)):
        raise ValueError("field is not finite on the region")
    total = float(np.sum(vals**p) * h * h)
    return total ** (1.0 / p) if root else total


def _fractional_index(grid, points):
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    return (p[:, 0] - grid.x0) / grid.h - 0.5, (p[:, 1] - grid.y0) / grid.h - 0.5


def interpolate(values, grid: RasterGrid, points, mask=None, strict: bool = True, angular: bool = False):
    """Bilinear interpolation on cell centres.

    ``angular=True`` treats values as angles mod pi and interpolates along the
    shortest path. Points whose 2x2 stencil leaves the mask raise
    :class:`InterpolationError` (or give NaN with ``strict=False``).
    """
    v = np.asarray(values, dtype=float)
    scalar = v.ndim == 2
    if scalar:
        v = v[..., None]
    if mask is None:
        mask = np.all(np.isfinite(v), axis=-1)
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    fxi, fyi = _fractional_index(grid, pts)
    out = _kernels.bilinear(np.ascontiguousarray(v), np.asarray(mask, bool), fxi, fyi, angular)
    bad = np.isnan(out[:, 0])
    if strict and bad.any():
        raise InterpolationError(f"{int(bad.sum())} point(s) outside an inside interpolation stencil")
    if scalar:
        out = out[:, 0]
    return out[0] if single else out


@dataclass
class TraceResult:
    values: list  # per component: (n, 2) array of Pn, NaN where skipped
    max_abs: float
    skipped: int


def boundary_trace(P, grid: RasterGrid, mask=None, offset: float = 1.5) -> TraceResult:
    """``P n`` at boundary samples, with P interpolated bilinearly ``offset * h`` inside.

    With the default 1.5h every stencil cell lies inside a boundary with
    curvature radius well above h.
    """
    P = np.asarray(P, dtype=float)
    flat = P.reshape(P.shape[:2] + (4,))
    if mask is None:
        mask = grid.inside & np.all(np.isfinite(flat), axis=-1)
    values = []
    skipped = 0
    worst = 0.0
    for comp in grid.components:
        q = comp.points - offset * grid.h * comp.normals
        Pi = interpolate(flat, grid, q, mask=mask, strict=False).reshape(-1, 2, 2)
        pn = np.einsum("kij,kj->ki", Pi, comp.normals)
        bad = np.isnan(pn[:, 0])
        skipped += int(bad.sum())
        if (~bad).any():
            worst = max(worst, float(np.max(np.linalg.norm(pn[~bad], axis=1))))
        values.append(pn)
    if skipped:
        log.warning("boundary_trace skipped %d sample(s) outside the interpolation stencil", skipped)
    return TraceResult(values, worst, skipped)


def l2_growth_test(norms, threshold: float = 0.10) -> dict:
    """Refinement growth rule for ``div P in L^2``.

    ``norms`` are ||div P|| at successively halved h. The field is declared
    divergent when the mean per-halving growth factor exceeds
    ``1 + threshold``.
    """
    norms = np.asarray(norms, dtype=float)
    if len(norms) < 2:
        return {"ratios": [], "mean_ratio": None, "divergent": None}
    ratios = norms[1:] / norms[:-1]
    mean = float(np.exp(np.mean(np.log(ratios))))
    return {"ratios": ratios.tolist(), "mean_ratio": mean, "divergent": bool(mean > 1.0 + threshold)}
