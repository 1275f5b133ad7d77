"""Tubularity classifier and the uniqueness probe."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .. import _kernels
from ..errors import MalformedDomainError
from ..geometry import DomainSpec, class_A_test, trace_normals
from ..grid import RasterGrid, rasterize
from ..patterns import LineField

CV_LIMIT = 0.02


@dataclass
class TubularityVerdict:
    is_tubular: bool
    T_stats: dict | None
    components: int
    gamma: np.ndarray | None  # reconstructed core samples (n, 2)
    delta: float | None
    reason: str
    witness: tuple | None = None

    def to_dict(self) -> dict:
        out = {"is_tubular": self.is_tubular, "T_stats": self.T_stats, "components": self.components,
               "gamma": None if self.gamma is None else self.gamma.tolist(),
               "delta": self.delta, "reason": self.reason}
        if self.witness is not None:
            out["witness"] = [np.asarray(w).tolist() for w in self.witness]
        return out


def _default_h(spec):
    x0, y0, x1, y1 = spec.bbox
    return max(x1 - x0, y1 - y0) / 512


def classify_domain(spec: DomainSpec, grid: RasterGrid | None = None, n_samples: int = 256,
                    h: float | None = None) -> TubularityVerdict:
    """Decide whether the domain is a tube of constant width around a closed curve.

    Steps: count boundary components; measure the inward normal length T on
    the outermost component; look for two distinct normals meeting inside
    (then not tubular, with the T statistics still reported); otherwise
    tubular iff there are exactly two components and std(T)/mean(T) < 2%. On success the core is ``x - (T/2) n`` and
    ``delta = mean(T) / 2``.
    """
    if n_samples < 64:
        raise ValueError("classification needs at least 64 boundary samples")
    if h is None:
        h = grid.h if grid is not None else _default_h(spec)
    comps = spec.boundary(n=n_samples)
    n_comp = grid.n_components if grid is not None else len(comps)
    outer = next(c for c in comps if c.outermost)
    try:
        T, _ = trace_normals(spec, outer.points, -outer.normals, h)
        ca = class_A_test(spec, min(n_samples, 256), h)
    except MalformedDomainError as exc:
        return TubularityVerdict(False, None, n_comp, None, None, f"malformed domain: {exc}")
    mean, std = float(T.mean()), float(T.std())
    stats = {"mean": mean, "std": std, "min": float(T.min()), "max": float(T.max()), "cv": std / mean}
    if ca.found:
        return TubularityVerdict(False, stats, n_comp, None, None, "class-A witness", ca.witness)
    if n_comp != 2:
        return TubularityVerdict(False, stats, n_comp, None, None, f"component count {n_comp} != 2")
    if not stats["cv"] < CV_LIMIT:
        return TubularityVerdict(False, stats, n_comp, None, None,
                                 f"T non-constant (cv {stats['cv']:.4f} >= {CV_LIMIT})")
    gamma = outer.points - 0.5 * T[:, None] * outer.normals
    return TubularityVerdict(True, stats, n_comp, gamma, mean / 2, "")


def _to_polyline(points, poly):
    """Distance from each point to the closed polyline ``poly``."""
    a = poly
    b = np.roll(poly, -1, axis=0)
    k = min(8, len(a))
    _, idx = cKDTree(0.5 * (a + b)).query(points, k=k)
    idx = idx.reshape(len(points), -1)
    A, B = a[idx], b[idx]
    d = B - A
    t = np.clip(np.einsum("nki,nki->nk", points[:, None, :] - A, d) / np.einsum("nki,nki->nk", d, d), 0, 1)
    foot = A + t[..., None] * d
    return np.linalg.norm(points[:, None, :] - foot, axis=-1).min(axis=1)


def hausdorff_to_curve(points, curve_points) -> float:
    """Hausdorff distance between two closed polylines (vertices to segments, both ways)."""
    a, b = np.asarray(points, float), np.asarray(curve_points, float)
    return float(max(_to_polyline(a, b).max(), _to_polyline(b, a).max()))


def propagate_from_seed(spec: DomainSpec, grid: RasterGrid, s0: float, sign: int = 1,
                        extra: int = 0) -> LineField:
    """Line field built from boundary tangents carried inward along normal rays.

    The outermost boundary is sampled about every h/2 (plus ``extra``
    samples) starting near arclength fraction ``s0``; the tangent there,
    oriented by ``sign``, is copied along the inward normal up to its exit
    length T. Each cell takes the direction of the nearest ray sample.
    """
    h = grid.h
    outer = grid.outermost if grid.outermost is not None else spec.boundary(spacing=h)[0]
    L = np.sum(np.linalg.norm(np.diff(np.vstack([outer.points, outer.points[:1]]), axis=0), axis=1))
    n = int(np.ceil(2 * L / h)) + extra
    comp = next(c for c in spec.boundary(n=n) if c.outermost)
    k0 = int(round((s0 % 1.0) * n))
    pts = np.roll(comp.points, -k0, axis=0)
    nrm = np.roll(comp.normals, -k0, axis=0)
    tan = sign * np.roll(comp.tangents, -k0, axis=0)
    T, _ = trace_normals(spec, pts, -nrm, h)
    samples, dirs = [], []
    for p, d, t, Tk in zip(pts, -nrm, tan, T):
        steps = np.arange(0.0, Tk + 1e-12, 0.5 * h)
        samples.append(p[None, :] + steps[:, None] * d[None, :])
        dirs.append(np.repeat(t[None, :], len(steps), axis=0))
    samples = np.vstack(samples)
    dirs = np.vstack(dirs)
    X, Y = grid.centers()
    q = np.stack([X[grid.inside], Y[grid.inside]], -1)
    _, idx = cKDTree(samples).query(q)
    theta = np.full(grid.shape, np.nan)
    theta[grid.inside] = np.arctan2(dirs[idx, 1], dirs[idx, 0])
    return LineField(theta, grid, grid.inside.copy(), name="propagated")


def field_distance(A: LineField, B: LineField, region=None) -> float:
    """Max angular distance mod pi between two line fields on a common region."""
    region = A.mask & B.mask if region is None else region
    return float(np.max(np.abs(_kernels.wrap_half(A.theta[region] - B.theta[region]))))


def uniqueness_probe(spec: DomainSpec, grid: RasterGrid | None = None, k: int = 4, h: float = 1 / 64) -> dict:
    """Build the solution from ``k`` boundary seeds and compare the results pairwise.

    Seeds differ in start point, orientation and ray density, so each
    construction samples the boundary differently.
    """
    if grid is None:
        grid = rasterize(spec, h)
    fields = [propagate_from_seed(spec, grid, (j + 0.37) / k, 1 if j % 2 == 0 else -1, extra=7 * j)
              for j in range(k)]
    worst = 0.0
    for a in range(k):
        for b in range(a + 1, k):
            worst = max(worst, field_distance(fields[a], fields[b]))
    return {"k": k, "h": grid.h, "max_distance": worst, "fields": fields}
