"""Line fields, oriented fields and the canonical analytic patterns."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConsistencyError, InvalidProjectionError
from .geometry import DomainSpec, validate_tubular_spec
from .grid import RasterGrid, rasterize


@dataclass(eq=False)
class LineField:
    """Unoriented direction ``theta in [0, pi)`` per cell; NaN off the mask.

    The projection is ``P = [[a, b], [b, c]]`` with ``a = cos^2``,
    ``b = sin cos`` and ``c = 1 - a``.
    """

    theta: np.ndarray
    grid: RasterGrid
    mask: np.ndarray | None = None
    name: str = "field"
    params: dict = field(default_factory=dict)
    entries: tuple | None = None  # stored (a, b, c), e.g. read back from disk

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        if self.mask is None:
            self.mask = self.grid.inside & np.isfinite(th)
        self.mask = np.asarray(self.mask, dtype=bool)
        if np.any(~np.isfinite(th[self.mask])):
            raise InvalidProjectionError("theta is not finite on the mask")
        th = np.where(self.mask, np.mod(th, np.pi), np.nan)
        th[th >= np.pi] = 0.0
        self.theta = th

    @cached_property
    def abc(self):
        if self.entries is not None:
            return tuple(np.asarray(e, dtype=float) for e in self.entries)
        c, s = np.cos(self.theta), np.sin(self.theta)
        a = c * c
        return a, s * c, 1.0 - a

    @property
    def a(self):
        return self.abc[0]

    @property
    def b(self):
        return self.abc[1]

    @property
    def c(self):
        return self.abc[2]

    def tensor(self):
        a, b, c = self.abc
        return np.stack([np.stack([a, b], -1), np.stack([b, c], -1)], -2)

    def projection_defects(self) -> dict:
        """Per-cell defects of P^2 = P, rank 1 (trace 1, det 0) and symmetry, maximised over the mask."""
        P = self.tensor()[self.mask]
        if P.size == 0:
            return {"projection": 0.0, "rank": 0.0, "symmetry": 0.0, "entries": 0.0}
        proj = np.abs(P @ P - P).max()
        tr = np.abs(P[:, 0, 0] + P[:, 1, 1] - 1.0)
        det = np.abs(P[:, 0, 0] * P[:, 1, 1] - P[:, 0, 1] * P[:, 1, 0])
        sym = np.abs(P[:, 0, 1] - P[:, 1, 0]).max()
        a, b, c = (e[self.mask] for e in self.abc)
        ent = max(np.abs(b * b - a * c).max(), np.abs(a + c - 1.0).max())
        return {"projection": float(proj), "rank": float(max(tr.max(), det.max())),
                "symmetry": float(sym), "entries": float(ent)}

    def check_invariants(self, tol: float = 1e-12):
        d = self.projection_defects()
        bad = {k: v for k, v in d.items() if v > tol}
        if bad:
            raise InvalidProjectionError(f"projection invariants violated: {bad}")
        return d


@dataclass(eq=False)
class OrientedField:
    """Unit vector per cell; zero off the mask."""

    m: np.ndarray
    grid: RasterGrid
    mask: np.ndarray

    def line_field(self, name="lifted") -> LineField:
        th = np.arctan2(self.m[..., 1], self.m[..., 0])
        return LineField(np.where(self.mask, th, np.nan), self.grid, self.mask, name=name)

    def max_norm_defect(self) -> float:
        return float(np.abs(np.linalg.norm(self.m[self.mask], axis=-1) - 1.0).max())


# --------------------------------------------------------------------------
def tubular_direction(spec: DomainSpec, points):
    """Direction of gamma'(s*) mod pi at the nearest core point s* of each point."""
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    u, dist, ok = spec.curve.project(p)
    near = dist < spec.delta + 1e-9
    if np.any(near & ~ok):
        raise ConsistencyError(
            f"{int(np.sum(near & ~ok))} point(s) without an unambiguous nearest core point")
    _, t, _, _ = spec.curve.frame_raw(u)
    return np.mod(np.arctan2(t[:, 1], t[:, 0]), np.pi), dist


def exact_tubular_solution(spec: DomainSpec, grid: RasterGrid) -> LineField:
    """The unique solution on a tubular domain: stripes parallel to the core curve.

    Each inside cell is mapped back through ``(s, t) -> gamma(s) - t n(s)`` by
    nearest-point projection, and takes the tangent direction at ``s``.
    """
    validate_tubular_spec(spec)
    X, Y = grid.centers()
    pts = np.stack([X[grid.inside], Y[grid.inside]], -1)
    th, _ = tubular_direction(spec, pts)
    theta = np.full(grid.shape, np.nan)
    theta[grid.inside] = th
    return LineField(theta, grid, grid.inside.copy(), name="tubular")


def vortex_field(grid: RasterGrid, center=(0.0, 0.0), sign: int = 1, hole: float | None = None) -> OrientedField:
    """``m = sign (x - x0)_perp / |x - x0|`` with a hole of radius ``hole`` (default 2h) masked out."""
    if hole is None:
        hole = 2 * grid.h
    X, Y = grid.centers()
    dx, dy = X - center[0], Y - center[1]
    r = np.hypot(dx, dy)
    mask = grid.inside & (r > hole)
    with np.errstate(invalid="ignore", divide="ignore"):
        m = sign * np.stack([-dy / r, dx / r], -1)
    m = np.where(mask[..., None], m, 0.0)
    return OrientedField(m, grid, mask)


def target_field(grid: RasterGrid, center=(0.0, 0.0), hole: float | None = None) -> LineField:
    f = vortex_field(grid, center, 1, hole).line_field(name="target")
    return f


def uturn_field(grid: RasterGrid, center=(0.0, 0.0), hole: float | None = None) -> LineField:
    """Half-circle arcs about ``center`` above it, vertical stripes below; a +1/2 defect at ``center``."""
    if hole is None:
        hole = 2 * grid.h
    X, Y = grid.centers()
    dx, dy = X - center[0], Y - center[1]
    mask = grid.inside & (np.hypot(dx, dy) > hole)
    theta = np.where(dy > 0, np.arctan2(dx, -dy), 0.5 * np.pi)
    return LineField(np.where(mask, theta, np.nan), grid, mask, name="uturn")


def grain_boundary_field(grid: RasterGrid, theta_left: float, theta_right: float,
                         point=(0.0, 0.0), direction=(0.0, 1.0)) -> LineField:
    """Piecewise-constant field; 'left' is the side the rotated ``direction`` points to."""
    if np.isclose(np.mod(theta_left - theta_right, np.pi), 0.0):
        raise ValueError("theta_left and theta_right describe the same line")
    X, Y = grid.centers()
    side = direction[0] * (Y - point[1]) - direction[1] * (X - point[0])
    theta = np.where(side > 0, theta_left, theta_right)
    return LineField(np.where(grid.inside, theta, np.nan), grid, grid.inside.copy(), name="grain")


def constant_field(grid: RasterGrid, theta: float = 0.0) -> LineField:
    return LineField(np.where(grid.inside, float(theta), np.nan), grid, grid.inside.copy(), name="constant")


def stadium_spine_field(grid: RasterGrid, spine_half_length: float) -> LineField:
    """Tangential field around the segment ``[-a, a] x {0}``; a classification non-example only."""
    X, Y = grid.centers()
    px = np.clip(X, -spine_half_length, spine_half_length)
    dx, dy = X - px, Y
    theta = np.arctan2(dx, -dy)
    return LineField(np.where(grid.inside, theta, np.nan), grid, grid.inside.copy(), name="stadium-spine")


# --------------------------------------------------------------------------
def _build(name, spec, grid, params):
    c = (float(params.get("cx", 0.0)), float(params.get("cy", 0.0)))
    hole = params.get("hole")
    hole = None if hole is None else float(hole)
    if name == "tubular":
        return exact_tubular_solution(spec, grid)
    if name == "vortex":
        f = vortex_field(grid, c, int(params.get("sign", 1)), hole).line_field(name="vortex")
        return f
    if name == "target":
        return target_field(grid, c, hole)
    if name == "uturn":
        return uturn_field(grid, c, hole)
    if name == "grain":
        return grain_boundary_field(grid, float(params.get("theta_left", 0.0)),
                                    float(params.get("theta_right", np.pi / 2)), c,
                                    (float(params.get("dx", 0.0)), float(params.get("dy", 1.0))))
    if name == "constant":
        return constant_field(grid, float(params.get("theta", 0.0)))
    raise KeyError(name)


PATTERN_NAMES = ("tubular", "vortex", "target", "uturn", "grain", "constant")


def make_pattern(name: str, spec: DomainSpec, h: float, params: dict | None = None, grid: RasterGrid | None = None) -> LineField:
    """Rasterize ``spec`` at ``h`` and build the named pattern on it."""
    if name not in PATTERN_NAMES:
        raise KeyError(f"unknown pattern {name!r}; choose from {', '.join(PATTERN_NAMES)}")
    params = dict(params or {})
    if grid is None:
        grid = rasterize(spec, h)
    f = _build(name, spec, grid, params)
    f.name = name
    f.params = params
    return f
