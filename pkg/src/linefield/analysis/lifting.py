"""Orientability of line fields: BFS lifting, winding numbers, defect scans."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .. import _kernels
from ..errors import InvalidLoopError, RoughFieldError
from ..grid import RasterGrid
from ..patterns import LineField, OrientedField

log = logging.getLogger(__name__)

# adjacent cells whose lines differ by more than pi/2 - ROUGH_GAP have no
# well-defined nearest orientation
ROUGH_GAP = 0.2
COS_GUARD = float(np.sin(ROUGH_GAP))

_MOORE = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))


@dataclass
class LiftResult:
    """Outcome of :func:`lift`.

    On success ``field`` holds m with ``m (x) m = P``. Otherwise ``witness``
    is a counterclockwise cell loop ``(k, 2)`` of ``(j, i)`` indices along
    which transporting the orientation flips it.
    """

    orientable: bool
    field: OrientedField | None
    witness: np.ndarray | None = None
    witness_winding: float | None = None
    seeds: list = field(default_factory=list)  # (j, i, sign) per connected piece

    def to_dict(self) -> dict:
        out = {"orientable": self.orientable, "seeds": [list(map(int, s)) for s in self.seeds]}
        if self.witness is not None:
            out["witness_loop"] = self.witness.tolist()
            out["witness_winding"] = self.witness_winding
        return out


def _tree_path(parent, node):
    path = [node]
    while parent[node] >= 0:
        node = int(parent[node])
        path.append(node)
    return path


def _loop_from_edge(parent, a, b, nx):
    """Cycle ``a -> ... -> lca -> ... -> b`` closed by the edge ``b -> a``."""
    pa = _tree_path(parent, a)
    pb = _tree_path(parent, b)
    where = {n: k for k, n in enumerate(pa)}
    kb = next(k for k, n in enumerate(pb) if n in where)
    ka = where[pb[kb]]
    cyc = pa[: ka + 1] + pb[:kb][::-1]
    return np.array([divmod(c, nx) for c in cyc], dtype=np.int64)


def _ccw(loop):
    """Reverse ``loop`` if it runs clockwise in the (x, y) = (i, j) plane."""
    x, y = loop[:, 1].astype(float), loop[:, 0].astype(float)
    area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    return loop[::-1].copy() if area < 0 else loop


def lift(P: LineField, seed=None, sign: int = 1) -> LiftResult:
    """Orient a line field by breadth-first growth from a seed cell.

    Each new cell takes the orientation closest to its BFS parent; meeting an
    already oriented cell with the opposite orientation means the field is
    not orientable, and the loop through the BFS tree closing that edge is
    returned as witness. Each 4-connected piece of the mask is lifted from
    its own seed (the first cell in raster order unless ``seed`` lies in it).

    Raises :class:`RoughFieldError` when neighbouring lines are within
    ``ROUGH_GAP`` of perpendicular.
    """
    mask = P.mask
    theta = np.where(mask, P.theta, 0.0)
    labels, n = ndimage.label(mask)
    ny, nx = mask.shape
    m = np.zeros((ny, nx, 2))
    seeds = []
    for lab in range(1, n + 1):
        piece = labels == lab
        if seed is not None and piece[seed[0], seed[1]]:
            sj, si = int(seed[0]), int(seed[1])
        else:
            sj, si = (int(v[0]) for v in np.nonzero(piece))
        mx, my, parent, _, status, a, b = _kernels.lift_bfs(theta, piece, sj, si, float(sign), COS_GUARD)
        seeds.append((sj, si, sign))
        if status == _kernels.LIFT_ROUGH:
            ja, ia = divmod(int(a), nx)
            jb, ib = divmod(int(b), nx)
            d = abs(_kernels.wrap_half(P.theta[jb, ib] - P.theta[ja, ia]))
            raise RoughFieldError(
                f"field too rough to lift at this resolution: cells ({ja},{ia}) and ({jb},{ib}) "
                f"differ by {d:.4f} rad, within {ROUGH_GAP} of pi/2")
        if status == _kernels.LIFT_CONFLICT:
            loop = _ccw(_loop_from_edge(parent, int(a), int(b), nx))
            w = winding_number(P, loop)
            return LiftResult(False, None, loop, w, seeds)
        m[..., 0] += np.where(piece, mx, 0.0)
        m[..., 1] += np.where(piece, my, 0.0)
    return LiftResult(True, OrientedField(m, P.grid, mask.copy()), None, None, seeds)


def winding_number(P: LineField, loop) -> float:
    """Total rotation of the line direction along a closed cell loop, in turns.

    ``loop`` is a ``(k, 2)`` array of ``(j, i)`` cells, consecutive cells
    8-adjacent, closed implicitly. Each increment is taken in
    ``(-pi/2, pi/2]``, so the result is a multiple of 1/2.
    """
    loop = np.asarray(loop, dtype=np.int64)
    if loop.ndim != 2 or loop.shape[1] != 2 or len(loop) < 3:
        raise InvalidLoopError("loop must be a (k, 2) array with k >= 3")
    if np.array_equal(loop[0], loop[-1]):
        loop = loop[:-1]
    j, i = loop[:, 0], loop[:, 1]
    ny, nx = P.mask.shape
    if np.any((j < 0) | (i < 0) | (j >= ny) | (i >= nx)) or not P.mask[j, i].all():
        raise InvalidLoopError("loop touches cells outside the field mask")
    step = np.abs(np.roll(loop, -1, axis=0) - loop).max(axis=1)
    if np.any(step > 1):
        raise InvalidLoopError("consecutive loop cells are not adjacent")
    th = P.theta[j, i]
    d = _kernels.wrap_half(np.roll(th, -1) - th)
    w = float(np.sum(d) / (2 * np.pi))
    return float(np.round(2 * w) / 2) if abs(2 * w - np.round(2 * w)) < 1e-9 else w


def circle_loop(grid: RasterGrid, center, radius: float) -> np.ndarray:
    """Counterclockwise 8-connected cell loop following a circle."""
    n = max(64, int(np.ceil(8 * np.pi * radius / grid.h)))
    a = 2 * np.pi * np.arange(n) / n
    pts = np.stack([center[0] + radius * np.cos(a), center[1] + radius * np.sin(a)], 1)
    j, i = grid.cell_of(pts)
    cells = np.stack([j, i], 1)
    keep = np.any(cells != np.roll(cells, 1, axis=0), axis=1)
    return cells[keep]


def trace_ring(region) -> np.ndarray:
    """Outer boundary of a cell region by Moore-neighbour tracing, counterclockwise."""
    region = np.asarray(region, dtype=bool)
    js, is_ = np.nonzero(region)
    if js.size == 0:
        raise InvalidLoopError("empty region")
    ny, nx = region.shape

    def inside(j, i):
        return 0 <= j < ny and 0 <= i < nx and region[j, i]

    start = (int(js[0]), int(is_[0]))
    if js.size == 1:
        return np.array([start])
    cur, back = start, 0  # came from the west, which is outside
    out = [start]
    seen = set()
    while True:
        for k in range(1, 9):
            d = (back + k) % 8
            nxt = (cur[0] + _MOORE[d][0], cur[1] + _MOORE[d][1])
            if inside(*nxt):
                break
        prev = (cur[0] + _MOORE[(d - 1) % 8][0], cur[1] + _MOORE[(d - 1) % 8][1])
        back = _MOORE.index((prev[0] - nxt[0], prev[1] - nxt[1]))
        state = (nxt, back)
        if state in seen:
            break
        seen.add(state)
        cur = nxt
        out.append(cur)
    loop = np.array(out[:-1] if out[-1] == start else out, dtype=np.int64)
    # drop a trailing repeat of the start cell
    while len(loop) > 1 and tuple(loop[-1]) == start:
        loop = loop[:-1]
    return _ccw(loop)


@dataclass
class HoleLoop:
    """A loop of mask cells around one hole of the mask."""

    kind: str  # "core" (masked cells inside the domain) or "boundary" (a hole of the domain)
    center: tuple
    loop: np.ndarray | None
    winding: float | None


def hole_loops(P: LineField) -> list:
    """Winding around every bounded component of the complement of the mask."""
    grid = P.grid
    comp, n = ndimage.label(~P.mask)
    out = []
    edge = set(np.unique(np.concatenate([comp[0], comp[-1], comp[:, 0], comp[:, -1]])).tolist())
    X, Y = grid.centers()
    for lab in range(1, n + 1):
        if lab in edge:
            continue
        hole = comp == lab
        kind = "core" if np.all(grid.inside[hole]) else "boundary"
        center = (float(X[hole].mean()), float(Y[hole].mean()))
        ring = ndimage.binary_dilation(hole, structure=np.ones((3, 3), bool))
        loop = trace_ring(ring)
        try:
            w = winding_number(P, loop)
        except InvalidLoopError:
            log.warning("no valid loop of mask cells around the hole at (%.3g, %.3g)", *center)
            loop, w = None, None
        out.append(HoleLoop(kind, center, loop, w))
    return out


def plaquette_scan(P: LineField, threshold: float = 0.25) -> dict:
    """Windings of all 2x2 plaquettes; returns defects and rough plaquettes.

    A plaquette with an edge within ``ROUGH_GAP`` of a right angle has no
    reliable winding and is reported as rough instead of as a defect.
    """
    w = _kernels.plaquette_winding(np.where(P.mask, P.theta, 0.0), P.mask)
    th = P.theta
    ex = np.abs(_kernels.wrap_half(th[:, 1:] - th[:, :-1])) > 0.5 * np.pi - ROUGH_GAP
    ey = np.abs(_kernels.wrap_half(th[1:, :] - th[:-1, :])) > 0.5 * np.pi - ROUGH_GAP
    rough = ex[:-1, :] | ex[1:, :] | ey[:, :-1] | ey[:, 1:]
    rough &= np.isfinite(w)
    grid = P.grid
    defects = []
    for j, i in zip(*np.nonzero((np.abs(np.nan_to_num(w)) > threshold) & ~rough)):
        x, y = grid.x0 + (i + 1) * grid.h, grid.y0 + (j + 1) * grid.h
        defects.append({"x": float(x), "y": float(y), "charge": float(np.round(2 * w[j, i]) / 2), "source": "plaquette"})
    return {"windings": w, "defects": defects, "n_rough": int(rough.sum())}


def scan_defects(P: LineField) -> dict:
    """Defects from plaquettes and masked cores, plus the windings around domain holes."""
    plaq = plaquette_scan(P)
    defects = list(plaq["defects"])
    holes = []
    for hl in hole_loops(P):
        rec = {"x": hl.center[0], "y": hl.center[1], "charge": hl.winding}
        if hl.kind == "core":
            if hl.winding is None or abs(hl.winding) > 0.25:
                defects.append(dict(rec, source="core"))
        else:
            holes.append(rec)
    return {"defects": defects, "boundary_holes": holes, "n_rough": plaq["n_rough"]}
