"""Kinetic indicator, chord constancy and propagation along kernel lines."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..grid import RasterGrid, interpolate
from ..patterns import LineField, OrientedField

log = logging.getLogger(__name__)


@dataclass
class KineticField:
    xi: np.ndarray
    values: np.ndarray  # int8, 1 where m . xi > 0, else 0; -1 off the mask
    grid: RasterGrid
    mask: np.ndarray


def kinetic_field(m: OrientedField, xi) -> KineticField:
    xi = np.asarray(xi, dtype=float)
    if abs(np.linalg.norm(xi) - 1.0) > 1e-12:
        raise ValueError("xi must be a unit vector")
    dot = m.m[..., 0] * xi[0] + m.m[..., 1] * xi[1]
    v = np.where(m.mask, (dot > 0).astype(np.int8), np.int8(-1)).astype(np.int8)
    return KineticField(xi, v, m.grid, m.mask)


def _chord_runs(mask, j, i):
    """Split a sampled line into runs of consecutive inside samples."""
    ok = np.zeros(len(j), dtype=bool)
    ny, nx = mask.shape
    inb = (j >= 0) & (i >= 0) & (j < ny) & (i < nx)
    ok[inb] = mask[j[inb], i[inb]]
    edges = np.diff(np.concatenate([[0], ok.astype(np.int8), [0]]))
    return list(zip(np.nonzero(edges == 1)[0], np.nonzero(edges == -1)[0]))


def chord_sign_changes(chi: KineticField, n_chords: int = 64, step: float | None = None) -> list:
    """Sign changes of ``chi`` along chords parallel to ``chi.xi``.

    Lines ``x . xi_perp = c`` are placed at ``n_chords`` offsets spread evenly
    over the raster, sampled every ``step`` (default h/2) at the nearest cell,
    and split into maximal inside runs. Returns one record per run.
    """
    grid = chi.grid
    h = grid.h
    step = 0.5 * h if step is None else step
    xi = chi.xi
    xp = np.array([-xi[1], xi[0]])
    x0, y0, x1, y1 = grid.bbox
    corners = np.array([[x0, y0], [x1, y0], [x0, y1], [x1, y1]])
    cs, ts = corners @ xp, corners @ xi
    width = cs.max() - cs.min()
    offsets = cs.min() + (np.arange(n_chords) + 0.5) * width / n_chords
    t = np.arange(ts.min(), ts.max() + step, step)
    out = []
    for c in offsets:
        pts = c * xp[None, :] + t[:, None] * xi[None, :]
        j, i = grid.cell_of(pts)
        for a, b in _chord_runs(chi.mask, j, i):
            v = chi.values[j[a:b], i[a:b]]
            out.append({"offset": float(c), "start": pts[a].tolist(), "end": pts[b - 1].tolist(),
                        "changes": int(np.count_nonzero(np.diff(v)))})
    return out


def directions(n: int) -> np.ndarray:
    a = 2 * np.pi * np.arange(n) / n
    return np.stack([np.cos(a), np.sin(a)], 1)


def characteristic_constancy(m: OrientedField, n_directions: int = 16, n_chords: int = 64) -> dict:
    """Count sign changes of ``chi(., xi)`` along chords in direction ``xi`` for evenly spread xi."""
    per_dir = []
    total = 0
    worst = 0
    for xi in directions(n_directions):
        runs = chord_sign_changes(kinetic_field(m, xi), n_chords)
        ch = [r["changes"] for r in runs]
        total += len(runs)
        worst = max(worst, max(ch, default=0))
        per_dir.append({"xi": xi.tolist(), "chords": runs, "max_changes": max(ch, default=0)})
    return {"directions": per_dir, "n_chords": total, "max_changes": worst, "passed": worst == 0}


@dataclass
class PropagationResult:
    variation: float  # max angular distance mod pi from theta(x0)
    length: float  # total length of the marched segment
    n_samples: int
    degenerate: bool


def propagation_check(P: LineField, x0, step: float | None = None) -> PropagationResult:
    """March from ``x0`` along the kernel of ``P(x0)`` in both directions until leaving the field.

    ``x0`` is a point or a ``(j, i)`` cell index given as a tuple of ints.
    """
    grid = P.grid
    if isinstance(x0, tuple) and all(isinstance(v, (int, np.integer)) for v in x0):
        x0 = grid.center(*x0)
    x0 = np.asarray(x0, dtype=float)
    j0, i0 = grid.cell_of(x0)
    th0 = float(P.theta[j0[0], i0[0]])
    if not np.isfinite(th0):
        raise ValueError("x0 lies outside the field mask")
    step = 0.5 * grid.h if step is None else step
    d = np.array([-np.sin(th0), np.cos(th0)])
    worst, length, count = 0.0, 0.0, 0
    x0b, y0b, x1b, y1b = grid.bbox
    nmax = int(np.ceil(np.hypot(x1b - x0b, y1b - y0b) / step)) + 1
    for sgn in (1.0, -1.0):
        pts = x0[None, :] + sgn * step * np.arange(1, nmax + 1)[:, None] * d[None, :]
        th = interpolate(P.theta, grid, pts, mask=P.mask, strict=False, angular=True)
        bad = ~np.isfinite(th)
        k = int(np.argmax(bad)) if bad.any() else len(th)
        if k:
            worst = max(worst, float(np.max(np.abs(_kernels.wrap_half(th[:k] - th0)))))
        length += k * step
        count += k
    degenerate = count == 0
    if degenerate:
        log.warning("kernel segment through (%.4g, %.4g) leaves the field immediately", *x0)
    return PropagationResult(worst, length, count, degenerate)
