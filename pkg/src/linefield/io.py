"""Domain files, field files with grid sidecars, JSON reports and raster images.

Domain file (JSON)::

    {"curve": {"type": "fourier", "x": {"cos": [0, 1], "sin": [0, 0]},
               "y": {"cos": [0, 0], "sin": [0, 1]}},
     "delta": 0.4, "mode": "tubular"}

``{"type": "polyline", "points": [[x, y], ...]}`` is the other curve type;
raw-mode domains may list further closed curves under ``"holes"``.

Field file: CSV with header ``x,y,theta,a,b,c,inside``, one row per raster
cell in row-major order (y slowest), floats written with ``repr`` so they
read back bit for bit. ``F.csv`` comes with ``F.grid.json`` holding the grid
geometry, the domain and, for generated fields, the pattern name and
parameters.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import (DomainError, InvalidProjectionError, ParseError, SchemaError)
from .geometry import DomainSpec, FourierCurve, SplineCurve, validate_tubular_spec
from .grid import RasterGrid, grid_from_mask, rasterize
from .patterns import LineField

HEADER = ["x", "y", "theta", "a", "b", "c", "inside"]
ENTRY_TOL = 1e-12


# --------------------------------------------------------------------------
# domains
# --------------------------------------------------------------------------
def _line_of(text, key):
    if text is None:
        return None
    needle = f'"{key}"'
    for k, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return k
    return None


def _numbers(value, field, path, text, shape=None):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ParseError("expected numbers", path, _line_of(text, field.split(".")[-1]), field) from None
    if shape is not None and (arr.ndim != len(shape) or any(s is not None and s != n for s, n in zip(shape, arr.shape))):
        raise ParseError(f"expected an array of shape {shape}", path, _line_of(text, field.split(".")[-1]), field)
    if not np.all(np.isfinite(arr)):
        raise ParseError("non-finite number", path, _line_of(text, field.split(".")[-1]), field)
    return arr


def curve_from_dict(d, field="curve", path=None, text=None):
    if not isinstance(d, dict) or "type" not in d:
        raise ParseError("curve must be an object with a 'type'", path, _line_of(text, field), field)
    kind = d["type"]
    try:
        if kind == "fourier":
            coef = {}
            for ax in ("x", "y"):
                part = d.get(ax)
                if not isinstance(part, dict):
                    raise ParseError("missing coefficient object", path, _line_of(text, "type"), f"{field}.{ax}")
                for trig in ("cos", "sin"):
                    coef[ax + trig] = _numbers(part.get(trig, []), f"{field}.{ax}.{trig}", path, text, (None,))
            return FourierCurve(coef["xcos"], coef["xsin"], coef["ycos"], coef["ysin"])
        if kind == "polyline":
            if "points" not in d:
                raise ParseError("missing points", path, _line_of(text, "type"), f"{field}.points")
            return SplineCurve(_numbers(d["points"], f"{field}.points", path, text, (None, 2)))
    except DomainError as exc:
        raise type(exc)(f"field '{field}': {exc}") from None
    raise ParseError(f"unknown curve type {kind!r} (fourier or polyline)", path, _line_of(text, "type"), f"{field}.type")


def domain_from_dict(d, path=None, text=None) -> DomainSpec:
    """Build and validate a :class:`DomainSpec` from its JSON object."""
    if not isinstance(d, dict):
        raise ParseError("domain must be a JSON object", path, 1)
    if "curve" not in d:
        raise ParseError("missing required field", path, None, "curve")
    unknown = set(d) - {"curve", "delta", "mode", "holes"}
    if unknown:
        key = sorted(unknown)[0]
        raise ParseError("unknown field", path, _line_of(text, key), key)
    mode = d.get("mode", "tubular" if "delta" in d else "raw")
    if mode not in ("tubular", "raw"):
        raise ParseError(f"mode must be 'tubular' or 'raw', got {mode!r}", path, _line_of(text, "mode"), "mode")
    curve = curve_from_dict(d["curve"], "curve", path, text)
    delta = d.get("delta")
    if delta is not None:
        if isinstance(delta, bool) or not isinstance(delta, (int, float)) or not math.isfinite(delta):
            raise ParseError("delta must be a finite number", path, _line_of(text, "delta"), "delta")
        delta = float(delta)
    if mode == "tubular":
        if delta is None or delta <= 0:
            raise ParseError("tubular mode needs a positive delta", path, _line_of(text, "delta") or _line_of(text, "mode"), "delta")
        if d.get("holes"):
            raise ParseError("holes are only allowed in raw mode", path, _line_of(text, "holes"), "holes")
    holes = tuple(curve_from_dict(c, f"holes[{k}]", path, text) for k, c in enumerate(d.get("holes") or []))
    spec = DomainSpec(curve, delta, mode, holes)
    if mode == "tubular":
        try:
            validate_tubular_spec(spec)
        except DomainError as exc:
            raise type(exc)(f"field 'delta': {exc}") from None
    return spec


def load_domain(path) -> DomainSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read: {exc.strerror}", path) from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno) from None
    return domain_from_dict(d, path, text)


def save_domain(path, spec: DomainSpec):
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2) + "\n")


# --------------------------------------------------------------------------
# fields
# --------------------------------------------------------------------------
def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".grid.json")


def save_field(path, field: LineField):
    """Write the CSV and its grid sidecar."""
    g = field.grid
    a, b, c = field.abc
    path = Path(path)
    xs = [repr(float(v)) for v in g.x0 + (np.arange(g.nx) + 0.5) * g.h]
    ys = [repr(float(v)) for v in g.y0 + (np.arange(g.ny) + 0.5) * g.h]
    th, a, b, c, m = (v.tolist() for v in (field.theta, a, b, c, field.mask))
    lines = [",".join(HEADER)]
    for j in range(g.ny):
        tj, aj, bj, cj, mj, y = th[j], a[j], b[j], c[j], m[j], ys[j]
        for i in range(g.nx):
            if mj[i]:
                lines.append(f"{xs[i]},{y},{tj[i]!r},{aj[i]!r},{bj[i]!r},{cj[i]!r},1")
            else:
                lines.append(f"{xs[i]},{y},nan,nan,nan,nan,0")
    path.write_text("\n".join(lines) + "\n")
    meta = {
        "x0": g.x0, "y0": g.y0, "h": g.h, "nx": g.nx, "ny": g.ny, "bbox": list(g.bbox),
        "components": [{"label": int(cmp.label), "outermost": bool(cmp.outermost)} for cmp in g.components],
        "domain": g.spec.to_dict() if g.spec is not None else None,
        "pattern": {"name": field.name, "params": field.params},
    }
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _read_sidecar(path):
    sp = sidecar_path(path)
    try:
        text = sp.read_text()
    except OSError:
        raise ParseError("missing grid sidecar", sp) from None
    try:
        meta = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, sp, exc.lineno) from None
    for key in ("x0", "y0", "h", "nx", "ny"):
        if key not in meta:
            raise ParseError("missing required field", sp, None, key)
    return meta, text, sp


def load_field(path, spec: DomainSpec | None = None) -> LineField:
    """Read a field file and re-derive its grid.

    The grid is rasterized from ``spec`` (or the sidecar's domain) at the
    stored spacing and box. Rows are checked against the cell centres, the
    inside flags against the domain, and the stored ``(a, b, c)`` against
    the values derived from theta.
    """
    path = Path(path)
    meta, mtext, sp = _read_sidecar(path)
    h, nx, ny, x0, y0 = float(meta["h"]), int(meta["nx"]), int(meta["ny"]), float(meta["x0"]), float(meta["y0"])
    if spec is None and meta.get("domain") is not None:
        spec = domain_from_dict(meta["domain"], sp, mtext)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise ParseError(f"cannot read: {exc.strerror}", path) from None
    with fh:
        rows = csv.reader(fh)
        header = next(rows, None)
        if header != HEADER:
            raise ParseError(f"header must be {','.join(HEADER)}", path, 1)
        vals = np.empty((ny * nx, 6))
        inside = np.zeros(ny * nx, dtype=bool)
        k = -1
        for k, row in enumerate(rows):
            line = k + 2
            if k >= ny * nx:
                raise ParseError(f"more than nx*ny = {nx * ny} rows", path, line)
            if len(row) != 7:
                raise ParseError(f"expected 7 columns, got {len(row)}", path, line)
            try:
                vals[k] = [float(v) for v in row[:6]]
            except ValueError:
                raise ParseError("malformed number", path, line) from None
            if row[6] not in ("0", "1"):
                raise ParseError("inside must be 0 or 1", path, line, "inside")
            inside[k] = row[6] == "1"
        if k + 1 != ny * nx:
            raise ParseError(f"expected {ny * nx} rows, found {k + 1}", path, k + 2)
    vals = vals.reshape(ny, nx, 6)
    mask = inside.reshape(ny, nx)
    if spec is not None:
        grid = rasterize(spec, h, bbox=(x0, y0, x0 + nx * h, y0 + ny * h))
        if (grid.nx, grid.ny) != (nx, ny):
            raise ParseError("grid size disagrees with the domain", sp, None, "nx")
        if np.any(mask & ~grid.inside):
            j, i = np.argwhere(mask & ~grid.inside)[0]
            raise ParseError("cell flagged inside lies outside the domain", path, int(j * nx + i + 2), "inside")
    else:
        grid = grid_from_mask(x0, y0, h, mask)
    X, Y = grid.centers()
    off = np.maximum(np.abs(vals[..., 0] - X), np.abs(vals[..., 1] - Y))
    if off.max() > 1e-12 * max(1.0, np.abs(X).max(), np.abs(Y).max()):
        j, i = np.unravel_index(np.argmax(off), off.shape)
        raise ParseError("x, y disagree with the grid cell centre", path, int(j * nx + i + 2), "x")
    theta, a, b, c = (vals[..., k] for k in range(2, 6))
    _check_entries(theta, a, b, c, mask, path, nx)
    pat = meta.get("pattern") or {}
    return LineField(np.where(mask, theta, np.nan), grid, mask, name=pat.get("name", "field"),
                     params=dict(pat.get("params") or {}),
                     entries=tuple(np.where(mask, v, np.nan) for v in (a, b, c)))


def _check_entries(theta, a, b, c, mask, path, nx):
    def fail(msg, sel):
        j, i = np.argwhere(sel)[0]
        raise InvalidProjectionError(f"{path}: line {int(j * nx + i + 2)}: {msg}")

    t = np.where(mask, theta, 0.0)
    bad = mask & ~((t >= 0) & (t < np.pi))
    if bad.any():
        fail("theta outside [0, pi)", bad)
    cs, sn = np.cos(t), np.sin(t)
    dev = np.maximum.reduce([np.abs(a - cs * cs), np.abs(b - sn * cs), np.abs(c - (1 - cs * cs))])
    bad = mask & ~(dev <= ENTRY_TOL)
    if bad.any():
        fail("stored (a, b, c) disagree with theta", bad)
    bad = mask & ~((np.abs(b * b - a * c) <= ENTRY_TOL) & (np.abs(a + c - 1) <= ENTRY_TOL))
    if bad.any():
        fail("b^2 = ac or a + c = 1 violated", bad)


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------
_REQUIRED = {
    "conditions": {"conditions", "norms", "verdict"},
    "is_tubular": {"is_tubular", "T_stats", "components", "gamma", "delta", "reason"},
}


def _clean(v):
    if hasattr(v, "to_dict"):
        v = v.to_dict()
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_clean(x) for x in (v.tolist() if isinstance(v, np.ndarray) else v)]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(f"{v:.12g}") if math.isfinite(v) else None
    if v is None or isinstance(v, str):
        return v
    raise SchemaError(f"cannot serialise {type(v).__name__}")


def report_json(report) -> str:
    """Canonical JSON text: sorted keys, floats rounded to 12 significant digits."""
    d = _clean(report)
    if not isinstance(d, dict) or not d:
        raise SchemaError("empty report")
    for key, need in _REQUIRED.items():
        if key in d and not need <= set(d):
            raise SchemaError(f"report is missing {sorted(need - set(d))}")
    return json.dumps(d, sort_keys=True, indent=2) + "\n"


def save_report(path, report):
    text = report_json(report)
    Path(path).write_text(text)
    return text


# --------------------------------------------------------------------------
# rasters
# --------------------------------------------------------------------------
def _hue_rgb(hue):
    """Fully saturated colours for hue in [0, 1)."""
    h6 = np.mod(hue, 1.0) * 6.0
    k = np.floor(h6).astype(int) % 6
    f = h6 - np.floor(h6)
    one, up, down, zero = np.ones_like(f), f, 1 - f, np.zeros_like(f)
    table = [(one, up, zero), (down, one, zero), (zero, one, up), (zero, down, one), (up, zero, one), (one, zero, down)]
    rgb = np.zeros(hue.shape + (3,))
    for s, (r, g, b) in enumerate(table):
        sel = k == s
        rgb[sel] = np.stack([r[sel], g[sel], b[sel]], -1)
    return rgb


def save_raster(path, field, grid: RasterGrid | None = None):
    """Line fields as PPM with hue ``theta / pi``; scalar arrays as PGM scaled to [0, 255].

    Cells off the mask (or NaN) are black; the top image row is the largest y.
    """
    if isinstance(field, LineField):
        th = field.theta
        ok = field.mask & np.isfinite(th)
        rgb = np.round(255 * _hue_rgb(np.where(ok, th / np.pi, 0.0))).astype(np.uint8)
        rgb[~ok] = 0
        img, magic = rgb[::-1], b"P6"
    else:
        v = np.asarray(field, dtype=float)
        ok = np.isfinite(v)
        lo, hi = (v[ok].min(), v[ok].max()) if ok.any() else (0.0, 1.0)
        scale = 255.0 / (hi - lo) if hi > lo else 0.0
        grey = np.where(ok, np.round((np.where(ok, v, lo) - lo) * scale), 0).astype(np.uint8)
        img, magic = grey[::-1], b"P5"
    ny, nx = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + f"\n{nx} {ny}\n255\n".encode())
        fh.write(np.ascontiguousarray(img).tobytes())
