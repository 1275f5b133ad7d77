"""Closed planar curves, tubular domains, signed distance and normal rays.

Curves are stored in a raw periodic parameter ``u``; every public function
takes arclength ``s`` instead. Curvature always comes from exact derivatives
of the representation (Fourier series or periodic cubic spline), never from
differences of samples.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar
from scipy.spatial import cKDTree

from .errors import InvalidCurveError, MalformedDomainError, TubeOverlapError

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def rot90(v):
    """Counterclockwise rotation by 90 degrees, ``v -> v_perp``."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


class ClosedCurve:
    """Periodic planar curve with an arclength table.

    Subclasses implement :meth:`raw`, returning position and the first two
    derivatives with respect to the raw parameter. Construction normalizes the
    orientation to counterclockwise.
    """

    kind = "abstract"
    period = 2 * np.pi

    def raw(self, u):  # pragma: no cover - abstract
        raise NotImplementedError

    # -- arclength machinery -------------------------------------------------
    def _panel_edges(self):
        return np.linspace(0.0, self.period, 513)

    @cached_property
    def _table(self):
        edges = self._panel_edges()
        a, b = edges[:-1], edges[1:]
        nodes = 0.5 * (b - a)[:, None] * _GL_X[None, :] + 0.5 * (a + b)[:, None]
        _, r1, _ = self.raw(nodes.ravel())
        speed = np.linalg.norm(r1, axis=-1).reshape(nodes.shape)
        pieces = 0.5 * (b - a) * (speed @ _GL_W)
        cum = np.concatenate([[0.0], np.cumsum(pieces)])
        return edges, cum

    @property
    def length(self) -> float:
        return float(self._table[1][-1])

    def speed(self, u):
        return np.linalg.norm(self.raw(u)[1], axis=-1)

    def _s_in_panel(self, u, k):
        edges, cum = self._table
        a = edges[k]
        half = 0.5 * (u - a)
        nodes = half[..., None] * (_GL_X + 1.0) + a[..., None]
        sp = self.speed(nodes.ravel()).reshape(nodes.shape)
        return cum[k] + half * (sp @ _GL_W)

    def s_of_u(self, u):
        edges, _ = self._table
        u = np.mod(np.asarray(u, dtype=float), self.period)
        k = np.clip(np.searchsorted(edges, u, side="right") - 1, 0, len(edges) - 2)
        return self._s_in_panel(u, k)

    def u_of_s(self, s):
        edges, cum = self._table
        s = np.mod(np.asarray(s, dtype=float), cum[-1])
        k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(edges) - 2)
        a, b = edges[k], edges[k + 1]
        u = a + (s - cum[k]) / (cum[k + 1] - cum[k]) * (b - a)
        for _ in range(12):
            step = (self._s_in_panel(u, k) - s) / self.speed(u)
            u = np.clip(u - step, a, b)
            if np.all(np.abs(step) < 1e-15 * self.period):
                break
        return u

    # -- evaluation ----------------------------------------------------------
    def frame_raw(self, u):
        r, r1, r2 = self.raw(u)
        sp = np.linalg.norm(r1, axis=-1)
        t = r1 / sp[..., None]
        n = np.stack([t[..., 1], -t[..., 0]], axis=-1)
        kappa = (r1[..., 0] * r2[..., 1] - r1[..., 1] * r2[..., 0]) / sp**3
        return r, t, n, kappa

    def sample(self, n: int):
        """``n`` points uniform in arclength: (s, point, tangent, normal, kappa)."""
        s = np.arange(n) * (self.length / n)
        return (s,) + self.frame_raw(self.u_of_s(s))

    @cached_property
    def max_curvature(self) -> float:
        m = 8192
        u = np.arange(m) * (self.period / m)
        k = np.abs(self.frame_raw(u)[3])
        i = int(np.argmax(k))
        du = self.period / m
        res = minimize_scalar(
            lambda v: -abs(float(self.frame_raw(np.array([v]))[3][0])),
            bounds=(u[i] - du, u[i] + du),
            method="bounded",
            options={"xatol": 1e-12},
        )
        return float(max(k[i], -res.fun))

    @cached_property
    def signed_area(self) -> float:
        _, p, _, _, _ = self.sample(4096)
        x, y = p[:, 0], p[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def _check_regular(self):
        m = 4096
        u = np.arange(m) * (self.period / m)
        r, r1, _ = self.raw(u)
        sp = np.linalg.norm(r1, axis=-1)
        scale = max(float(np.ptp(r[:, 0])), float(np.ptp(r[:, 1])), 1e-300)
        if not np.all(np.isfinite(sp)) or sp.min() < 1e-12 * max(scale, 1.0):
            raise InvalidCurveError("curve is not regular (|gamma'| vanishes: cusp or degenerate curve)")
        if scale < 1e-12:
            raise InvalidCurveError("curve is degenerate (zero extent)")

    # -- nearest point -------------------------------------------------------
    @cached_property
    def _search(self):
        m = self._n_search
        u = np.arange(m) * (self.period / m)
        pts = self.raw(u)[0]
        return u, cKDTree(pts)

    _n_search = 512

    def project(self, points):
        """Nearest point on the curve for each query point.

        Returns ``(u, dist, converged)``. ``converged`` is true where a
        bracketed local minimum of the distance with positive second
        derivative was found next to the nearest dense sample.
        """
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        us, tree = self._search
        d0, idx = tree.query(p)
        du = self.period / len(us)
        u0 = us[idx]
        lo, hi = u0 - du, u0 + du

        def fval(u, q):
            r, r1, r2 = self.raw(u)
            dv = r - q
            return _dot(dv, r1), _dot(r1, r1) + _dot(dv, r2), dv

        ok = (fval(lo, p)[0] <= 0.0) & (fval(hi, p)[0] >= 0.0)
        u = u0.copy()
        act = np.nonzero(ok)[0]
        for _ in range(100):
            if act.size == 0:
                break
            ua = u[act]
            f, fp, _ = fval(ua, p[act])
            neg = f < 0.0
            lo[act] = np.where(neg, ua, lo[act])
            hi[act] = np.where(neg, hi[act], ua)
            with np.errstate(divide="ignore", invalid="ignore"):
                newton = ua - f / fp
            good = (fp > 0) & (newton >= lo[act]) & (newton <= hi[act])
            unew = np.where(good, newton, 0.5 * (lo[act] + hi[act]))
            u[act] = unew
            act = act[np.abs(unew - ua) >= 1e-14 * self.period]
        f, fp, dv = fval(u, p)
        dist = np.linalg.norm(dv, axis=-1)
        better = ok & (dist <= d0 + 1e-15)
        dist = np.where(better, dist, np.minimum(d0, dist))
        u = np.where(better, u, u0)
        return np.mod(u, self.period), dist, better & (fp > 0)

    # -- rigid motions -------------------------------------------------------
    def transformed(self, angle: float = 0.0, shift=(0.0, 0.0)) -> "ClosedCurve":
        raise NotImplementedError


class FourierCurve(ClosedCurve):
    """``x(u) = sum_k xc[k] cos(ku) + xs[k] sin(ku)``, likewise y; u in [0, 2pi)."""

    kind = "fourier"

    def __init__(self, xcos, xsin, ycos, ysin, orient=True):
        k = max(len(xcos), len(xsin), len(ycos), len(ysin))
        if k == 0:
            raise InvalidCurveError("empty Fourier series")

        def pad(c):
            c = np.asarray(c, dtype=float).ravel()
            if not np.all(np.isfinite(c)):
                raise InvalidCurveError("non-finite Fourier coefficient")
            return np.concatenate([c, np.zeros(k - len(c))])

        self.coef = np.stack([pad(xcos), pad(xsin), pad(ycos), pad(ysin)])
        self._k = np.arange(k, dtype=float)
        self._n_search = max(512, 32 * k)
        self._check_regular()
        if orient and self.signed_area < 0:
            self.coef[1] *= -1
            self.coef[3] *= -1
            self.__dict__.pop("signed_area", None)
            self.__dict__.pop("_table", None)

    @classmethod
    def circle(cls, radius=1.0, center=(0.0, 0.0)):
        return cls([center[0], radius], [0.0, 0.0], [center[1], 0.0], [0.0, radius])

    @classmethod
    def ellipse(cls, a, b, center=(0.0, 0.0), angle=0.0):
        c = cls([center[0], a], [0.0, 0.0], [center[1], 0.0], [0.0, b])
        return c.transformed(angle) if angle else c

    def _panel_edges(self):
        m = max(512, 32 * len(self._k))
        return np.linspace(0.0, self.period, m + 1)

    def raw(self, u):
        u = np.asarray(u, dtype=float)
        ku = u[..., None] * self._k
        c, s = np.cos(ku), np.sin(ku)
        xc, xs, yc, ys = self.coef
        k = self._k
        x = c @ xc + s @ xs
        y = c @ yc + s @ ys
        x1 = (-s * k) @ xc + (c * k) @ xs
        y1 = (-s * k) @ yc + (c * k) @ ys
        k2 = k * k
        x2 = (-c * k2) @ xc + (-s * k2) @ xs
        y2 = (-c * k2) @ yc + (-s * k2) @ ys
        return (np.stack([x, y], -1), np.stack([x1, y1], -1), np.stack([x2, y2], -1))

    def transformed(self, angle=0.0, shift=(0.0, 0.0)):
        ca, sa = np.cos(angle), np.sin(angle)
        xc, xs, yc, ys = self.coef
        nxc, nxs = ca * xc - sa * yc, ca * xs - sa * ys
        nyc, nys = sa * xc + ca * yc, sa * xs + ca * ys
        nxc = nxc.copy()
        nyc = nyc.copy()
        nxc[0] += shift[0]
        nyc[0] += shift[1]
        return FourierCurve(nxc, nxs, nyc, nys)

    def to_dict(self):
        xc, xs, yc, ys = self.coef
        return {"type": "fourier", "x": {"cos": xc.tolist(), "sin": xs.tolist()},
                "y": {"cos": yc.tolist(), "sin": ys.tolist()}}


class SplineCurve(ClosedCurve):
    """Closed polyline interpolated by a periodic cubic spline in chord length."""

    kind = "polyline"

    def __init__(self, points, orient=True):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 4:
            raise InvalidCurveError("polyline needs at least 4 points of shape (n, 2)")
        if not np.all(np.isfinite(pts)):
            raise InvalidCurveError("non-finite polyline point")
        if np.allclose(pts[0], pts[-1]):
            pts = pts[:-1]
        seg = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]), axis=0), axis=1)
        if seg.min() < 1e-12 * max(seg.max(), 1e-300):
            raise InvalidCurveError("zero-length polyline segment")
        if orient:
            area = 0.5 * np.sum(pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1])
            if area < 0:
                pts = pts[::-1].copy()
                seg = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]), axis=0), axis=1)
        self.points = pts
        knots = np.concatenate([[0.0], np.cumsum(seg)])
        self.period = float(knots[-1])
        self._knots = knots
        self._spline = CubicSpline(knots, np.vstack([pts, pts[:1]]), bc_type="periodic")
        self._d1 = self._spline.derivative(1)
        self._d2 = self._spline.derivative(2)
        self._n_search = max(512, 4 * len(pts))
        self._check_regular()

    def _panel_edges(self):
        k = self._knots
        sub = np.linspace(0.0, 1.0, 3)[:-1]
        e = (k[:-1, None] + np.diff(k)[:, None] * sub[None, :]).ravel()
        return np.concatenate([e, [k[-1]]])

    def raw(self, u):
        u = np.mod(np.asarray(u, dtype=float), self.period)
        return self._spline(u), self._d1(u), self._d2(u)

    def transformed(self, angle=0.0, shift=(0.0, 0.0)):
        ca, sa = np.cos(angle), np.sin(angle)
        R = np.array([[ca, -sa], [sa, ca]])
        return SplineCurve(self.points @ R.T + np.asarray(shift, dtype=float))

    def to_dict(self):
        return {"type": "polyline", "points": self.points.tolist()}


class ArclengthCurve(ClosedCurve):
    """Arclength re-parameterization of another curve (raw parameter = s)."""

    kind = "arclength"

    def __init__(self, base: ClosedCurve):
        self.base = base
        self.period = base.length
        self._n_search = base._n_search

    def raw(self, s):
        u = self.base.u_of_s(s)
        r, t, n, kappa = self.base.frame_raw(u)
        # d/ds t = kappa * t_perp, and t_perp = -n
        return r, t, -kappa[..., None] * n

    def _panel_edges(self):
        return np.linspace(0.0, self.period, 513)

    def transformed(self, angle=0.0, shift=(0.0, 0.0)):
        return ArclengthCurve(self.base.transformed(angle, shift))

    def to_dict(self):
        return self.base.to_dict()


def curve_eval(curve: ClosedCurve, s):
    """Point, unit tangent, outward unit normal and curvature at arclength ``s``.

    ``s`` wraps periodically. The normal is the tangent rotated by -90 degrees,
    which is outward because curves are stored counterclockwise.
    """
    return curve.frame_raw(curve.u_of_s(s))


def arclength_reparam(curve: ClosedCurve) -> ClosedCurve:
    if isinstance(curve, ArclengthCurve):
        return curve
    return ArclengthCurve(curve)


@dataclass(frozen=True)
class BoundaryComponent:
    """Ordered samples of one connected component of the domain boundary."""

    points: np.ndarray
    normals: np.ndarray  # outward from the domain
    tangents: np.ndarray
    outermost: bool
    label: int = -1


@dataclass(frozen=True)
class DomainSpec:
    """A tubular domain ``Gamma + B(0, delta)`` or a raw boundary (outer curve plus holes)."""

    curve: ClosedCurve
    delta: float | None = None
    mode: str = "tubular"
    holes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.mode not in ("tubular", "raw"):
            raise ValueError(f"unknown domain mode {self.mode!r}")
        if self.mode == "tubular" and (self.delta is None or not self.delta > 0):
            raise InvalidCurveError("tubular domain needs a positive delta")

    @cached_property
    def bbox(self):
        allp = np.vstack([c.points for c in self.boundary(n=2048)])
        return (float(allp[:, 0].min()), float(allp[:, 1].min()),
                float(allp[:, 0].max()), float(allp[:, 1].max()))

    def boundary(self, spacing: float | None = None, n: int | None = None):
        """Boundary components, outer first, sampled uniformly in arclength.

        Either a target ``spacing`` or a per-component count ``n`` is used.
        """
        comps = []
        if self.mode == "tubular":
            m = n if n is not None else max(16, int(np.ceil(self.curve.length / spacing)))
            _, p, t, nrm, _ = self.curve.sample(m)
            d = self.delta
            comps.append(BoundaryComponent(p + d * nrm, nrm, t, True))
            comps.append(BoundaryComponent(p - d * nrm, -nrm, -t, False))
        else:
            for i, c in enumerate((self.curve,) + tuple(self.holes)):
                m = n if n is not None else max(16, int(np.ceil(c.length / spacing)))
                _, p, t, nrm, _ = c.sample(m)
                if i == 0:
                    comps.append(BoundaryComponent(p, nrm, t, True))
                else:
                    comps.append(BoundaryComponent(p, -nrm, -t, False))
        return comps

    def to_dict(self) -> dict:
        out = {"curve": self.curve.to_dict(), "mode": self.mode}
        if self.delta is not None:
            out["delta"] = float(self.delta)
        if self.holes:
            out["holes"] = [h.to_dict() for h in self.holes]
        return out

    def transformed(self, angle=0.0, shift=(0.0, 0.0)) -> "DomainSpec":
        return DomainSpec(self.curve.transformed(angle, shift), self.delta, self.mode,
                          tuple(h.transformed(angle, shift) for h in self.holes))


def validate_tubular_spec(spec: DomainSpec) -> dict:
    """Check ``0 < delta < 1/max|kappa|``; raise :class:`TubeOverlapError` otherwise."""
    if spec.mode != "tubular":
        raise ValueError("validate_tubular_spec needs a tubular-mode spec")
    kmax = spec.curve.max_curvature
    prod = spec.delta * kmax
    report = {"max_curvature": kmax, "delta": spec.delta, "delta_times_kappa": prod,
              "passed": bool(prod < 1.0)}
    if not prod < 1.0:
        raise TubeOverlapError(
            f"delta={spec.delta:g} violates delta < 1/||kappa||_inf = {1.0 / kmax:.6g} "
            f"(delta*max|kappa| = {prod:.6g} >= 1); the tube would self-overlap")
    return report


def signed_distance(spec: DomainSpec, points):
    """Signed distance to the domain boundary, negative inside."""
    p = np.asarray(points, dtype=float)
    shape = p.shape[:-1]
    p = p.reshape(-1, 2)
    if spec.mode == "tubular":
        _, d, _ = spec.curve.project(p)
        out = d - spec.delta
    else:
        best = np.full(len(p), np.inf)
        sign = np.ones(len(p))
        for i, c in enumerate((spec.curve,) + tuple(spec.holes)):
            u, d, _ = c.project(p)
            r, _, n, _ = c.frame_raw(u)
            s = np.sign(_dot(p - r, n))
            if i > 0:
                s = -s
            s[s == 0] = 1.0
            closer = d < best
            best = np.where(closer, d, best)
            sign = np.where(closer, s, sign)
        out = sign * best
    return out.reshape(shape)


@dataclass
class RayResult:
    origin: np.ndarray
    direction: np.ndarray
    T: float
    hit: np.ndarray
    transversal: bool = False


def trace_normals(spec: DomainSpec, origins, directions, h: float, max_length=None):
    """Batched inward ray marching; returns ``(T, hits)``.

    Each ray advances by ``max(|sd|, h/4)``: the signed distance is
    1-Lipschitz, so a step of ``|sd|`` cannot jump over the boundary. The
    exit found this way is bisected to 1e-10.
    """
    x = np.asarray(origins, dtype=float).reshape(-1, 2)
    d = np.asarray(directions, dtype=float).reshape(-1, 2)
    d = d / np.linalg.norm(d, axis=1, keepdims=True)
    x0, y0, x1, y1 = spec.bbox
    pad = 4 * h
    diag = float(np.hypot(x1 - x0, y1 - y0)) + 2 * pad
    if max_length is None:
        max_length = diag
    step = h / 4.0
    T = np.full(len(x), np.nan)
    t = np.zeros(len(x))
    adv = np.full(len(x), step)
    active = np.arange(len(x))
    while active.size:
        prev = t[active]
        t[active] = prev + adv[active]
        q = x[active] + t[active, None] * d[active]
        sd = signed_distance(spec, q)
        out = (sd > 0) | (q[:, 0] < x0 - pad) | (q[:, 0] > x1 + pad) | (q[:, 1] < y0 - pad) | (q[:, 1] > y1 + pad)
        lost = ~out & (t[active] > max_length)
        if np.any(lost):
            raise MalformedDomainError(
                f"{int(lost.sum())} ray(s) left the bounding box without crossing the boundary")
        if np.any(out):
            idx = active[out]
            lo, hi = prev[out], t[idx]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                o = signed_distance(spec, x[idx] + mid[:, None] * d[idx]) > 0
                hi = np.where(o, mid, hi)
                lo = np.where(o, lo, mid)
                if np.all(hi - lo < 1e-10):
                    break
            T[idx] = 0.5 * (lo + hi)
        adv[active[~out]] = np.maximum(-sd[~out], step)
        active = active[~out]
    return T, x + T[:, None] * d


def normal_ray_trace(spec: DomainSpec, x, inward_normal, h: float | None = None) -> RayResult:
    """Length ``T(x)`` of the inward normal segment from boundary point ``x`` inside the closure."""
    if h is None:
        x0, y0, x1, y1 = spec.bbox
        h = max(x1 - x0, y1 - y0) / 256
    T, hit = trace_normals(spec, [x], [inward_normal], h)
    nrm = np.asarray(inward_normal, dtype=float)
    return RayResult(np.asarray(x, dtype=float), nrm / np.linalg.norm(nrm), float(T[0]), hit[0])


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def segment_intersections(P, Q, eta=1e-6):
    """All pairs ``i < j`` whose segments P_i Q_i and P_j Q_j cross at interior points.

    Parallel pairs are skipped: they are either disjoint or the same normal
    line. Returns an array of ``(i, j, t_i, t_j)`` rows.
    """
    P = np.asarray(P, dtype=float)
    D = np.asarray(Q, dtype=float) - P
    n = len(P)
    rows = []
    for i in range(n - 1):
        dj = D[i + 1:]
        denom = _cross(D[i], dj)
        scale = np.linalg.norm(D[i]) * np.linalg.norm(dj, axis=1)
        ok = np.abs(denom) > 1e-12 * scale
        w = P[i + 1:] - P[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = _cross(w, dj) / denom
            u = _cross(w, D[i]) / denom
        hit = ok & (t > eta) & (t < 1 - eta) & (u > eta) & (u < 1 - eta)
        for j in np.nonzero(hit)[0]:
            rows.append((i, i + 1 + j, t[j], u[j]))
    return np.array(rows, dtype=float).reshape(-1, 4)


@dataclass
class ClassAResult:
    found: bool
    witness: tuple | None
    n_pairs: int
    rays: list

    def __bool__(self):
        return self.found


def class_A_test(spec: DomainSpec, n_samples: int = 64, h: float | None = None) -> ClassAResult:
    """Look for two distinct boundary normals that meet inside before exiting.

    Samples are spread over all boundary components proportionally to length.
    The witness is the crossing pair whose intersection lies deepest inside.
    """
    if n_samples < 16:
        raise ValueError("class_A_test needs at least 16 boundary samples")
    if h is None:
        x0, y0, x1, y1 = spec.bbox
        h = max(x1 - x0, y1 - y0) / 256
    dense = spec.boundary(n=256)
    lengths = np.array([np.sum(np.linalg.norm(np.diff(np.vstack([c.points, c.points[:1]]), axis=0), axis=1))
                        for c in dense])
    counts = np.maximum(8, np.round(n_samples * lengths / lengths.sum()).astype(int))
    pts, dirs = [], []
    for c_i, m in enumerate(counts):
        comp = spec.boundary(n=int(m))[c_i]
        pts.append(comp.points)
        dirs.append(-comp.normals)
    pts = np.vstack(pts)
    dirs = np.vstack(dirs)
    T, hits = trace_normals(spec, pts, dirs, h)
    rays = [RayResult(pts[i], dirs[i], float(T[i]), hits[i]) for i in range(len(pts))]
    rows = segment_intersections(pts, hits)
    if len(rows) == 0:
        return ClassAResult(False, None, 0, rays)
    i = rows[:, 0].astype(int)
    j = rows[:, 1].astype(int)
    xpt = pts[i] + rows[:, 2:3] * (hits[i] - pts[i])
    depth = -signed_distance(spec, xpt)
    best = int(np.argmax(depth))
    for k in np.unique(np.concatenate([i, j])):
        rays[k].transversal = True
    return ClassAResult(True, (pts[i[best]], pts[j[best]]), len(rows), rays)


def stadium_curve(r: float = 0.5, straight: float = 1.0, n: int = 400) -> SplineCurve:
    """Stadium: two semicircular caps of radius ``r`` joined by straights of length ``straight``."""
    L = 2 * straight + 2 * np.pi * r
    s = np.arange(n) * (L / n)
    out = np.empty((n, 2))
    a = straight / 2
    for k, si in enumerate(s):
        if si < straight:  # bottom, left to right
            out[k] = (-a + si, -r)
        elif si < straight + np.pi * r:  # right cap
            phi = -np.pi / 2 + (si - straight) / r
            out[k] = (a + r * np.cos(phi), r * np.sin(phi))
        elif si < 2 * straight + np.pi * r:  # top, right to left
            out[k] = (a - (si - straight - np.pi * r), r)
        else:  # left cap
            phi = np.pi / 2 + (si - 2 * straight - np.pi * r) / r
            out[k] = (-a + r * np.cos(phi), r * np.sin(phi))
    return SplineCurve(out)


def offset_polyline(curve: ClosedCurve, offset, n: int = 512) -> SplineCurve:
    """Polyline through ``gamma(s) + offset(s) n(s)`` at ``n`` arclength samples.

    ``offset`` is a constant or a callable of ``s / L``.
    """
    s, p, _, nrm, _ = curve.sample(n)
    w = offset(s / curve.length) if callable(offset) else np.full(n, float(offset))
    return SplineCurve(p + w[:, None] * nrm)
