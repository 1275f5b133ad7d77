"""Hot loops, each in two flavours: a numba kernel (``*_nb``) and a numpy or
plain-Python twin (``*_np``). The public name is bound to one of them by
:func:`linefield._accel.pick`; tests run both and compare.
"""
from collections import deque

import numpy as np

from ._accel import njit, pick

HALF_PI = 0.5 * np.pi


# --------------------------------------------------------------------------
# cut-cell flux divergence of a zero-extended tensor field
# --------------------------------------------------------------------------
# cell states for the flux kernel
OUT, CUT, IN, HOLE = 0, 1, 2, 3


@njit
def _face_nb(pa, pb, sa, sb, frac, h):
    if sa == IN and sb == HOLE:
        return 0.5 * pa * frac * h
    if sb == IN and sa == HOLE:
        return 0.5 * pb * frac * h
    va = sa == IN or sa == CUT
    vb = sb == IN or sb == CUT
    if va and vb:
        return 0.5 * (pa + pb) * frac * h
    if va:
        return pa * frac * h
    if vb:
        return pb * frac * h
    return 0.0


@njit
def flux_divergence_nb(P, state, fx, fy, h):
    """Finite-volume divergence of a tensor field; ``state`` per cell is OUT, CUT, IN or HOLE.

    IN cells carry the field, CUT cells (centre outside, partly covered) an
    extension of it, HOLE cells are zero. Face fluxes use the mean of the
    available side values, weighted by the covered face fraction; a face
    between IN and HOLE takes half the IN value.
    """
    ny, nx = state.shape
    out = np.zeros((ny, nx, 2))
    for j in range(ny):
        for i in range(nx + 1):
            sa = state[j, i - 1] if i - 1 >= 0 else OUT
            sb = state[j, i] if i < nx else OUT
            if sa == OUT and sb == OUT:
                continue
            for r in range(2):
                pa = P[j, i - 1, r, 0] if i - 1 >= 0 else 0.0
                pb = P[j, i, r, 0] if i < nx else 0.0
                f = _face_nb(pa, pb, sa, sb, fx[j, i], h)
                if i - 1 >= 0:
                    out[j, i - 1, r] += f
                if i < nx:
                    out[j, i, r] -= f
    for j in range(ny + 1):
        for i in range(nx):
            sa = state[j - 1, i] if j - 1 >= 0 else OUT
            sb = state[j, i] if j < ny else OUT
            if sa == OUT and sb == OUT:
                continue
            for r in range(2):
                pa = P[j - 1, i, r, 1] if j - 1 >= 0 else 0.0
                pb = P[j, i, r, 1] if j < ny else 0.0
                f = _face_nb(pa, pb, sa, sb, fy[j, i], h)
                if j - 1 >= 0:
                    out[j - 1, i, r] += f
                if j < ny:
                    out[j, i, r] -= f
    return out / (h * h)


def _face_np(pa, pb, sa, sb, frac, h):
    sa, sb, frac = sa[..., None], sb[..., None], frac[..., None]
    va = (sa == IN) | (sa == CUT)
    vb = (sb == IN) | (sb == CUT)
    gen = np.where(va & vb, 0.5 * (pa + pb), np.where(va, pa, np.where(vb, pb, 0.0))) * frac * h
    F = np.where((sa == IN) & (sb == HOLE), 0.5 * pa * frac * h, gen)
    return np.where((sb == IN) & (sa == HOLE), 0.5 * pb * frac * h, F)


def flux_divergence_np(P, state, fx, fy, h):
    ny, nx = state.shape
    spad = np.zeros((ny + 2, nx + 2), dtype=state.dtype)
    spad[1:-1, 1:-1] = state
    Ppad = np.zeros((ny + 2, nx + 2, 2, 2))
    Ppad[1:-1, 1:-1] = P
    Fx = _face_np(Ppad[1:-1, :-1, :, 0], Ppad[1:-1, 1:, :, 0], spad[1:-1, :-1], spad[1:-1, 1:], fx, h)
    Fy = _face_np(Ppad[:-1, 1:-1, :, 1], Ppad[1:, 1:-1, :, 1], spad[:-1, 1:-1], spad[1:, 1:-1], fy, h)
    out = (Fx[:, 1:] - Fx[:, :-1]) + (Fy[1:, :] - Fy[:-1, :])
    return out / (h * h)


flux_divergence = pick(flux_divergence_nb, flux_divergence_np)


# --------------------------------------------------------------------------
# bilinear interpolation on cell centres
# --------------------------------------------------------------------------
@njit
def bilinear_nb(values, mask, fxi, fyi, angular):
    """``values`` (ny, nx, c); fractional indices; NaN where the stencil leaves the mask."""
    ny, nx, nc = values.shape
    n = fxi.shape[0]
    out = np.full((n, nc), np.nan)
    for k in range(n):
        i0 = int(np.floor(fxi[k]))
        j0 = int(np.floor(fyi[k]))
        if i0 < 0 or j0 < 0 or i0 + 1 >= nx or j0 + 1 >= ny:
            continue
        if not (mask[j0, i0] and mask[j0, i0 + 1] and mask[j0 + 1, i0] and mask[j0 + 1, i0 + 1]):
            continue
        tx = fxi[k] - i0
        ty = fyi[k] - j0
        for c in range(nc):
            v00 = values[j0, i0, c]
            v01 = values[j0, i0 + 1, c]
            v10 = values[j0 + 1, i0, c]
            v11 = values[j0 + 1, i0 + 1, c]
            if angular:
                v01 = v00 + (v01 - v00 + HALF_PI) % np.pi - HALF_PI
                v10 = v00 + (v10 - v00 + HALF_PI) % np.pi - HALF_PI
                v11 = v00 + (v11 - v00 + HALF_PI) % np.pi - HALF_PI
            v = (1 - ty) * ((1 - tx) * v00 + tx * v01) + ty * ((1 - tx) * v10 + tx * v11)
            if angular:
                v = v % np.pi
            out[k, c] = v
    return out


def bilinear_np(values, mask, fxi, fyi, angular):
    ny, nx, nc = values.shape
    i0 = np.floor(fxi).astype(np.int64)
    j0 = np.floor(fyi).astype(np.int64)
    ok = (i0 >= 0) & (j0 >= 0) & (i0 + 1 < nx) & (j0 + 1 < ny)
    out = np.full((len(fxi), nc), np.nan)
    i0c = np.where(ok, i0, 0)
    j0c = np.where(ok, j0, 0)
    ok &= mask[j0c, i0c] & mask[j0c, i0c + 1] & mask[j0c + 1, i0c] & mask[j0c + 1, i0c + 1]
    i, j = i0c[ok], j0c[ok]
    tx = (fxi[ok] - i)[:, None]
    ty = (fyi[ok] - j)[:, None]
    v00, v01 = values[j, i], values[j, i + 1]
    v10, v11 = values[j + 1, i], values[j + 1, i + 1]
    if angular:
        v01 = v00 + np.mod(v01 - v00 + HALF_PI, np.pi) - HALF_PI
        v10 = v00 + np.mod(v10 - v00 + HALF_PI, np.pi) - HALF_PI
        v11 = v00 + np.mod(v11 - v00 + HALF_PI, np.pi) - HALF_PI
    v = (1 - ty) * ((1 - tx) * v00 + tx * v01) + ty * ((1 - tx) * v10 + tx * v11)
    if angular:
        v = np.mod(v, np.pi)
    out[ok] = v
    return out


bilinear = pick(bilinear_nb, bilinear_np)


# --------------------------------------------------------------------------
# plaquette windings of a line field
# --------------------------------------------------------------------------
@njit
def _wrap_half(d):
    """Map an angle difference into (-pi/2, pi/2]."""
    return HALF_PI - (HALF_PI - d) % np.pi


@njit
def plaquette_winding_nb(theta, mask):
    ny, nx = theta.shape
    out = np.full((ny - 1, nx - 1), np.nan)
    for j in range(ny - 1):
        for i in range(nx - 1):
            if not (mask[j, i] and mask[j, i + 1] and mask[j + 1, i + 1] and mask[j + 1, i]):
                continue
            a = theta[j, i]
            b = theta[j, i + 1]
            c = theta[j + 1, i + 1]
            d = theta[j + 1, i]
            s = _wrap_half(b - a) + _wrap_half(c - b) + _wrap_half(d - c) + _wrap_half(a - d)
            out[j, i] = s / (2 * np.pi)
    return out


def wrap_half(d):
    return HALF_PI - np.mod(HALF_PI - d, np.pi)


def plaquette_winding_np(theta, mask):
    a, b = theta[:-1, :-1], theta[:-1, 1:]
    c, d = theta[1:, 1:], theta[1:, :-1]
    ok = mask[:-1, :-1] & mask[:-1, 1:] & mask[1:, 1:] & mask[1:, :-1]
    s = wrap_half(b - a) + wrap_half(c - b) + wrap_half(d - c) + wrap_half(a - d)
    return np.where(ok, s / (2 * np.pi), np.nan)


plaquette_winding = pick(plaquette_winding_nb, plaquette_winding_np)


# --------------------------------------------------------------------------
# breadth-first lifting of a line field to a unit vector field
# --------------------------------------------------------------------------
# status codes
LIFT_OK = 0
LIFT_CONFLICT = 1
LIFT_ROUGH = 2


@njit
def lift_bfs_nb(theta, mask, seed_j, seed_i, sign, cos_guard):
    """Grow orientations from a seed.

    Returns ``(mx, my, parent, order, status, a, b)``; on conflict or
    roughness ``a`` and ``b`` are the flat indices of the offending edge.
    """
    ny, nx = theta.shape
    mx = np.zeros((ny, nx))
    my = np.zeros((ny, nx))
    parent = np.full(ny * nx, -2, dtype=np.int64)
    queue = np.empty(ny * nx, dtype=np.int64)
    dj = np.array([0, 1, 0, -1])
    di = np.array([1, 0, -1, 0])
    s0 = seed_j * nx + seed_i
    parent[s0] = -1
    mx[seed_j, seed_i] = sign * np.cos(theta[seed_j, seed_i])
    my[seed_j, seed_i] = sign * np.sin(theta[seed_j, seed_i])
    head = 0
    tail = 1
    queue[0] = s0
    while head < tail:
        cur = queue[head]
        head += 1
        j = cur // nx
        i = cur % nx
        for k in range(4):
            jj = j + dj[k]
            ii = i + di[k]
            if jj < 0 or ii < 0 or jj >= ny or ii >= nx or not mask[jj, ii]:
                continue
            ux = np.cos(theta[jj, ii])
            uy = np.sin(theta[jj, ii])
            dot = ux * mx[j, i] + uy * my[j, i]
            nb = jj * nx + ii
            if abs(dot) < cos_guard:
                return mx, my, parent, queue[:tail], LIFT_ROUGH, cur, nb
            if parent[nb] == -2:
                if dot < 0:
                    ux = -ux
                    uy = -uy
                mx[jj, ii] = ux
                my[jj, ii] = uy
                parent[nb] = cur
                queue[tail] = nb
                tail += 1
            else:
                if mx[jj, ii] * mx[j, i] + my[jj, ii] * my[j, i] < 0:
                    return mx, my, parent, queue[:tail], LIFT_CONFLICT, cur, nb
    return mx, my, parent, queue[:tail], LIFT_OK, -1, -1


def lift_bfs_py(theta, mask, seed_j, seed_i, sign, cos_guard):
    ny, nx = theta.shape
    mx = np.zeros((ny, nx))
    my = np.zeros((ny, nx))
    parent = np.full(ny * nx, -2, dtype=np.int64)
    c, s = np.cos(theta), np.sin(theta)
    flat_mask = mask.ravel().tolist()
    cl, sl = c.ravel().tolist(), s.ravel().tolist()
    vx = [0.0] * (ny * nx)
    vy = [0.0] * (ny * nx)
    par = [-2] * (ny * nx)
    s0 = seed_j * nx + seed_i
    par[s0] = -1
    vx[s0] = sign * cl[s0]
    vy[s0] = sign * sl[s0]
    order = [s0]
    q = deque([s0])
    status, ea, eb = LIFT_OK, -1, -1
    while q:
        cur = q.popleft()
        j, i = divmod(cur, nx)
        for jj, ii in ((j, i + 1), (j + 1, i), (j, i - 1), (j - 1, i)):
            if jj < 0 or ii < 0 or jj >= ny or ii >= nx:
                continue
            nb = jj * nx + ii
            if not flat_mask[nb]:
                continue
            ux, uy = cl[nb], sl[nb]
            dot = ux * vx[cur] + uy * vy[cur]
            if abs(dot) < cos_guard:
                status, ea, eb = LIFT_ROUGH, cur, nb
                break
            if par[nb] == -2:
                if dot < 0:
                    ux, uy = -ux, -uy
                vx[nb], vy[nb] = ux, uy
                par[nb] = cur
                order.append(nb)
                q.append(nb)
            elif vx[nb] * vx[cur] + vy[nb] * vy[cur] < 0:
                status, ea, eb = LIFT_CONFLICT, cur, nb
                break
        if status != LIFT_OK:
            break
    mx.ravel()[:] = vx
    my.ravel()[:] = vy
    parent[:] = par
    return mx, my, parent, np.array(order, dtype=np.int64), status, ea, eb


lift_bfs = pick(lift_bfs_nb, lift_bfs_py)


# --------------------------------------------------------------------------
# potential of m_perp along a BFS spanning tree
# --------------------------------------------------------------------------
@njit
def tree_potential_nb(px, py, mask, root_j, root_i, h):
    """Integrate the gradient field (px, py) by the trapezoid rule along a BFS tree.

    Returns ``(phi, visited, max_loop)``, where ``max_loop`` is the largest
    closing error over non-tree edges (the fundamental-cycle integrals).
    """
    ny, nx = mask.shape
    phi = np.zeros((ny, nx))
    seen = np.zeros((ny, nx), dtype=np.bool_)
    queue = np.empty(ny * nx, dtype=np.int64)
    dj = np.array([0, 1, 0, -1])
    di = np.array([1, 0, -1, 0])
    seen[root_j, root_i] = True
    queue[0] = root_j * nx + root_i
    head = 0
    tail = 1
    while head < tail:
        cur = queue[head]
        head += 1
        j = cur // nx
        i = cur % nx
        for k in range(4):
            jj = j + dj[k]
            ii = i + di[k]
            if jj < 0 or ii < 0 or jj >= ny or ii >= nx or not mask[jj, ii]:
                continue
            if not seen[jj, ii]:
                step = 0.5 * h * ((px[j, i] + px[jj, ii]) * di[k] + (py[j, i] + py[jj, ii]) * dj[k])
                phi[jj, ii] = phi[j, i] + step
                seen[jj, ii] = True
                queue[tail] = jj * nx + ii
                tail += 1
    worst = 0.0
    for j in range(ny):
        for i in range(nx):
            if not seen[j, i]:
                continue
            if i + 1 < nx and seen[j, i + 1]:
                e = phi[j, i + 1] - phi[j, i] - 0.5 * h * (px[j, i] + px[j, i + 1])
                worst = max(worst, abs(e))
            if j + 1 < ny and seen[j + 1, i]:
                e = phi[j + 1, i] - phi[j, i] - 0.5 * h * (py[j, i] + py[j + 1, i])
                worst = max(worst, abs(e))
    return phi, seen, worst


def tree_potential_py(px, py, mask, root_j, root_i, h):
    ny, nx = mask.shape
    pxl, pyl = px.ravel().tolist(), py.ravel().tolist()
    ml = mask.ravel().tolist()
    phi = [0.0] * (ny * nx)
    seen = [False] * (ny * nx)
    r = root_j * nx + root_i
    seen[r] = True
    q = deque([r])
    while q:
        cur = q.popleft()
        j, i = divmod(cur, nx)
        for dj, di in ((0, 1), (1, 0), (0, -1), (-1, 0)):
            jj, ii = j + dj, i + di
            if jj < 0 or ii < 0 or jj >= ny or ii >= nx:
                continue
            nb = jj * nx + ii
            if not ml[nb] or seen[nb]:
                continue
            phi[nb] = phi[cur] + 0.5 * h * ((pxl[cur] + pxl[nb]) * di + (pyl[cur] + pyl[nb]) * dj)
            seen[nb] = True
            q.append(nb)
    phi = np.array(phi).reshape(ny, nx)
    seen = np.array(seen).reshape(ny, nx)
    ex = phi[:, 1:] - phi[:, :-1] - 0.5 * h * (px[:, 1:] + px[:, :-1])
    ey = phi[1:, :] - phi[:-1, :] - 0.5 * h * (py[1:, :] + py[:-1, :])
    okx = seen[:, 1:] & seen[:, :-1]
    oky = seen[1:, :] & seen[:-1, :]
    worst = max(float(np.max(np.abs(ex[okx]), initial=0.0)), float(np.max(np.abs(ey[oky]), initial=0.0)))
    return phi, seen, worst


tree_potential = pick(tree_potential_nb, tree_potential_py)
