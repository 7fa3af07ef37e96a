"""Numba versions of the hot kernels (same contracts as ``_kernels_np``)."""

import numpy as np
from numba import njit

from ._gk import GAUSS_W, INTEG, KRONROD_W, NODES
from ._kernels_np import MAX_PANELS, MIN_WIDTH, breakpoints

_NODES = NODES.copy()
_KW = KRONROD_W.copy()
_GW = GAUSS_W.copy()
_INTEG = INTEG.copy()


@njit(cache=True, nogil=True)
def _psum(z, xs, floor):
    s = 0.0
    for k in range(xs.size):
        r2 = (z - xs[k]) * (z - xs[k])
        r6 = r2 * r2 * r2
        s += 1.0 / (r6 if r6 > floor else floor)
    return s


def potential_sum(z, xs, v_cap):
    z = np.asarray(z, dtype=float)
    flat = z.ravel()
    out = _psum_vec(flat, np.asarray(xs, dtype=float), 1.0 / v_cap)
    return out.reshape(z.shape)


@njit(cache=True, nogil=True)
def _psum_vec(zs, xs, floor):
    out = np.empty(zs.size)
    for i in range(zs.size):
        out[i] = _psum(zs[i], xs, floor)
    return out


@njit(cache=True, nogil=True)
def _phi_core(pts, xs, ys, d_b, length, tol, v_cap, form):
    floor = 1.0 / v_cap
    gtol = 0.5 * tol / length
    htol = gtol * max(d_b, 1.0)
    n0 = pts.size - 1
    cap = 64 + 2 * MAX_PANELS
    st_a = np.empty(cap)
    st_b = np.empty(cap)
    top = 0
    for i in range(n0 - 1, -1, -1):
        st_a[top] = pts[i]
        st_b[top] = pts[i + 1]
        top += 1
    n_live = n0
    g = np.empty(15, dtype=np.complex128)
    q = np.empty(15, dtype=np.complex128)
    h = np.empty(15, dtype=np.complex128)
    e_cur = 0.0 + 0.0j
    total = 0.0 + 0.0j
    err = 0.0
    n_acc = 0
    while top > 0:
        top -= 1
        a = st_a[top]
        b = st_b[top]
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        for j in range(15):
            z = mid + half * _NODES[j]
            sx = _psum(z, xs, floor)
            sy = _psum(z, ys, floor)
            dx = 1.0 + sx * sx
            dy = 1.0 + sy * sy
            ux = sx * sx / dx
            vx = sx / dx
            uy = sy * sy / dy
            vy = sy / dy
            g[j] = d_b * complex(-(ux + uy), vx - vy)
            if form == 0:
                q[j] = 2.0 * d_b * complex(ux, -vx) * complex(uy, vy)
            else:
                q[j] = 1j * d_b * (sx - sy) * complex(vx, -1.0 / dx) * complex(vy, 1.0 / dy)
        kg = 0.0 + 0.0j
        gg = 0.0 + 0.0j
        for j in range(15):
            kg += _KW[j] * g[j]
            gg += _GW[j] * g[j]
        kg *= half
        err_g = abs(kg - half * gg)
        kh = 0.0 + 0.0j
        gh = 0.0 + 0.0j
        kabs = 0.0
        for j in range(15):
            e_loc = 0.0 + 0.0j
            for i in range(15):
                e_loc += _INTEG[j, i] * g[i]
            h[j] = q[j] * np.exp(half * e_loc)
            kh += _KW[j] * h[j]
            gh += _GW[j] * h[j]
            kabs += _KW[j] * abs(h[j])
        kh *= half
        err_h = abs(kh - half * gh)
        kabs *= half
        if form == 0:
            h_ok = err_h <= 0.5 * tol * kabs
        else:
            h_ok = err_h <= htol * (b - a)
        if err_g <= gtol * (b - a) and h_ok:
            scale = np.exp(e_cur)
            total += scale * kh
            err += abs(scale) * err_h
            e_cur += kg
            n_acc += 1
            continue
        n_live += 1
        if b - a < MIN_WIDTH or n_live > MAX_PANELS:
            return 0.0j, np.inf, n_acc, False
        st_a[top] = mid
        st_b[top] = b
        st_a[top + 1] = a
        st_b[top + 1] = mid
        top += 2
    if form == 0:
        value = np.exp(e_cur) + total
    else:
        value = 1.0 + total
    return value, err, n_acc, True


def phi_kernel(xs, ys, d_b, length, tol, v_cap, form):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    pts = breakpoints(xs, ys, 0.0, length)
    value, err, n, ok = _phi_core(pts, xs, ys, float(d_b), float(length),
                                  float(tol), float(v_cap), int(form))
    return complex(value), float(err), int(n), bool(ok)


@njit(cache=True, nogil=True)
def _exponent_core(pts, xs, z_end, d_b, tol, v_cap):
    floor = 1.0 / v_cap
    gtol = 0.5 * tol / z_end
    n0 = pts.size - 1
    cap = 64 + 2 * MAX_PANELS
    st_a = np.empty(cap)
    st_b = np.empty(cap)
    top = 0
    for i in range(n0 - 1, -1, -1):
        st_a[top] = pts[i]
        st_b[top] = pts[i + 1]
        top += 1
    n_live = n0
    total = 0.0 + 0.0j
    err = 0.0
    while top > 0:
        top -= 1
        a = st_a[top]
        b = st_b[top]
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        kg = 0.0 + 0.0j
        gg = 0.0 + 0.0j
        for j in range(15):
            s = _psum(mid + half * _NODES[j], xs, floor)
            d = 1.0 + s * s
            gj = -d_b * complex(s * s / d, s / d)
            kg += _KW[j] * gj
            gg += _GW[j] * gj
        kg *= half
        err_g = abs(kg - half * gg)
        if err_g <= gtol * (b - a):
            total += kg
            err += err_g
            continue
        n_live += 1
        if b - a < MIN_WIDTH or n_live > MAX_PANELS:
            return 0.0j, np.inf, False
        st_a[top] = mid
        st_b[top] = b
        st_a[top + 1] = a
        st_b[top + 1] = mid
        top += 2
    return total, err, True


def exponent_kernel(xs, z_end, d_b, tol, v_cap):
    xs = np.asarray(xs, dtype=float)
    if z_end <= 0.0:
        return 0.0j, 0.0, True
    pts = breakpoints(xs, xs[:0], 0.0, z_end)
    total, err, ok = _exponent_core(pts, xs, float(z_end), float(d_b),
                                    float(tol), float(v_cap))
    return complex(total), float(err), bool(ok)


@njit(cache=True, nogil=True)
def _rk4_core(xs, d_b, h, n, floor):
    e = 1.0 + 0.0j
    for i in range(n):
        z = i * h
        f0 = d_b * (1.0 / (1.0 + 1j * _psum(z, xs, floor)) - 1.0)
        f1 = d_b * (1.0 / (1.0 + 1j * _psum(z + 0.5 * h, xs, floor)) - 1.0)
        f2 = d_b * (1.0 / (1.0 + 1j * _psum(z + h, xs, floor)) - 1.0)
        k1 = f0
        k2 = f1 * (1.0 + 0.5 * h * k1)
        k3 = f1 * (1.0 + 0.5 * h * k2)
        k4 = f2 * (1.0 + h * k3)
        e *= 1.0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return e


def rk4_field(xs, d_b, length, step, v_cap):
    n = int(round(length / step))
    h = length / n
    return complex(_rk4_core(np.asarray(xs, dtype=float), float(d_b), h, n, 1.0 / v_cap))


@njit(cache=True, nogil=True)
def _tally_core(outcomes, n_photons, n_g):
    trials = outcomes.shape[0]
    out = np.zeros(trials, dtype=np.int64)
    hit = np.zeros(n_g + 1, dtype=np.bool_)
    for t in range(trials):
        hit[:] = False
        for j in range(n_photons[t]):
            hit[outcomes[t, j]] = True
        c = 0
        for k in range(n_g):
            if hit[k]:
                c += 1
        out[t] = c
    return out


def tally_decohered(outcomes, n_photons, n_g):
    return _tally_core(np.ascontiguousarray(outcomes, dtype=np.int64),
                       np.ascontiguousarray(n_photons, dtype=np.int64), int(n_g))
