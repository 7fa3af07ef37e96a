"""Pure-numpy versions of the hot kernels.

Every function here has a twin of the same name and signature in
``_kernels_nb``; the two must agree to rounding.
"""

import numpy as np

from ._gk import GAUSS_W, INTEG, KRONROD_W, NODES

MAX_ROUNDS = 64
MAX_PANELS = 20000
MIN_WIDTH = 1e-9


def potential_sum(z, xs, v_cap):
    """Sum of min(|z - x|^-6, v_cap) over excitations ``xs``; ``z`` any shape."""
    z = np.asarray(z, dtype=float)
    out = np.zeros(z.shape)
    floor = 1.0 / v_cap
    for x in xs:
        r2 = (z - x) ** 2
        out += 1.0 / np.maximum(r2 * r2 * r2, floor)
    return out


def _uv(s):
    d = 1.0 + s * s
    return s * s / d, s / d


def breakpoints(xs, ys, lo, hi):
    pts = [lo, hi]
    for c in np.concatenate([xs, ys]):
        pts.extend((c - 1.0, c, c + 1.0))
    pts = np.unique(np.clip(np.asarray(pts, dtype=float), lo, hi))
    keep = np.concatenate([[True], np.diff(pts) > 1e-12 * max(hi - lo, 1.0)])
    pts = pts[keep]
    pts[-1] = hi
    return pts


def _panel_terms(a, b, xs, ys, d_b, v_cap, form):
    """Exponent generator and kernel integrand sampled on panels [a, b]."""
    half = 0.5 * (b - a)
    z = (0.5 * (a + b))[:, None] + half[:, None] * NODES[None, :]
    sx = potential_sum(z, xs, v_cap)
    sy = potential_sum(z, ys, v_cap)
    ux, vx = _uv(sx)
    uy, vy = _uv(sy)
    # E' = d_b [Sy/(i - Sy) - Sx/(i + Sx)]
    g = d_b * (-(ux + uy) + 1j * (vx - vy))
    if form == 0:
        # -2 d_b [Sx/(i+Sx)] [Sy/(i-Sy)]
        q = 2.0 * d_b * (ux - 1j * vx) * (uy + 1j * vy)
    else:
        # -i d_b (Sx - Sy) / ((i+Sx)(i-Sy))
        wx = 1.0 / (1.0 + sx * sx)
        wy = 1.0 / (1.0 + sy * sy)
        q = 1j * d_b * (sx - sy) * (vx - 1j * wx) * (vy + 1j * wy)
    return half, g, q


def phi_kernel(xs, ys, d_b, length, tol, v_cap, form):
    """Adaptive GK15 evaluation of the decoherence kernel.

    Returns ``(value, error_estimate, n_panels, ok)``. ``form`` 0 integrates
    the cancellation-free split representation, 1 the direct one.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    pts = breakpoints(xs, ys, 0.0, length)
    a, b = pts[:-1], pts[1:]
    acc_a, acc_de, acc_h, acc_err = [], [], [], []
    gtol = 0.5 * tol / length
    htol = gtol * max(d_b, 1.0)
    ok = True
    n_live = a.size
    for _ in range(MAX_ROUNDS):
        if a.size == 0:
            break
        half, g, q = _panel_terms(a, b, xs, ys, d_b, v_cap, form)
        kg = half * (g @ KRONROD_W)
        err_g = np.abs(kg - half * (g @ GAUSS_W))
        e_loc = half[:, None] * (g @ INTEG.T)
        h = q * np.exp(e_loc)
        kh = half * (h @ KRONROD_W)
        err_h = np.abs(kh - half * (h @ GAUSS_W))
        kabs = half * (np.abs(h) @ KRONROD_W)
        if form == 0:
            # no subtractive cancellation in this form: relative test is safe
            h_ok = err_h <= 0.5 * tol * kabs
        else:
            h_ok = err_h <= htol * (b - a)
        good = (err_g <= gtol * (b - a)) & h_ok
        acc_a.append(a[good])
        acc_de.append(kg[good])
        acc_h.append(kh[good])
        acc_err.append(err_h[good])
        bad = ~good
        if not bad.any():
            a = a[:0]
            break
        a, b = a[bad], b[bad]
        n_live += a.size
        if np.any(b - a < MIN_WIDTH) or n_live > MAX_PANELS:
            ok = False
            break
        mid = 0.5 * (a + b)
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
    if a.size:
        ok = False
    pa = np.concatenate(acc_a)
    order = np.argsort(pa, kind="stable")
    de = np.concatenate(acc_de)[order]
    kh = np.concatenate(acc_h)[order]
    errs = np.concatenate(acc_err)[order]
    e_start = np.concatenate([[0.0 + 0.0j], np.cumsum(de)[:-1]])
    scale = np.exp(e_start)
    total = np.sum(scale * kh)
    err = np.sum(np.abs(scale) * errs)
    e_end = np.sum(de)
    if form == 0:
        value = np.exp(e_end) + total
    else:
        value = 1.0 + total
    return complex(value), float(err), int(pa.size), ok


def exponent_kernel(xs, z_end, d_b, tol, v_cap):
    """Propagation exponent d_b * int_0^z_end Sx/(i - Sx) dz by adaptive GK15.

    Returns ``(exponent, error_estimate, ok)``.
    """
    xs = np.asarray(xs, dtype=float)
    if z_end <= 0.0:
        return 0.0j, 0.0, True
    pts = breakpoints(xs, xs[:0], 0.0, z_end)
    a, b = pts[:-1], pts[1:]
    total = 0.0j
    err = 0.0
    gtol = 0.5 * tol / z_end
    parts = []
    ok = True
    n_live = a.size
    for _ in range(MAX_ROUNDS):
        if a.size == 0:
            break
        half = 0.5 * (b - a)
        z = (0.5 * (a + b))[:, None] + half[:, None] * NODES[None, :]
        u, v = _uv(potential_sum(z, xs, v_cap))
        g = -d_b * (u + 1j * v)
        kg = half * (g @ KRONROD_W)
        err_g = np.abs(kg - half * (g @ GAUSS_W))
        good = err_g <= gtol * (b - a)
        parts.append((a[good], kg[good], err_g[good]))
        bad = ~good
        if not bad.any():
            a = a[:0]
            break
        a, b = a[bad], b[bad]
        n_live += a.size
        if np.any(b - a < MIN_WIDTH) or n_live > MAX_PANELS:
            ok = False
            break
        mid = 0.5 * (a + b)
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
    if a.size:
        ok = False
    pa = np.concatenate([p[0] for p in parts])
    order = np.argsort(pa, kind="stable")
    total = np.sum(np.concatenate([p[1] for p in parts])[order])
    err = float(np.sum(np.concatenate([p[2] for p in parts])))
    return complex(total), err, ok


def rk4_field(xs, d_b, length, step, v_cap):
    """Fixed-step RK4 for dE/dz = d_b [1/(1 + i S) - 1] E from 0 to length."""
    n = int(round(length / step))
    h = length / n
    xs = np.asarray(xs, dtype=float)
    # all stage abscissae at once; the recurrence itself is sequential
    z = np.arange(n) * h
    s0 = potential_sum(z, xs, v_cap)
    s1 = potential_sum(z + 0.5 * h, xs, v_cap)
    s2 = potential_sum(z + h, xs, v_cap)
    f0 = d_b * (1.0 / (1.0 + 1j * s0) - 1.0)
    f1 = d_b * (1.0 / (1.0 + 1j * s1) - 1.0)
    f2 = d_b * (1.0 / (1.0 + 1j * s2) - 1.0)
    # linear ODE: one RK4 step multiplies E by a stage polynomial
    k1 = f0
    k2 = f1 * (1.0 + 0.5 * h * k1)
    k3 = f1 * (1.0 + 0.5 * h * k2)
    k4 = f2 * (1.0 + h * k3)
    growth = 1.0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return complex(np.prod(growth))


def tally_decohered(outcomes, n_photons, n_g):
    """Count distinct excitations hit per trial.

    ``outcomes[t, j]`` is the excitation index (0-based) that photon ``j`` of
    trial ``t`` scattered from, or ``n_g`` if it was transmitted; only the
    first ``n_photons[t]`` columns of a row are live.
    """
    trials, width = outcomes.shape
    live = np.arange(width)[None, :] < n_photons[:, None]
    hit = np.zeros((trials, n_g + 1), dtype=bool)
    rows = np.broadcast_to(np.arange(trials)[:, None], outcomes.shape)
    hit[rows[live], outcomes[live]] = True
    return hit[:, :n_g].sum(axis=1)
