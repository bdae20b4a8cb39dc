"""Pure-numpy trajectory stepping kernel, vectorized over paths.

This mirrors _native.pyx operation for operation; any edit here must be
applied there as well so the two backends stay bit-identical.
"""

import numpy as np

_ALIVE = 0
_MASKED = 1
_LEFT_DOMAIN = 2


def _catmull_rom(p0, p1, p2, p3, s):
    return 0.5 * (2.0 * p1 + s * (p2 - p0)
                  + s * s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3)
                  + s * s * s * (3.0 * (p1 - p2) + p3 - p0))


def _stencil(pos, x_min, dx, n):
    """Stencil indices and local coordinate for wrapped cubic interpolation."""
    u = (pos - x_min) / dx
    j = np.floor(u)
    j = np.minimum(j, float(n - 1))
    s = u - j
    j = j.astype(np.int64)
    jm1 = (j - 1) % n
    j0 = j % n
    jp1 = (j + 1) % n
    jp2 = (j + 2) % n
    return jm1, j0, jp1, jp2, s


def interp_cubic(pos, field, valid, x_min, dx):
    """Catmull-Rom interpolation of a periodic field at positions pos.

    Returns (values, ok): ok is False where pos leaves the principal
    domain or any stencil point is invalid; values are unspecified there.
    """
    pos = np.asarray(pos, dtype=np.float64)
    field = np.asarray(field, dtype=np.float64)
    n = field.shape[0]
    x_max = x_min + n * dx
    in_dom = (pos >= x_min) & (pos < x_max)
    jm1, j0, jp1, jp2, s = _stencil(pos, x_min, dx, n)
    ok = in_dom & (valid[jm1] & valid[j0] & valid[jp1] & valid[jp2]).astype(bool)
    vals = _catmull_rom(field[jm1], field[j0], field[jp1], field[jp2], s)
    return vals, ok


def _eval_stage(pos, w, v0, v1, valid, x_min, x_max, dx, n):
    """Velocity at (pos, w): cubic in space on both snapshots, linear in time.

    Returns (value, dom_ok, stencil_ok).
    """
    in_dom = (pos >= x_min) & (pos < x_max)
    jm1, j0, jp1, jp2, s = _stencil(pos, x_min, dx, n)
    stencil_ok = (valid[jm1] & valid[j0] & valid[jp1] & valid[jp2]).astype(bool)
    a = _catmull_rom(v0[jm1], v0[j0], v0[jp1], v0[jp2], s)
    b = _catmull_rom(v1[jm1], v1[j0], v1[jp1], v1[jp2], s)
    return a + w * (b - a), in_dom, stencil_ok


def advance_bundle(x, status, v0, v1, valid, x_min, dx, n, h_total, nsub):
    """Advance paths through one snapshot interval, in place.

    x       -- (N,) positions, updated for alive paths
    status  -- (N,) int8: 0 alive, set to 1 (masked stencil) or
               2 (left domain) at the first failing RK4 stage; a failing
               path keeps its last good position
    v0, v1  -- velocity fields at the interval endpoints (invalid points
               zeroed by the caller)
    valid   -- uint8 joint validity of the two fields
    h_total -- interval duration, split into nsub RK4 substeps
    """
    x_max = x_min + n * dx
    for sub in range(nsub):
        alive = status == _ALIVE
        if not np.any(alive):
            break
        h = h_total / nsub
        w0 = sub / nsub
        wh = (sub + 0.5) / nsub
        w1 = (sub + 1.0) / nsub

        xa = x[alive]
        k1, dom1, ok1 = _eval_stage(xa, w0, v0, v1, valid, x_min, x_max, dx, n)
        x2 = xa + 0.5 * h * k1
        k2, dom2, ok2 = _eval_stage(x2, wh, v0, v1, valid, x_min, x_max, dx, n)
        x3 = xa + 0.5 * h * k2
        k3, dom3, ok3 = _eval_stage(x3, wh, v0, v1, valid, x_min, x_max, dx, n)
        x4 = xa + h * k3
        k4, dom4, ok4 = _eval_stage(x4, w1, v0, v1, valid, x_min, x_max, dx, n)
        xn = xa + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        dom5 = (xn >= x_min) & (xn < x_max)
        jm1, j0, jp1, jp2, _ = _stencil(xn, x_min, dx, n)
        ok5 = (valid[jm1] & valid[j0] & valid[jp1] & valid[jp2]).astype(bool)

        # First failing check decides the status, in stage order.
        new_status = np.zeros(xa.shape[0], dtype=np.int8)
        undecided = np.ones(xa.shape[0], dtype=bool)
        for fail, code in ((~dom1, _LEFT_DOMAIN), (~ok1, _MASKED),
                           (~dom2, _LEFT_DOMAIN), (~ok2, _MASKED),
                           (~dom3, _LEFT_DOMAIN), (~ok3, _MASKED),
                           (~dom4, _LEFT_DOMAIN), (~ok4, _MASKED),
                           (~dom5, _LEFT_DOMAIN), (~ok5, _MASKED)):
            hit = undecided & fail
            new_status[hit] = code
            undecided &= ~fail

        moved = new_status == _ALIVE
        idx = np.flatnonzero(alive)
        x[idx[moved]] = xn[moved]
        status[idx[~moved]] = new_status[~moved]
