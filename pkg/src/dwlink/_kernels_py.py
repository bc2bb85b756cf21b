"""NumPy implementation of the LLG kernels.

Same signatures and semantics as the compiled ``_kernels`` module; used when
the extension is unavailable or ``DWLINK_PURE_PYTHON`` is set.
"""

import numpy as np


def _field(m, dx, dy, c_ex, c_an, c_dmi):
    wx = c_ex / (dx * dx)
    wy = c_ex / (dy * dy)
    h = np.zeros_like(m)

    bond = m[:, 1:] - m[:, :-1]
    h[:, :-1] += wx * bond
    h[:, 1:] -= wx * bond
    bond = m[1:, :] - m[:-1, :]
    h[:-1, :] += wy * bond
    h[1:, :] -= wy * bond

    # central differences with absent neighbours counted as zero
    gx = np.zeros_like(m)
    gx[:, :-1] += m[:, 1:]
    gx[:, 1:] -= m[:, :-1]
    gy = np.zeros_like(m)
    gy[:-1, :] += m[1:, :]
    gy[1:, :] -= m[:-1, :]
    dmx = c_dmi / (2.0 * dx)
    dmy = c_dmi / (2.0 * dy)

    h[..., 0] += dmx * gx[..., 2]
    h[..., 1] += dmy * gy[..., 2]
    h[..., 2] += c_an * m[..., 2] - dmx * gx[..., 0] - dmy * gy[..., 1]
    return h


def _rhs(m, fixed, dx, dy, c_ex, c_an, c_dmi, a_she, gamma_ll, alpha, precess):
    h = _field(m, dx, dy, c_ex, c_an, c_dmi)
    p = np.cross(m, h)
    q = np.cross(m, p)
    out = -gamma_ll * alpha * q
    if precess:
        out -= gamma_ll * p
    mx, my, mz = m[..., 0], m[..., 1], m[..., 2]
    out[..., 0] += a_she * mx * my
    out[..., 1] -= a_she * (mx * mx + mz * mz)
    out[..., 2] += a_she * my * mz
    out[fixed.astype(bool)] = 0.0
    return out


def effective_field(m, out, dx, dy, c_ex, c_an, c_dmi):
    out[...] = _field(np.asarray(m), dx, dy, c_ex, c_an, c_dmi)


def llg_rhs(m, fixed, out, dx, dy, c_ex, c_an, c_dmi, a_she, gamma_ll, alpha,
            precess):
    out[...] = _rhs(np.asarray(m), np.asarray(fixed), dx, dy, c_ex, c_an,
                    c_dmi, a_she, gamma_ll, alpha, precess)


def rk4_run(m, fixed, dt, a_steps, c_an_steps, dx, dy, c_ex, c_dmi, gamma_ll,
            alpha, precess, work):
    free = ~np.asarray(fixed).astype(bool)
    worst = 0.0
    args = (dx, dy, c_ex)
    for s in range(len(a_steps)):
        a = a_steps[s]
        can = c_an_steps[s]
        k1 = _rhs(m, fixed, *args, can, c_dmi, a, gamma_ll, alpha, precess)
        k2 = _rhs(m + 0.5 * dt * k1, fixed, *args, can, c_dmi, a, gamma_ll,
                  alpha, precess)
        k3 = _rhs(m + 0.5 * dt * k2, fixed, *args, can, c_dmi, a, gamma_ll,
                  alpha, precess)
        k4 = _rhs(m + dt * k3, fixed, *args, can, c_dmi, a, gamma_ll, alpha,
                  precess)
        new = m + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        n = np.sqrt(np.einsum("ijk,ijk->ij", new, new))
        nf = n[free]
        if not np.all(np.isfinite(nf)):
            return worst, s
        if nf.size:
            worst = max(worst, float(np.max(np.abs(nf - 1.0))))
        m[free] = new[free] / n[free][:, None]
    return worst, -1
