# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled LLG kernels for a single-layer finite-difference grid.

Arrays are ``(ny, nx, 3)`` C-contiguous float64.  Neighbour terms are
bond-based: a missing neighbour contributes nothing, which is the zero-torque
(Neumann) condition for exchange and the natural boundary condition of the
discrete DMI energy.  Every loop visits cells in the same row-major order, so
results do not depend on how the caller schedules work.
"""

from libc.math cimport sqrt, fabs, isfinite

import numpy as np


cdef inline void _field(const double[:, :, ::1] m, Py_ssize_t iy, Py_ssize_t ix,
                        Py_ssize_t ny, Py_ssize_t nx,
                        double wx, double wy, double c_an,
                        double dmx, double dmy, double* h) noexcept nogil:
    # wx, wy: exchange weights c_ex/dx^2, c_ex/dy^2
    # dmx, dmy: DMI weights c_dmi/(2 dx), c_dmi/(2 dy)
    cdef double mx = m[iy, ix, 0]
    cdef double my = m[iy, ix, 1]
    cdef double mz = m[iy, ix, 2]
    cdef double hx = 0.0, hy = 0.0, hz = 0.0
    cdef double gx_mx = 0.0, gx_mz = 0.0, gy_my = 0.0, gy_mz = 0.0
    if ix > 0:
        hx += wx * (m[iy, ix - 1, 0] - mx)
        hy += wx * (m[iy, ix - 1, 1] - my)
        hz += wx * (m[iy, ix - 1, 2] - mz)
        gx_mx -= m[iy, ix - 1, 0]
        gx_mz -= m[iy, ix - 1, 2]
    if ix < nx - 1:
        hx += wx * (m[iy, ix + 1, 0] - mx)
        hy += wx * (m[iy, ix + 1, 1] - my)
        hz += wx * (m[iy, ix + 1, 2] - mz)
        gx_mx += m[iy, ix + 1, 0]
        gx_mz += m[iy, ix + 1, 2]
    if iy > 0:
        hx += wy * (m[iy - 1, ix, 0] - mx)
        hy += wy * (m[iy - 1, ix, 1] - my)
        hz += wy * (m[iy - 1, ix, 2] - mz)
        gy_my -= m[iy - 1, ix, 1]
        gy_mz -= m[iy - 1, ix, 2]
    if iy < ny - 1:
        hx += wy * (m[iy + 1, ix, 0] - mx)
        hy += wy * (m[iy + 1, ix, 1] - my)
        hz += wy * (m[iy + 1, ix, 2] - mz)
        gy_my += m[iy + 1, ix, 1]
        gy_mz += m[iy + 1, ix, 2]
    hx += dmx * gx_mz
    hy += dmy * gy_mz
    hz += c_an * mz - dmx * gx_mx - dmy * gy_my
    h[0] = hx
    h[1] = hy
    h[2] = hz


cdef void _rhs(const double[:, :, ::1] m, const unsigned char[:, ::1] fixed,
               double[:, :, ::1] out, double wx, double wy, double c_an,
               double dmx, double dmy, double a_she, double gamma_ll,
               double alpha, bint precess) noexcept nogil:
    cdef Py_ssize_t ny = m.shape[0], nx = m.shape[1], iy, ix
    cdef double h[3]
    cdef double mx, my, mz, px, py, pz, dx_, dy_, dz_
    for iy in range(ny):
        for ix in range(nx):
            if fixed[iy, ix]:
                out[iy, ix, 0] = 0.0
                out[iy, ix, 1] = 0.0
                out[iy, ix, 2] = 0.0
                continue
            _field(m, iy, ix, ny, nx, wx, wy, c_an, dmx, dmy, h)
            mx = m[iy, ix, 0]
            my = m[iy, ix, 1]
            mz = m[iy, ix, 2]
            # p = m x h ; m x p = m x (m x h)
            px = my * h[2] - mz * h[1]
            py = mz * h[0] - mx * h[2]
            pz = mx * h[1] - my * h[0]
            dx_ = -gamma_ll * alpha * (my * pz - mz * py)
            dy_ = -gamma_ll * alpha * (mz * px - mx * pz)
            dz_ = -gamma_ll * alpha * (mx * py - my * px)
            if precess:
                dx_ -= gamma_ll * px
                dy_ -= gamma_ll * py
                dz_ -= gamma_ll * pz
            # damping-like spin-Hall torque a * m x (m x y)
            out[iy, ix, 0] = dx_ + a_she * mx * my
            out[iy, ix, 1] = dy_ - a_she * (mx * mx + mz * mz)
            out[iy, ix, 2] = dz_ + a_she * my * mz


def effective_field(const double[:, :, ::1] m, double[:, :, ::1] out,
                    double dx, double dy, double c_ex, double c_an, double c_dmi):
    """Exchange + anisotropy + DMI field (A/m) for every cell, fixed or not."""
    cdef Py_ssize_t ny = m.shape[0], nx = m.shape[1], iy, ix
    cdef double h[3]
    cdef double wx = c_ex / (dx * dx), wy = c_ex / (dy * dy)
    cdef double dmx = c_dmi / (2.0 * dx), dmy = c_dmi / (2.0 * dy)
    with nogil:
        for iy in range(ny):
            for ix in range(nx):
                _field(m, iy, ix, ny, nx, wx, wy, c_an, dmx, dmy, h)
                out[iy, ix, 0] = h[0]
                out[iy, ix, 1] = h[1]
                out[iy, ix, 2] = h[2]


def llg_rhs(const double[:, :, ::1] m, const unsigned char[:, ::1] fixed,
            double[:, :, ::1] out, double dx, double dy, double c_ex,
            double c_an, double c_dmi, double a_she, double gamma_ll,
            double alpha, bint precess):
    """dm/dt for every cell; zero on fixed cells."""
    with nogil:
        _rhs(m, fixed, out, c_ex / (dx * dx), c_ex / (dy * dy), c_an,
             c_dmi / (2.0 * dx), c_dmi / (2.0 * dy), a_she, gamma_ll, alpha,
             precess)


def rk4_run(double[:, :, ::1] m, const unsigned char[:, ::1] fixed, double dt,
            const double[::1] a_steps, const double[::1] c_an_steps,
            double dx, double dy, double c_ex, double c_dmi, double gamma_ll,
            double alpha, bint precess, double[:, :, :, ::1] work):
    """Advance ``m`` in place by ``len(a_steps)`` RK4 steps.

    ``a_steps[i]`` and ``c_an_steps[i]`` hold the drive for step ``i``.
    ``work`` is scratch space of shape ``(5, ny, nx, 3)``.

    Returns ``(max_norm_deviation, bad_step)`` where the deviation is taken
    before renormalisation and ``bad_step`` is -1 unless a non-finite value
    appeared.
    """
    cdef Py_ssize_t ny = m.shape[0], nx = m.shape[1]
    cdef Py_ssize_t nsteps = a_steps.shape[0]
    cdef Py_ssize_t s, iy, ix, c
    cdef double wx = c_ex / (dx * dx), wy = c_ex / (dy * dy)
    cdef double dmx = c_dmi / (2.0 * dx), dmy = c_dmi / (2.0 * dy)
    cdef double half = 0.5 * dt, sixth = dt / 6.0
    cdef double a, can, n, dev, worst = 0.0
    cdef Py_ssize_t bad = -1
    cdef double[:, :, ::1] k1 = work[0]
    cdef double[:, :, ::1] k2 = work[1]
    cdef double[:, :, ::1] k3 = work[2]
    cdef double[:, :, ::1] k4 = work[3]
    cdef double[:, :, ::1] tmp = work[4]
    with nogil:
        for s in range(nsteps):
            a = a_steps[s]
            can = c_an_steps[s]
            _rhs(m, fixed, k1, wx, wy, can, dmx, dmy, a, gamma_ll, alpha, precess)
            for iy in range(ny):
                for ix in range(nx):
                    for c in range(3):
                        tmp[iy, ix, c] = m[iy, ix, c] + half * k1[iy, ix, c]
            _rhs(tmp, fixed, k2, wx, wy, can, dmx, dmy, a, gamma_ll, alpha, precess)
            for iy in range(ny):
                for ix in range(nx):
                    for c in range(3):
                        tmp[iy, ix, c] = m[iy, ix, c] + half * k2[iy, ix, c]
            _rhs(tmp, fixed, k3, wx, wy, can, dmx, dmy, a, gamma_ll, alpha, precess)
            for iy in range(ny):
                for ix in range(nx):
                    for c in range(3):
                        tmp[iy, ix, c] = m[iy, ix, c] + dt * k3[iy, ix, c]
            _rhs(tmp, fixed, k4, wx, wy, can, dmx, dmy, a, gamma_ll, alpha, precess)
            for iy in range(ny):
                for ix in range(nx):
                    if fixed[iy, ix]:
                        continue
                    for c in range(3):
                        m[iy, ix, c] = m[iy, ix, c] + sixth * (
                            k1[iy, ix, c] + 2.0 * k2[iy, ix, c]
                            + 2.0 * k3[iy, ix, c] + k4[iy, ix, c])
                    n = sqrt(m[iy, ix, 0] * m[iy, ix, 0]
                             + m[iy, ix, 1] * m[iy, ix, 1]
                             + m[iy, ix, 2] * m[iy, ix, 2])
                    if not isfinite(n):
                        bad = s
                        break
                    dev = fabs(n - 1.0)
                    if dev > worst:
                        worst = dev
                    m[iy, ix, 0] = m[iy, ix, 0] / n
                    m[iy, ix, 1] = m[iy, ix, 1] / n
                    m[iy, ix, 2] = m[iy, ix, 2] / n
                if bad >= 0:
                    break
            if bad >= 0:
                break
    return worst, bad
