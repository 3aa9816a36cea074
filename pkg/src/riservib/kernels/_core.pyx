# cython: language_level=3
"""Compiled kernel backend: hot time-stepping loops.

Mirrors ``_fallback.py`` operation-for-operation; the rigid-cylinder loop is
written so both backends perform the identical IEEE double sequence.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, cos, fabs, sin, sqrt

cnp.import_array()

cdef double TWO_PI = 6.283185307179586476925287


cdef inline void _rigid_deriv(double* s, double* out, double* mem,
                              double m_eff, double c_il, double c_cf,
                              double k_il, double k_cf, double d, double rho,
                              double u, double c_d, double c_vx, double c_vy,
                              double f0_x, double f0_y,
                              double fx_lo, double fx_hi,
                              double fy_lo, double fy_hi,
                              double dfx_up, double dfx_dn,
                              double dfy_up, double dfy_dn) noexcept nogil:
    cdef double x = s[0], y = s[1], vx = s[2], vy = s[3], phix = s[4], phiy = s[5]
    cdef double ux = u - vx
    cdef double uy = -vy
    cdef double vmag = sqrt(ux * ux + uy * uy)
    cdef double coef = 0.5 * rho * d * vmag
    cdef double fdrag = coef * c_d
    cdef double fvx = coef * c_vx * cos(phix)
    cdef double fvy = coef * c_vy * cos(phiy)
    cdef double fx = (fdrag + fvx) * ux - fvy * uy
    cdef double fy = (fdrag + fvx) * uy + fvy * ux
    cdef double ax = (fx - k_il * x - c_il * vx) / m_eff
    cdef double ay = (fy - k_cf * y - c_cf * vy) / m_eff
    cdef double wy, wx, pvy, pvx, sy, sx, fhy, fhx, dphix, dphiy
    if vmag > 1e-12:
        wy = TWO_PI * vmag / d * f0_y
        wx = TWO_PI * vmag / d * f0_x
        if vy == 0.0 and ay == 0.0:
            pvy = mem[1]
        else:
            pvy = atan2(-ay / wy, vy)
        if vx == 0.0 and ax == 0.0:
            pvx = mem[0]
        else:
            pvx = atan2(-ax / wx, vx)
        mem[0] = pvx
        mem[1] = pvy
        sy = sin(pvy - phiy)
        sx = sin(pvx - phix)
        fhy = f0_y + (dfy_up if sy >= 0.0 else dfy_dn) * sy
        fhx = f0_x + (dfx_up if sx >= 0.0 else dfx_dn) * sx
        if fhy < fy_lo:
            fhy = fy_lo
        elif fhy > fy_hi:
            fhy = fy_hi
        if fhx < fx_lo:
            fhx = fx_lo
        elif fhx > fx_hi:
            fhx = fx_hi
        dphiy = TWO_PI * vmag / d * fhy
        dphix = TWO_PI * vmag / d * fhx
    else:
        dphix = 0.0
        dphiy = 0.0
    out[0] = vx
    out[1] = vy
    out[2] = ax
    out[3] = ay
    out[4] = dphix
    out[5] = dphiy


def rigid_cylinder_run(double m_eff, double c_il, double c_cf,
                       double k_il, double k_cf, double d, double rho, double u,
                       double c_d, double c_vx, double c_vy,
                       double f0_x, double f0_y,
                       double fx_lo, double fx_hi, double fy_lo, double fy_hi,
                       double dt, Py_ssize_t n_steps, double guard_disp):
    cdef double dfy_up = fy_hi - f0_y
    cdef double dfy_dn = f0_y - fy_lo
    cdef double dfx_up = fx_hi - f0_x
    cdef double dfx_dn = f0_x - fx_lo

    hist_arr = np.zeros((n_steps + 1, 6))
    cdef double[:, ::1] hist = hist_arr
    cdef double mem[2]
    cdef double s[6]
    cdef double tmp[6]
    cdef double ka[6]
    cdef double kb[6]
    cdef double kc[6]
    cdef double kd[6]
    cdef double h2 = 0.5 * dt
    cdef double h6 = dt / 6.0
    cdef Py_ssize_t i, j
    cdef Py_ssize_t n_done = n_steps

    mem[0] = 0.0
    mem[1] = 0.0
    for j in range(6):
        s[j] = 0.0

    with nogil:
        for i in range(n_steps):
            _rigid_deriv(s, ka, mem, m_eff, c_il, c_cf, k_il, k_cf, d, rho, u,
                         c_d, c_vx, c_vy, f0_x, f0_y, fx_lo, fx_hi, fy_lo, fy_hi,
                         dfx_up, dfx_dn, dfy_up, dfy_dn)
            for j in range(6):
                tmp[j] = s[j] + h2 * ka[j]
            _rigid_deriv(tmp, kb, mem, m_eff, c_il, c_cf, k_il, k_cf, d, rho, u,
                         c_d, c_vx, c_vy, f0_x, f0_y, fx_lo, fx_hi, fy_lo, fy_hi,
                         dfx_up, dfx_dn, dfy_up, dfy_dn)
            for j in range(6):
                tmp[j] = s[j] + h2 * kb[j]
            _rigid_deriv(tmp, kc, mem, m_eff, c_il, c_cf, k_il, k_cf, d, rho, u,
                         c_d, c_vx, c_vy, f0_x, f0_y, fx_lo, fx_hi, fy_lo, fy_hi,
                         dfx_up, dfx_dn, dfy_up, dfy_dn)
            for j in range(6):
                tmp[j] = s[j] + dt * kc[j]
            _rigid_deriv(tmp, kd, mem, m_eff, c_il, c_cf, k_il, k_cf, d, rho, u,
                         c_d, c_vx, c_vy, f0_x, f0_y, fx_lo, fx_hi, fy_lo, fy_hi,
                         dfx_up, dfx_dn, dfy_up, dfy_dn)
            for j in range(6):
                s[j] += h6 * (ka[j] + 2.0 * (kb[j] + kc[j]) + kd[j])
                hist[i + 1, j] = s[j]
            if fabs(s[0]) > guard_disp or fabs(s[1]) > guard_disp:
                n_done = i + 1
                break
    return hist_arr, n_done


cdef inline void _band_matvec(double[:, ::1] diags, double* x, double* y,
                              Py_ssize_t n, Py_ssize_t bw) noexcept nogil:
    cdef Py_ssize_t i, k
    for i in range(n):
        y[i] = diags[0, i] * x[i]
    for k in range(1, bw + 1):
        for i in range(n - k):
            y[i] += diags[k, i] * x[i + k]
            y[i + k] += diags[k, i] * x[i]


cdef inline void _chol_banded_solve(double[:, ::1] ab, double* b, double* w,
                                    Py_ssize_t n, Py_ssize_t u) noexcept nogil:
    """Solve A x = b given the upper-banded Cholesky factor ab (A = U^T U),
    LAPACK upper storage ab[u + i - j, j] = U[i, j]. Result overwrites b."""
    cdef Py_ssize_t i, j, j0, j1
    cdef double acc
    # forward: U^T w = b
    for i in range(n):
        acc = b[i]
        j0 = i - u if i >= u else 0
        for j in range(j0, i):
            acc -= ab[u + j - i, i] * w[j]
        w[i] = acc / ab[u, i]
    # backward: U x = w
    for i in range(n - 1, -1, -1):
        acc = w[i]
        j1 = i + u if i + u < n - 1 else n - 1
        for j in range(i + 1, j1 + 1):
            acc -= ab[u + i - j, j] * b[j]
        b[i] = acc / ab[u, i]


def riser_run(double dt, Py_ssize_t n_steps,
              double[:, ::1] keff_chol,
              double[:, ::1] m_diags, double[:, ::1] c_diags, double[:, ::1] k_diags,
              double[::1] m_top, double[::1] c_top, double[::1] k_top,
              Py_ssize_t[::1] el_iw0, Py_ssize_t[::1] el_ith0,
              Py_ssize_t[::1] el_iw1, Py_ssize_t[::1] el_ith1,
              double[::1] el_len, double[::1] el_diam, double[::1] el_subm,
              double rho, double c_d, double c_m, double c_vx, double c_vy,
              double f0_x, double f0_y,
              double fx_lo, double fx_hi, double fy_lo, double fy_hi,
              double[::1] prof_t, double[:, ::1] prof_ue, double[:, ::1] prof_un,
              double ramp_time,
              double[:, ::1] top_d, double[:, ::1] top_v, double[:, ::1] top_a,
              Py_ssize_t[::1] node_w_idx,
              double[:, ::1] u0, double[:, ::1] v0, double[:, ::1] a0,
              Py_ssize_t stats_start, Py_ssize_t[::1] rec_nodes,
              Py_ssize_t rec_stride, double guard_disp):
    cdef Py_ssize_t nf = u0.shape[0]
    cdef Py_ssize_t n_el = el_len.shape[0]
    cdef Py_ssize_t n_nodes = node_w_idx.shape[0]
    cdef Py_ssize_t n_rec = rec_nodes.shape[0]
    cdef Py_ssize_t n_rec_samples = n_steps // rec_stride + 1
    cdef Py_ssize_t bw = m_diags.shape[0] - 1
    cdef Py_ssize_t ubw = keff_chol.shape[0] - 1

    uf_arr = np.array(u0, dtype=float)
    vf_arr = np.array(v0, dtype=float)
    af_arr = np.array(a0, dtype=float)
    cdef double[:, ::1] uf = uf_arr
    cdef double[:, ::1] vf = vf_arr
    cdef double[:, ::1] af = af_arr

    phix_arr = np.zeros(n_el)
    phiy_arr = np.zeros(n_el)
    pvx_arr = np.zeros(n_el)
    pvy_arr = np.zeros(n_el)
    cdef double[::1] phix = phix_arr
    cdef double[::1] phiy = phiy_arr
    cdef double[::1] pvx_mem = pvx_arr
    cdef double[::1] pvy_mem = pvy_arr

    sum_arr = np.zeros((n_nodes, 2))
    sumsq_arr = np.zeros((n_nodes, 2))
    sumxy_arr = np.zeros(n_nodes)
    rec_disp_arr = np.zeros((n_rec, 2, n_rec_samples))
    rec_acc_arr = np.zeros((n_rec, 2, n_rec_samples))
    cdef double[:, ::1] sum_w = sum_arr
    cdef double[:, ::1] sumsq_w = sumsq_arr
    cdef double[::1] sumxy_w = sumxy_arr
    cdef double[:, :, ::1] rec_disp = rec_disp_arr
    cdef double[:, :, ::1] rec_acc = rec_acc_arr

    work = np.zeros((8, max(nf, n_nodes)))
    cdef double[:, ::1] wk = work
    fbuf = np.zeros((2, nf))
    cdef double[:, ::1] F = fbuf
    solbuf = np.zeros((2, nf))
    cdef double[:, ::1] sol = solbuf

    cdef double dfy_up = fy_hi - f0_y
    cdef double dfy_dn = f0_y - fy_lo
    cdef double dfx_up = fx_hi - f0_x
    cdef double dfx_dn = f0_x - fx_lo
    cdef double pi = 3.14159265358979323846264
    cdef double inv_ramp = 1.0 / ramp_time if ramp_time > 0 else 0.0
    cdef double a4dt2 = 4.0 / (dt * dt)
    cdef double a4dt = 4.0 / dt
    cdef double a2dt = 2.0 / dt
    cdef double tiny = 1e-12

    cdef Py_ssize_t i, e, j, ax, knot = 0, step, n_done = n_steps, idx, slot
    cdef Py_ssize_t n_knots = prof_t.shape[0]
    cdef Py_ssize_t n_stats = 0
    cdef double t, span, w1, ue, un, due, dun, ramp
    cdef double vmx, vmy, amx, amy, vnx, vny, vmag, coef, cpx, cpy, qx, qy
    cdef double fk, umag, ex, ey, xdot, ydot, xddot, yddot, wy, wx
    cdef double pvy, pvx, sy, sx, fhy, fhx, adv, half, mom, dmax, v, rhsv
    cdef double vx0, vy0, axn0, ayn0, vx1, vy1, axn1, ayn1

    # record initial state
    for j in range(n_rec):
        idx = rec_nodes[j]
        for ax in range(2):
            if node_w_idx[idx] >= 0:
                rec_disp[j, ax, 0] = uf[node_w_idx[idx], ax]
                rec_acc[j, ax, 0] = af[node_w_idx[idx], ax]
            elif node_w_idx[idx] == -2:
                rec_disp[j, ax, 0] = top_d[0, ax]
                rec_acc[j, ax, 0] = top_a[0, ax]

    with nogil:
        for i in range(n_steps):
            t = i * dt
            while knot < n_knots - 2 and prof_t[knot + 1] <= t:
                knot += 1

            # gather nodal velocities/accelerations into work rows 0..3
            for j in range(n_nodes):
                idx = node_w_idx[j]
                if idx >= 0:
                    wk[0, j] = vf[idx, 0]
                    wk[1, j] = vf[idx, 1]
                    wk[2, j] = af[idx, 0]
                    wk[3, j] = af[idx, 1]
                elif idx == -2:
                    wk[0, j] = top_v[i, 0]
                    wk[1, j] = top_v[i, 1]
                    wk[2, j] = top_a[i, 0]
                    wk[3, j] = top_a[i, 1]
                else:
                    wk[0, j] = 0.0
                    wk[1, j] = 0.0
                    wk[2, j] = 0.0
                    wk[3, j] = 0.0

            for ax in range(2):
                for j in range(nf):
                    F[ax, j] = 0.0

            for e in range(n_el):
                if n_knots == 1:
                    ue = prof_ue[0, e]
                    un = prof_un[0, e]
                    due = 0.0
                    dun = 0.0
                else:
                    span = prof_t[knot + 1] - prof_t[knot]
                    w1 = (t - prof_t[knot]) / span
                    if w1 < 0.0:
                        w1 = 0.0
                    elif w1 > 1.0:
                        w1 = 1.0
                    ue = prof_ue[knot, e] * (1.0 - w1) + prof_ue[knot + 1, e] * w1
                    un = prof_un[knot, e] * (1.0 - w1) + prof_un[knot + 1, e] * w1
                    due = (prof_ue[knot + 1, e] - prof_ue[knot, e]) / span
                    dun = (prof_un[knot + 1, e] - prof_un[knot, e]) / span
                if ramp_time > 0 and t < ramp_time:
                    ramp = t * inv_ramp
                    due = ramp * due + inv_ramp * ue
                    dun = ramp * dun + inv_ramp * un
                    ue = ramp * ue
                    un = ramp * un

                vmx = 0.5 * (wk[0, e] + wk[0, e + 1])
                vmy = 0.5 * (wk[1, e] + wk[1, e + 1])
                amx = 0.5 * (wk[2, e] + wk[2, e + 1])
                amy = 0.5 * (wk[3, e] + wk[3, e + 1])

                vnx = ue - vmx
                vny = un - vmy
                vmag = sqrt(vnx * vnx + vny * vny)
                coef = 0.5 * rho * el_diam[e] * vmag
                cpx = cos(phix[e])
                cpy = cos(phiy[e])
                fk = c_m * rho * pi / 4.0 * el_diam[e] * el_diam[e]
                qx = fk * due + (coef * c_d + coef * c_vx * cpx) * vnx \
                    - coef * c_vy * cpy * vny
                qy = fk * dun + (coef * c_d + coef * c_vx * cpx) * vny \
                    + coef * c_vy * cpy * vnx
                qx = qx * el_subm[e]
                qy = qy * el_subm[e]

                umag = sqrt(ue * ue + un * un)
                if umag > tiny:
                    ex = ue / umag
                    ey = un / umag
                elif vmag > tiny:
                    ex = vnx / vmag
                    ey = vny / vmag
                else:
                    ex = 1.0
                    ey = 0.0
                xdot = ex * vmx + ey * vmy
                ydot = -ey * vmx + ex * vmy
                xddot = ex * amx + ey * amy
                yddot = -ey * amx + ex * amy
                if vmag > tiny:
                    wy = TWO_PI * vmag / el_diam[e] * f0_y
                    wx = TWO_PI * vmag / el_diam[e] * f0_x
                    if ydot == 0.0 and yddot == 0.0:
                        pvy = pvy_mem[e]
                    else:
                        pvy = atan2(-yddot / wy, ydot)
                    if xdot == 0.0 and xddot == 0.0:
                        pvx = pvx_mem[e]
                    else:
                        pvx = atan2(-xddot / wx, xdot)
                    pvy_mem[e] = pvy
                    pvx_mem[e] = pvx
                    sy = sin(pvy - phiy[e])
                    sx = sin(pvx - phix[e])
                    fhy = f0_y + (dfy_up if sy >= 0.0 else dfy_dn) * sy
                    fhx = f0_x + (dfx_up if sx >= 0.0 else dfx_dn) * sx
                    if fhy < fy_lo:
                        fhy = fy_lo
                    elif fhy > fy_hi:
                        fhy = fy_hi
                    if fhx < fx_lo:
                        fhx = fx_lo
                    elif fhx > fx_hi:
                        fhx = fx_hi
                    adv = TWO_PI * vmag / el_diam[e] * dt
                    phiy[e] = phiy[e] + adv * fhy
                    phix[e] = phix[e] + adv * fhx

                half = 0.5 * el_len[e]
                mom = el_len[e] * el_len[e] / 12.0
                if el_iw0[e] >= 0:
                    F[0, el_iw0[e]] += qx * half
                    F[1, el_iw0[e]] += qy * half
                if el_iw1[e] >= 0:
                    F[0, el_iw1[e]] += qx * half
                    F[1, el_iw1[e]] += qy * half
                F[0, el_ith0[e]] += qx * mom
                F[1, el_ith0[e]] += qy * mom
                F[0, el_ith1[e]] -= qx * mom
                F[1, el_ith1[e]] -= qy * mom

            step = i + 1
            for ax in range(2):
                # rhs = F + M(4/dt^2 u + 4/dt v + a) + C(2/dt u + v) - coupling
                for j in range(nf):
                    wk[4, j] = a4dt2 * uf[j, ax] + a4dt * vf[j, ax] + af[j, ax]
                    wk[5, j] = a2dt * uf[j, ax] + vf[j, ax]
                _band_matvec(m_diags, &wk[4, 0], &wk[6, 0], nf, bw)
                _band_matvec(c_diags, &wk[5, 0], &wk[7, 0], nf, bw)
                for j in range(nf):
                    sol[ax, j] = F[ax, j] + wk[6, j] + wk[7, j] \
                        - k_top[j] * top_d[step, ax] \
                        - c_top[j] * top_v[step, ax] \
                        - m_top[j] * top_a[step, ax]
                _chol_banded_solve(keff_chol, &sol[ax, 0], &wk[4, 0], nf, ubw)
                for j in range(nf):
                    rhsv = sol[ax, j]
                    v = a4dt2 * (rhsv - uf[j, ax]) - a4dt * vf[j, ax] - af[j, ax]
                    vf[j, ax] = vf[j, ax] + 0.5 * dt * (af[j, ax] + v)
                    uf[j, ax] = rhsv
                    af[j, ax] = v

            if step >= stats_start:
                for j in range(n_nodes):
                    idx = node_w_idx[j]
                    if idx >= 0:
                        vmx = uf[idx, 0]
                        vmy = uf[idx, 1]
                    elif idx == -2:
                        vmx = top_d[step, 0]
                        vmy = top_d[step, 1]
                    else:
                        vmx = 0.0
                        vmy = 0.0
                    sum_w[j, 0] += vmx
                    sum_w[j, 1] += vmy
                    sumsq_w[j, 0] += vmx * vmx
                    sumsq_w[j, 1] += vmy * vmy
                    sumxy_w[j] += vmx * vmy
                n_stats += 1

            if step % rec_stride == 0:
                slot = step // rec_stride
                for j in range(n_rec):
                    idx = rec_nodes[j]
                    for ax in range(2):
                        if node_w_idx[idx] >= 0:
                            rec_disp[j, ax, slot] = uf[node_w_idx[idx], ax]
                            rec_acc[j, ax, slot] = af[node_w_idx[idx], ax]
                        elif node_w_idx[idx] == -2:
                            rec_disp[j, ax, slot] = top_d[step, ax]
                            rec_acc[j, ax, slot] = top_a[step, ax]

            dmax = 0.0
            for j in range(nf):
                if fabs(uf[j, 0]) > dmax:
                    dmax = fabs(uf[j, 0])
                if fabs(uf[j, 1]) > dmax:
                    dmax = fabs(uf[j, 1])
            if dmax > guard_disp:
                n_done = step
                break

    return sum_arr, sumsq_arr, sumxy_arr, n_stats, rec_disp_arr, rec_acc_arr, n_done
