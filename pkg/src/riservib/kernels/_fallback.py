"""Pure-Python kernel backend.

Same call signatures and numerics as the compiled backend in ``_core.pyx``.
The rigid-cylinder loop is scalar Python written to match the compiled
arithmetic expression-for-expression; the riser loop vectorizes over strips
with numpy, so it matches the compiled backend to floating-point roundoff
rather than bit-for-bit.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg import cho_solve_banded

TWO_PI = 2.0 * math.pi


def rigid_cylinder_run(m_eff, c_il, c_cf, k_il, k_cf, d, rho, u,
                       c_d, c_vx, c_vy, f0_x, f0_y,
                       fx_lo, fx_hi, fy_lo, fy_hi,
                       dt, n_steps, guard_disp):
    """Integrate the 2-DOF cylinder + 2 vortex phases with classic RK4.

    State: (x, y, vx, vy, phi_x, phi_y); x is in-line with the flow.
    Returns (history array (n_steps+1, 6), completed step count).
    """
    dfy_up = fy_hi - f0_y
    dfy_dn = f0_y - fy_lo
    dfx_up = fx_hi - f0_x
    dfx_dn = f0_x - fx_lo

    hist = np.zeros((n_steps + 1, 6))
    # phase-estimator memory for the degenerate (zero projections) corner
    mem = [0.0, 0.0]  # last pv_x, last pv_y

    sin = math.sin
    cos = math.cos
    sqrt = math.sqrt
    atan2 = math.atan2

    def deriv(x, y, vx, vy, phix, phiy):
        ux = u - vx
        uy = -vy
        vmag = sqrt(ux * ux + uy * uy)
        coef = 0.5 * rho * d * vmag
        fdrag = coef * c_d
        fvx = coef * c_vx * cos(phix)
        fvy = coef * c_vy * cos(phiy)
        fx = (fdrag + fvx) * ux - fvy * uy
        fy = (fdrag + fvx) * uy + fvy * ux
        ax = (fx - k_il * x - c_il * vx) / m_eff
        ay = (fy - k_cf * y - c_cf * vy) / m_eff
        if vmag > 1e-12:
            # phase estimators in the ambient-flow frame (flow along +x)
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
        return vx, vy, ax, ay, dphix, dphiy

    s0 = s1 = s2 = s3 = s4 = s5 = 0.0
    h2 = 0.5 * dt
    h6 = dt / 6.0
    n_done = n_steps
    for i in range(n_steps):
        a0, a1, a2, a3, a4, a5 = deriv(s0, s1, s2, s3, s4, s5)
        b0, b1, b2, b3, b4, b5 = deriv(s0 + h2 * a0, s1 + h2 * a1, s2 + h2 * a2,
                                       s3 + h2 * a3, s4 + h2 * a4, s5 + h2 * a5)
        c0, c1, c2, c3, c4, c5 = deriv(s0 + h2 * b0, s1 + h2 * b1, s2 + h2 * b2,
                                       s3 + h2 * b3, s4 + h2 * b4, s5 + h2 * b5)
        d0, d1, d2, d3, d4, d5 = deriv(s0 + dt * c0, s1 + dt * c1, s2 + dt * c2,
                                       s3 + dt * c3, s4 + dt * c4, s5 + dt * c5)
        s0 += h6 * (a0 + 2.0 * (b0 + c0) + d0)
        s1 += h6 * (a1 + 2.0 * (b1 + c1) + d1)
        s2 += h6 * (a2 + 2.0 * (b2 + c2) + d2)
        s3 += h6 * (a3 + 2.0 * (b3 + c3) + d3)
        s4 += h6 * (a4 + 2.0 * (b4 + c4) + d4)
        s5 += h6 * (a5 + 2.0 * (b5 + c5) + d5)
        hist[i + 1, 0] = s0
        hist[i + 1, 1] = s1
        hist[i + 1, 2] = s2
        hist[i + 1, 3] = s3
        hist[i + 1, 4] = s4
        hist[i + 1, 5] = s5
        if abs(s0) > guard_disp or abs(s1) > guard_disp:
            n_done = i + 1
            break
    return hist, n_done


def _band_matvec(diags, x):
    """y = A @ x for symmetric banded A.

    ``diags`` has shape (bw+1, n): row k holds the k-th superdiagonal in
    ``diags[k, :n-k]`` (padded with zeros at the tail).
    """
    y = diags[0] * x
    n = x.shape[0]
    for k in range(1, diags.shape[0]):
        dk = diags[k, : n - k]
        y[:-k] += dk * x[k:]
        y[k:] += dk * x[:-k]
    return y


def riser_run(dt, n_steps,
              keff_chol, m_diags, c_diags, k_diags,
              m_top, c_top, k_top,
              el_iw0, el_ith0, el_iw1, el_ith1,
              el_len, el_diam, el_subm,
              rho, c_d, c_m, c_vx, c_vy,
              f0_x, f0_y, fx_lo, fx_hi, fy_lo, fy_hi,
              prof_t, prof_ue, prof_un, ramp_time,
              top_d, top_v, top_a,
              node_w_idx,
              u0, v0, a0,
              stats_start, rec_nodes, rec_stride, guard_disp):
    """Newmark-beta (gamma=1/2, beta=1/4) stepping of the two transverse
    fields with strip vortex forces evaluated explicitly from the
    previous-step kinematics.

    Matrices act on the reduced (free-DOF) vectors; the prescribed top
    node enters through the coupling columns ``*_top`` and the motion
    arrays ``top_d/v/a`` of shape (n_steps+1, 2).

    Returns (sum_w, sumsq_w, n_stats, rec_disp, rec_acc, n_done).
    """
    nf = u0.shape[0]
    n_el = el_len.shape[0]
    n_nodes = node_w_idx.shape[0]

    uf = u0.astype(float).copy()
    vf = v0.astype(float).copy()
    af = a0.astype(float).copy()

    phix = np.zeros(n_el)
    phiy = np.zeros(n_el)
    pvx_mem = np.zeros(n_el)
    pvy_mem = np.zeros(n_el)

    dfy_up = fy_hi - f0_y
    dfy_dn = f0_y - fy_lo
    dfx_up = fx_hi - f0_x
    dfx_dn = f0_x - fx_lo
    fk_coef = c_m * rho * math.pi / 4.0 * el_diam ** 2

    inv_ramp = 1.0 / ramp_time if ramp_time > 0 else 0.0

    n_rec = len(rec_nodes)
    n_rec_samples = n_steps // rec_stride + 1
    rec_disp = np.zeros((n_rec, 2, n_rec_samples))
    rec_acc = np.zeros((n_rec, 2, n_rec_samples))
    sum_w = np.zeros((n_nodes, 2))
    sumsq_w = np.zeros((n_nodes, 2))
    sumxy_w = np.zeros(n_nodes)
    n_stats = 0

    a4dt2 = 4.0 / (dt * dt)
    a4dt = 4.0 / dt
    a2dt = 2.0 / dt

    # node DOF gather helpers (vectorized over nodes)
    w_free = node_w_idx >= 0
    w_idx = np.where(w_free, node_w_idx, 0)
    is_top = node_w_idx == -2

    def node_values(vec, top_row):
        out = np.where(w_free, vec[w_idx], 0.0)
        return np.where(is_top, top_row, out)

    def record(slot, step):
        for ax in range(2):
            dn = node_values(uf[:, ax], top_d[step, ax])
            an = node_values(af[:, ax], top_a[step, ax])
            rec_disp[:, ax, slot] = dn[rec_nodes]
            rec_acc[:, ax, slot] = an[rec_nodes]

    record(0, 0)

    knot = 0
    n_knots = prof_t.shape[0]
    n_done = n_steps
    half_len = 0.5 * el_len
    mom_len = el_len ** 2 / 12.0
    tiny = 1e-12

    for i in range(n_steps):
        t = i * dt
        # ambient current (linear in time between profile knots, ramped)
        while knot < n_knots - 2 and prof_t[knot + 1] <= t:
            knot += 1
        if n_knots == 1:
            ue, un = prof_ue[0].copy(), prof_un[0].copy()
            due = np.zeros(n_el)
            dun = np.zeros(n_el)
        else:
            span = prof_t[knot + 1] - prof_t[knot]
            w1 = (t - prof_t[knot]) / span
            w1 = min(max(w1, 0.0), 1.0)
            ue = prof_ue[knot] * (1.0 - w1) + prof_ue[knot + 1] * w1
            un = prof_un[knot] * (1.0 - w1) + prof_un[knot + 1] * w1
            due = (prof_ue[knot + 1] - prof_ue[knot]) / span
            dun = (prof_un[knot + 1] - prof_un[knot]) / span
        if ramp_time > 0 and t < ramp_time:
            ramp = t * inv_ramp
            due = ramp * due + inv_ramp * ue
            dun = ramp * dun + inv_ramp * un
            ue = ramp * ue
            un = ramp * un

        # structural kinematics at strip midpoints
        vx_nodes = node_values(vf[:, 0], top_v[i, 0])
        vy_nodes = node_values(vf[:, 1], top_v[i, 1])
        ax_nodes = node_values(af[:, 0], top_a[i, 0])
        ay_nodes = node_values(af[:, 1], top_a[i, 1])
        vmx = 0.5 * (vx_nodes[:-1] + vx_nodes[1:])
        vmy = 0.5 * (vy_nodes[:-1] + vy_nodes[1:])
        amx = 0.5 * (ax_nodes[:-1] + ax_nodes[1:])
        amy = 0.5 * (ay_nodes[:-1] + ay_nodes[1:])

        vnx = ue - vmx
        vny = un - vmy
        vmag = np.sqrt(vnx * vnx + vny * vny)
        coef = 0.5 * rho * el_diam * vmag
        cpx = np.cos(phix)
        cpy = np.cos(phiy)
        qx = fk_coef * due + (coef * c_d + coef * c_vx * cpx) * vnx \
            - coef * c_vy * cpy * vny
        qy = fk_coef * dun + (coef * c_d + coef * c_vx * cpx) * vny \
            + coef * c_vy * cpy * vnx
        qx = qx * el_subm
        qy = qy * el_subm

        # phase estimators: ambient-flow frame per strip, relative-velocity
        # frame fallback where the ambient flow vanishes
        umag = np.sqrt(ue * ue + un * un)
        use_amb = umag > tiny
        ex = np.where(use_amb, ue / np.where(use_amb, umag, 1.0),
                      vnx / np.where(vmag > tiny, vmag, 1.0))
        ey = np.where(use_amb, un / np.where(use_amb, umag, 1.0),
                      vny / np.where(vmag > tiny, vmag, 1.0))
        xdot = ex * vmx + ey * vmy
        ydot = -ey * vmx + ex * vmy
        xddot = ex * amx + ey * amy
        yddot = -ey * amx + ex * amy
        active = vmag > tiny
        safe_vmag = np.where(active, vmag, 1.0)
        wy = TWO_PI * safe_vmag / el_diam * f0_y
        wx = TWO_PI * safe_vmag / el_diam * f0_x
        degen_y = (ydot == 0.0) & (yddot == 0.0)
        degen_x = (xdot == 0.0) & (xddot == 0.0)
        pvy = np.where(degen_y, pvy_mem, np.arctan2(-yddot / wy, ydot))
        pvx = np.where(degen_x, pvx_mem, np.arctan2(-xddot / wx, xdot))
        pvy_mem = np.where(active, pvy, pvy_mem)
        pvx_mem = np.where(active, pvx, pvx_mem)
        sy = np.sin(pvy - phiy)
        sx = np.sin(pvx - phix)
        fhy = f0_y + np.where(sy >= 0.0, dfy_up, dfy_dn) * sy
        fhx = f0_x + np.where(sx >= 0.0, dfx_up, dfx_dn) * sx
        fhy = np.clip(fhy, fy_lo, fy_hi)
        fhx = np.clip(fhx, fx_lo, fx_hi)
        adv = TWO_PI * vmag / el_diam * dt
        phiy = phiy + np.where(active, adv * fhy, 0.0)
        phix = phix + np.where(active, adv * fhx, 0.0)

        # consistent nodal loads from midpoint force treated uniform per strip
        F = np.zeros((nf, 2))
        for ax, q in ((0, qx), (1, qy)):
            np.add.at(F[:, ax], el_iw0[el_iw0 >= 0], (q * half_len)[el_iw0 >= 0])
            np.add.at(F[:, ax], el_iw1[el_iw1 >= 0], (q * half_len)[el_iw1 >= 0])
            np.add.at(F[:, ax], el_ith0, (q * mom_len))
            np.subtract.at(F[:, ax], el_ith1, (q * mom_len))

        # Newmark step (average acceleration), per axis
        for ax in range(2):
            rhs = F[:, ax] \
                + _band_matvec(m_diags, a4dt2 * uf[:, ax] + a4dt * vf[:, ax] + af[:, ax]) \
                + _band_matvec(c_diags, a2dt * uf[:, ax] + vf[:, ax]) \
                - k_top * top_d[i + 1, ax] - c_top * top_v[i + 1, ax] \
                - m_top * top_a[i + 1, ax]
            u_new = cho_solve_banded((keff_chol, False), rhs)
            a_new = a4dt2 * (u_new - uf[:, ax]) - a4dt * vf[:, ax] - af[:, ax]
            vf[:, ax] = vf[:, ax] + 0.5 * dt * (af[:, ax] + a_new)
            uf[:, ax] = u_new
            af[:, ax] = a_new

        step = i + 1
        if step >= stats_start:
            wx_nodes = node_values(uf[:, 0], top_d[step, 0])
            wy_nodes = node_values(uf[:, 1], top_d[step, 1])
            sum_w[:, 0] += wx_nodes
            sum_w[:, 1] += wy_nodes
            sumsq_w[:, 0] += wx_nodes * wx_nodes
            sumsq_w[:, 1] += wy_nodes * wy_nodes
            sumxy_w += wx_nodes * wy_nodes
            n_stats += 1
        if step % rec_stride == 0:
            record(step // rec_stride, step)
        if np.max(np.abs(uf[:, 0])) > guard_disp or np.max(np.abs(uf[:, 1])) > guard_disp:
            n_done = step
            break

    return sum_w, sumsq_w, sumxy_w, n_stats, rec_disp, rec_acc, n_done
