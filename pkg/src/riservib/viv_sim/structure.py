"""Tensioned Euler-Bernoulli beam discretization of the riser.

Two-node Hermite elements, pinned at both ends, two independent transverse
fields (the matrices are shared). Effective tension decreases from the top
tension by the cumulative submerged weight; consistent mass includes the
potential-flow added mass on submerged strips.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..core import GRAVITY, EnvironmentProperties, RiserProperties
from ..errors import NumericalError, ValidationError

BANDWIDTH = 3  # half-bandwidth of the (w, theta) element topology
TWO_PI = 2.0 * math.pi


def _element_matrices(le: float, ei: float, tension: float, m_line: float):
    l2 = le * le
    kb = ei / (le * l2) * np.array([
        [12.0, 6.0 * le, -12.0, 6.0 * le],
        [6.0 * le, 4.0 * l2, -6.0 * le, 2.0 * l2],
        [-12.0, -6.0 * le, 12.0, -6.0 * le],
        [6.0 * le, 2.0 * l2, -6.0 * le, 4.0 * l2],
    ])
    kg = tension / (30.0 * le) * np.array([
        [36.0, 3.0 * le, -36.0, 3.0 * le],
        [3.0 * le, 4.0 * l2, -3.0 * le, -l2],
        [-36.0, -3.0 * le, 36.0, -3.0 * le],
        [3.0 * le, -l2, -3.0 * le, 4.0 * l2],
    ])
    me = m_line * le / 420.0 * np.array([
        [156.0, 22.0 * le, 54.0, -13.0 * le],
        [22.0 * le, 4.0 * l2, 13.0 * le, -3.0 * l2],
        [54.0, 13.0 * le, 156.0, -22.0 * le],
        [-13.0 * le, -3.0 * l2, -22.0 * le, 4.0 * l2],
    ])
    return kb + kg, me


@dataclass(frozen=True, eq=False)
class BeamModel:
    props: RiserProperties
    env: EnvironmentProperties
    c_m: float
    n_elements: int
    z_nodes: np.ndarray          # (n_nodes,) from bottom
    el_len: np.ndarray           # (n_el,)
    el_diam: np.ndarray
    el_subm: np.ndarray          # 1.0 submerged / 0.0 dry
    el_tension: np.ndarray       # effective tension at element midpoints
    k_ff: np.ndarray             # reduced stiffness (free DOFs)
    m_ff: np.ndarray
    c_ff: np.ndarray             # Rayleigh damping
    k_top: np.ndarray            # coupling columns of the prescribed top w DOF
    m_top: np.ndarray
    c_top: np.ndarray
    node_w_idx: np.ndarray       # (n_nodes,) reduced w index, -1 bottom, -2 top
    node_th_idx: np.ndarray      # (n_nodes,) reduced theta index
    frequencies: np.ndarray      # (nf,) Hz, ascending
    modes_w: np.ndarray          # (nf, n_nodes) translational components
    modes_th: np.ndarray         # (nf, n_nodes) rotational components
    rayleigh: tuple[float, float]

    @property
    def n_nodes(self) -> int:
        return self.z_nodes.size

    @property
    def n_free(self) -> int:
        return self.k_ff.shape[0]

    def mode_shape(self, j: int, z: np.ndarray) -> np.ndarray:
        """Evaluate mode j (0-based) at arbitrary z with Hermite shape functions."""
        return hermite_eval(self.z_nodes, self.modes_w[j], self.modes_th[j], z)

    def banded(self, a: np.ndarray) -> np.ndarray:
        """Superdiagonal storage (BANDWIDTH+1, nf) of a reduced symmetric matrix."""
        nf = a.shape[0]
        out = np.zeros((BANDWIDTH + 1, nf))
        for k in range(BANDWIDTH + 1):
            out[k, : nf - k] = np.diagonal(a, k)
        return out


def hermite_eval(z_nodes, w, th, z):
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty(z.size)
    for i, zi in enumerate(z):
        e = int(np.clip(np.searchsorted(z_nodes, zi, side="right") - 1,
                        0, z_nodes.size - 2))
        le = z_nodes[e + 1] - z_nodes[e]
        xi = (zi - z_nodes[e]) / le
        n1 = 1.0 - 3.0 * xi**2 + 2.0 * xi**3
        n2 = le * (xi - 2.0 * xi**2 + xi**3)
        n3 = 3.0 * xi**2 - 2.0 * xi**3
        n4 = le * (xi**3 - xi**2)
        out[i] = n1 * w[e] + n2 * th[e] + n3 * w[e + 1] + n4 * th[e + 1]
    return out if out.size > 1 else float(out[0])


def effective_tension(props: RiserProperties, env: EnvironmentProperties,
                      z: np.ndarray) -> np.ndarray:
    """Effective tension at positions z: top tension minus the submerged
    weight of everything above."""
    def wet_weight(zi: float) -> float:
        seg = props.segment_at(zi)
        disp = env.rho * math.pi / 4.0 * seg.outer_diameter ** 2 \
            if zi <= props.water_depth else 0.0
        return GRAVITY * (seg.mass_per_length - disp)

    # integrate wet weight from the top down on a fine grid
    grid = np.linspace(0.0, props.length, 2049)
    w = np.array([wet_weight(zi) for zi in 0.5 * (grid[:-1] + grid[1:])])
    dz = np.diff(grid)
    cum_from_top = np.concatenate(([0.0], np.cumsum((w * dz)[::-1])))[::-1]
    # cum_from_top[i] = weight integral from grid[i] to the top
    return props.top_tension - np.interp(z, grid, cum_from_top)


def build_beam_model(props: RiserProperties, n_elements: int = 60,
                     env: EnvironmentProperties | None = None,
                     c_m: float = 2.0,
                     damping_ratio: float = 0.003,
                     damping_modes: tuple[int, int] = (1, 5)) -> BeamModel:
    """Assemble the pinned-pinned tensioned beam.

    Rayleigh damping is fitted to ``damping_ratio`` of critical at the two
    ``damping_modes`` (1-based); the small default keeps hydrodynamic
    damping dominant.
    """
    if n_elements < 20:
        raise ValidationError("need at least 20 elements")
    env = env or EnvironmentProperties()

    n_nodes = n_elements + 1
    z_nodes = np.linspace(0.0, props.length, n_nodes)
    z_mid = 0.5 * (z_nodes[:-1] + z_nodes[1:])
    el_len = np.diff(z_nodes)
    segs = [props.segment_at(z) for z in z_mid]
    el_diam = np.array([s.outer_diameter for s in segs])
    el_subm = np.array([1.0 if z <= props.water_depth else 0.0 for z in z_mid])
    el_tension = effective_tension(props, env, z_mid)
    if np.any(el_tension <= 0):
        raise NumericalError("effective tension non-positive along the span")

    added = (c_m - 1.0) * env.rho * math.pi / 4.0 * el_diam ** 2 * el_subm
    m_line = np.array([s.mass_per_length for s in segs]) + added

    ndof = 2 * n_nodes
    k_full = np.zeros((ndof, ndof))
    m_full = np.zeros((ndof, ndof))
    for e in range(n_elements):
        ke, me = _element_matrices(el_len[e], segs[e].bending_stiffness,
                                   el_tension[e], m_line[e])
        dofs = [2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3]
        k_full[np.ix_(dofs, dofs)] += ke
        m_full[np.ix_(dofs, dofs)] += me

    # prescribed DOFs: w at both ends (bottom pinned, top follows the vessel)
    bottom_w, top_w = 0, 2 * (n_nodes - 1)
    free = np.array([i for i in range(ndof) if i not in (bottom_w, top_w)])
    k_ff = k_full[np.ix_(free, free)]
    m_ff = m_full[np.ix_(free, free)]
    k_top = k_full[free, top_w]
    m_top = m_full[free, top_w]

    try:
        lam, vec = scipy.linalg.eigh(k_ff, m_ff)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalError("beam matrices not positive definite") from exc
    if lam[0] <= 0:
        raise NumericalError("beam stiffness not positive definite")
    freqs = np.sqrt(lam) / TWO_PI

    # Rayleigh C = a0 M + a1 K fitted at two modal frequencies
    i1, i2 = damping_modes[0] - 1, damping_modes[1] - 1
    w1, w2 = 2.0 * math.pi * freqs[i1], 2.0 * math.pi * freqs[i2]
    a0 = 2.0 * damping_ratio * w1 * w2 / (w1 + w2)
    a1 = 2.0 * damping_ratio / (w1 + w2)
    c_ff = a0 * m_ff + a1 * k_ff
    c_top = a0 * m_top + a1 * k_top

    # bookkeeping: reduced index per node DOF
    pos = {int(g): i for i, g in enumerate(free)}
    node_w_idx = np.empty(n_nodes, dtype=np.intp)
    node_th_idx = np.empty(n_nodes, dtype=np.intp)
    for n in range(n_nodes):
        gw, gt = 2 * n, 2 * n + 1
        if gw == bottom_w:
            node_w_idx[n] = -1
        elif gw == top_w:
            node_w_idx[n] = -2
        else:
            node_w_idx[n] = pos[gw]
        node_th_idx[n] = pos[gt]

    # mass-orthonormal mode shapes on the node grid
    nf = free.size
    modes_w = np.zeros((nf, n_nodes))
    modes_th = np.zeros((nf, n_nodes))
    for j in range(nf):
        v = vec[:, j]
        for n in range(n_nodes):
            iw = node_w_idx[n]
            modes_w[j, n] = v[iw] if iw >= 0 else 0.0
            modes_th[j, n] = v[node_th_idx[n]]

    return BeamModel(
        props=props, env=env, c_m=c_m, n_elements=n_elements,
        z_nodes=z_nodes, el_len=el_len, el_diam=el_diam, el_subm=el_subm,
        el_tension=el_tension,
        k_ff=k_ff, m_ff=m_ff, c_ff=c_ff,
        k_top=k_top, m_top=m_top, c_top=c_top,
        node_w_idx=node_w_idx, node_th_idx=node_th_idx,
        frequencies=freqs, modes_w=modes_w, modes_th=modes_th,
        rayleigh=(a0, a1),
    )

