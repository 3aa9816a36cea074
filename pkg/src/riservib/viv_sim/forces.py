"""Strip hydrodynamic load model with synchronized vortex shedding forces.

Per unit length of a cylinder strip, the load combines a Morison-type
inertia/drag part with in-line and cross-flow vortex shedding forces whose
instantaneous phases follow the synchronization model: the dimensionless
shedding frequency is pulled within its synchronization range towards the
phase of the structural velocity, which locks force onto response.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EmpiricalParameters:
    """Empirical hydrodynamic coefficient set (high-Re rough cylinder)."""

    c_d: float = 1.0
    c_m: float = 2.0
    c_vy: float = 0.8   # cross-flow vortex force coefficient
    c_vx: float = 1.2   # in-line vortex force coefficient
    f0_y: float = 0.25  # nondimensional CF frequency at full synchronization
    f0_x: float = 0.5
    fy_range: tuple[float, float] = (0.125, 0.4)
    fx_range: tuple[float, float] = (0.25, 0.75)

    def __post_init__(self):
        for c in (self.c_d, self.c_m, self.c_vy, self.c_vx):
            if c <= 0:
                raise ValidationError("hydrodynamic coefficients must be positive")
        if not self.fy_range[0] <= self.f0_y <= self.fy_range[1]:
            raise ValidationError("f0_y outside fy_range")
        if not self.fx_range[0] <= self.f0_x <= self.fx_range[1]:
            raise ValidationError("f0_x outside fx_range")


@dataclass
class StripState:
    """Kinematic state of one strip (2-vectors in the strip plane).

    ``u_dot_n`` is the ambient flow acceleration entering the Froude-Krylov
    term; it defaults to zero for steady current.
    """

    u_n: np.ndarray                 # incoming flow velocity, m/s
    r_dot_n: np.ndarray             # strip velocity
    r_ddot_n: np.ndarray            # strip acceleration
    phi_exc_x: float
    phi_exc_y: float
    d: float                        # local diameter, m
    u_dot_n: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @property
    def v_n(self) -> np.ndarray:
        return np.asarray(self.u_n, dtype=float) - np.asarray(self.r_dot_n, dtype=float)


def hydro_force(strip: StripState, params: EmpiricalParameters, rho: float) -> np.ndarray:
    """Hydrodynamic force per unit length: inertia + drag + vortex shedding.

    The cross-flow vortex force acts along v_n rotated +90 deg in the strip
    plane; the in-line one acts along v_n itself.
    """
    d = strip.d
    if d <= 0:
        raise ValidationError("strip diameter must be positive")
    area = math.pi * d * d / 4.0
    v = strip.v_n
    vmag = math.sqrt(v[0] * v[0] + v[1] * v[1])
    coef = 0.5 * rho * d * vmag

    f_fk = params.c_m * rho * area * np.asarray(strip.u_dot_n, dtype=float)
    f_ma = -(params.c_m - 1.0) * rho * area * np.asarray(strip.r_ddot_n, dtype=float)
    f_drag = coef * params.c_d * v
    f_vx = coef * params.c_vx * math.cos(strip.phi_exc_x) * v
    v_rot = np.array([-v[1], v[0]])
    f_vy = coef * params.c_vy * math.cos(strip.phi_exc_y) * v_rot
    return f_fk + f_ma + f_drag + f_vx + f_vy


def synchronization_frequency(theta: float, f0: float,
                              f_range: tuple[float, float]) -> float:
    """Nondimensional shedding frequency for phase difference ``theta``.

    The modulation half-width is asymmetric so that theta = +-pi/2 lands
    exactly on the range bounds even when the full-synchronization point
    is off the midpoint of the range.
    """
    s = math.sin(theta)
    delta = (f_range[1] - f0) if s >= 0.0 else (f0 - f_range[0])
    f_hat = f0 + delta * s
    return min(max(f_hat, f_range[0]), f_range[1])


def advance_phase(strip: StripState, theta: float, dt: float,
                  params: EmpiricalParameters, axis: str = "cf") -> float:
    """One explicit step of the vortex-force phase for the given axis.

    Returns the updated phase; rate is 2*pi*(|v_n|/d)*f_hat(theta), so the
    phase freezes when the relative velocity vanishes.
    """
    if dt <= 0:
        raise ValidationError("dt must be positive")
    v = strip.v_n
    vmag = math.sqrt(v[0] * v[0] + v[1] * v[1])
    if axis == "cf":
        f_hat = synchronization_frequency(theta, params.f0_y, params.fy_range)
        phi = strip.phi_exc_y
    elif axis == "il":
        f_hat = synchronization_frequency(theta, params.f0_x, params.fx_range)
        phi = strip.phi_exc_x
    else:
        raise ValidationError(f"unknown axis {axis!r}")
    return phi + TWO_PI * vmag / strip.d * f_hat * dt


def instantaneous_velocity_phase(ydot_rel: float, yddot_rel: float,
                                 omega_hat: float, fallback: float = 0.0) -> float:
    """Phase of an oscillating velocity treated as locally sinusoidal.

    Exact for ydot = V cos(omega_hat * t). When both arguments vanish the
    phase is undefined and the caller-supplied fallback (normally the
    previous estimate) is returned.
    """
    if omega_hat <= 0:
        raise ValidationError("omega_hat must be positive")
    if ydot_rel == 0.0 and yddot_rel == 0.0:
        return fallback
    return math.atan2(-yddot_rel / omega_hat, ydot_rel)
