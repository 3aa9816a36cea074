"""Simulation result container shared by the rigid and riser solvers."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SimResult:
    """Outputs of one time-domain run.

    ``max_disp_std_cf`` / ``max_disp_std_il`` are the largest displacement
    standard deviations along the span, normal to and along the reporting
    frame's main axis. ``dominant_freq`` is the peak of the response
    spectrum over both axes; ``dominant_freq_main`` restricts to the main
    axis (what measured dominating frequencies are compared against).
    ``a_over_d`` is sqrt(2) * CF displacement RMS / local diameter at the
    reporting (largest-response) station.
    """

    max_disp_std_cf: float
    max_disp_std_il: float
    dominant_freq: float
    dominant_freq_main: float
    a_over_d: float
    f_hat: float | None = None          # rigid cylinder: f_osc * d / u
    frame_angle: float = 0.0            # reporting frame (rad, ccw from X)
    stats_window: tuple[float, float] = (0.0, 0.0)  # seconds
    node_z: np.ndarray | None = None
    disp_std: np.ndarray | None = None  # (n_nodes, 2) in the reporting frame
    record_dt: float | None = None
    histories: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "max_disp_std_cf": self.max_disp_std_cf,
            "max_disp_std_il": self.max_disp_std_il,
            "dominant_freq": self.dominant_freq,
            "dominant_freq_main": self.dominant_freq_main,
            "a_over_d": self.a_over_d,
            "f_hat": self.f_hat,
            "frame_angle": self.frame_angle,
            "stats_window": list(self.stats_window),
            "meta": self.meta,
        }
