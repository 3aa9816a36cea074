"""Environmental-load feature extraction.

Seven parameters per measurement event: maximum current speed, shear and
spread coefficients of the profile in the main-current frame, and RMS
vessel velocity/acceleration in and normal to that frame. Together they
form the standardized feature matrix consumed by the clustering stage.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import CurrentProfile, MeasurementEvent, TimeSeries, validate_event
from .errors import DegenerateCurrentError, ValidationError

log = logging.getLogger(__name__)

FEATURE_COLUMNS = ("umax", "shcoeff", "sprcoeff",
                   "top_velo_x", "top_velo_y", "top_acc_x", "top_acc_y")

#: default frequency bands (Hz) for the vessel statistics
WAVE_BAND = (0.05, 0.30)
LOW_FREQ_BAND = (0.005, 0.05)


@dataclass(frozen=True)
class MainDirectionFrame:
    """Counter-clockwise rotation from the instrument X axis to the main
    current axis."""

    angle: float

    def __post_init__(self):
        if not -math.pi < self.angle <= math.pi + 1e-12:
            raise ValidationError("angle must lie in (-pi, pi]")

    def rotate(self, x, y):
        """Components of (x, y) in the main-direction frame."""
        c, s = math.cos(self.angle), math.sin(self.angle)
        return c * x + s * y, -s * x + c * y


@dataclass(frozen=True)
class FeatureVector:
    umax: float
    shcoeff: float
    sprcoeff: float
    top_velo_x: float
    top_velo_y: float
    top_acc_x: float
    top_acc_y: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, c) for c in FEATURE_COLUMNS])


def _pooled_uv(profile: CurrentProfile):
    mask = profile.valid_mask()
    if not mask.any():
        raise DegenerateCurrentError("current profile has no valid samples")
    return profile.u_east[mask], profile.u_north[mask]


def main_current_direction(profile: CurrentProfile) -> MainDirectionFrame:
    """Principal axis of the pooled horizontal velocity samples.

    The direction is the leading eigenvector of the 2x2 second-moment
    matrix (insensitive to the sign of the velocity); its sign is fixed so
    the mean velocity projects non-negatively onto the axis.
    """
    ue, un = _pooled_uv(profile)
    sxx = float(np.mean(ue * ue))
    syy = float(np.mean(un * un))
    sxy = float(np.mean(ue * un))
    if sxx + syy <= 0.0:
        raise DegenerateCurrentError("all-zero current: direction undefined")
    # closed-form leading eigenvector of [[sxx, sxy], [sxy, syy]]
    half_tr = 0.5 * (sxx + syy)
    half_diff = 0.5 * (sxx - syy)
    disc = math.hypot(half_diff, sxy)
    lam1 = half_tr + disc
    if abs(sxy) > 1e-300:
        vx, vy = lam1 - syy, sxy
    elif sxx >= syy:
        vx, vy = 1.0, 0.0
    else:
        vx, vy = 0.0, 1.0
    angle = math.atan2(vy, vx)
    # sign: mean projection along the axis must be >= 0
    if float(np.mean(ue)) * math.cos(angle) + float(np.mean(un)) * math.sin(angle) < 0.0:
        angle += math.pi
    if angle > math.pi:
        angle -= 2.0 * math.pi
    elif angle <= -math.pi:
        angle += 2.0 * math.pi
    return MainDirectionFrame(angle)


def rotate_profile(profile: CurrentProfile, frame: MainDirectionFrame
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Velocity components (u_xc, u_yc) in the main-direction frame;
    per-sample speed magnitude is preserved."""
    return frame.rotate(profile.u_east, profile.u_north)


def spread_coefficient(u_xc: np.ndarray, u_yc: np.ndarray) -> float:
    """RMS ratio of off-axis to along-axis current over all valid samples."""
    mask = np.isfinite(u_xc) & np.isfinite(u_yc)
    sum_x = float(np.sum(u_xc[mask] ** 2))
    sum_y = float(np.sum(u_yc[mask] ** 2))
    if sum_x <= 0.0:
        raise DegenerateCurrentError("zero along-axis energy")
    return math.sqrt(sum_y / sum_x)


def shear_coefficient(u_xc: np.ndarray) -> float:
    """Std of the absolute along-axis speed over its mean (population
    normalization, all valid samples pooled)."""
    u = np.abs(u_xc[np.isfinite(u_xc)])
    mean = float(np.mean(u)) if u.size else 0.0
    if mean <= 0.0:
        raise DegenerateCurrentError("zero mean along-axis speed")
    return float(np.std(u)) / mean


def umax(profile: CurrentProfile) -> float:
    """Maximum speed over all valid (time, depth) samples."""
    mask = profile.valid_mask()
    if not mask.any():
        return 0.0
    return float(np.max(profile.speed()[mask]))


def strouhal_frequency(u: float, d: float, st: float) -> float:
    """Vortex shedding frequency estimate St * U / D."""
    if d <= 0:
        raise ValidationError("diameter must be positive")
    return st * u / d


def band_mask_filter(values: np.ndarray, dt: float, band: tuple[float, float],
                     taper: float = 0.1, differentiate: bool = False) -> np.ndarray:
    """Zero-phase band-pass by FFT masking.

    The mask is 1 inside ``band`` and rolls off with cosine ramps of width
    ``taper`` times the respective band edge. ``differentiate`` applies the
    spectral derivative (i 2 pi f) before inverting.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    spec = np.fft.rfft(x)
    f = np.fft.rfftfreq(n, dt)
    lo, hi = band
    w_lo, w_hi = taper * lo, taper * hi
    mask = np.zeros_like(f)
    mask[(f >= lo) & (f <= hi)] = 1.0
    ramp_lo = (f >= lo - w_lo) & (f < lo)
    mask[ramp_lo] = 0.5 * (1.0 - np.cos(np.pi * (f[ramp_lo] - (lo - w_lo)) / w_lo))
    ramp_hi = (f > hi) & (f <= hi + w_hi)
    mask[ramp_hi] = 0.5 * (1.0 + np.cos(np.pi * (f[ramp_hi] - hi) / w_hi))
    if differentiate:
        spec = spec * (2j * np.pi * f)
    return np.fft.irfft(spec * mask, n=n)


def vessel_rms_stats(vessel_acc_x: TimeSeries, vessel_acc_y: TimeSeries,
                     top_motion: tuple[TimeSeries, TimeSeries],
                     frame: MainDirectionFrame,
                     wave_band: tuple[float, float] = WAVE_BAND,
                     low_freq_band: tuple[float, float] = LOW_FREQ_BAND,
                     ) -> tuple[float, float, float, float]:
    """(top_velo_x, top_velo_y, top_acc_x, top_acc_y) in the main frame.

    Accelerations are band-passed to the wave band; velocities come from the
    spectral derivative of the reconstructed top displacement restricted to
    the low-frequency band.
    """
    if vessel_acc_x.duration < 500.0 or top_motion[0].duration < 500.0:
        raise ValidationError("need at least 500 s of record for vessel stats")
    if vessel_acc_x.dt != vessel_acc_y.dt:
        raise ValidationError("vessel acceleration axes must share sampling")

    acc_xc, acc_yc = frame.rotate(vessel_acc_x.values, vessel_acc_y.values)
    acc_x_f = band_mask_filter(acc_xc, vessel_acc_x.dt, wave_band)
    acc_y_f = band_mask_filter(acc_yc, vessel_acc_y.dt, wave_band)

    disp_xc, disp_yc = frame.rotate(top_motion[0].values, top_motion[1].values)
    vel_x = band_mask_filter(disp_xc, top_motion[0].dt, low_freq_band,
                             differentiate=True)
    vel_y = band_mask_filter(disp_yc, top_motion[1].dt, low_freq_band,
                             differentiate=True)

    rms = lambda a: float(np.sqrt(np.mean(a * a)))
    return rms(vel_x), rms(vel_y), rms(acc_x_f), rms(acc_y_f)


def extract_features(event: MeasurementEvent,
                     top_motion: tuple[TimeSeries, TimeSeries],
                     frame: MainDirectionFrame | None = None,
                     wave_band=WAVE_BAND, low_freq_band=LOW_FREQ_BAND
                     ) -> FeatureVector:
    """Assemble the 7-parameter feature vector for one event."""
    frame = frame or main_current_direction(event.current)
    u_xc, u_yc = rotate_profile(event.current, frame)
    tv_x, tv_y, ta_x, ta_y = vessel_rms_stats(
        event.vessel_acc_x, event.vessel_acc_y, top_motion, frame,
        wave_band, low_freq_band)
    return FeatureVector(
        umax=umax(event.current),
        shcoeff=shear_coefficient(u_xc),
        sprcoeff=spread_coefficient(u_xc, u_yc),
        top_velo_x=tv_x, top_velo_y=tv_y, top_acc_x=ta_x, top_acc_y=ta_y,
    )


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    event_ids: tuple[str, ...]
    raw: np.ndarray            # (n_events, 7)
    standardized: np.ndarray   # z-scored columns; constant columns left at 0
    means: np.ndarray
    stds: np.ndarray           # 0 marks a constant column

    @property
    def columns(self) -> tuple[str, ...]:
        return FEATURE_COLUMNS

    def inverse(self, z: np.ndarray) -> np.ndarray:
        return z * self.stds + self.means


def standardize(raw: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    means = raw.mean(axis=0)
    stds = raw.std(axis=0)
    z = np.zeros_like(raw)
    const = stds < 1e-12
    stds = np.where(const, 0.0, stds)
    safe = np.where(const, 1.0, stds)
    z = (raw - means) / safe
    z[:, const] = 0.0
    return z, means, stds


def build_feature_matrix(events, top_motions, riser=None) -> FeatureMatrix:
    """Feature matrix over a corpus, one row per event in input order.

    Events failing validation are excluded (logged); it is an error if
    fewer than two remain. Constant columns are left at zero with a warning.
    """
    rows = []
    ids = []
    for event, top in zip(events, top_motions):
        report = validate_event(event, riser=riser)
        if not report.usable:
            log.warning("excluding event %s: %s", event.id,
                        "; ".join(v.message for v in report.violations if v.hard))
            continue
        rows.append(extract_features(event, top).as_array())
        ids.append(event.id)
    if len(rows) < 2:
        raise ValidationError("need at least two usable events")
    raw = np.vstack(rows)
    z, means, stds = standardize(raw)
    for j, col in enumerate(FEATURE_COLUMNS):
        if stds[j] == 0.0:
            log.warning("feature column %r is constant; standardized to 0", col)
    return FeatureMatrix(tuple(ids), raw, z, means, stds)


def feature_matrix_to_csv(fm: FeatureMatrix, path: str, sidecar_path: str) -> None:
    """Standardized matrix as CSV plus a JSON sidecar with the constants."""
    from .core import write_json_atomic

    lines = ["event_id," + ",".join(FEATURE_COLUMNS)]
    for i, eid in enumerate(fm.event_ids):
        lines.append(eid + "," + ",".join(repr(v) for v in fm.standardized[i]))
    import os
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)
    write_json_atomic(sidecar_path, {
        "columns": list(FEATURE_COLUMNS),
        "means": fm.means.tolist(),
        "stds": fm.stds.tolist(),
    })


def feature_matrix_from_csv(path: str, sidecar_path: str) -> FeatureMatrix:
    import json

    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        assert header[0] == "event_id" and tuple(header[1:]) == FEATURE_COLUMNS, \
            "unexpected feature CSV header"
        ids = []
        rows = []
        for line in fh:
            parts = line.strip().split(",")
            if not parts or parts == [""]:
                continue
            ids.append(parts[0])
            rows.append([float(x) for x in parts[1:]])
    with open(sidecar_path, "r", encoding="utf-8") as fh:
        sc = json.load(fh)
    z = np.array(rows)
    means = np.asarray(sc["means"])
    stds = np.asarray(sc["stds"])
    raw = z * stds + means
    return FeatureMatrix(tuple(ids), raw, z, means, stds)
