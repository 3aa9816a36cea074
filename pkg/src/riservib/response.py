"""Riser response analysis: spectra, kurtosis, modal displacement
reconstruction from the accelerometer array, and the rule-based spectral
classification used as the external evaluation oracle."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.signal

from .core import MeasurementEvent, TimeSeries
from .errors import (DegenerateSignalError, UnobservableModesError,
                     ValidationError)

#: default thresholds of the spectral classifier
PEAK_PSD_HIGH = 0.06   # m^2/s^3
PEAK_PSD_LOW = 0.02    # m^2/s^3
FREQ_DISTANCE = 0.04   # Hz
WAVE_FREQ_BAND = (0.08, 0.2)  # Hz

#: double-integration low-frequency cutoff (suppresses 1/f^2 drift blow-up)
F_MIN_INTEGRATION = 0.01  # Hz


@dataclass(frozen=True, eq=False)
class Spectrum:
    freqs: np.ndarray  # Hz, uniform from 0
    psd: np.ndarray    # (signal unit)^2 / Hz

    def peak(self) -> tuple[float, float]:
        """(frequency, value) of the PSD maximum (DC excluded)."""
        i = int(np.argmax(self.psd[1:])) + 1
        return float(self.freqs[i]), float(self.psd[i])

    def integrate(self) -> float:
        return float(np.trapezoid(self.psd, self.freqs))


def welch_psd(ts: TimeSeries, seg_len: int = 2048, overlap: float = 0.5) -> Spectrum:
    """Hann-windowed, overlap-averaged one-sided periodogram."""
    if seg_len < 64:
        raise ValidationError("segment length must be >= 64 samples")
    if ts.n < seg_len:
        raise ValidationError(f"signal shorter ({ts.n}) than segment ({seg_len})")
    if not 0.0 <= overlap < 1.0:
        raise ValidationError("overlap fraction must be in [0, 1)")
    f, p = scipy.signal.welch(ts.values, fs=ts.fs, window="hann",
                              nperseg=seg_len, noverlap=int(overlap * seg_len),
                              detrend="constant")
    return Spectrum(f, p)


def kurtosis(ts: TimeSeries | np.ndarray) -> float:
    """Fourth central moment over squared variance (population moments).

    1.5 for a sinusoid sampled over whole periods, 3.0 for Gaussian noise.
    """
    x = ts.values if isinstance(ts, TimeSeries) else np.asarray(ts, dtype=float)
    xc = x - x.mean()
    m2 = float(np.mean(xc * xc))
    if m2 <= 0.0:
        raise DegenerateSignalError("zero-variance signal has undefined kurtosis")
    m4 = float(np.mean(xc ** 4))
    return m4 / (m2 * m2)


# --------------------------------------------------------------------------
# Modal reconstruction
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ModalBasis:
    """Pinned-pinned tensioned-beam eigenfunctions on a z grid.

    Shapes are mass-orthonormal; rotations are carried along for Hermite
    evaluation between nodes.
    """

    z_grid: np.ndarray       # (n_nodes,)
    shapes: np.ndarray       # (n_modes, n_nodes) translational components
    rotations: np.ndarray    # (n_modes, n_nodes)
    frequencies: np.ndarray  # (n_modes,) Hz

    @property
    def n_modes(self) -> int:
        return self.shapes.shape[0]

    def evaluate(self, z) -> np.ndarray:
        """Shape matrix (len(z), n_modes) at arbitrary positions."""
        from .viv_sim.structure import hermite_eval

        z = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.empty((z.size, self.n_modes))
        for j in range(self.n_modes):
            out[:, j] = hermite_eval(self.z_grid, self.shapes[j],
                                     self.rotations[j], z)
        return out


def modal_basis_from_beam(model, n_modes: int = 8) -> ModalBasis:
    """Extract the lowest modes of a built beam model."""
    n_modes = min(n_modes, model.frequencies.size)
    return ModalBasis(
        z_grid=model.z_nodes.copy(),
        shapes=model.modes_w[:n_modes].copy(),
        rotations=model.modes_th[:n_modes].copy(),
        frequencies=model.frequencies[:n_modes].copy(),
    )


def double_integrate_fft(qdd: np.ndarray, dt: float,
                         f_min: float = F_MIN_INTEGRATION) -> np.ndarray:
    """Displacement from acceleration: q(f) = -qdd(f) / (2 pi f)^2, content
    below ``f_min`` zeroed."""
    n = qdd.shape[-1]
    spec = np.fft.rfft(qdd, axis=-1)
    f = np.fft.rfftfreq(n, dt)
    keep = f >= f_min
    scale = np.zeros_like(f)
    scale[keep] = -1.0 / (2.0 * np.pi * f[keep]) ** 2
    return np.fft.irfft(spec * scale, n=n, axis=-1)


def _lstsq_operator(phi: np.ndarray) -> np.ndarray:
    cond = np.linalg.cond(phi)
    if not np.isfinite(cond) or cond > 1e8:
        raise UnobservableModesError(
            f"sensor/mode geometry condition number {cond:.2e} > 1e8")
    return np.linalg.pinv(phi)


def modal_reconstruct(acc_records, basis: ModalBasis,
                      f_min: float = F_MIN_INTEGRATION):
    """Displacement field from sensor accelerations.

    ``acc_records``: list of (z, TimeSeries). Least squares fits modal
    acceleration weights at every time sample, then integrates each modal
    coordinate twice in the frequency domain.

    Returns (q (n_modes, n_samples) modal displacements, dt).
    """
    if len(acc_records) < basis.n_modes:
        raise ValidationError(
            f"need at least {basis.n_modes} sensors, got {len(acc_records)}")
    zs = np.array([z for z, _ in acc_records])
    if np.unique(zs).size != zs.size:
        raise ValidationError("sensor positions must be distinct")
    dt = acc_records[0][1].dt
    n = acc_records[0][1].n
    for _, ts in acc_records:
        if ts.dt != dt or ts.n != n:
            raise ValidationError("sensor series must share the sampling grid")

    phi = basis.evaluate(zs)                      # (n_sensors, n_modes)
    pinv = _lstsq_operator(phi)
    acc = np.vstack([ts.values for _, ts in acc_records])  # (n_sensors, n)
    qdd = pinv @ acc                              # (n_modes, n)
    q = double_integrate_fft(qdd, dt, f_min)
    return q, dt


def reconstruct_field(q: np.ndarray, basis: ModalBasis, z) -> np.ndarray:
    """w(z, t) = sum_j phi_j(z) q_j(t) -> (len(z), n_samples)."""
    return basis.evaluate(z) @ q


def vessel_top_motion(event: MeasurementEvent, basis: ModalBasis,
                      f_min: float = F_MIN_INTEGRATION
                      ) -> tuple[TimeSeries, TimeSeries]:
    """Top displacement estimated from the riser accelerometer array.

    The reconstruction basis is augmented with a linear-in-z boundary mode
    whose coefficient is the top-end motion; modal shapes vanish at the top
    so the boundary coefficient is the top displacement itself.
    """
    records = [(z, ax, ay) for _, (z, ax, ay)
               in sorted(event.riser_acc.items())]
    if len(records) < basis.n_modes + 1:
        raise ValidationError(
            f"need at least {basis.n_modes + 1} sensors for the augmented basis")
    zs = np.array([z for z, _, _ in records])
    dt = records[0][1].dt
    length = float(basis.z_grid[-1])

    phi = basis.evaluate(zs)
    phi_aug = np.hstack([phi, (zs / length)[:, None]])
    pinv = _lstsq_operator(phi_aug)

    out = []
    for comp in (1, 2):
        acc = np.vstack([rec[comp].values for rec in records])
        qdd = pinv @ acc
        top_dd = qdd[-1:]                        # boundary-mode acceleration
        top = double_integrate_fft(top_dd, dt, f_min)[0]
        out.append(TimeSeries(records[0][comp].t0, dt, top))
    return out[0], out[1]


# --------------------------------------------------------------------------
# Response statistics and classification
# --------------------------------------------------------------------------

class ResponseLabel(enum.Enum):
    VIV_DOMINATED = "viv_dominated"
    WAVE_DOMINATED = "wave_dominated"
    SMALL_RESPONSE = "small_response"
    COMBINED = "combined"


@dataclass(frozen=True)
class ClassifierThresholds:
    peak_psd_high: float = PEAK_PSD_HIGH
    peak_psd_low: float = PEAK_PSD_LOW
    freq_distance: float = FREQ_DISTANCE
    wave_band: tuple[float, float] = WAVE_FREQ_BAND


@dataclass(frozen=True, eq=False)
class ResponseStats:
    event_id: str
    freq_dom: float                       # Hz, main-direction displacement
    ydisp_max: float                      # m, max RMS normal to main direction
    acc_rms: dict                         # sensor id -> (rms_x, rms_y), rotated frame
    kurtosis: dict                        # sensor id -> (kurt_x, kurt_y)
    peak_psd: dict                        # reference sensor id -> m^2/s^3 (CF axis)
    peak_freq: dict                       # reference sensor id -> Hz
    reference_sensors: tuple[str, str]


def classify_event(stats: ResponseStats, f_strouhal: float,
                   thresholds: ClassifierThresholds | None = None) -> ResponseLabel:
    """Rule-based classification from the reference-sensor CF spectra.

    Rules, in order: a high narrow peak near the shedding-frequency estimate
    means VIV; two low peaks mean a small response; a high/intermediate peak
    in the wave band far from the shedding frequency means wave dominance;
    anything else is a combined case.
    """
    th = thresholds or ClassifierThresholds()
    ref = stats.reference_sensors
    for sid in ref:
        if sid not in stats.peak_psd:
            raise ValidationError(f"missing reference sensor {sid!r}")
    peaks = [(stats.peak_psd[sid], stats.peak_freq[sid]) for sid in ref]
    p_max, f_p = max(peaks, key=lambda t: t[0])

    if p_max > th.peak_psd_high and abs(f_p - f_strouhal) < th.freq_distance:
        return ResponseLabel.VIV_DOMINATED
    if all(p < th.peak_psd_low for p, _ in peaks):
        return ResponseLabel.SMALL_RESPONSE
    if th.wave_band[0] <= f_p <= th.wave_band[1] and \
            abs(f_p - f_strouhal) > th.freq_distance:
        return ResponseLabel.WAVE_DOMINATED
    return ResponseLabel.COMBINED


class EmpiricalCdf:
    """Right-continuous empirical distribution with quantile lookup."""

    def __init__(self, values):
        v = np.sort(np.asarray(values, dtype=float))
        if v.size == 0:
            raise ValidationError("empty sample")
        self._v = v

    def __call__(self, x: float) -> float:
        return float(np.searchsorted(self._v, x, side="right")) / self._v.size

    def quantile(self, q: float) -> float:
        """Smallest sample value whose CDF reaches q."""
        if not 0.0 < q <= 1.0:
            raise ValidationError("quantile level must be in (0, 1]")
        idx = int(math.ceil(q * self._v.size)) - 1
        return float(self._v[idx])


def empirical_cdf(values) -> EmpiricalCdf:
    return EmpiricalCdf(values)


def _series_rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x)))


def response_stats(event: MeasurementEvent, basis: ModalBasis, frame,
                   reference_sensors: tuple[str, str] | None = None,
                   seg_len: int = 2048, f_min: float = F_MIN_INTEGRATION
                   ) -> ResponseStats:
    """Per-event response statistics in the main-direction frame.

    freq_dom: peak of the summed modal-displacement PSDs (spatially
    integrated energy for a mass-orthonormal basis) of the main-direction
    response. ydisp_max: largest cross-direction displacement RMS along z.
    """
    records = sorted(event.riser_acc.items())
    sensor_ids = [sid for sid, _ in records]
    if reference_sensors is None:
        mid = len(sensor_ids) // 2
        reference_sensors = (sensor_ids[max(mid - 1, 0)],
                             sensor_ids[min(mid, len(sensor_ids) - 1)])

    # rotate sensor accelerations into the main-direction frame
    rot_records = {}
    for sid, (z, ax, ay) in records:
        a_xc, a_yc = frame.rotate(ax.values, ay.values)
        rot_records[sid] = (z, TimeSeries(ax.t0, ax.dt, a_xc),
                            TimeSeries(ay.t0, ay.dt, a_yc))

    main_recs = [(z, ts_x) for z, ts_x, _ in rot_records.values()]
    cf_recs = [(z, ts_y) for z, _, ts_y in rot_records.values()]
    q_main, dt = modal_reconstruct(main_recs, basis, f_min)
    q_cf, _ = modal_reconstruct(cf_recs, basis, f_min)

    # dominating frequency of the spatially integrated main-direction response
    nper = min(seg_len, q_main.shape[1])
    psd_sum = None
    freqs = None
    for j in range(q_main.shape[0]):
        f, p = scipy.signal.welch(q_main[j], fs=1.0 / dt, window="hann",
                                  nperseg=nper, detrend="constant")
        psd_sum = p if psd_sum is None else psd_sum + p
        freqs = f
    mask = freqs >= f_min
    sub = np.where(mask)[0]
    freq_dom = float(freqs[sub[np.argmax(psd_sum[sub])]]) \
        if np.any(psd_sum[sub] > 0) else 0.0

    # cross-direction displacement RMS along the span
    w_cf = reconstruct_field(q_cf, basis, basis.z_grid)
    ydisp_max = float(np.max(np.sqrt(np.mean(w_cf * w_cf, axis=1))))

    acc_rms = {}
    kurt = {}
    for sid, (z, ts_x, ts_y) in rot_records.items():
        acc_rms[sid] = (_series_rms(ts_x.values - ts_x.values.mean()),
                        _series_rms(ts_y.values - ts_y.values.mean()))
        try:
            kx = kurtosis(ts_x)
            ky = kurtosis(ts_y)
        except DegenerateSignalError:
            kx = ky = float("nan")
        kurt[sid] = (kx, ky)

    peak_psd = {}
    peak_freq = {}
    for sid in reference_sensors:
        _, _, ts_y = rot_records[sid]
        spec = welch_psd(ts_y, seg_len=min(seg_len, ts_y.n), overlap=0.5)
        f_pk, p_pk = spec.peak()
        peak_psd[sid] = p_pk
        peak_freq[sid] = f_pk

    return ResponseStats(
        event_id=event.id,
        freq_dom=freq_dom,
        ydisp_max=ydisp_max,
        acc_rms=acc_rms,
        kurtosis=kurt,
        peak_psd=peak_psd,
        peak_freq=peak_freq,
        reference_sensors=tuple(reference_sensors),
    )
