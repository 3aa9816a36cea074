"""Domain data types, validation and bundled riser fixture data.

All container types are immutable after construction (numpy arrays are set
read-only) so they can be shared freely across threads and processes.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

GRAVITY = 9.81          # m/s^2
WATER_DENSITY = 1025.0  # kg/m^3, default sea water

#: Nominal event length (s); the campaign records are 34 minutes.
EVENT_DURATION = 2040.0


def _ro(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled signal. Units are carried by context."""

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _ro(self.values))
        if self.dt <= 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.values.ndim != 1 or self.values.size == 0:
            raise ValidationError("values must be a non-empty 1-D sequence")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def duration(self) -> float:
        return self.n * self.dt

    @property
    def fs(self) -> float:
        return 1.0 / self.dt

    def time(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())


@dataclass(frozen=True, eq=False)
class CurrentProfile:
    """Horizontal current sampled on a (time, depth) grid.

    Missing bins (e.g. the excluded top of the water column) are NaN and are
    skipped by all pooled statistics downstream.
    """

    depths: np.ndarray   # m below surface, strictly increasing
    times: np.ndarray    # s
    u_east: np.ndarray   # m/s, shape (n_times, n_depths)
    u_north: np.ndarray  # m/s, shape (n_times, n_depths)

    def __post_init__(self):
        for name in ("depths", "times", "u_east", "u_north"):
            object.__setattr__(self, name, _ro(getattr(self, name)))
        nt, nd = self.times.size, self.depths.size
        if self.u_east.shape != (nt, nd) or self.u_north.shape != (nt, nd):
            raise ValidationError(
                f"velocity matrices must be (n_times, n_depths) = ({nt}, {nd}), "
                f"got {self.u_east.shape} / {self.u_north.shape}"
            )
        if nd == 0 or nt == 0:
            raise ValidationError("profile grid is empty")
        if nd > 1 and not np.all(np.diff(self.depths) > 0):
            raise ValidationError("depths must be strictly increasing")

    def valid_mask(self) -> np.ndarray:
        return np.isfinite(self.u_east) & np.isfinite(self.u_north)

    def speed(self) -> np.ndarray:
        return np.hypot(self.u_east, self.u_north)


@dataclass(frozen=True, eq=False)
class MeasurementEvent:
    """One field measurement record (~34 min)."""

    id: str
    timestamp: str  # ISO-8601 UTC
    current: CurrentProfile
    vessel_acc_x: TimeSeries  # m/s^2, instrument X axis
    vessel_acc_y: TimeSeries
    # sensor id -> (z position from riser bottom [m], acc X, acc Y)
    riser_acc: dict[str, tuple[float, TimeSeries, TimeSeries]]
    duration: float
    metadata: dict = field(default_factory=dict)

    def sensor_ids(self) -> list[str]:
        return sorted(self.riser_acc)


@dataclass(frozen=True)
class RiserSegment:
    z_start: float           # m from bottom end
    z_end: float
    outer_diameter: float    # m
    mass_per_length: float   # kg/m, structure + contents (no added mass)
    axial_stiffness: float   # N
    bending_stiffness: float # N m^2


@dataclass(frozen=True, eq=False)
class RiserProperties:
    length: float
    segments: tuple[RiserSegment, ...]
    top_tension: float   # N
    mud_density: float   # kg/m^3
    water_depth: float   # m, submerged span measured from the bottom end

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValidationError("riser needs at least one segment")
        z = 0.0
        for seg in self.segments:
            if not math.isclose(seg.z_start, z, abs_tol=1e-9):
                raise ValidationError("segments must be contiguous from z=0")
            if seg.z_end <= seg.z_start:
                raise ValidationError("segment has non-positive length")
            if seg.bending_stiffness <= 0 or seg.axial_stiffness <= 0:
                raise ValidationError("stiffnesses must be positive")
            z = seg.z_end
        if not math.isclose(z, self.length, rel_tol=1e-9):
            raise ValidationError("segments must cover [0, length]")
        if self.top_tension <= 0:
            raise ValidationError("top tension must be positive")

    def segment_at(self, z: float) -> RiserSegment:
        for seg in self.segments:
            if z <= seg.z_end or seg is self.segments[-1]:
                return seg
        return self.segments[-1]

    def diameter_at(self, z: float) -> float:
        return self.segment_at(z).outer_diameter


@dataclass(frozen=True)
class EnvironmentProperties:
    rho: float = WATER_DENSITY
    strouhal_number: float = 0.28

    def __post_init__(self):
        if self.rho <= 0:
            raise ValidationError("fluid density must be positive")
        if not 0.1 <= self.strouhal_number <= 0.5:
            raise ValidationError("Strouhal number outside plausible range [0.1, 0.5]")


@dataclass(frozen=True, eq=False)
class EigenfrequencyTable:
    """Per-mode frequency bands (Hz), 1-based mode index."""

    bands: dict[int, tuple[float, float]]

    def __post_init__(self):
        prev_hi = 0.0
        for mode in sorted(self.bands):
            lo, hi = self.bands[mode]
            if not lo < hi:
                raise ValidationError(f"mode {mode}: need f_low < f_high")
            if lo < prev_hi:
                raise ValidationError("bands must be monotone in mode index")
            prev_hi = lo
        object.__setattr__(self, "bands", dict(self.bands))

    def __getitem__(self, mode: int) -> tuple[float, float]:
        return self.bands[mode]


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    hard: bool = True


@dataclass(frozen=True)
class ValidationReport:
    event_id: str
    violations: tuple[Violation, ...]

    @property
    def usable(self) -> bool:
        return not any(v.hard for v in self.violations)

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "usable": self.usable,
            "violations": [
                {"code": v.code, "message": v.message, "hard": v.hard}
                for v in self.violations
            ],
        }


def validate_event(event: MeasurementEvent, riser: RiserProperties | None = None,
                   nominal_duration: float = EVENT_DURATION) -> ValidationReport:
    """Check every structural invariant of an event; report instead of raise.

    Pure function: same event -> same report. Duration drift beyond +-10% of
    the nominal record length is reported as a soft violation (the event is
    still usable); non-finite samples and geometry errors are hard.
    """
    v: list[Violation] = []

    if abs(event.duration - nominal_duration) > 0.1 * nominal_duration:
        v.append(Violation("duration", f"duration {event.duration:.0f} s outside "
                           f"{nominal_duration:.0f} s +-10%", hard=False))

    for name, ts in (("vessel_acc_x", event.vessel_acc_x),
                     ("vessel_acc_y", event.vessel_acc_y)):
        if not ts.is_finite():
            v.append(Violation("non-finite", f"non-finite sample in {name}"))

    if not event.riser_acc:
        v.append(Violation("no-sensors", "event has no riser sensors"))
    for sid, (z, ax, ay) in sorted(event.riser_acc.items()):
        if not ax.is_finite() or not ay.is_finite():
            v.append(Violation("non-finite", f"non-finite sample in riser_acc[{sid}]"))
        if z < 0:
            v.append(Violation("sensor-position", f"sensor {sid} at z={z} < 0"))
        elif riser is not None and z > riser.length:
            v.append(Violation("sensor-position",
                               f"sensor {sid} outside riser span (z={z:.1f} m, "
                               f"length={riser.length:.1f} m)"))

    cur = event.current
    if not cur.valid_mask().any():
        v.append(Violation("empty-current", "current profile has no valid bins"))
    finite_speed = cur.speed()[cur.valid_mask()]
    if finite_speed.size and float(np.max(finite_speed)) > 5.0:
        v.append(Violation("implausible-current",
                           f"current speed {np.max(finite_speed):.2f} m/s > 5 m/s"))

    return ValidationReport(event.id, tuple(v))


# --------------------------------------------------------------------------
# Bundled fixture: the Helland-Hansen drilling riser
# --------------------------------------------------------------------------

def helland_hansen_fixture(top_tension: float = 3.5e6
                           ) -> tuple[RiserProperties, EigenfrequencyTable]:
    """Published properties of the Helland-Hansen drilling riser.

    Tension was not measured during the campaign (estimated 3000-4000 kN);
    the default is the midpoint 3500 kN and can be overridden per event.
    Buoyancy-section mass per length is not published: 1100 kg/m assumed
    (bare pipe incl. mud, 720.53 kg/m, plus ~380 kg/m of syntactic foam
    module), and the 503 m of buoyancy is placed as 34 m at the lower end,
    100 m at the upper end and a 369 m mid-span block.
    """
    length = 682.75
    od_bare = 0.5334
    od_buoy = 1.13
    m_bare = 720.53
    m_buoy = 1100.0   # assumption, see docstring
    ea = 5.42e9
    ei = 1.82e8

    lower_buoy = 34.0
    upper_buoy = 100.0
    mid_buoy = 503.0 - lower_buoy - upper_buoy
    bare_gap = (length - 503.0) / 2.0

    def seg(z0, z1, od, m):
        return RiserSegment(z0, z1, od, m, ea, ei)

    z1 = lower_buoy
    z2 = z1 + bare_gap
    z3 = z2 + mid_buoy
    z4 = z3 + bare_gap
    segments = (
        seg(0.0, z1, od_buoy, m_buoy),
        seg(z1, z2, od_bare, m_bare),
        seg(z2, z3, od_buoy, m_buoy),
        seg(z3, z4, od_bare, m_bare),
        seg(z4, length, od_buoy, m_buoy),
    )
    props = RiserProperties(
        length=length,
        segments=segments,
        top_tension=top_tension,
        mud_density=1420.0,
        water_depth=670.46,
    )
    eigen = EigenfrequencyTable({
        1: (0.022, 0.031),
        2: (0.047, 0.056),
        3: (0.071, 0.079),
        4: (0.1, 0.11),
        5: (0.12, 0.13),
    })
    return props, eigen


# --------------------------------------------------------------------------
# Event JSON round-trip
# --------------------------------------------------------------------------

def _ts_to_dict(ts: TimeSeries) -> dict:
    return {"t0": ts.t0, "dt": ts.dt, "values": ts.values.tolist()}


def _ts_from_dict(d: dict) -> TimeSeries:
    return TimeSeries(d["t0"], d["dt"], np.asarray(d["values"], dtype=float))


def _matrix_to_lists(m: np.ndarray) -> list:
    # NaN is not valid JSON; gaps serialize as null
    return [[None if not math.isfinite(x) else x for x in row] for row in m]


def _matrix_from_lists(rows) -> np.ndarray:
    return np.array([[np.nan if x is None else float(x) for x in row] for row in rows])


def event_to_dict(event: MeasurementEvent) -> dict:
    return {
        "id": event.id,
        "timestamp": event.timestamp,
        "duration": event.duration,
        "current": {
            "depths": event.current.depths.tolist(),
            "times": event.current.times.tolist(),
            "u_east": _matrix_to_lists(event.current.u_east),
            "u_north": _matrix_to_lists(event.current.u_north),
        },
        "vessel_acc_x": _ts_to_dict(event.vessel_acc_x),
        "vessel_acc_y": _ts_to_dict(event.vessel_acc_y),
        "riser_acc": {
            sid: {"z": z, "acc_x": _ts_to_dict(ax), "acc_y": _ts_to_dict(ay)}
            for sid, (z, ax, ay) in sorted(event.riser_acc.items())
        },
        "metadata": event.metadata,
    }


def event_from_dict(d: dict) -> MeasurementEvent:
    cur = d["current"]
    return MeasurementEvent(
        id=d["id"],
        timestamp=d["timestamp"],
        current=CurrentProfile(
            depths=np.asarray(cur["depths"], dtype=float),
            times=np.asarray(cur["times"], dtype=float),
            u_east=_matrix_from_lists(cur["u_east"]),
            u_north=_matrix_from_lists(cur["u_north"]),
        ),
        vessel_acc_x=_ts_from_dict(d["vessel_acc_x"]),
        vessel_acc_y=_ts_from_dict(d["vessel_acc_y"]),
        riser_acc={
            sid: (rec["z"], _ts_from_dict(rec["acc_x"]), _ts_from_dict(rec["acc_y"]))
            for sid, rec in d["riser_acc"].items()
        },
        duration=d["duration"],
        metadata=d.get("metadata", {}),
    )


def save_event(event: MeasurementEvent, path: str) -> None:
    write_json_atomic(path, event_to_dict(event))


def load_event(path: str) -> MeasurementEvent:
    with open(path, "r", encoding="utf-8") as fh:
        return event_from_dict(json.load(fh))


def fixture_to_dict(props: RiserProperties, eigen: EigenfrequencyTable) -> dict:
    return {
        "riser": {
            "length": props.length,
            "top_tension": props.top_tension,
            "mud_density": props.mud_density,
            "water_depth": props.water_depth,
            "segments": [
                {
                    "z_start": s.z_start, "z_end": s.z_end,
                    "outer_diameter": s.outer_diameter,
                    "mass_per_length": s.mass_per_length,
                    "axial_stiffness": s.axial_stiffness,
                    "bending_stiffness": s.bending_stiffness,
                }
                for s in props.segments
            ],
        },
        "eigenfrequencies_hz": {str(k): list(v) for k, v in sorted(eigen.bands.items())},
    }


def write_json_atomic(path: str, payload: dict) -> None:
    """Serialize deterministically (sorted keys) and rename into place."""
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    os.replace(tmp, path)
