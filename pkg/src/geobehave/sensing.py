"""Per-individual sensor stream processing.

Raw accelerometer and GPS streams become three things: an activity
indicator (average activity counts per minute), a residence geohash
inferred from night-time fixes, and an eligibility decision based on
recording volume.

Activity counts per minute window: with sample magnitudes m_t (in g) and
window mean m_bar,

    counts = scale * mean(max(|m_t - m_bar| - deadband, 0))

Zero for a stationary device regardless of orientation, invariant to a
constant magnitude offset, and insensitive to the gravity component.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import geocode
from .errors import InvalidInput, NoActiveData, NoNightData, ParseError
from .geocode import GeohashId, GeoPoint

MAX_ACCEL_G = 16.0

ACCEL_HEADER = ["individual_id", "t_ms", "ax_g", "ay_g", "az_g"]
GPS_HEADER = ["individual_id", "t_ms", "lat", "lon", "accuracy_m"]


@dataclass(frozen=True)
class SensorSample:
    t: int  # epoch milliseconds
    ax: float
    ay: float
    az: float


@dataclass(frozen=True)
class GpsFix:
    t: int
    point: GeoPoint
    accuracy_m: float


@dataclass(frozen=True)
class RecordingSession:
    start: int
    end: int
    samples: list[SensorSample]


@dataclass(frozen=True)
class ActivityConfig:
    """Knobs for stream segmentation, counts and selection criteria."""

    epoch_s: int = 60
    deadband_g: float = 0.05
    scale: float = 1000.0  # counts per g of mean deviation
    gap_s: float = 60.0
    min_samples_per_min: int = 30
    night_start: str = "23:00"
    night_end: str = "07:00"
    min_hours: float = 20.0
    min_days: int = 3
    timezone_offset_min: int = 0


@dataclass
class IndividualRecord:
    """One participant's processed recording summary."""

    id: str
    sessions: list[RecordingSession] = field(default_factory=list)
    indicator: float | None = None  # counts/min, None without active minutes
    active_hours: float = 0.0
    active_days: int = 0
    residence: GeohashId | None = None


def _parse_clock(value: str) -> int:
    """'HH:MM' -> minutes since local midnight."""
    try:
        hh, mm = value.split(":")
        minutes = int(hh) * 60 + int(mm)
    except ValueError as exc:
        raise InvalidInput(f"bad clock time {value!r}") from exc
    if not (0 <= minutes < 24 * 60):
        raise InvalidInput(f"clock time out of range: {value!r}")
    return minutes


def _text_lines(source) -> io.TextIOBase:
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, str):
        return io.StringIO(source)
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def parse_streams(source, kind: str):
    """Parse an accelerometer or GPS CSV into per-individual streams.

    The files interleave individuals, so the result is a dict keyed by
    individual id; each stream is sorted by timestamp with duplicate
    timestamps collapsed (first row wins).

    kind: "accel" -> dict[str, list[SensorSample]]
          "gps"   -> dict[str, list[GpsFix]]
    """
    if kind not in ("accel", "gps"):
        raise InvalidInput(f"unknown stream kind {kind!r}")
    expected = ACCEL_HEADER if kind == "accel" else GPS_HEADER

    reader = csv.reader(_text_lines(source))
    rows: dict[str, list] = {}
    lineno = 0
    for row in reader:
        lineno += 1
        if lineno == 1:
            if row != expected:
                raise ParseError(1, f"expected header {','.join(expected)}")
            continue
        if not row:
            continue
        if len(row) != 5:
            raise ParseError(lineno, f"expected 5 fields, got {len(row)}")
        ident = row[0]
        try:
            t = int(row[1])
            v1, v2, v3 = float(row[2]), float(row[3]), float(row[4])
        except ValueError as exc:
            raise ParseError(lineno, f"non-numeric field: {exc}") from exc
        if kind == "accel":
            if max(abs(v1), abs(v2), abs(v3)) > MAX_ACCEL_G:
                raise ParseError(lineno, f"acceleration beyond {MAX_ACCEL_G} g")
            rows.setdefault(ident, []).append(SensorSample(t, v1, v2, v3))
        else:
            if not (-90.0 <= v1 <= 90.0) or not (-180.0 <= v2 <= 180.0):
                raise ParseError(lineno, f"coordinate out of range ({v1}, {v2})")
            if v3 < 0:
                raise ParseError(lineno, f"negative accuracy {v3}")
            rows.setdefault(ident, []).append(GpsFix(t, GeoPoint(v1, v2), v3))

    out = {}
    for ident, items in rows.items():
        items.sort(key=lambda s: s.t)
        dedup = []
        last_t = None
        for s in items:
            if s.t != last_t:
                dedup.append(s)
                last_t = s.t
        out[ident] = dedup
    return out


def segment_sessions(
    samples: list[SensorSample], cfg: ActivityConfig
) -> list[RecordingSession]:
    """Split a sorted stream into maximal runs with gaps <= gap_s.

    Runs shorter than one minute are dropped.
    """
    if not samples:
        return []
    gap_ms = cfg.gap_s * 1000.0
    runs: list[list[SensorSample]] = [[samples[0]]]
    for prev, cur in zip(samples, samples[1:]):
        if cur.t - prev.t <= gap_ms:
            runs[-1].append(cur)
        else:
            runs.append([cur])
    sessions = []
    for run in runs:
        if run[-1].t - run[0].t >= 60_000:
            sessions.append(RecordingSession(run[0].t, run[-1].t, run))
    return sessions


def activity_counts_per_minute(
    session: RecordingSession, cfg: ActivityConfig
) -> list[tuple[int, float]]:
    """Counts for each wall-clock-aligned epoch window of the session.

    Windows with fewer than min_samples_per_min samples are skipped.
    Returns (window_start_ms, counts) pairs in time order.
    """
    epoch_ms = cfg.epoch_s * 1000
    t = np.fromiter((s.t for s in session.samples), dtype=np.int64)
    mag = np.fromiter(
        (math.sqrt(s.ax * s.ax + s.ay * s.ay + s.az * s.az) for s in session.samples),
        dtype=np.float64,
    )
    windows = t // epoch_ms
    out = []
    for w in np.unique(windows):
        m = mag[windows == w]
        if m.size < cfg.min_samples_per_min:
            continue
        dev = np.abs(m - m.mean()) - cfg.deadband_g
        counts = cfg.scale * float(np.maximum(dev, 0.0).mean())
        out.append((int(w) * epoch_ms, counts))
    return out


def indicator(sessions: list[RecordingSession], cfg: ActivityConfig) -> float:
    """Unweighted mean of per-minute counts over all active minutes."""
    minutes: list[float] = []
    for session in sessions:
        minutes.extend(c for _, c in activity_counts_per_minute(session, cfg))
    if not minutes:
        raise NoActiveData("no minute window reached the sample floor")
    return float(np.mean(minutes))


def active_hours(sessions: list[RecordingSession]) -> float:
    return sum(s.end - s.start for s in sessions) / 3_600_000.0


def active_days(sessions: list[RecordingSession], cfg: ActivityConfig) -> int:
    """Distinct local calendar days touched by any session."""
    offset_ms = cfg.timezone_offset_min * 60_000
    days: set[int] = set()
    for s in sessions:
        first = (s.start + offset_ms) // 86_400_000
        last = (s.end + offset_ms) // 86_400_000
        days.update(range(first, last + 1))
    return len(days)


def eligible(rec: IndividualRecord, cfg: ActivityConfig) -> bool:
    """Selection rule: strictly more than min_hours, at least min_days,
    and a known residence."""
    return (
        rec.active_hours > cfg.min_hours
        and rec.active_days >= cfg.min_days
        and rec.residence is not None
    )


def _in_night_window(t_ms: int, cfg: ActivityConfig) -> bool:
    start = _parse_clock(cfg.night_start)
    end = _parse_clock(cfg.night_end)
    local_minute = ((t_ms + cfg.timezone_offset_min * 60_000) // 60_000) % 1440
    if start <= end:
        return start <= local_minute < end
    return local_minute >= start or local_minute < end


def infer_residence(
    fixes: list[GpsFix], cfg: ActivityConfig, length: int
) -> GeohashId:
    """Modal geohash of night-window fixes; ties go to the smallest code."""
    votes = Counter(
        geocode.encode(f.point, length)
        for f in fixes
        if _in_night_window(f.t, cfg)
    )
    if not votes:
        raise NoNightData("no GPS fix in the night window")
    top = max(votes.values())
    return min(code for code, n in votes.items() if n == top)


def build_individual_record(
    ident: str,
    samples: list[SensorSample],
    fixes: list[GpsFix],
    cfg: ActivityConfig,
    length: int,
) -> IndividualRecord:
    """Assemble the full per-individual summary from raw streams."""
    sessions = segment_sessions(samples, cfg)
    rec = IndividualRecord(
        id=ident,
        sessions=sessions,
        active_hours=active_hours(sessions),
        active_days=active_days(sessions, cfg),
    )
    try:
        rec.indicator = indicator(sessions, cfg)
    except NoActiveData:
        rec.indicator = None
    try:
        rec.residence = infer_residence(fixes, cfg, length)
    except NoNightData:
        rec.residence = None
    return rec
