"""Per-geohash dataset construction and synthetic cohort generation.

A cell's behavioral attribute is the mean of its residents' activity
indicators; the class label is High when the attribute strictly exceeds
the labeling threshold (the mean over cells), Low otherwise.  Feature
vectors are the four POI counts, each dimension min-max normalized to
[0, 1] over the training cells.

The synthetic generator plants a known relationship between POI counts
and activity so the full pipeline can be checked against ground truth:
cells draw an "active" or "inactive" amenity archetype, the target
indicator is base_rate + effect_weights . counts (+ optional cell-level
Gaussian noise), and raw sensor streams are synthesized so that each
resident's processed indicator reproduces the planted value.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import geocode
from .environment import COUNTED_CATEGORIES, EnvAttributes
from .errors import DegenerateLabels, NoData, NoResidents
from .geocode import CellBounds, GeohashId, GeoPoint
from .sensing import ActivityConfig

LOW = "Low"
HIGH = "High"
LABEL_TO_INT = {LOW: 0, HIGH: 1}
INT_TO_LABEL = {0: LOW, 1: HIGH}

DATASET_HEADER = ["geohash", "athletics", "fastfood", "parks", "cafes", "attr", "label"]


@dataclass
class GeohashProfile:
    """One training cell: environment counts plus aggregated behavior."""

    geohash: GeohashId
    env: EnvAttributes
    residents: int
    behavioral_attribute: float
    label: str | None = None  # filled once a labeling threshold exists


@dataclass(frozen=True)
class NormBounds:
    """Per-dimension min/max over training counts."""

    mins: tuple[float, float, float, float]
    maxs: tuple[float, float, float, float]

    def degenerate_dims(self) -> tuple[int, ...]:
        return tuple(i for i in range(4) if self.mins[i] == self.maxs[i])


@dataclass
class Dataset:
    """Normalized feature matrix with labels, ordered by geohash code."""

    geohashes: list[GeohashId]
    X: np.ndarray  # (n, 4) float64 in [0, 1]
    y: np.ndarray  # (n,) int8, 0=Low 1=High
    env: np.ndarray  # (n, 4) raw counts
    attrs: np.ndarray  # (n,) behavioral attributes
    norm_bounds: NormBounds
    threshold: float

    def __len__(self) -> int:
        return len(self.geohashes)


def behavioral_attribute(indicators: list[float]) -> float:
    """Arithmetic mean of the residents' indicators."""
    if not indicators:
        raise NoResidents("cannot aggregate an empty resident list")
    return float(np.mean(indicators))


def label(attr: float, threshold: float) -> str:
    """High iff strictly greater than the threshold."""
    return HIGH if attr > threshold else LOW


def fit_normalizer(profiles: list[GeohashProfile]) -> NormBounds:
    """Per-dimension min and max of the raw counts."""
    if not profiles:
        raise NoData("no profiles to fit normalization bounds")
    counts = np.array([p.env for p in profiles], dtype=np.float64)
    return NormBounds(
        mins=tuple(float(v) for v in counts.min(axis=0)),
        maxs=tuple(float(v) for v in counts.max(axis=0)),
    )


def normalize(env: EnvAttributes, bounds: NormBounds) -> np.ndarray:
    """Min-max scale to [0, 1]; clamps out-of-range inputs, degenerate
    dimensions map to 0."""
    out = np.zeros(4, dtype=np.float64)
    for i in range(4):
        lo, hi = bounds.mins[i], bounds.maxs[i]
        if hi == lo:
            out[i] = 0.0
        else:
            out[i] = min(1.0, max(0.0, (float(env[i]) - lo) / (hi - lo)))
    return out


def build_dataset(profiles: list[GeohashProfile]) -> Dataset:
    """Label against the mean attribute and normalize features.

    Points are ordered by ascending geohash code, so the result does not
    depend on the input order.
    """
    if not profiles:
        raise NoData("no profiles")
    attrs = [p.behavioral_attribute for p in profiles]
    if len(profiles) < 2 or all(a == attrs[0] for a in attrs):
        raise DegenerateLabels("all behavioral attributes equal")
    ordered = sorted(profiles, key=lambda p: p.geohash)
    threshold = float(np.mean([p.behavioral_attribute for p in ordered]))
    bounds = fit_normalizer(ordered)
    X = np.vstack([normalize(p.env, bounds) for p in ordered])
    y = np.array(
        [LABEL_TO_INT[label(p.behavioral_attribute, threshold)] for p in ordered],
        dtype=np.int8,
    )
    return Dataset(
        geohashes=[p.geohash for p in ordered],
        X=X,
        y=y,
        env=np.array([p.env for p in ordered], dtype=np.int64),
        attrs=np.array([p.behavioral_attribute for p in ordered], dtype=np.float64),
        norm_bounds=bounds,
        threshold=threshold,
    )


# ---------------------------------------------------------------------------
# Persistence: CSV of raw counts + attributes, JSON sidecar with the
# normalization bounds and threshold.  Low=0, High=1 in the label column.
# ---------------------------------------------------------------------------

def save_dataset(ds: Dataset, csv_path: Path, meta_path: Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(DATASET_HEADER)
    for i, code in enumerate(ds.geohashes):
        writer.writerow(
            [code]
            + [int(v) for v in ds.env[i]]
            + [repr(float(ds.attrs[i])), int(ds.y[i])]
        )
    Path(csv_path).write_text(buf.getvalue(), encoding="utf-8")
    meta = {
        "threshold": ds.threshold,
        "norm_bounds": {"mins": list(ds.norm_bounds.mins), "maxs": list(ds.norm_bounds.maxs)},
    }
    Path(meta_path).write_text(
        json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_dataset(csv_path: Path, meta_path: Path) -> Dataset:
    meta = json.loads(Path(meta_path).read_text(encoding="utf-8"))
    bounds = NormBounds(
        mins=tuple(meta["norm_bounds"]["mins"]),
        maxs=tuple(meta["norm_bounds"]["maxs"]),
    )
    threshold = float(meta["threshold"])

    geohashes: list[str] = []
    env_rows: list[list[int]] = []
    attrs: list[float] = []
    labels: list[int] = []
    with open(csv_path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != DATASET_HEADER:
            raise NoData(f"unexpected dataset header {header}")
        for row in reader:
            geohashes.append(row[0])
            env_rows.append([int(v) for v in row[1:5]])
            attrs.append(float(row[5]))
            labels.append(int(row[6]))
    if not geohashes:
        raise NoData(f"empty dataset file {csv_path}")
    X = np.vstack(
        [normalize(EnvAttributes(*row), bounds) for row in env_rows]
    )
    return Dataset(
        geohashes=geohashes,
        X=X,
        y=np.array(labels, dtype=np.int8),
        env=np.array(env_rows, dtype=np.int64),
        attrs=np.array(attrs, dtype=np.float64),
        norm_bounds=bounds,
        threshold=threshold,
    )


# ---------------------------------------------------------------------------
# Synthetic cohort
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SynthSpec:
    """Parameters of the planted cohort."""

    seed: int
    n_geohashes: int = 42
    residents_per_cell: int = 3
    effect_weights: tuple[float, float, float, float] = (45.0, -30.0, 35.0, 15.0)
    noise_sd: float = 0.0  # counts/min, applied per cell
    base_rate: float = 343.9


SYNTH_GEOHASH_LENGTH = 6
SYNTH_ANCHOR = GeoPoint(40.64, 22.94)  # grid grows north-east from here

# Epoch of the synthetic recording period (2024-03-04 00:00:00 UTC).
_T0_MS = 1_709_510_400_000
_DAY_MS = 86_400_000

# Session shape: nightly 21:30-05:30 with one sparse keep-alive sample per
# minute and four dense minutes supplying the activity signal.
_SESSION_START_MIN = 21 * 60 + 30
_SESSION_MINUTES = 480
_DENSE_MINUTES = (30, 150, 270, 390)
_DENSE_SAMPLES = 30
_BASE_MAGNITUDE_G = 2.0
_N_DAYS = 3
_SYNTH_CFG = ActivityConfig()  # streams are tuned to the default knobs

_TAG_POOLS = {
    "AthleticsSports": ("stadium", "sports_centre", "pitch"),
    "FastFood": ("fast_food", "takeaway"),
    "PublicPark": ("park", "playground"),
    "Cafe": ("cafe", "coffee_shop"),
}
_NOISE_TAGS = ("pharmacy", "school", "bank")

# Amenity count ranges per archetype (inclusive), per counted category.
_ACTIVE_RANGES = ((5, 6), (0, 1), (4, 5), (6, 7))
_INACTIVE_RANGES = ((0, 1), (5, 6), (0, 1), (2, 3))
_ACTIVE_SHARE = 0.45


@dataclass
class SynthCohort:
    """Generated raw inputs plus the planted ground truth."""

    spec: SynthSpec
    accel_csv: bytes
    gps_csv: bytes
    poi_csv: bytes
    taxonomy: bytes
    profiles: list[GeohashProfile]  # labeled ground truth, ordered by code
    threshold: float
    effect_range: float  # max - min of noise-free planted attributes
    bbox: CellBounds
    cells: list[GeohashId] = field(default_factory=list)

    def write(self, out_dir: Path) -> dict[str, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = {
            "accel": out_dir / "accel.csv",
            "gps": out_dir / "gps.csv",
            "pois": out_dir / "pois.csv",
            "taxonomy": out_dir / "taxonomy.txt",
            "truth": out_dir / "truth.csv",
        }
        paths["accel"].write_bytes(self.accel_csv)
        paths["gps"].write_bytes(self.gps_csv)
        paths["pois"].write_bytes(self.poi_csv)
        paths["taxonomy"].write_bytes(self.taxonomy)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(DATASET_HEADER)
        for p in self.profiles:
            writer.writerow(
                [p.geohash]
                + [int(v) for v in p.env]
                + [repr(p.behavioral_attribute), LABEL_TO_INT[p.label]]
            )
        paths["truth"].write_text(buf.getvalue(), encoding="utf-8")
        return paths


def _synth_cells(n: int) -> tuple[list[GeohashId], CellBounds]:
    """A contiguous W x H block of cells anchored at SYNTH_ANCHOR."""
    lat_span, lon_span = geocode.cell_spans(SYNTH_GEOHASH_LENGTH)
    anchor = geocode.decode(geocode.encode(SYNTH_ANCHOR, SYNTH_GEOHASH_LENGTH))
    width = int(np.ceil(np.sqrt(n)))
    height = int(np.ceil(n / width))
    bbox = CellBounds(
        lat_min=anchor.lat_min,
        lat_max=anchor.lat_min + height * lat_span,
        lon_min=anchor.lon_min,
        lon_max=anchor.lon_min + width * lon_span,
    )
    return geocode.cover_bbox(bbox, SYNTH_GEOHASH_LENGTH)[:n], bbox


def _resident_offsets(n: int, target: float) -> list[float]:
    """Zero-sum spread of indicators around the cell target."""
    if target < 15.0:
        return [0.0] * n
    offsets = []
    for r in range(n // 2):
        offsets.extend([15.0, -15.0])
    if n % 2:
        offsets.append(0.0)
    return offsets


def generate_synthetic(spec: SynthSpec) -> SynthCohort:
    """Build a reproducible planted cohort in the raw ingestion formats.

    Residents of a cell record three nightly sessions (24 h in total,
    spanning four calendar days) whose dense minutes are synthesized so
    the processed indicator equals the planted per-resident value; night
    GPS fixes sit at the cell center.  With noise_sd = 0 the pipeline
    must recover the planted labels exactly.
    """
    if spec.n_geohashes < 4:
        raise NoData("n_geohashes must be at least 4")
    if spec.noise_sd < 0:
        raise NoData("noise_sd must be nonnegative")

    layout_ss, noise_ss = np.random.SeedSequence([spec.seed]).spawn(2)
    layout_rng = np.random.default_rng(layout_ss)
    noise_rng = np.random.default_rng(noise_ss)

    cells, bbox = _synth_cells(spec.n_geohashes)
    weights = np.array(spec.effect_weights, dtype=np.float64)

    # Plant the environment: archetype then bounded counts per category.
    envs: list[EnvAttributes] = []
    for _ in cells:
        active = layout_rng.random() < _ACTIVE_SHARE
        ranges = _ACTIVE_RANGES if active else _INACTIVE_RANGES
        envs.append(
            EnvAttributes(
                *(int(layout_rng.integers(lo, hi + 1)) for lo, hi in ranges)
            )
        )

    effects = np.array([float(weights @ np.asarray(e, dtype=np.float64)) for e in envs])
    clean_attrs = spec.base_rate + effects
    effect_range = float(clean_attrs.max() - clean_attrs.min())
    noise = (
        noise_rng.normal(0.0, spec.noise_sd, size=len(cells))
        if spec.noise_sd > 0
        else np.zeros(len(cells))
    )
    targets = np.maximum(0.0, clean_attrs + noise)

    # POI file: planted counts per cell plus unmapped noise POIs.
    poi_buf = io.StringIO()
    poi_writer = csv.writer(poi_buf, lineterminator="\n")
    poi_writer.writerow(["id", "lat", "lon", "tag"])
    poi_serial = 0

    def poi_position(cell: GeohashId) -> GeoPoint:
        b = geocode.decode(cell)
        u, v = layout_rng.random(), layout_rng.random()
        return GeoPoint(
            b.lat_min + (0.05 + 0.9 * u) * (b.lat_max - b.lat_min),
            b.lon_min + (0.05 + 0.9 * v) * (b.lon_max - b.lon_min),
        )

    for cell, env in zip(cells, envs):
        for cat, count in zip(COUNTED_CATEGORIES, env):
            pool = _TAG_POOLS[cat]
            for k in range(count):
                p = poi_position(cell)
                poi_writer.writerow(
                    [f"poi-{poi_serial:05d}", repr(p.lat), repr(p.lon), pool[k % len(pool)]]
                )
                poi_serial += 1
        # one unmapped POI per cell, excluded from counts
        p = poi_position(cell)
        poi_writer.writerow(
            [f"poi-{poi_serial:05d}", repr(p.lat), repr(p.lon),
             _NOISE_TAGS[poi_serial % len(_NOISE_TAGS)]]
        )
        poi_serial += 1

    taxonomy_lines = [
        f"{tag}={cat}" for cat, pool in _TAG_POOLS.items() for tag in pool
    ]
    taxonomy_lines.append("kiosk=Other")
    taxonomy = ("\n".join(taxonomy_lines) + "\n").encode("utf-8")

    # Raw streams: one nightly session per day per resident.
    accel_buf = io.StringIO()
    accel_writer = csv.writer(accel_buf, lineterminator="\n")
    accel_writer.writerow(["individual_id", "t_ms", "ax_g", "ay_g", "az_g"])
    gps_buf = io.StringIO()
    gps_writer = csv.writer(gps_buf, lineterminator="\n")
    gps_writer.writerow(["individual_id", "t_ms", "lat", "lon", "accuracy_m"])

    profiles: list[GeohashProfile] = []
    for ci, (cell, env) in enumerate(zip(cells, envs)):
        center = geocode.decode(cell).center()
        offsets = _resident_offsets(spec.residents_per_cell, float(targets[ci]))
        indicators: list[float] = []
        for r in range(spec.residents_per_cell):
            ident = f"p{ci:03d}r{r}"
            max_counts = _SYNTH_CFG.scale * (_BASE_MAGNITUDE_G - _SYNTH_CFG.deadband_g)
            target = max(0.0, min(float(targets[ci]) + offsets[r], max_counts))
            indicators.append(target)
            dev = target / _SYNTH_CFG.scale + _SYNTH_CFG.deadband_g  # counts inverse
            for day in range(_N_DAYS):
                session_start = _T0_MS + day * _DAY_MS + _SESSION_START_MIN * 60_000
                for minute in range(_SESSION_MINUTES):
                    t_min = session_start + minute * 60_000
                    if minute in _DENSE_MINUTES:
                        for k in range(_DENSE_SAMPLES):
                            mag = (
                                _BASE_MAGNITUDE_G + dev
                                if k % 2 == 0
                                else _BASE_MAGNITUDE_G - dev
                            )
                            accel_writer.writerow(
                                [ident, t_min + 2_000 * k, "0.0", "0.0", repr(mag)]
                            )
                    else:
                        accel_writer.writerow(
                            [ident, t_min + 13_000, "0.0", "0.0", "1.0"]
                        )
                for fix_minute in (70, 100, 130, 160):  # 01:10-02:40 local
                    t_fix = _T0_MS + (day + 1) * _DAY_MS + fix_minute * 60_000
                    gps_writer.writerow(
                        [ident, t_fix, repr(center.lat), repr(center.lon), "8.0"]
                    )
        profiles.append(
            GeohashProfile(
                geohash=cell,
                env=env,
                residents=spec.residents_per_cell,
                behavioral_attribute=behavioral_attribute(indicators),
            )
        )

    profiles.sort(key=lambda p: p.geohash)
    threshold = float(np.mean([p.behavioral_attribute for p in profiles]))
    for p in profiles:
        p.label = label(p.behavioral_attribute, threshold)

    return SynthCohort(
        spec=spec,
        accel_csv=accel_buf.getvalue().encode("utf-8"),
        gps_csv=gps_buf.getvalue().encode("utf-8"),
        poi_csv=poi_buf.getvalue().encode("utf-8"),
        taxonomy=taxonomy,
        profiles=profiles,
        threshold=threshold,
        effect_range=effect_range,
        bbox=bbox,
        cells=cells,
    )
