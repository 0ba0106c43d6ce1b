"""Per-cell prediction maps with GeoJSON and SVG export.

High cells are filled red (#d62728), Low cells blue (#1f77b4), in both
export formats.  Exports are canonical byte streams: stable key order,
coordinates rounded to 6 decimals, fixed-precision SVG geometry.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import geocode
from .cohort import GeohashProfile, HIGH
from .environment import EnvAttributes, Poi, env_attributes_by_cell
from .errors import InvalidSize
from .forest import ForestModel, predict
from .geocode import CellBounds, GeohashId

HIGH_FILL = "#d62728"
LOW_FILL = "#1f77b4"

MIN_SVG_WIDTH = 64

OBSERVED = "observed"
IMPUTED = "imputed"


@dataclass(frozen=True)
class HeatmapCell:
    geohash: GeohashId
    env: EnvAttributes
    predicted: str  # "High" | "Low"
    vote_fraction: float
    provenance: str  # "observed" | "imputed"


@dataclass(frozen=True)
class Heatmap:
    cells: list[HeatmapCell]
    bbox: CellBounds
    length: int
    model_fingerprint: str


def fill_color(predicted: str) -> str:
    return HIGH_FILL if predicted == HIGH else LOW_FILL


def generate(
    bbox: CellBounds,
    length: int,
    model: ForestModel,
    pois: list[Poi],
    observed: list[GeohashProfile] | None = None,
) -> Heatmap:
    """Predict every covering cell from its POI counts.

    Cells present in `observed` are tagged as such but still display the
    model's prediction, not the recorded label.
    """
    observed_codes = {p.geohash for p in observed} if observed else set()
    env_by_cell = env_attributes_by_cell(pois, length)
    cells = []
    for code in geocode.cover_bbox(bbox, length):
        env = env_by_cell.get(code, EnvAttributes.zero())
        predicted, fraction = predict(model, env)
        cells.append(
            HeatmapCell(
                geohash=code,
                env=env,
                predicted=predicted,
                vote_fraction=fraction,
                provenance=OBSERVED if code in observed_codes else IMPUTED,
            )
        )
    return Heatmap(
        cells=cells, bbox=bbox, length=length, model_fingerprint=model.fingerprint
    )


def export_geojson(h: Heatmap) -> bytes:
    """FeatureCollection with one closed-ring polygon per cell."""
    features = []
    for cell in h.cells:
        b = geocode.decode(cell.geohash)
        ring = [
            [round(b.lon_min, 6), round(b.lat_min, 6)],
            [round(b.lon_max, 6), round(b.lat_min, 6)],
            [round(b.lon_max, 6), round(b.lat_max, 6)],
            [round(b.lon_min, 6), round(b.lat_max, 6)],
            [round(b.lon_min, 6), round(b.lat_min, 6)],
        ]
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": [ring]},
                "properties": {
                    "geohash": cell.geohash,
                    "predicted_class": cell.predicted,
                    "vote_fraction": cell.vote_fraction,
                    "env": {
                        "athletics": cell.env.athletics_sports,
                        "fastfood": cell.env.fast_food,
                        "parks": cell.env.public_parks,
                        "cafes": cell.env.cafes,
                    },
                    "provenance": cell.provenance,
                    "fill": fill_color(cell.predicted),
                },
            }
        )
    doc = {
        "type": "FeatureCollection",
        "features": features,
        "model_fingerprint": h.model_fingerprint,
    }
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode(
        "utf-8"
    )


def _letter_label(i: int) -> str:
    """0 -> A, 25 -> Z, 26 -> AA, spreadsheet style."""
    out = ""
    i += 1
    while i > 0:
        i, rem = divmod(i - 1, 26)
        out = chr(ord("A") + rem) + out
    return out


def render_svg(h: Heatmap, width_px: int, labels: bool = True) -> bytes:
    """Plate carree rendering of the cell rectangles.

    Cells are labeled A, B, C, ... in reading order (north to south,
    west to east) when labels is on.
    """
    if width_px < MIN_SVG_WIDTH:
        raise InvalidSize(f"width must be at least {MIN_SVG_WIDTH}px, got {width_px}")
    bounds = [geocode.decode(c.geohash) for c in h.cells]
    lat_min = min(b.lat_min for b in bounds)
    lat_max = max(b.lat_max for b in bounds)
    lon_min = min(b.lon_min for b in bounds)
    lon_max = max(b.lon_max for b in bounds)
    sx = width_px / (lon_max - lon_min)
    height_px = (lat_max - lat_min) * sx

    # reading order for labels, independent of the row-major cell order
    reading = sorted(
        range(len(h.cells)),
        key=lambda i: (-bounds[i].lat_min, bounds[i].lon_min),
    )
    label_of = {idx: _letter_label(pos) for pos, idx in enumerate(reading)}

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_px:.0f}" '
        f'height="{height_px:.0f}" viewBox="0 0 {width_px:.2f} {height_px:.2f}">'
    ]
    for i, cell in enumerate(h.cells):
        b = bounds[i]
        x = (b.lon_min - lon_min) * sx
        y = (lat_max - b.lat_max) * sx
        w = (b.lon_max - b.lon_min) * sx
        hh = (b.lat_max - b.lat_min) * sx
        parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{hh:.2f}" '
            f'fill="{fill_color(cell.predicted)}" fill-opacity="0.6" '
            f'stroke="#ffffff" stroke-width="1"/>'
        )
        if labels:
            cx, cy = x + w / 2.0, y + hh / 2.0
            font = max(10.0, hh / 5.0)
            parts.append(
                f'<text x="{cx:.2f}" y="{cy:.2f}" text-anchor="middle" '
                f'dominant-baseline="central" font-family="sans-serif" '
                f'font-size="{font:.1f}" fill="#000000">{label_of[i]}</text>'
            )
    parts.append("</svg>\n")
    return "".join(parts).encode("utf-8")
