"""Point-of-interest ingestion and per-cell environmental attributes.

POIs are points; each cell's attribute vector is the count of POIs per
category falling inside the cell under the half-open geohash boundary
convention (a POI on a shared edge lands in exactly one cell).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from . import geocode
from .errors import ParseError
from .geocode import GeohashId, GeoPoint
from .sensing import _text_lines

ATHLETICS_SPORTS = "AthleticsSports"
FAST_FOOD = "FastFood"
PUBLIC_PARK = "PublicPark"
CAFE = "Cafe"
OTHER = "Other"

CATEGORIES = (ATHLETICS_SPORTS, FAST_FOOD, PUBLIC_PARK, CAFE, OTHER)
COUNTED_CATEGORIES = CATEGORIES[:4]  # Other is excluded from attributes

POI_HEADER = ["id", "lat", "lon", "tag"]


class EnvAttributes(NamedTuple):
    """Per-cell POI counts, fixed order."""

    athletics_sports: int
    fast_food: int
    public_parks: int
    cafes: int

    @classmethod
    def zero(cls) -> "EnvAttributes":
        return cls(0, 0, 0, 0)


@dataclass(frozen=True)
class Poi:
    id: str
    point: GeoPoint
    category: str


def load_taxonomy(source) -> dict[str, str]:
    """Parse a `tag=Category` mapping file.

    Blank lines and lines starting with '#' are ignored.  Categories must
    come from the closed set; unknown names are a ParseError.
    """
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(_text_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(lineno, f"expected tag=Category, got {line!r}")
        tag, category = line.split("=", 1)
        tag, category = tag.strip(), category.strip()
        if category not in CATEGORIES:
            raise ParseError(
                lineno, f"unknown category {category!r} (one of {CATEGORIES})"
            )
        mapping[tag] = category
    return mapping


def ingest_pois(source, taxonomy: dict[str, str]) -> list[Poi]:
    """Parse the POI CSV, mapping tags through the taxonomy.

    Tags missing from the taxonomy become Other.
    """
    reader = csv.reader(_text_lines(source))
    pois: list[Poi] = []
    lineno = 0
    for row in reader:
        lineno += 1
        if lineno == 1:
            if row != POI_HEADER:
                raise ParseError(1, f"expected header {','.join(POI_HEADER)}")
            continue
        if not row:
            continue
        if len(row) != 4:
            raise ParseError(lineno, f"expected 4 fields, got {len(row)}")
        ident, lat_s, lon_s, tag = row
        try:
            lat, lon = float(lat_s), float(lon_s)
        except ValueError as exc:
            raise ParseError(lineno, f"non-numeric coordinate: {exc}") from exc
        if not (-90.0 <= lat <= 90.0) or not (-180.0 <= lon <= 180.0):
            raise ParseError(lineno, f"coordinate out of range ({lat}, {lon})")
        pois.append(Poi(ident, GeoPoint(lat, lon), taxonomy.get(tag, OTHER)))
    return pois


def env_attributes(g: GeohashId, pois: Iterable[Poi]) -> EnvAttributes:
    """Counts of counted-category POIs whose point encodes to g."""
    geocode.validate_geohash(g)
    length = len(g)
    counts = dict.fromkeys(COUNTED_CATEGORIES, 0)
    for poi in pois:
        if poi.category in counts and geocode.encode(poi.point, length) == g:
            counts[poi.category] += 1
    return EnvAttributes(*(counts[c] for c in COUNTED_CATEGORIES))


def env_attributes_by_cell(
    pois: Iterable[Poi], length: int
) -> dict[GeohashId, EnvAttributes]:
    """Bulk variant: one encode per POI, grouped by containing cell.

    Cells without POIs are absent; use EnvAttributes.zero() for those.
    """
    acc: dict[GeohashId, dict[str, int]] = {}
    for poi in pois:
        if poi.category not in COUNTED_CATEGORIES:
            continue
        code = geocode.encode(poi.point, length)
        cell = acc.setdefault(code, dict.fromkeys(COUNTED_CATEGORIES, 0))
        cell[poi.category] += 1
    return {
        code: EnvAttributes(*(cell[c] for c in COUNTED_CATEGORIES))
        for code, cell in acc.items()
    }
