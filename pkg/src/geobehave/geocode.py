"""Geohash codec and grid utilities.

Implements the standard base-32 geohash scheme: latitude and longitude are
refined by interleaved binary subdivision (first bit longitude), five bits
per output character.  The subdivision comparison is "value >= midpoint
goes to the upper half", which makes every cell half-open
([lat_min, lat_max) x [lon_min, lon_max)) except along the global maxima,
so boundary points resolve to exactly one cell.

Meter conversions use the spherical approximation 111 320 m per degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidGeohash, InvalidInput

BASE32 = "0123456789bcdefghjkmnpqrstuvwxyz"
_BASE32_INDEX = {c: i for i, c in enumerate(BASE32)}

MIN_LENGTH = 1
MAX_LENGTH = 12

METERS_PER_DEGREE = 111_320.0

GeohashId = str


@dataclass(frozen=True)
class GeoPoint:
    """A WGS84 coordinate pair in degrees."""

    lat: float
    lon: float


@dataclass(frozen=True)
class CellBounds:
    """Rectangular bounds of a cell (or any query box), degrees."""

    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def contains(self, p: GeoPoint) -> bool:
        """Half-open containment; closed at the global maxima."""
        lat_ok = self.lat_min <= p.lat < self.lat_max or (
            p.lat == self.lat_max == 90.0
        )
        lon_ok = self.lon_min <= p.lon < self.lon_max or (
            p.lon == self.lon_max == 180.0
        )
        return lat_ok and lon_ok

    def center(self) -> GeoPoint:
        return GeoPoint(
            (self.lat_min + self.lat_max) / 2.0,
            (self.lon_min + self.lon_max) / 2.0,
        )


def _check_point(p: GeoPoint) -> None:
    if not (-90.0 <= p.lat <= 90.0) or not (-180.0 <= p.lon <= 180.0):
        raise InvalidInput(f"coordinate out of range: lat={p.lat}, lon={p.lon}")


def _check_length(length: int) -> None:
    if not isinstance(length, int) or not (MIN_LENGTH <= length <= MAX_LENGTH):
        raise InvalidInput(f"geohash length must be in [1, 12], got {length!r}")


def validate_geohash(code: str) -> None:
    """Raise InvalidGeohash unless code is a valid geohash string."""
    if not isinstance(code, str) or not (MIN_LENGTH <= len(code) <= MAX_LENGTH):
        raise InvalidGeohash(f"geohash length must be in [1, 12], got {code!r}")
    for c in code:
        if c not in _BASE32_INDEX:
            raise InvalidGeohash(f"invalid geohash character {c!r} in {code!r}")


def encode(p: GeoPoint, length: int) -> GeohashId:
    """Return the code of the unique cell containing p at the given length."""
    _check_point(p)
    _check_length(length)

    lat_lo, lat_hi = -90.0, 90.0
    lon_lo, lon_hi = -180.0, 180.0
    chars = []
    acc = 0
    even = True  # even bit positions refine longitude
    for nbits in range(1, 5 * length + 1):
        if even:
            mid = (lon_lo + lon_hi) / 2.0
            if p.lon >= mid:
                acc = (acc << 1) | 1
                lon_lo = mid
            else:
                acc = acc << 1
                lon_hi = mid
        else:
            mid = (lat_lo + lat_hi) / 2.0
            if p.lat >= mid:
                acc = (acc << 1) | 1
                lat_lo = mid
            else:
                acc = acc << 1
                lat_hi = mid
        even = not even
        if nbits % 5 == 0:
            chars.append(BASE32[acc])
            acc = 0
    return "".join(chars)


def decode(g: GeohashId) -> CellBounds:
    """Return the exact bounds of the cell named by g."""
    validate_geohash(g)
    lat_lo, lat_hi = -90.0, 90.0
    lon_lo, lon_hi = -180.0, 180.0
    even = True
    for c in g:
        value = _BASE32_INDEX[c]
        for shift in range(4, -1, -1):
            bit = (value >> shift) & 1
            if even:
                mid = (lon_lo + lon_hi) / 2.0
                if bit:
                    lon_lo = mid
                else:
                    lon_hi = mid
            else:
                mid = (lat_lo + lat_hi) / 2.0
                if bit:
                    lat_lo = mid
                else:
                    lat_hi = mid
            even = not even
    return CellBounds(lat_lo, lat_hi, lon_lo, lon_hi)


def cell_spans(length: int) -> tuple[float, float]:
    """(lat_span, lon_span) in degrees for cells of the given length.

    Longitude gets ceil(5L/2) bits, latitude floor(5L/2).
    """
    _check_length(length)
    total = 5 * length
    lon_bits = (total + 1) // 2
    lat_bits = total // 2
    return 180.0 / (1 << lat_bits), 360.0 / (1 << lon_bits)


def cell_dimensions(length: int, lat: float) -> tuple[float, float]:
    """Approximate (width_m, height_m) of a cell at the given latitude."""
    if not (-90.0 <= lat <= 90.0):
        raise InvalidInput(f"latitude out of range: {lat}")
    lat_span, lon_span = cell_spans(length)
    height_m = lat_span * METERS_PER_DEGREE
    width_m = lon_span * METERS_PER_DEGREE * math.cos(math.radians(lat))
    return width_m, height_m


def cover_bbox(bounds: CellBounds, length: int) -> list[GeohashId]:
    """All cells of the given length intersecting the box with positive area.

    Ordered row-major, south to north then west to east.  A degenerate
    (zero-area) box yields the single cell containing its corner point.
    Touching a cell edge from outside does not count as intersecting.
    """
    _check_length(length)
    _check_point(GeoPoint(bounds.lat_min, bounds.lon_min))
    _check_point(GeoPoint(bounds.lat_max, bounds.lon_max))
    if bounds.lat_min > bounds.lat_max or bounds.lon_min > bounds.lon_max:
        raise InvalidInput("inverted bounds")

    if bounds.lat_min == bounds.lat_max or bounds.lon_min == bounds.lon_max:
        return [encode(GeoPoint(bounds.lat_min, bounds.lon_min), length)]

    lat_span, lon_span = cell_spans(length)
    n_rows_total = round(180.0 / lat_span)
    n_cols_total = round(360.0 / lon_span)

    # Cell boundaries are dyadic, so these index computations are exact
    # whenever the box edges coincide with cell edges.
    row_lo = min(int(math.floor((bounds.lat_min + 90.0) / lat_span)), n_rows_total - 1)
    row_hi = min(int(math.ceil((bounds.lat_max + 90.0) / lat_span)) - 1, n_rows_total - 1)
    col_lo = min(int(math.floor((bounds.lon_min + 180.0) / lon_span)), n_cols_total - 1)
    col_hi = min(int(math.ceil((bounds.lon_max + 180.0) / lon_span)) - 1, n_cols_total - 1)

    codes: list[GeohashId] = []
    for row in range(row_lo, row_hi + 1):
        lat_c = -90.0 + (row + 0.5) * lat_span
        for col in range(col_lo, col_hi + 1):
            lon_c = -180.0 + (col + 0.5) * lon_span
            codes.append(encode(GeoPoint(lat_c, lon_c), length))
    return codes
