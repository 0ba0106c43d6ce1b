"""Geohash cells: encoding, decoding, sizes and grid covers.

Walks through the spatial indexing used everywhere else: points map to
base-32 cell codes, codes map back to rectangular bounds, and bounding
boxes expand to ordered cell grids.
"""

import geobehave as gb

# A point in central Thessaloniki and its cell at a few precisions.
home = gb.GeoPoint(40.6401, 22.9444)
for length in (1, 4, 6, 8):
    code = gb.encode(home, length)
    width, height = gb.cell_dimensions(length, home.lat)
    print(f"length {length}: {code!r:12} ~ {width:8.0f} m x {height:8.0f} m")

# Length 6 is the working precision: roughly 930 x 610 m here, about
# 0.57 km^2 per cell.
width, height = gb.cell_dimensions(6, home.lat)
print(f"\nlength-6 cell area: {width * height / 1e6:.3f} km^2")

# Decoding returns exact bounds; encoding the center returns the code.
code = gb.encode(home, 6)
bounds = gb.decode(code)
print(f"\n{code} bounds: lat [{bounds.lat_min:.6f}, {bounds.lat_max:.6f})")
print(f"{'':8} lon [{bounds.lon_min:.6f}, {bounds.lon_max:.6f})")
assert gb.encode(bounds.center(), 6) == code

# Cells are half-open: a point exactly on the northern edge belongs to
# the neighbor above.
edge = gb.GeoPoint(bounds.lat_max, home.lon)
print(f"point on northern edge lands in {gb.encode(edge, 6)}")

# A bounding box expands to the grid of intersecting cells, ordered
# south-to-north then west-to-east.
lat_span = bounds.lat_max - bounds.lat_min
lon_span = bounds.lon_max - bounds.lon_min
box = gb.CellBounds(
    bounds.lat_min,
    bounds.lat_min + 3 * lat_span,
    bounds.lon_min,
    bounds.lon_min + 3 * lon_span,
)
cells = gb.cover_bbox(box, 6)
print(f"\n3x3 box covers {len(cells)} cells:")
for row in range(3):
    print("  " + "  ".join(cells[row * 3 : row * 3 + 3]))
