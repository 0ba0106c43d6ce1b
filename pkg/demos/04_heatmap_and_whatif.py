"""Prediction heatmaps and what-if exploration.

Trains on a planted cohort, renders the full grid as GeoJSON and SVG
(red = High, blue = Low), then explores how adding amenities to a Low
cell changes its predicted class - the policy-simulation loop the HTTP
service exposes at /api/v1/whatif.
"""

from pathlib import Path

import geobehave as gb
from geobehave import cohort, environment, forest, heatmap, sensing

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

synth = gb.generate_synthetic(gb.SynthSpec(seed=7, noise_sd=100.0))
accel = sensing.parse_streams(synth.accel_csv, "accel")
gps = sensing.parse_streams(synth.gps_csv, "gps")
cfg = gb.ActivityConfig()
by_cell: dict[str, list[float]] = {}
for ident in sorted(accel):
    rec = sensing.build_individual_record(
        ident, accel[ident], gps.get(ident, []), cfg, 6
    )
    if gb.eligible(rec, cfg) and rec.indicator is not None:
        by_cell.setdefault(rec.residence, []).append(rec.indicator)
taxonomy = environment.load_taxonomy(synth.taxonomy)
pois = environment.ingest_pois(synth.poi_csv, taxonomy)
env_by_cell = environment.env_attributes_by_cell(pois, 6)
profiles = [
    gb.GeohashProfile(code, env_by_cell.get(code, gb.EnvAttributes.zero()),
                      len(v), gb.behavioral_attribute(v))
    for code, v in sorted(by_cell.items())
]
ds = gb.build_dataset(profiles)
model = gb.fit_forest(ds, gb.ForestHyperparams(n_trees=100, max_depth=3, seed=7))
print(f"model {model.fingerprint[:12]} trained on {len(ds)} cells")

# Heatmap over the whole synthetic grid plus a one-cell margin: the
# margin cells have no residents, so their classes are pure imputation.
b = synth.bbox
lat_span, lon_span = gb.geocode.cell_spans(6)
bbox = gb.CellBounds(
    b.lat_min - lat_span, b.lat_max + lat_span,
    b.lon_min - lon_span, b.lon_max + lon_span,
)
h = heatmap.generate(bbox, 6, model, pois, observed=profiles)
n_high = sum(c.predicted == "High" for c in h.cells)
n_observed = sum(c.provenance == "observed" for c in h.cells)
print(f"heatmap: {len(h.cells)} cells, {n_high} High, "
      f"{n_observed} observed / {len(h.cells) - n_observed} imputed")

geojson_path = OUT / "heatmap.geojson"
svg_path = OUT / "heatmap.svg"
geojson_path.write_bytes(heatmap.export_geojson(h))
svg_path.write_bytes(heatmap.render_svg(h, 900))
print(f"wrote {geojson_path}")
print(f"wrote {svg_path}")

# What-if: take the Low cell with the weakest Low vote and add parks
# and sports facilities, the intervention the grid says matters most.
low_cells = [c for c in h.cells if c.predicted == "Low" and c.provenance == "observed"]
target = min(low_cells, key=lambda c: c.vote_fraction)
print(f"\nwhat-if target {target.geohash}: env {tuple(target.env)}, "
      f"Low with vote {target.vote_fraction:.2f}")

for extra_parks, extra_sports in ((1, 1), (2, 2), (4, 3), (6, 5)):
    modified = gb.EnvAttributes(
        target.env.athletics_sports + extra_sports,
        target.env.fast_food,
        target.env.public_parks + extra_parks,
        target.env.cafes,
    )
    predicted, vote = gb.predict(model, modified)
    print(f"  +{extra_sports} sports, +{extra_parks} parks -> "
          f"{predicted:<4} (vote {vote:.2f})")

print("\nthe HTTP service exposes the same loop:")
print("  geobehave serve --config <dir>/config.json")
print("  POST /api/v1/whatif "
      '{"geohash": "...", "env_override": {"athletics": 5, ...}}')
