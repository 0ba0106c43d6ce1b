"""geobehave: predict the expected activity level of small geographic
cells from their points-of-interest counts.

The pipeline runs raw accelerometer/GPS streams through activity-count
extraction and residence inference, aggregates eligible individuals into
per-geohash profiles, trains a random-forest classifier on normalized
POI counts, and renders prediction heatmaps and what-if scenarios.
"""

from . import cohort, environment, errors, forest, geocode, heatmap, sensing
from .cohort import (
    Dataset,
    GeohashProfile,
    SynthSpec,
    behavioral_attribute,
    build_dataset,
    generate_synthetic,
    label,
)
from .environment import EnvAttributes, Poi, env_attributes, ingest_pois
from .forest import (
    ConfusionMatrix,
    ForestHyperparams,
    ForestModel,
    cross_validate,
    fit_forest,
    loo_evaluate,
    metrics,
    predict,
)
from .geocode import (
    CellBounds,
    GeoPoint,
    cell_dimensions,
    cover_bbox,
    decode,
    encode,
)
from .heatmap import Heatmap, HeatmapCell, export_geojson, render_svg
from .sensing import (
    ActivityConfig,
    IndividualRecord,
    activity_counts_per_minute,
    eligible,
    indicator,
    infer_residence,
    parse_streams,
    segment_sessions,
)

__version__ = "0.1.0"

__all__ = [
    "cohort",
    "environment",
    "errors",
    "forest",
    "geocode",
    "heatmap",
    "sensing",
    "Dataset",
    "GeohashProfile",
    "SynthSpec",
    "behavioral_attribute",
    "build_dataset",
    "generate_synthetic",
    "label",
    "EnvAttributes",
    "Poi",
    "env_attributes",
    "ingest_pois",
    "ConfusionMatrix",
    "ForestHyperparams",
    "ForestModel",
    "cross_validate",
    "fit_forest",
    "loo_evaluate",
    "metrics",
    "predict",
    "CellBounds",
    "GeoPoint",
    "cell_dimensions",
    "cover_bbox",
    "decode",
    "encode",
    "Heatmap",
    "HeatmapCell",
    "export_geojson",
    "render_svg",
    "ActivityConfig",
    "IndividualRecord",
    "activity_counts_per_minute",
    "eligible",
    "indicator",
    "infer_residence",
    "parse_streams",
    "segment_sessions",
    "__version__",
]
