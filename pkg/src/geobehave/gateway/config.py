"""Pipeline configuration: a JSON file mirroring PipelineConfig.

Relative paths are resolved against the config file's directory, so a
generated bundle (inputs + config) can be moved as a unit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import InvalidInput
from ..forest import ForestHyperparams
from ..sensing import ActivityConfig

DEFAULT_PORT = 8080


@dataclass
class PipelineConfig:
    accel_csv: Path
    gps_csv: Path
    poi_csv: Path
    taxonomy: Path
    out_dir: Path
    geohash_length: int = 6
    seed: int = 0
    activity: ActivityConfig = field(default_factory=ActivityConfig)
    grid: list[ForestHyperparams] = field(default_factory=list)

    # artifact paths, all under out_dir
    def path(self, name: str) -> Path:
        return self.out_dir / name

    @property
    def ingest_report(self) -> Path:
        return self.path("ingest_report.json")

    @property
    def individuals_csv(self) -> Path:
        return self.path("individuals.csv")

    @property
    def dataset_csv(self) -> Path:
        return self.path("dataset.csv")

    @property
    def dataset_meta(self) -> Path:
        return self.path("dataset_meta.json")

    @property
    def model_json(self) -> Path:
        return self.path("model.json")

    @property
    def cv_report(self) -> Path:
        return self.path("cv_report.json")

    @property
    def evaluation_json(self) -> Path:
        return self.path("evaluation.json")

    @property
    def heatmap_geojson(self) -> Path:
        return self.path("heatmap.geojson")

    @property
    def heatmap_svg(self) -> Path:
        return self.path("heatmap.svg")


def _activity_from_dict(obj: dict) -> ActivityConfig:
    allowed = set(ActivityConfig.__dataclass_fields__)
    unknown = set(obj) - allowed
    if unknown:
        raise InvalidInput(f"unknown activity config keys: {sorted(unknown)}")
    return ActivityConfig(**obj)


def _grid_from_dict(obj: dict, seed: int) -> list[ForestHyperparams]:
    """Cross product of the searched families.

    {"n_trees": [...], "max_depth": [...], "criterion": [...]} with
    optional scalar "bootstrap" and "features_per_split".
    """
    n_trees_list = obj.get("n_trees", [10, 50, 100, 200])
    depth_list = obj.get("max_depth", [2, 3, 4, None])
    criterion_list = obj.get("criterion", ["gini", "entropy"])
    bootstrap = obj.get("bootstrap", True)
    features_per_split = obj.get("features_per_split", 2)
    grid = []
    for n_trees in n_trees_list:
        for depth in depth_list:
            for criterion in criterion_list:
                grid.append(
                    ForestHyperparams(
                        n_trees=int(n_trees),
                        max_depth=None if depth is None else int(depth),
                        criterion=criterion,
                        bootstrap=bool(bootstrap),
                        features_per_split=int(features_per_split),
                        seed=seed,
                    )
                )
    return grid


def load_config(path: Path) -> PipelineConfig:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InvalidInput(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"config file {path} is not valid JSON: {exc}")

    base = path.parent

    def resolve(key: str) -> Path:
        if key not in obj:
            raise InvalidInput(f"config {path} is missing required key {key!r}")
        return (base / obj[key]).resolve()

    length = int(obj.get("geohash_length", 6))
    if not (1 <= length <= 12):
        raise InvalidInput(f"geohash_length must be in [1, 12], got {length}")
    seed = int(obj.get("seed", 0))
    cfg = PipelineConfig(
        accel_csv=resolve("accel_csv"),
        gps_csv=resolve("gps_csv"),
        poi_csv=resolve("poi_csv"),
        taxonomy=resolve("taxonomy"),
        out_dir=(base / obj.get("out_dir", ".")).resolve(),
        geohash_length=length,
        seed=seed,
        activity=_activity_from_dict(obj.get("activity", {})),
        grid=_grid_from_dict(obj.get("grid", {}), seed),
    )
    return cfg


def write_config(path: Path, obj: dict) -> None:
    Path(path).write_text(
        json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
