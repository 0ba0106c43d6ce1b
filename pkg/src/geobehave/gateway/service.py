"""HTTP service for heatmaps and what-if predictions.

All responses are pure functions of the loaded snapshot and the request,
and every class/vote pair is produced by the same predict() call the
library exposes.  The snapshot (model + POIs + observed cells) is
immutable; reloads swap it atomically so in-flight requests finish on
the snapshot they started with.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .. import cohort, environment, geocode, heatmap
from ..environment import EnvAttributes, Poi
from ..errors import GeoBehaveError, InvalidGeohash, InvalidInput
from ..forest import ForestModel, load_model, predict
from ..geocode import CellBounds

MAX_BODY_BYTES = 64 * 1024

ENV_KEYS = ("athletics", "fastfood", "parks", "cafes")


@dataclass
class Snapshot:
    """One consistent view of the serving state."""

    model: ForestModel | None
    pois: list[Poi]
    observed: list[cohort.GeohashProfile]
    default_length: int = 6
    _env_cache: dict[int, dict[str, EnvAttributes]] = field(default_factory=dict)

    def env_for(self, code: str) -> EnvAttributes:
        by_cell = self._env_cache.get(len(code))
        if by_cell is None:
            by_cell = environment.env_attributes_by_cell(self.pois, len(code))
            self._env_cache[len(code)] = by_cell
        return by_cell.get(code, EnvAttributes.zero())

    @property
    def observed_codes(self) -> set[str]:
        return {p.geohash for p in self.observed}


@dataclass
class ServicePaths:
    model_json: Path
    poi_csv: Path
    taxonomy: Path
    dataset_csv: Path | None = None
    dataset_meta: Path | None = None


def _load_snapshot(paths: ServicePaths, default_length: int) -> Snapshot:
    model = None
    if paths.model_json.exists():
        model = load_model(paths.model_json)
    taxonomy = environment.load_taxonomy(paths.taxonomy.read_bytes())
    pois = environment.ingest_pois(paths.poi_csv.read_bytes(), taxonomy)
    observed: list[cohort.GeohashProfile] = []
    if (
        paths.dataset_csv is not None
        and paths.dataset_meta is not None
        and paths.dataset_csv.exists()
        and paths.dataset_meta.exists()
    ):
        ds = cohort.load_dataset(paths.dataset_csv, paths.dataset_meta)
        observed = [
            cohort.GeohashProfile(
                geohash=ds.geohashes[i],
                env=EnvAttributes(*(int(v) for v in ds.env[i])),
                residents=1,
                behavioral_attribute=float(ds.attrs[i]),
                label=cohort.INT_TO_LABEL[int(ds.y[i])],
            )
            for i in range(len(ds))
        ]
    return Snapshot(
        model=model, pois=pois, observed=observed, default_length=default_length
    )


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def _cell_payload(snapshot: Snapshot, code: str) -> dict:
    env = snapshot.env_for(code)
    predicted, fraction = predict(snapshot.model, env)
    return {
        "geohash": code,
        "env": dict(zip(ENV_KEYS, env)),
        "predicted_class": predicted,
        "vote_fraction": fraction,
        "provenance": heatmap.OBSERVED
        if code in snapshot.observed_codes
        else heatmap.IMPUTED,
    }


def _parse_env(obj) -> EnvAttributes | str:
    """EnvAttributes from a request dict, or an error message."""
    if not isinstance(obj, dict):
        return "env_override must be an object"
    unknown = set(obj) - set(ENV_KEYS)
    if unknown:
        return f"unknown env_override keys: {sorted(unknown)}"
    values = []
    for key in ENV_KEYS:
        if key not in obj:
            return f"env_override is missing {key!r}"
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, int):
            return f"{key} must be an integer count"
        if v < 0:
            return f"{key} must be nonnegative, got {v}"
        values.append(v)
    return EnvAttributes(*values)


def create_app(paths: ServicePaths, default_length: int = 6) -> FastAPI:
    app = FastAPI(title="geobehave", docs_url=None, redoc_url=None)
    app.state.paths = paths
    app.state.snapshot = _load_snapshot(paths, default_length)

    def reload_snapshot() -> Snapshot:
        snapshot = _load_snapshot(app.state.paths, default_length)
        app.state.snapshot = snapshot  # atomic swap
        return snapshot

    app.state.reload = reload_snapshot

    @app.get("/api/v1/health")
    def health():
        snapshot: Snapshot = app.state.snapshot
        return {
            "status": "ok" if snapshot.model is not None else "no_model",
            "model_fingerprint": snapshot.model.fingerprint
            if snapshot.model
            else None,
        }

    @app.get("/api/v1/heatmap")
    def get_heatmap(
        min_lat: str | None = None,
        min_lon: str | None = None,
        max_lat: str | None = None,
        max_lon: str | None = None,
        length: str | None = None,
    ):
        snapshot: Snapshot = app.state.snapshot
        if snapshot.model is None:
            return _error(503, "model not loaded")
        try:
            bbox = CellBounds(
                lat_min=float(min_lat),
                lat_max=float(max_lat),
                lon_min=float(min_lon),
                lon_max=float(max_lon),
            )
        except (TypeError, ValueError):
            return _error(400, "min_lat, min_lon, max_lat, max_lon must be numbers")
        try:
            cell_length = (
                snapshot.default_length if length is None else int(length)
            )
        except ValueError:
            return _error(400, "length must be an integer")
        if bbox.lat_min > bbox.lat_max or bbox.lon_min > bbox.lon_max:
            return _error(400, "inverted bounding box")
        try:
            h = heatmap.generate(
                bbox, cell_length, snapshot.model, snapshot.pois, snapshot.observed
            )
        except (InvalidInput, InvalidGeohash) as exc:
            return _error(400, str(exc))
        return Response(
            content=heatmap.export_geojson(h), media_type="application/geo+json"
        )

    @app.get("/api/v1/geohash/{code}")
    def get_cell(code: str):
        snapshot: Snapshot = app.state.snapshot
        if snapshot.model is None:
            return _error(503, "model not loaded")
        try:
            geocode.validate_geohash(code)
        except InvalidGeohash as exc:
            return _error(400, str(exc))
        return _cell_payload(snapshot, code)

    @app.post("/api/v1/whatif")
    async def whatif(request: Request):
        snapshot: Snapshot = app.state.snapshot
        if snapshot.model is None:
            return _error(503, "model not loaded")
        body = await request.body()
        if len(body) > MAX_BODY_BYTES:
            return _error(413, f"request body exceeds {MAX_BODY_BYTES} bytes")
        try:
            obj = json.loads(body)
        except json.JSONDecodeError:
            return _error(400, "request body is not valid JSON")
        if not isinstance(obj, dict):
            return _error(400, "request body must be an object")
        code = obj.get("geohash")
        if not isinstance(code, str):
            return _error(400, "geohash must be a string")
        try:
            geocode.validate_geohash(code)
        except InvalidGeohash as exc:
            return _error(400, str(exc))
        override = _parse_env(obj.get("env_override"))
        if isinstance(override, str):
            return _error(400, override)

        baseline_env = snapshot.env_for(code)
        base_class, base_fraction = predict(snapshot.model, baseline_env)
        mod_class, mod_fraction = predict(snapshot.model, override)
        return {
            "geohash": code,
            "baseline": {
                "predicted_class": base_class,
                "vote_fraction": base_fraction,
                "env": dict(zip(ENV_KEYS, baseline_env)),
            },
            "modified": {
                "predicted_class": mod_class,
                "vote_fraction": mod_fraction,
                "env": dict(zip(ENV_KEYS, override)),
            },
            "model_fingerprint": snapshot.model.fingerprint,
        }

    @app.post("/api/v1/admin/reload")
    def reload_endpoint():
        try:
            snapshot = reload_snapshot()
        except (GeoBehaveError, OSError) as exc:
            return _error(500, f"reload failed: {exc}")
        return {
            "status": "reloaded",
            "model_fingerprint": snapshot.model.fingerprint
            if snapshot.model
            else None,
        }

    return app
