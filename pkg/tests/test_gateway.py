import json
import subprocess
import sys

import numpy as np
import pytest
from fastapi.testclient import TestClient

from geobehave import cohort, environment, forest, geocode
from geobehave.cohort import SynthSpec
from geobehave.environment import EnvAttributes
from geobehave.forest import ForestHyperparams
from geobehave.gateway.cli import main
from geobehave.gateway.service import ServicePaths, create_app

from conftest import run_pipeline_in_memory


@pytest.fixture(scope="module")
def small_bundle(tmp_path_factory):
    """Synthetic inputs + trained artifacts for a 12-cell cohort."""
    out = tmp_path_factory.mktemp("bundle")
    synth = cohort.generate_synthetic(
        SynthSpec(seed=21, n_geohashes=12, residents_per_cell=1)
    )
    synth.write(out)
    ds = run_pipeline_in_memory(synth)
    cohort.save_dataset(ds, out / "dataset.csv", out / "dataset_meta.json")
    hp = ForestHyperparams(n_trees=15, max_depth=3, seed=21)
    model = forest.fit_forest(ds, hp)
    forest.save_model(model, out / "model.json")
    return {"dir": out, "synth": synth, "ds": ds, "model": model}


@pytest.fixture(scope="module")
def client(small_bundle):
    out = small_bundle["dir"]
    app = create_app(
        ServicePaths(
            model_json=out / "model.json",
            poi_csv=out / "pois.csv",
            taxonomy=out / "taxonomy.txt",
            dataset_csv=out / "dataset.csv",
            dataset_meta=out / "dataset_meta.json",
        )
    )
    return TestClient(app)


# ---------------------------------------------------------------------------
# CLI pipeline
# ---------------------------------------------------------------------------

def tighten_grid(config_path):
    obj = json.loads(config_path.read_text())
    obj["grid"] = {"n_trees": [5, 10], "max_depth": [2], "criterion": ["gini"]}
    config_path.write_text(json.dumps(obj))


def test_cli_full_pipeline(tmp_path):
    out = tmp_path / "run"
    assert main(["synth", "--seed", "21", "--cells", "12", "--residents", "1",
                 "--out", str(out)]) == 0
    config = out / "config.json"
    assert config.exists()
    tighten_grid(config)

    for stage in ("ingest", "extract", "dataset", "train", "evaluate"):
        assert main([stage, "--config", str(config)]) == 0, stage

    report = json.loads((out / "ingest_report.json").read_text())
    assert report["individuals_accel"] == 12
    assert report["pois"] > 0

    evaluation = json.loads((out / "evaluation.json").read_text())
    cm = evaluation["confusion"]
    assert cm["tll"] + cm["tlh"] + cm["thl"] + cm["thh"] == 12

    # dataset labels equal planted truth
    truth = {
        row.split(",")[0]: row.split(",")[6]
        for row in (out / "truth.csv").read_text().splitlines()[1:]
    }
    got = {
        row.split(",")[0]: row.split(",")[6]
        for row in (out / "dataset.csv").read_text().splitlines()[1:]
    }
    assert got == truth

    assert main([
        "heatmap", "--config", str(config),
        "--min-lat", "40.64", "--max-lat", "40.67",
        "--min-lon", "22.94", "--max-lon", "22.99",
    ]) == 0
    doc = json.loads((out / "heatmap.geojson").read_text())
    assert doc["type"] == "FeatureCollection"
    assert (out / "heatmap.svg").read_bytes().startswith(b"<?xml")


def test_cli_stage_reruns_are_byte_identical(tmp_path):
    out = tmp_path / "run"
    main(["synth", "--seed", "33", "--cells", "12", "--residents", "1",
          "--out", str(out)])
    config = out / "config.json"
    tighten_grid(config)
    for stage in ("extract", "dataset", "train", "evaluate"):
        assert main([stage, "--config", str(config)]) == 0
    first = {
        name: (out / name).read_bytes()
        for name in ("individuals.csv", "dataset.csv", "model.json", "evaluation.json")
    }
    for stage in ("extract", "dataset", "train", "evaluate"):
        assert main([stage, "--config", str(config)]) == 0
    for name, blob in first.items():
        assert (out / name).read_bytes() == blob, name


def test_cli_synth_rerun_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["synth", "--seed", "5", "--cells", "6", "--residents", "1", "--out", str(a)])
    main(["synth", "--seed", "5", "--cells", "6", "--residents", "1", "--out", str(b)])
    for name in ("accel.csv", "gps.csv", "pois.csv", "taxonomy.txt", "truth.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_cli_train_empty_dataset_exits_2(tmp_path):
    out = tmp_path / "run"
    main(["synth", "--seed", "5", "--cells", "6", "--residents", "1", "--out", str(out)])
    config = out / "config.json"
    (out / "dataset.csv").write_text("geohash,athletics,fastfood,parks,cafes,attr,label\n")
    (out / "dataset_meta.json").write_text(
        '{"threshold": 1.0, "norm_bounds": {"mins": [0,0,0,0], "maxs": [1,1,1,1]}}'
    )
    code = main(["train", "--config", str(config)])
    assert code == 2


def test_cli_missing_config_exits_2(tmp_path):
    assert main(["extract", "--config", str(tmp_path / "nope.json")]) == 2


def test_cli_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2


def test_cli_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["synth", "--seed", "1", "--frobnicate"])
    assert err.value.code == 2


def test_cli_malformed_input_exits_2(tmp_path):
    out = tmp_path / "run"
    main(["synth", "--seed", "5", "--cells", "6", "--residents", "1", "--out", str(out)])
    (out / "accel.csv").write_text("individual_id,t_ms,ax_g,ay_g,az_g\na,notanumber,0,0,1\n")
    assert main(["ingest", "--config", str(out / "config.json")]) == 2


def test_cli_heatmap_stdout(tmp_path, capsysbinary):
    out = tmp_path / "run"
    main(["synth", "--seed", "21", "--cells", "12", "--residents", "1",
          "--out", str(out)])
    config = out / "config.json"
    tighten_grid(config)
    for stage in ("extract", "dataset", "train"):
        assert main([stage, "--config", str(config)]) == 0
    capsysbinary.readouterr()
    assert main([
        "heatmap", "--config", str(config), "--stdout", "geojson",
        "--min-lat", "40.64", "--max-lat", "40.65",
        "--min-lon", "22.94", "--max-lon", "22.95",
    ]) == 0
    doc = json.loads(capsysbinary.readouterr().out)
    assert doc["type"] == "FeatureCollection"
    assert not (out / "heatmap.geojson").exists()
    assert main([
        "heatmap", "--config", str(config), "--stdout", "svg",
        "--min-lat", "40.64", "--max-lat", "40.65",
        "--min-lon", "22.94", "--max-lon", "22.95",
    ]) == 0
    assert capsysbinary.readouterr().out.startswith(b"<?xml")


def test_cli_seed_override_changes_model(tmp_path):
    out = tmp_path / "run"
    main(["synth", "--seed", "21", "--cells", "12", "--residents", "1",
          "--out", str(out)])
    config = out / "config.json"
    tighten_grid(config)
    for stage in ("extract", "dataset"):
        assert main([stage, "--config", str(config)]) == 0
    assert main(["train", "--config", str(config)]) == 0
    base = (out / "model.json").read_bytes()
    assert main(["train", "--config", str(config), "--seed", "99"]) == 0
    overridden = (out / "model.json").read_bytes()
    assert base != overridden
    assert json.loads(overridden)["hyperparams"]["seed"] == 99
    # reverting to the config seed reproduces the original bytes
    assert main(["train", "--config", str(config)]) == 0
    assert (out / "model.json").read_bytes() == base


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "geobehave.gateway.cli", "--help"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "synth" in proc.stdout and "serve" in proc.stdout


# ---------------------------------------------------------------------------
# HTTP service
# ---------------------------------------------------------------------------

def test_health(client, small_bundle):
    r = client.get("/api/v1/health")
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "ok"
    assert body["model_fingerprint"] == small_bundle["model"].fingerprint


def test_heatmap_single_cell(client):
    b = geocode.decode(geocode.encode(geocode.GeoPoint(40.64, 22.94), 6))
    r = client.get(
        "/api/v1/heatmap",
        params={
            "min_lat": b.lat_min, "max_lat": b.lat_max,
            "min_lon": b.lon_min, "max_lon": b.lon_max,
            "length": 6,
        },
    )
    assert r.status_code == 200
    assert r.headers["content-type"].startswith("application/geo+json")
    doc = r.json()
    assert doc["type"] == "FeatureCollection"
    assert len(doc["features"]) == 1


def test_heatmap_inverted_bbox_400(client):
    r = client.get(
        "/api/v1/heatmap",
        params={"min_lat": 41.0, "max_lat": 40.0, "min_lon": 22.0, "max_lon": 23.0},
    )
    assert r.status_code == 400
    assert "error" in r.json()


def test_heatmap_malformed_params_400(client):
    r = client.get(
        "/api/v1/heatmap",
        params={"min_lat": "abc", "max_lat": 41, "min_lon": 22, "max_lon": 23},
    )
    assert r.status_code == 400
    r = client.get("/api/v1/heatmap")
    assert r.status_code == 400


def test_missing_model_gives_503(small_bundle, tmp_path):
    out = small_bundle["dir"]
    app = create_app(
        ServicePaths(
            model_json=tmp_path / "missing_model.json",
            poi_csv=out / "pois.csv",
            taxonomy=out / "taxonomy.txt",
        )
    )
    bare = TestClient(app)
    assert bare.get("/api/v1/health").json()["status"] == "no_model"
    r = bare.get(
        "/api/v1/heatmap",
        params={"min_lat": 40.6, "max_lat": 40.7, "min_lon": 22.9, "max_lon": 23.0},
    )
    assert r.status_code == 503
    assert bare.get("/api/v1/geohash/sx0r4n").status_code == 503
    assert bare.post(
        "/api/v1/whatif",
        json={"geohash": "sx0r4n",
              "env_override": {"athletics": 0, "fastfood": 0, "parks": 0, "cafes": 0}},
    ).status_code == 503


def test_geohash_detail(client, small_bundle):
    code = small_bundle["ds"].geohashes[0]
    r = client.get(f"/api/v1/geohash/{code}")
    assert r.status_code == 200
    body = r.json()
    assert body["geohash"] == code
    assert body["provenance"] == "observed"
    env = EnvAttributes(
        body["env"]["athletics"], body["env"]["fastfood"],
        body["env"]["parks"], body["env"]["cafes"],
    )
    expected_class, expected_vote = forest.predict(small_bundle["model"], env)
    assert body["predicted_class"] == expected_class
    assert body["vote_fraction"] == expected_vote


def test_geohash_empty_cell_still_200(client):
    r = client.get("/api/v1/geohash/s00000")  # nowhere near the POIs
    assert r.status_code == 200
    body = r.json()
    assert body["env"] == {"athletics": 0, "fastfood": 0, "parks": 0, "cafes": 0}
    assert body["provenance"] == "imputed"


def test_geohash_invalid_code_400(client):
    assert client.get("/api/v1/geohash/a1").status_code == 400
    assert client.get("/api/v1/geohash/abcdefghijklm").status_code == 400


def test_whatif_override_equals_baseline(client, small_bundle):
    code = small_bundle["ds"].geohashes[1]
    baseline = client.get(f"/api/v1/geohash/{code}").json()
    r = client.post(
        "/api/v1/whatif", json={"geohash": code, "env_override": baseline["env"]}
    )
    assert r.status_code == 200
    body = r.json()
    assert body["modified"]["predicted_class"] == body["baseline"]["predicted_class"]
    assert body["modified"]["vote_fraction"] == body["baseline"]["vote_fraction"]
    assert body["baseline"]["env"] == baseline["env"]


def test_whatif_matches_out_of_band_predict(client, small_bundle):
    rng = np.random.default_rng(71)
    code = small_bundle["ds"].geohashes[2]
    for _ in range(25):
        override = {
            "athletics": int(rng.integers(0, 9)),
            "fastfood": int(rng.integers(0, 9)),
            "parks": int(rng.integers(0, 9)),
            "cafes": int(rng.integers(0, 9)),
        }
        body = client.post(
            "/api/v1/whatif", json={"geohash": code, "env_override": override}
        ).json()
        expected_class, expected_vote = forest.predict(
            small_bundle["model"],
            EnvAttributes(override["athletics"], override["fastfood"],
                          override["parks"], override["cafes"]),
        )
        assert body["modified"]["predicted_class"] == expected_class
        assert body["modified"]["vote_fraction"] == expected_vote


def test_whatif_repeated_request_identical_bytes(client, small_bundle):
    payload = {
        "geohash": small_bundle["ds"].geohashes[0],
        "env_override": {"athletics": 3, "fastfood": 1, "parks": 2, "cafes": 4},
    }
    a = client.post("/api/v1/whatif", json=payload)
    b = client.post("/api/v1/whatif", json=payload)
    assert a.content == b.content


def test_whatif_negative_count_400(client, small_bundle):
    r = client.post(
        "/api/v1/whatif",
        json={
            "geohash": small_bundle["ds"].geohashes[0],
            "env_override": {"athletics": -1, "fastfood": 0, "parks": 0, "cafes": 0},
        },
    )
    assert r.status_code == 400


def test_whatif_invalid_geohash_400(client):
    r = client.post(
        "/api/v1/whatif",
        json={"geohash": "ax", "env_override":
              {"athletics": 0, "fastfood": 0, "parks": 0, "cafes": 0}},
    )
    assert r.status_code == 400


def test_whatif_bad_json_400(client):
    r = client.post(
        "/api/v1/whatif", content=b"{not json",
        headers={"content-type": "application/json"},
    )
    assert r.status_code == 400


def test_whatif_oversized_body_413(client):
    blob = b'{"geohash": "' + b"s" * (65 * 1024) + b'"}'
    r = client.post(
        "/api/v1/whatif", content=blob, headers={"content-type": "application/json"}
    )
    assert r.status_code == 413


def test_reload_swaps_snapshot(small_bundle, tmp_path):
    out = small_bundle["dir"]
    model_path = tmp_path / "model.json"
    app = create_app(
        ServicePaths(
            model_json=model_path,
            poi_csv=out / "pois.csv",
            taxonomy=out / "taxonomy.txt",
        )
    )
    c = TestClient(app)
    assert c.get("/api/v1/health").json()["status"] == "no_model"
    forest.save_model(small_bundle["model"], model_path)
    r = c.post("/api/v1/admin/reload")
    assert r.status_code == 200
    assert r.json()["model_fingerprint"] == small_bundle["model"].fingerprint
    assert c.get("/api/v1/health").json()["status"] == "ok"
