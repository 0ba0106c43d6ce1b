import numpy as np
import pytest

from geobehave import cohort, geocode
from geobehave.cohort import GeohashProfile, NormBounds, SynthSpec
from geobehave.environment import EnvAttributes
from geobehave.errors import DegenerateLabels, NoData, NoResidents


def profile(code: str, env=(1, 2, 3, 4), attr: float = 300.0) -> GeohashProfile:
    return GeohashProfile(code, EnvAttributes(*env), 2, attr)


# ---------------------------------------------------------------------------
# aggregation and labeling
# ---------------------------------------------------------------------------

def test_behavioral_attribute_mean():
    assert cohort.behavioral_attribute([300.0, 400.0]) == 350.0
    assert cohort.behavioral_attribute([343.9]) == 343.9


def test_behavioral_attribute_empty_raises():
    with pytest.raises(NoResidents):
        cohort.behavioral_attribute([])


def test_label_strict_threshold():
    assert cohort.label(350.0, 343.9) == "High"
    assert cohort.label(343.9, 343.9) == "Low"  # equality goes Low
    assert cohort.label(100.0, 343.9) == "Low"


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------

def test_fit_normalizer_bounds():
    profiles = [profile("s00000", (0, 5, 2, 1)), profile("s00001", (2, 5, 8, 0)),
                profile("s00002", (4, 5, 5, 3))]
    bounds = cohort.fit_normalizer(profiles)
    assert bounds.mins == (0.0, 5.0, 2.0, 0.0)
    assert bounds.maxs == (4.0, 5.0, 8.0, 3.0)
    assert bounds.degenerate_dims() == (1,)


def test_fit_normalizer_single_profile_all_degenerate():
    bounds = cohort.fit_normalizer([profile("s00000", (1, 2, 3, 4))])
    assert bounds.degenerate_dims() == (0, 1, 2, 3)


def test_fit_normalizer_empty_raises():
    with pytest.raises(NoData):
        cohort.fit_normalizer([])


def test_normalize_midpoint_clamp_degenerate():
    bounds = NormBounds(mins=(0.0, 5.0, 0.0, 0.0), maxs=(4.0, 5.0, 4.0, 4.0))
    out = cohort.normalize(EnvAttributes(2, 7, 9, 0), bounds)
    assert out[0] == 0.5
    assert out[1] == 0.0  # degenerate dimension
    assert out[2] == 1.0  # clamped
    assert out[3] == 0.0


def test_normalize_monotone_per_dimension():
    bounds = NormBounds(mins=(0.0, 0.0, 0.0, 0.0), maxs=(10.0, 10.0, 10.0, 10.0))
    prev = -1.0
    for v in range(11):
        out = cohort.normalize(EnvAttributes(v, 0, 0, 0), bounds)
        assert out[0] >= prev
        prev = out[0]


def test_normalize_identity_bounds_idempotent():
    bounds = NormBounds(mins=(0.0,) * 4, maxs=(1.0,) * 4)
    out = cohort.normalize(EnvAttributes(1, 0, 1, 0), bounds)
    assert list(out) == [1.0, 0.0, 1.0, 0.0]


# ---------------------------------------------------------------------------
# dataset construction
# ---------------------------------------------------------------------------

def test_build_dataset_two_profiles():
    ds = cohort.build_dataset(
        [profile("s00001", attr=200.0), profile("s00000", attr=100.0)]
    )
    assert ds.threshold == 150.0
    assert ds.geohashes == ["s00000", "s00001"]  # canonical order
    assert list(ds.y) == [0, 1]


def test_build_dataset_rejects_equal_attributes():
    with pytest.raises(DegenerateLabels):
        cohort.build_dataset([profile("s00000"), profile("s00001")])


def test_build_dataset_order_invariant():
    profiles = [
        profile("s00002", (0, 1, 2, 3), 100.0),
        profile("s00000", (3, 2, 1, 0), 300.0),
        profile("s00001", (1, 1, 1, 1), 200.0),
    ]
    a = cohort.build_dataset(profiles)
    b = cohort.build_dataset(list(reversed(profiles)))
    assert a.geohashes == b.geohashes
    assert np.array_equal(a.X, b.X)
    assert np.array_equal(a.y, b.y)


def test_build_dataset_42_cells_split_like_published_table():
    # 24 attributes below the mean, 18 above, mirroring the published
    # row sums (21+3 and 5+13)
    profiles = [
        profile(geocode.encode(geocode.GeoPoint(40.0 + 0.01 * i, 22.0), 6),
                (i % 5, i % 3, i % 4, i % 2), 300.0 if i < 24 else 410.0)
        for i in range(42)
    ]
    ds = cohort.build_dataset(profiles)
    assert len(ds) == 42
    low = int((ds.y == 0).sum())
    high = int((ds.y == 1).sum())
    assert (low, high) == (24, 18)
    assert low + high == 42


def test_build_dataset_both_classes_nonempty_property():
    rng = np.random.default_rng(43)
    for _ in range(20):
        attrs = rng.uniform(100, 900, size=10)
        if np.all(attrs == attrs[0]):
            continue
        profiles = [
            profile(geocode.encode(geocode.GeoPoint(40 + 0.01 * i, 22.0), 6),
                    (i, i, i, i), float(a))
            for i, a in enumerate(attrs)
        ]
        ds = cohort.build_dataset(profiles)
        assert 0 < int(ds.y.sum()) < len(ds)
        assert ds.X.min() >= 0.0 and ds.X.max() <= 1.0


def test_dataset_round_trip(tmp_path, clean_dataset):
    csv_path = tmp_path / "dataset.csv"
    meta_path = tmp_path / "dataset_meta.json"
    cohort.save_dataset(clean_dataset, csv_path, meta_path)
    loaded = cohort.load_dataset(csv_path, meta_path)
    assert loaded.geohashes == clean_dataset.geohashes
    assert np.array_equal(loaded.y, clean_dataset.y)
    assert np.array_equal(loaded.env, clean_dataset.env)
    assert np.array_equal(loaded.X, clean_dataset.X)
    assert loaded.attrs == pytest.approx(clean_dataset.attrs)
    assert loaded.threshold == clean_dataset.threshold
    assert loaded.norm_bounds == clean_dataset.norm_bounds


def test_load_dataset_missing_file_raises(tmp_path):
    meta = tmp_path / "meta.json"
    meta.write_text('{"threshold": 1.0, "norm_bounds": {"mins": [0,0,0,0], "maxs": [1,1,1,1]}}')
    with pytest.raises(FileNotFoundError):
        cohort.load_dataset(tmp_path / "nope.csv", meta)


# ---------------------------------------------------------------------------
# synthetic cohorts
# ---------------------------------------------------------------------------

def test_synth_reproducible_byte_identical():
    a = cohort.generate_synthetic(SynthSpec(seed=11, n_geohashes=6))
    b = cohort.generate_synthetic(SynthSpec(seed=11, n_geohashes=6))
    assert a.accel_csv == b.accel_csv
    assert a.gps_csv == b.gps_csv
    assert a.poi_csv == b.poi_csv
    assert a.taxonomy == b.taxonomy


def test_synth_seed_changes_output():
    a = cohort.generate_synthetic(SynthSpec(seed=11, n_geohashes=6))
    b = cohort.generate_synthetic(SynthSpec(seed=12, n_geohashes=6))
    assert a.poi_csv != b.poi_csv


def test_synth_positive_weights_rank_by_effect_score():
    spec = SynthSpec(
        seed=3, n_geohashes=8, effect_weights=(40.0, 10.0, 25.0, 5.0), noise_sd=0.0
    )
    synth = cohort.generate_synthetic(spec)
    weights = np.array(spec.effect_weights)
    scores = [float(weights @ np.asarray(p.env, dtype=float)) for p in synth.profiles]
    attrs = [p.behavioral_attribute for p in synth.profiles]
    assert np.argsort(scores, kind="stable").tolist() == np.argsort(
        attrs, kind="stable"
    ).tolist()


def test_synth_clean_pipeline_recovers_planted_labels(clean_synth, clean_dataset):
    truth = {p.geohash: p for p in clean_synth.profiles}
    assert set(clean_dataset.geohashes) == set(truth)
    for i, code in enumerate(clean_dataset.geohashes):
        assert tuple(clean_dataset.env[i]) == tuple(truth[code].env)
        assert cohort.INT_TO_LABEL[int(clean_dataset.y[i])] == truth[code].label
        assert clean_dataset.attrs[i] == pytest.approx(
            truth[code].behavioral_attribute, abs=1e-9
        )


def test_synth_rejects_tiny_cohort():
    with pytest.raises(NoData):
        cohort.generate_synthetic(SynthSpec(seed=1, n_geohashes=3))


def test_synth_write_layout(tmp_path):
    synth = cohort.generate_synthetic(SynthSpec(seed=5, n_geohashes=4, residents_per_cell=1))
    paths = synth.write(tmp_path)
    for p in paths.values():
        assert p.exists()
    header = paths["truth"].read_text().splitlines()[0]
    assert header == "geohash,athletics,fastfood,parks,cafes,attr,label"
