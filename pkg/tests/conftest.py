import numpy as np
import pytest

from geobehave import cohort, environment, sensing


def run_pipeline_in_memory(synth: cohort.SynthCohort) -> cohort.Dataset:
    """Raw generated streams -> cell dataset, without touching disk."""
    accel = sensing.parse_streams(synth.accel_csv, "accel")
    gps = sensing.parse_streams(synth.gps_csv, "gps")
    cfg = sensing.ActivityConfig()
    by_cell: dict[str, list[float]] = {}
    for ident in sorted(accel):
        rec = sensing.build_individual_record(
            ident, accel[ident], gps.get(ident, []), cfg, cohort.SYNTH_GEOHASH_LENGTH
        )
        if sensing.eligible(rec, cfg) and rec.indicator is not None:
            by_cell.setdefault(rec.residence, []).append(rec.indicator)
    taxonomy = environment.load_taxonomy(synth.taxonomy)
    pois = environment.ingest_pois(synth.poi_csv, taxonomy)
    env_by_cell = environment.env_attributes_by_cell(
        pois, cohort.SYNTH_GEOHASH_LENGTH
    )
    profiles = [
        cohort.GeohashProfile(
            geohash=code,
            env=env_by_cell.get(code, environment.EnvAttributes.zero()),
            residents=len(indicators),
            behavioral_attribute=cohort.behavioral_attribute(indicators),
        )
        for code, indicators in sorted(by_cell.items())
    ]
    return cohort.build_dataset(profiles)


@pytest.fixture(scope="session")
def clean_synth() -> cohort.SynthCohort:
    return cohort.generate_synthetic(cohort.SynthSpec(seed=7, noise_sd=0.0))


@pytest.fixture(scope="session")
def clean_dataset(clean_synth) -> cohort.Dataset:
    return run_pipeline_in_memory(clean_synth)


@pytest.fixture(scope="session")
def small_dataset() -> cohort.Dataset:
    """A tiny deterministic dataset for fast forest tests."""
    rng = np.random.default_rng(42)
    profiles = []
    for i in range(14):
        active = i % 2 == 0
        env = environment.EnvAttributes(
            athletics_sports=int(rng.integers(4, 7)) if active else int(rng.integers(0, 2)),
            fast_food=int(rng.integers(0, 2)) if active else int(rng.integers(4, 7)),
            public_parks=int(rng.integers(3, 6)) if active else int(rng.integers(0, 2)),
            cafes=int(rng.integers(5, 8)) if active else int(rng.integers(1, 4)),
        )
        attr = 600.0 + i if active else 200.0 + i
        profiles.append(cohort.GeohashProfile(f"sx0r{i:02d}", env, 2, attr))
    return cohort.build_dataset(profiles)
