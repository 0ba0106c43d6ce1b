import numpy as np
import pytest

from geobehave import environment, geocode
from geobehave.environment import EnvAttributes, Poi
from geobehave.errors import ParseError
from geobehave.geocode import GeoPoint

TAXONOMY = b"""# tag mapping
stadium=AthleticsSports
pitch=AthleticsSports
fast_food=FastFood
park=PublicPark
cafe=Cafe
kiosk=Other
"""

POI_HEADER = "id,lat,lon,tag\n"


def cell_point(code: str, u: float, v: float) -> GeoPoint:
    b = geocode.decode(code)
    return GeoPoint(
        b.lat_min + u * (b.lat_max - b.lat_min),
        b.lon_min + v * (b.lon_max - b.lon_min),
    )


def test_load_taxonomy():
    tax = environment.load_taxonomy(TAXONOMY)
    assert tax["stadium"] == "AthleticsSports"
    assert tax["kiosk"] == "Other"
    assert len(tax) == 6


def test_load_taxonomy_rejects_unknown_category():
    with pytest.raises(ParseError):
        environment.load_taxonomy(b"gym=Gymnasium\n")
    with pytest.raises(ParseError):
        environment.load_taxonomy(b"no separator here\n")


def test_ingest_maps_tags_through_taxonomy():
    tax = environment.load_taxonomy(TAXONOMY)
    csv = POI_HEADER + "p1,40.64,22.94,stadium\n"
    pois = environment.ingest_pois(csv.encode(), tax)
    assert pois[0].category == "AthleticsSports"


def test_ingest_unknown_tag_becomes_other():
    tax = environment.load_taxonomy(TAXONOMY)
    csv = POI_HEADER + "p1,40.64,22.94,pharmacy\n"
    pois = environment.ingest_pois(csv.encode(), tax)
    assert pois[0].category == "Other"


def test_ingest_bad_latitude_raises():
    tax = environment.load_taxonomy(TAXONOMY)
    csv = POI_HEADER + "p1,91.0,22.94,stadium\n"
    with pytest.raises(ParseError) as err:
        environment.ingest_pois(csv.encode(), tax)
    assert err.value.line == 2


def test_env_attributes_counts_by_category():
    code = geocode.encode(GeoPoint(40.64, 22.94), 6)
    pois = [
        Poi("a", cell_point(code, 0.2, 0.2), "PublicPark"),
        Poi("b", cell_point(code, 0.4, 0.6), "PublicPark"),
        Poi("c", cell_point(code, 0.6, 0.3), "AthleticsSports"),
        Poi("d", cell_point(code, 0.8, 0.8), "Other"),  # excluded
    ]
    assert environment.env_attributes(code, pois) == EnvAttributes(1, 0, 2, 0)


def test_env_attributes_empty_cell():
    code = geocode.encode(GeoPoint(40.64, 22.94), 6)
    assert environment.env_attributes(code, []) == EnvAttributes(0, 0, 0, 0)


def test_poi_on_shared_edge_counted_once():
    code = geocode.encode(GeoPoint(40.64, 22.94), 6)
    b = geocode.decode(code)
    east = geocode.encode(GeoPoint((b.lat_min + b.lat_max) / 2, b.lon_max), 6)
    edge_poi = Poi("e", GeoPoint((b.lat_min + b.lat_max) / 2, b.lon_max), "Cafe")
    ours = environment.env_attributes(code, [edge_poi])
    theirs = environment.env_attributes(east, [edge_poi])
    assert sum(ours) + sum(theirs) == 1
    assert sum(theirs) == 1  # >= midpoint goes east


def test_additivity_over_child_cells():
    code = geocode.encode(GeoPoint(40.64, 22.94), 5)
    rng = np.random.default_rng(13)
    cats = ["AthleticsSports", "FastFood", "PublicPark", "Cafe", "Other"]
    pois = [
        Poi(
            f"p{i}",
            cell_point(code, float(rng.uniform(0.01, 0.99)), float(rng.uniform(0.01, 0.99))),
            cats[int(rng.integers(0, len(cats)))],
        )
        for i in range(200)
    ]
    parent = environment.env_attributes(code, pois)
    children = [code + c for c in geocode.BASE32]
    child_sum = np.sum(
        [environment.env_attributes(child, pois) for child in children], axis=0
    )
    assert tuple(child_sum) == tuple(parent)


def test_bulk_counting_matches_per_cell():
    rng = np.random.default_rng(19)
    cats = ["AthleticsSports", "FastFood", "PublicPark", "Cafe"]
    pois = [
        Poi(
            f"p{i}",
            GeoPoint(float(rng.uniform(40.5, 40.8)), float(rng.uniform(22.8, 23.1))),
            cats[i % 4],
        )
        for i in range(300)
    ]
    by_cell = environment.env_attributes_by_cell(pois, 6)
    assert sum(sum(v) for v in by_cell.values()) == 300
    for code, env in list(by_cell.items())[:10]:
        assert environment.env_attributes(code, pois) == env


def test_ingest_deterministic_and_order_independent():
    tax = environment.load_taxonomy(TAXONOMY)
    rows = [
        "p1,40.641,22.941,stadium",
        "p2,40.642,22.942,park",
        "p3,40.643,22.943,cafe",
    ]
    fwd = environment.ingest_pois((POI_HEADER + "\n".join(rows) + "\n").encode(), tax)
    rev = environment.ingest_pois(
        (POI_HEADER + "\n".join(reversed(rows)) + "\n").encode(), tax
    )
    code = geocode.encode(GeoPoint(40.642, 22.942), 5)
    assert environment.env_attributes(code, fwd) == environment.env_attributes(
        code, rev
    )
