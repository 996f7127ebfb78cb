import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from satqkd.errors import ConfigError, DomainError
from satqkd.orbitpass import (
    OrbitConfig,
    elevation_at,
    generate_pass,
    pass_duration_above,
    pass_table,
    slant_range,
)

CFG = OrbitConfig()


# Law-of-cosines root found with mpmath at 40 digits (/root/notes/oracles.py).
@pytest.mark.parametrize("elevation_deg, expected", [
    (90, 750000.0),
    (45, 1009895.36104832),
    (10, 2261613.74134007),
    (0, 3181037.56658107),
])
def test_slant_range_matches_law_of_cosines(elevation_deg, expected):
    assert slant_range(math.radians(elevation_deg), CFG) == pytest.approx(expected, rel=1e-12)


def test_slant_range_outside_domain():
    with pytest.raises(DomainError):
        slant_range(-0.01, CFG)
    with pytest.raises(DomainError):
        slant_range(math.pi / 2 + 0.01, CFG)


def test_pass_duration_matches_arc_time():
    # 2 * (acos(Re cos e / a) - e) / n at 40 digits
    assert pass_duration_above(CFG, CFG.min_elevation) == pytest.approx(605.551471904587, rel=1e-12)


def test_pass_duration_edges():
    assert pass_duration_above(CFG, math.pi / 2) == 0.0
    with pytest.raises(DomainError):
        pass_duration_above(CFG, math.radians(5))


def test_generated_pass_is_symmetric_and_above_mask():
    samples = generate_pass(CFG)
    assert len(samples) % 2 == 1
    mid = len(samples) // 2
    assert samples[mid].t == 0.0
    assert samples[mid].elevation == pytest.approx(math.pi / 2)
    for a, b in zip(samples, reversed(samples)):
        assert a.t == -b.t
        assert a.elevation == b.elevation
    assert all(s.elevation >= CFG.min_elevation for s in samples)
    assert samples[-1].t - samples[0].t <= pass_duration_above(CFG, CFG.min_elevation)


def test_offset_pass_culminates_at_requested_elevation():
    cfg = OrbitConfig(max_pass_elevation=math.radians(45))
    assert elevation_at(0.0, cfg) == pytest.approx(math.radians(45), abs=1e-12)
    assert pass_duration_above(cfg, cfg.min_elevation) < pass_duration_above(CFG, CFG.min_elevation)


def test_pass_table_columns():
    table = pass_table(generate_pass(CFG))
    assert list(table) == ["t_s", "elevation_deg", "zenith_deg", "slant_range_m"]
    assert all(len(col) == len(table["t_s"]) for col in table.values())
    assert (table["elevation_deg"] + table["zenith_deg"]) == pytest.approx(90.0)


@pytest.mark.parametrize("field, value", [("altitude", -1.0), ("time_step", 0.0),
                                          ("min_elevation", 0.0)])
def test_invalid_config_names_field(field, value):
    with pytest.raises(ConfigError, match=field):
        OrbitConfig(**{field: value})


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, math.pi / 2), st.floats(0.0, math.pi / 2))
def test_slant_range_decreases_with_elevation(e1, e2):
    lo, hi = sorted((e1, e2))
    assert slant_range(lo, CFG) >= slant_range(hi, CFG)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 300.0))
def test_elevation_symmetric_in_time(t):
    assert elevation_at(t, CFG) == elevation_at(-t, CFG)
