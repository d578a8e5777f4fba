import pytest

from healthcep.config import Config, parse_anchors
from healthcep.errors import DataError


def test_defaults():
    c = Config.load(None)
    assert c.max_gap == 60 and c.spike.baseline_window == 120 and c.climb.max_gap == 30
    assert c.profile.body_mass == 70 and c.max_km == 50 and c.aliases["HR"] == "Heartrate"


def test_load(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text(
        "[detectors]\nmax_gap = 30  # seconds\n"
        "[detect-spike]\ndelta = 20\n"
        "[detect-climb]\nmin_total_gain = 5\n"
        "[subject]\nbody_mass = 80\nrr_anchors = 60:10, 190:50\n"
        "[spo2]\nanchors = 0:99, 3000:90\n"
        "[exposome]\nmax_km = 20\n"
        "[aliases]\nBPM = Heartrate\n"
    )
    c = Config.load(p)
    assert c.max_gap == 30 and c.spike.max_gap == 30 and c.spike.delta == 20
    assert c.climb.min_total_gain == 5
    assert c.profile.body_mass == 80 and c.profile.rr_anchors == ((60, 10), (190, 50))
    assert c.spo2_anchors == ((0, 99), (3000, 90))
    assert c.max_km == 20 and c.aliases["BPM"] == "Heartrate" and c.aliases["HR"] == "Heartrate"


def test_bad(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[subject]\nbody_mass = -1\n")
    with pytest.raises(DataError):
        Config.load(p)
    with pytest.raises(DataError):
        parse_anchors("60-12")
    with pytest.raises(DataError):
        Config.load(tmp_path / "missing.ini")
