import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# Tiny fixture city: 5 POIs around a plaza, 3 users over two days.
POIS_TEXT = """\
poi_id;name;category;lat;lon
P1;Old Fort;historic;45.0000;7.0000
P2;City Museum;museum;45.0010;7.0010
P3;Grand Plaza;square;45.0005;7.0020
P4;Harbor Walk;waterfront;45.0020;7.0005
P5;Botanic Garden;park;45.0030;7.0030
"""

# user u1: two photos at P1 then P2, P3 (one day), later a second day at P4.
# user u2: P2 -> P3 -> P5 in one day.
# user u3: single photo (length-1 trajectory).
VISITS_TEXT = """\
photo_id;user_id;timestamp;poi_id
ph01;u1;1600000000;P1
ph02;u1;1600000600;P1
ph03;u1;1600002400;P2
ph04;u1;1600004800;P3
ph05;u1;1600060000;P4
ph06;u2;1600010000;P2
ph07;u2;1600012000;P3
ph08;u2;1600014500;P5
ph09;u3;1600020000;P1
"""


@pytest.fixture
def pois_file(tmp_path):
    path = tmp_path / "pois.csv"
    path.write_text(POIS_TEXT, encoding="utf-8")
    return path


@pytest.fixture
def visits_file(tmp_path):
    path = tmp_path / "visits.csv"
    path.write_text(VISITS_TEXT, encoding="utf-8")
    return path
