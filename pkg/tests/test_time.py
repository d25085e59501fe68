import pytest

from orbit_planner.utils.time import format_duration, get_timezone, now_in_timezone


@pytest.mark.parametrize(
    "seconds, expected",
    [(0, "0:00:00"), (59.6, "0:01:00"), (3661, "1:01:01"), (36000, "10:00:00")],
)
def test_format_duration(seconds, expected):
    assert format_duration(seconds) == expected


def test_now_is_aware():
    now = now_in_timezone("UTC")
    assert now.utcoffset().total_seconds() == 0


def test_named_timezone():
    assert get_timezone("Asia/Kolkata").zone == "Asia/Kolkata"
