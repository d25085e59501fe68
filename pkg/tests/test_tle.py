import io
import math
from dataclasses import replace

import pytest
from faker import Faker

from orbit_planner.astro.constants import EARTH, SECONDS_PER_DAY
from orbit_planner.astro.tle import (
    checksum,
    format_implied_exponent,
    format_tle,
    load_catalog,
    mean_motion_to_sma,
    parse_implied_exponent,
    parse_tle,
    sma_to_mean_motion,
    tle_to_elements,
)
from orbit_planner.errors import (
    ChecksumMismatch,
    LineIdentifierError,
    MalformedField,
    NonPositiveMeanMotion,
)

from .conftest import ISS_LINE1, ISS_LINE2, ISS_NAME


def _with_checksum(body: str) -> str:
    return body + str(checksum(body))


class TestChecksum:
    def test_iss_line1(self):
        assert checksum(ISS_LINE1[:68]) == 8

    def test_iss_line2(self):
        assert checksum(ISS_LINE2[:68]) == 5

    def test_blank_line_is_zero(self):
        assert checksum(" " * 68) == 0

    def test_digit_prefix(self):
        assert checksum("1 25544U".ljust(68)) == 1

    def test_minus_counts_as_one(self):
        assert checksum("-".ljust(68)) == 1
        assert checksum("--+".ljust(68)) == 2

    def test_ignores_column_69(self):
        assert checksum(ISS_LINE1) == checksum(ISS_LINE1[:68])


class TestParseTle:
    def test_iss_line2_values(self, iss_lines):
        record = parse_tle(*iss_lines)
        assert record.name == ISS_NAME
        assert record.catalog_number == 25544
        assert record.inclination_deg == 51.6422
        assert record.raan_deg == 41.9330
        assert record.eccentricity == pytest.approx(0.0005197, abs=1e-12)
        assert record.arg_perigee_deg == 351.2436
        assert record.mean_anomaly_deg == 8.8447
        assert record.mean_motion == 15.50954063
        assert record.rev_at_epoch == 44802
        assert record.checksum1 == 8
        assert record.checksum2 == 5

    def test_iss_line1_values(self, iss_lines):
        record = parse_tle(*iss_lines)
        assert record.classification == "U"
        assert record.intl_designator == "98067A"
        assert record.epoch == 24146.63752315
        assert record.epoch_year == 2024
        assert record.epoch_day == pytest.approx(146.63752315)
        assert record.mean_motion_dot == pytest.approx(9.537e-5)
        assert record.mean_motion_ddot == 0.0
        assert record.bstar == pytest.approx(1.7465e-4)
        assert record.element_set_number == 999

    def test_epoch_datetime(self, iss_lines):
        epoch = parse_tle(*iss_lines).epoch_datetime
        assert (epoch.year, epoch.month, epoch.day) == (2024, 5, 25)
        assert (epoch.hour, epoch.minute, epoch.second) == (15, 18, 2)
        assert epoch.utcoffset().total_seconds() == 0

    def test_name_defaults_to_catalog_number(self):
        record = parse_tle(None, ISS_LINE1, ISS_LINE2)
        assert record.name == "25544"

    def test_altered_line2_checksum(self):
        bad = ISS_LINE2[:68] + "6"
        with pytest.raises(ChecksumMismatch) as excinfo:
            parse_tle(None, ISS_LINE1, bad)
        assert excinfo.value.line_number == 2
        assert excinfo.value.expected == 6
        assert excinfo.value.computed == 5

    def test_swapped_lines(self):
        with pytest.raises(LineIdentifierError):
            parse_tle(None, ISS_LINE2, ISS_LINE1)

    def test_short_line(self):
        with pytest.raises(MalformedField):
            parse_tle(None, ISS_LINE1[:60], ISS_LINE2)

    def test_unparsable_inclination(self):
        line2 = _with_checksum(ISS_LINE2[:8] + " 51.6x22" + ISS_LINE2[16:68])
        with pytest.raises(MalformedField) as excinfo:
            parse_tle(None, ISS_LINE1, line2)
        assert excinfo.value.field == "inclination"
        assert excinfo.value.columns == "9-16"

    def test_out_of_range_raan(self):
        line2 = _with_checksum(ISS_LINE2[:17] + "361.0000" + ISS_LINE2[25:68])
        with pytest.raises(MalformedField) as excinfo:
            parse_tle(None, ISS_LINE1, line2)
        assert excinfo.value.field == "raan"

    def test_catalog_number_mismatch(self):
        line2 = _with_checksum("2 25545" + ISS_LINE2[7:68])
        with pytest.raises(MalformedField):
            parse_tle(None, ISS_LINE1, line2)


class TestImpliedExponent:
    @pytest.mark.parametrize(
        "field, expected",
        [(" 17465-3", 1.7465e-4), ("-12345-4", -1.2345e-5), (" 00000+0", 0.0), ("        ", 0.0), ("+50000-1", 0.05)],
    )
    def test_parse(self, field, expected):
        assert parse_implied_exponent(field) == pytest.approx(expected, rel=1e-12)

    def test_malformed(self):
        with pytest.raises(MalformedField):
            parse_implied_exponent(" 1.465-3", "bstar", "54-61")

    def test_format(self):
        assert format_implied_exponent(1.7465e-4) == " 17465-3"
        assert format_implied_exponent(-1.2345e-5) == "-12345-4"
        assert format_implied_exponent(0.0) == " 00000+0"


class TestFormatTle:
    def test_iss_reserializes_exactly(self, iss_lines):
        record = parse_tle(*iss_lines)
        assert format_tle(record) == (ISS_LINE1, ISS_LINE2)

    def test_reserialized_checksums_match(self, small_catalog_bytes):
        for record in load_catalog(small_catalog_bytes).records:
            for line, stored in zip(format_tle(record), (record.checksum1, record.checksum2)):
                assert len(line) == 69
                assert int(line[68]) == checksum(line) == stored

    def test_generated_names_survive_reload(self, iss_lines):
        fake = Faker()
        fake.seed_instance(7)
        record = parse_tle(*iss_lines)
        names, lines = [], []
        for index in range(5):
            name = f"{fake.word().upper()} {index + 1}"
            names.append(name)
            lines.extend([name, *format_tle(replace(record, name=name))])
        result = load_catalog("\n".join(lines).encode("ascii"))
        assert result.errors == []
        assert [r.name for r in result.records] == names


class TestMeanMotion:
    def test_iss_semi_major_axis(self):
        assert mean_motion_to_sma(15.50954063) == pytest.approx(6792.0, abs=2.0)

    def test_geosynchronous(self):
        assert mean_motion_to_sma(1.0027) == pytest.approx(42164.0, abs=15.0)

    def test_round_trip_7000(self):
        n_rad = math.sqrt(EARTH.mu_earth / 7000.0**3)
        n_rev_day = n_rad * SECONDS_PER_DAY / (2 * math.pi)
        assert mean_motion_to_sma(n_rev_day) == pytest.approx(7000.0, rel=1e-12)

    def test_round_trip_range(self):
        for a in (6500.0, 7000.0, 12000.0, 26560.0, 45000.0):
            assert mean_motion_to_sma(sma_to_mean_motion(a)) == pytest.approx(a, rel=1e-6)

    @pytest.mark.parametrize("n", [0.0, -1.0])
    def test_non_positive(self, n):
        with pytest.raises(NonPositiveMeanMotion):
            mean_motion_to_sma(n)
        with pytest.raises(ValueError):
            mean_motion_to_sma(n)


class TestTleToElements:
    def test_iss(self, iss_lines):
        el = tle_to_elements(parse_tle(*iss_lines))
        assert el.a == pytest.approx(6792.0, abs=2.0)
        assert el.i == pytest.approx(0.9013, abs=1e-4)
        assert el.e == pytest.approx(0.0005197)
        assert el.raan == pytest.approx(math.radians(41.9330))

    def test_perigee_gives_zero_true_anomaly(self, iss_lines):
        line2 = _with_checksum(ISS_LINE2[:43] + "  0.0000" + ISS_LINE2[51:68])
        el = tle_to_elements(parse_tle(None, ISS_LINE1, line2))
        assert el.true_anomaly == pytest.approx(0.0, abs=1e-12)

    def test_circular_true_anomaly_equals_mean(self):
        deg = math.degrees(1.0)
        line2 = _with_checksum(
            ISS_LINE2[:26] + "0000000" + ISS_LINE2[33:43] + f"{deg:8.4f}" + ISS_LINE2[51:68]
        )
        el = tle_to_elements(parse_tle(None, ISS_LINE1, line2))
        assert el.true_anomaly == pytest.approx(math.radians(float(f"{deg:8.4f}")), abs=1e-9)


class TestLoadCatalog:
    def test_iss_fixture(self, fixtures_dir):
        with open(fixtures_dir / "iss.tle", "rb") as handle:
            result = load_catalog(handle)
        assert len(result.records) == 1
        assert result.errors == []

    def test_empty_stream(self):
        result = load_catalog(io.BytesIO(b""))
        assert result.records == []
        assert result.errors == []

    def test_mixed_two_and_three_line_groups(self, small_catalog_bytes):
        result = load_catalog(small_catalog_bytes)
        assert [r.catalog_number for r in result.records] == [25544, 33591, 43013]
        assert [r.name for r in result.records] == ["ISS (ZARYA)", "NOAA 19", "43013"]
        assert result.errors == []

    def test_corrupted_group_between_valid_ones(self, small_catalog_bytes):
        lines = small_catalog_bytes.decode("ascii").splitlines()
        noaa_line2 = lines[5]
        lines[5] = noaa_line2[:68] + str((int(noaa_line2[68]) + 1) % 10)
        result = load_catalog("\n".join(lines) + "\n")
        assert [r.catalog_number for r in result.records] == [25544, 43013]
        assert len(result.errors) == 1
        line_number, error = result.errors[0]
        assert line_number == 4
        assert isinstance(error, ChecksumMismatch)

    def test_bad_line1_identifier_resumes_at_next_group(self, small_catalog_bytes):
        lines = small_catalog_bytes.decode("ascii").splitlines()
        lines[4] = "X" + lines[4][1:]
        result = load_catalog("\n".join(lines) + "\n")
        assert [r.catalog_number for r in result.records] == [25544, 43013]
        assert result.errors[0][0] == 4
        assert isinstance(result.errors[0][1], LineIdentifierError)
        assert len(result.errors) == 1

    def test_bad_line1_identifier_keeps_next_name(self, small_catalog_bytes):
        lines = small_catalog_bytes.decode("ascii").splitlines()
        lines[1] = "X" + lines[1][1:]
        result = load_catalog("\n".join(lines) + "\n")
        assert [r.name for r in result.records] == ["NOAA 19", "43013"]
        assert [line for line, _ in result.errors] == [1]

    def test_unnamed_junk_before_named_group(self):
        result = load_catalog("\n".join(["garbage", ISS_NAME, ISS_LINE1, ISS_LINE2]) + "\n")
        assert [r.name for r in result.records] == [ISS_NAME]
        assert [line for line, _ in result.errors] == [1]

    def test_orphan_second_line(self):
        result = load_catalog(ISS_LINE2 + "\n" + ISS_NAME + "\n" + ISS_LINE1 + "\n" + ISS_LINE2 + "\n")
        assert len(result.records) == 1
        assert result.errors[0][0] == 1
        assert isinstance(result.errors[0][1], LineIdentifierError)

    def test_truncated_group(self):
        result = load_catalog(ISS_NAME + "\n" + ISS_LINE1 + "\n")
        assert result.records == []
        assert isinstance(result.errors[0][1], MalformedField)

    def test_blank_lines_and_crlf(self):
        text = "\r\n".join(["", ISS_NAME, ISS_LINE1, ISS_LINE2, "", ""])
        result = load_catalog(text.encode("ascii"))
        assert len(result.records) == 1
