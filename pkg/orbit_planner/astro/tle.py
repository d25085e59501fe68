"""
Two-Line Element parsing, validation and catalog ingestion.

Columns follow the NORAD fixed-width layout (1-indexed, inclusive):

    Line 1: 3-7 catalog number, 8 classification, 10-17 international
            designator, 19-32 epoch (YYDDD.DDDDDDDD), 34-43 first derivative
            of mean motion, 45-52 second derivative (implied exponent),
            54-61 BSTAR (implied exponent), 63 ephemeris type, 65-68 element
            set number, 69 checksum
    Line 2: 3-7 catalog number, 9-16 inclination, 18-25 RAAN, 27-33
            eccentricity (implied leading decimal point), 35-42 argument of
            perigee, 44-51 mean anomaly, 53-63 mean motion, 64-68 revolution
            number at epoch, 69 checksum
"""

import math
import re
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import BinaryIO, List, NamedTuple, Optional, Tuple, Union

from ..errors import (
    ChecksumMismatch,
    LineIdentifierError,
    MalformedField,
    NonPositiveMeanMotion,
    TleError,
)
from .constants import EARTH, SECONDS_PER_DAY, PhysicalConstants
from .orbit import KeplerianElements, mean_to_true

_IMPLIED_EXPONENT = re.compile(r"^([ +-]?)(\d{1,5})([+-]\d)$")


@dataclass(frozen=True)
class TleRecord:
    """One parsed two-line element set"""

    name: str
    catalog_number: int
    classification: str
    intl_designator: str
    epoch: float  # YYDDD.DDDDDDDD exactly as printed
    mean_motion_dot: float  # rev/day^2
    mean_motion_ddot: float  # rev/day^3
    bstar: float  # 1/earth radii
    ephemeris_type: int
    element_set_number: int
    inclination_deg: float
    raan_deg: float
    eccentricity: float
    arg_perigee_deg: float
    mean_anomaly_deg: float
    mean_motion: float  # rev/day
    rev_at_epoch: int
    checksum1: int
    checksum2: int

    @property
    def epoch_year(self) -> int:
        """Four-digit epoch year (57-99 -> 1900s, 00-56 -> 2000s)"""
        yy = int(self.epoch // 1000)
        return 1900 + yy if yy >= 57 else 2000 + yy

    @property
    def epoch_day(self) -> float:
        return self.epoch - 1000 * int(self.epoch // 1000)

    @property
    def epoch_datetime(self) -> datetime:
        """Epoch as an aware UTC datetime (day 1.0 is 1 January 00:00)"""
        return datetime(self.epoch_year, 1, 1, tzinfo=timezone.utc) + timedelta(days=self.epoch_day - 1.0)


class CatalogLoadResult(NamedTuple):
    records: List[TleRecord]
    errors: List[Tuple[int, TleError]]


def checksum(line: str) -> int:
    """Modulo-10 checksum over the first 68 columns; '-' counts as 1"""
    total = 0
    for ch in line[:68]:
        if ch.isdigit():
            total += int(ch)
        elif ch == "-":
            total += 1
    return total % 10


def parse_implied_exponent(field: str, name: str = "field", columns: str = "?") -> float:
    """Parse an assumed-decimal field such as ' 17465-3' (0.17465e-3)"""
    if not field.strip():
        return 0.0
    match = _IMPLIED_EXPONENT.match(field.strip())
    if not match:
        raise MalformedField(name, columns, field)
    sign, mantissa, exponent = match.groups()
    sign = "-" if sign == "-" else ""
    return float(f"{sign}0.{mantissa}e{exponent}")


def format_implied_exponent(value: float) -> str:
    """Inverse of parse_implied_exponent, always 8 characters wide"""
    if value == 0.0:
        return " 00000+0"
    sign = "-" if value < 0 else " "
    exponent = math.floor(math.log10(abs(value))) + 1
    digits = int(round(abs(value) / 10.0**exponent * 1e5))
    if digits >= 100000:
        digits //= 10
        exponent += 1
    exp_sign = "-" if exponent < 0 else "+"
    return f"{sign}{digits:05d}{exp_sign}{abs(exponent)}"


def _field(line: str, start: int, end: int) -> str:
    return line[start - 1:end]


def _float_field(line: str, start: int, end: int, name: str) -> float:
    raw = _field(line, start, end)
    try:
        return float(raw)
    except ValueError:
        raise MalformedField(name, f"{start}-{end}", raw) from None


def _int_field(line: str, start: int, end: int, name: str, blank_as_zero: bool = False) -> int:
    raw = _field(line, start, end)
    if blank_as_zero and not raw.strip():
        return 0
    try:
        return int(raw)
    except ValueError:
        raise MalformedField(name, f"{start}-{end}", raw) from None


def _check_range(value: float, low: float, high: float, name: str, columns: str, upper_open: bool = True):
    ok = low <= value < high if upper_open else low <= value <= high
    if not ok:
        raise MalformedField(name, columns, str(value))


def parse_tle(name_line: Optional[str], line1: str, line2: str) -> TleRecord:
    """
    Parse one element set

    Args:
        name_line: Optional satellite name (line 0); defaults to the catalog number
        line1: First data line
        line2: Second data line

    Returns:
        TleRecord: Parsed and checksum-verified record

    Raises:
        LineIdentifierError: A data line does not start with its line number
        ChecksumMismatch: A stored checksum differs from the recomputed one
        MalformedField: A column range cannot be parsed or is out of range
    """
    line1 = line1.rstrip("\r\n")
    line2 = line2.rstrip("\r\n")

    if not line1.startswith("1"):
        raise LineIdentifierError(1, line1)
    if not line2.startswith("2"):
        raise LineIdentifierError(2, line2)
    for number, line in ((1, line1), (2, line2)):
        if len(line) < 69:
            raise MalformedField(f"line {number}", "1-69", line)

    checksum1 = _int_field(line1, 69, 69, "checksum")
    checksum2 = _int_field(line2, 69, 69, "checksum")
    computed1, computed2 = checksum(line1), checksum(line2)
    if checksum1 != computed1:
        raise ChecksumMismatch(1, checksum1, computed1)
    if checksum2 != computed2:
        raise ChecksumMismatch(2, checksum2, computed2)

    catalog_number = _int_field(line1, 3, 7, "catalog_number")
    if _int_field(line2, 3, 7, "catalog_number") != catalog_number:
        raise MalformedField("catalog_number", "3-7", _field(line2, 3, 7))

    raw_ecc = _field(line2, 27, 33)
    if not raw_ecc.strip().isdigit():
        raise MalformedField("eccentricity", "27-33", raw_ecc)
    eccentricity = float("0." + raw_ecc.strip())

    inclination = _float_field(line2, 9, 16, "inclination")
    raan = _float_field(line2, 18, 25, "raan")
    arg_perigee = _float_field(line2, 35, 42, "arg_perigee")
    mean_anomaly = _float_field(line2, 44, 51, "mean_anomaly")
    mean_motion = _float_field(line2, 53, 63, "mean_motion")

    _check_range(inclination, 0.0, 180.0, "inclination", "9-16", upper_open=False)
    _check_range(raan, 0.0, 360.0, "raan", "18-25")
    _check_range(arg_perigee, 0.0, 360.0, "arg_perigee", "35-42")
    _check_range(mean_anomaly, 0.0, 360.0, "mean_anomaly", "44-51")
    if mean_motion <= 0:
        raise MalformedField("mean_motion", "53-63", _field(line2, 53, 63))

    name = (name_line or "").strip() or str(catalog_number)

    return TleRecord(
        name=name,
        catalog_number=catalog_number,
        classification=_field(line1, 8, 8),
        intl_designator=_field(line1, 10, 17).strip(),
        epoch=_float_field(line1, 19, 32, "epoch"),
        mean_motion_dot=_float_field(line1, 34, 43, "mean_motion_dot"),
        mean_motion_ddot=parse_implied_exponent(_field(line1, 45, 52), "mean_motion_ddot", "45-52"),
        bstar=parse_implied_exponent(_field(line1, 54, 61), "bstar", "54-61"),
        ephemeris_type=_int_field(line1, 63, 63, "ephemeris_type", blank_as_zero=True),
        element_set_number=_int_field(line1, 65, 68, "element_set_number", blank_as_zero=True),
        inclination_deg=inclination,
        raan_deg=raan,
        eccentricity=eccentricity,
        arg_perigee_deg=arg_perigee,
        mean_anomaly_deg=mean_anomaly,
        mean_motion=mean_motion,
        rev_at_epoch=_int_field(line2, 64, 68, "rev_at_epoch", blank_as_zero=True),
        checksum1=checksum1,
        checksum2=checksum2,
    )


def format_tle(record: TleRecord) -> Tuple[str, str]:
    """Serialize a record back into the fixed-width layout with fresh checksums"""
    ndot_sign = "-" if record.mean_motion_dot < 0 else " "
    ndot = f"{abs(record.mean_motion_dot):.8f}"[1:]
    body1 = (
        f"1 {record.catalog_number:05d}{record.classification or 'U'} "
        f"{record.intl_designator:<8} {record.epoch:014.8f} {ndot_sign}{ndot} "
        f"{format_implied_exponent(record.mean_motion_ddot)} "
        f"{format_implied_exponent(record.bstar)} "
        f"{record.ephemeris_type} {record.element_set_number:>4}"
    )
    ecc_digits = int(round(record.eccentricity * 1e7))
    body2 = (
        f"2 {record.catalog_number:05d} {record.inclination_deg:8.4f} {record.raan_deg:8.4f} "
        f"{ecc_digits:07d} {record.arg_perigee_deg:8.4f} {record.mean_anomaly_deg:8.4f} "
        f"{record.mean_motion:11.8f}{record.rev_at_epoch:5d}"
    )
    return body1 + str(checksum(body1)), body2 + str(checksum(body2))


def mean_motion_to_sma(n: float, constants: PhysicalConstants = EARTH) -> float:
    """
    Semi-major axis (km) from mean motion (rev/day): a = (mu / n^2)^(1/3)

    Raises:
        NonPositiveMeanMotion: If n <= 0
    """
    if not n > 0:
        raise NonPositiveMeanMotion(n)
    n_rad = n * 2.0 * math.pi / SECONDS_PER_DAY
    return (constants.mu_earth / n_rad**2) ** (1.0 / 3.0)


def sma_to_mean_motion(a: float, constants: PhysicalConstants = EARTH) -> float:
    """Mean motion (rev/day) of a two-body orbit with semi-major axis a (km)"""
    n_rad = math.sqrt(constants.mu_earth / a**3)
    return n_rad * SECONDS_PER_DAY / (2.0 * math.pi)


def tle_to_elements(record: TleRecord, constants: PhysicalConstants = EARTH) -> KeplerianElements:
    """Convert a record into radians/km elements, placing nu from the mean anomaly"""
    e = record.eccentricity
    return KeplerianElements(
        a=mean_motion_to_sma(record.mean_motion, constants),
        e=e,
        i=math.radians(record.inclination_deg),
        raan=math.radians(record.raan_deg),
        arg_perigee=math.radians(record.arg_perigee_deg),
        true_anomaly=float(mean_to_true(math.radians(record.mean_anomaly_deg), e)),
    )


def _resync(lines: List[str], index: int, line1: int) -> int:
    """
    Start of the next group after a rejected one

    Scans past the rejected group's first data line for the next line that
    starts with "1 ". The line just before it is kept as that group's name
    unless it is a data line of the rejected group.
    """
    for position in range(line1 + 1, len(lines)):
        if not lines[position].startswith("1 "):
            continue
        previous = position - 1
        candidate = lines[previous]
        is_name = (
            previous > index
            and candidate.strip()
            and not candidate.startswith(("1 ", "2 "))
            and not (previous == line1 + 1 and lines[line1].startswith("1 "))
        )
        return previous if is_name else position
    return len(lines)


def load_catalog(source: Union[BinaryIO, bytes, str]) -> CatalogLoadResult:
    """
    Parse every 2- or 3-line group of a TLE stream

    Invalid groups are reported with the 1-based line number where the group
    starts and never abort the load: parsing resumes at the next line that
    starts with "1 ". Order is preserved.

    Args:
        source: Binary stream, raw bytes or already-decoded text

    Returns:
        CatalogLoadResult: (records, [(line_number, error), ...])
    """
    if hasattr(source, "read"):
        source = source.read()
    text = source.decode("ascii", errors="replace") if isinstance(source, bytes) else source
    lines = text.splitlines()

    records: List[TleRecord] = []
    errors: List[Tuple[int, TleError]] = []

    index = 0
    while index < len(lines):
        line = lines[index].rstrip()
        if not line.strip():
            index += 1
            continue

        start = index + 1
        if line.startswith("1 "):
            name, line1 = None, index
        elif line.startswith("2 "):
            errors.append((start, LineIdentifierError(1, line)))
            index += 1
            continue
        else:
            name, line1 = line, index + 1
        group = lines[line1:line1 + 2]

        if len(group) < 2:
            errors.append((start, MalformedField("group", f"{start}-{len(lines)}", "truncated element set")))
            break

        try:
            records.append(parse_tle(name, group[0], group[1]))
        except TleError as exc:
            errors.append((start, exc))
            index = _resync(lines, index, line1)
            continue
        index = line1 + 2

    return CatalogLoadResult(records, errors)
