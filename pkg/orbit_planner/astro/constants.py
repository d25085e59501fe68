"""Two-body constants shared by the TLE and orbit modules"""

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    mu_earth: float = 398600.4418  # km^3/s^2
    earth_radius: float = 6371.0  # km, spherical
    earth_rotation_rate: float = 7.2921159e-5  # rad/s


EARTH = PhysicalConstants()

SECONDS_PER_DAY = 86400.0
