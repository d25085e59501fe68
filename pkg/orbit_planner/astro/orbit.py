"""
Two-body Keplerian geometry on a spherical, non-rotating-frame Earth.

Orbits are treated as static curves: no drag, no J2. All angles are radians
and all lengths kilometres. Functions accept numpy arrays where noted and
vectorize over them.
"""

import math
from dataclasses import dataclass, replace
from typing import List, NamedTuple, Sequence, Union

import numpy as np

from .constants import EARTH, PhysicalConstants

TWO_PI = 2.0 * math.pi

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class KeplerianElements:
    """Five shape/orientation elements plus a sampling true anomaly"""

    a: float
    e: float
    i: float
    raan: float
    arg_perigee: float
    true_anomaly: float = 0.0

    @property
    def perigee_radius(self) -> float:
        return self.a * (1.0 - self.e)

    @property
    def apogee_radius(self) -> float:
        return self.a * (1.0 + self.e)

    def perigee_altitude(self, constants: PhysicalConstants = EARTH) -> float:
        return self.perigee_radius - constants.earth_radius

    def period(self, constants: PhysicalConstants = EARTH) -> float:
        return orbital_period(self.a, constants)

    def as_array(self) -> np.ndarray:
        """(a, e, i, raan, arg_perigee) as a float vector"""
        return np.array([self.a, self.e, self.i, self.raan, self.arg_perigee], dtype=float)

    def with_true_anomaly(self, nu: float) -> "KeplerianElements":
        return replace(self, true_anomaly=float(nu))

    @classmethod
    def from_array(cls, values: Sequence[float], true_anomaly: float = 0.0) -> "KeplerianElements":
        a, e, i, raan, arg_perigee = (float(v) for v in values)
        return cls(a=a, e=e, i=i, raan=raan, arg_perigee=arg_perigee, true_anomaly=true_anomaly)


@dataclass(frozen=True)
class GroundPoint:
    """Sub-satellite or target point on the spherical Earth"""

    lat: float
    lon: float

    @classmethod
    def from_degrees(cls, lat_deg: float, lon_deg: float) -> "GroundPoint":
        return cls(lat=math.radians(lat_deg), lon=float(wrap_longitude(math.radians(lon_deg))))


class GroundTrack(NamedTuple):
    times: np.ndarray  # s since track start
    lat: np.ndarray
    lon: np.ndarray

    def points(self) -> List[GroundPoint]:
        return [GroundPoint(float(la), float(lo)) for la, lo in zip(self.lat, self.lon)]


def _check_eccentricity(e: float) -> None:
    if not 0.0 <= e < 1.0:
        raise ValueError(f"eccentricity must be in [0, 1), got {e}")


def _maybe_scalar(value: np.ndarray, like) -> ArrayLike:
    return float(value) if np.ndim(like) == 0 else value


def wrap_longitude(lon: ArrayLike) -> ArrayLike:
    """Wrap to (-pi, pi]"""
    return math.pi - np.mod(math.pi - np.asarray(lon, dtype=float), TWO_PI)


def orbital_period(a: float, constants: PhysicalConstants = EARTH) -> float:
    return TWO_PI * math.sqrt(a**3 / constants.mu_earth)


def mean_motion_rad(a: float, constants: PhysicalConstants = EARTH) -> float:
    """Mean motion in rad/s"""
    return math.sqrt(constants.mu_earth / a**3)


def mean_altitude(a: float, e: float, mode: str = "mean_radius", constants: PhysicalConstants = EARTH) -> float:
    """
    Mean altitude above the spherical Earth

    "mean_radius" uses the time-averaged radius a(1 + e^2/2);
    "semi_major_axis" uses a alone.
    """
    if mode == "mean_radius":
        return a * (1.0 + 0.5 * e * e) - constants.earth_radius
    if mode == "semi_major_axis":
        return a - constants.earth_radius
    raise ValueError(f"unknown mean altitude mode {mode!r}")


def solve_kepler(mean_anomaly: ArrayLike, e: float, tol: float = 1e-14, max_iter: int = 50) -> ArrayLike:
    """
    Solve Kepler's equation M = E - e sin E for the eccentric anomaly

    Newton iteration seeded with E0 = M (e < 0.8) or E0 = pi, falling back to
    bisection for any element still unconverged after max_iter steps.

    Args:
        mean_anomaly: Mean anomaly (rad), scalar or array
        e: Eccentricity in [0, 1)

    Returns:
        Eccentric anomaly with the same shape as mean_anomaly
    """
    _check_eccentricity(e)
    M = np.asarray(mean_anomaly, dtype=float)
    turns = np.floor(M / TWO_PI)
    Mw = M - turns * TWO_PI

    E = Mw.copy() if e < 0.8 else np.full_like(Mw, math.pi)
    residual = E - e * np.sin(E) - Mw
    for _ in range(max_iter):
        if np.all(np.abs(residual) < tol):
            break
        E = E - residual / (1.0 - e * np.cos(E))
        residual = E - e * np.sin(E) - Mw

    unconverged = ~(np.abs(residual) < tol)
    if np.any(unconverged):
        E = np.where(unconverged, _bisect_kepler(Mw, e), E)

    return _maybe_scalar(E + turns * TWO_PI, mean_anomaly)


def _bisect_kepler(Mw: np.ndarray, e: float, iterations: int = 200) -> np.ndarray:
    # f(E) = E - e sin E - M is increasing with f(0) <= 0 < f(2 pi) for M in [0, 2 pi)
    lo = np.zeros_like(Mw)
    hi = np.full_like(Mw, TWO_PI)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        positive = (mid - e * np.sin(mid) - Mw) > 0
        hi = np.where(positive, mid, hi)
        lo = np.where(positive, lo, mid)
    return 0.5 * (lo + hi)


def eccentric_to_true(E: ArrayLike, e: float) -> ArrayLike:
    """True anomaly in [0, 2 pi) from eccentric anomaly"""
    _check_eccentricity(e)
    E_arr = np.asarray(E, dtype=float)
    nu = 2.0 * np.arctan2(math.sqrt(1.0 + e) * np.sin(0.5 * E_arr), math.sqrt(1.0 - e) * np.cos(0.5 * E_arr))
    return _maybe_scalar(np.mod(nu, TWO_PI), E)


def true_to_eccentric(nu: ArrayLike, e: float) -> ArrayLike:
    """Eccentric anomaly in [0, 2 pi) from true anomaly"""
    _check_eccentricity(e)
    nu_arr = np.asarray(nu, dtype=float)
    E = 2.0 * np.arctan2(math.sqrt(1.0 - e) * np.sin(0.5 * nu_arr), math.sqrt(1.0 + e) * np.cos(0.5 * nu_arr))
    return _maybe_scalar(np.mod(E, TWO_PI), nu)


def eccentric_to_mean(E: ArrayLike, e: float) -> ArrayLike:
    E_arr = np.asarray(E, dtype=float)
    return _maybe_scalar(E_arr - e * np.sin(E_arr), E)


def mean_to_true(M: ArrayLike, e: float) -> ArrayLike:
    return eccentric_to_true(solve_kepler(M, e), e)


def true_to_mean(nu: ArrayLike, e: float) -> ArrayLike:
    return eccentric_to_mean(true_to_eccentric(nu, e), e)


def perifocal_to_eci_matrix(i: float, raan: float, arg_perigee: float) -> np.ndarray:
    """R3(-raan) R1(-i) R3(-arg_perigee)"""
    ci, si = math.cos(i), math.sin(i)
    cO, sO = math.cos(raan), math.sin(raan)
    cw, sw = math.cos(arg_perigee), math.sin(arg_perigee)
    return np.array(
        [
            [cO * cw - sO * sw * ci, -cO * sw - sO * cw * ci, sO * si],
            [sO * cw + cO * sw * ci, -sO * sw + cO * cw * ci, -cO * si],
            [sw * si, cw * si, ci],
        ]
    )


def elements_to_eci(el: KeplerianElements, nu: ArrayLike = None) -> np.ndarray:
    """
    Earth-centred inertial position(s) in km

    Args:
        el: Orbit elements
        nu: True anomaly (rad), scalar or array; defaults to el.true_anomaly

    Returns:
        Array of shape (3,) for scalar nu, else (..., 3)
    """
    _check_eccentricity(el.e)
    nu_arr = np.asarray(el.true_anomaly if nu is None else nu, dtype=float)
    r = el.a * (1.0 - el.e**2) / (1.0 + el.e * np.cos(nu_arr))
    perifocal = np.stack([r * np.cos(nu_arr), r * np.sin(nu_arr), np.zeros_like(r)], axis=-1)
    return perifocal @ perifocal_to_eci_matrix(el.i, el.raan, el.arg_perigee).T


def haversine_distance(lat1: ArrayLike, lon1: ArrayLike, lat2: ArrayLike, lon2: ArrayLike, radius: float) -> ArrayLike:
    """Vectorized great-circle distance on a sphere"""
    dlat = np.asarray(lat2) - np.asarray(lat1)
    dlon = np.asarray(lon2) - np.asarray(lon1)
    h = np.sin(0.5 * dlat) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(0.5 * dlon) ** 2
    return 2.0 * radius * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def great_circle_distance(p: GroundPoint, q: GroundPoint, radius: float = EARTH.earth_radius) -> float:
    """Haversine distance between two ground points, in the units of radius"""
    return float(haversine_distance(p.lat, p.lon, q.lat, q.lon, radius))


def ground_track_arrays(
    el: KeplerianElements,
    window: float = 86400.0,
    samples: int = 2000,
    constants: PhysicalConstants = EARTH,
) -> GroundTrack:
    """
    Sub-satellite points sampled uniformly over [0, window]

    The Greenwich angle is zero at t = 0 and the satellite starts at
    el.true_anomaly.
    """
    if samples < 2:
        raise ValueError("ground track needs at least 2 samples")
    if not window > 0:
        raise ValueError("ground track window must be positive")

    times = np.linspace(0.0, window, samples)
    M0 = true_to_mean(el.true_anomaly, el.e)
    M = M0 + mean_motion_rad(el.a, constants) * times
    nu = eccentric_to_true(solve_kepler(M, el.e), el.e)
    positions = elements_to_eci(el, nu)

    radius = np.linalg.norm(positions, axis=-1)
    lat = np.arcsin(np.clip(positions[:, 2] / radius, -1.0, 1.0))
    lon = wrap_longitude(np.arctan2(positions[:, 1], positions[:, 0]) - constants.earth_rotation_rate * times)
    return GroundTrack(times=times, lat=lat, lon=lon)


def ground_track(
    el: KeplerianElements,
    window: float = 86400.0,
    samples: int = 2000,
    constants: PhysicalConstants = EARTH,
) -> List[GroundPoint]:
    return ground_track_arrays(el, window, samples, constants).points()


def min_ground_distance(
    el: KeplerianElements,
    target: GroundPoint,
    window: float = 86400.0,
    samples: int = 2000,
    constants: PhysicalConstants = EARTH,
) -> float:
    """Closest sampled approach (km) of the ground track to a target point"""
    track = ground_track_arrays(el, window, samples, constants)
    distances = haversine_distance(track.lat, track.lon, target.lat, target.lon, constants.earth_radius)
    return float(np.min(distances))


def sample_orbit(el: KeplerianElements, samples: int) -> np.ndarray:
    """ECI positions at `samples` true anomalies uniform in [0, 2 pi)"""
    nu = np.arange(samples, dtype=float) * (TWO_PI / samples)
    return elements_to_eci(el, nu)


class OrbitCatalog:
    """
    Immutable set of reference orbits pre-sampled for distance queries

    Orbits whose radial shell cannot come closer than the best distance found
    so far are skipped; the reported minimum equals the brute-force value.
    """

    def __init__(self, orbits: Sequence[KeplerianElements], samples_per_orbit: int = 72, chunk_size: int = 64):
        if samples_per_orbit < 8:
            raise ValueError("samples_per_orbit must be at least 8")
        self._orbits = tuple(orbits)
        self.samples_per_orbit = samples_per_orbit
        self.chunk_size = chunk_size
        if self._orbits:
            self._positions = np.stack([sample_orbit(o, samples_per_orbit) for o in self._orbits])
            norms = np.linalg.norm(self._positions, axis=-1)
            self._r_min = norms.min(axis=1)
            self._r_max = norms.max(axis=1)
        else:
            self._positions = np.empty((0, samples_per_orbit, 3))
            self._r_min = self._r_max = np.empty(0)
        self._positions.setflags(write=False)

    def __len__(self) -> int:
        return len(self._orbits)

    @property
    def orbits(self) -> tuple:
        return self._orbits

    def min_distance(self, el: KeplerianElements) -> float:
        """Minimum sampled distance (km) from el to any catalog orbit; inf if empty"""
        if not self._orbits:
            return math.inf

        points = sample_orbit(el, self.samples_per_orbit)
        norms = np.linalg.norm(points, axis=-1)
        lower = np.maximum.reduce(
            [np.zeros_like(self._r_min), self._r_min - norms.max(), norms.min() - self._r_max]
        )
        order = np.argsort(lower, kind="stable")

        best = math.inf
        for start in range(0, len(order), self.chunk_size):
            chunk = order[start:start + self.chunk_size]
            if lower[chunk[0]] >= best:
                break
            diff = points[None, :, None, :] - self._positions[chunk][:, None, :, :]
            best = min(best, float(np.sqrt(np.min(np.einsum("kabx,kabx->kab", diff, diff)))))
        return best


def min_orbit_distance(
    el: KeplerianElements,
    catalog: Sequence[KeplerianElements],
    samples_per_orbit: int = 72,
) -> float:
    """
    Minimum geometric distance (km) between el and the closest catalog orbit

    Both curves are sampled at the same uniform true anomalies. An empty
    catalog returns math.inf (no constraint).
    """
    if isinstance(catalog, OrbitCatalog):
        return catalog.min_distance(el)
    return OrbitCatalog(catalog, samples_per_orbit).min_distance(el)
