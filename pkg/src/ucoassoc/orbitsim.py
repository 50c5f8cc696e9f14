"""Synthetic angles-only observation scenarios for near-GEO satellites.

Two-body propagation of uniformly sampled orbital elements, randomly placed
ground sensors on a spherical rotating Earth, and noisy 120 s streak
observations (line of sight plus finite-difference line-of-sight rate).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, KeplerConvergenceError, VisibilityError

GM_EARTH_KM3_S2 = 398600.4418
R_EARTH_KM = 6378.137
OMEGA_EARTH_RAD_S = 7.2921159e-5

TWO_PI = 2.0 * np.pi

DATASET_HEADER = [
    "obs_id", "rso_id", "epoch_s",
    "obs_px_km", "obs_py_km", "obs_pz_km",
    "los_x", "los_y", "los_z",
    "losr_x", "losr_y", "losr_z",
    "streak_s",
]


# --- Domain types ---

@dataclass
class KeplerianElements:
    """Classical elements of one two-body orbit. Angles in degrees."""

    semi_major_axis_km: float
    eccentricity: float
    inclination_deg: float
    raan_deg: float
    arg_perigee_deg: float
    mean_anomaly_at_epoch_deg: float
    epoch_ref_s: float = 0.0

    def __post_init__(self) -> None:
        if not self.semi_major_axis_km > 0.0:
            raise ConfigError(f"semi-major axis must be positive, got {self.semi_major_axis_km}")
        if not 0.0 <= self.eccentricity < 1.0:
            raise ConfigError(f"eccentricity must be in [0, 1), got {self.eccentricity}")
        if not 0.0 <= self.inclination_deg < 180.0:
            raise ConfigError(f"inclination must be in [0, 180) deg, got {self.inclination_deg}")
        for name in ("raan_deg", "arg_perigee_deg", "mean_anomaly_at_epoch_deg"):
            v = getattr(self, name)
            if not 0.0 <= v < 360.0:
                raise ConfigError(f"{name} must be in [0, 360) deg, got {v}")

    @property
    def period_s(self) -> float:
        return TWO_PI * np.sqrt(self.semi_major_axis_km ** 3 / GM_EARTH_KM3_S2)


@dataclass
class Sensor:
    """Ground sensor site; altitude is fixed at sea level."""

    latitude_deg: float
    longitude_deg: float
    altitude_km: float = 0.0

    def __post_init__(self) -> None:
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ConfigError(f"latitude must be in [-90, 90], got {self.latitude_deg}")
        if not -180.0 <= self.longitude_deg < 180.0:
            raise ConfigError(f"longitude must be in [-180, 180), got {self.longitude_deg}")


@dataclass
class Observation:
    """One angles-only streak: start epoch, observer position, LOS and LOS rate.

    ``rso_id`` is the truth label; ``None`` in blind datasets. Epochs are
    seconds since scenario start, positions km ECI, ``los_rate`` 1/s.
    """

    obs_id: int
    rso_id: int | None
    epoch_s: float
    observer_pos_km: np.ndarray
    los: np.ndarray
    los_rate: np.ndarray
    streak_duration_s: float = 120.0


@dataclass
class ElementRanges:
    """Uniform sampling bounds for the satellite population."""

    semi_major_axis_km: tuple[float, float] = (41164.0, 43164.0)
    eccentricity: tuple[float, float] = (0.0, 0.1)
    inclination_deg: tuple[float, float] = (0.0, 20.0)
    raan_deg: tuple[float, float] = (0.0, 360.0)
    arg_perigee_deg: tuple[float, float] = (0.0, 360.0)
    mean_anomaly_deg: tuple[float, float] = (0.0, 360.0)

    def validate(self) -> None:
        for name, (lo, hi) in self.as_dict().items():
            if not np.isfinite(lo) or not np.isfinite(hi) or lo > hi:
                raise ConfigError(f"invalid range for {name}: [{lo}, {hi}]")

    def as_dict(self) -> dict[str, tuple[float, float]]:
        return {
            "semi_major_axis_km": self.semi_major_axis_km,
            "eccentricity": self.eccentricity,
            "inclination_deg": self.inclination_deg,
            "raan_deg": self.raan_deg,
            "arg_perigee_deg": self.arg_perigee_deg,
            "mean_anomaly_deg": self.mean_anomaly_deg,
        }


@dataclass
class ScenarioConfig:
    """Knobs for one simulated observation campaign."""

    n_observations: int
    window_s: float = 43200.0
    obs_per_sat_min: int = 3
    obs_per_sat_max: int = 10
    streak_duration_s: float = 120.0
    noise_sigma_m: float = 100.0
    min_elevation_deg: float = 10.0
    seed: int = 0
    id_base: int = 0
    element_ranges: ElementRanges = field(default_factory=ElementRanges)

    def validate(self) -> None:
        if self.n_observations < 1:
            raise ConfigError(f"n_observations must be >= 1, got {self.n_observations}")
        if self.obs_per_sat_min < 1 or self.obs_per_sat_min > self.obs_per_sat_max:
            raise ConfigError(
                f"need 1 <= obs_per_sat_min <= obs_per_sat_max, got "
                f"({self.obs_per_sat_min}, {self.obs_per_sat_max})"
            )
        if self.noise_sigma_m < 0.0:
            raise ConfigError(f"noise_sigma_m must be >= 0, got {self.noise_sigma_m}")
        if self.streak_duration_s <= 0.0 or self.streak_duration_s > self.window_s:
            raise ConfigError(
                f"streak duration {self.streak_duration_s} s must fit inside the "
                f"{self.window_s} s window"
            )
        self.element_ranges.validate()


# --- Kepler's equation ---

def solve_kepler(mean_anomaly_rad, eccentricity, tol: float = 1e-13, max_iter: int = 128):
    """Solve E - e*sin(E) = M for the eccentric anomaly E.

    Newton iteration safeguarded by bisection on the bracket [0, 2*pi) of the
    reduced anomaly; the 2*pi branch of M is restored on output. Accepts
    scalars or arrays (broadcast together).

    Raises:
        KeplerConvergenceError: residual above ``tol`` after ``max_iter``.
    """
    M = np.asarray(mean_anomaly_rad, dtype=float)
    e = np.asarray(eccentricity, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ConfigError("mean anomaly must be finite")
    if np.any(e < 0.0) or np.any(e >= 1.0):
        raise ConfigError("eccentricity must be in [0, 1)")

    M, e = np.broadcast_arrays(M, e)
    branch = np.floor(M / TWO_PI)
    m_red = M - TWO_PI * branch

    # f is strictly increasing with a unique root in [0, 2*pi]
    E = np.where(e < 0.8, m_red + e * np.sin(m_red), np.full_like(m_red, np.pi))
    lo = np.zeros_like(m_red)
    hi = np.full_like(m_red, TWO_PI)
    f = E - e * np.sin(E) - m_red
    for _ in range(max_iter):
        active = np.abs(f) >= tol
        if not active.any():
            break
        hi = np.where(active & (f > 0.0), E, hi)
        lo = np.where(active & (f <= 0.0), E, lo)
        newton = E - f / (1.0 - e * np.cos(E))
        inside = (newton > lo) & (newton < hi)
        E = np.where(active, np.where(inside, newton, 0.5 * (lo + hi)), E)
        f = E - e * np.sin(E) - m_red
    if np.any(np.abs(f) >= tol):
        worst = float(np.max(np.abs(f)))
        raise KeplerConvergenceError(
            f"Kepler solver residual {worst:.3e} after {max_iter} iterations"
        )

    out = E + TWO_PI * branch
    return float(out) if out.ndim == 0 else out


def elements_to_state(el: KeplerianElements, t_s):
    """Propagate to time ``t_s`` (scalar or array, seconds since scenario start).

    Returns ``(position, velocity)`` in km and km/s ECI; arrays have shape
    (..., 3) matching the shape of ``t_s``.
    """
    t = np.asarray(t_s, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ConfigError("propagation time must be finite")

    a = el.semi_major_axis_km
    e = el.eccentricity
    n = np.sqrt(GM_EARTH_KM3_S2 / a ** 3)
    M = np.deg2rad(el.mean_anomaly_at_epoch_deg) + n * (t - el.epoch_ref_s)
    E = np.asarray(solve_kepler(M, e))

    cos_e = np.cos(E)
    sin_e = np.sin(E)
    b_over_a = np.sqrt(1.0 - e * e)
    # Perifocal coordinates and velocities
    xp = a * (cos_e - e)
    yp = a * b_over_a * sin_e
    e_dot = n / (1.0 - e * cos_e)
    vxp = -a * sin_e * e_dot
    vyp = a * b_over_a * cos_e * e_dot

    inc = np.deg2rad(el.inclination_deg)
    raan = np.deg2rad(el.raan_deg)
    argp = np.deg2rad(el.arg_perigee_deg)
    cO, sO = np.cos(raan), np.sin(raan)
    ci, si = np.cos(inc), np.sin(inc)
    cw, sw = np.cos(argp), np.sin(argp)
    # Rows of R3(-raan) R1(-inc) R3(-argp), mapping perifocal -> ECI
    r11 = cO * cw - sO * sw * ci
    r12 = -cO * sw - sO * cw * ci
    r21 = sO * cw + cO * sw * ci
    r22 = -sO * sw + cO * cw * ci
    r31 = sw * si
    r32 = cw * si

    pos = np.stack([r11 * xp + r12 * yp, r21 * xp + r22 * yp, r31 * xp + r32 * yp], axis=-1)
    vel = np.stack([r11 * vxp + r12 * vyp, r21 * vxp + r22 * vyp, r31 * vxp + r32 * vyp], axis=-1)
    return pos, vel


# --- Population and sensors ---

def sample_population(
    n_sats: int, ranges: ElementRanges, rng: np.random.Generator
) -> list[KeplerianElements]:
    """Draw ``n_sats`` element sets, each field independent uniform in its range."""
    if n_sats < 1:
        raise ConfigError(f"n_sats must be >= 1, got {n_sats}")
    ranges.validate()
    out = []
    for _ in range(n_sats):
        out.append(
            KeplerianElements(
                semi_major_axis_km=rng.uniform(*ranges.semi_major_axis_km),
                eccentricity=rng.uniform(*ranges.eccentricity),
                inclination_deg=rng.uniform(*ranges.inclination_deg),
                raan_deg=rng.uniform(*ranges.raan_deg),
                arg_perigee_deg=rng.uniform(*ranges.arg_perigee_deg),
                mean_anomaly_at_epoch_deg=rng.uniform(*ranges.mean_anomaly_deg),
            )
        )
    return out


def sensor_eci(sensor: Sensor, t_s: float) -> np.ndarray:
    """ECI position (km) of a ground site; Greenwich aligned with +x at t=0."""
    lat = np.deg2rad(sensor.latitude_deg)
    theta = np.deg2rad(sensor.longitude_deg) + OMEGA_EARTH_RAD_S * np.asarray(t_s, dtype=float)
    r = R_EARTH_KM + sensor.altitude_km
    cos_lat = np.cos(lat)
    return np.stack(
        [r * cos_lat * np.cos(theta), r * cos_lat * np.sin(theta),
         np.broadcast_to(r * np.sin(lat), np.shape(theta))],
        axis=-1,
    )


def _random_sensor(rng: np.random.Generator) -> Sensor:
    # Uniform over the sphere surface: lon uniform, sin(lat) uniform
    lon = rng.uniform(-180.0, 180.0)
    lat = np.rad2deg(np.arcsin(rng.uniform(-1.0, 1.0)))
    return Sensor(latitude_deg=float(np.clip(lat, -90.0, 90.0)), longitude_deg=lon)


def _streak_observation(
    p_rso_start: np.ndarray,
    p_rso_end: np.ndarray,
    sensor: Sensor,
    epoch_s: float,
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    obs_id: int,
    rso_id: int | None,
) -> Observation:
    """Build one observation from precomputed RSO endpoint positions."""
    p_obs_start = sensor_eci(sensor, epoch_s)
    up = p_obs_start / np.linalg.norm(p_obs_start)
    rel_true = p_rso_start - p_obs_start
    sin_elev = float(np.dot(rel_true, up) / np.linalg.norm(rel_true))
    if sin_elev < np.sin(np.deg2rad(cfg.min_elevation_deg)):
        raise VisibilityError(
            f"elevation {np.rad2deg(np.arcsin(sin_elev)):.2f} deg below "
            f"{cfg.min_elevation_deg} deg mask"
        )

    sigma_km = cfg.noise_sigma_m / 1000.0
    noise_start = rng.normal(0.0, sigma_km, size=3) if sigma_km > 0.0 else np.zeros(3)
    noise_end = rng.normal(0.0, sigma_km, size=3) if sigma_km > 0.0 else np.zeros(3)

    p_obs_end = sensor_eci(sensor, epoch_s + cfg.streak_duration_s)
    rel_start = p_rso_start + noise_start - p_obs_start
    rel_end = p_rso_end + noise_end - p_obs_end
    los_start = rel_start / np.linalg.norm(rel_start)
    los_end = rel_end / np.linalg.norm(rel_end)
    los_rate = (los_end - los_start) / cfg.streak_duration_s

    return Observation(
        obs_id=obs_id,
        rso_id=rso_id,
        epoch_s=float(epoch_s),
        observer_pos_km=p_obs_start,
        los=los_start,
        los_rate=los_rate,
        streak_duration_s=cfg.streak_duration_s,
    )


def observe(
    el: KeplerianElements,
    sensor: Sensor,
    epoch_s: float,
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    obs_id: int = 0,
    rso_id: int | None = None,
) -> Observation:
    """Simulate one noisy streak observation of ``el`` from ``sensor``.

    Raises:
        VisibilityError: RSO below the elevation mask at streak start.
    """
    if epoch_s < 0.0 or epoch_s + cfg.streak_duration_s > cfg.window_s:
        raise ConfigError(
            f"epoch {epoch_s} s leaves streak outside the {cfg.window_s} s window"
        )
    p_start, _ = elements_to_state(el, epoch_s)
    p_end, _ = elements_to_state(el, epoch_s + cfg.streak_duration_s)
    return _streak_observation(p_start, p_end, sensor, epoch_s, cfg, rng, obs_id, rso_id)


_MAX_SENSOR_DRAWS = 10_000


def build_scenario(cfg: ScenarioConfig, rng: np.random.Generator | None = None) -> list[Observation]:
    """Generate satellites until the observation budget is filled.

    Each satellite gets a uniform-random number of observations in
    [obs_per_sat_min, obs_per_sat_max] (the last one truncated to the
    remaining budget), at uniform-random epochs, each from an independently
    placed sensor resampled until the RSO clears the elevation mask.
    Satellites use spawned RNG streams, so the result is reproducible even if
    generation is parallelized per satellite.
    """
    cfg.validate()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)

    observations: list[Observation] = []
    sat_index = 0
    while len(observations) < cfg.n_observations:
        sat_rng = rng.spawn(1)[0]
        el = sample_population(1, cfg.element_ranges, sat_rng)[0]
        rso_id = cfg.id_base + sat_index
        n_budget = cfg.n_observations - len(observations)
        n_obs = min(int(sat_rng.integers(cfg.obs_per_sat_min, cfg.obs_per_sat_max + 1)), n_budget)
        epochs = sat_rng.uniform(0.0, cfg.window_s - cfg.streak_duration_s, size=n_obs)
        starts, _ = elements_to_state(el, epochs)
        ends, _ = elements_to_state(el, epochs + cfg.streak_duration_s)
        for j in range(n_obs):
            obs_id = cfg.id_base + len(observations)
            for attempt in range(_MAX_SENSOR_DRAWS):
                sensor = _random_sensor(sat_rng)
                try:
                    obs = _streak_observation(
                        starts[j], ends[j], sensor, float(epochs[j]), cfg, sat_rng,
                        obs_id=obs_id, rso_id=rso_id,
                    )
                except VisibilityError:
                    continue
                observations.append(obs)
                break
            else:
                raise VisibilityError(
                    f"no visible sensor after {_MAX_SENSOR_DRAWS} draws for rso {rso_id}"
                )
        sat_index += 1
    return observations


# --- Dataset file I/O ---

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_dataset_csv(path: str | Path, observations: Sequence[Observation], blind: bool = False) -> None:
    """Write observations in obs_id order; 17 significant digits per float.

    The blind variant omits the ``rso_id`` truth column.
    """
    header = [c for c in DATASET_HEADER if not (blind and c == "rso_id")]
    rows = sorted(observations, key=lambda o: o.obs_id)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for o in rows:
            row = [str(o.obs_id)]
            if not blind:
                row.append("" if o.rso_id is None else str(o.rso_id))
            row += [_fmt(o.epoch_s)]
            row += [_fmt(v) for v in o.observer_pos_km]
            row += [_fmt(v) for v in o.los]
            row += [_fmt(v) for v in o.los_rate]
            row += [_fmt(o.streak_duration_s)]
            writer.writerow(row)


def read_dataset_csv(path: str | Path) -> list[Observation]:
    """Read a dataset written by :func:`write_dataset_csv` (blind or labeled)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigError(f"empty dataset file: {path}")
        blind = "rso_id" not in header
        expected = [c for c in DATASET_HEADER if not (blind and c == "rso_id")]
        if header != expected:
            raise ConfigError(f"unexpected dataset header in {path}: {header}")
        out: list[Observation] = []
        for row in reader:
            it = iter(row)
            obs_id = int(next(it))
            rso_id = None
            if not blind:
                raw = next(it)
                rso_id = int(raw) if raw else None
            epoch = float(next(it))
            obs_pos = np.array([float(next(it)) for _ in range(3)])
            los = np.array([float(next(it)) for _ in range(3)])
            los_rate = np.array([float(next(it)) for _ in range(3)])
            streak = float(next(it))
            out.append(Observation(obs_id, rso_id, epoch, obs_pos, los, los_rate, streak))
    return out
