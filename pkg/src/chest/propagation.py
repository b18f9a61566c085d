"""Synthetic multipath environments and their space/frequency responses.

A propagation environment is a set of discrete paths, each with an arrival
direction (elevation, azimuth), a delay, and a mean amplitude.  The receive
array maps directions to steering vectors; the pulse-shaped delay taps map
delays to per-subcarrier frequency responses.  A truncated copy of the path
set (the strongest few paths) plays the role of the twin's prior knowledge.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ConfigError, ScenarioConfig


@dataclass(frozen=True, eq=False)
class PathSet:
    """Per-path geometry: elevation/azimuth of arrival, delay, mean amplitude."""

    elevation: np.ndarray
    azimuth: np.ndarray
    delay: np.ndarray
    amplitude: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("elevation", "azimuth", "delay", "amplitude"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1 or arr.size == 0:
                raise ValueError(f"PathSet.{name} must be a non-empty 1-D array")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"PathSet.{name} must be finite")
            arrays[name] = arr
        sizes = {a.size for a in arrays.values()}
        if len(sizes) != 1:
            raise ValueError("PathSet arrays must have equal lengths")
        if np.any(arrays["delay"] < 0):
            raise ValueError("path delays must be non-negative")
        if np.any(arrays["amplitude"] < 0):
            raise ValueError("path amplitudes must be non-negative")
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return int(self.delay.size)


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Receive array element positions (meters) and operating wavelength."""

    positions: np.ndarray   # (n_elements, 3)
    wavelength: float

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ValueError("positions must be an (n_elements, 3) array")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        object.__setattr__(self, "positions", pos)

    @property
    def n_elements(self) -> int:
        return int(self.positions.shape[0])

    @classmethod
    def uniform_linear(cls, n_elements: int, wavelength: float,
                       spacing: float = 0.5) -> "ArrayGeometry":
        """Uniform linear array along x, element 0 at the origin.

        ``spacing`` is the element separation in wavelengths.
        """
        if n_elements < 1:
            raise ValueError("n_elements must be >= 1")
        x = np.arange(n_elements) * spacing * wavelength
        positions = np.zeros((n_elements, 3))
        positions[:, 0] = x
        return cls(positions=positions, wavelength=wavelength)


def generate_paths(scenario: ScenarioConfig, rng: np.random.Generator) -> PathSet:
    """Draw a random environment from the scenario's distributions.

    Delays are i.i.d. uniform on [0, delay_spread]; angles are uniform in the
    configured ranges; mean powers follow the exponential profile
    exp(-pdp_decay * delay / delay_spread), normalized so they sum to one.
    """
    n = scenario.n_paths
    delay = rng.uniform(0.0, scenario.delay_spread, n)
    elevation = rng.uniform(scenario.elevation_range[0], scenario.elevation_range[1], n)
    azimuth = rng.uniform(scenario.azimuth_range[0], scenario.azimuth_range[1], n)
    power = np.exp(-scenario.pdp_decay * delay / scenario.delay_spread)
    power = power / power.sum()
    return PathSet(elevation=elevation, azimuth=azimuth, delay=delay,
                   amplitude=np.sqrt(power))


def dt_truncate(paths: PathSet, n_keep: int) -> PathSet:
    """Keep the ``n_keep`` strongest paths (the twin's partial knowledge).

    Ties in amplitude break toward the smaller delay, then the smaller index.
    The survivors keep their original relative order; amplitudes are not
    renormalized.
    """
    if not 1 <= n_keep <= len(paths):
        raise ValueError(f"n_keep must lie in [1, {len(paths)}], got {n_keep}")
    order = np.lexsort((np.arange(len(paths)), paths.delay, -paths.amplitude))
    keep = np.sort(order[:n_keep])
    return PathSet(elevation=paths.elevation[keep], azimuth=paths.azimuth[keep],
                   delay=paths.delay[keep], amplitude=paths.amplitude[keep])


def direction_vector(elevation, azimuth) -> np.ndarray:
    """Unit direction of arrival; broadcasts over array inputs (last axis 3)."""
    elevation = np.asarray(elevation, dtype=float)
    azimuth = np.asarray(azimuth, dtype=float)
    return np.stack([np.cos(azimuth) * np.cos(elevation),
                     np.sin(azimuth) * np.cos(elevation),
                     np.sin(elevation)], axis=-1)


def steering_vector(direction: np.ndarray, geometry: ArrayGeometry) -> np.ndarray:
    """Array response exp(j 2 pi / lambda * u_i . v) for a unit direction v."""
    direction = np.asarray(direction, dtype=float)
    if direction.shape != (3,):
        raise ValueError("direction must be a 3-vector")
    phase = (2.0 * np.pi / geometry.wavelength) * (geometry.positions @ direction)
    return np.exp(1j * phase)


def steering_matrix(paths: PathSet, geometry: ArrayGeometry) -> np.ndarray:
    """Stack steering vectors of all paths into an (n_elements, L) matrix."""
    v = direction_vector(paths.elevation, paths.azimuth)          # (L, 3)
    phase = (2.0 * np.pi / geometry.wavelength) * (geometry.positions @ v.T)
    return np.exp(1j * phase)


def pulse_response(nu, delay_norm, rolloff: float) -> np.ndarray:
    """Raised-cosine pulse g(nu - delay_norm); rolloff 0 gives the plain sinc.

    ``delay_norm`` is the delay in units of the sample interval.  Inputs
    broadcast; the removable singularities (argument 0 and the rolloff edge
    |2*rolloff*x| = 1) are handled exactly.
    """
    if not 0.0 <= rolloff < 1.0:
        raise ValueError(f"rolloff must lie in [0, 1), got {rolloff}")
    x = np.asarray(nu, dtype=float) - np.asarray(delay_norm, dtype=float)
    core = np.sinc(x)
    if rolloff == 0.0:
        return core
    t = 2.0 * rolloff * x
    den = 1.0 - t * t
    safe = np.abs(den) > 1e-8
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(safe, np.cos(np.pi * rolloff * x) / np.where(safe, den, 1.0),
                          np.pi / 4.0)
    return core * factor


def frequency_response(paths: PathSet, n_subcarriers: int, sample_interval: float,
                       rolloff: float, pilot_indices: np.ndarray | None = None
                       ) -> np.ndarray:
    """Per-subcarrier response K = F G of the pulse-shaped delay taps.

    F is the unnormalized N-point DFT (negative exponent); column l of G holds
    g(nu - delay_l / T_s) for nu = 0..N-1.  With ``pilot_indices`` the rows are
    restricted to the pilot comb.
    """
    if n_subcarriers < 1:
        raise ValueError("n_subcarriers must be >= 1")
    if sample_interval <= 0:
        raise ValueError("sample_interval must be positive")
    nu = np.arange(n_subcarriers, dtype=float)[:, None]
    g = pulse_response(nu, paths.delay[None, :] / sample_interval, rolloff)
    k = np.fft.fft(g, axis=0)
    if pilot_indices is not None:
        idx = np.asarray(pilot_indices)
        if idx.size == 0 or np.any(idx < 0) or np.any(idx >= n_subcarriers):
            raise ValueError("pilot_indices out of range")
        k = k[idx]
    return k


# --- PathSet CSV interchange ------------------------------------------------

_CSV_COLUMNS = ("theta_rad", "phi_rad", "tau_s", "alpha")


def save_paths_csv(paths: PathSet, path: str | Path) -> None:
    """Write a path set as CSV with columns theta_rad, phi_rad, tau_s, alpha."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for row in zip(paths.elevation, paths.azimuth, paths.delay, paths.amplitude):
            writer.writerow([f"{v:.17g}" for v in row])


def load_paths_csv(path: str | Path) -> PathSet:
    """Read a path set written by :func:`save_paths_csv` (or any external tool)."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigError(f"cannot read path CSV {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != _CSV_COLUMNS:
            raise ConfigError(f"path CSV must have columns {','.join(_CSV_COLUMNS)}, "
                              f"got {reader.fieldnames}")
        try:
            rows = [[float(rec[c]) for c in _CSV_COLUMNS] for rec in reader]
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"malformed row in path CSV {path}: {exc}") from exc
    if not rows:
        raise ConfigError(f"path CSV {path} has no data rows")
    cols = np.array(rows).T
    return PathSet(elevation=cols[0], azimuth=cols[1], delay=cols[2], amplitude=cols[3])
