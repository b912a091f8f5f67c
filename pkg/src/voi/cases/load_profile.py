"""Synthetic hourly heating-load year and CSV ingestion."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from ..errors import ConstructionError

__all__ = [
    "HOURS_PER_YEAR",
    "LoadProfileParams",
    "HourlyLoadProfile",
    "synthesize_load",
    "read_load_csv",
]

log = logging.getLogger(__name__)

HOURS_PER_YEAR = 8760


@dataclass(frozen=True)
class LoadProfileParams:
    """
    Shape and targets of the synthetic heating year.

    The raw shape is a seasonal cosine peaking on ``peak_day`` (day of year,
    0 = 1 January) multiplied by a diurnal profile with morning and evening
    peaks. It is then mapped affinely onto the targets.
    """

    annual_energy: float = 116_000.0  # kWh
    peak: float = 25.2  # kW
    seasonal_amplitude: float = 0.8
    diurnal_amplitude: float = 0.5
    peak_day: float = 15.0
    morning_hour: float = 7.0
    evening_hour: float = 18.0


@dataclass(frozen=True)
class HourlyLoadProfile:
    values: np.ndarray  # kW, one per hour

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def annual_energy(self) -> float:
        return float(self.values.sum())

    @property
    def peak(self) -> float:
        return float(self.values.max())

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    def check(self, annual_energy=116_000.0, peak=25.2, strict=True) -> list[str]:
        """
        Check the profile against its targets.

        Length and non-negativity are always enforced. Annual energy (1 %) and
        peak (2 %) deviations raise when ``strict`` and are otherwise logged
        and returned as warnings.
        """
        if self.values.shape != (HOURS_PER_YEAR,):
            raise ConstructionError(
                f"load profile needs {HOURS_PER_YEAR} hourly values, got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ConstructionError("load profile values must be finite and non-negative")
        problems = []
        if abs(self.annual_energy - annual_energy) > 0.01 * annual_energy:
            problems.append(
                f"annual energy {self.annual_energy:.1f} kWh is not within 1% of {annual_energy:g}"
            )
        if abs(self.peak - peak) > 0.02 * peak:
            problems.append(f"peak {self.peak:.3f} kW is not within 2% of {peak:g}")
        if problems and strict:
            raise ConstructionError("; ".join(problems))
        for message in problems:
            log.warning(message)
        return problems


def _raw_shape(p: LoadProfileParams) -> np.ndarray:
    t = np.arange(HOURS_PER_YEAR)
    day = t / 24.0
    hour = t % 24
    seasonal = 1.0 + p.seasonal_amplitude * np.cos(2 * np.pi * (day - p.peak_day) / 365.0)
    bumps = np.exp(-(((hour - p.morning_hour) / 1.5) ** 2)) + 0.8 * np.exp(
        -(((hour - p.evening_hour) / 2.0) ** 2)
    )
    diurnal = 1.0 + p.diurnal_amplitude * (bumps - bumps.mean())
    return seasonal * diurnal


def synthesize_load(params: LoadProfileParams = LoadProfileParams()) -> HourlyLoadProfile:
    """
    Deterministic heating year hitting the annual-energy and peak targets.

    The raw shape is rescaled as ``max(scale * (raw - raw.max()) + peak, 0)``,
    with ``scale`` found by root finding so the clamped profile has the
    target mean. The peak is therefore exact and the mean exact to solver
    tolerance.
    """
    target_mean = params.annual_energy / HOURS_PER_YEAR
    if not 0 < target_mean < params.peak:
        raise ConstructionError(
            f"mean load {target_mean:.3f} kW must be positive and below the peak {params.peak} kW"
        )
    raw = _raw_shape(params)
    spread = raw.max() - raw
    if spread.max() <= 1e-12 * max(1.0, abs(raw.max())):
        raise ConstructionError(
            "load shape is constant: a flat profile cannot reach the peak target"
        )

    def mean_error(scale):
        return np.maximum(params.peak - scale * spread, 0.0).mean() - target_mean

    # scale = 0 gives a flat profile at the peak (too much energy); a large
    # scale drives everything but the peak hour to zero (too little).
    hi = 1.0
    while mean_error(hi) > 0:
        hi *= 2.0
        if hi > 1e12:
            raise ConstructionError("cannot reach the annual-energy target with this shape")
    scale = brentq(mean_error, 0.0, hi, xtol=1e-14, rtol=1e-14, maxiter=500)
    values = np.maximum(params.peak - scale * spread, 0.0)
    profile = HourlyLoadProfile(values)
    profile.check(params.annual_energy, params.peak, strict=True)
    return profile


def read_load_csv(path, annual_energy=116_000.0, peak=25.2) -> HourlyLoadProfile:
    """
    Read a user load profile: header ``kw`` then 8760 rows of kW.

    Annual-energy and peak mismatches are only warnings for user data.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConstructionError(f"{path}: empty load file") from None
        if [h.strip().lower() for h in header] != ["kw"]:
            raise ConstructionError(f"{path}: expected a single 'kw' header column, got {header}")
        values = []
        for lineno, row in enumerate(reader, start=2):
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                raise ConstructionError(f"{path}:{lineno}: not a number: {row[0]!r}") from None
    profile = HourlyLoadProfile(np.array(values))
    profile.check(annual_energy, peak, strict=False)
    return profile
