"""
Ground-source heat-pump borehole sizing under uncertain ground conductivity.

Ground model
------------
Each of the ``n_boreholes`` boreholes takes an equal share of the ground
extraction and is modelled as an infinite line source with no interaction
between boreholes. The borehole-wall temperature response to a unit step
of extraction ``q`` (W/m) is

    g(t) = E1(r_b**2 / (4 * a * t)) / (4 * pi * lambda),   a = lambda / C

and hourly extraction pulses are superposed in time. The fluid sits a
further ``q * R_b`` below the borehole wall.

Dispatch
--------
Each hour the heat pump takes as much heat from the ground as it can
without the fluid dropping below ``fluid_min``, up to what is needed to
meet the whole load. With fluid temperature ``T`` the heat pump has
``COP = cop_intercept + cop_slope * T`` and delivers
``E_g / (1 - 1/COP)``; an auxiliary heater with ``aux_cop`` covers the
rest.

History older than seven days is aggregated into daily blocks (the block
mean extraction acting over the block). Only one representative year is
simulated, so the annual-mean tail of longer horizons never applies.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.special import exp1

from ..core import MINIMIZE, Action, DecisionProblem
from ..errors import InvalidArgumentError, NumericalError
from ..rng import normals
from .load_profile import HOURS_PER_YEAR, HourlyLoadProfile, synthesize_load

__all__ = [
    "GshpParams",
    "DispatchResult",
    "CostSurface",
    "ground_response",
    "dispatch",
    "lifetime_cost",
    "build_cost_surface",
    "sample_conductivity",
    "build_gshp_problem",
]

SECONDS_PER_HOUR = 3600.0
RECENT_HOURS = 168
GRID_POINTS = 201
GRID_HALF_WIDTH = 6.0  # standard deviations each side of lambda_mu


@dataclass(frozen=True)
class GshpParams:
    lengths: tuple = tuple(range(140, 201, 5))  # m
    n_boreholes: int = 9
    drilling_cost: float = 70.0  # GBP per m per borehole
    lifetime: float = 50.0  # years
    electricity_price: float = 0.34  # GBP/kWh
    lambda_mu: float = 2.0  # W/mK
    lambda_sigma: float = 0.12  # W/mK
    lambda_floor: float = 0.5  # W/mK
    fluid_min: float = 5.0  # degC
    fluid_max: float = 35.0  # degC
    ground_temp: float = 9.4  # degC, calibrated; see module docstring
    volumetric_heat_capacity: float = 2.3  # MJ/m3K
    borehole_resistance: float = 0.10  # mK/W
    borehole_radius: float = 0.075  # m
    cop_intercept: float = 4.0279
    cop_slope: float = 0.1319  # 1/degC
    aux_cop: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(self.lengths))
        if not self.lengths:
            raise InvalidArgumentError("lengths must not be empty")
        if any(b <= a for a, b in zip(self.lengths, self.lengths[1:])):
            raise InvalidArgumentError(f"lengths must be strictly increasing, got {self.lengths}")
        if self.lengths[0] <= 0:
            raise InvalidArgumentError("lengths must be positive")
        positive = (
            "n_boreholes", "drilling_cost", "lifetime", "electricity_price", "lambda_mu",
            "lambda_floor", "volumetric_heat_capacity", "borehole_resistance",
            "borehole_radius", "cop_intercept", "aux_cop",
        )
        for name in positive:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidArgumentError(f"{name} must be positive, got {value!r}")
        if not (math.isfinite(self.lambda_sigma) and self.lambda_sigma >= 0):
            raise InvalidArgumentError(f"lambda_sigma must be non-negative, got {self.lambda_sigma!r}")
        if not self.fluid_min < self.fluid_max:
            raise InvalidArgumentError("fluid_min must be below fluid_max")
        if self.lambda_mu < self.lambda_floor:
            raise InvalidArgumentError("lambda_mu must not be below lambda_floor")

    @property
    def diffusivity_scale(self) -> float:
        """Volumetric heat capacity in J/m3K."""
        return self.volumetric_heat_capacity * 1e6


@dataclass(frozen=True)
class DispatchResult:
    """Hourly series in kW (energies per hour) and degC."""

    load: np.ndarray
    e_ground: np.ndarray
    e_gshp: np.ndarray
    e_aux: np.ndarray
    t_fluid: np.ndarray
    cop: np.ndarray


def ground_response(conductivity: float, params: GshpParams, hours: int = HOURS_PER_YEAR + 1):
    """
    Step response ``g(k)`` of the borehole wall, K per (W/m), for
    ``k = 0..hours-1`` hours after the step. ``g(0) = 0``.
    """
    diffusivity = conductivity / params.diffusivity_scale
    t = np.arange(1, hours) * SECONDS_PER_HOUR
    g = np.zeros(hours)
    g[1:] = exp1(params.borehole_radius**2 / (4.0 * diffusivity * t)) / (4.0 * np.pi * conductivity)
    return g


@numba.njit(cache=True, nogil=True)
def _dispatch_kernel(load, g, w_per_kw, rb, t_ground, fmin, fmax, c0, c1, aggregate):
    n = load.shape[0]
    q = np.zeros(n)  # W/m
    e_g = np.zeros(n)
    e_hp = np.zeros(n)
    e_aux = np.zeros(n)
    t_f = np.zeros(n)
    cop = np.zeros(n)
    day_mean = np.zeros(n // 24 + 1)
    slope = (g[1] + rb) * w_per_kw  # K per kW of current extraction
    for t in range(n):
        drop = 0.0
        first = 0
        if aggregate:
            n_days = (t - RECENT_HOURS) // 24
            if n_days > 0:
                for d in range(n_days):
                    s = 24 * d
                    drop += day_mean[d] * (g[t + 1 - s] - g[t + 1 - s - 24])
                first = 24 * n_days
        for k in range(first, t):
            drop += q[k] * (g[t + 1 - k] - g[t - k])
        a = t_ground - drop
        if a < fmin:
            return -1, t, e_g, e_hp, e_aux, t_f, cop
        e_max = (a - fmin) / slope
        e_min = 0.0
        if a > fmax:
            e_min = (a - fmax) / slope
        # Extraction that meets the whole load: smaller root of
        # c1*B*E^2 - (K + L*c1*B)*E + L*(K - 1) = 0 with K = c0 + c1*a.
        lo = load[t]
        kk = c0 + c1 * a
        bb = kk + lo * c1 * slope
        disc = bb * bb - 4.0 * c1 * slope * lo * (kk - 1.0)
        need = 2.0 * lo * (kk - 1.0) / (bb + math.sqrt(max(disc, 0.0)))
        if need < e_min:
            return -2, t, e_g, e_hp, e_aux, t_f, cop
        e = min(need, e_max)
        if e < e_min:
            e = e_min
        e_g[t] = e
        q[t] = e * w_per_kw
        t_f[t] = a - e * slope
        cop[t] = c0 + c1 * t_f[t]
        if e == need:
            e_hp[t] = lo
        else:
            e_hp[t] = e / (1.0 - 1.0 / cop[t])
        e_aux[t] = lo - e_hp[t]
        if e_aux[t] < 0.0:
            e_aux[t] = 0.0
            e_hp[t] = lo
        if t % 24 == 23:
            day = t // 24
            total = 0.0
            for k in range(24 * day, t + 1):
                total += q[k]
            day_mean[day] = total / 24.0
    return 0, n, e_g, e_hp, e_aux, t_f, cop


def dispatch(
    load: HourlyLoadProfile,
    conductivity: float,
    length: float,
    params: GshpParams = GshpParams(),
    aggregate: bool = True,
) -> DispatchResult:
    """
    Simulate one year of hourly operation.

    Parameters
    ----------
    load : HourlyLoadProfile
    conductivity : float
        Ground thermal conductivity, W/mK; at least ``lambda_floor``.
    length : float
        Borehole length, m; one of ``params.lengths``.
    aggregate : bool
        Use daily blocks for history older than seven days. ``False``
        superposes every hourly pulse.
    """
    if not conductivity >= params.lambda_floor:
        raise InvalidArgumentError(
            f"conductivity {conductivity!r} is below lambda_floor {params.lambda_floor}"
        )
    if length not in params.lengths:
        raise InvalidArgumentError(f"length {length!r} is not one of {params.lengths}")
    values = np.ascontiguousarray(load.values, dtype=float)
    g = ground_response(conductivity, params, len(values) + 1)
    w_per_kw = 1000.0 / (params.n_boreholes * length)
    status, hour, e_g, e_hp, e_aux, t_f, cop = _dispatch_kernel(
        values, g, w_per_kw, params.borehole_resistance, params.ground_temp,
        params.fluid_min, params.fluid_max, params.cop_intercept, params.cop_slope,
        aggregate,
    )
    if status == -1:
        raise NumericalError(
            f"fluid temperature falls below {params.fluid_min} degC at hour {hour} even "
            f"with no extraction (conductivity={conductivity}, length={length})"
        )
    if status == -2:
        raise NumericalError(
            f"fluid temperature exceeds {params.fluid_max} degC at hour {hour} even when "
            f"meeting the full load (conductivity={conductivity}, length={length})"
        )
    return DispatchResult(values, e_g, e_hp, e_aux, t_f, cop)


def annual_electricity(result: DispatchResult, params: GshpParams) -> float:
    """Heat-pump plus auxiliary electricity for the simulated year, kWh."""
    return float(np.sum(result.e_gshp / result.cop) + np.sum(result.e_aux) / params.aux_cop)


def capital_cost(length: float, params: GshpParams = GshpParams()) -> float:
    return params.drilling_cost * length * params.n_boreholes


def lifetime_cost(
    conductivity: float,
    length: float,
    params: GshpParams = GshpParams(),
    load: HourlyLoadProfile | None = None,
    aggregate: bool = True,
) -> float:
    """Drilling cost plus undiscounted lifetime electricity cost, GBP."""
    if load is None:
        load = default_load()
    result = dispatch(load, conductivity, length, params, aggregate)
    operational = params.lifetime * params.electricity_price * annual_electricity(result, params)
    return capital_cost(length, params) + operational


_DEFAULT_LOAD: list = []


def default_load() -> HourlyLoadProfile:
    if not _DEFAULT_LOAD:
        _DEFAULT_LOAD.append(synthesize_load())
    return _DEFAULT_LOAD[0]


@dataclass(frozen=True)
class CostSurface:
    """Lifetime cost on ``lengths x lambda_grid``, linearly interpolated in lambda."""

    lengths: tuple
    lambda_grid: np.ndarray
    costs: np.ndarray = field(repr=False)

    def __post_init__(self):
        for arr in (self.lambda_grid, self.costs):
            arr.setflags(write=False)

    def row(self, length) -> int:
        return self.lengths.index(length)

    def __call__(self, length, conductivity):
        return np.interp(conductivity, self.lambda_grid, self.costs[self.row(length)])


def lambda_grid(params: GshpParams, points: int = GRID_POINTS) -> np.ndarray:
    lo = max(params.lambda_mu - GRID_HALF_WIDTH * params.lambda_sigma, params.lambda_floor)
    hi = params.lambda_mu + GRID_HALF_WIDTH * params.lambda_sigma
    if hi <= lo:
        hi = lo + 1e-6
    return np.linspace(lo, hi, points)


def build_cost_surface(
    params: GshpParams = GshpParams(),
    load: HourlyLoadProfile | None = None,
    points: int = GRID_POINTS,
    workers: int = 1,
) -> CostSurface:
    """Evaluate :func:`lifetime_cost` on every (length, grid conductivity) node."""
    if load is None:
        load = default_load()
    grid = lambda_grid(params, points)
    nodes = [(i, j) for i in range(len(params.lengths)) for j in range(len(grid))]

    def evaluate(node):
        i, j = node
        return lifetime_cost(grid[j], params.lengths[i], params, load)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(evaluate, nodes))
    else:
        flat = [evaluate(node) for node in nodes]
    costs = np.array(flat).reshape(len(params.lengths), len(grid))
    if not np.all(np.isfinite(costs)):
        raise NumericalError("cost surface contains non-finite values")
    return CostSurface(tuple(params.lengths), grid, costs)


def sample_conductivity(seed: int, indices, params: GshpParams = GshpParams()) -> np.ndarray:
    """Normal ground conductivity, clipped below at ``lambda_floor``."""
    z = normals(seed, indices, 0)
    return np.maximum(params.lambda_mu + params.lambda_sigma * z, params.lambda_floor)


def build_gshp_problem(
    params: GshpParams = GshpParams(),
    surface: CostSurface | None = None,
    load: HourlyLoadProfile | None = None,
    workers: int = 1,
) -> DecisionProblem:
    """Decision problem over borehole lengths, utility read from a cost surface."""
    if surface is None:
        surface = build_cost_surface(params, load, workers=workers)
    actions = [Action(id=f"{L:g}", label=f"{L:g} m", value=L) for L in params.lengths]

    def sampler(seed, indices):
        return sample_conductivity(seed, indices, params)

    def utility(action, conductivity):
        return surface(action.value, conductivity)

    return DecisionProblem(actions, sampler, utility, MINIMIZE, name="gshp")
