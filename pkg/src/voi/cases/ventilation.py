"""
Office ventilation scheduling under uncertain occupancy.

A single air-change rate is chosen for the day. The daily cost is the fan
electricity plus the expected salary loss from new airborne infections,
with occupancy unknown and uniform on ``0..max_occupancy``.

Infection risk uses a steady-state Wells-Riley model. With ``I`` infectors
in a well-mixed room of volume ``V`` ventilated at ``ach`` air changes per
hour, each susceptible occupant is infected with probability

    1 - exp(-I * q * p * t / (ach * V))

where ``q`` is the quanta emission rate per infector, ``p`` the breathing
rate and ``t`` the exposure time. The infector count is marginalised exactly
over ``Binomial(occupancy, prevalence)``.

The default ``quanta_rate`` and ``breathing_rate`` are a calibration, chosen
so that 5 ACH is the prior optimum for the default office; they are not
measured values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from ..core import MINIMIZE, Action, DecisionProblem
from ..errors import InvalidArgumentError
from ..rng import uniforms

__all__ = [
    "VentilationParams",
    "room_volume",
    "ventilation_energy_cost",
    "expected_new_infections",
    "ventilation_daily_cost",
    "occupancy_probabilities",
    "cost_table",
    "build_ventilation_problem",
]

SECONDS_PER_HOUR = 3600.0
LITRES_PER_M3 = 1000.0


@dataclass(frozen=True)
class VentilationParams:
    floor_area: float = 500.0  # m2
    ceiling_height: float = 4.0  # m
    max_occupancy: int = 55
    ach_options: tuple = (1, 3, 5, 10)
    fan_specific_power: float = 1.9  # W per l/s
    fan_efficiency: float = 0.60
    fan_hours: float = 10.0  # h/day
    electricity_price: float = 0.34  # GBP/kWh
    prevalence: float = 0.0218
    sick_days: float = 3.0
    daily_salary_loss: float = 128.0  # GBP/day
    exposure_hours: float = 8.0  # h/day
    quanta_rate: float = 14.0  # quanta/h per infector
    breathing_rate: float = 0.6  # m3/h

    def __post_init__(self):
        object.__setattr__(self, "ach_options", tuple(self.ach_options))
        positive = (
            "floor_area", "ceiling_height", "fan_specific_power", "fan_hours",
            "electricity_price", "sick_days", "daily_salary_loss", "exposure_hours",
            "quanta_rate", "breathing_rate",
        )
        for name in positive:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidArgumentError(f"{name} must be positive, got {value!r}")
        if not 0.0 < self.fan_efficiency <= 1.0:
            raise InvalidArgumentError(
                f"fan_efficiency must lie in (0, 1], got {self.fan_efficiency!r}"
            )
        if not 0.0 <= self.prevalence <= 1.0:
            raise InvalidArgumentError(f"prevalence must lie in [0, 1], got {self.prevalence!r}")
        if int(self.max_occupancy) != self.max_occupancy or self.max_occupancy < 0:
            raise InvalidArgumentError(
                f"max_occupancy must be a non-negative integer, got {self.max_occupancy!r}"
            )
        if not self.ach_options or any(a <= 0 for a in self.ach_options):
            raise InvalidArgumentError(
                f"ach_options must be a non-empty list of positive rates, got {self.ach_options!r}"
            )
        if len(set(self.ach_options)) != len(self.ach_options):
            raise InvalidArgumentError(f"ach_options must be distinct, got {self.ach_options!r}")

    @property
    def volume(self) -> float:
        return room_volume(self)


def room_volume(params: VentilationParams) -> float:
    """Room volume in m3."""
    return params.floor_area * params.ceiling_height


def ventilation_energy_cost(ach: float, params: VentilationParams = VentilationParams()) -> float:
    """
    Daily fan electricity cost in GBP.

    ``ach = 0`` is accepted and costs nothing; negative rates are rejected.
    """
    if not ach >= 0:
        raise InvalidArgumentError(f"air-change rate must be non-negative, got {ach!r}")
    flow_l_per_s = ach * params.volume * LITRES_PER_M3 / SECONDS_PER_HOUR
    fan_power_w = params.fan_specific_power * flow_l_per_s / params.fan_efficiency
    energy_kwh = fan_power_w * params.fan_hours / 1000.0
    return params.electricity_price * energy_kwh


def expected_new_infections(
    occupancy: int, ach: float, params: VentilationParams = VentilationParams()
) -> float:
    """Expected number of susceptibles infected in one working day."""
    if not ach > 0:
        raise InvalidArgumentError(f"air-change rate must be positive, got {ach!r}")
    if int(occupancy) != occupancy or not 0 <= occupancy <= params.max_occupancy:
        raise InvalidArgumentError(
            f"occupancy must be an integer in [0, {params.max_occupancy}], got {occupancy!r}"
        )
    occupancy = int(occupancy)
    if occupancy <= 1 or params.prevalence == 0.0:
        return 0.0
    infectors = np.arange(occupancy + 1)
    weights = binom.pmf(infectors, occupancy, params.prevalence)
    dose_per_infector = (
        params.quanta_rate * params.breathing_rate * params.exposure_hours
        / (ach * params.volume)
    )
    p_infect = -np.expm1(-infectors * dose_per_infector)
    return float(np.dot(weights, (occupancy - infectors) * p_infect))


def ventilation_daily_cost(
    ach: float, occupancy: int, params: VentilationParams = VentilationParams()
) -> float:
    """Fan electricity plus expected lost-productivity cost, GBP/day."""
    infection_cost = params.sick_days * params.daily_salary_loss
    return ventilation_energy_cost(ach, params) + infection_cost * expected_new_infections(
        occupancy, ach, params
    )


def occupancy_probabilities(params: VentilationParams = VentilationParams()) -> np.ndarray:
    """Uniform prior over ``0..max_occupancy``."""
    n = int(params.max_occupancy) + 1
    return np.full(n, 1.0 / n)


def cost_table(params: VentilationParams = VentilationParams()) -> np.ndarray:
    """Daily cost for every (ACH option, occupancy) pair."""
    occupancies = range(int(params.max_occupancy) + 1)
    return np.array(
        [[ventilation_daily_cost(a, n, params) for n in occupancies] for a in params.ach_options]
    )


def build_ventilation_problem(params: VentilationParams = VentilationParams()) -> DecisionProblem:
    table = cost_table(params)
    n_states = int(params.max_occupancy) + 1
    actions = [
        Action(id=f"{a:g}", label=f"{a:g} ACH", value=a) for a in params.ach_options
    ]
    rows = {action.id: row for action, row in zip(actions, table)}

    def sampler(seed, indices):
        u = uniforms(seed, indices, 0)
        return np.minimum((u * n_states).astype(np.int64), n_states - 1)

    def utility(action, occupancy):
        return rows[action.id][occupancy]

    return DecisionProblem(actions, sampler, utility, MINIMIZE, name="ventilation")
