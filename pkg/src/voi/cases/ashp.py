"""
Air-source heat-pump maintenance scheduling under uncertain degradation.

The owner picks the number of evenly spaced maintenance visits per year.
Maintenance raises the seasonal performance factor by a saturating uplift
``beta``; an unknown degradation factor ``alpha`` lowers it:

    SPF  = SPF' * (1 - alpha) * (1 + beta)
    beta = beta_a * n**gamma / (beta_b + n**gamma)

Annual cost is electricity for the heating load at that SPF plus the cost
of the visits. ``alpha`` follows a normal distribution truncated to
``[0, alpha_cap]``; the upper cap keeps ``E[1 / (1 - alpha)]`` finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import MINIMIZE, Action, DecisionProblem
from ..errors import InvalidArgumentError, NumericalError
from ..rng import normals

__all__ = [
    "AshpParams",
    "maintenance_uplift",
    "seasonal_performance",
    "annual_cost",
    "sample_alpha",
    "sample_alpha_batch",
    "build_ashp_problem",
]

MAX_DRAWS = 100_000


@dataclass(frozen=True)
class AshpParams:
    heating_load: float = 1.75e6  # kWh/year
    base_spf: float = 3.0
    beta_a: float = 0.05
    beta_b: float = 2.5
    gamma: float = 1.4
    maintenance_cost: float = 2210.0  # GBP per visit, all units
    electricity_price: float = 0.34  # GBP/kWh
    alpha_mu: float = 0.01
    alpha_sigma: float = 0.25
    alpha_cap: float = 0.95
    n_max: int = 12

    def __post_init__(self):
        for name in ("heating_load", "beta_a", "beta_b", "gamma", "maintenance_cost",
                     "electricity_price", "alpha_mu"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidArgumentError(f"{name} must be positive, got {value!r}")
        # alpha_sigma = 0 is the degenerate no-uncertainty limit.
        if not (math.isfinite(self.alpha_sigma) and self.alpha_sigma >= 0):
            raise InvalidArgumentError(f"alpha_sigma must be non-negative, got {self.alpha_sigma!r}")
        if not self.base_spf > 1:
            raise InvalidArgumentError(f"base_spf must exceed 1, got {self.base_spf!r}")
        if not 0 < self.alpha_cap < 1:
            raise InvalidArgumentError(f"alpha_cap must lie in (0, 1), got {self.alpha_cap!r}")
        if not 0 <= self.alpha_mu <= self.alpha_cap:
            raise InvalidArgumentError("alpha_mu must lie inside [0, alpha_cap]")
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise InvalidArgumentError(f"n_max must be a non-negative integer, got {self.n_max!r}")


def _check_visits(n_m, params):
    if isinstance(n_m, bool) or int(n_m) != n_m or not 0 <= n_m <= params.n_max:
        raise InvalidArgumentError(
            f"maintenance count must be an integer in [0, {params.n_max}], got {n_m!r}"
        )


def maintenance_uplift(n_m: int, params: AshpParams = AshpParams()) -> float:
    """Fractional SPF improvement from ``n_m`` visits per year."""
    _check_visits(n_m, params)
    x = float(n_m) ** params.gamma
    return params.beta_a * x / (params.beta_b + x)


def seasonal_performance(alpha, n_m: int, params: AshpParams = AshpParams()):
    """SPF for degradation ``alpha`` (scalar or array) and ``n_m`` visits."""
    alpha_arr = np.asarray(alpha, dtype=float)
    if np.any(alpha_arr >= 1) or np.any(alpha_arr < 0) or not np.all(np.isfinite(alpha_arr)):
        raise InvalidArgumentError(f"degradation must lie in [0, 1), got {alpha!r}")
    spf = params.base_spf * (1.0 - alpha_arr) * (1.0 + maintenance_uplift(n_m, params))
    return float(spf) if np.ndim(alpha) == 0 else spf


def annual_cost(n_m: int, alpha, params: AshpParams = AshpParams()):
    """Electricity plus maintenance, GBP/year."""
    spf = seasonal_performance(alpha, n_m, params)
    return params.electricity_price * params.heating_load / spf + params.maintenance_cost * n_m


def sample_alpha_batch(seed: int, indices, params: AshpParams = AshpParams()) -> np.ndarray:
    """
    Truncated-normal degradation draws for many sample indices.

    Sample ``i`` uses the first of its normal draws that falls in
    ``[0, alpha_cap]``, so the value does not depend on the batch.
    """
    indices = np.atleast_1d(np.asarray(indices, dtype=np.uint64))
    out = np.full(len(indices), np.nan)
    if params.alpha_sigma == 0:
        out[:] = params.alpha_mu
        return out
    pending = np.arange(len(indices))
    draw = 0
    while pending.size:
        if draw >= MAX_DRAWS:
            raise NumericalError(
                f"truncated-normal sampler exhausted {MAX_DRAWS} draws at sample "
                f"index {int(indices[pending[0]])}"
            )
        z = params.alpha_mu + params.alpha_sigma * normals(seed, indices[pending], draw)
        ok = (z >= 0.0) & (z <= params.alpha_cap)
        out[pending[ok]] = z[ok]
        pending = pending[~ok]
        draw += 1
    return out


def sample_alpha(seed: int, index: int, params: AshpParams = AshpParams()) -> float:
    """Degradation factor of a single sample."""
    return float(sample_alpha_batch(seed, [index], params)[0])


def build_ashp_problem(params: AshpParams = AshpParams()) -> DecisionProblem:
    actions = [
        Action(id=str(n), label=f"{n} maintenance activities/year", value=n)
        for n in range(int(params.n_max) + 1)
    ]

    def sampler(seed, indices):
        return sample_alpha_batch(seed, indices, params)

    def utility(action, alpha):
        return annual_cost(action.value, alpha, params)

    return DecisionProblem(actions, sampler, utility, MINIMIZE, name="ashp")
