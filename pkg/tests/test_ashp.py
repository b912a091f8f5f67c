import math

import numpy as np
import pytest
from scipy import integrate, stats

from voi import InvalidArgumentError, solve_voi
from voi.cases.ashp import (
    AshpParams,
    annual_cost,
    build_ashp_problem,
    maintenance_uplift,
    sample_alpha,
    sample_alpha_batch,
    seasonal_performance,
)
from voi.rng import normals


def test_uplift_values():
    assert maintenance_uplift(0) == 0.0
    # 2**1.4 = exp(1.4 ln 2) = 2.63902...
    x = math.exp(1.4 * math.log(2))
    assert maintenance_uplift(2) == pytest.approx(0.05 * x / (2.5 + x), rel=1e-14)
    assert maintenance_uplift(2) == pytest.approx(0.025676, abs=5e-7)
    assert maintenance_uplift(12) < 0.05


def test_uplift_increasing_and_bounded():
    betas = [maintenance_uplift(n) for n in range(13)]
    assert all(b2 > b1 for b1, b2 in zip(betas[1:], betas[2:]))
    assert max(betas) < AshpParams().beta_a


def test_spf_examples():
    assert seasonal_performance(0.0, 0) == 3.0
    assert seasonal_performance(0.5, 0) == 1.5
    assert seasonal_performance(0.1, 2) == pytest.approx(3 * 0.9 * 1.025676, abs=1e-5)
    assert seasonal_performance(0.1, 2) == pytest.approx(2.7693, abs=5e-5)
    with pytest.raises(InvalidArgumentError):
        seasonal_performance(1.0, 0)


def test_annual_cost_examples():
    assert annual_cost(0, 0.0) == pytest.approx(0.34 * 1.75e6 / 3, rel=1e-15)
    assert annual_cost(0, 0.0) == pytest.approx(198_333.33, abs=0.01)
    c12 = annual_cost(12, 0.0)
    energy = c12 - 12 * 2210
    assert energy < 198_333.33
    assert 12 * 2210 == 26_520


def test_annual_cost_increasing_in_alpha():
    alphas = np.linspace(0, 0.9, 19)
    for n in range(13):
        assert np.all(np.diff(annual_cost(n, alphas)) > 0)


def test_per_alpha_optimum_non_decreasing():
    best = [min(range(13), key=lambda n: annual_cost(n, a)) for a in np.arange(0, 1.0, 0.1)]
    assert best == sorted(best)


def test_visit_count_checked():
    for bad in (-1, 13, 1.5):
        with pytest.raises(InvalidArgumentError):
            maintenance_uplift(bad)


def test_alpha_draws_within_bounds_and_deterministic():
    idx = np.arange(200_000)
    a = sample_alpha_batch(5, idx)
    assert a.min() >= 0 and a.max() <= 0.95
    assert np.array_equal(a, sample_alpha_batch(5, idx))
    assert sample_alpha(5, 12345) == a[12345]


def test_alpha_mean_matches_truncated_normal():
    a = sample_alpha_batch(0, np.arange(1_000_000))
    p = AshpParams()
    lower = stats.truncnorm(-p.alpha_mu / p.alpha_sigma, np.inf, p.alpha_mu, p.alpha_sigma).mean()
    capped = stats.truncnorm(
        -p.alpha_mu / p.alpha_sigma, (p.alpha_cap - p.alpha_mu) / p.alpha_sigma,
        p.alpha_mu, p.alpha_sigma,
    ).mean()
    assert lower == pytest.approx(0.204, abs=1e-3)
    assert abs(capped - lower) < 1e-3
    assert abs(a.mean() - 0.20) < 0.01
    assert abs(a.mean() - capped) < 4 * a.std() / 1000


def test_raw_rejection_fraction():
    z = 0.01 + 0.25 * normals(0, np.arange(1_000_000), 0)
    assert abs((z < 0).mean() - stats.norm.cdf(-0.01 / 0.25)) < 0.002
    assert abs((z < 0).mean() - 0.484) < 0.002


def _quadrature(params):
    lo, hi = 0.0, params.alpha_cap
    d = stats.truncnorm(
        (lo - params.alpha_mu) / params.alpha_sigma,
        (hi - params.alpha_mu) / params.alpha_sigma,
        params.alpha_mu,
        params.alpha_sigma,
    )
    n_range = range(params.n_max + 1)
    means = [integrate.quad(lambda a: annual_cost(n, a, params) * d.pdf(a), lo, hi, limit=200)[0]
             for n in n_range]
    best = integrate.quad(
        lambda a: min(annual_cost(n, a, params) for n in n_range) * d.pdf(a), lo, hi, limit=400
    )[0]
    return int(np.argmin(means)), min(means), min(means) - best


def test_mc_against_quadrature_oracle():
    params = AshpParams()
    action, prior, evpi = _quadrature(params)
    est = solve_voi(build_ashp_problem(params), 400_000, 1)
    assert est.prior_action == str(action) == "2"
    assert abs(est.prior_value - prior) <= 4 * est.se_prior
    assert abs(est.evpi - evpi) <= 4 * est.se_evpi


def test_vanishing_uncertainty():
    est = solve_voi(build_ashp_problem(AshpParams(alpha_sigma=0.0)), 1000, 0)
    assert est.evpi == 0.0
    tiny = solve_voi(build_ashp_problem(AshpParams(alpha_sigma=1e-6)), 1000, 0)
    assert tiny.evpi == 0.0


def test_problem_actions():
    problem = build_ashp_problem()
    assert [a.value for a in problem.actions] == list(range(13))


@pytest.mark.parametrize("kwargs", [{"alpha_cap": 1.0}, {"base_spf": 1.0}, {"heating_load": -1}])
def test_params_validated(kwargs):
    with pytest.raises(InvalidArgumentError):
        AshpParams(**kwargs)
