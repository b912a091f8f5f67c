"""
Monte Carlo and exact solvers for the prior decision problem, the
perfect-information problem and the expected value of perfect information.

All Monte Carlo estimates share one sample set: sample ``i`` is drawn from
the stream keyed by ``(seed, i)`` and every action is scored on it. The
EVPI estimate is therefore the mean of per-sample regrets, each of which is
non-negative, so the estimate itself can never be negative.

Samples are processed in fixed-size chunks (:data:`CHUNK`). Each chunk is
reduced to ``(count, sum, M2)`` statistics and the chunk statistics are
combined in a fixed pairwise tree. The chunk layout depends only on the
sample count, so results are bit-identical for any number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .errors import InvalidArgumentError, NumericalError
from .rng import check_seed

__all__ = [
    "CHUNK",
    "DEFAULT_SAMPLES",
    "MAXIMIZE",
    "MINIMIZE",
    "Action",
    "DecisionProblem",
    "TabularProblem",
    "PriorSolution",
    "VoiEstimate",
    "solve_prior",
    "solve_preposterior_perfect",
    "solve_voi",
    "solve_exact",
    "convergence_trace",
]

MAXIMIZE = "maximize"
MINIMIZE = "minimize"
DEFAULT_SAMPLES = 1_000_000
CHUNK = 1 << 14


@dataclass(frozen=True)
class Action:
    """One decision alternative. ``value`` is the model-level setting."""

    id: str
    label: str
    value: Any = None


@dataclass(frozen=True)
class DecisionProblem:
    """
    A decision problem with a finite action set and a sampled parameter.

    Attributes
    ----------
    actions : sequence of Action
        Non-empty, unique ids.
    sampler : callable
        ``sampler(seed, indices) -> ndarray`` giving the parameter value for
        each sample index. Must depend only on ``(seed, index)`` per element.
    utility : callable
        ``utility(action, thetas) -> ndarray`` evaluated elementwise.
    sense : {"maximize", "minimize"}
    name : str
    """

    actions: Sequence[Action]
    sampler: Callable[[int, np.ndarray], np.ndarray]
    utility: Callable[[Action, np.ndarray], np.ndarray]
    sense: str = MAXIMIZE
    name: str = "problem"

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        _check_actions(self.actions)
        _check_sense(self.sense)

    def sample(self, seed: int, index: int):
        """Parameter value of a single sample."""
        return self.sampler(check_seed(seed), np.array([index], dtype=np.uint64))[0]

    def utility_matrix(self, thetas: np.ndarray, first_index: int = 0) -> np.ndarray:
        """Utilities of every action on ``thetas``, shape (n_actions, n)."""
        out = np.empty((len(self.actions), len(thetas)))
        for a, action in enumerate(self.actions):
            values = np.asarray(self.utility(action, thetas), dtype=float)
            out[a] = np.broadcast_to(values, (len(thetas),))
            bad = ~np.isfinite(out[a])
            if bad.any():
                i = first_index + int(np.argmax(bad))
                raise NumericalError(
                    f"non-finite utility {out[a][bad][0]!r} for action "
                    f"{action.id!r} at sample index {i}"
                )
        return out


@dataclass(frozen=True)
class TabularProblem:
    """Finite-support problem with explicit probabilities and utilities."""

    actions: Sequence[Action]
    states: Sequence[Any]
    probabilities: Sequence[float]
    utilities: Sequence[Sequence[float]]
    sense: str = MAXIMIZE
    name: str = "tabular"

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "states", tuple(self.states))
        _check_actions(self.actions)
        _check_sense(self.sense)
        p = np.asarray(self.probabilities, dtype=float)
        u = np.asarray(self.utilities, dtype=float)
        if p.ndim != 1 or len(p) != len(self.states) or len(p) == 0:
            raise InvalidArgumentError(
                f"probabilities must have one entry per state "
                f"({len(self.states)}), got {len(p)}"
            )
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise InvalidArgumentError("probabilities must be finite and non-negative")
        total = math.fsum(p)
        if abs(total - 1.0) > 1e-12:
            raise InvalidArgumentError(f"probabilities sum to {total:.15g}, expected 1")
        if u.ndim != 2 or u.shape != (len(self.actions), len(self.states)):
            raise InvalidArgumentError(
                f"utilities must be a {len(self.actions)}x{len(self.states)} "
                f"matrix (actions x states), got shape {u.shape}"
            )
        if not np.all(np.isfinite(u)):
            raise InvalidArgumentError("utilities must be finite")
        object.__setattr__(self, "probabilities", tuple(float(x) for x in p))
        object.__setattr__(self, "utilities", tuple(tuple(float(x) for x in row) for row in u))

    def to_decision_problem(self) -> DecisionProblem:
        """Monte Carlo view: state indices drawn by inverse CDF on the shared stream."""
        from .rng import uniforms

        cdf = np.cumsum(self.probabilities)
        cdf[-1] = 1.0
        table = np.asarray(self.utilities)
        last = len(cdf) - 1

        def sampler(seed, indices):
            u = uniforms(seed, indices, 0)
            return np.minimum(np.searchsorted(cdf, u, side="right"), last)

        lookup = {action.id: row for action, row in zip(self.actions, table)}

        def utility(action, states):
            return lookup[action.id][states]

        return DecisionProblem(self.actions, sampler, utility, self.sense, self.name)


@dataclass(frozen=True)
class PriorSolution:
    prior_action: str
    prior_value: float
    per_action_values: tuple
    se_prior: float


@dataclass(frozen=True)
class VoiEstimate:
    """
    Result of one value-of-information analysis.

    ``per_action_values`` holds ``(action id, expected utility, standard
    error)`` triples in action order.
    """

    prior_action: str
    prior_value: float
    preposterior_value: float
    evpi: float
    se_prior: float
    se_evpi: float
    per_action_values: tuple
    n_samples: int
    seed: int
    sense: str = MAXIMIZE
    se_preposterior: float = 0.0
    prior_action_label: str = ""

    def to_dict(self) -> dict:
        return {
            "prior_action": self.prior_action,
            "prior_action_label": self.prior_action_label,
            "prior_value": self.prior_value,
            "preposterior_value": self.preposterior_value,
            "evpi": self.evpi,
            "se_prior": self.se_prior,
            "se_evpi": self.se_evpi,
            "se_preposterior": self.se_preposterior,
            "per_action_values": [
                {"action": a, "value": v, "se": s} for a, v, s in self.per_action_values
            ],
            "n_samples": self.n_samples,
            "seed": self.seed,
            "sense": self.sense,
        }


def _check_actions(actions):
    if not actions:
        raise InvalidArgumentError("a decision problem needs at least one action")
    ids = [a.id for a in actions]
    if len(set(ids)) != len(ids):
        raise InvalidArgumentError(f"action ids must be unique, got {ids}")


def _check_sense(sense):
    if sense not in (MAXIMIZE, MINIMIZE):
        raise InvalidArgumentError(f"sense must be 'maximize' or 'minimize', got {sense!r}")


def _check_samples(n_samples):
    if isinstance(n_samples, bool) or not isinstance(n_samples, (int, np.integer)):
        raise InvalidArgumentError(f"n_samples must be an integer, got {n_samples!r}")
    if n_samples < 2:
        raise InvalidArgumentError(f"n_samples must be at least 2, got {n_samples}")
    return int(n_samples)


def _argbest(values, sense) -> int:
    # np.argmax/argmin return the first occurrence: lowest index wins ties.
    return int(np.argmax(values) if sense == MAXIMIZE else np.argmin(values))


# -- chunked statistics --------------------------------------------------------
#
# A leaf summarises one chunk as (n, sums, m2) for a stack of series:
# rows 0..k-1 are the per-action utilities, row k the per-sample best
# utility, rows k+1..2k the per-sample regret of each action. The regret
# of action a on a sample is the sense-corrected gap to the best action,
# which is >= 0 elementwise.


@dataclass(frozen=True)
class _Leaf:
    n: int
    sums: np.ndarray
    m2: np.ndarray


def _leaf(problem: DecisionProblem, seed: int, start: int, stop: int) -> _Leaf:
    indices = np.arange(start, stop, dtype=np.uint64)
    thetas = problem.sampler(seed, indices)
    u = problem.utility_matrix(thetas, first_index=start)
    if problem.sense == MAXIMIZE:
        best = u.max(axis=0)
        regret = best - u
    else:
        best = u.min(axis=0)
        regret = u - best
    series = np.vstack([u, best[None, :], regret])
    n = stop - start
    sums = series.sum(axis=1)
    centred = series - (sums / n)[:, None]
    m2 = np.einsum("ij,ij->i", centred, centred)
    return _Leaf(n, sums, m2)


def _merge(a: _Leaf, b: _Leaf) -> _Leaf:
    n = a.n + b.n
    delta = b.sums / b.n - a.sums / a.n
    m2 = a.m2 + b.m2 + delta * delta * (a.n * b.n / n)
    return _Leaf(n, a.sums + b.sums, m2)


def _reduce(leaves: list[_Leaf]) -> _Leaf:
    level = list(leaves)
    while len(level) > 1:
        nxt = [_merge(level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]


def _bounds(n_samples: int):
    return [(s, min(s + CHUNK, n_samples)) for s in range(0, n_samples, CHUNK)]


def _leaves(problem, seed, bounds, workers: int) -> list[_Leaf]:
    if workers <= 1 or len(bounds) == 1:
        return [_leaf(problem, seed, s, e) for s, e in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: _leaf(problem, seed, *b), bounds))


def _estimate(problem: DecisionProblem, total: _Leaf, seed: int) -> VoiEstimate:
    k = len(problem.actions)
    n = total.n
    means = total.sums / n
    se = np.sqrt(total.m2 / (n - 1) / n)
    a_star = _argbest(means[:k], problem.sense)
    prior_value = float(means[a_star])
    evpi = float(means[k + 1 + a_star])
    if problem.sense == MAXIMIZE:
        preposterior = prior_value + evpi
    else:
        preposterior = prior_value - evpi
    per_action = tuple(
        (action.id, float(means[a]), float(se[a])) for a, action in enumerate(problem.actions)
    )
    return VoiEstimate(
        prior_action=problem.actions[a_star].id,
        prior_value=prior_value,
        preposterior_value=preposterior,
        evpi=evpi,
        se_prior=float(se[a_star]),
        se_evpi=float(se[k + 1 + a_star]),
        per_action_values=per_action,
        n_samples=n,
        seed=seed,
        sense=problem.sense,
        se_preposterior=float(se[k]),
        prior_action_label=problem.actions[a_star].label,
    )


def _run(problem, n_samples, seed, workers):
    n_samples = _check_samples(n_samples)
    seed = check_seed(seed)
    leaves = _leaves(problem, seed, _bounds(n_samples), workers)
    return _estimate(problem, _reduce(leaves), seed), leaves


def solve_voi(
    problem: DecisionProblem,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    workers: int = 1,
) -> VoiEstimate:
    """
    Estimate prior value, perfect-information value and EVPI together.

    Parameters
    ----------
    problem : DecisionProblem
    n_samples : int
        Monte Carlo sample count, at least 2.
    seed : int
        64-bit unsigned seed of the sample stream.
    workers : int
        Threads used to evaluate chunks. Does not affect the result.

    Returns
    -------
    VoiEstimate
    """
    estimate, _ = _run(problem, n_samples, seed, workers)
    return estimate


def solve_prior(
    problem: DecisionProblem,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    workers: int = 1,
) -> PriorSolution:
    """Best action under the prior alone, with per-action sample means."""
    est = solve_voi(problem, n_samples, seed, workers)
    return PriorSolution(est.prior_action, est.prior_value, est.per_action_values, est.se_prior)


def solve_preposterior_perfect(
    problem: DecisionProblem,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    workers: int = 1,
) -> tuple[float, float]:
    """Mean and standard error of the per-sample best utility."""
    n_samples = _check_samples(n_samples)
    seed = check_seed(seed)
    total = _reduce(_leaves(problem, seed, _bounds(n_samples), workers))
    k = len(problem.actions)
    mean = float(total.sums[k] / total.n)
    se = float(math.sqrt(total.m2[k] / (total.n - 1) / total.n))
    return mean, se


def solve_exact(problem: TabularProblem) -> VoiEstimate:
    """Enumerate a finite problem exactly; all standard errors are zero."""
    if not isinstance(problem, TabularProblem):
        raise InvalidArgumentError("solve_exact needs a TabularProblem")
    p = np.asarray(problem.probabilities)
    u = np.asarray(problem.utilities)
    expected = np.array([math.fsum(row * p) for row in u])
    a_star = _argbest(expected, problem.sense)
    if problem.sense == MAXIMIZE:
        regret = u.max(axis=0)[None, :] - u
    else:
        regret = u - u.min(axis=0)[None, :]
    evpi = math.fsum(regret[a_star] * p)
    prior_value = float(expected[a_star])
    preposterior = prior_value + evpi if problem.sense == MAXIMIZE else prior_value - evpi
    return VoiEstimate(
        prior_action=problem.actions[a_star].id,
        prior_value=prior_value,
        preposterior_value=preposterior,
        evpi=float(evpi),
        se_prior=0.0,
        se_evpi=0.0,
        per_action_values=tuple(
            (action.id, float(v), 0.0) for action, v in zip(problem.actions, expected)
        ),
        n_samples=len(problem.states),
        seed=0,
        sense=problem.sense,
        prior_action_label=problem.actions[a_star].label,
    )


def convergence_trace(
    problem: DecisionProblem,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    stride: int = 10_000,
    workers: int = 1,
) -> list[tuple[int, float, float]]:
    """
    Running ``(n, prior_value, evpi)`` every ``stride`` samples.

    Row ``m`` is exactly what :func:`solve_voi` returns for ``n_samples=m``,
    and the last row always covers all ``n_samples``.
    """
    n_samples = _check_samples(n_samples)
    seed = check_seed(seed)
    if isinstance(stride, bool) or not isinstance(stride, (int, np.integer)) or stride < 1:
        raise InvalidArgumentError(f"stride must be a positive integer, got {stride!r}")
    full = _leaves(problem, seed, _bounds(n_samples - n_samples % CHUNK), workers)
    checkpoints = list(range(stride, n_samples + 1, stride))
    if not checkpoints or checkpoints[-1] != n_samples:
        checkpoints.append(n_samples)
    rows = []
    for m in checkpoints:
        if m < 2:
            continue
        q, r = divmod(m, CHUNK)
        leaves = full[:q]
        if r:
            leaves = leaves + [_leaf(problem, seed, q * CHUNK, m)]
        est = _estimate(problem, _reduce(leaves), seed)
        rows.append((m, est.prior_value, est.evpi))
    return rows
