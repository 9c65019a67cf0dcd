"""Guessing under an uncertain source drawn from a finite family.

The reference pmf ``Q*`` minimizes the worst-case scaled relative entropy

    F(Q) = max_{P in family} q * RE_{(q/(1+rho), q)}(P, Q),

and the strategy tuned to ``Q*`` has worst-case redundancy within
``ln(1 + ln|X|)`` of ``C = F(Q*)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import BoundReport, TheoremId, guessing_factor, redundancy
from .entropy import relab_cond_from_logs
from .errors import AlphabetMismatch, DomainError, NonConvergence, NonPositiveQ
from .guessing import (
    GuessingStrategy,
    iter_strategies,
    mismatched_strategy,
    optimal_strategy,
    random_strategy,
    strategy_count,
)
from .pmf import (
    JointPmf,
    NEParams,
    as_joint,
    joint_from_dict,
    joint_to_dict,
    lse,
    pmf_from_dict,
)

EXHAUSTIVE_LIMIT = 10_000

__all__ = [
    "MinimaxResult",
    "RobustReport",
    "SolverConfig",
    "SourceFamily",
    "family_objective",
    "robust_strategy",
    "solve_minimax",
    "worst_redundancy",
]


@dataclass(frozen=True, eq=False)
class SourceFamily:
    members: tuple

    def __post_init__(self):
        members = tuple(as_joint(m) for m in self.members)
        if not members:
            raise DomainError("source family must have at least one member")
        first = members[0]
        for m in members[1:]:
            if not first.same_alphabets(m):
                raise AlphabetMismatch("family members are over different alphabets")
        object.__setattr__(self, "members", members)

    def __len__(self):
        return len(self.members)

    @property
    def nx(self) -> int:
        return self.members[0].nx

    @property
    def ny(self) -> int:
        return self.members[0].ny

    @property
    def x_labels(self) -> tuple:
        return self.members[0].x_labels

    @property
    def y_labels(self) -> tuple:
        return self.members[0].y_labels

    def log_stack(self) -> np.ndarray:
        """Member log-probabilities, shape (K, |Y|, |X|)."""
        return np.stack([m.logp for m in self.members])

    def barycenter(self) -> JointPmf:
        p = np.mean([m.probs for m in self.members], axis=0)
        return JointPmf(self.x_labels, self.y_labels, p / p.sum())

    def to_dict(self) -> dict:
        return {"members": [joint_to_dict(m) for m in self.members]}

    @classmethod
    def from_dict(cls, d: dict) -> SourceFamily:
        members = []
        for m in d["members"]:
            if "x_labels" in m or (m["probs"] and isinstance(m["probs"][0], list)):
                members.append(joint_from_dict(m))
            else:
                members.append(pmf_from_dict(m))
        return cls(tuple(members))


@dataclass(frozen=True)
class SolverConfig:
    """Settings for :func:`solve_minimax`.

    The smoothed max ``T ln Σ exp(f_k / T)`` is annealed geometrically from
    ``t_start`` to ``t_end`` over ``stages`` stages.
    """

    restarts: int = 8
    tol: float = 1e-9
    max_iter: int = 100_000
    seed: int = 0
    t_start: float = 10.0
    t_end: float = 1e-7
    stages: int = 19
    step: float = 1.0
    fd_step: float = 1e-6

    def __post_init__(self):
        if self.restarts < 0 or self.max_iter < 1 or self.stages < 1:
            raise DomainError("restarts >= 0, max_iter >= 1 and stages >= 1 are required")
        if not (self.tol > 0 and self.t_start >= self.t_end > 0 and self.fd_step > 0):
            raise DomainError("tol, temperatures and fd_step must be positive")


@dataclass(frozen=True, eq=False)
class MinimaxResult:
    q_star: JointPmf
    c_value: float
    iterations: int
    converged: bool
    certificate_gap: float
    restart_values: tuple = ()

    def to_dict(self) -> dict:
        return {
            "q_star": joint_to_dict(self.q_star),
            "c_value": self.c_value,
            "iterations": self.iterations,
            "converged": self.converged,
            "certificate_gap": self.certificate_gap,
        }


@dataclass(frozen=True)
class RobustReport(BoundReport):
    """Two-sided worst-redundancy report for the robust strategy.

    ``moment`` is the worst redundancy of the robust strategy; ``lower`` and
    ``upper`` are ``C -/+ ln(1+ln|X|)``.  ``min_tested_worst`` is the smallest
    worst redundancy among the other strategies examined, which must also stay
    above ``lower``.
    """

    min_tested_worst: float = math.inf
    strategies_tested: int = 0
    exhaustive: bool = False

    @property
    def violated(self) -> bool:
        if super().violated:
            return True
        tol = 1e-10 * abs(self.lower) + 1e-12
        return self.min_tested_worst < self.lower - tol


def _check_params(params: NEParams):
    if params.q <= 0.0:
        raise NonPositiveQ("minimax redundancy is defined here for q > 0")


def family_objective(log_members: np.ndarray, log_q: np.ndarray, params: NEParams) -> np.ndarray:
    """Per-member values ``q RE(P_k, Q_b)``; returns shape (B, K).

    ``log_q`` has shape (B, |Y|, |X|) and need not be normalized: the
    conditional relative entropy only sees Q(x|y).
    """
    q, rho = params.q, params.rho
    vals = relab_cond_from_logs(log_members[None, :, :, :], log_q[:, None, :, :],
                                q / (1.0 + rho), q)
    return q * vals


def worst_redundancy(family: SourceFamily, G: GuessingStrategy, params: NEParams) -> float:
    """sup over the (finite) family of R_q(P, G)."""
    return max(redundancy(P, G, params) for P in family.members)


def _smoothed(vals: np.ndarray, temp: float) -> np.ndarray:
    return temp * lse(vals / temp, axis=-1)


def _descend(log_members, theta, params, config, budget):
    """Annealed multiplicative-weights descent from one starting point.

    Returns (theta, iterations used, converged flag).
    """
    n = theta.size
    shape = theta.shape
    h = config.fd_step
    eye = np.eye(n).reshape((n,) + shape)
    temps = np.geomspace(config.t_start, config.t_end, config.stages)
    used = 0
    converged = False

    def value(th, temp):
        return float(_smoothed(family_objective(log_members, th[None], params)[0], temp))

    for stage, temp in enumerate(temps):
        last = stage == len(temps) - 1
        eta = config.step
        f_cur = value(theta, temp)
        stage_done = False
        while used < budget:
            used += 1
            probes = np.concatenate([theta + h * eye, theta - h * eye])
            fp = _smoothed(family_objective(log_members, probes, params), temp)
            grad = ((fp[:n] - fp[n:]) / (2 * h)).reshape(shape)
            accepted = False
            while eta > 1e-14:
                cand = theta - eta * grad
                cand = cand - cand.max()
                f_new = value(cand, temp)
                if f_new <= f_cur - 1e-4 * eta * float(np.sum(grad * grad)):
                    accepted = True
                    break
                eta *= 0.5
            if not accepted:
                stage_done = True
                break
            theta, delta, f_cur = cand, f_cur - f_new, f_new
            eta = min(eta * 2.0, 1e3)
            if delta < config.tol:
                stage_done = True
                break
        if last:
            converged = stage_done
        if used >= budget:
            break
    return theta, used, converged


def solve_minimax(
    family: SourceFamily, params: NEParams, config: SolverConfig | None = None
) -> MinimaxResult:
    """Minimize the worst-case relative entropy over reference pmfs.

    Restarts from ``config.restarts`` Dirichlet(1) points plus the family
    barycenter; the best final value wins (ties go to the earlier restart).
    """
    _check_params(params)
    config = config or SolverConfig()
    log_members = family.log_stack()
    shape = log_members.shape[1:]
    rng = np.random.Generator(np.random.Philox(key=config.seed))
    starts = [family.barycenter().logp.copy()]
    for _ in range(config.restarts):
        starts.append(np.log(rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)))

    best = None
    total_iter = 0
    any_converged = False
    values = []
    for theta0 in starts:
        theta, used, conv = _descend(log_members, np.array(theta0), params, config,
                                     config.max_iter)
        total_iter += used
        f = float(family_objective(log_members, theta[None], params)[0].max())
        values.append(f)
        if best is None or f < best[0]:
            best = (f, theta, conv)
        any_converged = any_converged or conv

    _, theta, conv = best
    # only conditionals matter; give Q* the family's average y-marginal
    cond = np.exp(theta - lse(theta, axis=1, keepdims=True))
    py = family.barycenter().probs.sum(axis=1, keepdims=True)
    q_star = JointPmf(family.x_labels, family.y_labels, cond * py / np.sum(cond * py))
    c_value = float(family_objective(log_members, q_star.logp[None], params)[0].max())

    # weak-duality bound max_P min_{Q' in probes} q RE(P, Q'); the probe set
    # holds the members themselves, so this is the trivial bound 0 <= C
    probes = np.concatenate([log_members, q_star.logp[None]])
    lower = float(np.max(np.min(family_objective(log_members, probes, params), axis=0)))
    return MinimaxResult(
        q_star=q_star,
        c_value=c_value,
        iterations=total_iter,
        converged=bool(conv),
        certificate_gap=max(c_value - lower, 0.0),
        restart_values=tuple(values),
    )


def robust_strategy(
    family: SourceFamily,
    params: NEParams,
    config: SolverConfig | None = None,
    result: MinimaxResult | None = None,
    samples: int = 200,
) -> tuple[GuessingStrategy, RobustReport]:
    """Strategy tuned to ``Q*`` and its two-sided worst-redundancy report.

    The lower side is checked against every strategy when there are at most
    10^4 of them, otherwise against the members' optimal strategies plus
    ``samples`` seeded random ones.
    """
    _check_params(params)
    config = config or SolverConfig()
    if result is None:
        result = solve_minimax(family, params, config)
    G = mismatched_strategy(result.q_star, params.q)
    worst = worst_redundancy(family, G, params)

    exhaustive = strategy_count(family.nx, family.ny) <= EXHAUSTIVE_LIMIT
    if exhaustive:
        candidates = iter_strategies(family.nx, family.ny, family.y_labels)
    else:
        rng = np.random.Generator(np.random.Philox(key=config.seed + 1))
        candidates = [optimal_strategy(P, params.q) for P in family.members]
        candidates += [random_strategy(family.nx, family.ny, rng, family.y_labels)
                       for _ in range(samples)]
    tested = 0
    min_worst = math.inf
    for cand in candidates:
        tested += 1
        min_worst = min(min_worst, worst_redundancy(family, cand, params))

    width = math.log(guessing_factor(family.nx))
    report = RobustReport(
        TheoremId.M4, params, worst, result.c_value - width, result.c_value + width,
        family.nx, family.ny, extras={"minimax": result},
        min_tested_worst=min_worst, strategies_tested=tested, exhaustive=exhaustive,
    )
    return G, report


def require_converged(result: MinimaxResult) -> MinimaxResult:
    if not result.converged:
        raise NonConvergence("minimax solver hit its iteration limit", result=result)
    return result
