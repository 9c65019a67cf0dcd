"""Closed-form moment bounds, redundancy, and theorem checks.

Each ``check_*`` function evaluates one bound instance and returns a
:class:`BoundReport`; the report's ``violated`` flag uses a relative
tolerance of 1e-10 with an absolute floor of 1e-12.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .entropy import AlphaBeta, clne, lne, relative_ab_cond
from .errors import (
    AlphabetMismatch,
    DomainError,
    NonPositiveQ,
    NumericalInconsistency,
    ZeroQ,
)
from .guessing import (
    GuessingStrategy,
    mismatched_strategy,
    optimal_strategy,
    q_moment,
    q_pmf_from_strategy,
)
from .pmf import JointPmf, NEParams, Pmf, as_joint, escort_joint, lse

VIOLATION_RTOL = 1e-10
VIOLATION_ATOL = 1e-12
FORM_AGREEMENT_RTOL = 1e-10

CSV_FIELDS = (
    "theorem_id",
    "q",
    "rho",
    "alphabet_x",
    "alphabet_y",
    "seed",
    "moment",
    "lower",
    "upper",
    "slack_lower",
    "slack_upper",
    "violated",
)

__all__ = [
    "CSV_FIELDS",
    "BoundReport",
    "TheoremId",
    "bound_L",
    "bound_L_cond",
    "bound_L_star",
    "check_mismatch2",
    "check_mismatch3",
    "check_mismatch_sandwich",
    "check_theorem1",
    "check_theorem2",
    "check_theorem3",
    "guessing_factor",
    "lne_identity_check",
    "redundancy",
]


class TheoremId(str, enum.Enum):
    T1 = "T1"
    T2 = "T2"
    T3_sandwich = "T3_sandwich"
    M1 = "M1"
    M2 = "M2"
    M3_redundancy = "M3_redundancy"
    M4 = "M4"


@dataclass(frozen=True)
class BoundReport:
    theorem_id: TheoremId
    params: NEParams
    moment: float
    lower: float
    upper: float
    alphabet_x: int
    alphabet_y: int = 1
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def slack_lower(self) -> float:
        return self.moment - self.lower

    @property
    def slack_upper(self) -> float:
        return self.upper - self.moment

    @property
    def violated(self) -> bool:
        tol_lo = VIOLATION_RTOL * abs(self.lower) + VIOLATION_ATOL
        if self.moment < self.lower - tol_lo:
            return True
        if math.isinf(self.upper):
            return False
        tol_hi = VIOLATION_RTOL * abs(self.upper) + VIOLATION_ATOL
        return self.moment > self.upper + tol_hi

    def csv_row(self, seed: int | str = "") -> dict:
        return {
            "theorem_id": self.theorem_id.value,
            "q": repr(self.params.q),
            "rho": repr(self.params.rho),
            "alphabet_x": self.alphabet_x,
            "alphabet_y": self.alphabet_y,
            "seed": seed,
            "moment": repr(self.moment),
            "lower": repr(self.lower),
            "upper": repr(self.upper),
            "slack_lower": repr(self.slack_lower),
            "slack_upper": repr(self.slack_upper),
            "violated": int(self.violated),
        }


def guessing_factor(nx: int) -> float:
    """1 + ln|X|, the bound on Σ_{i<=|X|} 1/i."""
    return 1.0 + math.log(nx)


def _agree(a: float, b: float, what: str):
    if abs(a - b) > FORM_AGREEMENT_RTOL * max(abs(a), abs(b), 1.0):
        raise NumericalInconsistency(f"{what}: {a!r} vs {b!r}")


def bound_L(P: Pmf, params: NEParams) -> float:
    """[Σ P^{q/(1+rho)}]^{1+rho} / Σ P^q."""
    q, rho = params.q, params.rho
    log_ratio = (1.0 + rho) * lse(q / (1.0 + rho) * P.logp) - lse(q * P.logp)
    # escort form [Σ P_q^{1/(1+rho)}]^{1+rho}
    z = q * P.logp
    log_esc = z - lse(z)
    log_escort_form = (1.0 + rho) * lse(log_esc / (1.0 + rho))
    _agree(float(log_ratio), float(log_escort_form), "bound_L printed vs escort form")
    return math.exp(log_ratio)


def bound_L_cond(J: JointPmf | Pmf, params: NEParams) -> float:
    """Σ_y [Σ_x P(x,y)^{q/(1+rho)}]^{1+rho} / Σ_y Σ_x P(x,y)^q."""
    J = as_joint(J)
    q, rho = params.q, params.rho
    inner = lse(q / (1.0 + rho) * J.logp, axis=1)
    log_ratio = lse((1.0 + rho) * inner) - lse(q * J.logp)
    # escort form Σ_y P_q(.,y) [Σ_x P_q(x|y)^{1/(1+rho)}]^{1+rho}
    z = q * J.logp
    row = lse(z, axis=1)
    log_cond = z - row[:, None]
    log_escort_form = lse(
        row - lse(row) + (1.0 + rho) * lse(log_cond / (1.0 + rho), axis=1)
    )
    _agree(float(log_ratio), float(log_escort_form), "bound_L_cond printed vs escort form")
    return math.exp(log_ratio)


def bound_L_star(Pj: JointPmf | Pmf, Qj: JointPmf | Pmf, params: NEParams) -> float:
    """Mismatched bound

        Σ_y P_q(.,y) Σ_x P_q(x|y) [Σ_x' (Q_q(x'|y)/Q_q(x|y))^{1/(1+rho)}]^rho.
    """
    Pj, Qj = as_joint(Pj), as_joint(Qj)
    if Pj.shape != Qj.shape or Pj.x_labels != Qj.x_labels:
        raise AlphabetMismatch("bound_L_star: P and Q are over different alphabets")
    q, rho = params.q, params.rho
    # P_q(.,y) P_q(x|y) is the joint escort P_q(x,y)
    log_pq = escort_joint(Pj, q).logp
    zq = q * Qj.logp
    log_qq = zq - lse(zq, axis=1, keepdims=True)
    scaled = log_qq / (1.0 + rho)
    log_inner = lse(scaled, axis=1, keepdims=True) - scaled
    return math.exp(lse(log_pq + rho * log_inner))


def redundancy(Pj: JointPmf | Pmf, G: GuessingStrategy, params: NEParams) -> float:
    """(1/rho) ln E_q[G^rho] - (1/rho) ln E_q[G_P^rho] under ``Pj``."""
    best = optimal_strategy(Pj, params.q)
    return (
        math.log(q_moment(G, Pj, params)) - math.log(q_moment(best, Pj, params))
    ) / params.rho


def _strategy_pmf(G: GuessingStrategy, params: NEParams, Pj: JointPmf) -> JointPmf:
    """Q^(G) carried over to the labels of ``Pj``."""
    G.check_source(Pj)
    QG = q_pmf_from_strategy(G, params)
    return JointPmf(Pj.x_labels, Pj.y_labels, QG.probs)


def _lower_factor(nx: int, rho: float) -> float:
    return guessing_factor(nx) ** (-rho)


def check_theorem1(P: Pmf, G: GuessingStrategy, params: NEParams) -> BoundReport:
    """Unconditional lower bound (1+ln|X|)^{-rho} L_{q,rho}(X) <= E_q[G^rho]."""
    if isinstance(P, JointPmf):
        if P.ny != 1:
            raise DomainError("check_theorem1 takes an unconditional pmf")
        P = Pmf(P.x_labels, P.probs[0])
    moment = q_moment(G, P, params)
    lower = _lower_factor(P.size, params.rho) * bound_L(P, params)
    return BoundReport(TheoremId.T1, params, moment, lower, math.inf, P.size, 1)


def check_theorem2(J: JointPmf, G: GuessingStrategy, params: NEParams) -> BoundReport:
    """Conditional lower bound (1+ln|X|)^{-rho} L_{q,rho}(X|Y) <= E_q[G^rho]."""
    J = as_joint(J)
    moment = q_moment(G, J, params)
    lower = _lower_factor(J.nx, params.rho) * bound_L_cond(J, params)
    return BoundReport(TheoremId.T2, params, moment, lower, math.inf, J.nx, J.ny)


def check_theorem3(source: JointPmf | Pmf, params: NEParams) -> BoundReport:
    """Sandwich for the optimal strategy: c L <= E_q[G*^rho] <= L."""
    G = optimal_strategy(source, params.q)
    moment = q_moment(G, source, params)
    if isinstance(source, Pmf):
        L, nx, ny = bound_L(source, params), source.size, 1
    else:
        L, nx, ny = bound_L_cond(source, params), source.nx, source.ny
    return BoundReport(
        TheoremId.T3_sandwich, params, moment, _lower_factor(nx, params.rho) * L, L, nx, ny,
        extras={"strategy": G},
    )


def check_mismatch_sandwich(
    Pj: JointPmf | Pmf, Qj: JointPmf | Pmf, params: NEParams
) -> BoundReport:
    """Sandwich for the strategy tuned to an assumed source ``Qj``:

        c L*(P, Q^(G*_Q)) <= E_q[G*_Q^rho] <= L*(P, Q).
    """
    if params.q == 0.0:
        raise ZeroQ("mismatch sandwich needs q != 0")
    Pj, Qj = as_joint(Pj), as_joint(Qj)
    if not Pj.same_alphabets(Qj):
        raise AlphabetMismatch("P and Q are over different alphabets")
    G = mismatched_strategy(Qj, params.q)
    QG = _strategy_pmf(G, params, Pj)
    moment = q_moment(G, Pj, params)
    upper = bound_L_star(Pj, Qj, params)
    lower = _lower_factor(Pj.nx, params.rho) * bound_L_star(Pj, QG, params)
    return BoundReport(
        TheoremId.M1, params, moment, lower, upper, Pj.nx, Pj.ny,
        extras={"strategy": G, "q_of_strategy": QG},
    )


def check_mismatch2(Pj: JointPmf | Pmf, G: GuessingStrategy, params: NEParams) -> BoundReport:
    """Lower bound for an arbitrary strategy via its attached pmf Q^(G)."""
    if params.q == 0.0:
        raise ZeroQ("the strategy pmf needs q != 0")
    Pj = as_joint(Pj)
    QG = _strategy_pmf(G, params, Pj)
    moment = q_moment(G, Pj, params)
    lower = _lower_factor(Pj.nx, params.rho) * bound_L_star(Pj, QG, params)
    return BoundReport(TheoremId.M2, params, moment, lower, math.inf, Pj.nx, Pj.ny)


def check_mismatch3(Pj: JointPmf | Pmf, G: GuessingStrategy, params: NEParams) -> BoundReport:
    """|R_q(P,G) - q RE_{(q/(1+rho), q)}(P, Q^(G))| <= ln(1 + ln|X|).

    The report's ``moment`` is the signed deviation; the bounds are
    ``-ln(1+ln|X|)`` and ``+ln(1+ln|X|)``.
    """
    q, rho = params.q, params.rho
    if q == 0.0:
        raise ZeroQ("the strategy pmf needs q != 0")
    if q < 0.0:
        raise NonPositiveQ("relative (alpha, beta)-entropy link needs q > 0")
    Pj = as_joint(Pj)
    r = redundancy(Pj, G, params)
    QG = _strategy_pmf(G, params, Pj)
    re = relative_ab_cond(Pj, QG, AlphaBeta(q / (1.0 + rho), q))
    width = math.log(guessing_factor(Pj.nx))
    return BoundReport(
        TheoremId.M3_redundancy, params, r - q * re, -width, width, Pj.nx, Pj.ny,
        extras={"redundancy": r, "relative_entropy": re, "q_of_strategy": QG},
    )


def lne_identity_check(source: Pmf | JointPmf, params: NEParams) -> tuple[float, float]:
    """Return (ln L_{q,rho}, rho * LNE_{(q/(1+rho), q)}); the two agree.

    A joint source with more than one y value uses the conditional bound and
    the conditional LNE.
    """
    q, rho = params.q, params.rho
    if q <= 0.0:
        raise NonPositiveQ("LNE identity needs q > 0")
    ab = AlphaBeta(q / (1.0 + rho), q)
    if isinstance(source, Pmf):
        return math.log(bound_L(source, params)), rho * lne(source, ab)
    return math.log(bound_L_cond(source, params)), rho * clne(source, ab)
