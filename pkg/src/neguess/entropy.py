"""Entropy and divergence functionals (all in nats).

Covers Shannon and Rényi entropy, the two-parameter logarithmic norm entropy
(LNE) with its conditional extension (CLNE) and their diagonal limits, the
Kullback-Leibler divergence, and the relative (alpha, beta)-entropy in plain
and conditional-joint form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlphabetMismatch, DegenerateParameters, NonPositiveOrder
from .pmf import JointPmf, Pmf, log_power_sum, lse

# Distance to a removable singularity below which the closed-form limit is used
# (renyi) or the call is rejected (lne, clne, relative entropies).
LIMIT_TOL = 1e-9

__all__ = [
    "AlphaBeta",
    "clne",
    "clne_diag",
    "kl",
    "lne",
    "lne_diag",
    "relative_ab",
    "relative_ab_cond",
    "renyi",
    "shannon",
]


@dataclass(frozen=True)
class AlphaBeta:
    alpha: float
    beta: float

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not (math.isfinite(a) and a > 0.0):
            raise NonPositiveOrder(f"alpha must be > 0, got {self.alpha!r}")
        if not math.isfinite(b):
            raise DegenerateParameters(f"beta must be finite, got {self.beta!r}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)


def _ab(ab) -> AlphaBeta:
    return ab if isinstance(ab, AlphaBeta) else AlphaBeta(*ab)


def _require_off_diagonal(ab: AlphaBeta):
    if abs(ab.beta - ab.alpha) < LIMIT_TOL:
        raise DegenerateParameters(
            f"beta={ab.beta!r} is within {LIMIT_TOL} of alpha={ab.alpha!r}; "
            "use the diagonal form"
        )


def _require_order(alpha: float):
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise NonPositiveOrder(f"order must be > 0, got {alpha!r}")


def shannon(P: Pmf) -> float:
    return float(-np.dot(P.probs, P.logp))


def renyi(P: Pmf, alpha: float) -> float:
    _require_order(alpha)
    if abs(alpha - 1.0) < LIMIT_TOL:
        return shannon(P)
    return log_power_sum(P, alpha) / (1.0 - alpha)


def lne(P: Pmf, ab: AlphaBeta | tuple[float, float]) -> float:
    """Logarithmic norm entropy

        (αβ/(β-α)) ln[ (Σ P^α)^{1/α} / (Σ P^β)^{1/β} ],

    rearranged as (β ln ΣP^α - α ln ΣP^β)/(β-α) so that β = 0 is harmless.
    """
    ab = _ab(ab)
    _require_off_diagonal(ab)
    a, b = ab.alpha, ab.beta
    return (b * log_power_sum(P, a) - a * log_power_sum(P, b)) / (b - a)


def lne_diag(P: Pmf, alpha: float) -> float:
    """β→α limit of :func:`lne`: ``ln ΣP^α - α Σ P^α ln P / ΣP^α``."""
    _require_order(alpha)
    z = alpha * P.logp
    log_s = lse(z)
    w = np.exp(z - log_s)
    return float(log_s - alpha * np.dot(w, P.logp))


def clne(J: JointPmf, ab: AlphaBeta | tuple[float, float]) -> float:
    """Conditional LNE

        (α/(β-α)) ln[ Σ_y (Σ_x P(x,y)^α)^{β/α} / Σ_y Σ_x P(x,y)^β ].
    """
    ab = _ab(ab)
    _require_off_diagonal(ab)
    a, b = ab.alpha, ab.beta
    row_a = lse(a * J.logp, axis=1)
    num = lse((b / a) * row_a)
    den = lse(b * J.logp)
    return float(a / (b - a) * (num - den))


def clne_diag(J: JointPmf, alpha: float) -> float:
    """β→α limit of :func:`clne`, the two-term closed form

        -α ΣΣ P^α ln P / ΣΣ P^α  +  Σ_y S_y ln S_y / Σ_y S_y,   S_y = Σ_x P(x,y)^α.
    """
    _require_order(alpha)
    z = alpha * J.logp
    total = lse(z)
    w = np.exp(z - total)
    row = lse(z, axis=1)
    row_w = np.exp(row - total)
    return float(-alpha * np.sum(w * J.logp) + np.dot(row_w, row))


def kl(Q: Pmf, P: Pmf) -> float:
    """Kullback-Leibler divergence Σ Q ln(Q/P)."""
    if Q.labels != P.labels:
        raise AlphabetMismatch("kl: pmfs are over different alphabets")
    return float(np.dot(Q.probs, Q.logp - P.logp))


def _require_relative_params(ab: AlphaBeta):
    _require_off_diagonal(ab)
    if abs(ab.beta) < LIMIT_TOL:
        raise DegenerateParameters("relative (alpha, beta)-entropy is singular at beta = 0")


def relative_ab(P: Pmf, Q: Pmf, ab: AlphaBeta | tuple[float, float]) -> float:
    """Relative (α,β)-entropy of ``Q`` from ``P``

        α/(β(β-α)) ln Σ P^β Q^{α-β} + (1/β) ln Σ Q^α - 1/(β-α) ln Σ P^α.

    Non-negative by Hölder's inequality, zero iff P = Q.
    """
    ab = _ab(ab)
    _require_relative_params(ab)
    if P.labels != Q.labels:
        raise AlphabetMismatch("relative_ab: pmfs are over different alphabets")
    a, b = ab.alpha, ab.beta
    cross = lse(b * P.logp + (a - b) * Q.logp)
    return float(
        a / (b * (b - a)) * cross
        + log_power_sum(Q, a) / b
        - log_power_sum(P, a) / (b - a)
    )


def relab_cond_from_logs(logp, logq, alpha: float, beta: float):
    """Array form of :func:`relative_ab_cond` on log-probabilities.

    ``logp`` and ``logq`` have trailing shape (|Y|, |X|) and broadcast against
    each other, so a batch of reference pmfs can be scored in one call.
    """
    a, b = alpha, beta
    log_qa = lse(a * logq, axis=-1)
    log_cross = lse(b * logp + (a - b) * logq, axis=-1)
    log_pa = lse(a * logp, axis=-1)
    num = lse((b / a - 1.0) * log_qa + log_cross, axis=-1)
    den = lse((b / a) * log_pa, axis=-1)
    return a / (b * (b - a)) * (num - den)


def relative_ab_cond(Pj: JointPmf, Qj: JointPmf, ab: AlphaBeta | tuple[float, float]) -> float:
    """Conditional relative (α,β)-entropy between joint pmfs

        α/(β(β-α)) ln[ Σ_y {Σ_x P^β Q^{α-β}} {Σ_x Q^α}^{β/α-1} / Σ_y {Σ_x P^α}^{β/α} ].

    Depends on ``Qj`` only through its conditionals Q(x|y).  With a single y
    it equals :func:`relative_ab`.
    """
    ab = _ab(ab)
    _require_relative_params(ab)
    if not Pj.same_alphabets(Qj):
        raise AlphabetMismatch("relative_ab_cond: joint pmfs are over different alphabets")
    return float(relab_cond_from_logs(Pj.logp, Qj.logp, ab.alpha, ab.beta))
