"""Guessing strategies and their q-normalized moments.

A strategy assigns, for every side-information value y, a bijection from the
alphabet to guess numbers 1..|X|.  Unconditional guessing is the |Y| = 1 case.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from .errors import AlphabetMismatch, DomainError, NumericalInconsistency, ZeroQ
from .pmf import JointPmf, NEParams, Pmf, as_joint, lse

# Agreement required between the joint and the escort-conditional evaluations.
SELF_CHECK_RTOL = 1e-12

__all__ = [
    "GuessingStrategy",
    "iter_strategies",
    "mismatched_strategy",
    "optimal_strategy",
    "q_log_moment",
    "q_moment",
    "q_pmf_from_strategy",
    "random_strategy",
    "strategy_count",
]


@dataclass(frozen=True, eq=False)
class GuessingStrategy:
    """Rank table ``ranks[j, i] = G(x_i | y_j)`` with 1-based guess numbers."""

    ranks: np.ndarray
    y_labels: tuple = ("_",)
    x_labels: tuple | None = None

    def __post_init__(self):
        r = np.asarray(self.ranks)
        if r.ndim == 1:
            r = r[None, :]
        if r.ndim != 2 or r.size == 0:
            raise DomainError(f"ranks must be a non-empty matrix, got shape {r.shape}")
        if not np.all(np.equal(np.mod(r, 1), 0)):
            raise DomainError("ranks must be integers")
        r = r.astype(np.int64)
        nx = r.shape[1]
        expected = np.arange(1, nx + 1)
        for row in r:
            if not np.array_equal(np.sort(row), expected):
                raise DomainError(f"row {row.tolist()} is not a permutation of 1..{nx}")
        y_labels = tuple(self.y_labels)
        if len(y_labels) != r.shape[0]:
            raise DomainError(f"{len(y_labels)} y labels for {r.shape[0]} rank rows")
        if self.x_labels is not None and len(self.x_labels) != nx:
            raise DomainError(f"{len(self.x_labels)} x labels for {nx} symbols")
        r.setflags(write=False)
        object.__setattr__(self, "ranks", r)
        object.__setattr__(self, "y_labels", y_labels)
        if self.x_labels is not None:
            object.__setattr__(self, "x_labels", tuple(self.x_labels))

    @property
    def nx(self) -> int:
        return self.ranks.shape[1]

    @property
    def ny(self) -> int:
        return self.ranks.shape[0]

    def __eq__(self, other):
        if not isinstance(other, GuessingStrategy):
            return NotImplemented
        return np.array_equal(self.ranks, other.ranks)

    def __hash__(self):
        return hash(self.ranks.tobytes())

    def __repr__(self):
        return f"GuessingStrategy(ranks={self.ranks.tolist()!r})"

    def check_source(self, J: JointPmf):
        if self.ranks.shape != J.shape:
            raise AlphabetMismatch(
                f"strategy shape {self.ranks.shape} does not match source shape {J.shape}"
            )
        if self.x_labels is not None and self.x_labels != J.x_labels:
            raise AlphabetMismatch("strategy x labels differ from the source alphabet")

    def to_dict(self) -> dict:
        d = {"y_labels": list(self.y_labels), "ranks": self.ranks.tolist()}
        if self.x_labels is not None:
            d["x_labels"] = list(self.x_labels)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> GuessingStrategy:
        ranks = np.asarray(d["ranks"])
        if ranks.ndim == 1:
            ranks = ranks[None, :]
        y_labels = d.get("y_labels") or [f"y{j}" for j in range(ranks.shape[0])]
        return cls(ranks, tuple(y_labels), d.get("x_labels"))


def _ranks_from_keys(keys: np.ndarray) -> np.ndarray:
    """Rank each row by decreasing key; ties go to the lower position."""
    order = np.argsort(-keys, axis=1, kind="stable")
    ranks = np.empty_like(order)
    rows = np.arange(keys.shape[0])[:, None]
    ranks[rows, order] = np.arange(1, keys.shape[1] + 1)
    return ranks


def optimal_strategy(source: Pmf | JointPmf, q: float) -> GuessingStrategy:
    """Guess in decreasing order of the q-escort conditional P_q(x|y).

    Ordering by ``P^q`` only depends on the sign of q: decreasing probability
    for q > 0, increasing for q < 0, label order for q = 0.
    """
    J = as_joint(source)
    keys = math.copysign(1.0, q) * J.logp if q != 0 else np.zeros(J.shape)
    return GuessingStrategy(_ranks_from_keys(keys), J.y_labels, J.x_labels)


def mismatched_strategy(Qj: Pmf | JointPmf, q: float) -> GuessingStrategy:
    """Strategy that is optimal for the assumed source ``Qj``."""
    return optimal_strategy(Qj, q)


def _rank_powers(ranks: np.ndarray, rho: float) -> np.ndarray:
    if rho == 1.0:
        return ranks.astype(np.float64)
    if rho == 2.0:
        return (ranks * ranks).astype(np.float64)
    return np.exp(rho * np.log(ranks))


def q_moment(G: GuessingStrategy, source: Pmf | JointPmf, params: NEParams) -> float:
    """q-normalized moment E_q[G^rho] = ΣΣ G^rho P^q / ΣΣ P^q."""
    J = as_joint(source)
    G.check_source(J)
    z = params.q * J.logp
    total = lse(z)
    g = _rank_powers(G.ranks, params.rho)
    value = float(np.sum(np.exp(z - total) * g))

    # escort form: Σ_y P_q(.,y) Σ_x P_q(x|y) G^rho
    row = lse(z, axis=1)
    cond = np.exp(z - row[:, None])
    escort_form = float(np.dot(np.exp(row - total), np.sum(cond * g, axis=1)))
    if abs(value - escort_form) > SELF_CHECK_RTOL * abs(value):
        raise NumericalInconsistency(
            f"q_moment: joint form {value!r} != escort form {escort_form!r}"
        )
    return value


def q_log_moment(G: GuessingStrategy, source: Pmf | JointPmf, q: float) -> float:
    """E_q[ln G] = ΣΣ P^q ln G / ΣΣ P^q."""
    J = as_joint(source)
    G.check_source(J)
    z = q * J.logp
    w = np.exp(z - lse(z))
    return float(np.sum(w * np.log(G.ranks)))


def q_pmf_from_strategy(
    G: GuessingStrategy, params: NEParams, y_count: int | None = None
) -> JointPmf:
    """Joint pmf ``1 / (|Y| s G(x|y)^{(1+rho)/q})`` attached to a strategy,
    with ``s = Σ_{i=1}^{|X|} i^{-(1+rho)/q}``.

    Its q-escort conditional is ``1 / (s' G^{1+rho})`` with
    ``s' = Σ i^{-(1+rho)}``, so the strategy it induces is ``G`` itself.
    """
    q, rho = params.q, params.rho
    if q == 0.0:
        raise ZeroQ("the pmf attached to a strategy needs q != 0")
    ny = G.ny if y_count is None else int(y_count)
    if ny != G.ny:
        raise AlphabetMismatch(f"y_count={ny} but the strategy has {G.ny} rows")
    e = (1.0 + rho) / q
    log_i = np.log(np.arange(1, G.nx + 1))
    log_s = lse(-e * log_i)
    log_g = np.log(G.ranks)
    logq = -math.log(ny) - log_s - e * log_g
    x_labels = G.x_labels if G.x_labels is not None else tuple(f"x{i}" for i in range(G.nx))
    probs = np.exp(logq)
    Qj = JointPmf(x_labels, G.y_labels, probs / probs.sum())

    z = q * Qj.logp
    esc = np.exp(z - lse(z, axis=1, keepdims=True))
    closed = np.exp(-(1.0 + rho) * log_g - lse(-(1.0 + rho) * log_i))
    if np.max(np.abs(esc - closed)) > 1e-12:
        raise NumericalInconsistency("escort of the strategy pmf departs from its closed form")
    return Qj


def strategy_count(nx: int, ny: int) -> int:
    return math.factorial(nx) ** ny


def iter_strategies(
    nx: int, ny: int = 1, y_labels: tuple | None = None, x_labels: tuple | None = None
) -> Iterator[GuessingStrategy]:
    """All per-y rank tables, in lexicographic order of the flattened ranks."""
    perms = list(itertools.permutations(range(1, nx + 1)))
    y_labels = y_labels or (("_",) if ny == 1 else tuple(f"y{j}" for j in range(ny)))
    for combo in itertools.product(perms, repeat=ny):
        yield GuessingStrategy(np.array(combo), y_labels, x_labels)


def random_strategy(
    nx: int, ny: int, rng: np.random.Generator, y_labels=None, x_labels=None
) -> GuessingStrategy:
    ranks = np.stack([rng.permutation(nx) + 1 for _ in range(ny)])
    y_labels = y_labels or (("_",) if ny == 1 else tuple(f"y{j}" for j in range(ny)))
    return GuessingStrategy(ranks, y_labels, x_labels)
