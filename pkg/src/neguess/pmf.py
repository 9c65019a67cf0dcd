"""Probability-simplex data model: pmfs, joint pmfs, power sums and escorts.

Every pmf is restricted to its support at construction, so ``P(x)**q`` is
finite for every real ``q``.  Entries are kept both linearly and as natural
logs; power sums are evaluated with log-sum-exp.
"""

from __future__ import annotations

import json
import math
from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DomainError,
    DuplicateLabel,
    EmptyAlphabet,
    NonPositiveOrder,
    NonPositiveWeight,
    UnknownLabel,
)

NORMALIZATION_TOL = 1e-12

__all__ = [
    "JointPmf",
    "NEParams",
    "Pmf",
    "as_joint",
    "conditional_given_y",
    "escort",
    "escort_joint",
    "joint_from_dict",
    "joint_to_dict",
    "load_json",
    "log_power_sum",
    "lse",
    "marginal_y",
    "pmf_from_dict",
    "pmf_to_dict",
    "power_sum",
    "source_from_dict",
    "validate_joint",
    "validate_pmf",
]


def lse(a, axis=None, keepdims: bool = False):
    """log Σ exp(a) with the usual max shift."""
    a = np.asarray(a)
    m = np.max(a, axis=axis, keepdims=True)
    out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    if keepdims:
        return out
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _check_labels(labels: Sequence[Hashable], what: str = "labels") -> tuple:
    labels = tuple(labels)
    if not labels:
        raise EmptyAlphabet(f"{what} must be non-empty")
    if len(set(labels)) != len(labels):
        raise DuplicateLabel(f"duplicate entry in {what}: {labels!r}")
    return labels


def _default_labels(n: int, prefix: str = "x") -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(n))


@dataclass(frozen=True, eq=False)
class Pmf:
    """Strictly positive pmf over an ordered, labeled alphabet."""

    labels: tuple
    probs: np.ndarray
    logp: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        labels = _check_labels(self.labels)
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.shape[0] != len(labels):
            raise DomainError(
                f"expected {len(labels)} probabilities, got shape {probs.shape}"
            )
        if not np.all(np.isfinite(probs)) or np.any(probs <= 0.0):
            raise NonPositiveWeight(f"pmf entries must be > 0, got {probs.tolist()}")
        if abs(math.fsum(probs) - 1.0) > NORMALIZATION_TOL:
            raise DomainError(f"pmf sums to {math.fsum(probs)!r}, not 1")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", _frozen(probs))
        object.__setattr__(self, "logp", _frozen(np.log(probs)))

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"Pmf(labels={self.labels!r}, probs={self.probs.tolist()!r})"

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"unknown label {label!r}") from None

    def allclose(self, other: Pmf, atol: float = 1e-12) -> bool:
        return self.labels == other.labels and bool(
            np.max(np.abs(self.probs - other.probs)) <= atol
        )

    @classmethod
    def uniform(cls, labels: int | Sequence[Hashable]) -> Pmf:
        if isinstance(labels, int):
            labels = _default_labels(labels)
        n = len(labels)
        return cls(tuple(labels), np.full(n, 1.0 / n))

    def as_joint(self, y_label: Hashable = "_") -> JointPmf:
        """View as a joint pmf with a single side-information symbol."""
        return JointPmf(self.labels, (y_label,), self.probs[None, :])


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Strictly positive joint pmf; ``probs[j, i] = P(x_i, y_j)`` (rows are y)."""

    x_labels: tuple
    y_labels: tuple
    probs: np.ndarray
    logp: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        xl = _check_labels(self.x_labels, "x_labels")
        yl = _check_labels(self.y_labels, "y_labels")
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != (len(yl), len(xl)):
            raise DomainError(
                f"expected probs of shape {(len(yl), len(xl))}, got {probs.shape}"
            )
        if not np.all(np.isfinite(probs)) or np.any(probs <= 0.0):
            raise NonPositiveWeight("joint pmf entries must be > 0")
        if abs(math.fsum(probs.ravel()) - 1.0) > NORMALIZATION_TOL:
            raise DomainError(f"joint pmf sums to {math.fsum(probs.ravel())!r}, not 1")
        object.__setattr__(self, "x_labels", xl)
        object.__setattr__(self, "y_labels", yl)
        object.__setattr__(self, "probs", _frozen(probs))
        object.__setattr__(self, "logp", _frozen(np.log(probs)))

    def __repr__(self) -> str:
        return (
            f"JointPmf(x_labels={self.x_labels!r}, y_labels={self.y_labels!r}, "
            f"probs={self.probs.tolist()!r})"
        )

    @property
    def shape(self) -> tuple[int, int]:
        """(|Y|, |X|)."""
        return self.probs.shape

    @property
    def nx(self) -> int:
        return len(self.x_labels)

    @property
    def ny(self) -> int:
        return len(self.y_labels)

    def y_index(self, y) -> int:
        try:
            return self.y_labels.index(y)
        except ValueError:
            raise UnknownLabel(f"unknown y label {y!r}") from None

    def same_alphabets(self, other: JointPmf) -> bool:
        return self.x_labels == other.x_labels and self.y_labels == other.y_labels

    def allclose(self, other: JointPmf, atol: float = 1e-12) -> bool:
        return self.same_alphabets(other) and bool(
            np.max(np.abs(self.probs - other.probs)) <= atol
        )

    @classmethod
    def product(cls, px: Pmf, py: Pmf) -> JointPmf:
        """Independent coupling P_X ⊗ P_Y."""
        probs = np.outer(py.probs, px.probs)
        return cls(px.labels, py.labels, probs / probs.sum())

    @classmethod
    def uniform(cls, nx: int, ny: int) -> JointPmf:
        return cls(
            _default_labels(nx), _default_labels(ny, "y"), np.full((ny, nx), 1.0 / (nx * ny))
        )

    def conditional_matrix(self) -> np.ndarray:
        """Rows ``P(.|y)``, each summing to one."""
        return self.probs / self.probs.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class NEParams:
    """Non-extensivity index ``q`` and moment order ``rho``."""

    q: float
    rho: float

    def __post_init__(self):
        q, rho = float(self.q), float(self.rho)
        if not math.isfinite(q):
            raise DomainError(f"q must be finite, got {self.q!r}")
        if not (math.isfinite(rho) and rho > 0.0):
            raise NonPositiveOrder(f"rho must be > 0, got {self.rho!r}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "rho", rho)


def validate_pmf(labels: Sequence[Hashable] | None, weights: Iterable[float]) -> Pmf:
    """Build a Pmf from positive weights, normalizing by their sum.

    >>> validate_pmf(["a", "b"], [1, 1]).probs.tolist()
    [0.5, 0.5]
    """
    w = np.asarray(list(weights), dtype=np.float64)
    if w.size == 0:
        raise EmptyAlphabet("no weights given")
    if labels is None:
        labels = _default_labels(w.size)
    labels = _check_labels(labels)
    if len(labels) != w.size:
        raise DomainError(f"{len(labels)} labels but {w.size} weights")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        bad = [float(v) for v in w if not (math.isfinite(v) and v > 0)]
        raise NonPositiveWeight(f"weights must be finite and > 0, got {bad}")
    return Pmf(labels, w / math.fsum(w))


def validate_joint(
    x_labels: Sequence[Hashable] | None,
    y_labels: Sequence[Hashable] | None,
    weights,
) -> JointPmf:
    """Build a JointPmf from a positive |Y|x|X| weight matrix."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 2 or w.size == 0:
        raise EmptyAlphabet(f"joint weights must be a non-empty matrix, got shape {w.shape}")
    if x_labels is None:
        x_labels = _default_labels(w.shape[1])
    if y_labels is None:
        y_labels = _default_labels(w.shape[0], "y")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise NonPositiveWeight("joint weights must be finite and > 0")
    return JointPmf(tuple(x_labels), tuple(y_labels), w / math.fsum(w.ravel()))


def as_joint(source: Pmf | JointPmf) -> JointPmf:
    return source.as_joint() if isinstance(source, Pmf) else source


def log_power_sum(P: Pmf | JointPmf, t: float) -> float:
    """ln Σ P(x)^t."""
    return float(lse(t * P.logp))


def power_sum(P: Pmf | JointPmf, t: float) -> float:
    """Σ P(x)^t, evaluated through log-sum-exp."""
    return math.exp(log_power_sum(P, t))


def escort(P: Pmf, q: float) -> Pmf:
    """q-escort pmf ``P^q / Σ P^q``."""
    z = q * P.logp
    w = np.exp(z - lse(z))
    return Pmf(P.labels, w / w.sum())


def escort_joint(J: JointPmf, q: float) -> JointPmf:
    """Joint escort ``P(x,y)^q`` normalized over the full double sum."""
    z = q * J.logp
    w = np.exp(z - lse(z))
    return JointPmf(J.x_labels, J.y_labels, w / w.sum())


def marginal_y(J: JointPmf) -> Pmf:
    return Pmf(J.y_labels, J.probs.sum(axis=1))


def conditional_given_y(J: JointPmf, y) -> Pmf:
    row = J.probs[J.y_index(y)]
    return Pmf(J.x_labels, row / row.sum())


# JSON interchange


def pmf_to_dict(P: Pmf) -> dict:
    return {"labels": list(P.labels), "probs": P.probs.tolist()}


def pmf_from_dict(d: dict) -> Pmf:
    return validate_pmf(d.get("labels"), d["probs"])


def joint_to_dict(J: JointPmf) -> dict:
    return {
        "x_labels": list(J.x_labels),
        "y_labels": list(J.y_labels),
        "probs": J.probs.tolist(),
    }


def joint_from_dict(d: dict) -> JointPmf:
    return validate_joint(d.get("x_labels"), d.get("y_labels"), d["probs"])


def load_json(path: str | Path) -> Pmf | JointPmf:
    """Read a pmf or joint pmf file; the presence of ``x_labels`` or a nested
    ``probs`` list selects the joint format."""
    with open(path) as fh:
        d = json.load(fh)
    return source_from_dict(d)


def source_from_dict(d: dict) -> Pmf | JointPmf:
    if not isinstance(d, dict) or "probs" not in d:
        raise DomainError("expected an object with a 'probs' field")
    probs = d["probs"]
    if "x_labels" in d or (probs and isinstance(probs[0], list)):
        return joint_from_dict(d)
    return pmf_from_dict(d)
