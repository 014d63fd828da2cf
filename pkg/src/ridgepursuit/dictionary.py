"""Ridge-unit dictionary: activations, unit evaluation, and sparse l1-ball covers.

A ridge unit is x -> sign * phi(theta . (x, 1)) where phi is a 1-Lipschitz
scalar activation and the internal parameter theta (bias folded into the last
coordinate) has l1 norm at most Lambda.  The cover construction enumerates the
vectors (Lambda/m) * sum of m signed standard basis vectors (zero allowed),
whose multiset count is C(2d+m, m); sparsify_theta draws random cover members
concentrating near a given theta.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Activation",
    "RidgeUnit",
    "SparseCover",
    "CoverSizeError",
    "eval_unit",
    "enumerate_cover",
    "sparsify_theta",
    "cover_count_library",
    "cover_count_log_bound",
    "lift",
    "library_matrix",
]

ACTIVATION_KINDS = ("ramp", "sine", "tanh")

# Sup of |phi(u)| over the usage range: ramps are evaluated on |u| <= Lambda = 2
# and left unnormalized, so their bound is 2; sine and tanh are globally in [-1, 1].
_BOUNDS = {"ramp": 2.0, "sine": 1.0, "tanh": 1.0}


# ----------------------------------------------------------------------------
# Types
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Activation:
    """A 1-Lipschitz scalar map applied to theta . (x, 1)."""

    kind: str

    def __post_init__(self) -> None:
        if self.kind not in ACTIVATION_KINDS:
            raise ValueError(
                f"unknown activation kind {self.kind!r}; expected one of {ACTIVATION_KINDS}"
            )

    def __call__(self, u: np.ndarray | float) -> np.ndarray | float:
        if self.kind == "ramp":
            return np.maximum(u, 0.0)
        if self.kind == "sine":
            return np.sin(u)
        return np.tanh(u)

    @property
    def bound(self) -> float:
        """Sup-norm of the activation on its usage range."""
        return _BOUNDS[self.kind]

    def derivative(self, u: np.ndarray | float) -> np.ndarray | float:
        """Pointwise derivative (subgradient 0 at the ramp kink)."""
        if self.kind == "ramp":
            return np.where(np.asarray(u) > 0.0, 1.0, 0.0)
        if self.kind == "sine":
            return np.cos(u)
        t = np.tanh(u)
        return 1.0 - t * t


@dataclass(frozen=True, eq=False)
class RidgeUnit:
    """One dictionary element h(x) = sign * phi(theta . (x, 1)).

    theta has length d+1; the final coordinate multiplies the constant-1
    input slot and acts as the bias.
    """

    activation: Activation
    theta: np.ndarray
    sign: int = 1

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=float)
        if theta.ndim != 1:
            raise ValueError(f"theta must be a vector, got shape {theta.shape}")
        if self.sign not in (-1, 1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        theta = theta.copy()
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @property
    def input_dim(self) -> int:
        return self.theta.shape[0] - 1

    def key(self) -> tuple:
        """Deterministic sort key (activation, sign, coordinates)."""
        return (self.activation.kind, self.sign, tuple(self.theta))


class CoverSizeError(ValueError):
    """Raised when full cover enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class SparseCover:
    """Enumerated sparse cover of the l1 ball of radius lam in dimension d.

    ``size`` counts the generating multisets, C(2d + m_grid, m_grid); distinct
    multisets can realize the same vector (e.g. {+e1, -e1} and {0, 0}), so
    ``thetas`` holds the deduplicated vectors in lexicographic order.
    """

    d: int
    m_grid: int
    lam: float
    thetas: np.ndarray = field(repr=False)
    size: int

    def __len__(self) -> int:
        return self.size

    @property
    def n_distinct(self) -> int:
        return self.thetas.shape[0]

    def contains(self, theta: np.ndarray, tol: float = 1e-9) -> bool:
        """Whether theta coincides with some cover vector up to tol."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.d,):
            return False
        return bool(np.any(np.all(np.abs(self.thetas - theta) <= tol, axis=1)))


# ----------------------------------------------------------------------------
# Operations
# ----------------------------------------------------------------------------


def lift(X: np.ndarray) -> np.ndarray:
    """Append the constant-1 bias coordinate: (n, d) -> (n, d+1)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    ones = np.ones((X.shape[0], 1))
    return np.hstack([X, ones])


def eval_unit(unit: RidgeUnit, x: np.ndarray) -> float | np.ndarray:
    """Evaluate sign * phi(theta . (x, 1)) at a point (d,) or batch (n, d)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = lift(x)
    if X.shape[1] != unit.theta.shape[0]:
        raise ValueError(
            f"dimension mismatch: x has {X.shape[1] - 1} coordinates, "
            f"theta expects {unit.theta.shape[0] - 1}"
        )
    values = unit.sign * unit.activation(X @ unit.theta)
    return float(values[0]) if single else values


def library_matrix(activation: Activation, thetas: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Evaluate phi(theta . (x, 1)) for every theta (rows) at every x: (n, K)."""
    X_lift = lift(X)
    if X_lift.shape[1] != thetas.shape[1]:
        raise ValueError(
            f"dimension mismatch: lifted design has {X_lift.shape[1]} columns, "
            f"thetas have {thetas.shape[1]}"
        )
    return np.asarray(activation(X_lift @ thetas.T))


def enumerate_cover(
    d: int, m_grid: int, lam: float, cap: int = 10**6
) -> SparseCover:
    """Enumerate all vectors (lam/m_grid) * sum of m_grid symbols from {+-e_j, 0}.

    The multiset count is C(2d + m_grid, m_grid); enumeration refuses to run
    past ``cap`` multisets.
    """
    if d < 1 or m_grid < 1:
        raise ValueError(f"need d >= 1 and m_grid >= 1, got d={d}, m_grid={m_grid}")
    if lam <= 0:
        raise ValueError(f"need lam > 0, got {lam}")
    size = math.comb(2 * d + m_grid, m_grid)
    if size > cap:
        raise CoverSizeError(
            f"cover has C({2 * d + m_grid},{m_grid}) = {size} elements, above the "
            f"cap {cap}; use sampled covers (sparsify_theta) instead"
        )
    # Symbol i: 0 is the zero vector, 1..d is +e_i, d+1..2d is -e_{i-d}.
    scale = lam / m_grid
    rows = np.zeros((size, d))
    for pos, combo in enumerate(
        itertools.combinations_with_replacement(range(2 * d + 1), m_grid)
    ):
        for sym in combo:
            if sym == 0:
                continue
            if sym <= d:
                rows[pos, sym - 1] += scale
            else:
                rows[pos, sym - d - 1] -= scale
    thetas = np.unique(rows, axis=0)
    thetas.setflags(write=False)
    return SparseCover(d=d, m_grid=m_grid, lam=float(lam), thetas=thetas, size=size)


def sparsify_theta(
    theta: np.ndarray, m_grid: int, lam: float, rng: np.random.Generator
) -> np.ndarray:
    """Random sparse approximation of theta inside the enumerable cover.

    Draws m_grid i.i.d. symbols, taking lam * sgn(theta_j) e_j with probability
    |theta_j|/lam and the zero vector with the leftover mass, and averages.
    The result is unbiased for theta, and the expected empirical squared
    distortion over any design is at most lam * ||theta||_1 * max-norm / m_grid.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1:
        raise ValueError(f"theta must be a vector, got shape {theta.shape}")
    if m_grid < 1:
        raise ValueError(f"need m_grid >= 1, got {m_grid}")
    l1 = float(np.abs(theta).sum())
    if l1 > lam * (1 + 1e-12):
        raise ValueError(f"||theta||_1 = {l1} exceeds lam = {lam}")
    d = theta.shape[0]
    probs = np.empty(d + 1)
    probs[:d] = np.abs(theta) / lam
    probs[d] = max(0.0, 1.0 - probs[:d].sum())
    probs /= probs.sum()
    draws = rng.choice(d + 1, size=m_grid, p=probs)
    out = np.zeros(d)
    for j in draws:
        if j < d:
            out[j] += lam * np.sign(theta[j]) / m_grid
    return out


def cover_count_library(M: int, m: int) -> int:
    """Number of equal-weight m-term selections (with repetition) from M units.

    Counts nonnegative integer solutions of q_1 + ... + q_M = m, i.e.
    C(M - 1 + m, m).  Exact integer arithmetic, no overflow.
    """
    if M < 1 or m < 1:
        raise ValueError(f"need M >= 1 and m >= 1, got M={M}, m={m}")
    return math.comb(M - 1 + m, m)


def cover_count_log_bound(M: int, m: int) -> float:
    """Closed-form upper bound m * log(e * (M/m + 1)) on log cover_count_library."""
    if M < 1 or m < 1:
        raise ValueError(f"need M >= 1 and m >= 1, got M={M}, m={m}")
    return m * math.log(math.e * (M / m + 1))
