"""Combining several users' requirements, and several observation sources.

``symmetric_mean(values, k)`` is the order-``k`` combination: the mean over
all ``k``-subsets of the product of their members, raised to ``1/k``. Order 1
is the arithmetic mean (any one user satisfied counts), order ``I`` the
geometric mean (every user jointly satisfied). With uniform weights the
subset sum is an elementary symmetric polynomial, so
``F_1 >= F_2 >= ... >= F_I`` by Maclaurin's inequality.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from moesonar.moe_core import (
    DEFAULT_ABS_TOL,
    DiscreteProb,
    Gaussian1D,
    Grid,
    Moe,
    MoeError,
    ObservationDistribution,
    UserFunction,
    moe_integrate,
    trapezoid_nd,
)

INDEPENDENCE_NOTE = "combined as independent sources (approximate if the sources are dependent)"


def _elementary_symmetric(values: Sequence[float], k: int) -> float:
    e = [1.0] + [0.0] * k
    for v in values:
        for j in range(k, 0, -1):
            e[j] += v * e[j - 1]
    return e[k]


def normalize_weights(n_members: int, k: int,
                      weights: Sequence[float] | Mapping[tuple[int, ...], float] | None):
    """Validate k-subset weights; ``None`` means uniform.

    A sequence is matched to ``itertools.combinations(range(n), k)`` order; a
    mapping is keyed by sorted index tuples (missing subsets weigh zero).
    Returns ``None`` for uniform weights, else a tuple aligned with that order.
    """
    if not 1 <= k <= n_members:
        raise MoeError(f"order k={k} outside [1, {n_members}]")
    if weights is None:
        return None
    subsets = list(itertools.combinations(range(n_members), k))
    if isinstance(weights, Mapping):
        unknown = set(weights) - set(subsets)
        if unknown:
            raise MoeError(f"weights given for unknown subsets {sorted(unknown)}")
        w = tuple(float(weights.get(s, 0.0)) for s in subsets)
    else:
        w = tuple(float(x) for x in weights)
        if len(w) != len(subsets):
            raise MoeError(f"expected {len(subsets)} subset weights, got {len(w)}")
    if any(x < 0 or not math.isfinite(x) for x in w):
        raise MoeError("weights must be non-negative")
    if abs(math.fsum(w) - 1.0) > 1e-12:
        raise MoeError(f"weights sum to {math.fsum(w)}, not 1")
    return w


def symmetric_mean(values: Sequence[float], k: int,
                   weights: Sequence[float] | Mapping[tuple[int, ...], float] | None = None) -> float:
    """Order-``k`` combination of member acceptance values."""
    vals = [float(v) for v in values]
    w = normalize_weights(len(vals), k, weights)
    if all(v == vals[0] for v in vals):
        return vals[0]
    if w is None:
        total = _elementary_symmetric(vals, k) / math.comb(len(vals), k)
    else:
        total = math.fsum(wi * math.prod(vals[i] for i in s)
                          for wi, s in zip(w, itertools.combinations(range(len(vals)), k)))
    if k == 1:
        return total
    return max(total, 0.0) ** (1.0 / k)


@dataclass(frozen=True)
class CombinedUserFunction(UserFunction):
    """User function built from ``members`` by the order-``k`` combination."""

    members: tuple[UserFunction, ...]
    k: int
    weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        members = tuple(self.members)
        if not members:
            raise MoeError("need at least one member user function")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "weights", normalize_weights(len(members), int(self.k), self.weights))

    def __call__(self, x):
        return symmetric_mean([m(x) for m in self.members], self.k, self.weights)

    def evaluate_many(self, xs):
        cols = np.stack([np.asarray(m.evaluate_many(xs), dtype=float) for m in self.members], axis=1)
        return np.array([symmetric_mean(row, self.k, self.weights) for row in cols])

    def _scalar_many(self, x):
        return self.evaluate_many(x)

    def breakpoints(self):
        return tuple(sorted({p for m in self.members for p in m.breakpoints()}))


def combine_user_functions(members: Sequence[UserFunction], k: int,
                           weights: Sequence[float] | Mapping[tuple[int, ...], float] | None = None
                           ) -> CombinedUserFunction:
    return CombinedUserFunction(tuple(members), k, weights)


def combine_observation_pdfs(dists: Sequence[ObservationDistribution]) -> ObservationDistribution:
    """Normalised pointwise product of independent observation densities."""
    dists = list(dists)
    if len(dists) < 2:
        raise MoeError("need at least two distributions to combine")
    kind = type(dists[0])
    if any(type(d) is not kind for d in dists):
        raise MoeError("cannot combine distributions of different variants")
    note = f"{INDEPENDENCE_NOTE}; n={len(dists)}"
    if kind is Gaussian1D:
        prec = math.fsum(1.0 / d.sigma_o ** 2 for d in dists)
        mean = math.fsum(d.mean / d.sigma_o ** 2 for d in dists) / prec
        return Gaussian1D(mean, math.sqrt(1.0 / prec), note)
    if kind is DiscreteProb:
        labels = dists[0].labels
        if any(d.labels != labels for d in dists):
            raise MoeError("DiscreteProb label sets differ")
        prod = [math.prod(d.probs[i] for d in dists) for i in range(len(labels))]
        z = math.fsum(prod)
        if z <= 0:
            raise MoeError("distributions have disjoint support")
        return DiscreteProb(labels, tuple(p / z for p in prod), note)
    if kind is Grid:
        axes = dists[0].axes
        for d in dists[1:]:
            if len(d.axes) != len(axes) or any(
                    a.shape != b.shape or not np.array_equal(a, b) for a, b in zip(d.axes, axes)):
                raise MoeError("Grid axes differ")
        prod = np.ones_like(dists[0].density)
        for d in dists:
            prod = prod * d.density
        z = trapezoid_nd(prod, axes)
        if z <= 0:
            raise MoeError("distributions have disjoint support")
        return Grid(axes, prod / z, note)
    raise MoeError(f"cannot combine {kind.__name__} distributions")


def moe_multiuser(composed_uf: UserFunction, composed_dist: ObservationDistribution,
                  abs_tol: float = DEFAULT_ABS_TOL) -> Moe:
    m = moe_integrate(composed_uf, composed_dist, abs_tol)
    return Moe(m.value, f"moe_multiuser <- {m.provenance}")
