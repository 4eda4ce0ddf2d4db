"""Finite discrete distributions used throughout the package."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """A law with finitely many atoms.

    Atoms are strictly increasing and finite; weights are nonnegative and
    sum to one within ``WEIGHT_SUM_TOL``. Moments are summed with
    ``math.fsum`` so they are exact up to a final rounding.
    """

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=float).ravel()
        weights = np.array(self.weights, dtype=float).ravel()
        if atoms.size == 0:
            raise DomainError("a distribution needs at least one atom")
        if atoms.shape != weights.shape:
            raise DomainError("atoms and weights differ in length")
        if not np.all(np.isfinite(atoms)):
            raise DomainError("atoms must be finite")
        if np.any(np.diff(atoms) <= 0):
            raise DomainError("atoms must be strictly increasing")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise DomainError("weights must be finite and nonnegative")
        if abs(math.fsum(weights) - 1.0) > WEIGHT_SUM_TOL:
            raise DomainError(f"weights sum to {math.fsum(weights)!r}, not 1")
        atoms.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_pairs(cls, pairs) -> "DiscreteDistribution":
        """Build from ``(atom, weight)`` pairs in any order; repeated atoms merge."""
        merged: dict[float, float] = {}
        for a, w in pairs:
            merged[float(a)] = merged.get(float(a), 0.0) + float(w)
        keys = sorted(merged)
        return cls(np.array(keys), np.array([merged[k] for k in keys]))

    def __len__(self):
        return self.atoms.size

    @property
    def mean(self) -> float:
        return math.fsum(self.atoms * self.weights)

    def central_moment(self, k: int) -> float:
        m = self.mean
        return math.fsum(self.weights * (self.atoms - m) ** k)

    @property
    def variance(self) -> float:
        return self.central_moment(2)

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    @property
    def skewness(self) -> float:
        return self.central_moment(3) / self.variance**1.5

    @property
    def kurtosis(self) -> float:
        """Non-excess kurtosis, ``E(X - EX)^4 / Var^2``."""
        return self.central_moment(4) / self.variance**2

    def tail(self, x: float) -> float:
        """``P{X >= x}``."""
        return math.fsum(self.weights[self.atoms >= x])

    def cdf_table(self) -> np.ndarray:
        """Cumulative weights for inverse-CDF sampling (last entry forced to 1)."""
        c = np.cumsum(self.weights)
        c[-1] = 1.0
        return c
