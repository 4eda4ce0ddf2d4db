"""Law of ``T_n``, a sum of ``n`` i.i.d. copies of the two-point variable
taking ``1`` w.p. ``p`` and ``-sigma^2`` w.p. ``q``, and its ``G_2``
transform in closed form.

``T_n`` sits on ``d_s = (s - lam)/q`` with ``lam = p n`` and
``P{T_n = d_s} = C(n, s) p^s q^(n-s)``. On ``[r_s, r_{s+1}]`` the
transform is Cantelli's bound for ``T_n`` conditioned on ``T_n >= d_s``,
scaled by ``G(d_s)``; the conditional mean of that law is ``nu_{n,s}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import gammaln

from .distribution import DiscreteDistribution
from .errors import DegenerateError, DomainError
from .moments import BernoulliParams, bernoulli_from_variance
from .transform import g2_oracle

MIN_P = 1e-15


@dataclass(frozen=True, eq=False)
class BinomialModel:
    n: int
    params: BernoulliParams
    lam: float
    atoms: np.ndarray
    log_pmf: np.ndarray
    log_survival: np.ndarray
    survival: np.ndarray
    nu: np.ndarray
    breakpoints: np.ndarray

    @property
    def p(self) -> float:
        return self.params.p

    @property
    def q(self) -> float:
        return self.params.q

    @property
    def pmf(self) -> np.ndarray:
        return np.exp(self.log_pmf)

    @cached_property
    def _law(self) -> DiscreteDistribution:
        w = self.pmf
        return DiscreteDistribution(self.atoms, w / math.fsum(w))

    def distribution(self) -> DiscreteDistribution:
        """The law of ``T_n``; weights renormalised against rounding. Built once per model."""
        return self._law


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


def build_model(n: int, sigma2: float) -> BinomialModel:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    params = bernoulli_from_variance(sigma2)
    p, q = params.p, params.q
    if p < MIN_P:
        raise DegenerateError(f"p = {p!r} is too small for a stable model")
    lam = p * n

    s = np.arange(n + 1, dtype=float)
    atoms = (s - lam) / q
    # both end atoms are known exactly
    atoms[0] = -n * sigma2
    atoms[-1] = float(n)

    log_p = math.log(sigma2) - math.log1p(sigma2)
    log_q = -math.log1p(sigma2)
    log_pmf = gammaln(n + 1) - gammaln(s + 1) - gammaln(n - s + 1) + s * log_p + (n - s) * log_q
    # reverse cumulative log-sum, smallest terms first
    log_survival = np.logaddexp.accumulate(log_pmf[::-1])[::-1].copy()
    log_survival[0] = 0.0
    survival = np.exp(log_survival)
    nu = s * np.exp(log_pmf - log_survival)

    breaks = np.empty(n + 1)
    breaks[0], breaks[-1] = 0.0, float(n)
    k = np.arange(n - 1)
    nk = nu[: n - 1]
    breaks[1:n] = (lam - p * nk) / (q * nk + lam - k)

    _freeze(atoms, log_pmf, log_survival, survival, nu, breaks)
    return BinomialModel(
        n=n,
        params=params,
        lam=lam,
        atoms=atoms,
        log_pmf=log_pmf,
        log_survival=log_survival,
        survival=survival,
        nu=nu,
        breakpoints=breaks,
    )


def survival_at(model: BinomialModel, x: float) -> float:
    """Exact right-continuous ``P{T_n >= x}``."""
    s = int(np.searchsorted(model.atoms, x, side="left"))
    if s > model.n:
        return 0.0
    return float(model.survival[s])


def survival_interp(model: BinomialModel, x: float) -> float:
    """``P{T_n >= x}`` interpolated log-linearly between neighbouring atoms."""
    a = model.atoms
    if not a[0] <= x <= a[-1]:
        raise DomainError(f"x = {x!r} outside [{a[0]!r}, {a[-1]!r}]")
    s = int(np.searchsorted(a, x, side="left"))
    if a[s] == x:
        return float(model.survival[s])
    frac = (x - a[s - 1]) / (a[s] - a[s - 1])
    lg = model.log_survival
    return float(math.exp((1.0 - frac) * lg[s - 1] + frac * lg[s]))


def piece_index(model: BinomialModel, x: float) -> int:
    """Index ``s`` with ``r_s <= x <= r_{s+1}`` for ``0 <= x <= n``."""
    s = int(np.searchsorted(model.breakpoints, x, side="right")) - 1
    return min(max(s, 0), model.n - 1)


def g2_closed_form(model: BinomialModel, x: float) -> float:
    """Closed-form ``G_2(x)`` on ``[0, n]``; ``1`` below 0, exact oracle above ``n``."""
    x = float(x)
    if x <= 0:
        return 1.0
    if x > model.n:
        return g2_oracle(model.distribution(), x)
    s = piece_index(model, x)
    p, q, lam = model.p, model.q, model.lam
    nu = model.nu[s]
    base = lam + nu * (s - lam - p)
    value = (base - q * nu * nu) / (q * x * x - 2.0 * q * nu * x + base) * model.survival[s]
    # G_2 dominates the tail; cancellation near x = n can undershoot it by ~1e-12
    return min(1.0, max(float(value), survival_at(model, x)))
