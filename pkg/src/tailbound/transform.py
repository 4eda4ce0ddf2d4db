"""Transforms of survival functions of discrete laws.

For a law ``X`` and threshold ``x`` the package uses

* ``G_beta(x) = inf_{h<x} E(X-h)_+^beta / (x-h)^beta``  (Chebyshev-type envelope),
* ``inf_{h>0} exp(-h x) E exp(h X)``                      (Chernoff envelope).

Both dominate ``P{X >= x}``. ``g2_oracle`` evaluates ``G_2`` exactly by
minimising over each interval between atoms, where the objective is a ratio
of quadratics in ``h``; ``g_beta`` is a numeric search usable for any
``beta > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp, softmax
from scipy.stats import poisson

from .distribution import DiscreteDistribution
from .errors import DomainError

__all__ = [
    "DiscreteDistribution",
    "TransformQuery",
    "g_beta",
    "g2_oracle",
    "chernoff_inf",
    "chernoff_tilt",
    "truncated_poisson",
    "poisson_closed_bound",
    "poisson_g2",
]

GRID_POINTS = 512
GOLDEN_RTOL = 1e-12
POISSON_TAIL_EPS = 1e-12
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TransformQuery:
    x: float
    beta: float = 2.0

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta!r}")


def _moment_ratio(dist, x, beta, h):
    """``E(X-h)_+^beta / (x-h)^beta`` for an array of ``h < x``."""
    h = np.asarray(h, dtype=float)[:, None]
    r = np.clip(dist.atoms[None, :] - h, 0.0, None) / (x - h)
    # h within a subnormal gap of x overflows to inf, which the caller's min discards
    with np.errstate(over="ignore"):
        return (r**beta) @ dist.weights


def _golden_min(f, a, b, tol):
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(200):
        if b - a <= tol * max(1.0, abs(a), abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def g_beta(dist: DiscreteDistribution, query: TransformQuery) -> float:
    """Numeric ``G_beta`` transform: coarse grid, then golden-section refinement."""
    x, beta = float(query.x), float(query.beta)
    if x <= dist.mean:
        return 1.0
    if x > dist.atoms[-1]:
        # h in (max atom, x) makes the numerator vanish
        return 0.0

    def f(h):
        return float(_moment_ratio(dist, x, beta, [h])[0])

    lo = dist.atoms[0] - 3.0 * dist.std
    cands = [np.linspace(lo, x, GRID_POINTS + 1)[:-1], dist.atoms[dist.atoms < x]]

    # walk left until the objective has risen three times in a row
    step, h, prev, rises, left = x - lo, lo, f(lo), 0, []
    while rises < 3 and len(left) < 100:
        h -= step
        step *= 2.0
        val = f(h)
        rises = rises + 1 if val > prev else 0
        prev = val
        left.append(h)
    cands.append(np.array(left))

    if beta == 2.0:
        # unbounded piece: single critical point of a quadratic ratio
        m, var = dist.mean, dist.variance
        h_star = m - var / (x - m)
        if h_star <= dist.atoms[0]:
            cands.append(np.array([h_star]))

    hs = np.unique(np.concatenate(cands))
    vals = _moment_ratio(dist, x, beta, hs)
    i = int(np.argmin(vals))
    best = float(vals[i])
    a = hs[i - 1] if i > 0 else hs[0] - step
    b = hs[i + 1] if i + 1 < hs.size else 0.5 * (hs[i] + x)
    _, refined = _golden_min(f, a, b, GOLDEN_RTOL)
    return min(1.0, best, refined)


@lru_cache(maxsize=256)
def _pieces(dist: DiscreteDistribution):
    """Mass, conditional mean and conditional variance of ``{X >= atom_k}``."""
    a, w = dist.atoms, dist.weights
    k_max = a.size
    mass = np.empty(k_max)
    mean = np.empty(k_max)
    var = np.empty(k_max)
    for k in range(k_max):
        ak, wk = a[k:], w[k:]
        mass[k] = math.fsum(wk)
        if k == k_max - 1 or mass[k] == 0:
            mean[k], var[k] = ak[0], 0.0
            continue
        mean[k] = math.fsum(wk * ak) / mass[k]
        var[k] = math.fsum(wk * (ak - mean[k]) ** 2) / mass[k]
    return mass, mean, var


def _g2_exact(dist, x):
    if x <= dist.mean:
        return 1.0
    a = dist.atoms
    if x > a[-1]:
        return 0.0
    mass, mean, var = _pieces(dist)
    cands = list(a[a < x])
    for k in range(a.size):
        if mass[k] == 0 or var[k] == 0 or x <= mean[k]:
            continue
        h = mean[k] - var[k] / (x - mean[k])
        lower = -math.inf if k == 0 else a[k - 1]
        if lower < h <= a[k] and h < x:
            cands.append(h)
    if not cands:
        return 1.0
    return min(1.0, float(np.min(_moment_ratio(dist, x, 2.0, cands))))


def g2_oracle(dist: DiscreteDistribution, x):
    """Exact ``G_2`` transform by piecewise minimisation.

    Between consecutive atoms the objective is ``A(V + (m-h)^2)/(x-h)^2``
    with ``A, m, V`` the mass, mean and variance of the atoms above ``h``;
    its only critical point is ``h = m - V/(x-m)``. Every admissible
    critical point and every atom below ``x`` is evaluated directly.
    Accepts a scalar or an array of thresholds.
    """
    if np.ndim(x) == 0:
        return _g2_exact(dist, float(x))
    return np.array([_g2_exact(dist, float(xi)) for xi in np.ravel(x)])


def _chernoff_solve(dist, x):
    """Return ``(h, log value)`` minimising ``log E exp(h(X - x))`` over ``h > 0``."""
    with np.errstate(divide="ignore"):
        logw = np.log(dist.weights)
    shifted = dist.atoms - x

    def slope(h):
        return float(softmax(logw + h * shifted) @ shifted)

    lo, hi = 0.0, 1.0
    while slope(hi) < 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise DomainError("Chernoff tilt diverged")
    # the slope is increasing in h, so the bracket holds exactly one root
    h = brentq(slope, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return h, float(logsumexp(logw + h * shifted))


def chernoff_tilt(dist: DiscreteDistribution, x: float) -> float:
    """Optimal exponent ``h`` of the Chernoff bound; requires ``mean < x < max atom``."""
    if not dist.mean < x < dist.atoms[-1]:
        raise DomainError("optimal tilt exists only for mean < x < max atom")
    return _chernoff_solve(dist, float(x))[0]


def chernoff_inf(dist: DiscreteDistribution, x: float) -> float:
    """``inf_{h>0} exp(-h x) E exp(h X)``, clamped to ``[0, 1]``."""
    x = float(x)
    if x <= dist.mean:
        return 1.0
    top = dist.atoms[-1]
    if x > top:
        return 0.0
    if x == top:
        return float(min(1.0, dist.weights[-1]))
    _, log_value = _chernoff_solve(dist, x)
    return min(1.0, math.exp(log_value))


@lru_cache(maxsize=64)
def truncated_poisson(lam: float, tail_eps: float = POISSON_TAIL_EPS) -> DiscreteDistribution:
    """Centred Poisson ``eta - lam`` cut at the smallest ``K`` with ``P{eta > K} <= tail_eps``."""
    if not (math.isfinite(lam) and lam > 0):
        raise DomainError(f"lambda must be positive, got {lam!r}")
    if not 0 < tail_eps <= 1e-6:
        raise DomainError("tail_eps must lie in (0, 1e-6]")
    hi = max(16, int(2 * lam))
    while poisson.sf(hi, lam) > tail_eps:
        hi *= 2
    k = int(np.argmax(poisson.sf(np.arange(hi + 1), lam) <= tail_eps))
    ks = np.arange(k + 1)
    w = poisson.pmf(ks, lam)
    return DiscreteDistribution(ks - lam, w / w.sum())


def poisson_closed_bound(lam: float, x: float) -> float:
    """``exp{x - (x+lam) ln((x+lam)/lam)}``, the Chernoff bound of a centred Poisson."""
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam!r}")
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x!r}")
    return min(1.0, math.exp(x - (x + lam) * math.log1p(x / lam)))


def poisson_g2(lam: float, x: float) -> float:
    """``G_2`` of the centred Poisson law with parameter ``lam``, evaluated numerically."""
    if x <= 0:
        return 1.0
    lam, x = float(lam), float(x)
    # cut deep enough that the dropped mass is negligible against the tail at x
    tail_x = poisson.sf(math.ceil(x + lam) - 1, lam)
    eps = max(min(POISSON_TAIL_EPS, POISSON_TAIL_EPS * tail_x), 1e-300)
    # round down to a power of ten so nearby thresholds share a cached law
    eps = 10.0 ** math.floor(math.log10(eps))
    return g2_oracle(truncated_poisson(lam, eps), x)
