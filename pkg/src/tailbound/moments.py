"""Moment maps between skewness/kurtosis caps and variance caps.

A random variable ``X <= 1`` with ``EX = 0`` and variance ``s^2`` obeys
``s^2 <= u(g)^2`` whenever its skewness is at least ``g`` and
``s^2 <= v(c)`` whenever its kurtosis is at most ``c``. Equality holds for
the two-point law on ``{-sigma^2, 1}``, whose skewness is
``1/sigma - sigma`` and whose kurtosis is ``1/sigma^2 - 1 + sigma^2``.

Absent constraints are encoded as ``+inf`` (variance, kurtosis) or ``-inf``
(skewness).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .distribution import DiscreteDistribution
from .errors import DegenerateError, DomainError, UnboundedSummandError

INF = math.inf
MOMENT_TOL = 1e-12


def u_of_skewness(g: float) -> float:
    """``sqrt(1 + g^2/4) - g/2``, the standard deviation cap implied by skewness >= g."""
    if math.isnan(g):
        raise DomainError("skewness is NaN")
    if g == -INF:
        return INF
    if g == INF:
        return 0.0
    root = math.hypot(1.0, 0.5 * g)
    if g <= 0:
        return root - 0.5 * g
    # conjugate form: no cancellation for large positive g
    return 1.0 / (root + 0.5 * g)


def v_of_kurtosis(c: float) -> float:
    """Larger root of ``s^2 + 1/s^2 - 1 = c``; the variance cap implied by kurtosis <= c."""
    if math.isnan(c) or c < 1:
        raise DomainError(f"kurtosis must be >= 1, got {c!r}")
    if c == INF:
        return INF
    # (c+1)^2 - 4 factored to keep precision near c = 1
    return 0.5 * (c + 1.0 + math.sqrt((c - 1.0) * (c + 3.0)))


def _check_sigma2(sigma2: float) -> None:
    if not (math.isfinite(sigma2) and sigma2 > 0):
        raise DomainError(f"sigma2 must be finite and positive, got {sigma2!r}")


def skewness_of_bernoulli(sigma2: float) -> float:
    _check_sigma2(sigma2)
    s = math.sqrt(sigma2)
    return (1.0 - sigma2) / s


def kurtosis_of_bernoulli(sigma2: float) -> float:
    _check_sigma2(sigma2)
    # 1/s2 - 1 + s2 rearranged so the result is never below 1
    return 1.0 + (sigma2 - 1.0) ** 2 / sigma2


@dataclass(frozen=True)
class BernoulliParams:
    """The two-point law taking ``1`` w.p. ``p`` and ``-sigma2`` w.p. ``q``."""

    sigma2: float
    p: float
    q: float
    gamma: float
    kappa: float

    def distribution(self) -> DiscreteDistribution:
        return DiscreteDistribution([-self.sigma2, 1.0], [self.q, self.p])


def bernoulli_from_variance(sigma2: float) -> BernoulliParams:
    _check_sigma2(sigma2)
    q = 1.0 / (1.0 + sigma2)
    p = sigma2 / (1.0 + sigma2)
    return BernoulliParams(
        sigma2=sigma2,
        p=p,
        q=q,
        gamma=skewness_of_bernoulli(sigma2),
        kappa=kurtosis_of_bernoulli(sigma2),
    )


def _as_tuple(values, n, fill, name):
    if values is None:
        return (fill,) * n
    if isinstance(values, (int, float)):
        return (float(values),) * n
    out = tuple(fill if v is None else float(v) for v in values)
    if len(out) != n:
        raise DomainError(f"{name} has {len(out)} entries, expected {n}")
    return out


@dataclass(frozen=True)
class MomentConstraints:
    """Per-summand caps: variance ``sigma2[k]``, skewness floor ``skew_lo[k]``,
    kurtosis cap ``kurt_hi[k]``.

    Scalars are broadcast to all ``n`` summands and ``None`` means absent.
    """

    n: int
    sigma2: Sequence[float] = field(default=None)
    skew_lo: Sequence[float] = field(default=None)
    kurt_hi: Sequence[float] = field(default=None)

    def __post_init__(self):
        n = self.n
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise DomainError(f"n must be a positive integer, got {n!r}")
        sigma2 = _as_tuple(self.sigma2, n, INF, "sigma2")
        skew = _as_tuple(self.skew_lo, n, -INF, "skew_lo")
        kurt = _as_tuple(self.kurt_hi, n, INF, "kurt_hi")
        for s in sigma2:
            if math.isnan(s) or s < 0:
                raise DomainError(f"variance caps must be >= 0, got {s!r}")
        for g in skew:
            if math.isnan(g):
                raise DomainError("skewness floor is NaN")
        for c in kurt:
            if math.isnan(c) or c < 1:
                raise DomainError(f"kurtosis caps must be >= 1, got {c!r}")
        if not any(
            math.isfinite(s) or g > -INF or math.isfinite(c)
            for s, g, c in zip(sigma2, skew, kurt)
        ):
            raise DomainError("no finite constraint given; no bound exists")
        object.__setattr__(self, "sigma2", sigma2)
        object.__setattr__(self, "skew_lo", skew)
        object.__setattr__(self, "kurt_hi", kurt)


@dataclass(frozen=True)
class AggregationResult:
    alpha2: tuple
    sigma2_eff: float
    bernoulli: BernoulliParams
    gamma_eff: float
    kappa_eff: float


def summand_variance_cap(sigma2: float, skew_lo: float, kurt_hi: float) -> float:
    """Tightest admissible ``alpha^2 = min{sigma^2, u(gamma)^2, v(kappa)}``."""
    if sigma2 == 0:
        return 0.0
    return min(sigma2, u_of_skewness(skew_lo) ** 2, v_of_kurtosis(kurt_hi))


def aggregate(constraints: MomentConstraints) -> AggregationResult:
    alpha2 = tuple(
        summand_variance_cap(s, g, c)
        for s, g, c in zip(constraints.sigma2, constraints.skew_lo, constraints.kurt_hi)
    )
    for k, a in enumerate(alpha2):
        if not math.isfinite(a):
            raise UnboundedSummandError(f"summand {k} has no finite constraint")
    sigma2_eff = math.fsum(alpha2) / constraints.n
    if sigma2_eff <= 0:
        raise DegenerateError("effective variance is zero")
    bern = bernoulli_from_variance(sigma2_eff)
    return AggregationResult(
        alpha2=alpha2,
        sigma2_eff=sigma2_eff,
        bernoulli=bern,
        gamma_eff=bern.gamma,
        kappa_eff=bern.kappa,
    )


def effective_skewness(gammas: Sequence[float]) -> float:
    """Skewness of the Bernoulli law matched to skewness floors ``gammas``.

    Evaluated as ``sum(g u(g)) / sqrt(n * sum(u(g)^2))``; equal to
    ``skewness_of_bernoulli(mean(u(g)^2))`` because ``g u(g) = 1 - u(g)^2``.
    """
    gammas = list(gammas)
    if not gammas:
        raise DomainError("need at least one skewness value")
    if not all(math.isfinite(g) for g in gammas):
        raise DomainError("skewness values must be finite")
    us = [u_of_skewness(g) for g in gammas]
    num = math.fsum(g * u for g, u in zip(gammas, us))
    return num / math.sqrt(len(gammas) * math.fsum(u * u for u in us))


def effective_kurtosis(kappas: Sequence[float]) -> float:
    kappas = list(kappas)
    if not kappas:
        raise DomainError("need at least one kurtosis value")
    if not all(math.isfinite(c) for c in kappas):
        raise DomainError("kurtosis values must be finite")
    sigma2 = math.fsum(v_of_kurtosis(c) for c in kappas) / len(kappas)
    return kurtosis_of_bernoulli(sigma2)


def _centered_moments(dist: DiscreteDistribution):
    if dist.atoms[-1] > 1 + MOMENT_TOL:
        raise DomainError("support must lie in (-inf, 1]")
    if abs(dist.mean) > MOMENT_TOL:
        raise DomainError(f"distribution must be centred, mean = {dist.mean!r}")
    s2 = dist.variance
    if s2 <= 0:
        raise DomainError("distribution must have positive variance")
    return s2, dist.central_moment(3), dist.central_moment(4)


def lemma_variance_cap_skew(dist: DiscreteDistribution) -> bool:
    """True iff ``Var X <= u(skew X)^2``; holds for every centred law on ``(-inf, 1]``."""
    s2, m3, _ = _centered_moments(dist)
    g = m3 / s2**1.5
    return s2 <= u_of_skewness(g) ** 2 * (1 + MOMENT_TOL)


def lemma_variance_cap_kurt(dist: DiscreteDistribution) -> bool:
    """True iff ``Var X <= v(kurt X)``."""
    s2, _, m4 = _centered_moments(dist)
    # Hoelder gives kurtosis >= 1; guard rounding just below it
    c = max(m4 / s2**2, 1.0)
    return s2 <= v_of_kurtosis(c) * (1 + MOMENT_TOL)
