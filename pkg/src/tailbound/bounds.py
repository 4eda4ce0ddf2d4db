"""Bound reports for ``P{M_n >= x}`` under moment constraints.

Every bound is computed for the dominating binomial sum ``T_n`` whose
summand variance is the aggregated ``sigma2_eff``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .binom import BinomialModel, build_model, g2_closed_form, survival_at, survival_interp
from .errors import DomainError
from .moments import AggregationResult, MomentConstraints, aggregate
from .transform import chernoff_inf, g2_oracle, poisson_closed_bound, poisson_g2

E2_HALF = math.e**2 / 2.0
G2_RTOL = 1e-9
CHERNOFF_RTOL = 1e-8

VACUOUS = "vacuous"
TYPO_FALLBACK = "typo-fallback"
ORACLE_MISMATCH = "oracle-mismatch"

BOUND_FIELDS = ("hoeffding", "chernoff_check", "g2", "g2_oracle_check", "poisson_closed", "poisson_g2")


def hoeffding_closed(sigma2: float, n: int, t: float) -> float:
    """Hoeffding's ``H(t, p)^n`` with ``p = sigma2 / (1 + sigma2)``.

    ``H(t, p) = (1 + qt/p)^-(p+qt) (1-t)^-(q-qt)``, evaluated in log space.
    ``t = 1`` gives ``p^n`` and ``t > 1`` gives 0.
    """
    if not (math.isfinite(sigma2) and sigma2 > 0):
        raise DomainError(f"sigma2 must be finite and positive, got {sigma2!r}")
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}")
    q = 1.0 / (1.0 + sigma2)
    p = sigma2 / (1.0 + sigma2)
    if t > 1:
        return 0.0
    log_p = math.log(sigma2) - math.log1p(sigma2)
    if t == 1:
        return math.exp(n * log_p)
    # qt/p = t/sigma2
    log_h = -(p + q * t) * math.log1p(t / sigma2) - q * (1.0 - t) * math.log1p(-t)
    return min(1.0, math.exp(n * log_h))


@dataclass(frozen=True)
class BoundQuery:
    x: float
    t: float

    @classmethod
    def at(cls, x: float, n: int) -> "BoundQuery":
        return cls(x=float(x), t=float(x) / n)


@dataclass(frozen=True)
class BoundReport:
    query: BoundQuery
    aggregation: AggregationResult
    hoeffding: float
    chernoff_check: float
    g2: float
    g2_oracle_check: float
    poisson_closed: float
    poisson_g2: float
    tail_step: float
    tail_reference: float
    tightness: float
    flags: frozenset = field(default_factory=frozenset)

    @property
    def n(self) -> int:
        return len(self.aggregation.alpha2)

    @property
    def vacuous(self) -> bool:
        return VACUOUS in self.flags

    def bounds(self) -> dict:
        return {name: getattr(self, name) for name in BOUND_FIELDS}

    def with_bounds(self, value: float) -> "BoundReport":
        """Copy with every bound field overwritten; used to self-test verification."""
        return replace(self, **{name: value for name in BOUND_FIELDS})

    def to_dict(self) -> dict:
        agg = self.aggregation
        return {
            "x": self.query.x,
            "t": self.query.t,
            "n": self.n,
            "sigma2_eff": agg.sigma2_eff,
            "gamma_eff": agg.gamma_eff,
            "kappa_eff": agg.kappa_eff,
            "p": agg.bernoulli.p,
            "q": agg.bernoulli.q,
            "alpha2": list(agg.alpha2),
            **self.bounds(),
            "tail_step": self.tail_step,
            "tail_reference": self.tail_reference,
            "tightness": self.tightness,
            "flags": sorted(self.flags),
        }


def _tail_reference(model: BinomialModel, x: float) -> float:
    if x < model.atoms[0]:
        return 1.0
    if x > model.atoms[-1]:
        return 0.0
    return survival_interp(model, x)


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else math.inf


def bound_report(constraints: MomentConstraints, x: float, model: BinomialModel | None = None) -> BoundReport:
    """Evaluate every bound at threshold ``x``.

    Closed forms are cross-checked against numeric oracles: a G2 mismatch
    beyond ``G2_RTOL`` reports the oracle value and sets ``typo-fallback``;
    a Hoeffding/Chernoff mismatch beyond ``CHERNOFF_RTOL`` sets
    ``oracle-mismatch`` and reports the larger value.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x!r}")
    agg = aggregate(constraints)
    n = constraints.n
    if model is None:
        model = build_model(n, agg.sigma2_eff)
    query = BoundQuery.at(x, n)
    tail_step = survival_at(model, x)
    tail_ref = _tail_reference(model, x)

    if x <= 0:
        return BoundReport(
            query=query,
            aggregation=agg,
            **{name: 1.0 for name in BOUND_FIELDS},
            tail_step=tail_step,
            tail_reference=tail_ref,
            tightness=_ratio(1.0, tail_ref),
            flags=frozenset({VACUOUS}),
        )

    flags = set()
    g2 = g2_closed_form(model, x)
    g2_check = g2_oracle(model.distribution(), x)
    if abs(g2 - g2_check) > G2_RTOL * max(abs(g2_check), 1e-300):
        flags.add(TYPO_FALLBACK)
        g2 = g2_check

    hoeff = hoeffding_closed(agg.sigma2_eff, n, query.t)
    chern = chernoff_inf(model.distribution(), x)
    if abs(hoeff - chern) > CHERNOFF_RTOL * max(abs(chern), 1e-300):
        flags.add(ORACLE_MISMATCH)
        hoeff = chern = max(hoeff, chern)

    lam = n * agg.sigma2_eff
    return BoundReport(
        query=query,
        aggregation=agg,
        hoeffding=hoeff,
        chernoff_check=chern,
        g2=g2,
        g2_oracle_check=g2_check,
        poisson_closed=poisson_closed_bound(lam, x),
        poisson_g2=poisson_g2(lam, x),
        tail_step=tail_step,
        tail_reference=tail_ref,
        tightness=_ratio(g2, tail_ref),
        flags=frozenset(flags),
    )


def tightness_factor(report: BoundReport) -> float:
    """``g2 / tail_reference``; at most ``e^2/2`` at lattice points."""
    return _ratio(report.g2, report.tail_reference)
