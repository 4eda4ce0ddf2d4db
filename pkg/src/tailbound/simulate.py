"""Monte Carlo checks that the bounds dominate simulated martingale tails.

Paths are split into fixed-size blocks. Each block draws from its own
``SeedSequence`` child of the run seed, so results do not depend on how
many worker threads run the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .binom import build_model
from .bounds import BoundReport, bound_report
from .distribution import DiscreteDistribution
from .errors import DomainError
from .moments import (
    MOMENT_TOL,
    MomentConstraints,
    aggregate,
    bernoulli_from_variance,
    u_of_skewness,
)

BLOCK_SIZE = 1 << 16
SE_MARGIN = 4.0
# slack on the threshold so float sums landing on an atom are counted
THRESHOLD_RTOL = 1e-9


def two_point(sigma2: float) -> DiscreteDistribution:
    """Centred law on ``{-sigma2, 1}`` with variance ``sigma2``."""
    return bernoulli_from_variance(sigma2).distribution()


def three_point(a: float, w: float) -> DiscreteDistribution:
    """Symmetric law on ``{-a, 0, a}`` with weights ``{w, 1-2w, w}``."""
    if not 0 < a <= 1:
        raise DomainError(f"a must lie in (0, 1], got {a!r}")
    if not 0 < w <= 0.5:
        raise DomainError(f"w must lie in (0, 0.5], got {w!r}")
    if w == 0.5:
        return DiscreteDistribution([-a, a], [0.5, 0.5])
    return DiscreteDistribution([-a, 0.0, a], [w, 1.0 - 2.0 * w, w])


POINT_MASS = DiscreteDistribution([0.0], [1.0])


@dataclass(frozen=True)
class AdaptedRule:
    """Step law picked from the sign of the running sum.

    Both laws are centred with variance at most 0.5, so the conditional
    moments depend on the past while ``sigma_k^2 = 0.5`` stays valid.
    """

    nonneg: DiscreteDistribution = field(default_factory=lambda: two_point(0.25))
    negative: DiscreteDistribution = field(default_factory=lambda: two_point(0.5))

    def laws(self):
        return (self.nonneg, self.negative)


StepLaw = Union[DiscreteDistribution, Sequence[DiscreteDistribution], AdaptedRule]


def _check_step_law(law: DiscreteDistribution) -> None:
    if law.atoms[-1] > 1 + MOMENT_TOL:
        raise DomainError("step law must be bounded above by 1")
    if abs(law.mean) > MOMENT_TOL:
        raise DomainError(f"step law must be centred, mean = {law.mean!r}")


@dataclass(frozen=True)
class SimSpec:
    n: int
    step_law: StepLaw
    samples: int
    seed: int
    maximal: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be positive")
        if self.samples < 1:
            raise DomainError(f"samples must be positive, got {self.samples!r}")
        if self.seed < 0:
            raise DomainError("seed must be a nonnegative integer")
        law = self.step_law
        if isinstance(law, AdaptedRule):
            laws = law.laws()
        elif isinstance(law, DiscreteDistribution):
            laws = (law,)
        else:
            laws = tuple(law)
            if len(laws) != self.n:
                raise DomainError(f"{len(laws)} step laws given for n = {self.n}")
            object.__setattr__(self, "step_law", laws)
        for d in laws:
            _check_step_law(d)

    def law_at(self, k: int) -> DiscreteDistribution:
        law = self.step_law
        return law if isinstance(law, DiscreteDistribution) else law[k]


@dataclass(frozen=True)
class EmpiricalTail:
    x: float
    estimate: float
    stderr: float
    samples: int
    maximal: bool = False

    @classmethod
    def from_count(cls, x, hits, samples, maximal=False):
        est = hits / samples
        return cls(x=float(x), estimate=est, stderr=math.sqrt(est * (1.0 - est) / samples), samples=samples, maximal=maximal)


def _draw(law: DiscreteDistribution, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(law.cdf_table(), u, side="right")
    return law.atoms[np.minimum(idx, law.atoms.size - 1)]


def _run_block(spec: SimSpec, seed_seq, size: int, thresholds: np.ndarray) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    u = rng.random((spec.n, size))
    total = np.zeros(size)
    peak = np.full(size, -np.inf)
    law = spec.step_law
    for k in range(spec.n):
        if isinstance(law, AdaptedRule):
            up = total >= 0
            step = np.where(up, _draw(law.nonneg, u[k]), _draw(law.negative, u[k]))
        else:
            step = _draw(spec.law_at(k), u[k])
        total += step
        if spec.maximal:
            np.maximum(peak, total, out=peak)
    level = peak if spec.maximal else total
    return np.array([np.count_nonzero(level >= t) for t in thresholds], dtype=np.int64)


def simulate_tails(spec: SimSpec, xs: Sequence[float], workers: int | None = None) -> list[EmpiricalTail]:
    """Empirical ``P{M_n >= x}`` (or of the running maximum) for each ``x``, from one set of paths."""
    xs = [float(x) for x in xs]
    thresholds = np.array([x - THRESHOLD_RTOL * max(1.0, abs(x)) for x in xs])
    n_blocks = -(-spec.samples // BLOCK_SIZE)
    sizes = [BLOCK_SIZE] * (n_blocks - 1) + [spec.samples - BLOCK_SIZE * (n_blocks - 1)]
    children = np.random.SeedSequence(spec.seed).spawn(n_blocks)
    jobs = list(zip(children, sizes))
    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda job: _run_block(spec, job[0], job[1], thresholds), jobs))
    else:
        counts = [_run_block(spec, c, s, thresholds) for c, s in jobs]
    hits = np.sum(counts, axis=0)
    return [EmpiricalTail.from_count(x, int(h), spec.samples, spec.maximal) for x, h in zip(xs, hits)]


def simulate_tail(spec: SimSpec, x: float, workers: int | None = None) -> EmpiricalTail:
    return simulate_tails(spec, [x], workers)[0]


def adapted_example(n: int, seed: int, samples: int = 10**6, maximal: bool = False) -> SimSpec:
    """Two-regime martingale: variance 0.25 while the sum is >= 0, else 0.5."""
    if n < 2:
        raise DomainError("the adapted example needs n >= 2")
    return SimSpec(n=n, step_law=AdaptedRule(), samples=samples, seed=seed, maximal=maximal)


@dataclass(frozen=True)
class Verdict:
    x: float
    passed: bool
    estimate: float
    stderr: float
    margins: dict
    passes: dict

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "passed": self.passed,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "margins": dict(self.margins),
            "passes": dict(self.passes),
        }


def verify_bound(report: BoundReport, tail: EmpiricalTail, se_margin: float = SE_MARGIN) -> Verdict:
    """PASS for a bound iff ``estimate <= bound + se_margin * stderr``.

    Margins are ``bound - estimate``.
    """
    if report.query.x != tail.x:
        raise DomainError(f"report is for x = {report.query.x!r}, tail for x = {tail.x!r}")
    margins, passes = {}, {}
    for name, value in report.bounds().items():
        margins[name] = value - tail.estimate
        passes[name] = tail.estimate <= value + se_margin * tail.stderr
    return Verdict(
        x=tail.x,
        passed=all(passes.values()),
        estimate=tail.estimate,
        stderr=tail.stderr,
        margins=margins,
        passes=passes,
    )


def law_satisfies(law: DiscreteDistribution, sigma2: float, skew_lo: float, kurt_hi: float) -> bool:
    """Check a centred step law against variance, skewness and kurtosis caps."""
    var = law.variance
    if var == 0:
        return True
    return (
        var <= sigma2 * (1 + MOMENT_TOL)
        and law.skewness >= skew_lo - MOMENT_TOL * max(1.0, abs(skew_lo))
        and law.kurtosis <= kurt_hi * (1 + MOMENT_TOL)
    )


def step_laws_for(constraints: MomentConstraints) -> tuple:
    """A step law per summand meeting its caps with variance ``alpha_k^2``.

    Prefers the extremal two-point law; falls back to the symmetric law on
    ``{-alpha, alpha}`` when the two-point law breaks a kurtosis cap.
    """
    agg = aggregate(constraints)
    laws = []
    for k, a2 in enumerate(agg.alpha2):
        s2, g, c = constraints.sigma2[k], constraints.skew_lo[k], constraints.kurt_hi[k]
        if a2 == 0:
            laws.append(POINT_MASS)
            continue
        candidates = [two_point(a2)]
        if a2 <= 1:
            candidates.append(three_point(math.sqrt(a2), 0.5))
        for law in candidates:
            if law_satisfies(law, s2, g, c):
                laws.append(law)
                break
        else:
            raise DomainError(f"no built-in step law meets the caps of summand {k}")
    return tuple(laws)


@dataclass(frozen=True)
class Scenario:
    name: str
    constraints: MomentConstraints
    spec: SimSpec
    xs: tuple


@dataclass(frozen=True)
class ScenarioResult:
    scenario: Scenario
    reports: tuple
    tails: tuple
    verdicts: tuple

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_dict(self) -> dict:
        sc = self.scenario
        return {
            "name": sc.name,
            "n": sc.spec.n,
            "seed": sc.spec.seed,
            "samples": sc.spec.samples,
            "maximal": sc.spec.maximal,
            "adapted": isinstance(sc.spec.step_law, AdaptedRule),
            "passed": self.passed,
            "results": [
                {"report": r.to_dict(), "verdict": v.to_dict()}
                for r, v in zip(self.reports, self.verdicts)
            ],
        }


def run_scenario(scenario: Scenario, workers: int | None = None, inject_zero_bound: bool = False) -> ScenarioResult:
    agg = aggregate(scenario.constraints)
    model = build_model(scenario.constraints.n, agg.sigma2_eff)
    reports = tuple(bound_report(scenario.constraints, x, model=model) for x in scenario.xs)
    if inject_zero_bound:
        reports = tuple(r.with_bounds(0.0) for r in reports)
    tails = tuple(simulate_tails(scenario.spec, scenario.xs, workers))
    verdicts = tuple(verify_bound(r, t) for r, t in zip(reports, tails))
    return ScenarioResult(scenario, reports, tails, verdicts)


def default_campaign(samples: int = 10**6, seed: int = 20080101) -> list[Scenario]:
    """Twenty-two scenarios covering variance, skewness, kurtosis and mixed caps,
    i.i.d. and adapted steps, terminal and maximal tails."""
    tp, th = two_point, three_point
    u05 = u_of_skewness(0.5) ** 2
    rows = [
        # name, constraints, step law, maximal, xs
        ("var-extremal-n2", MomentConstraints(2, sigma2=1.0), tp(1.0), False, (1.0, 2.0)),
        ("var-extremal-n2-max", MomentConstraints(2, sigma2=1.0), tp(1.0), True, (1.0, 2.0)),
        ("var-extremal-n5", MomentConstraints(5, sigma2=0.25), tp(0.25), False, (1.25, 2.5, 3.75)),
        ("var-three-point-n10", MomentConstraints(10, sigma2=0.5), th(1.0, 0.25), False, (1.0, 2.0, 4.0)),
        ("var-three-point-n10-max", MomentConstraints(10, sigma2=0.5), th(1.0, 0.25), True, (1.0, 2.0, 4.0)),
        (
            "var-heterogeneous",
            MomentConstraints(4, sigma2=(0.25, 1.0, 4.0, 0.5)),
            (tp(0.25), tp(1.0), tp(4.0), th(1.0, 0.25)),
            False,
            (1.0, 2.0, 3.0),
        ),
        ("skew-extremal-n4", MomentConstraints(4, skew_lo=1.5), tp(0.25), False, (0.25, 1.5, 2.75)),
        ("skew-extremal-n4-max", MomentConstraints(4, skew_lo=1.5), tp(0.25), True, (0.25, 1.5, 2.75)),
        ("skew-zero-n6", MomentConstraints(6, skew_lo=0.0), th(1.0, 0.25), False, (1.0, 2.0, 3.0)),
        (
            "skew-mixed-n4",
            MomentConstraints(4, skew_lo=(1.5, -1.5, 0.0, 0.5)),
            (tp(0.25), tp(4.0), tp(1.0), tp(u05)),
            False,
            (1.0, 2.0, 3.0),
        ),
        ("kurt-extremal-n3", MomentConstraints(3, kurt_hi=1.5), tp(2.0), False, (1.0, 2.0, 3.0)),
        ("kurt-extremal-n3-max", MomentConstraints(3, kurt_hi=1.5), tp(2.0), True, (1.0, 2.0, 3.0)),
        ("kurt-three-point-n8", MomentConstraints(8, kurt_hi=2.0), th(1.0, 0.25), False, (1.0, 2.0, 3.0)),
        ("kurt-symmetric-n4", MomentConstraints(4, kurt_hi=1.0), th(1.0, 0.5), False, (1.0, 2.0, 4.0)),
        (
            "mixed-all-three-n8",
            MomentConstraints(8, sigma2=0.5, skew_lo=0.0, kurt_hi=2.0),
            th(1.0, 0.25),
            False,
            (1.0, 2.0, 3.0),
        ),
        (
            "mixed-all-three-n8-max",
            MomentConstraints(8, sigma2=0.5, skew_lo=0.0, kurt_hi=2.0),
            th(1.0, 0.25),
            True,
            (1.0, 2.0, 3.0),
        ),
        (
            "mixed-per-summand-n3",
            MomentConstraints(3, sigma2=(1.0, None, None), skew_lo=(None, 1.5, None), kurt_hi=(None, None, 1.5)),
            (tp(1.0), tp(0.25), tp(0.5)),
            False,
            (0.5, 1.0, 2.0),
        ),
        (
            "mixed-skew-binding-n5",
            MomentConstraints(5, sigma2=2.0, skew_lo=0.5, kurt_hi=3.0),
            tp(u05),
            False,
            (1.0, 2.0, 3.0),
        ),
        ("adapted-var-n10", MomentConstraints(10, sigma2=0.5), AdaptedRule(), False, (1.0, 2.0, 3.0)),
        ("adapted-var-n10-max", MomentConstraints(10, sigma2=0.5), AdaptedRule(), True, (1.0, 2.0, 3.0)),
        ("adapted-skew-n10", MomentConstraints(10, skew_lo=0.7), AdaptedRule(), False, (1.0, 2.0, 3.0)),
        ("adapted-kurt-n6-max", MomentConstraints(6, kurt_hi=3.25), AdaptedRule(), True, (1.0, 2.0, 3.0)),
    ]
    out = []
    for i, (name, cons, law, maximal, xs) in enumerate(rows):
        spec = SimSpec(n=cons.n, step_law=law, samples=samples, seed=seed + i, maximal=maximal)
        out.append(Scenario(name=name, constraints=cons, spec=spec, xs=tuple(xs)))
    return out


def run_campaign(scenarios: Sequence[Scenario], workers: int | None = None, inject_zero_bound: bool = False) -> list[ScenarioResult]:
    return [run_scenario(sc, workers, inject_zero_bound) for sc in scenarios]
