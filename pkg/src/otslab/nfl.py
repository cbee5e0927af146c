"""Theorem-level checks and the overlap experiments.

:func:`verify_nfl` checks both hypotheses of the off-training-set NFL
theorem (vertical likelihood, support condition) and evaluates the exact
expected error. The sweeps then move away from the theorem's regime: a
fixed test distribution that overlaps the training distribution, and a
growing input space with identical train and test distributions.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from .domain import (
    DEFAULT_BUDGET,
    Budget,
    Distribution,
    InputSpace,
    IIDModel,
    Learner,
    SamplingModel,
    TargetFunction,
    TestDistributionFamily,
    TrainingSet,
    constant_family,
    custom_family,
    enumerate_target_functions,
    mixture,
    render_weights,
    uniform,
    uniform_on,
)
from .errors import NoOffTrainingMass, PreconditionViolated
from .expect import (
    exact_expected_ots,
    expected_fixed_error,
    grouped_cost,
    grouped_expected_ots,
    mc_expected_ots,
)
from .learners import MASK64, splitmix64
from .ots import SupportCheck, ots_induced_family, support_condition_holds

log = logging.getLogger(__name__)

HALF = Fraction(1, 2)


class VerticalWitness(NamedTuple):
    d: TrainingSet
    f: TargetFunction
    f_prime: TargetFunction
    p: Fraction
    p_prime: Fraction


class VerticalCheck(NamedTuple):
    holds: bool
    witness: Optional[VerticalWitness] = None

    def __bool__(self) -> bool:
        return self.holds


def check_vertical(
    model: SamplingModel,
    space: InputSpace | int,
    m: int,
    budget: Budget = DEFAULT_BUDGET,
) -> VerticalCheck:
    """Is P(d | f) unaffected by f off d_X?

    Runs over every input sequence of length ``m`` and every pair of admitted
    functions that agree on it. On failure the witness is the
    lexicographically least violating ``(f, f', d)``.
    """
    n = space.n if isinstance(space, InputSpace) else int(space)
    budget.check("vertical check", n**m * 2**n)
    functions = [f for f in enumerate_target_functions(n, budget) if model.admits(f)]
    best = None
    for xs in itertools.product(range(n), repeat=m):
        groups: dict[tuple, list] = {}
        for f in functions:
            key = tuple(f.bits[x] for x in xs)
            d = TrainingSet(tuple(zip(xs, key)))
            groups.setdefault(key, []).append((f, model.likelihood(d, f)))
        for members in groups.values():
            f0, p0 = members[0]
            for f1, p1 in members[1:]:
                if p1 != p0:
                    key = (f0.bits, f1.bits, xs)
                    if best is None or key < best[0]:
                        best = (key, VerticalWitness(TrainingSet.label(xs, f0), f0, f1, p0, p1))
                    break
    if best is None:
        return VerticalCheck(True)
    return VerticalCheck(False, best[1])


@dataclass(frozen=True)
class NFLReport:
    learner: str
    pi: str
    family: str
    n: int
    m: int
    vertical: VerticalCheck = field(repr=False)
    support: SupportCheck = field(repr=False)
    value: Fraction
    engine: str

    @property
    def equals_half(self) -> bool:
        return self.value == HALF

    @property
    def hypotheses_hold(self) -> bool:
        return self.vertical.holds and self.support.holds


def _require_off_mass(pi: Distribution, m: int) -> None:
    if m >= len(pi.support):
        raise PreconditionViolated(
            f"m={m} must be smaller than |support(pi)|={len(pi.support)} so every "
            "training set leaves off-training mass"
        )


def _report(learner, pi, family, m, budget, engine) -> NFLReport:
    engines = {"brute": exact_expected_ots, "grouped": grouped_expected_ots}
    if engine not in engines:
        raise ValueError(f"engine must be one of {sorted(engines)}")
    vertical = check_vertical(IIDModel(pi), pi.n, m, budget)
    support = support_condition_holds(family, pi, m, budget)
    result = engines[engine](learner, pi, family, m, budget=budget)
    return NFLReport(
        learner=learner.spec,
        pi=render_weights(pi),
        family=family.name,
        n=pi.n,
        m=m,
        vertical=vertical,
        support=support,
        value=result.value,
        engine=result.engine,
    )


def verify_nfl(
    learner: Learner,
    pi: Distribution,
    m: int,
    budget: Budget = DEFAULT_BUDGET,
    engine: str = "brute",
) -> NFLReport:
    _require_off_mass(pi, m)
    return _report(learner, pi, ots_induced_family(pi), m, budget, engine)


def adversarial_family_demo(
    learner: Learner,
    pi: Distribution,
    m: int,
    family: TestDistributionFamily,
    budget: Budget = DEFAULT_BUDGET,
    engine: str = "brute",
) -> NFLReport:
    """Run the verification pipeline with a caller-chosen test family."""
    _require_off_mass(pi, m)
    return _report(learner, pi, family, m, budget, engine)


@dataclass(frozen=True)
class _RandomOff:
    seed: int
    n: int
    max_weight: int = 9

    def __call__(self, d: TrainingSet) -> Distribution:
        h = splitmix64(self.seed & MASK64)
        for x, y in d.pairs:
            h = splitmix64(h ^ (2 * x + y))
        nums = []
        for x in range(self.n):
            h = splitmix64(h)
            nums.append(0 if x in d.inputs else h % self.max_weight)
        if not any(nums):
            off = [x for x in range(self.n) if x not in d.inputs]
            if not off:
                raise NoOffTrainingMass("training inputs cover the whole space")
            nums[off[h % len(off)]] = 1
        total = sum(nums)
        return Distribution(tuple(Fraction(v, total) for v in nums))


def random_off_family(seed: int, n: int) -> TestDistributionFamily:
    """A seeded adversary: arbitrary weights on X - d_X, chosen per training set."""
    return custom_family(f"random_off:{seed}", _RandomOff(seed, n))


@dataclass(frozen=True)
class SweepRow:
    n: int
    m: int
    learner: str
    family: str
    engine: str
    param: Optional[str] = None
    value: Optional[Fraction] = None
    estimate: Optional[float] = None
    stderr: Optional[float] = None

    @property
    def exact(self) -> bool:
        return self.value is not None

    @property
    def point(self) -> float:
        return float(self.value) if self.exact else self.estimate


def sweep_large_n(
    learner: Learner,
    m: int,
    n_values: Sequence[int],
    mode: str = "auto",
    seed: int = 0,
    samples: int = 100_000,
    budget: Budget = DEFAULT_BUDGET,
    workers: int = 1,
) -> list[SweepRow]:
    """Identical uniform train and test distributions on growing spaces.

    ``mode`` is ``exact`` (raise if over budget), ``mc``, or ``auto``
    (exact while the grouped engine fits the budget, Monte Carlo after).
    """
    if mode not in ("auto", "exact", "mc"):
        raise ValueError(f"mode must be auto, exact or mc, got {mode!r}")
    if list(n_values) != sorted(set(n_values)):
        raise ValueError("n_values must be strictly ascending")
    rows = []
    switched = False
    for n in n_values:
        pi = uniform(n)
        use_exact = mode == "exact" or (mode == "auto" and grouped_cost(pi, m) <= budget.pairs)
        if use_exact:
            r = expected_fixed_error(learner, pi, pi, m, budget=budget, workers=workers)
            rows.append(SweepRow(n, m, learner.spec, "pibar=pi", r.engine, value=r.value))
        else:
            if mode == "auto" and not switched:
                log.info("sweep_large_n: switching to Monte Carlo at n=%d (cost %d > budget %d)",
                         n, grouped_cost(pi, m), budget.pairs)
            switched = True
            est = mc_expected_ots(learner, pi, constant_family(pi), m, samples, seed, workers)
            rows.append(SweepRow(n, m, learner.spec, "pibar=pi", "mc",
                                 estimate=est.estimate, stderr=est.stderr))
    return rows


def overlap_pair(n: int) -> tuple[Distribution, Distribution]:
    """Uniform on the first half of X and uniform on the rest."""
    half = n // 2
    return uniform_on(n, range(half)), uniform_on(n, range(half, n))


def sweep_overlap(
    learner: Learner,
    n: int,
    m: int,
    overlap_grid: Sequence[Fraction],
    budget: Budget = DEFAULT_BUDGET,
    engine: str = "grouped",
) -> list[SweepRow]:
    """Fixed test distribution ``(1 - lam) * second_half + lam * pi``."""
    pi, far = overlap_pair(n)
    rows = []
    for lam in overlap_grid:
        lam = Fraction(lam)
        pibar = mixture(far, pi, lam)
        r = expected_fixed_error(learner, pi, pibar, m, budget=budget, engine=engine)
        rows.append(SweepRow(n, m, learner.spec, f"overlap{render_weights(pibar)}", r.engine,
                             param=str(lam), value=r.value))
    return rows
