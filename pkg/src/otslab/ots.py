"""Off-training-set error and the test distributions it is measured against."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

from .domain import (
    DEFAULT_BUDGET,
    Budget,
    Distribution,
    Hypothesis,
    TargetFunction,
    TestDistributionFamily,
    TrainingSet,
    check_in_space,
    count_input_sequences,
    custom_family,
    input_sequences,
)
from .errors import NoOffTrainingMass, SpaceMismatch


def ots_induced(pi: Distribution, d: TrainingSet) -> Distribution:
    """``pi`` restricted to the inputs outside ``d`` and renormalized."""
    check_in_space(d, pi.n)
    trained = d.inputs
    off = pi.mass(x for x in range(pi.n) if x not in trained)
    if off == 0:
        raise NoOffTrainingMass(f"training inputs {sorted(trained)} cover support {list(pi.support)}")
    return Distribution(
        tuple(Fraction(0) if x in trained else w / off for x, w in enumerate(pi.weights))
    )


@dataclass(frozen=True)
class _OTSInduced:
    pi: Distribution

    def __call__(self, d: TrainingSet) -> Distribution:
        return ots_induced(self.pi, d)


def ots_induced_family(pi: Distribution) -> TestDistributionFamily:
    return TestDistributionFamily("ots_induced", "ots_induced", _OTSInduced(pi))


@dataclass(frozen=True)
class _UniformOff:
    n: int

    def __call__(self, d: TrainingSet) -> Distribution:
        rest = [x for x in range(self.n) if x not in d.inputs]
        if not rest:
            raise NoOffTrainingMass("training inputs cover the whole space")
        w = Fraction(1, len(rest))
        return Distribution(tuple(w if x not in d.inputs else Fraction(0) for x in range(self.n)))


def uniform_off_family(n: int) -> TestDistributionFamily:
    """Uniform on X - d_X regardless of the training distribution."""
    return custom_family("uniform_off", _UniformOff(n))


def ots_error(h: Hypothesis, f: TargetFunction, test: Distribution) -> Fraction:
    """Test-weighted 0/1 disagreement between ``h`` and ``f``."""
    if not (h.n == f.n == test.n):
        raise SpaceMismatch(f"h, f and test have sizes {h.n}, {f.n}, {test.n}")
    return sum(
        (w for w, a, b in zip(test.weights, h.bits, f.bits) if a != b),
        Fraction(0),
    )


def renormalized_ots_error(h: Hypothesis, f: TargetFunction, pi: Distribution, d: TrainingSet) -> Fraction:
    """Off-training error written as a ratio of sums over X - d_X.

    Kept separate from :func:`ots_error` so the two forms can check each other.
    """
    off = [x for x in range(pi.n) if x not in d.inputs]
    den = sum((pi.weights[x] for x in off), Fraction(0))
    if den == 0:
        raise NoOffTrainingMass("zero off-training mass")
    num = sum((pi.weights[x] * abs(h.bits[x] - f.bits[x]) for x in off), Fraction(0))
    return num / den


class SupportCheck(NamedTuple):
    holds: bool
    witness: Optional[tuple[TrainingSet, int]] = None

    def __bool__(self) -> bool:
        return self.holds


def support_condition_holds(
    family: TestDistributionFamily,
    pi: Distribution,
    m: int,
    budget: Budget = DEFAULT_BUDGET,
) -> SupportCheck:
    """Does ``family(d)`` vanish on d_X for every positive-probability ``d``?

    Every ordered input sequence over support(pi) is tried with every
    labeling of its distinct inputs. The witness is the first failing
    ``(d, x)`` in lexicographic order.
    """
    budget.check("support check", count_input_sequences(pi, m) * 2 ** min(m, pi.n))
    for xs, _ in input_sequences(pi, m):
        distinct = sorted(set(xs))
        for labels in itertools.product((0, 1), repeat=len(distinct)):
            lab = dict(zip(distinct, labels))
            d = TrainingSet(tuple((x, lab[x]) for x in xs))
            test = family(d)
            for x in distinct:
                if test.weights[x] != 0:
                    return SupportCheck(False, (d, x))
    return SupportCheck(True)


def disjoint_supports(pi: Distribution, pibar: Distribution) -> bool:
    if pi.n != pibar.n:
        raise SpaceMismatch("distributions live on different spaces")
    return not set(pi.support) & set(pibar.support)
