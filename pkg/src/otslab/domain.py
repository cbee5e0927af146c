"""Core value types: input spaces, exact distributions, Boolean functions,
training sets, learner and test-family contracts, and sampling models.

Every probability in this module is a :class:`fractions.Fraction`; nothing
on an exact path is ever converted to floating point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Iterator, Sequence, Union

import numpy as np

from .errors import (
    BudgetExceeded,
    InconsistentTrainingSet,
    NegativeWeight,
    SpaceMismatch,
    WeightsDoNotSumToOne,
)

Bit = int
Number = Union[Fraction, int, str]

KINDS = ("ots_induced", "constant", "custom")


@dataclass(frozen=True)
class Budget:
    """Caps on exhaustive enumeration sizes.

    ``pairs`` bounds the number of (function, training sequence) items an
    exact engine may visit; ``functions`` bounds a bare listing of all 2^n
    Boolean functions.
    """

    pairs: int = 2**24
    functions: int = 2**16

    def check(self, what: str, needed: int, cap: int | None = None) -> None:
        cap = self.pairs if cap is None else cap
        if needed > cap:
            raise BudgetExceeded(what, needed, cap)


DEFAULT_BUDGET = Budget()


@dataclass(frozen=True)
class InputSpace:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise ValueError(f"input space needs n >= 2, got {self.n!r}")

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.n))

    def __len__(self) -> int:
        return self.n


def _size(space: InputSpace | int) -> int:
    return space.n if isinstance(space, InputSpace) else int(space)


def as_fraction(value: Number) -> Fraction:
    if isinstance(value, float):
        raise TypeError("floats are not accepted as exact weights; pass a Fraction or 'p/q' string")
    return Fraction(value)


@dataclass(frozen=True)
class Distribution:
    """An exact probability vector over ``0..n-1``."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        ws = tuple(as_fraction(w) for w in self.weights)
        object.__setattr__(self, "weights", ws)
        InputSpace(len(ws))
        for x, w in enumerate(ws):
            if w < 0:
                raise NegativeWeight(f"weight at x={x} is negative: {w}")
        total = sum(ws, Fraction(0))
        if total != 1:
            raise WeightsDoNotSumToOne(f"weights sum to {total}, not 1")

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def space(self) -> InputSpace:
        return InputSpace(self.n)

    def __getitem__(self, x: int) -> Fraction:
        return self.weights[x]

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.weights)

    @cached_property
    def support(self) -> tuple[int, ...]:
        return tuple(x for x, w in enumerate(self.weights) if w > 0)

    @cached_property
    def scaled(self) -> tuple[tuple[int, ...], int]:
        """Integer numerators over the least common denominator."""
        den = math.lcm(*(w.denominator for w in self.weights))
        return tuple(w.numerator * (den // w.denominator) for w in self.weights), den

    @cached_property
    def floats(self) -> tuple[float, ...]:
        return tuple(float(w) for w in self.weights)

    def mass(self, xs: Iterable[int]) -> Fraction:
        return sum((self.weights[x] for x in set(xs)), Fraction(0))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` indices exactly according to the rational weights."""
        nums, den = self.scaled
        cum = list(itertools.accumulate(nums))
        if den < 2**62:
            u = rng.integers(0, den, size=size, dtype=np.int64)
            return np.searchsorted(np.asarray(cum, dtype=np.int64), u, side="right")
        # rejection sampling on raw bytes keeps huge denominators exact
        nbytes = (den.bit_length() + 7) // 8
        limit = (256**nbytes // den) * den
        out = np.empty(size, dtype=np.int64)
        for i in range(size):
            while True:
                u = int.from_bytes(rng.bytes(nbytes), "little")
                if u < limit:
                    break
            u %= den
            out[i] = next(x for x, c in enumerate(cum) if u < c)
        return out


def make_distribution(space: InputSpace | int, weights: Sequence[Number]) -> Distribution:
    n = _size(space)
    if len(weights) != n:
        raise SpaceMismatch(f"expected {n} weights, got {len(weights)}")
    return Distribution(tuple(weights))


def uniform(n: int) -> Distribution:
    return Distribution((Fraction(1, n),) * n)


def uniform_on(n: int, points: Iterable[int]) -> Distribution:
    pts = set(points)
    if not pts:
        raise ValueError("uniform_on needs at least one point")
    w = Fraction(1, len(pts))
    return Distribution(tuple(w if x in pts else Fraction(0) for x in range(n)))


def point_mass(n: int, x: int) -> Distribution:
    return uniform_on(n, [x])


def dyadic(n: int) -> Distribution:
    """Full-support weights 1/2, 1/4, ..., with the last two halves equal."""
    ws = [Fraction(1, 2 ** (i + 1)) for i in range(n - 1)]
    ws.append(ws[-1])
    return Distribution(tuple(ws))


def mixture(a: Distribution, b: Distribution, lam: Fraction) -> Distribution:
    """``(1 - lam) * a + lam * b``."""
    lam = as_fraction(lam)
    if not 0 <= lam <= 1:
        raise ValueError(f"mixture weight must lie in [0, 1], got {lam}")
    if a.n != b.n:
        raise SpaceMismatch("mixture of distributions on different spaces")
    return Distribution(tuple((1 - lam) * p + lam * q for p, q in zip(a, b)))


@dataclass(frozen=True)
class TargetFunction:
    bits: tuple[Bit, ...]

    def __post_init__(self):
        bits = tuple(self.bits)
        if not bits or any(b not in (0, 1) for b in bits):
            raise ValueError(f"bits must be a nonempty 0/1 sequence, got {bits!r}")
        object.__setattr__(self, "bits", bits)

    @property
    def n(self) -> int:
        return len(self.bits)

    def __call__(self, x: int) -> Bit:
        return self.bits[x]

    def __getitem__(self, x: int) -> Bit:
        return self.bits[x]

    def __len__(self) -> int:
        return len(self.bits)

    def complement(self):
        return type(self)(tuple(1 - b for b in self.bits))


class Hypothesis(TargetFunction):
    """A learner's output; same shape as a target function."""


@dataclass(frozen=True)
class TrainingSet:
    """An ordered sequence of noise-free ``(input, label)`` pairs."""

    pairs: tuple[tuple[int, Bit], ...]

    def __post_init__(self):
        pairs = tuple((int(x), int(y)) for x, y in self.pairs)
        if not pairs:
            raise ValueError("a training set needs m >= 1 pairs")
        seen: dict[int, int] = {}
        for x, y in pairs:
            if x < 0:
                raise ValueError(f"negative input index {x}")
            if y not in (0, 1):
                raise ValueError(f"label must be 0 or 1, got {y}")
            if seen.setdefault(x, y) != y:
                raise InconsistentTrainingSet(f"input {x} carries both labels")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def label(cls, xs: Sequence[int], f: TargetFunction) -> "TrainingSet":
        return cls(tuple((x, f.bits[x]) for x in xs))

    @property
    def m(self) -> int:
        return len(self.pairs)

    @cached_property
    def inputs(self) -> frozenset[int]:
        """The trained-input set d_X."""
        return frozenset(x for x, _ in self.pairs)

    @cached_property
    def labels(self) -> dict[int, Bit]:
        return dict(self.pairs)

    @property
    def xs(self) -> tuple[int, ...]:
        return tuple(x for x, _ in self.pairs)

    @property
    def ys(self) -> tuple[Bit, ...]:
        return tuple(y for _, y in self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


def check_in_space(d: TrainingSet, n: int) -> None:
    if max(d.inputs) >= n:
        raise SpaceMismatch(f"training input {max(d.inputs)} outside space of size {n}")


def consistent(d: TrainingSet, f: TargetFunction) -> bool:
    check_in_space(d, f.n)
    return all(f.bits[x] == y for x, y in d.pairs)


class Learner:
    """Deterministic map from a training set to a hypothesis on ``n`` inputs.

    Subclasses implement :meth:`predict`; ``spec`` is the string form the
    CLI accepts.
    """

    name: str = "learner"

    def predict(self, d: TrainingSet, n: int) -> tuple[Bit, ...]:
        raise NotImplementedError

    def __call__(self, d: TrainingSet, n: int) -> Hypothesis:
        return Hypothesis(self.predict(d, n))

    @property
    def spec(self) -> str:
        return self.name


@dataclass(frozen=True)
class TestDistributionFamily:
    """A rule assigning a test distribution to each training set."""

    __test__ = False

    name: str
    kind: str
    rule: Callable[[TrainingSet], Distribution] = field(compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"family kind must be one of {KINDS}, got {self.kind!r}")

    def __call__(self, d: TrainingSet) -> Distribution:
        return self.rule(d)


@dataclass(frozen=True)
class _Constant:
    dist: Distribution

    def __call__(self, d: TrainingSet) -> Distribution:
        return self.dist


def constant_family(pibar: Distribution, name: str | None = None) -> TestDistributionFamily:
    return TestDistributionFamily(name or f"constant{render_weights(pibar)}", "constant", _Constant(pibar))


def custom_family(name: str, rule: Callable[[TrainingSet], Distribution]) -> TestDistributionFamily:
    return TestDistributionFamily(name, "custom", rule)


def render_weights(dist: Distribution) -> str:
    return "(" + ",".join(str(w) for w in dist.weights) + ")"


class SamplingModel:
    """Likelihood P(d | f) plus a seeded sampler.

    ``admits(f)`` marks the target functions on which the model is defined;
    the likelihood of every admitted f sums to one over label-consistent
    sequences of any fixed length.
    """

    name = "model"

    def admits(self, f: TargetFunction) -> bool:
        return True

    def likelihood(self, d: TrainingSet, f: TargetFunction) -> Fraction:
        raise NotImplementedError

    def sample(self, f: TargetFunction, m: int, rng: np.random.Generator) -> TrainingSet:
        raise NotImplementedError


@dataclass(frozen=True)
class IIDModel(SamplingModel):
    """Inputs drawn independently with replacement from ``pi``."""

    pi: Distribution
    name: str = "iid"

    def likelihood(self, d: TrainingSet, f: TargetFunction) -> Fraction:
        if not consistent(d, f):
            return Fraction(0)
        p = Fraction(1)
        for x in d.xs:
            p *= self.pi.weights[x]
        return p

    def sample(self, f: TargetFunction, m: int, rng: np.random.Generator) -> TrainingSet:
        return TrainingSet.label([int(x) for x in self.pi.sample(rng, m)], f)


@dataclass(frozen=True)
class PositiveConditionalModel(SamplingModel):
    """Inputs drawn uniformly from the positive set {x : f(x) = 1}.

    Undefined for the all-zero function, which is therefore not admitted.
    The likelihood leaks the location of unseen positives, so it is not
    vertical.
    """

    name: str = "positive-conditional"

    def admits(self, f: TargetFunction) -> bool:
        return any(f.bits)

    def likelihood(self, d: TrainingSet, f: TargetFunction) -> Fraction:
        if not self.admits(f):
            raise ValueError("positive-conditional model is undefined for the all-zero function")
        if not consistent(d, f) or any(y == 0 for y in d.ys):
            return Fraction(0)
        return Fraction(1, sum(f.bits)) ** d.m

    def sample(self, f: TargetFunction, m: int, rng: np.random.Generator) -> TrainingSet:
        positives = [x for x, b in enumerate(f.bits) if b]
        if not positives:
            raise ValueError("positive-conditional model is undefined for the all-zero function")
        return TrainingSet.label([positives[int(i)] for i in rng.integers(0, len(positives), size=m)], f)


def enumerate_target_functions(
    space: InputSpace | int, budget: Budget = DEFAULT_BUDGET
) -> list[TargetFunction]:
    """All 2^n Boolean functions in lexicographic bit order."""
    n = _size(space)
    if n < 1:
        raise ValueError("need n >= 1")
    budget.check("target functions", 2**n, budget.functions)
    return [TargetFunction(bits) for bits in itertools.product((0, 1), repeat=n)]


def input_sequences(pi: Distribution, m: int) -> Iterator[tuple[tuple[int, ...], Fraction]]:
    """Ordered length-m input sequences over support(pi) with their IID probability."""
    if m < 1:
        raise ValueError("training sets need m >= 1")
    support = pi.support
    w = pi.weights
    for xs in itertools.product(support, repeat=m):
        p = Fraction(1)
        for x in xs:
            p *= w[x]
        yield xs, p


def count_input_sequences(pi: Distribution, m: int) -> int:
    return len(pi.support) ** m


def enumerate_training_sequences(
    space: InputSpace | int,
    pi: Distribution,
    m: int,
    f: TargetFunction,
    budget: Budget = DEFAULT_BUDGET,
) -> list[tuple[TrainingSet, Fraction]]:
    n = _size(space)
    if pi.n != n or f.n != n:
        raise SpaceMismatch("pi, f and the input space disagree on n")
    budget.check("training sequences", count_input_sequences(pi, m))
    return [(TrainingSet.label(xs, f), p) for xs, p in input_sequences(pi, m)]
