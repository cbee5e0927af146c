"""Deterministic learners used as test subjects.

Learners are addressed from the command line as ``name:key=value,...``,
for example ``memorizer:default=0`` or ``hash:seed=7``.

The hash learner's off-training predictions come from a SplitMix64 chain
(64-bit arithmetic, wrap-around)::

    h = mix(seed)
    for (x_i, y_i) in d:          # training pairs in order
        h = mix(h ^ (2 * x_i + y_i))
    bit(x) = mix(h ^ x) >> 63

with ``mix`` the SplitMix64 finalizer (golden-ratio increment followed by
the 30/27/31 xor-shift-multiply rounds).
"""

from __future__ import annotations

from dataclasses import dataclass

from .domain import Bit, Learner, TrainingSet

MASK64 = (1 << 64) - 1


def splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _bit(value) -> int:
    b = int(value)
    if b not in (0, 1):
        raise ValueError(f"expected a bit, got {value!r}")
    return b


def _memorize(d: TrainingSet, n: int, fill: list[Bit]) -> tuple[Bit, ...]:
    for x, y in d.pairs:
        if x >= n:
            raise ValueError(f"training input {x} outside space of size {n}")
        fill[x] = y
    return tuple(fill)


@dataclass(frozen=True)
class Memorizer(Learner):
    default: Bit = 0
    name = "memorizer"

    def predict(self, d, n):
        return _memorize(d, n, [self.default] * n)

    @property
    def spec(self):
        return f"memorizer:default={self.default}"


@dataclass(frozen=True)
class ConstantLearner(Learner):
    label: Bit = 0
    name = "constant"

    def predict(self, d, n):
        return (self.label,) * n

    @property
    def spec(self):
        return f"constant:label={self.label}"


@dataclass(frozen=True)
class MajorityLearner(Learner):
    """Memorizes d; elsewhere predicts the majority training label."""

    tie: Bit = 0
    name = "majority"

    def predict(self, d, n):
        ones = sum(d.ys)
        zeros = d.m - ones
        guess = 1 if ones > zeros else 0 if zeros > ones else self.tie
        return _memorize(d, n, [guess] * n)

    @property
    def spec(self):
        return f"majority:tie={self.tie}"


@dataclass(frozen=True)
class HashLearner(Learner):
    """Memorizes d; elsewhere emits a seeded hash bit of ``(x, d)``."""

    seed: int = 0
    name = "hash"

    def state(self, d: TrainingSet) -> int:
        h = splitmix64(self.seed & MASK64)
        for x, y in d.pairs:
            h = splitmix64(h ^ (2 * x + y))
        return h

    def predict(self, d, n):
        h = self.state(d)
        return _memorize(d, n, [splitmix64(h ^ x) >> 63 for x in range(n)])

    @property
    def spec(self):
        return f"hash:seed={self.seed}"


def memorizer(default_label: Bit = 0) -> Memorizer:
    return Memorizer(_bit(default_label))


def constant_learner(label: Bit = 0) -> ConstantLearner:
    return ConstantLearner(_bit(label))


def majority_learner(tie_label: Bit = 0) -> MajorityLearner:
    return MajorityLearner(_bit(tie_label))


def hash_learner(seed: int = 0) -> HashLearner:
    return HashLearner(int(seed))


# name -> (factory, parameter name, parameter parser, description)
REGISTRY = {
    "memorizer": (memorizer, "default", _bit, "training labels on d_X, a fixed default elsewhere"),
    "constant": (constant_learner, "label", _bit, "the constant function, ignoring the data"),
    "majority": (majority_learner, "tie", _bit, "training labels on d_X, majority label elsewhere"),
    "hash": (hash_learner, "seed", int, "training labels on d_X, seeded hash bits elsewhere"),
}


class UnknownLearner(ValueError):
    pass


def parse_learner(spec: str) -> Learner:
    """Build a learner from ``name[:param=value]``."""
    name, _, params = spec.strip().partition(":")
    if name not in REGISTRY:
        raise UnknownLearner(f"unknown learner {name!r}; available: {', '.join(REGISTRY)}")
    factory, pname, parse, _ = REGISTRY[name]
    kwargs = {}
    for item in filter(None, (p.strip() for p in params.split(","))):
        key, eq, value = item.partition("=")
        if not eq or key.strip() != pname:
            raise UnknownLearner(f"learner {name!r} takes only {pname}=<value>, got {item!r}")
        try:
            kwargs[pname] = parse(value.strip())
        except ValueError as exc:
            raise UnknownLearner(f"bad value for {name}:{pname}: {exc}") from None
    return factory(*kwargs.values())


def zoo() -> list[Learner]:
    """The standard panel of learners the theorem is checked against."""
    return [
        memorizer(0),
        memorizer(1),
        constant_learner(0),
        constant_learner(1),
        majority_learner(0),
        majority_learner(1),
        hash_learner(7),
        hash_learner(2024),
    ]
