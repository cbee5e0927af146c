"""Expectation engines for E_d E_f of the test-weighted disagreement.

Three routes compute the same quantity under a uniform prior over target
functions and IID training inputs:

* :func:`exact_expected_ots` enumerates every (f, d) pair.
* :func:`grouped_expected_ots` enumerates labeled training sequences only;
  given (d_X, d_Y) the unseen bits of f are fair coins, so each unseen test
  point contributes half its mass.
* :func:`mc_expected_ots` samples (f, d) pairs from a seeded generator.

Exact engines can split their outer loop across processes. Partial sums are
Fractions, so the reduction is order-independent.
"""

from __future__ import annotations

import itertools
import math
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .domain import (
    DEFAULT_BUDGET,
    Budget,
    Distribution,
    Learner,
    TestDistributionFamily,
    TrainingSet,
    constant_family,
    count_input_sequences,
    input_sequences,
)
from .errors import SpaceMismatch

MC_BATCH = 4096


@dataclass(frozen=True)
class ExactResult:
    value: Fraction
    pairs: int
    engine: str
    seconds: float = 0.0

    def __post_init__(self):
        if not 0 <= self.value <= 1:
            raise AssertionError(f"expected error outside [0, 1]: {self.value}")


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    stderr: float
    samples: int
    seed: int
    workers: int = 1

    def interval(self, z: float = 1.96) -> tuple[float, float]:
        return self.estimate - z * self.stderr, self.estimate + z * self.stderr

    def within(self, target: float, k: float = 4.0) -> bool:
        return abs(self.estimate - float(target)) <= k * self.stderr


def _ranges(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total))
    step, extra = divmod(total, parts)
    out, start = [], 0
    for i in range(parts):
        stop = start + step + (i < extra)
        out.append((start, stop))
        start = stop
    return out


def _partitioned(chunk: Callable, args: tuple, total: int, workers: int) -> tuple[Fraction, int]:
    ranges = _ranges(total, workers)
    if len(ranges) == 1:
        parts = [chunk(*args, *ranges[0])]
    else:
        with ProcessPoolExecutor(max_workers=len(ranges)) as pool:
            futures = [pool.submit(chunk, *args, start, stop) for start, stop in ranges]
            parts = [fut.result() for fut in futures]
    return sum((v for v, _ in parts), Fraction(0)), sum(c for _, c in parts)


def _check_shapes(pi: Distribution, m: int) -> None:
    if m < 1:
        raise ValueError("training sets need m >= 1")


def _brute_chunk(learner, pi, family, m, start, stop):
    n = pi.n
    functions = list(itertools.product((0, 1), repeat=n))
    total = Fraction(0)
    visited = 0
    for xs, p in itertools.islice(input_sequences(pi, m), start, stop):
        cache = {}
        acc = defaultdict(int)
        for bits in functions:
            labels = tuple(bits[x] for x in xs)
            entry = cache.get(labels)
            if entry is None:
                d = TrainingSet(tuple(zip(xs, labels)))
                test = family(d)
                if test.n != n:
                    raise SpaceMismatch("family returned a distribution on the wrong space")
                nums, den = test.scaled
                entry = cache[labels] = (learner(d, n).bits, nums, den)
            h, nums, den = entry
            acc[den] += sum(w for w, a, b in zip(nums, h, bits) if a != b)
            visited += 1
        total += p * sum((Fraction(v, den) for den, v in acc.items()), Fraction(0))
    return total / 2**n, visited


def exact_expected_ots(
    learner: Learner,
    pi: Distribution,
    family: TestDistributionFamily,
    m: int,
    budget: Budget = DEFAULT_BUDGET,
    workers: int = 1,
) -> ExactResult:
    """Brute force over all 2^n targets and all IID input sequences."""
    _check_shapes(pi, m)
    count = count_input_sequences(pi, m)
    budget.check("target functions", 2**pi.n, budget.functions)
    budget.check("(f, d) pairs", 2**pi.n * count)
    t0 = time.perf_counter()
    value, visited = _partitioned(_brute_chunk, (learner, pi, family, m), count, workers)
    return ExactResult(value, visited, "brute", time.perf_counter() - t0)


def _grouped_chunk(learner, pi, family, m, start, stop):
    n = pi.n
    half = Fraction(1, 2)
    total = Fraction(0)
    visited = 0
    for xs, p in itertools.islice(input_sequences(pi, m), start, stop):
        distinct = sorted(set(xs))
        sub = Fraction(0)
        for labels in itertools.product((0, 1), repeat=len(distinct)):
            lab = dict(zip(distinct, labels))
            d = TrainingSet(tuple((x, lab[x]) for x in xs))
            h = learner(d, n).bits
            test = family(d)
            if test.n != n:
                raise SpaceMismatch("family returned a distribution on the wrong space")
            seen_mass = Fraction(0)
            wrong = Fraction(0)
            for x in distinct:
                seen_mass += test.weights[x]
                if h[x] != lab[x]:
                    wrong += test.weights[x]
            sub += wrong + (1 - seen_mass) * half
            visited += 1
        total += p * sub / 2 ** len(distinct)
    return total, visited


def grouped_expected_ots(
    learner: Learner,
    pi: Distribution,
    family: TestDistributionFamily,
    m: int,
    budget: Budget = DEFAULT_BUDGET,
    workers: int = 1,
) -> ExactResult:
    """Same value as :func:`exact_expected_ots` without enumerating f."""
    _check_shapes(pi, m)
    count = count_input_sequences(pi, m)
    budget.check("labeled training sequences", count * 2 ** min(m, pi.n))
    t0 = time.perf_counter()
    value, visited = _partitioned(_grouped_chunk, (learner, pi, family, m), count, workers)
    return ExactResult(value, visited, "grouped", time.perf_counter() - t0)


def grouped_cost(pi: Distribution, m: int) -> int:
    return count_input_sequences(pi, m) * 2 ** min(m, pi.n)


def expected_fixed_error(
    learner: Learner,
    pi: Distribution,
    pibar: Distribution,
    m: int,
    budget: Budget = DEFAULT_BUDGET,
    engine: str = "grouped",
    workers: int = 1,
) -> ExactResult:
    """Ordinary generalization error against a fixed test distribution.

    Test points may coincide with trained points.
    """
    if pi.n != pibar.n:
        raise SpaceMismatch("pi and pibar live on different spaces")
    engines = {"grouped": grouped_expected_ots, "brute": exact_expected_ots}
    if engine not in engines:
        raise ValueError(f"engine must be one of {sorted(engines)}")
    return engines[engine](learner, pi, constant_family(pibar), m, budget=budget, workers=workers)


def _mc_chunk(learner, pi, family, m, count, seed_seq):
    rng = np.random.default_rng(seed_seq)
    n = pi.n
    s = Fraction(0)
    sq = Fraction(0)
    done = 0
    while done < count:
        k = min(MC_BATCH, count - done)
        fbits = rng.integers(0, 2, size=(k, n), dtype=np.int8)
        xs = pi.sample(rng, k * m).reshape(k, m)
        for i in range(k):
            bits = fbits[i].tolist()
            d = TrainingSet(tuple((x, bits[x]) for x in xs[i].tolist()))
            h = learner(d, n).bits
            test = family(d)
            err = sum((w for w, a, b in zip(test.weights, h, bits) if a != b), Fraction(0))
            s += err
            sq += err * err
        done += k
    return s, sq


def mc_expected_ots(
    learner: Learner,
    pi: Distribution,
    family: TestDistributionFamily,
    m: int,
    samples: int,
    seed: int,
    workers: int = 1,
) -> MCEstimate:
    """Seeded Monte Carlo estimate with the unbiased standard error.

    Worker ``i`` draws from the ``i``-th child of ``SeedSequence(seed)``, so
    the estimate is reproducible for a fixed ``(seed, workers)``. Per-sample
    errors are summed as Fractions, making the reduction exact.
    """
    _check_shapes(pi, m)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    children = np.random.SeedSequence(seed).spawn(workers)
    shares = [b - a for a, b in _ranges(samples, workers)]
    shares += [0] * (workers - len(shares))
    jobs = [(learner, pi, family, m, c, child) for c, child in zip(shares, children) if c]
    if len(jobs) == 1:
        parts = [_mc_chunk(*jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=len(jobs)) as pool:
            parts = list(pool.map(_mc_chunk, *zip(*jobs)))
    s = sum((p[0] for p in parts), Fraction(0))
    sq = sum((p[1] for p in parts), Fraction(0))
    mean = s / samples
    if samples > 1:
        var = (sq - s * mean) / (samples - 1)
        stderr = math.sqrt(var / samples)
    else:
        stderr = math.inf
    return MCEstimate(float(mean), stderr, samples, seed, workers)
