from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from otslab.domain import (
    Budget,
    IIDModel,
    InputSpace,
    PositiveConditionalModel,
    TargetFunction,
    TrainingSet,
    consistent,
    dyadic,
    enumerate_target_functions,
    enumerate_training_sequences,
    make_distribution,
    mixture,
    uniform,
)
from otslab.errors import (
    BudgetExceeded,
    InconsistentTrainingSet,
    NegativeWeight,
    SpaceMismatch,
    WeightsDoNotSumToOne,
)
from otslab.learners import zoo

from conftest import any_support, full_support


def test_uniform_distribution():
    d = make_distribution(InputSpace(2), [F(1, 2), F(1, 2)])
    assert d.weights == (F(1, 2), F(1, 2))
    assert d.support == (0, 1)


def test_point_mass_support():
    d = make_distribution(3, [1, 0, 0])
    assert d.support == (0,)


def test_weights_must_sum_to_one():
    with pytest.raises(WeightsDoNotSumToOne):
        make_distribution(2, [F(1, 3), F(1, 3)])


def test_negative_weight():
    with pytest.raises(NegativeWeight):
        make_distribution(2, [F(3, 2), F(-1, 2)])


def test_length_mismatch():
    with pytest.raises(SpaceMismatch):
        make_distribution(3, [F(1, 2), F(1, 2)])


def test_floats_rejected():
    with pytest.raises(TypeError):
        make_distribution(2, [0.5, 0.5])


def test_strings_are_exact():
    assert make_distribution(2, ["1/3", "2/3"]).weights == (F(1, 3), F(2, 3))


@pytest.mark.parametrize("n", [1, 0])
def test_tiny_input_space_rejected(n):
    with pytest.raises(ValueError):
        InputSpace(n)


def test_dyadic():
    assert dyadic(4).weights == (F(1, 2), F(1, 4), F(1, 8), F(1, 8))
    assert dyadic(2).weights == (F(1, 2), F(1, 2))


def test_mixture_endpoints():
    a, b = uniform(3), make_distribution(3, [1, 0, 0])
    assert mixture(a, b, 0) == a
    assert mixture(a, b, 1) == b


@pytest.mark.parametrize(
    "bits, pairs, expected",
    [
        ((0, 1, 0), [(1, 1)], True),
        ((0, 1, 0), [(1, 0)], False),
        ((0, 1), [(0, 0), (1, 1), (0, 0)], True),
    ],
)
def test_consistent(bits, pairs, expected):
    assert consistent(TrainingSet(pairs), TargetFunction(bits)) is expected


def test_consistent_space_mismatch():
    with pytest.raises(SpaceMismatch):
        consistent(TrainingSet([(3, 0)]), TargetFunction((0, 1)))


def test_training_set_rejects_contradictory_labels():
    with pytest.raises(InconsistentTrainingSet):
        TrainingSet([(0, 1), (0, 0)])


def test_training_set_needs_a_pair():
    with pytest.raises(ValueError):
        TrainingSet([])


def test_trained_inputs():
    d = TrainingSet([(2, 1), (0, 0), (2, 1)])
    assert d.inputs == {0, 2}
    assert d.m == 3


def test_enumerate_functions_base_case():
    fs = enumerate_target_functions(1)
    assert [f.bits for f in fs] == [(0,), (1,)]


def test_enumerate_functions_n3():
    fs = enumerate_target_functions(InputSpace(3))
    assert len(fs) == 8
    assert fs[0].bits == (0, 0, 0)
    assert fs[-1].bits == (1, 1, 1)
    assert len({f.bits for f in fs}) == 8


def test_enumerate_functions_budget():
    with pytest.raises(BudgetExceeded):
        enumerate_target_functions(20)
    assert len(enumerate_target_functions(4, Budget(functions=16))) == 16


def test_training_sequences_direct():
    seqs = enumerate_training_sequences(2, uniform(2), 1, TargetFunction((0, 1)))
    assert [(d.pairs, p) for d, p in seqs] == [(((0, 0),), F(1, 2)), (((1, 1),), F(1, 2))]


def test_training_sequences_point_mass():
    seqs = enumerate_training_sequences(2, make_distribution(2, [1, 0]), 2, TargetFunction((1, 0)))
    assert [(d.pairs, p) for d, p in seqs] == [(((0, 1), (0, 1)), F(1))]


def test_training_sequences_count():
    seqs = enumerate_training_sequences(3, uniform(3), 2, TargetFunction((1, 0, 1)))
    assert len(seqs) == 9
    assert all(p == F(1, 9) for _, p in seqs)


def test_training_sequences_budget():
    with pytest.raises(BudgetExceeded):
        enumerate_training_sequences(4, uniform(4), 3, TargetFunction((0,) * 4), Budget(pairs=63))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4).flatmap(lambda n: st.tuples(any_support(n), st.integers(1, 3), st.integers(0, 2**n - 1))))
def test_sequence_probabilities_sum_to_one(args):
    pi, m, code = args
    n = pi.n
    f = TargetFunction(tuple((code >> (n - 1 - i)) & 1 for i in range(n)))
    seqs = enumerate_training_sequences(n, pi, m, f)
    assert sum(p for _, p in seqs) == 1
    assert all(consistent(d, f) for d, _ in seqs)


def _all_labeled(n, m):
    from itertools import product

    for xs in product(range(n), repeat=m):
        for ys in product((0, 1), repeat=m):
            try:
                yield TrainingSet(tuple(zip(xs, ys)))
            except InconsistentTrainingSet:
                continue


@pytest.mark.parametrize("model", [IIDModel(dyadic(3)), PositiveConditionalModel()], ids=lambda m: m.name)
@pytest.mark.parametrize("m", [1, 2])
def test_likelihood_normalized(model, m):
    for f in enumerate_target_functions(3):
        if not model.admits(f):
            continue
        total = F(0)
        for d in _all_labeled(3, m):
            p = model.likelihood(d, f)
            if not consistent(d, f):
                assert p == 0
            total += p
        assert total == 1


def test_exact_sampling_frequencies():
    pi = dyadic(4)
    draws = pi.sample(np.random.default_rng(3), 40_000)
    freq = np.bincount(draws, minlength=4) / len(draws)
    assert np.allclose(freq, [0.5, 0.25, 0.125, 0.125], atol=0.01)


def test_large_denominator_sampling_is_exact_path():
    p = F(1, 2**70)
    pi = make_distribution(2, [p, 1 - p])
    draws = pi.sample(np.random.default_rng(0), 50)
    assert set(draws.tolist()) <= {0, 1}


def test_positive_conditional_sampler():
    f = TargetFunction((0, 1, 1, 0))
    d = PositiveConditionalModel().sample(f, 20, np.random.default_rng(1))
    assert d.inputs <= {1, 2}
    assert consistent(d, f)


@settings(max_examples=30, deadline=None)
@given(full_support(4), st.integers(0, 10**6))
def test_iid_sampler_consistent(pi, seed):
    f = TargetFunction((1, 0, 0, 1))
    d = IIDModel(pi).sample(f, 3, np.random.default_rng(seed))
    assert consistent(d, f)


def test_learner_determinism():
    from itertools import product

    for learner in zoo():
        for xs in product(range(3), repeat=2):
            d = TrainingSet.label(xs, TargetFunction((1, 0, 1)))
            again = TrainingSet(tuple(d.pairs))
            assert learner(d, 3) == learner(again, 3)
