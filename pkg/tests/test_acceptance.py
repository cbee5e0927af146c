"""Exit criteria. Every value is compared exactly unless a criterion is
stated in standard errors; every runtime cap is asserted."""

import random
import time
from contextlib import contextmanager
from fractions import Fraction as F

import pytest

from otslab.cli import main
from otslab.domain import Distribution, IIDModel, PositiveConditionalModel, constant_family, dyadic, uniform
from otslab.expect import exact_expected_ots, expected_fixed_error, grouped_expected_ots, mc_expected_ots
from otslab.learners import memorizer, zoo
from otslab.nfl import check_vertical, overlap_pair, random_off_family, sweep_large_n, sweep_overlap, verify_nfl
from otslab.ots import ots_induced_family, support_condition_holds

from conftest import memorizer_closed_form

HALF = F(1, 2)
SIZES = [(3, 1), (3, 2), (4, 2), (5, 2), (5, 3), (6, 2)]


@contextmanager
def within(seconds):
    t0 = time.perf_counter()
    yield
    elapsed = time.perf_counter() - t0
    assert elapsed < seconds, f"took {elapsed:.1f}s, cap {seconds}s"


@pytest.mark.acceptance(1, "NFL exact equality over zoo x {uniform, dyadic} x sizes")
def test_nfl_exact_equality():
    with within(60):
        for n, m in SIZES:
            for pi in (uniform(n), dyadic(n)):
                for learner in zoo():
                    rep = verify_nfl(learner, pi, m)
                    assert rep.hypotheses_hold, (learner.spec, n, m)
                    assert rep.value == HALF and rep.equals_half, (learner.spec, pi, m, rep.value)


@pytest.mark.acceptance(2, "hypothesis checkers: vertical likelihood and support condition")
def test_hypothesis_checkers():
    with within(30):
        for n in range(2, 6):
            for m in range(1, 4):
                assert check_vertical(IIDModel(uniform(n)), n, m).holds
                assert check_vertical(IIDModel(dyadic(n)), n, m).holds
        res = check_vertical(PositiveConditionalModel(), 2, 1)
        assert not res.holds
        w = res.witness
        assert (w.d.pairs, w.f.bits, w.f_prime.bits, w.p, w.p_prime) == (((1, 1),), (0, 1), (1, 1), 1, HALF)
        for n in range(2, 6):
            for m in range(1, min(n, 4)):
                for pi in (uniform(n), dyadic(n)):
                    assert support_condition_holds(ots_induced_family(pi), pi, m).holds
                    for pibar in (uniform(n), dyadic(n)):
                        assert not support_condition_holds(constant_family(pibar), pi, m).holds


@pytest.mark.acceptance(3, "disjoint-support fixed test distribution gives exactly 1/2")
def test_disjoint_fixed_support():
    with within(30):
        for n in (4, 6):
            pi, pibar = overlap_pair(n)
            for m in (1, 2, 3):
                for learner in zoo():
                    assert expected_fixed_error(learner, pi, pibar, m, engine="brute").value == HALF
                    assert expected_fixed_error(learner, pi, pibar, m, engine="grouped").value == HALF


@pytest.mark.acceptance(4, "overlap advantage: memorizer with pi = pibar uniform is (1/2)(1-1/n)^m")
def test_overlap_advantage():
    with within(60):
        for n, m, expected in ((2, 1, F(1, 4)), (8, 4, F(2401, 8192))):
            assert expected == HALF * (1 - F(1, n)) ** m
            pi = uniform(n)
            assert expected_fixed_error(memorizer(0), pi, pi, m).value == expected
            assert expected_fixed_error(memorizer(0), pi, pi, m, engine="brute").value == expected


@pytest.mark.acceptance(5, "large-n trend: rows strictly increasing and strictly below 1/2")
def test_large_n_trend():
    with within(60):
        rows = sweep_large_n(memorizer(0), 4, [5, 6, 7, 8], mode="exact")
        values = [r.value for r in rows]
        assert all(r.exact for r in rows)
        assert all(a < b for a, b in zip(values, values[1:]))
        assert all(v < HALF for v in values)
        assert values[-1] == F(2401, 8192)


@pytest.mark.acceptance(6, "grouped engine equals brute force on >= 50 random configurations")
def test_engine_equivalence():
    rng = random.Random(20260414)
    learners = zoo()
    checked = 0
    with within(120):
        while checked < 60:
            n = rng.randint(2, 5)
            m = rng.randint(1, 3)
            nums = [rng.randint(1, 9) for _ in range(n)]
            pi = Distribution(tuple(F(v, sum(nums)) for v in nums))
            learner = rng.choice(learners)
            choice = rng.randrange(3)
            pibar = None
            if choice == 0 and m < n:
                family = ots_induced_family(pi)
            elif choice == 1 and m < n:
                family = random_off_family(rng.randrange(2**32), n)
            else:
                other = [rng.randint(0, 5) for _ in range(n)]
                other[rng.randrange(n)] += 1
                pibar = Distribution(tuple(F(v, sum(other)) for v in other))
                family = constant_family(pibar)
            brute = exact_expected_ots(learner, pi, family, m).value
            grouped = grouped_expected_ots(learner, pi, family, m).value
            assert brute == grouped, (learner.spec, pi, family.name, m)
            if pibar is not None and learner.name == "memorizer":
                assert brute == memorizer_closed_form(pi, pibar, m)
            checked += 1
    assert checked >= 50


@pytest.mark.acceptance(7, "Monte Carlo within 4 standard errors at n=8, m=4, 1e5 samples")
def test_monte_carlo_consistency():
    with within(60):
        pi = uniform(8)
        est = mc_expected_ots(memorizer(0), pi, ots_induced_family(pi), 4, samples=100_000, seed=12345)
        assert est.stderr > 0 and est.within(0.5, 4), est
        est = mc_expected_ots(memorizer(0), pi, constant_family(pi), 4, samples=100_000, seed=12345)
        assert est.stderr > 0 and est.within(F(2401, 8192), 4), est


@pytest.mark.acceptance(8, "overlap rows are exactly affine in lambda")
def test_affine_in_lambda():
    with within(30):
        grid = [F(0), F(1, 4), F(1, 2), F(3, 4), F(1)]
        rows = sweep_overlap(memorizer(0), 4, 2, grid)
        r0, r1 = rows[0].value, rows[-1].value
        assert r0 == HALF
        for lam, row in zip(grid, rows):
            assert row.value == (1 - lam) * r0 + lam * r1


CONFIGS = {
    "verify": "[experiment]\ncommand = verify\nn = 5\nm = 2\nlearner = all\npi = dyadic\n",
    "sweep-n": "[experiment]\ncommand = sweep-n\nm = 4\n[sweep]\nn_values = 5..8\n",
    "sweep-overlap": "[experiment]\ncommand = sweep-overlap\nn = 4\nm = 2\n",
    "estimate": "[experiment]\ncommand = estimate\nn = 8\nm = 4\n[mc]\nseed = 42\nsamples = 5000\nworkers = 2\n",
}


@pytest.mark.acceptance(9, "identical configs give byte-identical CSV artifacts")
def test_reproducibility(tmp_path):
    for command, text in CONFIGS.items():
        cfg = tmp_path / f"{command}.cfg"
        cfg.write_text(text, encoding="utf-8")
        out = tmp_path / f"{command}.csv"
        assert main([command, "--config", str(cfg), "--output", str(out)]) == 0
        first = out.read_bytes()
        assert main([command, "--config", str(cfg), "--output", str(out)]) == 0
        assert out.read_bytes() == first, command
