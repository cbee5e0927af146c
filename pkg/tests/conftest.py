from fractions import Fraction

import pytest
from hypothesis import strategies as st

from otslab.domain import Distribution, enumerate_target_functions, enumerate_training_sequences
from otslab.learners import zoo
from otslab.ots import ots_error


def naive_expected(learner, pi, family, m):
    """Textbook triple sum with per-pair Fractions; shares no code with the engines."""
    n = pi.n
    total = Fraction(0)
    for f in enumerate_target_functions(n):
        for d, p in enumerate_training_sequences(n, pi, m, f):
            total += p * ots_error(learner(d, n), f, family(d))
    return total / 2**n


def memorizer_closed_form(pi, pibar, m):
    """A memorizer errs only on unseen points, where it is wrong half the time."""
    return sum((Fraction(1, 2) * q * (1 - p) ** m for p, q in zip(pi, pibar)), Fraction(0))


def full_support(n, max_weight=6):
    return st.lists(st.integers(1, max_weight), min_size=n, max_size=n).map(
        lambda ws: Distribution(tuple(Fraction(w, sum(ws)) for w in ws))
    )


def any_support(n, max_weight=6):
    return (
        st.lists(st.integers(0, max_weight), min_size=n, max_size=n)
        .filter(any)
        .map(lambda ws: Distribution(tuple(Fraction(w, sum(ws)) for w in ws)))
    )


@pytest.fixture(params=zoo(), ids=lambda l: l.spec)
def learner(request):
    return request.param


_acceptance_lines = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    status = "PASS" if report.passed else "FAIL"
    _acceptance_lines.append((number, f"[{status}] criterion {number}: {title} ({report.duration:.1f}s)"))


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_acceptance_lines):
            terminalreporter.write_line(line)
