import random
import sys
from fractions import Fraction as F

import pytest

from semistatic.exact_lp import add_observer, remove_observer, verify_certificate
from semistatic.generator import random_instance
from semistatic.market_tree import FIXTURE_NAMES, fixture


def suite(n=50, seed=0):
    """Deterministic batch of random NA-passing instances."""
    rng = random.Random(seed)
    return [random_instance(rng) for _ in range(n)]


def fixtures():
    return [fixture(name) for name in FIXTURE_NAMES]


class CertificateAudit:
    """Checks every LP solved while active."""

    def __init__(self):
        self.solves = 0
        self.failures = []

    def __call__(self, lp, sol):
        self.solves += 1
        if not verify_certificate(lp, sol):
            self.failures.append((lp.name, sol.status))

    def __enter__(self):
        add_observer(self)
        return self

    def __exit__(self, *exc):
        remove_observer(self)


SESSION_AUDIT = CertificateAudit()


@pytest.fixture(scope="session", autouse=True)
def certify_every_solve():
    """Every LP solved anywhere in the test session must self-certify."""
    with SESSION_AUDIT:
        yield SESSION_AUDIT
    assert not SESSION_AUDIT.failures, SESSION_AUDIT.failures


@pytest.fixture
def gap():
    return fixture("INST_GAP")


@pytest.fixture
def binom():
    return fixture("INST_BIN")


@pytest.fixture
def single():
    return fixture("INST_SINGLE")


@pytest.fixture
def zero():
    return fixture("INST_ZERO")


def frac(*xs):
    return tuple(F(x) for x in xs)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "_RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n][1])
    a = SESSION_AUDIT
    terminalreporter.write_line(
        f"certificate audit: {a.solves - len(a.failures)}/{a.solves} LP solves verified")
