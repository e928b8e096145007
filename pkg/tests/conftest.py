import sys
import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from sibtool.structure import Signature, Structure

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SIGS = [
    Signature([("E", 2)]),
    Signature([("E", 2), ("P", 1)]),
    Signature([("E", 2), ("F", 2)]),
]


@st.composite
def structures(draw, max_n=5, sigs=SIGS):
    sig = draw(st.sampled_from(sigs))
    n = draw(st.integers(0, max_n))
    facts = set()
    if n:
        for name, ar in sig:
            tup = st.tuples(*[st.integers(0, n - 1)] * ar)
            facts |= {(name, t) for t in draw(st.lists(tup, max_size=3 * n))}
    return Structure(sig, n, facts)


@pytest.fixture
def rng():
    return random.Random(20241016)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
