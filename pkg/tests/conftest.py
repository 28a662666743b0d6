from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from wavedecay.bounds import DecayTerm, ExtRational

settings.register_profile("repo", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

small_fracs = st.fractions(min_value=-4, max_value=4, max_denominator=12)
ext_rationals = st.builds(ExtRational, small_fracs, st.fractions(min_value=-3, max_value=3,
                                                                 max_denominator=4))
nonneg = st.fractions(min_value=0, max_value=4, max_denominator=12)
decay_terms = st.builds(lambda m, a, b, e: DecayTerm(m, a, b, e), st.integers(0, 2),
                        nonneg.map(ExtRational), nonneg.map(ExtRational), small_fracs.map(ExtRational))


@pytest.fixture
def half():
    return Fraction(1, 2)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
