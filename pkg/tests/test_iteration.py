import json
import math
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from wavedecay.bounds import ONE, BoundExpr, DecayTerm, ExtRational, u_term
from wavedecay.iteration import (CoefficientProfile, iterate_cone, iterate_exterior,
                                 iterate_interior, predict, radial_to_temporal, replay)

F = Fraction
GRID = [F(1, 4), F(1, 2), F(3, 4), F(1), F(3, 2), F(2), F(3)]


def test_radial_to_temporal_examples():
    x = BoundExpr.term(DecayTerm(0, F(1, 2), 1, 0))
    assert radial_to_temporal(x) == BoundExpr.term(DecayTerm(0, 0, F(3, 2), 0))
    y = BoundExpr.term(DecayTerm(0, 0, 2, 0))
    assert radial_to_temporal(y) == y
    eta = F(7, 5)
    z = BoundExpr.sum_of([DecayTerm(0, 1, 1, eta), DecayTerm(0, F(1, 2), 2, 0)])
    assert radial_to_temporal(z) == BoundExpr.sum_of([DecayTerm(0, 0, 2, eta),
                                                      DecayTerm(0, 0, F(5, 2), 0)])
    with pytest.raises(ValueError):
        radial_to_temporal(BoundExpr.term(DecayTerm(0, F(3, 2), 0, 0)))


@given(st.fractions(-3, 1, max_denominator=16), st.fractions(0, 4, max_denominator=16),
       st.fractions(-3, 3, max_denominator=16), st.integers(0, 2), st.integers(-2, 2))
def test_radial_to_temporal_termwise(p, q, eta, m, q1):
    term = DecayTerm(m, ExtRational(p, q1), q, eta)
    out = radial_to_temporal(BoundExpr.term(term))
    (t,), = out.groups
    assert t.alpha == ExtRational(0) and t.beta == ExtRational(p + q, q1)
    assert t.eta == term.eta and t.m == m


def test_profile_validation():
    with pytest.raises(ValueError, match="0<σ,δ<∞"):
        CoefficientProfile(F(1), F(-1))
    with pytest.raises(ValueError):
        CoefficientProfile(None, None)
    with pytest.raises(ValueError):
        CoefficientProfile(F(1), F(1), part=3)


def test_interior_first_step_and_threshold():
    trace, bound = iterate_interior(CoefficientProfile(F(10), F(1, 2)))
    assert "n'=0" in trace[0].note
    first = next(s for s in trace if s.op == "convert_interior")
    assert {t.eta for t in first.output.terms()} == {ExtRational(0)}
    logs = [s for s in trace if s.op == "absorb_log"]
    assert logs, "the critical log case must be absorbed"
    assert bound == BoundExpr.term(DecayTerm(0, 1, 0, F(3, 2)))


def test_interior_part_two():
    trace, bound = iterate_interior(CoefficientProfile(F(1), F(5), part=2))
    assert bound.groups[0][0].eta.standard == 3
    assert "n''=2" in trace[0].note


@pytest.mark.parametrize("part,expected", [(1, F(5, 4)), (2, F(9, 4))])
def test_cone_channel(part, expected):
    trace, bound = iterate_cone(CoefficientProfile(F(1, 4), F(2), part=part))
    assert bound.groups[0][0].eta.standard == expected
    first = next(s for s in trace if s.op == "convert_cone")
    if part == 1:
        assert first.output == BoundExpr.term(u_term(F(1, 4) - F(1, 2)))


@pytest.mark.parametrize("sigma,delta,part,expected", [
    (F(2, 5), F(3, 10), 1, F(13, 10)),
    (F(1), F(5), 2, F(3)),
    (F(1, 100), F(10), 2, F(201, 100)),
])
def test_predict_examples(sigma, delta, part, expected):
    rep = predict(CoefficientProfile(sigma, delta, part))
    assert rep.theorem_exponent == expected
    assert not rep.discrepancies
    (term,), = rep.final.groups
    assert term.beta == ONE and term.eta.standard == expected


def test_sweep_exact():
    for s, d, part in product(GRID, GRID, (1, 2)):
        rep = predict(CoefficientProfile(s, d, part))
        expected = 1 + (min(s, d) if part == 1 else min(1 + s, d))
        assert rep.theorem_exponent == expected and isinstance(rep.theorem_exponent, Fraction)


def test_monotone():
    for part in (1, 2):
        table = {(s, d): predict(CoefficientProfile(s, d, part)).theorem_exponent
                 for s in GRID for d in GRID}
        for (s, d), e in table.items():
            for s2 in GRID:
                if s2 > s:
                    assert table[(s2, d)] >= e
            if part == 2:
                assert e >= predict(CoefficientProfile(s, d, 1)).theorem_exponent


@pytest.mark.parametrize("s,d", [(F(1, 4), F(3)), (F(3, 4), F(1, 2)), (F(2), F(1))])
def test_trace_replay(s, d):
    for part in (1, 2):
        rep = predict(CoefficientProfile(s, d, part))
        for step in rep.trace:
            assert replay(step) == step.output


@pytest.mark.parametrize("s,d", list(product(GRID, GRID))[::5] + [(F(1, 100), F(1, 100))])
def test_termination_bound(s, d):
    for part in (1, 2):
        rep = predict(CoefficientProfile(s, d, part))
        steps = {(t.channel, t.step) for t in rep.trace if t.step > 0}
        assert len(steps) <= 4 * math.ceil(3 / min(s, d, 1)) + 12


def test_disabled_coefficients():
    rep = predict(CoefficientProfile(None, F(1, 2)))
    assert rep.theorem_exponent == F(3, 2)
    assert "cone" not in rep.channel_bounds
    rep = predict(CoefficientProfile(F(1, 100), None, part=2))
    assert rep.theorem_exponent == F(201, 100)


def test_exterior_channel_flags_seed():
    trace, _ = iterate_exterior(CoefficientProfile(F(1), F(1, 2)))
    assert "reconstructed" in trace[0].note


def test_report_json():
    rep = predict(CoefficientProfile(F(1), F(5), part=2))
    d = json.loads(rep.dumps())
    assert d["theorem_exponent"] == "3"
    assert d["local_decay_exponent"] == "4"
    assert d["trace"][0]["op"] == "seed"
    assert "config" not in d
    assert "interior" in rep.step_table()
