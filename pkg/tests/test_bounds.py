import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import decay_terms, ext_rationals
from wavedecay.bounds import (EPS, ONE, ZERO, BoundExpr, DecayTerm, ExtRational, KappaSymbol,
                              absorb_log, absorb_threshold, combine, evaluate, ext_max, ext_min,
                              leading_u_exponent, log_absorb_threshold, log_evaluate, normalize,
                              u_term)

F = Fraction


def test_lexicographic_order():
    assert ExtRational(1) < ExtRational(1, 1)
    assert ExtRational(1, -5) < ExtRational(1)
    assert ExtRational(F(999, 1000), 100) < ExtRational(1, -100)
    assert ONE - EPS < ONE < ONE + EPS


@given(ext_rationals, ext_rationals)
def test_trichotomy_and_minmax(a, b):
    assert sum([a < b, a == b, a > b]) == 1
    assert ext_min(a, b) + ext_max(a, b) == a + b


@given(ext_rationals, ext_rationals, ext_rationals)
def test_order_transitive_and_translation_invariant(a, b, c):
    if a < b and b < c:
        assert a < c
    assert (a < b) == (a + c < b + c)


def test_arithmetic_and_scaling():
    x = ExtRational(F(3, 2), -1)
    assert x + x == ExtRational(3, -2)
    assert x * 2 == x + x
    assert -x == ExtRational(F(-3, 2), 1)
    assert 1 - x == ExtRational(F(-1, 2), 1)
    assert x.standard == F(3, 2) and not x.is_standard()


@given(ext_rationals)
def test_json_round_trip(x):
    assert ExtRational.from_json(json.loads(json.dumps(x.to_json()))) == x


def test_str():
    assert str(ExtRational(F(3, 2), -1)) == "3/2-eps"
    assert str(ExtRational(1, 2)) == "1+2*eps"
    assert str(ExtRational(2)) == "2"


def test_surely_nonnegative_respects_eps_cap():
    assert ExtRational(0, 1).surely_nonnegative()
    assert not ExtRational(0, -1).surely_nonnegative()
    assert ExtRational(F(1, 100), -1).surely_nonnegative()
    assert not ExtRational(F(1, 200), -1).surely_nonnegative()


def test_evaluate_examples():
    on_cone = BoundExpr.term(DecayTerm(0, 0, 0, 1))
    assert evaluate(on_cone, 5, 5) == pytest.approx(1.0)
    log_at_origin = BoundExpr.term(DecayTerm(1, 1, 0, 0))
    assert evaluate(log_at_origin, 0, 0) == 0.0
    radial = BoundExpr.term(DecayTerm(0, 2, 0, 0))
    assert evaluate(radial, 0, math.sqrt(3)) == pytest.approx(0.25, rel=1e-14)


def test_evaluate_rejects_bad_eps():
    with pytest.raises(ValueError):
        evaluate(BoundExpr.term(u_term(1)), 3, 1, eps_value=0.5)


@given(decay_terms, st.floats(0, 1e4), st.floats(0, 1))
def test_terms_positive_and_finite(term, t, frac):
    r = frac * t
    v = term.evaluate(t, r, 1e-3)
    assert np.isfinite(v)
    if term.m == 0 or t - r > 1e-6:
        assert v > 0 or t - r < 1e-3


def test_bound_expr_needs_groups():
    with pytest.raises(ValueError):
        BoundExpr(())
    with pytest.raises(ValueError):
        BoundExpr(((),))


def test_canonical_json():
    x = BoundExpr.term(DecayTerm(0, 1, 1, ExtRational(F(3, 2), -1)))
    assert x.dumps() == ('{"sum":[{"min":[{"alpha":[1,0],"beta":[1,0],'
                         '"eta":["3/2",-1],"m":0}]}]}')
    assert BoundExpr.from_json(x.dumps()) == x


def test_combine_min_dominance():
    a = F(1, 4)
    e1 = BoundExpr.term(u_term(F(1, 2) + 2 * a))
    e2 = BoundExpr.term(u_term(1 + a))
    # <u>^-1 against <u>^-5/4: the second is smaller for every u >= 1
    out = combine("min", [e1, e2])
    assert out == BoundExpr.term(u_term(F(5, 4)))
    assert combine("min", [BoundExpr.term(u_term(2)), BoundExpr.term(u_term(1))]) == \
        BoundExpr.term(u_term(2))


def test_combine_min_keeps_incomparable():
    p = BoundExpr.term(DecayTerm(0, 1, 0, F(1, 2)))
    q = BoundExpr.term(u_term(F(5, 4)))
    out = combine("min", [p, q])
    assert len(out.groups) == 1 and len(out.groups[0]) == 2


def test_combine_sum_doubles():
    x = BoundExpr((( u_term(1), DecayTerm(0, 1, 0, 0)), (u_term(2),)))
    s = combine("sum", [x, x])
    for t, r in [(3, 1), (50, 10), (1000, 999)]:
        assert evaluate(s, t, r) == pytest.approx(2 * evaluate(x, t, r), rel=1e-14)


def test_combine_errors():
    with pytest.raises(ValueError):
        combine("sum", [])
    with pytest.raises(ValueError):
        combine("max", [BoundExpr.term(u_term(1))])


@given(st.lists(st.lists(decay_terms, min_size=1, max_size=3), min_size=1, max_size=3))
@settings(max_examples=200)
def test_normalization_sound(groups):
    raw = BoundExpr(tuple(tuple(g) for g in groups))
    norm = normalize(raw)
    rng = np.random.default_rng(len(str(raw)))
    t = rng.uniform(2, 1e4, 100)
    r = rng.uniform(0, 1, 100) * (t - 1)
    a, b = evaluate(raw, t, r), evaluate(norm, t, r)
    assert np.all(b <= a * (1 + 1e-12))
    # only never-minimal terms are removed, so the value is unchanged
    assert np.allclose(a, b, rtol=1e-12, atol=0)


def test_absorb_log_examples():
    nu = F(1, 2)
    x = BoundExpr.term(DecayTerm(1, 0, 0, 1 + nu))
    assert absorb_log(x) == BoundExpr.term(u_term(ExtRational(1 + nu, -1)))
    y = BoundExpr.term(u_term(2))
    assert absorb_log(y) == y
    z = BoundExpr.term(DecayTerm(2, 0, 0, 1))
    assert absorb_log(z) == BoundExpr.term(u_term(ExtRational(1, -2)))


@pytest.mark.parametrize("eps", [1e-2, 5e-3, 1e-3])
def test_absorb_log_dominates_beyond_threshold(eps):
    x = BoundExpr((( DecayTerm(1, 0, 0, F(3, 2)),), (DecayTerm(2, 1, 0, 1),)))
    y = absorb_log(x)
    L0 = log_absorb_threshold(eps)
    # compare in log space past the crossing of x^eps and ln x
    for k in (1.0, 1.5, 3.0):
        lu = L0 * k
        u = math.exp(min(lu, 700))
        if lu > 700:
            break
        assert log_evaluate(y, u + 1, 1.0, eps) >= log_evaluate(x, u + 1, 1.0, eps) - 1e-9
    assert absorb_threshold(1e-2) == pytest.approx(math.exp(log_absorb_threshold(1e-2)))


def test_absorb_threshold_is_the_crossing():
    eps = 0.01
    z = log_absorb_threshold(eps)
    assert math.exp(eps * z) == pytest.approx(z, rel=1e-10)


def test_kappa_symbol_apply():
    t = u_term(2)
    assert KappaSymbol("One").apply(t) == t
    assert KappaSymbol("Log").apply(t).m == 1
    assert KappaSymbol("Power", F(1, 2)).apply(t).eta == ExtRational(F(3, 2))
    with pytest.raises(ValueError):
        KappaSymbol("Power")


def test_leading_exponent():
    x = BoundExpr(((u_term(2), u_term(3)), (DecayTerm(1, 0, 0, F(3, 2)),), (u_term(F(3, 2)),)))
    assert leading_u_exponent(x) == (ExtRational(F(3, 2)), 1)
