import csv
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wavedecay.bounds import EPS, ONE, BoundExpr, DecayTerm, ExtRational, evaluate, u_term
from wavedecay.conversion import (ExteriorState, FinalBound, SourceBound, UnsupportedBranch,
                                  convert_cone, convert_interior, convert_min, exterior_integral,
                                  exterior_run, exterior_seed, exterior_step, fitted_slope, kappa,
                                  oracle_integral, oracle_rows, random_points, random_source,
                                  write_oracle_csv)

F = Fraction
X = ExtRational


def test_kappa_examples():
    assert kappa(2).kind == "One"
    assert kappa(1).kind == "Log"
    k = kappa(F(1, 2))
    assert k.kind == "Power" and k.exponent == X(F(1, 2))
    assert kappa(ONE + EPS).kind == "One"
    assert kappa(ONE - EPS).kind == "Power"


def test_kappa_trichotomy_lattice():
    for num in range(-36, 37):
        for q1 in range(-2, 3):
            lam = X(F(num, 12), q1)
            kind = kappa(lam).kind
            expected = "One" if lam > ONE else "Log" if lam == ONE else "Power"
            assert kind == expected


def test_interior_first_step():
    nu = F(1, 2)
    out = convert_interior(SourceBound(0, 2 + nu, 1, F(-1, 2)))
    assert all(t == u_term(F(1, 2) - nu) for t in out.terms())


def test_interior_log_case():
    nu = F(1, 2)
    out = convert_interior(SourceBound(0, 2 + nu, 1, 1))
    logs = [t for t in out.terms() if t.m == 1]
    assert logs == [DecayTerm(1, 0, 0, 1 + nu)]
    # the region-one minimum picks the (beta + eta + alpha - 3) branch
    assert out.groups[0] == (u_term(1 + nu),)


def test_interior_large_alpha_branch():
    nu, lam = F(1, 2), F(1, 2)
    out = convert_interior(SourceBound(0, 3 + nu, 0, 1 + lam * nu))
    assert out.groups[1] == (u_term(1 + nu),)
    assert out.groups[0] == (u_term(lam * nu),)


@pytest.mark.parametrize("alpha", [1, F(1, 2), 3, 0])
def test_branch_exclusion(alpha):
    with pytest.raises(UnsupportedBranch):
        convert_interior(SourceBound(0, alpha, 0, 0))


def test_alpha_three_plus_eps_accepted():
    out = convert_interior(SourceBound(0, X(3, 1), 0, 0))
    assert len(out.groups[0]) == 1


def test_source_validation():
    with pytest.raises(ValueError):
        SourceBound(0, 2, -1, 0)
    with pytest.raises(ValueError):
        SourceBound(-1, 2, 0, 0)


def test_convert_min_prefers_best_majorant():
    a = SourceBound(0, F(5, 2), 1, 0)
    b = SourceBound(0, F(7, 2), 1, 0)
    out = convert_min([a, b])
    for t, r in [(100, 50), (1000, 10)]:
        assert evaluate(out, t, r) <= min(evaluate(convert_interior(a), t, r),
                                          evaluate(convert_interior(b), t, r)) * (1 + 1e-12) * 2
    with pytest.raises(ValueError):
        convert_min([])


def test_cone_first_step():
    sigma = F(1, 4)
    out = convert_cone(SourceBound(0, 2 + sigma, 0, F(-1, 2)))
    assert out == BoundExpr.term(u_term(sigma - F(1, 2)))


def test_exterior_fast_path():
    path = exterior_run(F(4, 5))
    assert [s.phase for s in path[:-1]] == ["A", "B", "R"]
    assert path[2].c == X(F(11, 10))
    assert isinstance(path[-1], FinalBound) and path[-1].exponent == X(F(9, 5))
    assert path[0].reconstructed


def test_exterior_terminal_capped():
    out = exterior_step(ExteriorState("A", 4, X(F(3, 10))))
    assert out == FinalBound(X(F(13, 10)))


def test_exterior_rejects_nonpositive():
    with pytest.raises(ValueError):
        exterior_step(ExteriorState("A", 0, X(0)))


@pytest.mark.parametrize("a10", range(1, 21))
def test_exterior_termination_bound(a10):
    a = F(a10, 10)
    path = exterior_run(a)
    steps = len(path) - 1
    assert steps <= 2 * math.ceil(1 / a) + 2
    assert path[-1].exponent == X(1 + a)


def test_exterior_threshold_equality_takes_weaker_branch():
    # N a = 1 exactly: continue the cycle instead of terminating
    out = exterior_step(ExteriorState("A", 2, X(F(1, 2))))
    assert isinstance(out, ExteriorState) and out.phase == "B"


def test_exterior_quadrature_slope():
    a, N = 0.3, 4
    ts = np.geomspace(20, 400, 8)
    vals = [exterior_integral(1.5 + (N + 1) * a, N * a, t, 2 * t, resolution=100) for t in ts]
    assert fitted_slope(ts, vals) >= 1.3 - 0.05


def test_oracle_basic_ratio():
    src = SourceBound(0, F(5, 2), 1, F(1, 2))
    val = oracle_integral(src, 200, 60)
    sym = evaluate(convert_interior(src), 200, 60)
    assert 0 < val and 0 < val / sym < 50


def test_oracle_richardson():
    src = SourceBound(0, 10, 0, 0)
    a = oracle_integral(src, 50, 10, resolution=512)
    b = oracle_integral(src, 50, 10, resolution=1024)
    assert abs(a - b) <= 0.02 * b


def test_oracle_degenerate_and_errors():
    src = SourceBound(0, 2, 0, 0)
    assert oracle_integral(src, 10, 10) == 0.0
    with pytest.raises(ValueError):
        oracle_integral(src, 10, 3, resolution=256)
    with pytest.raises(ValueError):
        oracle_integral(src, 10, 11)


def test_oracle_matches_closed_form_flat_source():
    # alpha = 1 + 0 majorant with beta = eta = 0: int rho <rho>^-1 over D_tr, checked at 2x
    src = SourceBound(0, F(3, 2), 0, 0)
    a = oracle_integral(src, 300, 100, resolution=512)
    b = oracle_integral(src, 300, 100, resolution=2048)
    assert abs(a - b) <= 1e-3 * b


def test_oracle_csv(tmp_path):
    rng = np.random.default_rng(3)
    src = random_source(rng)
    rows = oracle_rows(src, random_points(rng, 3))
    path = tmp_path / "o.csv"
    write_oracle_csv(path, rows)
    with open(path) as fh:
        got = list(csv.reader(fh))
    assert got[0] == ["alpha", "beta", "eta", "m", "t", "r", "value"]
    assert len(got) == 4


@given(st.integers(0, 2**32 - 1))
def test_random_source_in_range(seed):
    s = random_source(np.random.default_rng(seed))
    a = s.alpha.standard
    assert (F(11, 10) <= a <= F(29, 10)) or (F(31, 10) <= a <= 6)
    assert 0 <= s.beta.standard <= 2 and -1 <= s.eta.standard <= 2
