"""One-dimensional reduction: from a source majorant to a pointwise bound.

For a radial solution of ``box psi = g`` with vanishing data,
``r psi(t, r) <= 1/2 * int_{D_tr} rho |g| ds drho``.  The symbolic side turns a
majorant ``ln^m<s-rho> <rho>^-alpha <s>^-beta <s-rho>^-eta`` into a bound on
``<r> psi`` in ``<t-r>``; :func:`oracle_integral` evaluates the same integral
by quadrature.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .bounds import (EPS, ONE, ZERO, BoundExpr, DecayTerm, ExtRational,
                     KappaSymbol, ext, normalize, u_term)

MIN_RESOLUTION = 512


class UnsupportedBranch(ValueError):
    """Exponent outside the cases the conversion rules cover."""


@dataclass(frozen=True)
class SourceBound:
    m: int
    alpha: ExtRational
    beta: ExtRational
    eta: ExtRational

    def __post_init__(self):
        for name in ("alpha", "beta", "eta"):
            object.__setattr__(self, name, ExtRational.of(getattr(self, name)))
        if self.m < 0:
            raise ValueError("log power must be nonnegative")
        if self.beta.q0 < 0:
            raise ValueError("beta must be nonnegative")

    def as_tuple(self, eps_value=0.0):
        return (self.m, self.alpha.value(eps_value), self.beta.value(eps_value),
                self.eta.value(eps_value))

    def to_json(self):
        return {"m": self.m, "alpha": self.alpha.to_json(), "beta": self.beta.to_json(),
                "eta": self.eta.to_json()}


def kappa(lam) -> KappaSymbol:
    lam = ExtRational.of(lam)
    if lam > ONE:
        return KappaSymbol("One")
    if lam == ONE:
        return KappaSymbol("Log")
    return KappaSymbol("Power", ONE - lam)


def _check_alpha(alpha: ExtRational):
    if alpha <= ONE:
        raise UnsupportedBranch(f"alpha={alpha} <= 1 is not covered")
    if alpha == ExtRational(3):
        raise UnsupportedBranch("alpha=3 is not covered; perturb by eps")


def region_one_terms(src: SourceBound) -> list[DecayTerm]:
    """Candidate bounds for the dyadic radii R < (t-r)/8."""
    _check_alpha(src.alpha)
    a, b, e, m = src.alpha, src.beta, src.eta, src.m
    out = [kappa(a - 1).apply(u_term(b + e - 1, m))]
    if a < ExtRational(3):
        out.append(u_term(b + e + a - 3, m))
    return out


def region_two_term(src: SourceBound) -> DecayTerm:
    """Bound for the dyadic radii (t-r)/8 <= R < t."""
    _check_alpha(src.alpha)
    return kappa(src.eta).apply(u_term(src.alpha + src.beta - 2, src.m))


def convert_interior(src: SourceBound) -> BoundExpr:
    """Bound on ``<r> psi`` for ``r <= t`` (log factors of the source carried along)."""
    return normalize(BoundExpr((tuple(region_one_terms(src)), (region_two_term(src),))))


def convert_min(sources: Sequence[SourceBound]) -> BoundExpr:
    """Conversion of a source bounded by the minimum of several majorants.

    Each dyadic region may use whichever majorant is best there.
    """
    if not sources:
        raise ValueError("need at least one source")
    r1 = [t for s in sources for t in region_one_terms(s)]
    r2 = [region_two_term(s) for s in sources]
    return normalize(BoundExpr((tuple(r1), tuple(r2))))


def convert_cone(src: SourceBound) -> BoundExpr:
    """Bound on ``<r> d_t v`` for a source supported near the cone.

    The support has ``rho ~ <t-r>`` and ``|s-rho| <~ <t-r>``; ``alpha`` is the
    total ``rho`` decay including the measure, and one ``<t-r>`` is gained from
    the time antiderivative.  Result: ``kappa(eta) <t-r>^-(alpha-1)``.
    """
    return normalize(BoundExpr.term(kappa(src.eta).apply(u_term(src.alpha - 1 + src.beta, src.m))))


# ---------------------------------------------------------------- exterior


@dataclass(frozen=True)
class ExteriorState:
    """Bound on the potential component for r > t.

    A(N): ``<r>^-(1/2+Na) <t-r>^-Na``;  B(N): ``<t-r>^-1/2 <r>^-Na <t-r>^-(N+1)a``;
    R(c): ``<r>^-1 <t-r>^-c`` (radial power already spent).
    """

    phase: str
    N: int
    a: ExtRational
    c: ExtRational | None = None
    reconstructed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "a", ExtRational.of(self.a))
        if self.phase not in ("A", "B", "R"):
            raise ValueError(self.phase)
        if (self.phase == "R") != (self.c is not None):
            raise ValueError("c present iff phase R")

    def bound(self) -> BoundExpr:
        a, N = self.a, self.N
        if self.phase == "A":
            return BoundExpr.term(DecayTerm(0, Fraction(1, 2) + a * N, ZERO, a * N))
        if self.phase == "B":
            return BoundExpr.term(DecayTerm(0, a * N, ZERO, Fraction(1, 2) + a * (N + 1)))
        return BoundExpr.term(DecayTerm(0, ONE, ZERO, self.c))


@dataclass(frozen=True)
class FinalBound:
    exponent: ExtRational

    def bound(self) -> BoundExpr:
        return BoundExpr.term(DecayTerm(0, ONE, ZERO, self.exponent))


def exterior_seed(a) -> ExteriorState:
    """``<u>^1/2/<v> <= <r>^-1/2`` for r > t, i.e. phase A with N = 0."""
    return ExteriorState("A", 0, ExtRational.of(a), reconstructed=True)


def _above_one(x: ExtRational) -> bool:
    # equality resolves to the weaker branch
    return x - EPS > ONE


def exterior_step(state: ExteriorState):
    a = state.a
    if a.q0 <= 0:
        raise ValueError("exterior iteration needs a > 0")
    cap = ONE + a
    half = ExtRational(Fraction(1, 2))
    if state.phase == "A":
        N = state.N
        if _above_one(a * N):
            return _terminal(-half + a * (2 * N + 1), a)
        return ExteriorState("B", N, a)
    if state.phase == "B":
        N = state.N
        if _above_one(half + a * (N + 1)):
            return _terminal(-half + a * (2 * (N + 1)), a)
        return ExteriorState("A", N + 1, a)
    c_next = state.c + a
    if c_next >= cap:
        return FinalBound(cap)
    return ExteriorState("R", 0, a, c=c_next)


def _terminal(c: ExtRational, a: ExtRational):
    if c >= ONE + a:
        return FinalBound(ONE + a)
    return ExteriorState("R", 0, a, c=c)


def exterior_run(a, max_steps: int = 10_000):
    """Iterate from the seed; returns the list of visited states ending in a FinalBound."""
    state = exterior_seed(a)
    path = [state]
    for _ in range(max_steps):
        state = exterior_step(state)
        path.append(state)
        if isinstance(state, FinalBound):
            return path
    raise RuntimeError("exterior iteration did not terminate")


# ------------------------------------------------------------------ oracle


def _mapped_midpoints(lo, hi, n):
    """Midpoint nodes and weights in asinh coordinates on ``[lo, hi]``, ``lo >= 0``.

    Scalar bounds give nodes of shape ``(n,)``, bounds of shape ``(k,)`` give ``(k, n)``.
    """
    xa = np.arcsinh(np.asarray(lo, float))[..., None]
    xb = np.arcsinh(np.asarray(hi, float))[..., None]
    dx = np.maximum(xb - xa, 0.0) / n
    x = xa + (np.arange(n) + 0.5) * dx
    return np.sinh(x), np.cosh(x) * dx


def _majorant(src_vals, rho, s):
    m, alpha, beta, eta = src_vals
    v = np.hypot(1.0, s - rho)
    out = np.hypot(1.0, rho) ** (-alpha) * np.hypot(1.0, s) ** (-beta) * v ** (-eta)
    if m:
        out = out * np.log(v) ** m
    return out


def oracle_integral(src: SourceBound, t: float, r: float, eps_value: float = 1e-3,
                    resolution: int = MIN_RESOLUTION) -> float:
    """Quadrature of ``int_{D_tr} rho g(rho, s) ds drho``.

    Midpoint rule in asinh-mapped ``rho`` (split at the slice kinks ``r`` and
    ``(t-r)/2``) and, per ``rho``, in asinh-mapped ``s - rho`` over the exact slice.
    """
    if resolution < MIN_RESOLUTION:
        raise ValueError(f"resolution must be >= {MIN_RESOLUTION}")
    if not (0 <= r <= t):
        raise ValueError("need 0 <= r <= t")
    u = t - r
    if u <= 0:
        return 0.0
    vals = src.as_tuple(eps_value)
    rho_max = (t + r) / 2
    cuts = sorted({0.0, rho_max, *(c for c in (r, u / 2) if 0 < c < rho_max)})
    pieces = list(zip(cuts[:-1], cuts[1:]))
    total = 0.0
    for lo, hi in pieces:
        n = max(8, resolution // len(pieces))
        rho, wr = _mapped_midpoints(lo, hi, n)
        ups, ws = _mapped_midpoints(np.maximum(0.0, u - 2 * rho),
                                    np.minimum(u, t + r - 2 * rho), resolution)
        s = rho[:, None] + ups
        integrand = rho[:, None] * _majorant(vals, rho[:, None], s)
        row = np.sum(integrand * ws, axis=1)
        total += float(np.sum(row * wr))
    return total


def oracle_rows(src: SourceBound, points, eps_value=1e-3, resolution=MIN_RESOLUTION):
    """CSV-ready rows ``(alpha, beta, eta, m, t, r, value)``."""
    m, alpha, beta, eta = src.as_tuple(eps_value)
    return [(alpha, beta, eta, m, t, r, oracle_integral(src, t, r, eps_value, resolution))
            for t, r in points]


def write_oracle_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "beta", "eta", "m", "t", "r", "value"])
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])


def exterior_integral(alpha: float, eta: float, t: float, r: float,
                      resolution: int = MIN_RESOLUTION) -> float:
    """Integral over the backward light cone of an exterior point ``(t, r)``, ``r > t``.

    Integrand ``<rho>^-alpha <rho-s>^-eta``; domain ``0 <= s <= t``,
    ``r - t + s <= rho <= r + t - s``.  Used to check exterior rates by quadrature.
    """
    if r <= t:
        raise ValueError("exterior integral needs r > t")
    s_mid = (np.arange(resolution) + 0.5) * (t / resolution)
    ds = t / resolution
    lo = r - t + s_mid
    hi = r + t - s_mid
    rho, wr = _mapped_midpoints(lo, hi, resolution)
    vals = np.hypot(1.0, rho) ** (-alpha) * np.hypot(1.0, rho - s_mid[:, None]) ** (-eta)
    return float(np.sum(vals * wr) * ds)


def fitted_slope(xs, ys) -> float:
    """Least-squares slope of ``-log y`` against ``log <x>``."""
    lx = np.log(np.hypot(1.0, np.asarray(xs, float)))
    ly = np.log(np.asarray(ys, float))
    return float(-np.polyfit(lx, ly, 1)[0])


def random_source(rng) -> SourceBound:
    """Source with two-decimal exponents: alpha in (1.1, 2.9) or (3.1, 6), beta in [0, 2], eta in [-1, 2]."""
    def pick(lo, hi):
        return Fraction(int(rng.integers(round(lo * 100), round(hi * 100) + 1)), 100)
    alpha = pick(1.1, 2.9) if rng.random() < 0.5 else pick(3.1, 6)
    return SourceBound(int(rng.integers(0, 2)), alpha, pick(0, 2), pick(-1, 2))


def random_points(rng, n, t_lo=50.0, t_hi=800.0):
    """``n`` points with ``t`` log-uniform in ``[t_lo, t_hi]`` and ``0 <= r < t``."""
    t = np.exp(rng.uniform(np.log(t_lo), np.log(t_hi), n))
    r = rng.uniform(0, 1, n) * t
    return list(zip(t.tolist(), r.tolist()))
