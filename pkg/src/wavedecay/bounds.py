"""Exact exponent arithmetic and symbolic pointwise bounds.

A bound is a sum of min-groups of decay terms

    ln^m<t-r> * <r>^-alpha * <t+r>^-beta * <t-r>^-eta

with <x> = (1 + x^2)^(1/2).  Exponents live in :class:`ExtRational`, rationals
extended by one formal positive infinitesimal ``eps``; "1-" style exponents are
written ``1 - eps``.
"""
from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.special import lambertw

RationalLike = Union[int, Fraction, str]

# eps is instantiated numerically only inside (0, EPS_MAX]
EPS_MAX = Fraction(1, 100)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**9)
    return Fraction(x)


@functools.total_ordering
@dataclass(frozen=True)
class ExtRational:
    """Number ``q0 + q1*eps`` ordered lexicographically."""

    q0: Fraction
    q1: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "q0", _frac(self.q0))
        object.__setattr__(self, "q1", _frac(self.q1))

    @classmethod
    def of(cls, x) -> "ExtRational":
        if isinstance(x, ExtRational):
            return x
        return cls(_frac(x))

    @property
    def standard(self) -> Fraction:
        return self.q0

    def is_standard(self) -> bool:
        return self.q1 == 0

    def __add__(self, other):
        o = ExtRational.of(other)
        return ExtRational(self.q0 + o.q0, self.q1 + o.q1)

    __radd__ = __add__

    def __sub__(self, other):
        o = ExtRational.of(other)
        return ExtRational(self.q0 - o.q0, self.q1 - o.q1)

    def __rsub__(self, other):
        return ExtRational.of(other) - self

    def __neg__(self):
        return ExtRational(-self.q0, -self.q1)

    def __mul__(self, k):
        if isinstance(k, ExtRational):
            if k.q1 != 0 and self.q1 != 0:
                raise TypeError("product of two infinitesimal parts is not representable")
            return ExtRational(self.q0 * k.q0, self.q0 * k.q1 + self.q1 * k.q0)
        k = _frac(k)
        return ExtRational(self.q0 * k, self.q1 * k)

    __rmul__ = __mul__

    def _key(self):
        return (self.q0, self.q1)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ExtRational(other)
        if not isinstance(other, ExtRational):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __lt__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ExtRational(other)
        if not isinstance(other, ExtRational):
            return NotImplemented
        return self._key() < other._key()

    def value(self, eps_value: float) -> float:
        return float(self.q0) + float(self.q1) * eps_value

    def surely_nonnegative(self) -> bool:
        """True when ``q0 + q1*e >= 0`` for every ``e`` in ``(0, EPS_MAX]``."""
        return self.q0 >= 0 and self.q0 + self.q1 * EPS_MAX >= 0

    def to_json(self):
        return [_rat_json(self.q0), _rat_json(self.q1)]

    @classmethod
    def from_json(cls, obj) -> "ExtRational":
        if isinstance(obj, (list, tuple)):
            q0, q1 = obj
            return cls(Fraction(str(q0)), Fraction(str(q1)))
        return cls(Fraction(str(obj)))

    def __str__(self):
        if self.q1 == 0:
            return str(self.q0)
        sign = "+" if self.q1 > 0 else "-"
        coef = abs(self.q1)
        c = "" if coef == 1 else f"{coef}*"
        return f"{self.q0}{sign}{c}eps"

    def __repr__(self):
        return f"ExtRational({self})"


EPS = ExtRational(0, 1)
ZERO = ExtRational(0)
ONE = ExtRational(1)


def ext(x, eps_coef=0) -> ExtRational:
    return ExtRational(_frac(x), _frac(eps_coef))


def ext_min(*xs) -> ExtRational:
    return min(ExtRational.of(x) for x in xs)


def ext_max(*xs) -> ExtRational:
    return max(ExtRational.of(x) for x in xs)


def _rat_json(q: Fraction):
    return q.numerator if q.denominator == 1 else str(q)


def jbracket(x):
    """``<x> = (1 + x^2)^(1/2)``, overflow safe."""
    return np.hypot(1.0, x)


@dataclass(frozen=True)
class DecayTerm:
    """``ln^m<t-r> <r>^-alpha <t+r>^-beta <t-r>^-eta``."""

    m: int = 0
    alpha: ExtRational = ZERO
    beta: ExtRational = ZERO
    eta: ExtRational = ZERO

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("log power must be nonnegative")
        for name in ("alpha", "beta", "eta"):
            object.__setattr__(self, name, ExtRational.of(getattr(self, name)))

    def log_value(self, t, r, eps_value):
        u = jbracket(np.subtract(t, r))
        out = -self.alpha.value(eps_value) * np.log(jbracket(r))
        out = out - self.beta.value(eps_value) * np.log(jbracket(np.add(t, r)))
        out = out - self.eta.value(eps_value) * np.log(u)
        if self.m:
            with np.errstate(divide="ignore"):
                out = out + self.m * np.log(np.log(u))
        return out

    def evaluate(self, t, r, eps_value):
        return np.exp(self.log_value(t, r, eps_value))

    def surely_le(self, other: "DecayTerm") -> bool:
        """Pointwise ``self <= other`` for all t-r >= 1, r >= 0 and admissible eps.

        Every bracket is >= 1 there, so nonnegative exponent gaps suffice; log
        powers must agree since ln<t-r> < 1 near the cone.
        """
        if self.m != other.m:
            return False
        da = self.alpha - other.alpha
        db = self.beta - other.beta
        de = self.eta - other.eta
        return da.surely_nonnegative() and db.surely_nonnegative() and de.surely_nonnegative()

    def to_json(self):
        return {"m": self.m, "alpha": self.alpha.to_json(),
                "beta": self.beta.to_json(), "eta": self.eta.to_json()}

    @classmethod
    def from_json(cls, obj) -> "DecayTerm":
        return cls(int(obj.get("m", 0)), ExtRational.from_json(obj.get("alpha", 0)),
                   ExtRational.from_json(obj.get("beta", 0)),
                   ExtRational.from_json(obj.get("eta", 0)))

    def __str__(self):
        parts = []
        if self.m:
            parts.append("ln<u>" + (f"^{self.m}" if self.m > 1 else ""))
        for sym, e in (("<r>", self.alpha), ("<v>", self.beta), ("<u>", self.eta)):
            if e != ZERO:
                parts.append(f"{sym}^-({e})")
        return "*".join(parts) or "1"


def u_term(eta, m=0) -> DecayTerm:
    """Term depending on <t-r> only."""
    return DecayTerm(m, ZERO, ZERO, ExtRational.of(eta))


@dataclass(frozen=True)
class BoundExpr:
    """Sum over groups of the minimum over each group's terms."""

    groups: tuple = field(default_factory=tuple)

    def __post_init__(self):
        groups = tuple(tuple(g) for g in self.groups)
        if not groups or any(len(g) == 0 for g in groups):
            raise ValueError("BoundExpr needs nonempty groups")
        object.__setattr__(self, "groups", groups)

    @classmethod
    def term(cls, term: DecayTerm) -> "BoundExpr":
        return cls(((term,),))

    @classmethod
    def sum_of(cls, terms: Iterable[DecayTerm]) -> "BoundExpr":
        return cls(tuple((t,) for t in terms))

    @classmethod
    def min_of(cls, terms: Iterable[DecayTerm]) -> "BoundExpr":
        return cls((tuple(terms),))

    def terms(self):
        for g in self.groups:
            yield from g

    def evaluate(self, t, r, eps_value=1e-3):
        return evaluate(self, t, r, eps_value)

    def to_json(self):
        return {"sum": [{"min": [t.to_json() for t in g]} for g in self.groups]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"), sort_keys=True)

    @classmethod
    def from_json(cls, obj) -> "BoundExpr":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(tuple(tuple(DecayTerm.from_json(t) for t in g["min"]) for g in obj["sum"]))

    def __str__(self):
        out = []
        for g in self.groups:
            s = ", ".join(str(t) for t in g)
            out.append(f"min({s})" if len(g) > 1 else s)
        return " + ".join(out)


def _normalize_group(group: Sequence[DecayTerm]) -> tuple:
    kept = []
    for i, b in enumerate(group):
        dominated = any(a != b and a.surely_le(b) for j, a in enumerate(group) if j != i)
        if not dominated:
            kept.append(b)
    # exact duplicates: keep the first copy only
    out = []
    for t in kept:
        if t not in out:
            out.append(t)
    return tuple(out)


def normalize(expr: BoundExpr) -> BoundExpr:
    """Drop terms that can never attain their group's minimum on t-r >= 1."""
    return BoundExpr(tuple(_normalize_group(g) for g in expr.groups))


def combine(kind: str, parts: Sequence[BoundExpr]) -> BoundExpr:
    """Pointwise sum or min of bounds.

    ``min`` of multi-group parts is not closed in this family; it is replaced by
    the sum over one-group-per-part choices of the pairwise minima, which is
    pointwise larger by at most the product of the group counts.
    """
    parts = list(parts)
    if not parts:
        raise ValueError("combine needs at least one part")
    if kind == "sum":
        return normalize(BoundExpr(tuple(g for p in parts for g in p.groups)))
    if kind != "min":
        raise ValueError(f"unknown combine kind {kind!r}")
    groups = [()]
    for p in parts:
        groups = [acc + g for acc in groups for g in p.groups]
    return normalize(BoundExpr(tuple(groups)))


def evaluate(expr: BoundExpr, t, r, eps_value=1e-3):
    if not (0 < eps_value <= float(EPS_MAX)):
        raise ValueError("eps_value must lie in (0, 1/100]")
    total = 0.0
    for g in expr.groups:
        vals = [term.evaluate(t, r, eps_value) for term in g]
        total = total + functools.reduce(np.minimum, vals)
    return total


def log_evaluate(expr: BoundExpr, t, r, eps_value=1e-3):
    """Natural log of :func:`evaluate`, usable far beyond float range of the value."""
    logs = []
    for g in expr.groups:
        logs.append(functools.reduce(np.minimum, [term.log_value(t, r, eps_value) for term in g]))
    return functools.reduce(np.logaddexp, logs)


def absorb_log(expr: BoundExpr) -> BoundExpr:
    """Trade every ``ln<t-r>`` factor for ``<t-r>^eps``."""
    groups = []
    for g in expr.groups:
        groups.append(tuple(replace(t, m=0, eta=t.eta - EPS * t.m) if t.m else t for t in g))
    return normalize(BoundExpr(tuple(groups)))


def absorb_threshold(eps_value: float) -> float:
    """Smallest ``X`` with ``x**eps_value >= ln x`` for all ``x >= X``.

    With ``x = e^z`` the crossing solves ``e^(eps z) = z``; the large root is
    ``z = -W_{-1}(-eps)/eps``.
    """
    if not (0 < eps_value < 1 / math.e):
        raise ValueError("eps_value out of range")
    z = -lambertw(-eps_value, -1).real / eps_value
    return math.exp(z) if z < 700 else math.inf


def log_absorb_threshold(eps_value: float) -> float:
    """``ln`` of :func:`absorb_threshold` (finite for every admissible eps)."""
    return -lambertw(-eps_value, -1).real / eps_value


@dataclass(frozen=True)
class KappaSymbol:
    """Growth of ``int_0^{t-r} <y>^-lambda dy``: constant, log, or a power."""

    kind: str
    exponent: ExtRational | None = None

    def __post_init__(self):
        if self.kind not in ("One", "Log", "Power"):
            raise ValueError(self.kind)
        if (self.kind == "Power") != (self.exponent is not None):
            raise ValueError("exponent present iff kind is Power")

    def apply(self, term: DecayTerm) -> DecayTerm:
        """Multiply a term by this symbol's <t-r> growth."""
        if self.kind == "One":
            return term
        if self.kind == "Log":
            return replace(term, m=term.m + 1)
        return replace(term, eta=term.eta - self.exponent)


def leading_u_exponent(expr: BoundExpr) -> tuple[ExtRational, int]:
    """Asymptotic ``<t-r>`` decay rate of a bound in ``<t-r>`` alone.

    Returns ``(eta, m)`` of the slowest-decaying group: each group decays like
    its best term; among equal rates more logs is slower.
    """
    def rate(term):
        # larger is faster decay
        return (term.eta, -term.m)

    worst = None
    for g in expr.groups:
        best = max(g, key=rate)
        if worst is None or rate(best) < rate(worst):
            worst = best
    return worst.eta, worst.m
