"""Light-cone integration domain and dyadic spacetime regions."""
from __future__ import annotations

import math
from dataclasses import dataclass

# a^2 = (3/8) * 2^5
DEFAULT_BASE = math.sqrt(12.0)
ENLARGE = 9 / 8


def dtr_contains(t, r, rho, s) -> bool:
    """Membership in ``{0 <= s-rho <= t-r <= s+rho <= t+r}`` (closed)."""
    return 0 <= s - rho <= t - r <= s + rho <= t + r


def slice_bounds(t, r, rho):
    """``s``-interval of the vertical slice of D_tr at ``rho`` (may be empty)."""
    lo = max(rho, t - r - rho)
    hi = min(rho + t - r, t + r - rho)
    return lo, hi


def vertical_extent(t, r, rho) -> float:
    """Length of the slice of D_tr at fixed ``rho``.

    The slice already lies in ``s >= rho``, so the r >= t/3 restriction is automatic.
    """
    if not (0 <= r <= t) or rho < 0:
        raise ValueError("need 0 <= r <= t and rho >= 0")
    lo, hi = slice_bounds(t, r, rho)
    return max(0.0, hi - lo)


def region_classify(t, r, R) -> str:
    """Which of the two dyadic regions the radius ``R`` belongs to at (t, r)."""
    if R < 1:
        raise ValueError("dyadic radii are >= 1")
    if R < (t - r) / 8:
        return "R1"
    if R < t:
        return "R2"
    return "outside"


def dyadic_levels(base: float, upto: float):
    """``1, base, base^2, ...`` up to ``upto``."""
    out, x = [], 1.0
    while x <= upto:
        out.append(x)
        x *= base
    return out


@dataclass(frozen=True)
class DyadicRegion:
    """One cell of the dyadic decomposition of ``{1 <= t}``.

    Interior cells are half open so that each family tiles its domain:
    CTR: ``T <= t < 2T``, ``R <= r < base*R`` (``0 <= r`` for R = 1), ``r <= t/2``;
    CTU: ``T <= t < 2T``, ``U <= t-r < base*U`` (``0 <= t-r`` for U = 1), ``r > t/2``.
    The exterior kinds use ``r - t`` in place of ``t - r``; R1/R2 refer to
    :func:`region_classify`.
    """

    kind: str
    T: float = 1.0
    R: float = 1.0
    U: float = 1.0
    base: float = DEFAULT_BASE

    def __post_init__(self):
        if self.kind not in ("CTR", "CTU", "CRU_ext", "CTU_ext", "R1", "R2"):
            raise ValueError(self.kind)
        if not (2 < self.base <= 5):
            raise ValueError("dyadic base must lie in (2, 5]")
        if min(self.T, self.R, self.U) < 1:
            raise ValueError("dyadic parameters are >= 1")

    def contains(self, t, r) -> bool:
        a = self.base
        if self.kind in ("CTR", "CTU"):
            if not (self.T <= t < 2 * self.T) or r > t:
                return False
            if self.kind == "CTR":
                lo = 0.0 if self.R == 1 else self.R
                return r <= t / 2 and lo <= r < a * self.R
            lo = 0.0 if self.U == 1 else self.U
            return r > t / 2 and lo <= t - r < a * self.U
        if self.kind == "CTU_ext":
            if not (self.T <= t < 2 * self.T) or r < t:
                return False
            lo = 0.0 if self.U == 1 else self.U
            return lo <= r - t < a * self.U
        if self.kind == "CRU_ext":
            return r >= t and self.R <= r <= 2 * self.R and self.R <= r - t <= 2 * self.R
        raise ValueError(f"{self.kind} is a set of radii, not a spacetime cell")

    def box(self, pad: float = 1.0):
        """``(t_lo, t_hi, r_lo, r_hi)`` of a CTR cell, optionally enlarged."""
        if self.kind != "CTR":
            raise ValueError("box only defined for CTR")
        r_lo = 0.0 if self.R == 1 else self.R / pad
        r_hi = (2.0 if self.R == 1 else 2 * self.R) * pad
        return self.T / pad, 2 * self.T * pad, r_lo, r_hi


def interior_family(t_max: float, base: float = DEFAULT_BASE):
    """All CTR/CTU cells with ``T <= t_max``."""
    cells = []
    T = 1.0
    while T <= t_max:
        for R in dyadic_levels(base, T):
            cells.append(DyadicRegion("CTR", T=T, R=R, base=base))
        for U in dyadic_levels(base, T):
            cells.append(DyadicRegion("CTU", T=T, U=U, base=base))
        T *= 2
    return cells


def dyadic_cell(t, r, base: float = DEFAULT_BASE) -> DyadicRegion:
    """The unique interior cell containing ``(t, r)``, ``1 <= t``, ``0 <= r <= t``."""
    if t < 1 or not (0 <= r <= t):
        raise ValueError("need t >= 1 and 0 <= r <= t")
    T = 2.0 ** math.floor(math.log2(t))
    if r <= t / 2:
        x, kind = r, "CTR"
    else:
        x, kind = t - r, "CTU"
    level = 1.0
    if x >= base:
        level = base ** math.floor(math.log(x, base))
        # guard against log rounding at exact powers
        while level * base <= x:
            level *= base
        while level > x:
            level /= base
    if kind == "CTR":
        return DyadicRegion("CTR", T=T, R=level, base=base)
    return DyadicRegion("CTU", T=T, U=level, base=base)


def numbering_exponent(base: float, j: int, tol: float = 1e-9):
    """``j'`` with ``base**j' == (3/8) 2**j`` if one exists, else None."""
    target = 0.375 * 2.0**j
    jp = round(math.log(target, base))
    if jp >= 0 and abs(base**jp - target) <= tol * target:
        return jp
    return None
