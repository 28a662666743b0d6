"""Local-energy norms and weighted inequality diagnostics on radial fields.

Fields live on a midpoint lattice ``t_n = T1 + (n + 1/2) dt``, ``r_k = (k + 1/2) dr``;
integrals over space use the radial measure ``4 pi r^2 dr``.  Angular derivatives
vanish identically for radial fields and enter every ``w_{<=1}`` as zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import ENLARGE, DyadicRegion
from .simulator import FieldSlices, ModelEquation, SamplerError

NOISE_FLOOR = 1e-14
SLAB_NOTE = "finite slab surrogate: supports, but cannot certify, local energy decay on [0, inf)"


class NormError(ValueError):
    pass


@dataclass
class DiscreteField:
    t: np.ndarray
    r: np.ndarray
    value: np.ndarray
    dt_value: np.ndarray
    dr_value: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, float)
        self.r = np.asarray(self.r, float)
        shape = (self.t.size, self.r.size)
        for name in ("value", "dt_value", "dr_value"):
            arr = np.asarray(getattr(self, name), float)
            if arr.shape != shape:
                raise NormError(f"{name} has shape {arr.shape}, expected {shape}")
            setattr(self, name, arr)
        if self.t.size < 3 or self.r.size < 3:
            raise NormError("lattice needs at least 3 points per direction")
        if not (np.all(np.diff(self.t) > 0) and np.all(np.diff(self.r) > 0)) or self.r[0] <= 0:
            raise NormError("lattice must be increasing with positive radii")

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def dr(self) -> float:
        return float(self.r[1] - self.r[0])

    def scaled(self, c: float) -> "DiscreteField":
        return DiscreteField(self.t, self.r, c * self.value, c * self.dt_value, c * self.dr_value)

    @classmethod
    def from_function(cls, t, r, fn):
        """Sample ``fn(T, R)`` and difference it; derivatives are second order."""
        T, R = np.meshgrid(t, r, indexing="ij")
        val = fn(T, R)
        return cls(t, r, val, *_grad(val, t, r))

    @classmethod
    def from_slices(cls, fs: FieldSlices, t_lo: float, t_hi: float, r_max: float,
                    spacing: float | None = None) -> "DiscreteField":
        """Lattice of ``psi = phi / r`` on ``[t_lo, t_hi] x (0, r_max)``."""
        spacing = spacing or fs.spacing
        nt = int(round((t_hi - t_lo) / spacing))
        nr = int(round(r_max / spacing))
        t = t_lo + spacing * (np.arange(nt) + 0.5)
        r = spacing * (np.arange(nr) + 0.5)
        T, R = np.meshgrid(t, r, indexing="ij")
        try:
            phi = fs.at(T - R, T + R)
        except SamplerError as exc:
            raise NormError(f"lattice does not fit in the simulated grid: {exc}") from None
        val = phi / R
        return cls(t, r, val, *_grad(val, t, r))

    def to_rows(self):
        T, R = np.meshgrid(self.t, self.r, indexing="ij")
        return np.column_stack([T.ravel(), R.ravel(), self.value.ravel(),
                                self.dt_value.ravel(), self.dr_value.ravel()])

    @classmethod
    def from_rows(cls, rows):
        """Inverse of :meth:`to_rows` (CSV columns t, r, value, dt, dr)."""
        rows = np.asarray(rows, float)
        t = np.unique(rows[:, 0])
        r = np.unique(rows[:, 1])
        if t.size * r.size != rows.shape[0]:
            raise NormError("rows do not form a full (t, r) lattice")
        order = np.lexsort((rows[:, 1], rows[:, 0]))
        rows = rows[order]
        shape = (t.size, r.size)
        return cls(t, r, *(rows[:, c].reshape(shape) for c in (2, 3, 4)))


def _grad(val, t, r):
    return np.gradient(val, t, axis=0, edge_order=2), np.gradient(val, r, axis=1, edge_order=2)


def annuli(r_max: float):
    """Dyadic radii ``R = 1, 2, 4, ...`` whose annulus meets ``[0, r_max)``."""
    out, R = [], 1
    while R < r_max:
        out.append(R)
        R *= 2
    return out


def _annulus_mask(r, R):
    if R == 1:
        return r < 2
    return (r >= R) & (r < 2 * R)


def _l2_sq(fld: DiscreteField, density, rmask, tmask=None):
    """``int int density * 4 pi r^2`` over the masked lattice (midpoint rule)."""
    w = 4 * math.pi * fld.r ** 2 * fld.dr * fld.dt
    d = density[:, rmask] * w[rmask]
    if tmask is not None:
        d = d[tmask]
    return float(np.sum(d))


def _check_resolution(fld: DiscreteField):
    if np.count_nonzero(fld.r < 2) < 4:
        raise NormError("lattice too coarse to resolve the unit ball (need >= 4 radii below 2)")


@dataclass
class NormReport:
    kind: str
    value: float
    per_annulus: dict
    truncated: bool = False
    note: str = SLAB_NOTE

    def to_json(self):
        return {"kind": self.kind, "value": self.value, "truncated": self.truncated,
                "per_annulus": {str(k): v for k, v in self.per_annulus.items()}, "note": self.note}


def le_report(fld: DiscreteField, kind: str) -> NormReport:
    _check_resolution(fld)
    br = np.hypot(1.0, fld.r)[None, :]
    u2 = fld.value ** 2
    du2 = fld.dt_value ** 2 + fld.dr_value ** 2
    R_list = annuli(fld.r[-1] + fld.dr / 2)
    parts = {}
    if kind == "LE":
        for R in R_list:
            parts[R] = math.sqrt(_l2_sq(fld, u2 / br, _annulus_mask(fld.r, R)))
        return NormReport(kind, max(parts.values()), parts)
    if kind == "LE1":
        d_part, l_part = {}, {}
        for R in R_list:
            m = _annulus_mask(fld.r, R)
            d_part[R] = math.sqrt(_l2_sq(fld, du2 / br, m))
            l_part[R] = math.sqrt(_l2_sq(fld, u2 / br ** 3, m))
        parts = {R: d_part[R] + l_part[R] for R in R_list}
        return NormReport(kind, max(d_part.values()) + max(l_part.values()), parts)
    if kind == "LEstar":
        for R in R_list:
            parts[R] = math.sqrt(_l2_sq(fld, u2 * br, _annulus_mask(fld.r, R)))
        total = sum(parts.values())
        r_edge = fld.r[-1] + fld.dr / 2
        last = R_list[-1]
        incomplete = r_edge < 2 * last - 1e-12
        truncated = bool(total > 0 and (incomplete or parts[last] > 1e-2 * total))
        return NormReport(kind, total, parts, truncated)
    raise NormError(f"unknown norm {kind!r}")


def le_norm(fld: DiscreteField, kind: str) -> float:
    return le_report(fld, kind).value


@dataclass
class RatioReport:
    ratio: float
    rows: list = field(default_factory=list)
    degenerate: bool = False

    def to_json(self):
        return {"ratio": None if self.degenerate else self.ratio, "degenerate": self.degenerate,
                "rows": self.rows}


def hardy_check(fld: DiscreteField, gamma: float) -> RatioReport:
    """``max_t int f^2 <t-r>^-g / int (d_r f)^2 <t-r>^-(g-2)`` over the lattice."""
    if not gamma > 1:
        raise NormError("gamma must exceed 1")
    if gamma == 3:
        raise NormError("gamma = 3 is excluded")
    w = 4 * math.pi * fld.r ** 2 * fld.dr
    rows = []
    for n, t in enumerate(fld.t):
        bu = np.hypot(1.0, t - fld.r)
        num = float(np.sum(fld.value[n] ** 2 * bu ** -gamma * w))
        den = float(np.sum(fld.dr_value[n] ** 2 * bu ** (2 - gamma) * w))
        if num == 0 and den == 0:
            continue
        if den <= NOISE_FLOOR:
            raise NormError(f"derivative term vanishes at t={t:g}; need a nontrivial C^1 profile")
        rows.append({"t": float(t), "ratio": num / den})
    if not rows:
        raise NormError("field vanishes on every time slice")
    return RatioReport(max(r["ratio"] for r in rows), rows)


def apply_operator(fld: DiscreteField, eq: ModelEquation) -> np.ndarray:
    """``P psi`` by finite differences, in the tortoise form of the model equation."""
    T, R = np.meshgrid(fld.t, fld.r, indexing="ij")
    phi = R * fld.value
    phi_t = np.gradient(phi, fld.t, axis=0, edge_order=2)
    phi_x = np.gradient(phi, fld.r, axis=1, edge_order=2)
    phi_tt = np.gradient(phi_t, fld.t, axis=0, edge_order=2)
    phi_xx = np.gradient(phi_x, fld.r, axis=1, edge_order=2)
    out = phi_xx - phi_tt
    f = np.ones_like(fld.r)
    if not eq.flat:
        F, a, b = eq.coefficients(fld.r)
        out = out + 4 * F[None, :] * phi + 4 * b[None, :] * phi_x
        f = 1 - eq.metric_term(eq.areal_radius(np.concatenate([[0.0], fld.r]))[1:])
    return out / (R * f[None, :])


def dyadic_h1_check(fld: DiscreteField, eq: ModelEquation, region: DyadicRegion) -> RatioReport:
    """``R |d w|_C / (|w_{<=1}|_C~ + R^2 |P w|_C~)`` on one CTR cell and its enlargement."""
    if region.kind != "CTR":
        raise NormError("dyadic check needs a CTR cell")
    T, Rr = region.T, region.R
    if not (1 <= Rr <= 3 * T / 8):
        raise NormError("need 1 <= R <= 3T/8")
    t_lo, t_hi, r_lo, r_hi = region.box()
    et_lo, et_hi, er_lo, er_hi = region.box(ENLARGE)
    tol = 1e-9
    if (et_lo < fld.t[0] - fld.dt / 2 - tol or et_hi > fld.t[-1] + fld.dt / 2 + tol
            or er_hi > fld.r[-1] + fld.dr / 2 + tol):
        raise NormError("dyadic cell (enlarged) lies outside the lattice")
    tm = (fld.t >= t_lo) & (fld.t < t_hi)
    rm = (fld.r >= r_lo) & (fld.r < r_hi)
    etm = (fld.t >= et_lo) & (fld.t < et_hi)
    erm = (fld.r >= er_lo) & (fld.r < er_hi)
    Tg, Rg = np.meshgrid(fld.t, fld.r, indexing="ij")
    du2 = fld.dt_value ** 2 + fld.dr_value ** 2
    Sw = Tg * fld.dt_value + Rg * fld.dr_value
    Pw = apply_operator(fld, eq)
    num = Rr * math.sqrt(_l2_sq(fld, du2, rm, tm))
    w1 = math.sqrt(_l2_sq(fld, fld.value ** 2 + Sw ** 2 + du2, erm, etm))
    den = w1 + Rr ** 2 * math.sqrt(_l2_sq(fld, Pw ** 2, erm, etm))
    row = {"T": T, "R": Rr, "numerator": num, "denominator": den}
    if den == 0:
        if num == 0:
            return RatioReport(float("nan"), [row], degenerate=True)
        raise NormError("denominator vanishes with nonzero numerator")
    return RatioReport(num / den, [row])


def dyadic_sweep(fld: DiscreteField, eq: ModelEquation, base: float = 2.0):
    """Ratios over every admissible CTR cell the lattice covers; max is the reported constant."""
    rows = []
    T = 1.0
    while T * 2 * ENLARGE <= fld.t[-1] + fld.dt / 2:
        R = 1.0
        while R <= 3 * T / 8:
            if T / ENLARGE >= fld.t[0] - fld.dt / 2 and 2 * R * ENLARGE <= fld.r[-1] + fld.dr / 2:
                rep = dyadic_h1_check(fld, eq, DyadicRegion("CTR", T=T, R=R, base=max(base, 2.0001)))
                if not rep.degenerate:
                    rows += [dict(r, ratio=rep.ratio) for r in rep.rows]
            R *= 2
        T *= 2
    if not rows:
        raise NormError("no admissible dyadic cell fits in the lattice")
    return RatioReport(max(r["ratio"] for r in rows), rows)
