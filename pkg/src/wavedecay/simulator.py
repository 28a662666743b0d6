"""Double-null evolution of the radial model problem.

The unknown is ``phi = r psi`` on the grid ``u, v`` with ``x = (v - u)/2`` the
tortoise radius of the stationary metric ``-f dt^2 + f^-1 dr^2 + r^2 dw^2``,
``f = 1 - h(r)``.  Writing ``P = box_g + d_mu A^mu + V`` for a radial field
``A = A^r(r) d_r`` gives

    phi_uv = F(x) phi + a(x) phi_u + b(x) phi_v

with ``a = -A/4``, ``b = A/4`` and
``4F = f h'/r + f (A' + A/r) + f V - f l(l+1)/r^2`` (primes in areal ``r``).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numba
import numpy as np
from scipy.integrate import solve_ivp

BLOWUP = 1e12
MAX_AMPLITUDE = 0.5


class SimulationError(RuntimeError):
    pass


class SamplerError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    u_min: float = 0.0
    u_max: float = 100.0
    v_max: float = 120.0
    h: float = 0.125
    output_stride: int = 8

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("mesh width must be positive")
        if not (self.u_min < self.u_max <= self.v_max):
            raise ValueError("need u_min < u_max <= v_max")
        if self.output_stride < 1:
            raise ValueError("output_stride must be a positive integer")
        for span in (self.u_max - self.u_min, self.v_max - self.u_min):
            n = span / self.h
            if abs(n - round(n)) > 1e-9 * max(1.0, n):
                raise ValueError("grid extents must be integer multiples of h")
            if round(n) % self.output_stride:
                raise ValueError("grid extents must be multiples of h * output_stride")

    @property
    def n_u(self) -> int:
        return int(round((self.u_max - self.u_min) / self.h))

    @property
    def n_v(self) -> int:
        return int(round((self.v_max - self.u_min) / self.h))


@dataclass(frozen=True)
class ModelEquation:
    """Stationary radial coefficients.  ``sigma``/``delta`` of None switch the term off."""

    sigma: Optional[float] = None
    delta: Optional[float] = None
    amp_h: float = 0.0
    amp_A: float = 0.0
    amp_V: float = 0.0
    ell: int = 0

    def __post_init__(self):
        for name in ("amp_h", "amp_A", "amp_V"):
            v = getattr(self, name)
            if not (0 <= v <= MAX_AMPLITUDE):
                raise ValueError(f"{name} must lie in [0, {MAX_AMPLITUDE}]")
        for name in ("sigma", "delta"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name}={v} violates the hypothesis 0<σ,δ<∞")
        if self.sigma is None and (self.amp_h or self.amp_A):
            raise ValueError("amp_h/amp_A need sigma")
        if self.delta is None and self.amp_V:
            raise ValueError("amp_V needs delta")
        if self.ell < 0 or int(self.ell) != self.ell:
            raise ValueError("angular mode must be a nonnegative integer")

    @property
    def flat(self) -> bool:
        return not (self.amp_h or self.amp_A or self.amp_V or self.ell)

    def metric_term(self, r):
        if not self.amp_h:
            return np.zeros_like(np.asarray(r, float))
        return self.amp_h * (1 + np.square(r)) ** (-(1 + self.sigma) / 2)

    def first_order(self, r):
        """Radial component ``A^r``; vanishes at the origin, decays like ``<r>^(-1-sigma)``."""
        if not self.amp_A:
            return np.zeros_like(np.asarray(r, float))
        return self.amp_A * r * (1 + np.square(r)) ** (-1 - self.sigma / 2)

    def potential(self, r):
        if not self.amp_V:
            return np.zeros_like(np.asarray(r, float))
        return self.amp_V * (1 + np.square(r)) ** (-1 - self.delta / 2)

    def areal_radius(self, x):
        """Solve ``dr/dx = 1 - h(r)``, ``r(0) = 0`` on the increasing array ``x``."""
        x = np.asarray(x, float)
        if not self.amp_h:
            return x.copy()
        sol = solve_ivp(lambda _, r: 1 - self.metric_term(r), (0.0, float(x[-1])), [0.0],
                        t_eval=x, rtol=1e-12, atol=1e-12, method="DOP853")
        return sol.y[0]

    def coefficients(self, x):
        """``(F, a, b)`` at tortoise radii ``x > 0``."""
        x = np.asarray(x, float)
        r = self.areal_radius(x)
        br2 = 1 + np.square(r)
        f = 1 - self.metric_term(r)
        four_F = f * self.potential(r)
        if self.amp_h:
            four_F = four_F - f * self.amp_h * (1 + self.sigma) * br2 ** (-(3 + self.sigma) / 2)
        A = self.first_order(r)
        if self.amp_A:
            s = self.sigma
            dA = self.amp_A * (br2 ** (-1 - s / 2) - (2 + s) * np.square(r) * br2 ** (-2 - s / 2))
            four_F = four_F + f * (dA + self.amp_A * br2 ** (-1 - s / 2))
        if self.ell:
            with np.errstate(divide="ignore"):
                four_F = four_F - f * self.ell * (self.ell + 1) / np.square(r)
        return four_F / 4, -A / 4, A / 4


@dataclass(frozen=True)
class InitialData:
    """Smooth compactly supported bump ``phi(u_min, v)``."""

    center: float = 20.0
    width: float = 5.0
    amplitude: float = 1.0

    def __call__(self, v):
        s = (np.asarray(v, float) - self.center) / self.width
        out = np.zeros_like(s)
        inside = np.abs(s) < 1
        out[inside] = self.amplitude * np.exp(1 - 1 / (1 - s[inside] ** 2))
        return out


@numba.njit(cache=True)
def _march(row0, boundary, F, a, b, h, forcing, stride, out):
    # Diamond update for the north corner.  The zeroth-order term uses the
    # four-corner average, which keeps the centrifugal term stable next to r = 0.
    n_u = boundary.shape[0] - 1
    n_v = row0.shape[0] - 1
    prev = row0.copy()
    cur = np.empty_like(prev)
    forced = forcing.shape[0] > 0
    hh = h * h
    half = 0.5 * h
    for j in range(0, n_v + 1, stride):
        out[0, j // stride] = prev[j]
    for i in range(1, n_u + 1):
        cur[i] = boundary[i]
        for j in range(i + 1, n_v + 1):
            k = j - i
            pe = prev[j]
            pw = cur[j - 1]
            ps = prev[j - 1]
            ak = a[k]
            bk = b[k]
            q = 0.25 * hh * F[k]
            rhs = pe + pw - ps + q * (pe + pw + ps)
            rhs += half * (ak * (pw - ps - pe) + bk * (pe - ps - pw))
            if forced:
                rhs += hh * forcing[i - 1, j - 1]
            val = rhs / (1.0 - q - half * (ak + bk))
            if not (abs(val) <= BLOWUP):
                return 1, i, j
            cur[j] = val
        if i % stride == 0:
            r = i // stride
            for j in range(i, n_v + 1, stride):
                out[r, j // stride] = cur[j]
        prev, cur = cur, prev
    return 0, 0, 0


@dataclass
class FieldSlices:
    """Field on the stored (strided) grid; NaN where ``v < u``."""

    values: np.ndarray
    grid: GridSpec
    meta: dict = field(default_factory=dict)

    @property
    def spacing(self) -> float:
        return self.grid.h * self.grid.output_stride

    @property
    def u(self):
        return self.grid.u_min + self.spacing * np.arange(self.values.shape[0])

    @property
    def v(self):
        return self.grid.u_min + self.spacing * np.arange(self.values.shape[1])

    def at(self, u, v):
        """Bilinear interpolation at points with ``u_min <= u <= u_max``, ``u <= v <= v_max``.

        Cells straddling the centre use the odd extension ``phi(u, v) = -phi(v, u)``.
        """
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        H = self.spacing
        fu = (u - self.grid.u_min) / H
        fv = (v - self.grid.u_min) / H
        nu, nv = self.values.shape[0] - 1, self.values.shape[1] - 1
        tol = 1e-9
        if (np.any(fu < -tol) or np.any(fu > nu + tol) or np.any(fv > nv + tol)
                or np.any(fv < fu - tol)):
            raise SamplerError("sample point outside the computed grid")
        fu = np.clip(fu, 0, nu)
        fv = np.clip(fv, 0, nv)
        i0 = np.minimum(np.floor(fu).astype(int), max(nu - 1, 0))
        j0 = np.minimum(np.floor(fv).astype(int), max(nv - 1, 0))
        du, dv = fu - i0, fv - j0

        def get(i, j):
            below = j < i
            return np.where(below, -self.values[np.minimum(j, nu), np.minimum(i, nv)],
                            self.values[np.minimum(i, nu), j])

        return ((1 - du) * (1 - dv) * get(i0, j0) + du * (1 - dv) * get(i0 + 1, j0)
                + (1 - du) * dv * get(i0, j0 + 1) + du * dv * get(i0 + 1, j0 + 1))


@dataclass(frozen=True)
class SamplerSpec:
    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("fixed_r", "fixed_u", "fixed_t"):
            raise SamplerError(f"unknown sampler {self.kind}")

    @property
    def name(self):
        return f"{self.kind}_{self.value:g}"


def sample(slices: FieldSlices, curve: SamplerSpec):
    """``(parameter, value)`` arrays along a curve, parameter strictly increasing.

    fixed_r: parameter t; fixed_u: parameter v; fixed_t: parameter r.
    """
    g, H = slices.grid, slices.spacing
    c = curve.value
    if curve.kind == "fixed_r":
        if c < 0:
            raise SamplerError("radius must be nonnegative")
        u = slices.u
        u = u[u + 2 * c <= g.v_max + 1e-9]
        if u.size < 2:
            raise SamplerError(f"fixed_r({c}) does not fit in the grid")
        return u + c, slices.at(u, u + 2 * c)
    if curve.kind == "fixed_u":
        if not (g.u_min <= c <= g.u_max):
            raise SamplerError(f"fixed_u({c}) outside [u_min, u_max]")
        v = slices.v
        v = v[v >= c - 1e-9]
        if v.size < 2:
            raise SamplerError(f"fixed_u({c}) does not fit in the grid")
        return v, slices.at(np.full_like(v, c), v)
    if c > g.v_max or c < g.u_min:
        raise SamplerError(f"fixed_t({c}) beyond the computed grid")
    r_lo = max(0.0, c - g.u_max)
    r_hi = min(c - g.u_min, g.v_max - c)
    if r_hi <= r_lo:
        raise SamplerError(f"fixed_t({c}) does not fit in the grid")
    n = max(2, int(math.floor((r_hi - r_lo) / (H / 2))) + 1)
    r = np.linspace(r_lo, r_hi, n)
    return r, slices.at(c - r, c + r)


def coefficient_table(grid: GridSpec, eq: ModelEquation):
    """Coefficients at diamond centres ``x_k = k h / 2``, ``k = 0..n_v`` (k=0 unused)."""
    k = np.arange(grid.n_v + 1)
    x = k * grid.h / 2
    F = np.zeros(k.size)
    a = np.zeros(k.size)
    b = np.zeros(k.size)
    if not eq.flat:
        F[1:], a[1:], b[1:] = eq.coefficients(x[1:])
    return F, a, b


def evolve_raw(grid: GridSpec, eq: ModelEquation, row0, boundary, forcing=None) -> FieldSlices:
    """Run the scheme from explicit data on ``u = u_min`` and on ``v = u``."""
    row0 = np.ascontiguousarray(row0, float)
    boundary = np.ascontiguousarray(boundary, float)
    if row0.shape != (grid.n_v + 1,) or boundary.shape != (grid.n_u + 1,):
        raise ValueError("data arrays do not match the grid")
    F, a, b = coefficient_table(grid, eq)
    forcing = np.zeros((0, 0)) if forcing is None else np.ascontiguousarray(forcing, float)
    s = grid.output_stride
    out = np.full((grid.n_u // s + 1, grid.n_v // s + 1), np.nan)
    status, i, j = _march(row0, boundary, F, a, b, float(grid.h), forcing, s, out)
    if status:
        u = grid.u_min + i * grid.h
        v = grid.u_min + j * grid.h
        raise SimulationError(f"solution exceeded {BLOWUP:g} or became non-finite at the diamond "
                              f"with north corner u={u:g}, v={v:g}")
    return FieldSlices(out, grid)


def evolve(grid: GridSpec, eq: ModelEquation, data: InitialData) -> FieldSlices:
    v = grid.u_min + grid.h * np.arange(grid.n_v + 1)
    row0 = data(v)
    if abs(row0[0]) > 1e-14:
        raise ValueError("data must vanish at the centre u = v = u_min")
    row0[0] = 0.0
    fs = evolve_raw(grid, eq, row0, np.zeros(grid.n_u + 1))
    fs.meta = {"grid": asdict(grid), "equation": asdict(eq), "data": asdict(data)}
    return fs


def evolve_manufactured(grid: GridSpec, eq: ModelEquation, phi: Callable, phi_u: Callable,
                        phi_v: Callable, phi_uv: Callable) -> tuple[FieldSlices, float]:
    """Forced run whose exact solution is ``phi``; returns the field and the max nodal error."""
    h = grid.h
    F, a, b = coefficient_table(grid, eq)
    uc = grid.u_min + h * (np.arange(grid.n_u) + 0.5)
    vc = grid.u_min + h * (np.arange(grid.n_v) + 0.5)
    U, V = np.meshgrid(uc, vc, indexing="ij")
    K = np.clip(np.arange(grid.n_v)[None, :] - np.arange(grid.n_u)[:, None], 0, grid.n_v)
    Fk, ak, bk = F[K], a[K], b[K]
    forcing = phi_uv(U, V) - Fk * phi(U, V) - ak * phi_u(U, V) - bk * phi_v(U, V)
    v = grid.u_min + h * np.arange(grid.n_v + 1)
    u = grid.u_min + h * np.arange(grid.n_u + 1)
    fs = evolve_raw(grid, eq, phi(np.full_like(v, grid.u_min), v), phi(u, u), forcing)
    Us, Vs = np.meshgrid(fs.u, fs.v, indexing="ij")
    exact = phi(Us, Vs)
    err = float(np.nanmax(np.abs(fs.values - exact)))
    return fs, err
