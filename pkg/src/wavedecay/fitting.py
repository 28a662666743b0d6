"""Power-law exponent extraction from sampled tails."""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy import stats

NOISE_FLOOR = 1e-14
MIN_POINTS = 8


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class FitResult:
    exponent: float
    stderr: float
    r_squared: float
    window: tuple
    n_points: int
    envelope: bool = False
    log_power: Optional[float] = None

    def to_json(self):
        d = asdict(self)
        d["window"] = list(self.window)
        return d

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _valid(t, y):
    t = np.asarray(t, float)
    y = np.asarray(y, float)
    if t.shape != y.shape or t.ndim != 1:
        raise FitError("series must be two equal-length 1-D arrays")
    return t, y


def _local_maxima(t, a):
    """Interior local maxima of ``a`` (endpoints dropped)."""
    idx = np.flatnonzero((a[1:-1] >= a[:-2]) & (a[1:-1] > a[2:])) + 1
    return t[idx], a[idx]


def fit_exponent(t, y, window=None, log_factor: bool = False) -> FitResult:
    """``-slope`` of ``log|y|`` against ``log t`` on ``window`` (default: last decade).

    A sign-changing series is fitted on the envelope of its ``|y|`` local maxima.
    ``log_factor`` adds ``log log t`` as a second regressor and reports its coefficient.
    """
    t, y = _valid(t, y)
    if window is None:
        if t.size == 0 or t.max() <= 0:
            raise FitError("empty series")
        window = (max(t.max() / 10, t[t > 0].min()), t.max())
    lo, hi = window
    if not lo < hi:
        raise FitError("window must satisfy t_lo < t_hi")
    sel = (t >= lo) & (t <= hi) & (t > 0)
    t, y = t[sel], y[sel]
    ok = np.abs(y) > NOISE_FLOOR
    envelope = False
    if np.any(y[ok] > 0) and np.any(y[ok] < 0):
        envelope = True
        t, a = _local_maxima(t, np.abs(y))
    else:
        t, a = t[ok], np.abs(y[ok])
    keep = a > NOISE_FLOOR
    t, a = t[keep], a[keep]
    if t.size < MIN_POINTS:
        raise FitError(f"need at least {MIN_POINTS} points above the noise floor in the window, "
                       f"got {t.size}")
    lt, la = np.log(t), np.log(a)
    if log_factor:
        X = np.column_stack([np.ones_like(lt), lt, np.log(lt)])
        coef, *_ = np.linalg.lstsq(X, la, rcond=None)
        resid = la - X @ coef
        dof = max(t.size - 3, 1)
        cov = np.linalg.pinv(X.T @ X) * (resid @ resid) / dof
        ss = np.sum((la - la.mean()) ** 2)
        r2 = 1.0 - (resid @ resid) / ss if ss > 0 else 1.0
        return FitResult(float(-coef[1]), float(np.sqrt(cov[1, 1])), float(np.clip(r2, 0, 1)),
                         (float(t[0]), float(t[-1])), int(t.size), envelope, float(coef[2]))
    res = stats.linregress(lt, la)
    r2 = float(res.rvalue ** 2) if np.isfinite(res.rvalue) else 1.0
    return FitResult(float(-res.slope), float(res.stderr), float(np.clip(r2, 0, 1)),
                     (float(t[0]), float(t[-1])), int(t.size), envelope)


def local_exponent(t, y):
    """``-d log|y| / d log t`` by centred differences; length ``len(t) - 2``."""
    t, y = _valid(t, y)
    if t.size < 3:
        raise FitError("need at least 3 points")
    if np.any(np.abs(y) <= NOISE_FLOOR) or np.any(t <= 0):
        raise FitError("series touches the noise floor or has nonpositive parameters")
    lt, la = np.log(t), np.log(np.abs(y))
    return -(la[2:] - la[:-2]) / (lt[2:] - lt[:-2])


def asymptotic_exponent(t, y) -> float:
    """Median of the local exponent over its final quartile."""
    p = local_exponent(t, y)
    return float(np.median(p[-max(1, p.size // 4):]))


def read_series(path):
    """Two-column CSV; lines starting with ``#`` are skipped."""
    ts, ys = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                ts.append(float(row[0]))
                ys.append(float(row[1]))
            except (ValueError, IndexError):
                raise FitError(f"malformed row {row!r} in {path}") from None
    return np.array(ts), np.array(ys)


def write_series(path, t, y, header="param,value"):
    with open(path, "w", newline="") as fh:
        fh.write(f"# {header}\n")
        w = csv.writer(fh, lineterminator="\n")
        for a, b in zip(t, y):
            w.writerow([repr(float(a)), repr(float(b))])
