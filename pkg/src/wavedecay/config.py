"""Run configuration: JSON file plus command-line overrides."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from fractions import Fraction
from typing import Optional

from .iteration import CoefficientProfile
from .simulator import GridSpec, InitialData, ModelEquation

MODES = ("predict", "simulate", "fit", "norms", "oracle", "verify")


@dataclass(frozen=True)
class EquationConfig:
    """Rationals are kept as strings so the config round-trips exactly."""

    sigma: Optional[str] = None
    delta: Optional[str] = None
    part: int = 1
    amp_h: float = 0.0
    amp_A: float = 0.0
    amp_V: float = 0.0
    ell: int = 0

    def fraction(self, name) -> Optional[Fraction]:
        v = getattr(self, name)
        return None if v is None else Fraction(v)

    def profile(self) -> CoefficientProfile:
        return CoefficientProfile(self.fraction("sigma"), self.fraction("delta"), self.part,
                                  self.amp_h, self.amp_A, self.amp_V)

    def model(self) -> ModelEquation:
        def fl(name):
            v = self.fraction(name)
            return None if v is None else float(v)
        return ModelEquation(fl("sigma"), fl("delta"), self.amp_h, self.amp_A, self.amp_V, self.ell)


@dataclass(frozen=True)
class RunConfig:
    mode: str = "predict"
    equation: EquationConfig = field(default_factory=EquationConfig)
    grid: GridSpec = field(default_factory=lambda: GridSpec(0.0, 1990.0, 2010.0, 0.0625, 16))
    data: InitialData = field(default_factory=InitialData)
    r0: float = 10.0
    window: Optional[tuple] = None
    tol: float = 0.3
    seed: int = 0
    eps: float = 1e-3
    input: Optional[str] = None
    out: str = "out"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if not (0 < self.eps <= 0.01):
            raise ValueError("eps must lie in (0, 1/100]")
        if self.window is not None:
            object.__setattr__(self, "window", tuple(float(x) for x in self.window))

    def to_json(self) -> dict:
        d = asdict(self)
        d["window"] = None if self.window is None else list(self.window)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "RunConfig":
        d = dict(d)
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        nested = {"equation": EquationConfig, "grid": GridSpec, "data": InitialData}
        for key, typ in nested.items():
            if key in d:
                sub = dict(d[key])
                if key == "equation":
                    for k in ("sigma", "delta"):
                        if sub.get(k) is not None:
                            sub[k] = str(Fraction(str(sub[k])))
                try:
                    d[key] = typ(**sub)
                except TypeError as exc:
                    raise ValueError(f"bad {key} section: {exc}") from None
        return cls(**d)

    def content_hash(self) -> str:
        """SHA-256 of the canonical config, output location excluded."""
        d = self.to_json()
        d.pop("out")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def override(self, **kw) -> "RunConfig":
        eq = {k: kw.pop(k) for k in list(kw) if k in {f.name for f in fields(EquationConfig)}}
        gr = {k: kw.pop(k) for k in list(kw) if k in {f.name for f in fields(GridSpec)}}
        cfg = self
        if eq:
            if eq.get("sigma") is not None:
                eq["sigma"] = str(Fraction(str(eq["sigma"])))
            if eq.get("delta") is not None:
                eq["delta"] = str(Fraction(str(eq["delta"])))
            cfg = replace(cfg, equation=replace(cfg.equation, **eq))
        if gr:
            cfg = replace(cfg, grid=replace(cfg.grid, **gr))
        return replace(cfg, **kw) if kw else cfg


def load(path) -> RunConfig:
    with open(path) as fh:
        return RunConfig.from_json(json.load(fh))
