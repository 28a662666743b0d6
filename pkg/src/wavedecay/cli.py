"""Command-line front end.

Exit codes: 0 ok, 1 verify verdict INCONSISTENT, 2 usage or validation error,
3 internal error.  Errors are reported as JSON on stderr (and in ``error.json``).
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .bounds import evaluate
from .config import RunConfig
from .conversion import (UnsupportedBranch, convert_interior, oracle_integral, random_points,
                         random_source)
from .fitting import FitError, fit_exponent, read_series, write_series
from .iteration import predict
from .norms import (DiscreteField, NormError, dyadic_sweep, hardy_check, le_report)
from .simulator import SamplerError, SamplerSpec, SimulationError, evolve, sample

USAGE, INTERNAL, INCONSISTENT = 2, 3, 1


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wavedecay", description="decay-rate prediction and simulation")
    sub = p.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    for mode in cfgmod.MODES:
        s = sub.add_parser(mode)
        s.add_argument("--config", help="JSON run configuration")
        s.add_argument("--out", help="output directory")
        s.add_argument("--input", help="input CSV (fit: param,value; norms: t,r,value,dt,dr)")
        s.add_argument("--sigma")
        s.add_argument("--delta")
        s.add_argument("--part", type=int)
        s.add_argument("--amp-v", dest="amp_V", type=float)
        s.add_argument("--amp-h", dest="amp_h", type=float)
        s.add_argument("--amp-a", dest="amp_A", type=float)
        s.add_argument("--ell", type=int)
        s.add_argument("--h", type=float)
        s.add_argument("--umax", dest="u_max", type=float)
        s.add_argument("--vmax", dest="v_max", type=float)
        s.add_argument("--stride", dest="output_stride", type=int)
        s.add_argument("--r0", type=float)
        s.add_argument("--tol", type=float)
        s.add_argument("--seed", type=int)
        s.add_argument("--eps", type=float)
    return p


def resolve_config(args) -> RunConfig:
    cfg = cfgmod.load(args.config) if args.config else RunConfig()
    keys = ("sigma", "delta", "part", "amp_V", "amp_h", "amp_A", "ell", "h", "u_max", "v_max",
            "output_stride", "r0", "tol", "seed", "eps", "input", "out")
    over = {k: getattr(args, k) for k in keys if getattr(args, k) is not None}
    over["mode"] = args.mode
    for k in ("sigma", "delta"):
        if k in over and over[k].lower() in ("none", "off"):
            over[k] = None
    return cfg.override(**over)


def _dump(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _with_hash(cfg, obj):
    return {"config_hash": cfg.content_hash(), **obj}


def _write_sampler(path, cfg, t, y):
    write_series(path, t, y)
    text = path.read_text().splitlines(keepends=True)
    text.insert(1, f"# config_hash={cfg.content_hash()}\n")
    path.write_text("".join(text))


def _simulate(cfg: RunConfig, out: Path):
    t0 = time.perf_counter()
    fs = evolve(cfg.grid, cfg.equation.model(), cfg.data)
    wall = time.perf_counter() - t0
    spec = SamplerSpec("fixed_r", cfg.r0)
    t, y = sample(fs, spec)
    csv_path = out / f"{spec.name}.csv"
    _write_sampler(csv_path, cfg, t, y)
    conf = cfg.to_json()
    conf.pop("out")
    meta = {"config": conf, "samplers": [csv_path.name], "grid": fs.meta["grid"]}
    _dump(out / "metadata.json", _with_hash(cfg, meta))
    _dump(out / "timing.json", {"config_hash": cfg.content_hash(), "wall_time_s": round(wall, 3)})
    return fs, t, y


def run_predict(cfg, out):
    rep = predict(cfg.equation.profile())
    _dump(out / "prediction.json", _with_hash(cfg, rep.to_json()))
    table = f"# config_hash={cfg.content_hash()}\n{rep.step_table()}\n"
    (out / "steps.txt").write_text(table)
    print(table, end="")
    print(f"theorem exponent: {rep.theorem_exponent}")
    return 0


def run_simulate(cfg, out):
    _simulate(cfg, out)
    print(f"wrote {out}")
    return 0


def _fit_window(cfg, t):
    if cfg.window is not None:
        return cfg.window
    return (float(t.max()) / 10, float(t.max()))


def run_fit(cfg, out):
    if not cfg.input:
        raise UsageError("fit needs --input")
    t, y = read_series(cfg.input)
    res = fit_exponent(t, y, _fit_window(cfg, t) if t.size else None)
    _dump(out / "fit.json", _with_hash(cfg, res.to_json()))
    print(res.dumps())
    return 0


def run_norms(cfg, out):
    if cfg.input:
        rows = np.loadtxt(cfg.input, delimiter=",", comments="#", ndmin=2)
        fld = DiscreteField.from_rows(rows)
        eq = cfg.equation.model()
    else:
        fs, t, _ = _simulate(cfg, out)
        t_hi = min(cfg.grid.u_max, cfg.grid.v_max / 2)
        t_lo = t_hi / 4
        # every lattice point needs u >= u_min and v <= v_max
        r_max = min(64.0, t_lo - cfg.grid.u_min, cfg.grid.v_max - t_hi)
        fld = DiscreteField.from_slices(fs, t_lo, t_hi, r_max)
        eq = cfg.equation.model()
    report = {kind: le_report(fld, kind).to_json() for kind in ("LE", "LE1", "LEstar")}
    report["hardy_gamma2"] = hardy_check(fld, 2.0).to_json()["ratio"]
    try:
        report["dyadic"] = dyadic_sweep(fld, eq).to_json()
    except NormError as exc:
        report["dyadic"] = {"skipped": str(exc)}
    _dump(out / "norms.json", _with_hash(cfg, report))
    print(json.dumps({k: report[k]["value"] for k in ("LE", "LE1", "LEstar")}, sort_keys=True))
    return 0


def run_oracle(cfg, out, n_sources=10, n_points=20):
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for _ in range(n_sources):
        src = random_source(rng)
        expr = convert_interior(src)
        for t, r in random_points(rng, n_points):
            val = oracle_integral(src, t, r, cfg.eps)
            sym = evaluate(expr, t, r, cfg.eps)
            m, a, b, e = src.as_tuple(cfg.eps)
            rows.append((a, b, e, m, t, r, val, sym, val / sym))
    path = out / "oracle.csv"
    with open(path, "w") as fh:
        fh.write(f"# config_hash={cfg.content_hash()}\n")
        fh.write("alpha,beta,eta,m,t,r,value,symbolic,ratio\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) if isinstance(x, float) else str(x) for x in row) + "\n")
    print(f"wrote {len(rows)} rows to {path}")
    return 0


def verdict(fitted: float, predicted: float, tol: float) -> str:
    if abs(fitted - predicted) <= tol:
        return "TIGHT"
    if fitted >= predicted - tol:
        return "CONSISTENT"
    return "INCONSISTENT"


def run_verify(cfg, out):
    rep = predict(cfg.equation.profile())
    # local decay at fixed r: one extra power of <t+r>
    predicted = float(rep.theorem_exponent) + 1.0
    _, t, y = _simulate(cfg, out)
    fit = fit_exponent(t, y, _fit_window(cfg, t))
    v = verdict(fit.exponent, predicted, cfg.tol)
    report = {"predicted_local_exponent": str(rep.theorem_exponent + 1), "fit": fit.to_json(),
              "tol": cfg.tol, "verdict": v, "r0": cfg.r0,
              "note": "the bound is one-sided; exceeding the prediction is consistent"}
    _dump(out / "verify.json", _with_hash(cfg, report))
    print(json.dumps({"verdict": v, "fitted": round(fit.exponent, 4), "predicted": predicted},
                     sort_keys=True))
    return INCONSISTENT if v == "INCONSISTENT" else 0


RUNNERS = {"predict": run_predict, "simulate": run_simulate, "fit": run_fit, "norms": run_norms,
           "oracle": run_oracle, "verify": run_verify}


def _fail(code, kind, exc, out=None):
    err = {"error": kind, "message": str(exc), "exit_code": code}
    print(json.dumps(err, sort_keys=True, ensure_ascii=False), file=sys.stderr)
    if out is not None:
        try:
            _dump(out / "error.json", err)
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    out = None
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        if cfg.input and not Path(cfg.input).exists():
            raise UsageError(f"input file {cfg.input} does not exist")
        return RUNNERS[cfg.mode](cfg, out)
    except (UsageError, UnsupportedBranch, FitError, SamplerError, NormError, ValueError,
            FileNotFoundError, json.JSONDecodeError) as exc:
        return _fail(USAGE, "usage", exc, out)
    except SimulationError as exc:
        return _fail(INTERNAL, "simulation", exc, out)
    except Exception as exc:  # noqa: BLE001
        return _fail(INTERNAL, "internal", exc, out)


if __name__ == "__main__":
    sys.exit(main())
