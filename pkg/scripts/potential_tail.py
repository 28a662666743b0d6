"""Tail exponent against potential decay rate delta.

    python3 scripts/potential_tail.py --deltas 0.5 1 1.5
"""
import argparse
from fractions import Fraction

from wavedecay.fitting import fit_exponent
from wavedecay.iteration import CoefficientProfile, predict
from wavedecay.simulator import GridSpec, InitialData, ModelEquation, SamplerSpec, evolve, sample

ap = argparse.ArgumentParser()
ap.add_argument("--deltas", type=float, nargs="+", default=[0.5, 1.0, 1.5])
ap.add_argument("--amp-v", type=float, default=0.1)
ap.add_argument("--h", type=float, default=1 / 16)
ap.add_argument("--r0", type=float, default=10.0)
args = ap.parse_args()

grid = GridSpec(0, 1990, 2010, args.h, 16)
print("delta  predicted  fitted")
for d in args.deltas:
    fs = evolve(grid, ModelEquation(delta=d, amp_V=args.amp_v), InitialData())
    t, y = sample(fs, SamplerSpec("fixed_r", args.r0))
    fit = fit_exponent(t, y, (200, 2000))
    pred = predict(CoefficientProfile(None, Fraction(str(d)), 1)).theorem_exponent + 1
    print(f"{d:5.2f}  {float(pred):9.3f}  {fit.exponent:6.3f}")
