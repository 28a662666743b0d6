"""Manufactured-solution convergence table for the characteristic scheme."""
import numpy as np

from wavedecay.simulator import GridSpec, ModelEquation, evolve_manufactured

eq = ModelEquation(sigma=0.5, delta=0.5, amp_h=0.2, amp_A=0.2, amp_V=0.3, ell=1)
phi = lambda u, v: np.sin(u) * np.exp(-v / 10)
pu = lambda u, v: np.cos(u) * np.exp(-v / 10)
pv = lambda u, v: -np.sin(u) * np.exp(-v / 10) / 10
puv = lambda u, v: -np.cos(u) * np.exp(-v / 10) / 10

prev = None
print("     h        max error   ratio")
for k in range(3, 8):
    h = 2.0 ** -k
    err = evolve_manufactured(GridSpec(0, 8, 16, h, int(0.5 / h)), eq, phi, pu, pv, puv)[1]
    print(f"{h:10.6f}  {err:.3e}   " + (f"{prev / err:.3f}" if prev else ""))
    prev = err
