"""Loschmidt echo under an imperfect phase-slip reversal.

Time reversal of the bipartite chain is a sudden phase program on the
amplitudes; a single wrong phase (pi/2 instead of pi at one site) makes it
imperfect.  The echo only suffers when the evolving excitation actually
probes the defective site, so the gauge field - which pushes everything to
the left edge - protects left-edge excitations and exposes right-edge ones.
"""

import numpy as np

from skinlab import (
    InitialState,
    LatticeParams,
    TimeGrid,
    asymmetric_chain,
    defect_profile,
    loschmidt_phase_echo,
)

n = 50
grid = TimeGrid(t_max=75.0, dt=0.02, stride=125)

print("== perfect program (all phases pi): echo pinned at one ==")
for h in (0.0, 0.3):
    p = LatticeParams(n_sites=n, h=h)
    tr = loschmidt_phase_echo(asymmetric_chain(p), np.full(n, np.pi),
                              InitialState.site(1), grid, params=p)
    print(f"  h = {h}: max |M - 1| = {np.max(np.abs(tr.values - 1.0)):.2e}")

print("\n== defect at the far edge, excitation on the left edge ==")
print("t (1/kappa) |  M(h=0)  |  M(h=0.3)")
curves = {}
for h in (0.0, 0.3):
    p = LatticeParams(n_sites=n, h=h)
    curves[h] = loschmidt_phase_echo(asymmetric_chain(p), defect_profile(n, n),
                                     InitialState.site(1), grid, params=p)
for i, t in enumerate(curves[0.0].times):
    print(f"  {t:5.1f}     |  {curves[0.0].values[i]:.4f}  |  {curves[0.3].values[i]:.4f}")
print("the h=0 echo drops once the front reaches the defect (t ~ 25); the "
      "gauge field keeps the excitation away from it")

print("\n== time-averaged echo over [0, 75] for all four corner cases ==")
for start in (1, n):
    for n0 in (n, 1):
        means = []
        for h in (0.0, 0.3):
            p = LatticeParams(n_sites=n, h=h)
            tr = loschmidt_phase_echo(asymmetric_chain(p), defect_profile(n, n0),
                                      InitialState.site(start), grid, params=p)
            means.append(tr.values.mean())
        trend = "protects" if means[1] > means[0] else "degrades"
        print(f"  excitation at site {start:2d}, defect at {n0:2d}: "
              f"h=0 -> {means[0]:.4f}, h=0.3 -> {means[1]:.4f}  (gauge {trend})")
