"""Fidelity decay: acceleration for a quench, deceleration for a packet.

The same edge coupling destroys a quenched eigenstate faster at finite
gauge field, yet protects a right-edge wave packet: the reference state is
amplified while the correction seeded at the far edge is attenuated, so the
normalized overlap stays near one until the excitation has crossed the
whole chain.
"""

import numpy as np

from skinlab import (
    InitialState,
    LatticeParams,
    TimeGrid,
    asymmetric_chain,
    fidelity_trace,
    perturbed_ring,
    transport_diagnostics,
)

grid = TimeGrid(t_max=40.0, dt=0.01, stride=100)
print("t (1/kappa) | quench h=0 | quench h=0.3 | packet h=0 | packet h=0.3")
traces = {}
for h in (0.0, 0.3):
    p = LatticeParams(n_sites=50, h=h, epsilon=0.3)
    ham, ring = asymmetric_chain(p), perturbed_ring(p)
    traces[("quench", h)] = fidelity_trace(ham, ring, InitialState.eigenstate(1), grid, params=p)
    traces[("packet", h)] = fidelity_trace(ham, ring, InitialState.site(49), grid, params=p)

times = traces[("quench", 0.0)].times
for i in range(0, times.size, 4):
    row = [traces[(kind, h)].values[i] for kind in ("quench", "packet") for h in (0.0, 0.3)]
    print(f"  {times[i]:5.1f}     |   {row[0]:.4f}   |    {row[1]:.4f}    |"
          f"   {row[2]:.4f}  |   {row[3]:.4f}")

v_g, t1 = transport_diagnostics(LatticeParams(n_sites=50, h=0.3))
print(f"\npacket protection ends at the transit time t1 = N/v_g = {t1:.1f}/kappa "
      f"(v_g = 2 kappa cosh h = {v_g:.3f})")
