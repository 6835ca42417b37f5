"""
Mapping the ramp parameters
===========================

Scan the ramp width tau and the switch-off time t_f, then polish the best
cell.  The coarse grid below runs in a few seconds; widen it for a proper
map (the ``chainwave sweep`` command writes the same data to CSV).
"""

import numpy as np

from chainwave import ChainSpec
from chainwave.fidelity import static_first_maximum
from chainwave.sweep import optimize_fermi, sweep_powerlaw

chain = ChainSpec(10)
f0 = static_first_maximum(chain).f_first_max

taus = np.linspace(0.2, 1.4, 7)
tfs = np.linspace(5.0, 7.5, 6)
best, grid = optimize_fermi(chain, taus, tfs, "stationary", threads=4)

print("frozen fidelity minus static F0 (rows: tau, columns: t_f)")
print("        " + " ".join(f"{tf:6.2f}" for tf in tfs))
for tau, row in zip(taus, grid):
    print(f"{tau:6.2f}  " + " ".join(f"{v - f0:+6.3f}" for v in row))
print(f"refined optimum F_d = {best.value:.4f} at tau = {best.tau:.3f}, t_f = {best.t_f:.3f}")

# power-law ramps: coarse grid only (budget 1) to keep the demo quick
for p in sweep_powerlaw(chain, [0.25, 1.0], 1, tau_grid=np.linspace(1, 4, 4),
                        tf_grid=np.linspace(1, 5, 5)):
    print(f"power law a = {p.a:.2f}: first maximum {p.f_first_max:.4f}")
