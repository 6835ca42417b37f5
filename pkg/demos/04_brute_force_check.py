"""
Checking the fast solver against brute force
============================================

The fast solver only tracks the vacuum plus one excitation.  Here a small
XXZ chain with a field is also evolved in the full 2^N space, the last
qubit is traced out, and the averaged fidelity is rebuilt from the Pauli
transfer matrix and from a point set on the Bloch sphere.
"""

import numpy as np

from chainwave import ChainSpec, FermiOff, FermiOn
from chainwave.fidelity import simulate
from chainwave.oracle import (bloch_average_quadrature, full_space_channel,
                              full_space_fidelity_trace)

spec = ChainSpec(6, j_z=0.3, b=0.5)
first, last = FermiOn(0.0, 0.5), FermiOff(4.0, 0.5)
t_end = 7.0

trace = simulate(spec, first, last, t_end)
t, f_full, leak = full_space_fidelity_trace(spec, first, last, t_end, trace.meta["dt"])
print(f"largest fidelity gap over {len(t)} time points: {np.max(np.abs(f_full - trace.f_avg)):.2e}")
print(f"weight leaked into multi-excitation states: {leak:.1e}")

channel = full_space_channel(spec, first, last, t_end, trace.meta["dt"])
q = bloch_average_quadrature(channel, 5000)
print(f"closed form {trace.f_avg[-1]:.8f}  vs  5000-point sphere average {q:.8f}")
