"""Exhaustive landscape of the 4x4 toy and the spectral gap as beta grows."""

import math

from hidden_ising.dynamics import spectral_gap
from hidden_ising.landscape import landscape_report, toy_spec

spec = toy_spec()
rep = landscape_report(spec)
print(f"{rep.state_count} states, {len(rep.stable_set)} ground states at {rep.energy(rep.stable_set[0])}")
print(f"max stability level {rep.gamma_m}, deepest return to a ground state {rep.gamma_tilde}")
for beta in (3.0, 4.0, 5.0, 6.0):
    gap = spectral_gap(spec, beta).gap
    print(f"beta {beta}: gap {gap:.3e}  -log(gap)/beta {-math.log(gap) / beta:.3f}")
