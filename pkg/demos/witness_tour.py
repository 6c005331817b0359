# Two-basis witness on noisy qutrit GHZ states.
import numpy as np

from qutritghz.states import ghz_state, isotropic_mix
from qutritghz.witness import critical_visibility_witness, ghz_fidelity, witness_W

for n in (3, 4):
    g = ghz_state(n, 3)
    print(f"n={n}  ideal W = {witness_W(g, n, 3).W:.6f}")
    print(f"      critical visibility = {critical_visibility_witness(n):.5f}")

# W drops linearly with visibility; the fidelity bound W - 1 trails the true fidelity
g = ghz_state(3, 3)
for v in np.linspace(0.7, 1.0, 4):
    rho = isotropic_mix(g, v)
    res = witness_W(rho, 3, 3)
    print(f"v={v:.2f}  W={res.W:.4f}  F>={res.fidelity_lower_bound:.4f}  F={ghz_fidelity(rho, 3, 3):.4f}  violated={res.violated}")
