# Post-selected path-identity source: ideal output, distinguishability, trigger.
import numpy as np

from qutritghz.optics import (
    MEASURED_OVERLAPS,
    PhotonOverlap,
    hom_coincidence,
    simulate_postselected,
    trigger_to_three,
)
from qutritghz.qudit import fidelity_with_pure
from qutritghz.states import ghz_state

ideal = simulate_postselected()
print(f"coincidence probability {ideal.success_probability:.4f}, fidelity {ideal.fidelity():.6f}")

real = simulate_postselected(overlaps=MEASURED_OVERLAPS)
print("branch damping:\n", np.round(real.damping, 4))
print(f"fidelity with measured overlaps {real.fidelity():.5f}")

rho3, p = trigger_to_three(real.state)
print(f"trigger probability {p:.4f}, three-qutrit fidelity {fidelity_with_pure(rho3, ghz_state(3, 3)):.5f}")

for s in (1.0, 0.9, 0.5, 0.0):
    f = simulate_postselected(overlaps=PhotonOverlap.from_triple(s, s, 1.0)).fidelity()
    print(f"s={s:.1f}  HOM dip floor {hom_coincidence(s, 0):.3f}  fidelity {f:.4f}")
