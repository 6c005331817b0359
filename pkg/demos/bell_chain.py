# Default three-party Bell functional: classical bound, quantum value, see-saw tiers.
from qutritghz.bell import (
    critical_visibility_bell,
    default_functional,
    ghz_value,
    lhv_max_bruteforce,
    white_noise_value,
    winning_residues,
)
from qutritghz.seesaw import SeesawConfig, seesaw_optimize

f = default_functional()
print("settings:", f.settings())
print("winning residues:", winning_residues(f))

lhv, strategy = lhv_max_bruteforce(f)
print(f"LHV max {lhv} with strategy {strategy}")
print(f"GHZ value {ghz_value(f):.6f}, white noise {white_noise_value(f):.6f}")
for name, bound in f.bounds.tiers():
    print(f"  {name:8s} {bound:.3f}  critical visibility {critical_visibility_bell(f, bound):.3f}")

# a handful of restarts is enough to see the qubit tier; the full search uses 200
res = seesaw_optimize(f, (2, 2, 2), SeesawConfig(restarts=10, seed=0))
print(f"see-saw (2,2,2): {res.best_value:.5f} (restart {res.best_restart}, monotone {res.monotone()})")
