# Sampling the witness with a finite shot budget and judging the result.
import numpy as np

from qutritghz.measurement import probability_table, sample_counts
from qutritghz.states import ghz_state, isotropic_mix
from qutritghz.stats import PValueQuery, required_counts, stderr_witness
from qutritghz.witness import witness_settings, witness_W

v = (1.849 - 4 / 9) / (2 - 4 / 9)  # visibility giving W = 1.849 exactly
rho = isotropic_mix(ghz_state(3, 3), v)
print(f"v = {v:.5f}, exact W = {witness_W(rho, 3, 3).W:.4f}")

pt = probability_table(rho, witness_settings(3))
counts = sample_counts(pt, 571, seed=0)
est = stderr_witness(counts)
q = PValueQuery(est.value, 5 / 3, 2, est.n)
print(f"estimate {est.value:.4f} +- {est.stderr:.4f} over {est.n} shots")
print(q.report(sigma=est.stderr))

# how much data a given violation needs
for target in (1e-3, 1e-5, 1e-10):
    print(f"delta 0.05, p <= {target:g}: N = {required_counts(0.05, 5 / 3, 2, target)}")

ws = [stderr_witness(sample_counts(pt, 571, seed=s)).value for s in range(200)]
print(f"spread over 200 seeds: {np.std(ws, ddof=1):.4f}")
