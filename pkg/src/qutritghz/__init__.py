"""Numerical toolkit for qutrit GHZ witnesses, dimension-restricted Bell bounds,
finite-count statistics and path-identity state generation."""

from qutritghz.qudit import (
    DensityMatrix,
    Operator,
    StateVector,
    fidelity_with_pure,
    partial_trace,
    principal_eigenpair,
    tensor_product,
)
from qutritghz.states import damped_ghz, ghz_state, isotropic_mix
from qutritghz.measurement import (
    CountTable,
    MeasurementBasis,
    ProbabilityTable,
    computational_basis,
    fourier_basis,
    outcome_distribution,
    phased_fourier_basis,
    probability_table,
    project_trigger,
    sample_counts,
)
from qutritghz.witness import (
    WitnessResult,
    critical_visibility_witness,
    witness_from_counts,
    witness_W,
)
from qutritghz.bell import (
    BellFunctional,
    BoundChain,
    default_functional,
    bell_value,
    lhv_max_bruteforce,
)
from qutritghz.seesaw import SeesawConfig, seesaw_optimize
from qutritghz.stats import PValueQuery, kl_bernoulli, p_value, required_counts

__version__ = "0.1.0"
