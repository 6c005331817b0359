"""Two-basis GHZ witness, GHZ fidelity decomposition and subspace parity estimates."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Mapping

import numpy as np

from qutritghz.measurement import (
    CountTable,
    computational_basis,
    fourier_basis,
    outcome_distribution,
)
from qutritghz.qudit import DensityMatrix, as_density, fidelity_with_pure
from qutritghz.states import ghz_state

WITNESS_THRESHOLD = 5 / 3
BISEPARABLE_FIDELITY = 2 / 3

COMPUTATIONAL = "C"
FOURIER = "F"


def witness_settings(n: int):
    return (COMPUTATIONAL,) * n, (FOURIER,) * n


@dataclass(frozen=True)
class WitnessResult:
    p_identical: float
    p_sum_zero: float
    n: int
    d: int
    threshold: float = WITNESS_THRESHOLD
    biseparable_fidelity: float = BISEPARABLE_FIDELITY
    totals: dict = field(default_factory=dict)

    @property
    def W(self) -> float:
        return self.p_identical + self.p_sum_zero

    @property
    def fidelity_lower_bound(self) -> float:
        return self.W - 1

    @property
    def violated(self) -> bool:
        return self.W > self.threshold

    @property
    def certified(self) -> bool:
        """The 5/3 threshold only carries its meaning for qutrits."""
        return self.d == 3

    def to_dict(self) -> dict:
        out = asdict(self)
        out["totals"] = {"".join(k): v for k, v in self.totals.items()}
        out.update(
            W=self.W,
            fidelity_lower_bound=self.fidelity_lower_bound,
            violated=self.violated,
            certified=self.certified,
        )
        return out


def _all_equal_mask(n: int, d: int) -> np.ndarray:
    grids = np.indices((d,) * n)
    return np.all(grids == grids[0], axis=0)


def _sum_zero_mask(n: int, d: int) -> np.ndarray:
    return np.indices((d,) * n).sum(axis=0) % d == 0


def p_identical(state, n: int, d: int) -> float:
    """Probability that all parties return the same computational outcome."""
    probs = outcome_distribution(state, [computational_basis(d)] * n)
    return float(probs[_all_equal_mask(n, d)].sum())


def p_sum_zero(state, n: int, d: int) -> float:
    """Probability that the Fourier outcomes sum to 0 mod d."""
    probs = outcome_distribution(state, [fourier_basis(d)] * n)
    return float(probs[_sum_zero_mask(n, d)].sum())


def _warn_uncertified(d: int) -> None:
    if d != 3:
        warnings.warn(f"W computed for d={d}; the 5/3 threshold has no certification meaning here")


def witness_W(state, n: int, d: int) -> WitnessResult:
    _warn_uncertified(d)
    return WitnessResult(p_identical(state, n, d), p_sum_zero(state, n, d), n, d)


def witness_from_counts(counts: CountTable) -> WitnessResult:
    """Plug-in frequency estimate of W from the all-C and all-F settings."""
    n = counts.n_parties
    d = counts.outcomes[0]
    _warn_uncertified(d)
    comp, four = witness_settings(n)
    totals = {}
    for s in (comp, four):
        if s not in counts:
            raise KeyError(f"count table lacks witness setting {s}")
        totals[s] = counts.total(s)
        if totals[s] == 0:
            raise ValueError(f"witness setting {s} has zero counts")
    p_id = counts[comp][_all_equal_mask(n, d)].sum() / totals[comp]
    p_sz = counts[four][_sum_zero_mask(n, d)].sum() / totals[four]
    return WitnessResult(float(p_id), float(p_sz), n, d, totals=totals)


def white_noise_witness(n: int, d: int) -> float:
    return witness_W(DensityMatrix.maximally_mixed((d,) * n), n, d).W


def critical_visibility_witness(n: int, d: int = 3, threshold: float = WITNESS_THRESHOLD) -> float:
    """Smallest isotropic visibility at which W reaches ``threshold``."""
    ideal = witness_W(ghz_state(n, d), n, d).W
    white = white_noise_witness(n, d)
    return (threshold - white) / (ideal - white)


def critical_visibility_witness_exact(n: int, d: int = 3) -> Fraction:
    """Rational form of :func:`critical_visibility_witness` for the ideal GHZ state."""
    white = Fraction(1, d ** (n - 1)) + Fraction(1, d)
    return (Fraction(5, 3) - white) / (2 - white)


@dataclass(frozen=True)
class FidelityDecomposition:
    populations: np.ndarray
    coherences: dict
    fidelity: float


def ghz_fidelity_decomposition(rho, n: int, d: int) -> FidelityDecomposition:
    """GHZ fidelity from the d populations <j..j|rho|j..j> and Re<i..i|rho|j..j>, i < j."""
    rho = as_density(rho)
    stride = sum(d**p for p in range(n))
    idx = np.arange(d) * stride
    pops = np.real(rho.matrix[idx, idx])
    coh = {(i, j): float(np.real(rho.matrix[idx[i], idx[j]])) for i, j in itertools.combinations(range(d), 2)}
    fidelity = (pops.sum() + 2 * sum(coh.values())) / d
    return FidelityDecomposition(pops, coh, float(fidelity))


def _subspace_paulis(i: int, j: int, d: int) -> dict[str, np.ndarray]:
    x = np.zeros((d, d), dtype=complex)
    y = np.zeros((d, d), dtype=complex)
    x[i, j] = x[j, i] = 1
    y[i, j], y[j, i] = -1j, 1j
    return {"X": x, "Y": y}


def parity_strings(n: int) -> list[str]:
    return ["".join(s) for s in itertools.product("XY", repeat=n)]


def parity_expectations(rho, i: int, j: int) -> dict[str, float]:
    """Exact <P_1 ... P_n> for every X/Y string embedded in the {i, j} subspace."""
    rho = as_density(rho)
    d = rho.dims[0]
    ops = _subspace_paulis(i, j, d)
    out = {}
    for s in parity_strings(rho.n_parties):
        op = reduce(np.kron, [ops[c] for c in s])
        out[s] = float(np.real(np.trace(rho.matrix @ op)))
    return out


def coherence_from_parities(expectations: Mapping[str, float], n: int) -> float:
    """Re<i^n|rho|j^n> = 2**-n * sum over strings with even #Y of (-1)**(#Y/2) <string>."""
    total = 0.0
    for s in parity_strings(n):
        ny = s.count("Y")
        if ny % 2:
            continue
        if s not in expectations:
            raise KeyError(f"missing parity expectation {s}")
        total += (-1) ** (ny // 2) * expectations[s]
    return total / 2**n


def coherence_imag_from_parities(expectations: Mapping[str, float], n: int) -> float:
    """Im<i^n|rho|j^n> from the odd-#Y strings."""
    total = 0.0
    for s in parity_strings(n):
        ny = s.count("Y")
        if ny % 2 == 0:
            continue
        if s not in expectations:
            raise KeyError(f"missing parity expectation {s}")
        total -= (-1) ** (ny // 2) * expectations[s]
    return total / 2**n


def ghz_fidelity(rho, n: int, d: int) -> float:
    return fidelity_with_pure(rho, ghz_state(n, d))
