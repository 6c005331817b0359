"""GHZ states and the two noise models used throughout: isotropic mixing and
branch-coherence damping."""

from __future__ import annotations

import numpy as np

from qutritghz.qudit import DensityMatrix, StateVector


def _check_params(n: int, d: int) -> None:
    if n < 2 or d < 2:
        raise ValueError(f"GHZ state needs n >= 2 and d >= 2, got n={n}, d={d}")


def ghz_indices(n: int, d: int) -> np.ndarray:
    """Flattened indices of |j j ... j> for j = 0..d-1."""
    return np.arange(d) * sum(d**p for p in range(n))


def ghz_state(n: int, d: int) -> StateVector:
    """(1/sqrt(d)) * sum_j |j>^n."""
    _check_params(n, d)
    amps = np.zeros(d**n, dtype=complex)
    amps[ghz_indices(n, d)] = 1 / np.sqrt(d)
    return StateVector((d,) * n, amps)


def isotropic_mix(psi: StateVector, v: float) -> DensityMatrix:
    """v |psi><psi| + (1 - v) I / D."""
    if not 0 <= v <= 1:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    total = psi.dim
    rho = v * np.outer(psi.amplitudes, psi.amplitudes.conj()) + (1 - v) * np.eye(total) / total
    return DensityMatrix(psi.dims, rho)


def damped_ghz(n: int, d: int, branch_damping, phases=None) -> DensityMatrix:
    """GHZ density matrix with the (j, k) branch coherence scaled by ``branch_damping[j][k]``.

    ``phases`` optionally adds a relative phase ``exp(i phi_j)`` to branch j.
    Populations of the d branches are left at 1/d.
    """
    _check_params(n, d)
    lam = np.asarray(branch_damping, dtype=float)
    if lam.shape != (d, d):
        raise ValueError(f"branch damping must be {d}x{d}, got {lam.shape}")
    if not np.allclose(lam, lam.T, atol=1e-12):
        raise ValueError("branch damping matrix must be symmetric")
    if not np.allclose(np.diag(lam), 1.0, atol=1e-12):
        raise ValueError("branch damping diagonal must be 1")
    if lam.min() < 0 or lam.max() > 1:
        raise ValueError("branch damping factors must lie in [0, 1]")
    phase = np.ones(d, dtype=complex) if phases is None else np.exp(1j * np.asarray(phases, float))
    block = lam * np.outer(phase, phase.conj()) / d
    idx = ghz_indices(n, d)
    rho = np.zeros((d**n, d**n), dtype=complex)
    rho[np.ix_(idx, idx)] = block
    return DensityMatrix((d,) * n, rho)


def uniform_damping(d: int, lam: float) -> np.ndarray:
    """Damping matrix with every off-diagonal factor equal to ``lam``."""
    out = np.full((d, d), float(lam))
    np.fill_diagonal(out, 1.0)
    return out
