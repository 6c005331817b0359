"""Dense linear algebra on tensor products of qudits.

Flattened indices are row-major over parties: party 0 is the most
significant digit, so for dims ``(3, 3)`` the basis state ``|1 2>`` sits
at index ``1 * 3 + 2 = 5``. Every constructor below copies its input and
marks the array read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

TOL = 1e-9


def _frozen(array, dtype=complex) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out


def _check_dims(dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise ValueError("at least one party is required")
    if any(d < 2 for d in dims):
        raise ValueError(f"local dimensions must be >= 2, got {dims}")
    return dims


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state on ``dims``."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __init__(self, dims: Sequence[int], amplitudes, normalize: bool = False):
        dims = _check_dims(dims)
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if amps.size != int(np.prod(dims)):
            raise ValueError(f"{amps.size} amplitudes do not fit dims {dims}")
        norm = np.linalg.norm(amps)
        if normalize:
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        elif abs(norm**2 - 1) > TOL:
            raise ValueError(f"state is not normalized (|psi|^2 = {norm**2:.3e})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def basis(cls, dims: Sequence[int], digits: Sequence[int]) -> "StateVector":
        dims = _check_dims(dims)
        amps = np.zeros(int(np.prod(dims)), dtype=complex)
        amps[np.ravel_multi_index(tuple(digits), dims)] = 1.0
        return cls(dims, amps)

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def projector(self) -> "DensityMatrix":
        return DensityMatrix(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class Operator:
    """Square matrix acting on ``dims``; no positivity or trace requirement."""

    dims: tuple[int, ...]
    matrix: np.ndarray

    def __init__(self, dims: Sequence[int], matrix):
        dims = _check_dims(dims)
        mat = np.asarray(matrix, dtype=complex)
        total = int(np.prod(dims))
        if mat.shape != (total, total):
            raise ValueError(f"matrix shape {mat.shape} does not match dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", _frozen(mat))

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_hermitian(self, tol: float = TOL) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, atol=tol, rtol=0))

    def expectation(self, psi: StateVector) -> float:
        if psi.dims != self.dims:
            raise ValueError(f"dims mismatch: {psi.dims} vs {self.dims}")
        return float(np.real(psi.amplitudes.conj() @ self.matrix @ psi.amplitudes))


class DensityMatrix(Operator):
    """Operator with the state invariants: Hermitian, unit trace, PSD (tolerance 1e-9)."""

    def __init__(self, dims: Sequence[int], matrix, check: bool = True):
        super().__init__(dims, matrix)
        if check:
            m = self.matrix
            if not self.is_hermitian():
                raise ValueError("density matrix is not Hermitian")
            tr = np.trace(m).real
            if abs(tr - 1) > TOL:
                raise ValueError(f"density matrix trace is {tr}, expected 1")
            lo = np.linalg.eigvalsh((m + m.conj().T) / 2)[0]
            if lo < -TOL:
                raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> "DensityMatrix":
        dims = _check_dims(dims)
        total = int(np.prod(dims))
        return cls(dims, np.eye(total) / total)

    def tensor(self) -> np.ndarray:
        """Entries reshaped to ``dims + dims`` (row indices first)."""
        return self.matrix.reshape(self.dims + self.dims)


def as_density(state) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, StateVector):
        return state.projector()
    raise TypeError(f"expected StateVector or DensityMatrix, got {type(state).__name__}")


def tensor_product(a, b):
    """Kronecker product; ``a`` supplies the most significant index."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(a.dims + b.dims, np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(a.dims + b.dims, np.kron(a.matrix, b.matrix))
    if isinstance(a, Operator) and isinstance(b, Operator):
        return Operator(a.dims + b.dims, np.kron(a.matrix, b.matrix))
    raise TypeError(
        f"cannot tensor {type(a).__name__} with {type(b).__name__}; operands must be the same kind"
    )


def partial_trace(rho, keep) -> DensityMatrix:
    """Reduce ``rho`` to the parties listed in ``keep`` (kept in ascending order)."""
    rho = as_density(rho)
    n = rho.n_parties
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"party indices {keep} out of range for {n} parties")
    t = rho.tensor()
    traced = [p for p in range(n) if p not in keep]
    # einsum labels: rows use letters[0:n], columns letters[n:2n]; traced parties share a label
    letters = [chr(ord("a") + i) for i in range(2 * n)]
    cols = list(letters[n:])
    for p in traced:
        cols[p] = letters[p]
    out = "".join(letters[p] for p in keep) + "".join(cols[p] for p in keep)
    reduced = np.einsum("".join(letters[:n]) + "".join(cols) + "->" + out, t)
    kdims = tuple(rho.dims[p] for p in keep)
    total = int(np.prod(kdims))
    return DensityMatrix(kdims, reduced.reshape(total, total))


def fidelity_with_pure(rho, psi: StateVector) -> float:
    """<psi|rho|psi> for a density matrix (or pure state) ``rho``."""
    rho = as_density(rho)
    if rho.dims != psi.dims:
        raise ValueError(f"profile mismatch: {rho.dims} vs {psi.dims}")
    value = psi.amplitudes.conj() @ rho.matrix @ psi.amplitudes
    if abs(value.imag) > 1e-12:
        raise ValueError("fidelity has an imaginary part; rho is not Hermitian")
    return float(min(max(value.real, 0.0), 1.0))


def fix_global_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate ``vec`` so its largest-magnitude entry (first on ties) is real positive."""
    vec = np.asarray(vec, dtype=complex)
    mags = np.abs(vec)
    idx = int(np.argmax(mags >= mags.max() - 1e-12))
    if mags[idx] == 0:
        return vec
    return vec * (abs(vec[idx]) / vec[idx])


def principal_eigenpair(op) -> tuple[float, StateVector]:
    """Largest eigenvalue of a Hermitian operator and a unit eigenvector.

    Uses a dense Hermitian eigensolver. The eigenvector's phase is fixed
    so that its largest-magnitude amplitude is real and positive.
    """
    if not isinstance(op, Operator):
        raise TypeError("principal_eigenpair expects an Operator")
    if not op.is_hermitian():
        raise ValueError("operator is not Hermitian")
    m = op.matrix
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    vec = fix_global_phase(vecs[:, -1])
    return float(vals[-1]), StateVector(op.dims, vec, normalize=True)
