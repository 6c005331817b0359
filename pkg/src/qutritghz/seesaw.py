"""See-saw lower bounds on the quantum value of a Bell functional in fixed local dimensions.

Measurements are stored per party as an array ``M[x, a]`` of shape
``(m, k, d, d)``. One sweep updates every party's POVMs given the others
and the shared pure state, then replaces the state by the principal
eigenvector of the Bell operator. Each step is a maximization, so the
recorded value never decreases.
"""

from __future__ import annotations

import string
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

from qutritghz.bell import BellFunctional
from qutritghz.qudit import Operator, StateVector, fix_global_phase

_LETTERS = string.ascii_letters


def _subscripts(n: int):
    """Einsum letters: outcomes, settings, bra (row) and ket (column) indices per party."""
    it = iter(_LETTERS)
    outs = [next(it) for _ in range(n)]
    sets = [next(it) for _ in range(n)]
    rows = [next(it) for _ in range(n)]
    cols = [next(it) for _ in range(n)]
    return outs, sets, rows, cols


def bell_operator(f: BellFunctional, measurements) -> Operator:
    """B = sum c(a|x) M_{a_0|x_0} (x) ... (x) M_{a_n|x_n}."""
    n = f.n
    _check_shapes(f, measurements)
    outs, sets, rows, cols = _subscripts(n)
    terms = ["".join(outs + sets)] + [sets[p] + outs[p] + rows[p] + cols[p] for p in range(n)]
    spec = ",".join(terms) + "->" + "".join(rows + cols)
    t = np.einsum(spec, f.coefficients, *measurements, optimize=True)
    dims = tuple(m.shape[-1] for m in measurements)
    total = int(np.prod(dims))
    return Operator(dims, t.reshape(total, total))


def _check_shapes(f: BellFunctional, measurements) -> None:
    scen = f.scenario
    if len(measurements) != scen.n:
        raise ValueError(f"need measurements for {scen.n} parties, got {len(measurements)}")
    for p, m in enumerate(measurements):
        if m.ndim != 4 or m.shape[:2] != (scen.m, scen.k) or m.shape[2] != m.shape[3]:
            raise ValueError(f"party {p} measurements have shape {m.shape}, expected ({scen.m}, {scen.k}, d, d)")


def steering_operators(f: BellFunctional, psi: StateVector, measurements, party: int) -> np.ndarray:
    """R[x, a] on ``party``'s space with Bell value = sum_{x,a} tr(M[x, a] R[x, a])."""
    n = f.n
    _check_shapes(f, measurements)
    outs, sets, rows, cols = _subscripts(n)
    others = [q for q in range(n) if q != party]
    k_terms = ["".join(outs + sets)] + [sets[q] + outs[q] + rows[q] + cols[q] for q in others]
    k_out = sets[party] + outs[party] + "".join(rows[q] + cols[q] for q in others)
    kernel = np.einsum(",".join(k_terms) + "->" + k_out, f.coefficients, *[measurements[q] for q in others], optimize=True)
    psi_t = psi.tensor()
    spec = (
        f"{''.join(rows)},{k_out},{''.join(cols)}"
        f"->{sets[party]}{outs[party]}{cols[party]}{rows[party]}"
    )
    return np.einsum(spec, psi_t.conj(), kernel, psi_t, optimize=True)


def _inv_sqrt_psd(g: np.ndarray, eps: float = 1e-14):
    """Batched pseudo-inverse square root and support projector of PSD matrices."""
    w, v = np.linalg.eigh(g)
    keep = w > eps * max(1.0, float(np.max(w)))
    inv = np.where(keep, 1 / np.sqrt(np.where(keep, w, 1.0)), 0.0)
    vh = v.conj().swapaxes(-1, -2)
    return (v * inv[..., None, :]) @ vh, (v * keep[..., None, :]) @ vh


def _psd_factor(P: np.ndarray) -> np.ndarray:
    """A with A A^dag equal to the PSD part of P."""
    w, v = np.linalg.eigh(_hermitize(P))
    return v * np.sqrt(np.clip(w, 0.0, None))[..., None, :]


def _povm_values(P, R) -> np.ndarray:
    return np.real(np.einsum("xaij,xaji->x", P, R))


def _hermitize(P):
    return (P + P.conj().swapaxes(-1, -2)) / 2


def optimal_povm(R: np.ndarray, start: np.ndarray | None = None, iters: int = 2000, tol: float = 1e-11):
    """Maximize sum_a tr(M_a R_a) over POVMs, independently for each setting x.

    ``R`` has shape (m, k, d, d). The fixed-point iteration
    ``M_a <- G^{-1/2} R_a M_a R_a G^{-1/2}`` with ``G = sum_a R_a M_a R_a``
    keeps every iterate a valid POVM; it is run from ``start`` and from the
    trivial POVM ``I/k``, and per setting the better result wins. The
    returned value is never below that of ``start``.
    """
    R = _hermitize(np.asarray(R, dtype=complex))
    m, k, d, _ = R.shape
    # shift to PSD; this adds the same constant d*shift to every POVM's value
    lo = np.linalg.eigvalsh(R).min(axis=(1, 2))
    R = R + np.maximum(-lo, 0.0)[:, None, None, None] * np.eye(d)

    starts = [np.broadcast_to(np.eye(d) / np.sqrt(k), R.shape).astype(complex)]
    if start is not None:
        starts.insert(0, _psd_factor(np.asarray(start, dtype=complex)))
    best_p, best_v = None, None
    eye = np.eye(d)
    for a in starts:
        # iterate on factors A_a with M_a = A_a A_a^dag so every iterate stays PSD
        p = a @ a.conj().swapaxes(-1, -2)
        v = _povm_values(p, R)
        for _ in range(iters):
            ra = R @ a
            s, support = _inv_sqrt_psd(np.einsum("xaij,xakj->xik", ra, ra.conj()))
            a = s[:, None] @ ra
            p = a @ a.conj().swapaxes(-1, -2)
            # directions outside the support of G go to outcome 0
            p[:, 0] += eye - support
            nv = _povm_values(p, R)
            done = np.max(np.abs(nv - v)) < tol
            v = nv
            if done:
                break
        if best_v is None:
            best_p, best_v = p, v
        else:
            better = v > best_v
            best_p = np.where(better[:, None, None, None], p, best_p)
            best_v = np.where(better, v, best_v)
    if start is not None:
        v0 = _povm_values(np.asarray(start, dtype=complex), R)
        keep_old = best_v < v0
        best_p = np.where(keep_old[:, None, None, None], start, best_p)
    return best_p


def measurement_update(f: BellFunctional, party: int, psi: StateVector, measurements, **kwargs) -> np.ndarray:
    R = steering_operators(f, psi, measurements, party)
    return optimal_povm(R, measurements[party], **kwargs)


def state_update(B: Operator) -> StateVector:
    w, v = np.linalg.eigh(B.matrix)
    return StateVector(B.dims, fix_global_phase(v[:, -1]), normalize=True)


@dataclass(frozen=True)
class Strategy:
    dims: tuple
    state: StateVector
    measurements: tuple

    def value(self, f: BellFunctional) -> float:
        return bell_operator(f, list(self.measurements)).expectation(self.state)

    def check(self, tol: float = 1e-9) -> None:
        """Raise ValueError unless every POVM element is PSD and each setting sums to identity."""
        for p, M in enumerate(self.measurements):
            d = M.shape[-1]
            if not np.allclose(M, M.conj().swapaxes(-1, -2), atol=tol):
                raise ValueError(f"party {p}: POVM elements not Hermitian")
            if np.linalg.eigvalsh(_hermitize(M)).min() < -tol:
                raise ValueError(f"party {p}: POVM element not PSD")
            if not np.allclose(M.sum(axis=1), np.eye(d), atol=tol):
                raise ValueError(f"party {p}: POVM not complete")
        if abs(np.linalg.norm(self.state.amplitudes) - 1) > tol:
            raise ValueError("state not normalized")

    def to_dict(self) -> dict:
        amps = self.state.amplitudes
        return {
            "dims": list(self.dims),
            "state": {"real": amps.real.tolist(), "imag": amps.imag.tolist()},
            "measurements": [{"real": M.real.tolist(), "imag": M.imag.tolist()} for M in self.measurements],
        }


@dataclass(frozen=True)
class SeesawConfig:
    restarts: int = 200
    max_sweeps: int = 300
    tol: float = 1e-10
    seed: int = 0
    workers: int = 1
    povm_iters: int = 2000
    povm_tol: float = 1e-11

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")


@dataclass
class SeesawResult:
    best_value: float
    best_strategy: Strategy
    best_restart: int
    traces: list = field(repr=False)
    sweeps: list = field(repr=False)
    config: SeesawConfig | None = None

    @property
    def finals(self) -> list[float]:
        return [float(t[-1]) for t in self.traces]

    def monotone(self, slack: float = 1e-12) -> bool:
        return all(np.all(np.diff(t) >= -slack) for t in self.traces)

    def to_dict(self) -> dict:
        return {
            "best_value": self.best_value,
            "best_restart": self.best_restart,
            "finals": self.finals,
            "sweeps": list(self.sweeps),
            "monotone": self.monotone(),
            "config": None if self.config is None else vars(self.config),
            "best_strategy": self.best_strategy.to_dict(),
        }


def _seed_measurement(m: int, k: int, d: int) -> np.ndarray:
    """Projective seed: outcome a < k-1 gets |a><a|, the last outcome the rest of the identity."""
    M = np.zeros((m, k, d, d), dtype=complex)
    for a in range(min(k - 1, d)):
        M[:, a, a, a] = 1
    M[:, k - 1] = np.eye(d) - M[:, : k - 1].sum(axis=1)
    return M


def random_measurements(f: BellFunctional, d: int, rng) -> np.ndarray:
    """Haar-random local unitaries applied to the projective seed measurement, per setting."""
    scen = f.scenario
    M = _seed_measurement(scen.m, scen.k, d)
    for x in range(scen.m):
        u = unitary_group.rvs(d, random_state=rng) if d > 1 else np.eye(1)
        M[x] = u @ M[x] @ u.conj().T
    return M


def random_state(dims, rng) -> StateVector:
    total = int(np.prod(dims))
    z = rng.normal(size=total) + 1j * rng.normal(size=total)
    return StateVector(dims, z, normalize=True)


def seesaw_run(f: BellFunctional, dims, config: SeesawConfig, restart: int):
    """One restart; returns (value trace, Strategy, sweeps used)."""
    dims = tuple(int(d) for d in dims)
    rng = np.random.default_rng(config.seed ^ restart)
    meas = [random_measurements(f, d, rng) for d in dims]
    psi = random_state(dims, rng)
    trace = [bell_operator(f, meas).expectation(psi)]
    sweeps = 0
    for sweeps in range(1, config.max_sweeps + 1):
        start = trace[-1]
        for p in range(f.n):
            meas[p] = measurement_update(f, p, psi, meas, iters=config.povm_iters, tol=config.povm_tol)
            trace.append(bell_operator(f, meas).expectation(psi))
        B = bell_operator(f, meas)
        psi = state_update(B)
        trace.append(B.expectation(psi))
        if trace[-1] - start < config.tol:
            break
    return np.array(trace), Strategy(dims, psi, tuple(meas)), sweeps


def _run_restart(args):
    f, dims, config, restart = args
    return seesaw_run(f, dims, config, restart)


def seesaw_optimize(f: BellFunctional, dims, config: SeesawConfig | None = None) -> SeesawResult:
    """Best see-saw value over ``config.restarts`` independent restarts.

    The winner is the first restart (lowest index) within 1e-12 of the
    maximum final value, so the result does not depend on ``workers``.
    """
    config = config or SeesawConfig()
    dims = tuple(int(d) for d in dims)
    if len(dims) != f.n or min(dims) < 2:
        raise ValueError(f"dims {dims} do not fit a {f.n}-party functional")
    jobs = [(f, dims, config, r) for r in range(config.restarts)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            runs = list(pool.map(_run_restart, jobs))
    else:
        runs = [_run_restart(j) for j in jobs]
    finals = np.array([t[-1] for t, _, _ in runs])
    top = finals.max()
    best = int(np.flatnonzero(finals >= top - 1e-12)[0])
    return SeesawResult(
        best_value=float(finals[best]),
        best_strategy=runs[best][1],
        best_restart=best,
        traces=[t for t, _, _ in runs],
        sweeps=[s for _, _, s in runs],
        config=config,
    )
