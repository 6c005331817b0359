import itertools

import numpy as np
import pytest

from qutritghz.bell import BellFunctional, BellScenario, bell_value, default_functional
from qutritghz.measurement import phased_fourier_basis, probability_table
from qutritghz.qudit import StateVector
from qutritghz.seesaw import (
    SeesawConfig,
    Strategy,
    bell_operator,
    optimal_povm,
    random_measurements,
    random_state,
    seesaw_optimize,
    seesaw_run,
    state_update,
    steering_operators,
)
from qutritghz.states import ghz_state


@pytest.fixture(scope="module")
def f():
    return default_functional()


def ideal_measurements():
    M = np.zeros((3, 3, 3, 3), dtype=complex)
    for x in range(3):
        b = phased_fourier_basis(3, x).vectors
        for a in range(3):
            M[x, a] = np.outer(b[a], b[a].conj())
    return [M] * 3


def test_bell_operator_ghz_eigenvalue(f):
    B = bell_operator(f, ideal_measurements())
    assert B.is_hermitian()
    assert np.linalg.eigvalsh(B.matrix).max() == pytest.approx(9, abs=1e-9)
    assert B.expectation(ghz_state(3, 3)) == pytest.approx(9, abs=1e-9)


def test_bell_operator_matches_table(f):
    rng = np.random.default_rng(3)
    meas = [random_measurements(f, d, rng) for d in (2, 3, 2)]
    psi = random_state((2, 3, 2), rng)
    # oracle: Born rule term by term
    rho = np.outer(psi.amplitudes, psi.amplitudes.conj())
    total = 0.0
    for s in f.settings():
        for a in itertools.product(range(3), repeat=3):
            c = f.coefficients[a + s]
            if c:
                op = np.kron(np.kron(meas[0][s[0], a[0]], meas[1][s[1], a[1]]), meas[2][s[2], a[2]])
                total += c * np.trace(rho @ op).real
    assert bell_operator(f, meas).expectation(psi) == pytest.approx(total, abs=1e-10)


def test_bell_operator_linear(f):
    rng = np.random.default_rng(4)
    meas = [random_measurements(f, 2, rng) for _ in range(3)]
    g = BellFunctional(f.scenario, rng.normal(size=f.scenario.shape))
    B1, B2 = bell_operator(f, meas), bell_operator(g, meas)
    h = BellFunctional(f.scenario, 2 * f.coefficients - 0.5 * g.coefficients)
    assert np.allclose(bell_operator(h, meas).matrix, 2 * B1.matrix - 0.5 * B2.matrix)


def test_bell_operator_shape_errors(f):
    with pytest.raises(ValueError):
        bell_operator(f, ideal_measurements()[:2])
    with pytest.raises(ValueError):
        bell_operator(f, [np.zeros((2, 3, 3, 3))] * 3)


def test_steering_operators_reproduce_value(f):
    rng = np.random.default_rng(5)
    meas = [random_measurements(f, d, rng) for d in (2, 2, 3)]
    psi = random_state((2, 2, 3), rng)
    value = bell_operator(f, meas).expectation(psi)
    for p in range(3):
        R = steering_operators(f, psi, meas, p)
        assert np.real(np.einsum("xaij,xaji->", meas[p], R)) == pytest.approx(value, abs=1e-10)


def test_optimal_povm_dominant_outcome():
    # R_0 dominates the others everywhere: the optimum puts all weight on outcome 0
    R = np.zeros((1, 3, 2, 2), dtype=complex)
    R[0, 0] = np.diag([3.0, 2.0])
    R[0, 1] = np.diag([1.0, 1.0])
    P = optimal_povm(R)
    assert np.allclose(P[0, 0], np.eye(2), atol=1e-6)


def test_optimal_povm_diagonal_oracle():
    # commuting diagonal R: optimum = sum over basis states of the best outcome (by enumeration)
    rng = np.random.default_rng(6)
    for _ in range(5):
        diag = rng.normal(size=(2, 3, 3))
        R = np.zeros((2, 3, 3, 3), dtype=complex)
        for x, a in itertools.product(range(2), range(3)):
            R[x, a] = np.diag(diag[x, a])
        best = max(sum(diag[x, assign[i], i] for i in range(3)) for x in [0] for assign in itertools.product(range(3), repeat=3))
        best += max(sum(diag[1, assign[i], i] for i in range(3)) for assign in itertools.product(range(3), repeat=3))
        P = optimal_povm(R)
        assert np.real(np.einsum("xaij,xaji->", P, R)) == pytest.approx(best, abs=1e-6)


def sdp_optimum(R):
    cp = pytest.importorskip("cvxpy")
    k, d = R.shape[0], R.shape[-1]
    Ms = [cp.Variable((d, d), hermitian=True) for _ in range(k)]
    cons = [M >> 0 for M in Ms] + [sum(Ms) == np.eye(d)]
    obj = cp.Maximize(cp.real(sum(cp.trace(M @ R[a]) for a, M in enumerate(Ms))))
    prob = cp.Problem(obj, cons)
    prob.solve(solver="CLARABEL")
    return prob.value


@pytest.mark.parametrize("seed", range(6))
def test_optimal_povm_matches_sdp(seed):
    rng = np.random.default_rng(seed)
    d = 2 + seed % 2
    h = rng.normal(size=(3, d, d)) + 1j * rng.normal(size=(3, d, d))
    R = (h + h.conj().swapaxes(-1, -2))[None]
    P = optimal_povm(R)
    got = np.real(np.einsum("xaij,xaji->", P, R))
    assert got == pytest.approx(sdp_optimum(R[0]), abs=1e-5)
    Strategy((d,), StateVector.basis((d,), (0,)), (P,)).check(1e-9)


def test_optimal_povm_never_worse_than_start():
    rng = np.random.default_rng(7)
    f = default_functional()
    start = random_measurements(f, 3, rng)
    h = rng.normal(size=(3, 3, 3, 3)) + 1j * rng.normal(size=(3, 3, 3, 3))
    R = h + h.conj().swapaxes(-1, -2)
    before = np.real(np.einsum("xaij,xaji->x", start, R))
    after = np.real(np.einsum("xaij,xaji->x", optimal_povm(R, start, iters=5), R))
    assert np.all(after >= before - 1e-12)


def test_state_update_is_principal(f):
    rng = np.random.default_rng(8)
    meas = [random_measurements(f, 2, rng) for _ in range(3)]
    B = bell_operator(f, meas)
    psi = state_update(B)
    assert B.expectation(psi) == pytest.approx(np.linalg.eigvalsh(B.matrix).max())


@pytest.mark.parametrize("dims", [(2, 2, 2), (2, 3, 3)])
def test_run_monotone_and_feasible(f, dims):
    cfg = SeesawConfig(restarts=1, seed=11)
    trace, strat, sweeps = seesaw_run(f, dims, cfg, 0)
    assert np.all(np.diff(trace) >= -1e-12)
    strat.check()
    assert strat.value(f) == pytest.approx(trace[-1], abs=1e-9)
    assert trace[-1] <= 9 + 1e-9
    assert 1 <= sweeps <= cfg.max_sweeps


def test_optimize_reproducible(f):
    cfg = SeesawConfig(restarts=3, seed=2)
    a = seesaw_optimize(f, (2, 2, 2), cfg)
    b = seesaw_optimize(f, (2, 2, 2), cfg)
    assert a.finals == b.finals and a.best_restart == b.best_restart
    assert a.best_value == max(a.finals)
    assert a.monotone()


def test_optimize_qutrits_reaches_max(f):
    res = seesaw_optimize(f, (3, 3, 3), SeesawConfig(restarts=4, seed=0))
    assert res.best_value >= 9 - 1e-6
    res.best_strategy.check()


def test_strategy_value_equals_table_value(f):
    pt = probability_table(ghz_state(3, 3), f.settings())
    strat = Strategy((3, 3, 3), ghz_state(3, 3), tuple(ideal_measurements()))
    assert strat.value(f) == pytest.approx(bell_value(f, pt))


def test_config_validation(f):
    with pytest.raises(ValueError):
        SeesawConfig(restarts=0)
    with pytest.raises(ValueError):
        SeesawConfig(tol=0)
    with pytest.raises(ValueError):
        seesaw_optimize(f, (2, 2), SeesawConfig(restarts=1))
