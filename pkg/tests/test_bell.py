import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qutritghz.bell import (
    BellFunctional,
    BellScenario,
    BoundChain,
    FunctionalFormatError,
    bell_table,
    bell_value,
    classify_violation,
    critical_visibility_bell,
    default_functional,
    ghz_value,
    lhv_max_bruteforce,
    load_functional,
    save_functional,
    strategy_table,
    uniform_table,
    white_noise_value,
    winning_residues,
)
from qutritghz.measurement import ProbabilityTable, probability_table
from qutritghz.states import ghz_state, isotropic_mix

from conftest import random_density


@pytest.fixture(scope="module")
def f():
    return default_functional()


@pytest.fixture(scope="module")
def lhv(f):
    return lhv_max_bruteforce(f)


def test_support_and_residues(f):
    settings_ = f.settings()
    assert len(settings_) == 9
    assert all(sum(s) % 3 == 0 for s in settings_)
    r = winning_residues(f)
    assert r[(0, 0, 0)] == 0 and r[(2, 2, 2)] == 1
    assert all(r[s] == 2 for s in settings_ if sum(s) == 3)
    # 9 winning outcome tuples per setting
    assert all(f.block(s).sum() == 9 for s in settings_)


def test_quantum_and_noise_values(f):
    assert ghz_value(f) == pytest.approx(9, abs=1e-9)
    assert white_noise_value(f) == pytest.approx(3, abs=1e-9)


def test_critical_visibilities(f):
    expect = {7.0: 2 / 3, 7.446: 0.741, 7.584: 0.764, 8.225: 0.871}
    for bound, v in expect.items():
        assert critical_visibility_bell(f, bound) == pytest.approx(v, abs=1e-3)


def test_lhv_bound(f, lhv):
    value, strategy = lhv
    assert value == 7.0
    table = strategy_table(f, strategy)
    assert bell_value(f, table) == pytest.approx(7)
    wins = sum(
        (strategy[0][x] + strategy[1][y] + strategy[2][z]) % 3 == winning_residues(f)[(x, y, z)]
        for x, y, z in f.settings()
    )
    assert wins == 7


def test_lhv_zero_functional():
    g = BellFunctional(BellScenario(3, 3, 3), np.zeros((3,) * 6))
    assert lhv_max_bruteforce(g)[0] == 0


def test_lhv_cap():
    with pytest.raises(ValueError):
        lhv_max_bruteforce(default_functional(), cap=1000)


def test_lhv_workers_deterministic(f, lhv):
    assert lhv_max_bruteforce(f, workers=3) == lhv


def test_lhv_relabeling_invariance(f, lhv):
    rng = np.random.default_rng(0)
    c = f.coefficients
    for _ in range(3):
        perms_out = [[rng.permutation(3) for _ in range(3)] for _ in range(3)]
        perm_set = [rng.permutation(3) for _ in range(3)]
        new = np.zeros_like(c)
        for idx in itertools.product(range(3), repeat=6):
            a, x = idx[:3], idx[3:]
            na = tuple(perms_out[p][x[p]][a[p]] for p in range(3))
            nx = tuple(perm_set[p][x[p]] for p in range(3))
            new[na + nx] = c[idx]
        assert lhv_max_bruteforce(BellFunctional(f.scenario, new))[0] == lhv[0]


def test_party_permutation(f):
    for perm in itertools.permutations(range(3)):
        g = f.permuted(perm)
        assert ghz_value(g) == pytest.approx(9)
        assert lhv_max_bruteforce(g)[0] == 7


def test_small_chsh_like_oracle():
    # two parties, two settings, two outcomes: CHSH as win probability sum, LHV = 3
    c = np.zeros((2, 2, 2, 2))
    for a, b, x, y in itertools.product(range(2), repeat=4):
        c[a, b, x, y] = float((a ^ b) == (x & y))
    assert lhv_max_bruteforce(BellFunctional(BellScenario(2, 2, 2), c))[0] == 3


@given(v=st.floats(0, 1))
def test_bell_affine_in_visibility(v):
    f = default_functional()
    val = bell_value(f, bell_table(isotropic_mix(ghz_state(3, 3), v), f))
    assert val == pytest.approx(9 * v + 3 * (1 - v), abs=1e-9)


@settings(max_examples=20)
@given(seed=st.integers(0, 2**32 - 1), v=st.floats(0, 1))
def test_bell_value_linear_in_tables(seed, v):
    f = default_functional()
    r = np.random.default_rng(seed)
    t1 = bell_table(random_density((3, 3, 3), r), f)
    t2 = bell_table(random_density((3, 3, 3), r), f)
    mixed = ProbabilityTable.mix(v, t1, t2)
    assert bell_value(f, mixed) == pytest.approx(v * bell_value(f, t1) + (1 - v) * bell_value(f, t2), abs=1e-9)
    assert bell_value(f.scaled(2.5), t1) == pytest.approx(2.5 * bell_value(f, t1))


def test_uniform_table(f):
    assert bell_value(f, uniform_table(f)) == pytest.approx(3)


def test_bell_value_missing_setting(f):
    pt = probability_table(ghz_state(3, 3), [(0, 0, 0)])
    with pytest.raises(KeyError):
        bell_value(f, pt)


def test_classify(f):
    chain = f.bounds
    assert classify_violation(6.9, chain) == "none"
    assert classify_violation(7.2, chain) == "LHV"
    assert classify_violation(7.5, chain) == "(2,2,2)"
    assert classify_violation(8.0, chain) == "(2,2,3)"
    assert classify_violation(8.302, chain) == "(2,3,3)"
    assert classify_violation(9.0, chain) == "(3,3,3)"


def test_chain_must_be_ordered():
    with pytest.raises(ValueError):
        BoundChain(7.0, {(2, 2, 2): 6.0}, 9.0)


def test_functional_file_round_trip(tmp_path, f):
    path = tmp_path / "f.txt"
    save_functional(f, path)
    g = load_functional(path)
    assert np.array_equal(g.coefficients, f.coefficients)
    h = BellFunctional(f.scenario, f.coefficients * np.pi)
    save_functional(h, path)
    assert np.array_equal(load_functional(path).coefficients, h.coefficients)


@pytest.mark.parametrize(
    "text",
    [
        "0 0 0 0 0 0 1\n",
        "scenario 3 3 3\n0 0 0 0 0 1\n",
        "scenario 3 3 3\n0 0 0 0 0 5 1\n",
        "scenario 3 3 3\n0 0 0 0 0 0 abc\n",
        "scenario 3 3\n",
    ],
)
def test_functional_file_errors(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(FunctionalFormatError):
        load_functional(path)
