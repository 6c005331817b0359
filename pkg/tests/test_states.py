import numpy as np
import pytest
from hypothesis import given, strategies as st

from qutritghz.qudit import fidelity_with_pure
from qutritghz.states import damped_ghz, ghz_indices, ghz_state, isotropic_mix, uniform_damping


def test_ghz_amplitudes():
    g = ghz_state(3, 3)
    nz = np.flatnonzero(np.abs(g.amplitudes) > 0)
    assert list(nz) == [0, 13, 26]
    assert np.allclose(g.amplitudes[nz], 1 / np.sqrt(3))
    assert list(ghz_indices(4, 3)) == [0, 40, 80]


def test_ghz_bad_parameters():
    with pytest.raises(ValueError):
        ghz_state(1, 3)
    with pytest.raises(ValueError):
        ghz_state(3, 1)


def test_isotropic_endpoints():
    g = ghz_state(3, 3)
    assert np.allclose(isotropic_mix(g, 1).matrix, g.projector().matrix)
    assert np.allclose(isotropic_mix(g, 0).matrix, np.eye(27) / 27)
    with pytest.raises(ValueError):
        isotropic_mix(g, 1.2)


def test_isotropic_fidelity_affine():
    g = ghz_state(4, 3)
    for v in (0.0, 0.3, 0.9):
        assert fidelity_with_pure(isotropic_mix(g, v), g) == pytest.approx(v + (1 - v) / 81, abs=1e-12)


def test_damped_ghz_unit_and_zero():
    g = ghz_state(3, 3)
    assert fidelity_with_pure(damped_ghz(3, 3, np.ones((3, 3))), g) == pytest.approx(1)
    # fully dephased: the classical mixture of |jjj>
    assert fidelity_with_pure(damped_ghz(3, 3, np.eye(3)), g) == pytest.approx(1 / 3)


def test_damped_ghz_closed_form():
    lam = np.array([[1, 0.9, 0.8], [0.9, 1, 0.7], [0.8, 0.7, 1]])
    f = fidelity_with_pure(damped_ghz(4, 3, lam), ghz_state(4, 3))
    assert f == pytest.approx((3 + 2 * (0.9 + 0.8 + 0.7)) / 9)


def test_damped_ghz_rejects_invalid():
    with pytest.raises(ValueError):
        damped_ghz(3, 3, np.array([[1, 0.5, 0], [0.4, 1, 0], [0, 0, 1]]))
    with pytest.raises(ValueError):
        damped_ghz(3, 3, 2 * np.ones((3, 3)))


@given(a=st.floats(0, 1), b=st.floats(0, 1))
def test_uniform_damping_fidelity_monotone(a, b):
    lo, hi = sorted((a, b))
    g = ghz_state(3, 3)
    f_lo = fidelity_with_pure(damped_ghz(3, 3, uniform_damping(3, lo)), g)
    f_hi = fidelity_with_pure(damped_ghz(3, 3, uniform_damping(3, hi)), g)
    assert f_lo <= f_hi + 1e-12


@given(v=st.floats(0, 1), perm=st.permutations([0, 1, 2]))
def test_isotropic_ghz_permutation_symmetric(v, perm):
    rho = isotropic_mix(ghz_state(3, 3), v).tensor()
    t = np.transpose(rho, list(perm) + [3 + p for p in perm])
    assert np.allclose(t, rho)
