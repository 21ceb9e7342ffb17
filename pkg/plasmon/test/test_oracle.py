import numpy as np
import pytest
from scipy import special

from plasmon.errors import TooCloseToSurface
from plasmon.tasks.harmonics import HarmonicIndex, eval_Y
from plasmon.tasks.oracle import (
    ORACLE_OFFSETS,
    JumpExtrapolation,
    LEAKAGE_TOL,
    cross_degree_leakage,
    oracle_M_L,
    oracle_single_layer,
    pole_quadrature,
    single_layer_jumps,
)
from plasmon.tasks.spectrum import lambda_chi, m_l_coeffs


def _h1(n, z):
    return special.spherical_jn(n, z) + 1j * special.spherical_yn(n, z)


@pytest.mark.parametrize("x", [[0.3, 0.4, 1.6], [0.1, -0.2, 0.3]])
def test_single_layer_of_harmonic(x):
    idx, k, R = HarmonicIndex(2, 1), 1.5, 1.0
    r = float(np.linalg.norm(x))
    inner, outer = sorted((k * r, k * R))
    expected = -1j * k * R**2 * special.spherical_jn(2, inner) * _h1(2, outer) * eval_Y(idx, x)
    assert oracle_single_layer(idx, k, R, x) == pytest.approx(expected, rel=1e-8)


def test_single_layer_rejects_surface_points():
    with pytest.raises(TooCloseToSurface):
        oracle_single_layer(HarmonicIndex(1, 0), 1.0, 1.0, [0.0, 0.0, 1.01])


def test_pole_quadrature_integrates_area():
    nodes, w = pole_quadrature(0.8, 5e-3)
    assert w.sum() == pytest.approx(4 * np.pi * 0.64, rel=1e-12)
    np.testing.assert_allclose(np.linalg.norm(nodes, axis=1), 1.0)


@pytest.mark.parametrize("n", [0, 1, 3])
def test_lambda_chi_oracle(n):
    k, R = 1.0 + 0.2j, 0.8
    value, normal = single_layer_jumps(n, k, R)
    lam, chi = lambda_chi(n, k, R)
    assert abs(normal.average - lam) <= 1e-4 * max(abs(lam), 1e-3)
    assert abs(value.average - chi) <= 1e-4 * max(abs(chi), 1e-3)
    # S continuo, d_nu S salta della densita'
    assert abs(value.jump) < 1e-4
    assert abs(normal.jump - 1.0) < 1e-4
    assert value.offsets == ORACLE_OFFSETS


def test_oracle_degree_range():
    with pytest.raises(ValueError):
        single_layer_jumps(7, 1.0, 1.0)
    with pytest.raises(ValueError):
        oracle_M_L(HarmonicIndex(0, 0), "grad", 1.0, 1.0)


def test_jump_extrapolation_offsets():
    empty = np.zeros(2, dtype=complex)
    with pytest.raises(ValueError):
        JumpExtrapolation((0.004, 0.005), empty, empty, 0j, 0j, 0.0)
    with pytest.raises(TooCloseToSurface):
        JumpExtrapolation((0.003, 0.001), empty, empty, 0j, 0j, 0.0)


@pytest.mark.slow
def test_operator_coefficients_low_degree():
    k, R = 1.0, 1.0
    m1, m2, l1, l2 = m_l_coeffs(1, k, R)
    resp = oracle_M_L(HarmonicIndex(1, -1), "grad_cross_nu", k, R)
    assert abs(resp.m_diagonal - m1) <= 1e-4 * max(abs(m1), 1e-3)
    assert abs(resp.l_coefficient - l1) <= 1e-4 * max(abs(l1), 1e-3)
    assert resp.orders == (-1, 0, 1)
    assert max(resp.m_leakage, resp.l_leakage, resp.cross_degree_leakage) < LEAKAGE_TOL
    assert resp.order_spread < LEAKAGE_TOL


@pytest.mark.parametrize("m", [-2, 0, 2])
def test_cross_degree_leakage_for_every_order(m):
    assert cross_degree_leakage(HarmonicIndex(2, m), "grad", 1.0, 1.0) < LEAKAGE_TOL
