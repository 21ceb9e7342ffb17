import math

import numpy as np
import pytest

from plasmon.errors import DegenerateIndex, NotTangential, TruncationWarning
from plasmon.tasks.harmonics import (
    HarmonicIndex,
    SphereQuadrature,
    eval_tangential_basis,
    eval_vector_harmonics,
    eval_Y,
    near_surface_order,
    project_scalar,
    project_tangential,
    synthesize_scalar,
    synthesize_tangential,
)


def _random_coeffs(rng, n_max, skip_zero=False):
    c = rng.normal(size=(n_max + 1, 2 * n_max + 1)) + 1j * rng.normal(size=(n_max + 1, 2 * n_max + 1))
    for n in range(n_max + 1):
        c[n, : n_max - n] = 0.0
        c[n, n_max + n + 1 :] = 0.0
    if skip_zero:
        c[0] = 0.0
    return c


def test_invalid_index():
    with pytest.raises(DegenerateIndex):
        HarmonicIndex(2, 3)
    with pytest.raises(DegenerateIndex):
        HarmonicIndex(-1, 0)


def test_low_degree_values():
    assert eval_Y(HarmonicIndex(0, 0), [0.3, -0.2, 0.9]) == pytest.approx(1 / math.sqrt(4 * math.pi))
    assert eval_Y(HarmonicIndex(1, 0), [0.0, 0.0, 2.0]) == pytest.approx(math.sqrt(3 / (4 * math.pi)))
    # Y_n^{-m} = (-1)^m conj(Y_n^m)
    p = [0.4, 0.5, -0.3]
    assert eval_Y(HarmonicIndex(3, -2), p) == pytest.approx(np.conj(eval_Y(HarmonicIndex(3, 2), p)))


def test_scalar_roundtrip_is_exact():
    rng = np.random.default_rng(1)
    c = _random_coeffs(rng, 6)
    quad = SphereQuadrature.for_degree(6)
    back = project_scalar(synthesize_scalar(c, quad), quad, 6)
    np.testing.assert_allclose(back, c, atol=1e-12)


def test_tangential_roundtrip_and_residual():
    rng = np.random.default_rng(2)
    cg, cc = _random_coeffs(rng, 7, True), _random_coeffs(rng, 7, True)
    quad = SphereQuadrature.for_degree(7, radius=1.7)
    proj = project_tangential(synthesize_tangential(cg, cc, quad), quad, 7)
    np.testing.assert_allclose(proj.c_grad, cg, atol=1e-11)
    np.testing.assert_allclose(proj.c_cross, cc, atol=1e-11)
    assert proj.residual < 1e-12
    assert proj[HarmonicIndex(3, -1)] == pytest.approx((cg[3, 6], cc[3, 6]))


@pytest.mark.parametrize("radius", [0.5, 1.0, 2.0])
def test_surface_gradient_norm(radius):
    n, m = 4, 2
    c = np.zeros((n + 1, 2 * n + 1), dtype=complex)
    c[n, m + n] = 1.0
    quad = SphereQuadrature.for_degree(n, radius=radius)
    F = synthesize_tangential(c, np.zeros_like(c), quad)
    energy = np.sum(quad.weights * np.sum(np.abs(F) ** 2, axis=1))
    assert energy == pytest.approx(n * (n + 1), rel=1e-12)


def test_tangential_basis_orientation():
    s = eval_tangential_basis(HarmonicIndex(3, 1), [0.2, 0.7, -0.4], R=1.3)
    np.testing.assert_allclose(np.cross(s.grad, s.point), s.grad_cross_nu, atol=1e-14)
    assert abs(np.dot(s.grad, s.point)) < 1e-14
    with pytest.raises(DegenerateIndex):
        eval_tangential_basis(HarmonicIndex(0, 0), [0, 0, 1])


def test_vector_harmonics_are_orthogonal_triplet():
    I, T, N = eval_vector_harmonics(HarmonicIndex(2, 1), [0.3, -0.6, 0.74])
    nu = np.array([0.3, -0.6, 0.74]) / np.linalg.norm([0.3, -0.6, 0.74])
    assert abs(np.dot(T, nu)) < 1e-14
    assert np.linalg.norm(I) > 0 and np.linalg.norm(N) > 0


def test_radial_field_rejected():
    quad = SphereQuadrature.for_degree(3)
    with pytest.raises(NotTangential):
        project_tangential(quad.nodes.astype(complex), quad, 3)


def test_truncation_warning():
    rng = np.random.default_rng(3)
    cg = _random_coeffs(rng, 10, True)
    quad = SphereQuadrature.for_degree(10)
    F = synthesize_tangential(cg, np.zeros_like(cg), quad)
    with pytest.warns(TruncationWarning):
        project_tangential(F, quad, 3)


def test_near_surface_order_grows_towards_surface():
    orders = [near_surface_order(10, d, 5.0) for d in (0.5, 0.1, 0.05, 0.02)]
    assert orders == sorted(orders)
    assert orders[-1] > orders[0]
    assert near_surface_order(10, 0.0) >= 10
