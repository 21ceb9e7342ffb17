import numpy as np
import pytest

from plasmon.errors import InadmissibleConfig
from plasmon.tasks.spectrum import (
    MediumConfig,
    eigen_pairs,
    lambda_chi,
    m_l_coeffs,
    mode_matrices,
    spectrum_table,
    tau_asymptotic,
    tau_closed_form,
    tau_exact,
    wave_coefficients,
    wave_number,
)


def test_wave_number_branch():
    assert wave_number(-1.0, 1.0, 1.0) == pytest.approx(1j)
    k = wave_number(-1.04018 + 0.00004j, 1.0, 5.0)
    assert k.imag > 0


def test_medium_config_validation():
    with pytest.raises(InadmissibleConfig):
        MediumConfig(R=0.0)
    with pytest.raises(InadmissibleConfig):
        MediumConfig(eps_c=-1.0 - 1e-3j)
    cfg = MediumConfig(eps_c=-2, omega=3)
    assert isinstance(cfg.eps_c, complex)
    assert cfg.replace(omega=4.0).omega == 4.0
    assert cfg.fingerprint() == MediumConfig(eps_c=-2 + 0j, omega=3.0).fingerprint()


def test_lambda_chi_reference_values():
    lam, chi = lambda_chi(0, 1.0, 1.0)
    assert lam == pytest.approx(0.662722 + 0.253425j, abs=1e-6)
    assert chi == pytest.approx(-0.454649 - 0.708073j, abs=1e-6)


def test_dual_lambda_forms_agree():
    w = wave_coefficients(5.0 + 0.5j, 1.3, 60)
    rel = np.abs(w.lam_all - w.lam_dual_all) / np.abs(w.lam_all)
    assert rel.max() < 1e-10


def test_high_degree_m_coefficients():
    n = 40
    m1, m2, l1, l2 = m_l_coeffs(n, 5.0, 1.0)
    assert abs(m1 * (4 * n + 2) - 1) < 0.25
    assert abs(m2 * (4 * n + 2) + 1) < 0.25
    _, chi = lambda_chi(n, 5.0, 1.0)
    assert l1 == pytest.approx(25.0 * chi, rel=1e-14)


def test_identical_media_spectrum(identical_cfg):
    table = spectrum_table(identical_cfg, 12)
    np.testing.assert_allclose(table.tau[1:], np.tile([1.0, 25.0, 1.0, 25.0], (12, 1)), atol=1e-10)
    # tau_1 ha autovettore (1, 0): alpha infinito
    assert np.isinf(table.record(3).alpha[0].real)
    assert not table.defective[1:].any()


def test_mode_matrix_eigenvalues_match_table(resonance_cfg):
    table = spectrum_table(resonance_cfg, 10)
    for n in (1, 5, 10):
        mm = mode_matrices(resonance_cfg, n)
        for block, cols in ((mm.A, slice(0, 2)), (mm.B, slice(2, 4))):
            ev = np.linalg.eigvals(block)
            got = table.tau[n, cols]
            scale = np.abs(block).max()
            assert min(abs(ev[0] - got[0]), abs(ev[0] - got[1])) < 1e-10 * scale
            assert min(abs(ev[1] - got[0]), abs(ev[1] - got[1])) < 1e-10 * scale
        assert table.record(n).eigen_residual < 1e-8


def test_eigen_labels_follow_root_sign():
    M = np.array([[[2.0, 1.0], [0.5, 3.0]]], dtype=complex)
    pe = eigen_pairs(M)
    tr, det = 5.0, 6.0 - 0.5
    s = np.sqrt(tr * tr - 4 * det + 0j)
    assert pe.tau[0, 0] == pytest.approx((tr - s) / 2)
    assert pe.tau[0, 1] == pytest.approx((tr + s) / 2)
    for lab in range(2):
        v = pe.vectors[0, lab]
        assert v[1] == 1.0
        np.testing.assert_allclose(M[0] @ v, pe.tau[0, lab] * v, atol=1e-12)


def test_resonance_reference_point(resonance_cfg):
    table = spectrum_table(resonance_cfg, 60)
    mag = np.abs(table.tau[1:, 0])
    assert mag[39] < 0.05
    assert mag[39] * 5 <= np.median(mag)
    assert int(np.argmin(mag)) + 1 in (40, 41)
    assert table.admissible[1:].all()


def test_cloaking_reference_point(cloaking_cfg):
    res = tau_exact(cloaking_cfg, 1)
    assert abs(res.tau[2]) > 10


def test_closed_form_consistent_variant(resonance_cfg):
    for n in (1, 4, 10):
        rec = spectrum_table(resonance_cfg, n).record(n)
        assert rec.closed_form_discrepancy["consistent"] < 1e-6
        cf = tau_closed_form(resonance_cfg, n, "consistent")
        assert cf.tau.shape == (4,)
    with pytest.raises(ValueError):
        tau_closed_form(resonance_cfg, 1, "other")


def test_asymptotic_envelope():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(10):
        cfg = MediumConfig(
            R=rng.uniform(0.5, 1.0), omega=rng.uniform(0.5, 1.0),
            eps_m=rng.uniform(1.0, 1.5), mu_m=rng.uniform(1.0, 1.5),
            eps_c=rng.uniform(-3.0, -2.2), mu_c=rng.uniform(1.0, 2.0),
        )
        table = spectrum_table(cfg, 80, with_closed_form=False)
        for n in range(40, 81):
            ratio = table.tau[n] / tau_asymptotic(cfg, n)
            worst = max(worst, float(n * np.max(np.abs(ratio - 1))))
    assert worst <= 10


def test_to_frame_columns(resonance_cfg):
    df = spectrum_table(resonance_cfg, 3).to_frame()
    assert df.columns[:3] == ["n", "re_tau1", "im_tau1"]
    assert df.columns[-2:] == ["flag_admissible", "flag_defective"]
    assert df["n"].to_list() == [1, 2, 3]
