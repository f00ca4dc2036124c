import cmath
import math
import warnings

import numpy as np
import pytest

from slitfano.asymptotics import (
    LambdaSet,
    alpha_constant,
    alpha_nystrom,
    diagonal_combo,
    inner_products,
    label_eigenvalues,
    lambda_full_values,
    lambda_hat_values,
    lambda_set,
    matrix_M_full,
    matrix_M_hat,
    mode_shape,
    mu_lambda_coeffs,
    resonance_prediction,
    rho_kernel,
    rt_asymptotic,
    slit_field_asymptotic,
)
from slitfano.bie import assemble_pieces, slit_field, solve_scattering
from slitfano.errors import DivisionByZeroLambda, OutsideValidRegion
from slitfano.greens import SpectralPoint, beta_constants

ALPHA_GOLDEN = -1.1070221  # Nystrom oracle (graded mesh, n = 256..2048) and Galerkin ladder agree


def test_alpha_golden(alpha):
    assert alpha == pytest.approx(ALPHA_GOLDEN, abs=2e-8)


def test_alpha_convergence_record():
    a = alpha_constant((16, 32, 64))
    assert a.value != 0.0
    assert isinstance(a.value, float)
    d = np.abs(np.diff(a.raw))
    assert np.all(d[1:] < d[:-1])
    assert a.error_estimate == pytest.approx(abs(a.raw[-1] - a.raw[-2]))


def test_alpha_galerkin_vs_nystrom(alpha):
    ny = alpha_nystrom()
    assert abs(alpha - ny.value) / abs(ny.value) < 5e-5


def test_rho_kernel_spot_value():
    assert rho_kernel(0.5, -0.5) == pytest.approx(0.0, abs=1e-15)
    assert rho_kernel(0.1, 0.3) == pytest.approx(rho_kernel(0.3, 0.1), abs=1e-15)


def test_m_hat_eigenvectors_at_kappa_zero(cfg, alpha):
    M = matrix_M_hat(SpectralPoint(2.5, 0.0), cfg, alpha, 1)
    for v in (np.array([1.0, 1.0]), np.array([1.0, -1.0])):
        w = M @ v
        lam = w[0] / v[0]
        assert np.allclose(w, lam * v, atol=1e-14)


def test_lambda_hat_matches_eigenvalues(cfg, alpha):
    pt = SpectralPoint(2.5, 0.1)
    lam = lambda_hat_values(pt, cfg, alpha)
    b = beta_constants(pt, cfg)
    for sign, idx in ((1, 0), (-1, 2)):
        M = matrix_M_hat(pt, cfg, alpha, sign)
        l1, l2 = label_eigenvalues(M, b.eta)
        assert abs(l1 - lam[idx]) < 1e-13 and abs(l2 - lam[idx + 1]) < 1e-13
        v = np.array([1.0, 1.0 + b.eta])
        assert np.allclose(M @ v, lam[idx] * v, atol=1e-13)


def test_lambda_hat_expansion_kappa_squared(cfg, alpha):
    errs = []
    for kappa in (0.1, 0.05):
        pt = SpectralPoint(2.5, kappa)
        b = beta_constants(pt, cfg)
        lam = lambda_hat_values(pt, cfg, alpha)
        avg = 0.5 * (b.beta_plus + b.beta_minus)
        approx = [cfg.eps + cfg.eps * alpha * (diagonal_combo(b, 2.5, cfg.eps, s) + sg * avg) for s in (1, -1) for sg in (1, -1)]
        errs.append(np.max(np.abs(lam - np.array(approx))))
    assert 0.25 <= (errs[0] / errs[1]) / 4.0 <= 4.0


def test_im_lambda_hat_2_scales_kappa_squared(cfg, alpha):
    vals = [lambda_hat_values(SpectralPoint(2.5, kp), cfg, alpha)[1].imag / (kp**2 * cfg.eps) for kp in (0.1, 0.05, 0.025)]
    assert max(abs(v) for v in vals) < 1.0
    assert 0.25 <= vals[0] / vals[2] <= 4.0


def test_im_lambda_hat_1_order_eps(cfg, alpha):
    ims = [abs(lambda_hat_values(SpectralPoint(2.5, 0.1), cfg.with_eps(e), alpha)[0].imag) for e in (0.05, 0.025)]
    assert 0.25 <= (ims[0] / ims[1]) / 2.0 <= 4.0


def test_lambda_set_reality_at_kappa_zero(cfg, alpha):
    ls = lambda_set(SpectralPoint(2.5, 0.0), cfg, alpha, "full", 32)
    assert abs(ls.get(2, 1).imag) < 1e-12 and abs(ls.get(2, -1).imag) < 1e-12
    assert abs(ls.get(1, 1).imag) > 1e-3 and abs(ls.get(1, -1).imag) > 1e-3


def test_inner_products_identity(cfg, alpha):
    pt = SpectralPoint(2.0, 0.1)
    d11, d12 = [], []
    for e in (0.05, 0.025):
        G = inner_products(assemble_pieces(pt, cfg.with_eps(e), 48), 1)
        d11.append(abs(G[0, 0] - alpha))
        d12.append(abs(G[0, 1]))
    assert d11[0] <= 0.05 * 1.0 and d11[1] < d11[0]
    assert d12[0] <= 0.05 * 1.0 and d12[1] < d12[0]


def test_inner_product_symmetry_kappa_zero(cfg):
    pcs = assemble_pieces(SpectralPoint(2.0, 0.0), cfg, 32)
    for sign in (1, -1):
        G = inner_products(pcs, sign)
        assert abs(G[0, 0] - G[1, 1]) < 1e-10
        assert abs(G[0, 1] - G[1, 0]) < 1e-10
        assert np.max(np.abs(G.imag)) < 1e-10


def test_full_vs_hat_sensitivity(cfg, alpha):
    pt = SpectralPoint(2.0, 0.1)
    diffs = []
    for e in (0.05, 0.025):
        c = cfg.with_eps(e)
        diffs.append(np.max(np.abs(lambda_full_values(pt, c, 48) - lambda_hat_values(pt, c, alpha))))
    assert diffs[0] < 0.05 * 1.0
    assert 0.25 <= (diffs[0] / diffs[1]) / 4.0 <= 4.0


def test_matrix_m_full_shape(cfg):
    M = matrix_M_full(SpectralPoint(2.0, 0.1), cfg, 24, 1)
    assert M.shape == (2, 2)


def test_mu_values_and_identity(cfg):
    lam = LambdaSet(np.array([0.1, 0.2, 0.3, 0.4], complex), np.zeros(4, complex), "hat", 0.0)
    c = mu_lambda_coeffs(SpectralPoint(2.0, 0.0), cfg, lam)
    assert c.mu_plus == 2 and c.mu_minus == 0
    assert c.r_minus == c.r_plus and c.t_minus == c.t_plus
    eta = 0.01 + 0.02j
    lam = LambdaSet(np.array([0.1, 0.2, 0.1, 0.4], complex), np.zeros(4, complex), "hat", eta)
    pt = SpectralPoint(2.0, 0.1)
    c = mu_lambda_coeffs(pt, cfg, lam)
    expected = cmath.exp(1j * pt.kappa * cfg.d0) - (1 + eta) ** 2 * cmath.exp(-1j * pt.kappa * cfg.d0)
    assert abs(c.mu_plus * c.mu_minus - expected) < 1e-15
    assert c.Lambda1_plus == pytest.approx(2 / 0.1) and c.Lambda1_minus == 0


def test_mu_lambda_zero(cfg):
    lam = LambdaSet(np.array([0.0, 0.2, 0.3, 0.4], complex), np.zeros(4, complex), "hat", 0.0)
    with pytest.raises(DivisionByZeroLambda):
        mu_lambda_coeffs(SpectralPoint(2.0, 0.1), cfg, lam)


def test_aperture_average_matches_expansion(cfg, alpha):
    pt = SpectralPoint(2.0, 0.1)
    dens, _ = solve_scattering(pt, cfg, 48)
    c = mu_lambda_coeffs(pt, cfg, lambda_set(pt, cfg, alpha, "full", 48))
    rel = abs(dens.averages["phi1_minus"] - alpha * c.r_minus) / abs(alpha * c.r_minus)
    assert rel <= cfg.eps + pt.kappa**2


def test_rt_asymptotic_vs_direct(cfg, alpha):
    pt = SpectralPoint(2.0, 0.1)
    _, direct = solve_scattering(pt, cfg, 48)
    asym = rt_asymptotic(pt, cfg, lambda_set(pt, cfg, alpha), alpha)
    assert abs(asym.T - direct.T) <= cfg.eps + pt.kappa**2
    assert abs(asym.R - direct.R) <= cfg.eps + pt.kappa**2


def test_fano_window_relations(cfg, alpha):
    k_star = 2.8305
    for dk in (-2e-3, 2e-3):
        pt = SpectralPoint(k_star + dk, 0.1)
        c = rt_asymptotic(pt, cfg, lambda_set(pt, cfg, alpha), alpha)
        assert abs(c.R - c.T - 1) <= 10 * cfg.eps
        assert abs(abs(c.T + 1) ** 2 + abs(c.T) ** 2 - 1) <= 10 * cfg.eps


def test_lambda_minus_near_fano(cfg, alpha):
    k = 2.8305
    lam = lambda_hat_values(SpectralPoint(k, 0.1), cfg, alpha)
    lead = (math.cos(k) - 1) * alpha / (k * math.sin(k))
    assert abs(lam[2] - lead) <= 10 * cfg.eps
    assert abs(lam[3] - lead) <= 10 * cfg.eps


def test_resonance_prediction_properties(cfg, alpha):
    k1, k2 = resonance_prediction(1, 0.0, cfg, alpha)
    assert k2.imag == 0.0
    assert k1.imag < 0
    bound = 10 * cfg.eps**2 * math.log(cfg.eps) ** 2
    _, k2 = resonance_prediction(1, 0.1, cfg, alpha)
    assert abs(k2.real - 2.83) <= bound
    small = [abs(resonance_prediction(1, 0.0, cfg.with_eps(e), alpha)[1] - math.pi) for e in (0.01, 0.001)]
    assert small[1] < small[0] < 0.2
    with pytest.raises(OutsideValidRegion):
        resonance_prediction(2, 0.0, cfg, alpha)


def test_slit_field_asymptotic_vs_direct(cfg, alpha):
    pt = SpectralPoint(2.0, 0.1)
    dens, _ = solve_scattering(pt, cfg, 48)
    ls = lambda_set(pt, cfg, alpha, "full", 48)
    for sign in (1, -1):
        ua = slit_field_asymptotic(pt, cfg, ls, alpha, 0.4, sign)
        ud = slit_field(pt, cfg, dens, (sign * 0.5 * cfg.d0, 0.4))
        assert abs(ua - ud) / abs(ud) <= cfg.eps + pt.kappa**2


def test_slit_antisymmetry_at_fano(cfg, alpha):
    pt = SpectralPoint(2.83050970, 0.1)
    ls = lambda_set(pt, cfg, alpha, "full", 48)
    up = slit_field_asymptotic(pt, cfg, ls, alpha, 0.5, 1)
    um = slit_field_asymptotic(pt, cfg, ls, alpha, 0.5, -1)
    assert abs(up + um) <= 0.1 * abs(up)


def test_mode_shape_parity():
    x = np.linspace(0.2, 0.8, 7)
    assert np.allclose(mode_shape(math.pi, 1, x), np.sin(math.pi * x))
    assert np.allclose(mode_shape(2 * math.pi, 2, x), np.sin(2 * math.pi * (x - 0.5)))


def test_validity_region(cfg, alpha):
    with pytest.raises(OutsideValidRegion):
        lambda_hat_values(SpectralPoint(2.0, 0.35 * math.pi), cfg, alpha)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        lambda_hat_values(SpectralPoint(2.0, 0.25), cfg, alpha)
    assert any(issubclass(w.category, RuntimeWarning) for w in rec)
    with pytest.raises(OutsideValidRegion):
        slit_field_asymptotic(SpectralPoint(2.0, 0.1), cfg, lambda_set(SpectralPoint(2.0, 0.1), cfg, alpha), alpha, 0.1, 1)
