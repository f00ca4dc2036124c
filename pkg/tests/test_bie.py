import math

import numpy as np
import pytest

from slitfano.bie import (
    assemble_block,
    assemble_pieces,
    even_odd_split,
    get_basis,
    half_matrix,
    slit_field,
    slit_modal_coefficients,
    solve_even_odd,
    solve_scattering,
)
from slitfano.errors import OutsideValidRegion
from slitfano.greens import SpectralPoint


def test_energy_conservation_figure_config(cfg):
    _, c = solve_scattering(SpectralPoint(2.0, 0.1), cfg, 48)
    assert c.energy_residual < 1e-6
    assert not c.flagged


def test_frozen_solution(cfg):
    _, c = solve_scattering(SpectralPoint(2.0, 0.1), cfg, 48)
    assert c.R == pytest.approx(0.96713331 + 0.10644362j, abs=1e-7)
    assert c.T == pytest.approx(-0.02526246 + 0.22953153j, abs=1e-7)


def test_even_odd_recombination(cfg):
    pt = SpectralPoint(2.0, 0.1)
    d1, c1 = solve_scattering(pt, cfg, 48)
    d2, c2 = solve_even_odd(pt, cfg, 48)
    assert np.max(np.abs(d1.stacked() - d2.stacked())) < 1e-10
    assert abs(c1.T - c2.T) < 1e-10


def test_s_matrix_symmetric(cfg):
    pcs = assemble_pieces(SpectralPoint(2.0, 0.0), cfg, 48)
    assert np.max(np.abs(pcs.S - pcs.S.T)) < 1e-12


def test_reality_at_kappa_zero(cfg):
    pt = SpectralPoint(2.0, 0.0)
    pcs = assemble_pieces(pt, cfg, 32)
    for sign in (1, -1):
        m = pcs.S + pcs.Sinf + sign * pcs.Sinf_tilde
        assert np.max(np.abs(m.imag)) < 1e-12
    assert np.max(np.abs(pcs.Sinf_pm[1].imag)) < 1e-12
    # real operator, real right-hand side -> real solution
    L = np.block([[pcs.S + pcs.Sinf, pcs.Sinf_pm[-1]], [pcs.Sinf_pm[1], pcs.S + pcs.Sinf]]).real
    x = np.linalg.solve(L, np.ones(2 * pcs.n_modes))
    assert np.all(np.isfinite(x))


def test_mirror_relation(cfg):
    pcs = assemble_pieces(SpectralPoint(2.0, 0.0), cfg, 32)
    J = np.diag((-1.0) ** np.arange(32))
    # [S+ phi~](X) = [S- phi](-X) with phi~(X) = phi(-X)
    assert np.max(np.abs(pcs.Sinf_pm[1] - J @ pcs.Sinf_pm[-1] @ J)) < 1e-12
    # the kappa=0 kernel is even in its shift, so S+ is also the transpose of S-
    assert np.max(np.abs(pcs.Sinf_pm[1] - pcs.Sinf_pm[-1].T)) < 1e-12


def test_mirror_symmetry_of_densities(cfg):
    dens, _ = solve_scattering(SpectralPoint(2.0, 0.0), cfg, 48)
    flip = (-1.0) ** np.arange(48)
    assert np.max(np.abs(dens.phi1_plus - flip * dens.phi1_minus)) < 1e-10
    assert np.max(np.abs(dens.phi2_plus - flip * dens.phi2_minus)) < 1e-10


def test_sinf_norm_scales_with_eps(cfg):
    pt = SpectralPoint(2.0, 0.1)
    n1 = np.linalg.norm(assemble_pieces(pt, cfg, 32).Sinf, 2)
    n2 = np.linalg.norm(assemble_pieces(pt, cfg.with_eps(cfg.eps / 2), 32).Sinf, 2)
    assert 0.25 <= (n1 / n2) / 2.0 <= 4.0


def test_tilde_block_exponentially_small(cfg):
    pcs = assemble_pieces(SpectralPoint(2.0, 0.1), cfg, 32)
    ref = np.linalg.norm(pcs.S + pcs.Sinf, 2)
    assert np.linalg.norm(pcs.Sinf_tilde, 2) / ref < 10 * math.exp(-1 / cfg.eps)


def test_assemble_block_decomposition(cfg):
    pt = SpectralPoint(2.0, 0.1)
    pcs = assemble_pieces(pt, cfg, 24)
    te = assemble_block(pt, cfg, 24, "Te").entries
    ti = assemble_block(pt, cfg, 24, "Ti").entries
    beta = pcs.beta_e + pcs.beta_i
    assert np.max(np.abs(te + ti - (beta * pcs.P + pcs.S + pcs.Sinf))) < 1e-12


def test_half_systems_shapes(cfg):
    sysm = even_odd_split(SpectralPoint(2.0, 0.1), cfg, 16)
    assert sysm.T_plus.shape == (32, 32) and sysm.T_minus.shape == (32, 32)
    pcs = assemble_pieces(SpectralPoint(2.0, 0.1), cfg, 16)
    assert np.allclose(half_matrix(pcs, 1), sysm.T_plus)


def test_self_convergence_n64(cfg):
    pt = SpectralPoint(2.0, 0.1)
    t1 = solve_scattering(pt, cfg, 64)[1].T
    t2 = solve_scattering(pt, cfg, 128)[1].T
    assert abs(t1 - t2) <= 1e-8


@pytest.mark.xfail(strict=True, reason="corner singularity of the density limits convergence to ~N^-2.7; N=32 misses 1e-8")
def test_self_convergence_n32(cfg):
    pt = SpectralPoint(2.0, 0.1)
    t1 = solve_scattering(pt, cfg, 32)[1].T
    t2 = solve_scattering(pt, cfg, 64)[1].T
    assert abs(t1 - t2) <= 1e-8


def test_slit_field_modal_consistency(cfg):
    pt = SpectralPoint(2.0, 0.1)
    dens, _ = solve_scattering(pt, cfg, 48)
    coef = slit_modal_coefficients(pt, dens)
    for sign, key in ((1, "plus"), (-1, "minus")):
        a0, b0 = coef[key]
        modal = a0 * np.cos(2.0 * 0.5) + b0 * np.cos(2.0 * 0.5)
        direct = slit_field(pt, cfg, dens, (sign * 0.5 * cfg.d0, 0.5))
        assert abs(direct - modal) < 1e-6


def test_slit_field_mirror_at_kappa_zero(cfg):
    pt = SpectralPoint(2.0, 0.0)
    dens, _ = solve_scattering(pt, cfg, 48)
    for X in (-0.3, 0.1):
        up = slit_field(pt, cfg, dens, (0.5 * cfg.d0 + cfg.eps * X, 0.4))
        um = slit_field(pt, cfg, dens, (-0.5 * cfg.d0 - cfg.eps * X, 0.4))
        assert abs(up - um) < 1e-10


def test_higher_mode_decay(cfg):
    dens, _ = solve_scattering(SpectralPoint(2.0, 0.1), cfg, 48)
    pm = get_basis(48).mode_projections()[:200]
    a = np.abs(pm @ dens.phi1_minus)
    m = np.arange(1, a.size + 1)
    ratio = a * np.sqrt(m)
    assert ratio[100:].max() <= 2.0 * ratio[:20].max()


def test_slit_field_outside(cfg):
    dens, _ = solve_scattering(SpectralPoint(2.0, 0.1), cfg, 16)
    with pytest.raises(OutsideValidRegion):
        slit_field(SpectralPoint(2.0, 0.1), cfg, dens, (0.2, 0.01))
    with pytest.raises(OutsideValidRegion):
        slit_field(SpectralPoint(2.0, 0.1), cfg, dens, (0.0, 0.5))
