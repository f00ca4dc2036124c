import cmath
import math

import numpy as np
import pytest

from slitfano.errors import BranchPointProximity, ConfigError, ModeResonance, SingularArgument
from slitfano.greens import (
    PhysicalConfig,
    SpectralPoint,
    beta_constants,
    beta_cross,
    beta_e,
    beta_hat,
    beta_i,
    beta_tilde,
    branch_sqrt,
    check_branch_points,
    clausen2,
    exterior_green,
    in_diamond,
    mode_coefficient,
    quasiperiodic_green,
    zeta,
)


def test_config_invariants():
    with pytest.raises(ConfigError):
        PhysicalConfig(1.0, 0.4, 0.5)
    with pytest.raises(ConfigError):
        PhysicalConfig(1.0, 0.9, 0.2)
    assert PhysicalConfig().with_eps(0.025).eps == 0.025


def test_branch_sqrt_sector():
    z = np.exp(1j * np.linspace(-np.pi, np.pi, 721)) * 2.0
    s = branch_sqrt(z)
    assert np.allclose(s * s, z)
    arg = np.angle(s)
    assert np.all(arg > -np.pi / 4 - 1e-12) and np.all(arg <= 3 * np.pi / 4 + 1e-12)
    assert branch_sqrt(-4.0) == pytest.approx(2j)


def test_zeta_examples(cfg):
    assert zeta(0, SpectralPoint(math.pi, 0.0), cfg) == pytest.approx(math.pi, abs=1e-15)
    z1 = zeta(1, SpectralPoint(2.83, 0.1), cfg)
    assert z1 == pytest.approx(1j * math.sqrt((0.1 + 2 * math.pi) ** 2 - 2.83**2), abs=1e-14)
    z0 = zeta(0, SpectralPoint(2.83, 0.1), cfg)
    assert z0 == pytest.approx(math.sqrt(2.83**2 - 0.01), abs=1e-15)


def test_zeta_branch_point_proximity(cfg):
    with pytest.raises(BranchPointProximity):
        zeta(-1, SpectralPoint(2 * math.pi - 0.1 + 1e-8, 0.1), cfg)
    with pytest.raises(BranchPointProximity):
        check_branch_points(SpectralPoint(0.1, 0.1), cfg)


def test_in_diamond(cfg):
    assert in_diamond(SpectralPoint(2.83, 0.1), cfg)
    assert not in_diamond(SpectralPoint(6.2, 0.1), cfg)
    assert not in_diamond(SpectralPoint(2.83 - 0.1j, 0.1), cfg)


def test_clausen_against_direct_sum():
    j = np.arange(1, 2_000_001, dtype=float)
    for th in (0.3, 1.7, 2 * math.pi * 0.4, 5.9):
        assert clausen2(th) == pytest.approx(np.sum(np.sin(j * th) / j**2), abs=1e-10)


def test_beta_i_values(cfg):
    assert beta_i(math.pi / 2, cfg.eps) == pytest.approx(2 * math.log(2) / math.pi, abs=1e-14)
    assert beta_tilde(math.pi / 2, cfg.eps) == pytest.approx(2 / (math.pi * cfg.eps), rel=1e-14)


def test_mode_coefficient_m1(cfg):
    g = cmath.sqrt(1.0 - (math.pi / cfg.eps) ** 2)
    exact = cmath.cos(g) / (cmath.sin(g) * cfg.eps * g)
    assert mode_coefficient(1.0, cfg.eps, 1) == pytest.approx(exact, rel=1e-12)
    assert mode_coefficient(1.0, cfg.eps, 1).real == pytest.approx(-0.31835020826227023, rel=1e-12)
    with pytest.raises(ModeResonance):
        mode_coefficient(math.pi, cfg.eps, 0)


def _beta_e_brute(pt, cfg, M=1_000_000):
    n = np.arange(-M, M + 1)
    kn = pt.kappa + 2 * np.pi * n / cfg.d
    zn = branch_sqrt(pt.k * pt.k - kn * kn + 0j)
    r = -1j / (cfg.d * zn)
    nz = n != 0
    r[nz] += 1.0 / (2 * np.pi * np.abs(n[nz]))
    return np.log(2 * np.pi * cfg.eps / cfg.d) / np.pi + np.sum(r)


@pytest.mark.parametrize("k,kappa", [(1.0, 0.0), (2.0, 0.1), (2.83, 0.1), (3.0, -0.3), (4.5, 0.7)])
def test_beta_e_kummer_vs_brute_force(cfg, k, kappa):
    pt = SpectralPoint(k, kappa)
    assert abs(beta_e(pt, cfg) - _beta_e_brute(pt, cfg)) < 1e-8


def test_beta_constants_frozen(cfg):
    b = beta_constants(SpectralPoint(2.83, 0.1), cfg)
    assert b.beta_e == pytest.approx(-0.41365519237466314 - 0.3535776998958026j, abs=1e-12)
    assert b.beta_plus == pytest.approx(0.24808850713218622 - 0.3406499113563648j, abs=1e-12)
    assert b.beta_minus == pytest.approx(0.21980983352803682 - 0.3659398395412936j, abs=1e-12)
    assert b.beta_hat == pytest.approx(0.23414498237698628 - 0.35335689045936397j, abs=1e-12)


def test_beta_invariants(cfg):
    b0 = beta_constants(SpectralPoint(2.5, 0.0), cfg)
    assert b0.beta_plus == b0.beta_minus
    assert abs(b0.beta_plus - beta_hat(2.5, cfg)) < 1e-12
    assert abs(b0.eta) < 1e-14
    b = beta_constants(SpectralPoint(2.5, 0.1), cfg)
    assert abs(b.gamma - (b.beta - 1 / (cfg.eps * 2.5 * math.tan(2.5)) - math.log(cfg.eps) / math.pi)) < 1e-12
    assert abs((1 + b.eta) ** 2 * b.beta_minus - b.beta_plus) < 1e-12
    # Im beta_e - Im(beta^+ + beta^-)/2 is fixed by the single propagating order
    z0 = zeta(0, SpectralPoint(2.5, 0.1), cfg)
    lhs = b.beta_e.imag - 0.5 * (b.beta_plus + b.beta_minus).imag
    assert lhs == pytest.approx((math.cos(0.1 * cfg.d0) - 1) / (z0.real * cfg.d), abs=1e-12)


def test_beta_cross_kappa_symmetry(cfg):
    bp = beta_cross(SpectralPoint(2.2, 0.2), cfg, 1)
    bm = beta_cross(SpectralPoint(2.2, -0.2), cfg, -1)
    assert abs(bp - bm) < 1e-12


def test_green_quasiperiodicity(cfg):
    pt = SpectralPoint(2.3, 0.17)
    g0 = quasiperiodic_green(pt, cfg, (0.1, 0.3), (0.0, 0.0))
    g1 = quasiperiodic_green(pt, cfg, (0.1 + cfg.d, 0.3), (0.0, 0.0))
    assert abs(g1 - cmath.exp(1j * pt.kappa * cfg.d) * g0) < 1e-12


def test_green_helmholtz_fd(cfg):
    pt = SpectralPoint(2.3, 0.17)
    h = 1e-3
    x = np.array([0.21, 0.13])

    def g(p):
        return quasiperiodic_green(pt, cfg, p, (0.0, 0.0))

    lap = (g(x + [h, 0]) + g(x - [h, 0]) + g(x + [0, h]) + g(x - [0, h]) - 4 * g(x)) / h**2
    assert abs(lap + pt.k.real**2 * g(x)) < 1e-4


def test_exterior_green_neumann(cfg):
    pt = SpectralPoint(2.3, 0.17)
    h = 1e-5
    y = (0.05, 1.3)
    up = exterior_green(pt, cfg, (0.2, 1.0 + h), y)
    dn = exterior_green(pt, cfg, (0.2, 1.0 - h), y)
    assert abs((up - dn) / (2 * h)) < 1e-8


def test_green_singular_argument(cfg):
    with pytest.raises(SingularArgument):
        quasiperiodic_green(SpectralPoint(2.0, 0.1), cfg, (0.3, 0.0), (0.3, 0.0))
