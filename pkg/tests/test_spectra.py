import math

import numpy as np
import pytest

from slitfano import spectra
from slitfano.errors import FeatureNotFound, OutsideValidRegion
from slitfano.resonance import EMBEDDED, FABRY_PEROT, find_branch
from slitfano.spectra import (
    adaptive_grid,
    circle_distance,
    detect_fano,
    enhancement_scan,
    loglog_slope,
    mode_shape_report,
    resonance_cluster,
    sweep,
)


@pytest.fixture(scope="module")
def branch(cfg):
    return find_branch(cfg, 0.1, EMBEDDED, use_full=True, N=48, verify=False)


@pytest.fixture(scope="module")
def fano(cfg, branch):
    return detect_fano(cfg, 0.1, branch)


def test_sweep_rows_and_errors(cfg):
    ks = [2.6, 2.9, 2 * math.pi - 0.1]
    rows = sweep(cfg, 0.1, ks, threads=2)
    assert [r.k for r in rows] == ks
    for r in rows[:2]:
        assert r.error == "" and r.energy_residual <= 1e-6
        assert 0.0 <= r.T_abs <= 1 + 1e-3 and 0.0 <= r.R_abs <= 1 + 1e-3
    assert rows[2].error == "BranchPointProximity" and math.isnan(rows[2].T_abs)


def test_sweep_deterministic(cfg):
    ks = np.linspace(2.5, 3.1, 7)
    a = sweep(cfg, 0.1, ks, threads=1)
    b = sweep(cfg, 0.1, ks, threads=4)
    assert [r.T for r in a] == [r.T for r in b]


def test_direct_vs_asymptotic_off_feature(cfg):
    ks = [2.5, 2.7, 3.0]
    d = sweep(cfg, 0.1, ks, "direct")
    a = sweep(cfg, 0.1, ks, "asymptotic")
    for rd, ra in zip(d, a):
        assert abs(rd.T - ra.T) <= cfg.eps + 0.1**2


def test_no_feature_at_kappa_zero(cfg, alpha):
    k_star = find_branch(cfg, 0.0, EMBEDDED, alpha=alpha, verify=False).k.real
    ks = k_star + np.linspace(-2e-3, 2e-3, 41)
    t = np.array([r.T_abs for r in sweep(cfg, 0.0, ks)])
    assert np.max(np.abs(np.diff(t))) < 1e-3


def test_adaptive_grid_contains_cluster(cfg, branch):
    g = adaptive_grid(cfg, 0.1, 2.5, 3.1, branches=[branch])
    assert np.all(np.diff(g) > 0)
    near = g[np.abs(g - branch.k.real) < 5 * abs(branch.k.imag)]
    assert near.size >= 10
    assert 240 <= g.size <= 2000


def test_resonance_cluster_spacing():
    c = resonance_cluster(1.0, 1e-6)
    assert c.size == 81 and c[40] == 1.0
    assert c[-1] - 1.0 == pytest.approx(40e-6)
    assert (c[41] - c[40]) < 0.3e-6


def test_fano_figure_configuration(fano, cfg):
    assert abs(fano.k_star - 2.83) < 0.05
    assert fano.T_dip <= 10 * cfg.eps and fano.T_peak >= 1 - 10 * cfg.eps
    assert fano.T_peak > 0.9
    unit = 0.1**2 * cfg.eps
    for k in (fano.k_dip, fano.k_peak):
        assert abs(k - fano.k_star) <= fano.window_c * unit * 10


def test_fano_dip_below_window_edges(cfg, fano):
    edges = sweep(cfg, 0.1, [fano.k_star - 0.1**2 * cfg.eps, fano.k_star + 0.1**2 * cfg.eps])
    assert fano.T_dip < 0.5 * min(r.T_abs for r in edges)


def test_fano_circle(fano, cfg):
    assert circle_distance([t for _, t in fano.trajectory]) <= 10 * cfg.eps


def test_fano_single_interior_extrema(cfg, fano):
    lo, hi = sorted((fano.k_dip, fano.k_peak))
    sep = hi - lo
    ks = np.linspace(lo - 2 * sep, hi + 2 * sep, 61)
    t = np.array([r.T_abs for r in sweep(cfg, 0.1, ks)])
    d = np.sign(np.diff(t))
    changes = np.count_nonzero(d[1:] != d[:-1])
    assert changes == 2


@pytest.mark.slow
def test_fano_kappa_halving(cfg, fano):
    b2 = find_branch(cfg, 0.05, EMBEDDED, use_full=True, N=48, verify=False)
    f2 = detect_fano(cfg, 0.05, b2)
    assert 3.0 <= fano.separation / f2.separation <= 5.0


@pytest.mark.slow
def test_fano_grid_stability(cfg, branch, fano):
    f2 = detect_fano(cfg, 0.1, branch, scan_points=128)
    tol = 0.1**2 * cfg.eps / 50
    assert abs(f2.k_dip - fano.k_dip) < tol and abs(f2.k_peak - fano.k_peak) < tol


def test_fano_errors(cfg, branch, monkeypatch):
    fp = find_branch(cfg, 0.1, FABRY_PEROT, verify=False)
    with pytest.raises(OutsideValidRegion):
        detect_fano(cfg, 0.1, fp)
    monkeypatch.setattr(spectra, "C_CAP", 2)
    monkeypatch.setattr(spectra, "_abs_T", lambda k, *a: 0.6 + 0.0 * k)
    with pytest.raises(FeatureNotFound) as exc:
        detect_fano(cfg, 0.1, branch, scan_points=8)
    assert exc.value.best["T_dip"] == 0.6


def test_mode_shape_at_fano(cfg, branch):
    rep = mode_shape_report(cfg, 0.1, branch.k.real)
    assert rep["overlap_minus"] >= 0.95 and rep["overlap_plus"] >= 0.95
    assert rep["correlation"] < -0.9


@pytest.mark.xfail(strict=True, reason="the stated sin(k(x2-1/2)) shape contradicts the modal derivation; profiles are cos-shaped for odd m")
def test_mode_shape_sin_statement(cfg, branch):
    from slitfano.spectra import slit_profiles

    x2, um, _ = slit_profiles(cfg, 0.1, branch.k.real)
    s = np.sin(branch.k.real * (x2 - 0.5))
    assert abs(np.vdot(s, um)) / (np.linalg.norm(s) * np.linalg.norm(um)) >= 0.95


def test_loglog_slope():
    x = np.array([0.1, 0.05, 0.025])
    s, r2 = loglog_slope(x, 3.0 / x)
    assert s == pytest.approx(-1.0) and r2 == pytest.approx(1.0)


def test_enhancement_scan_validation(cfg):
    with pytest.raises(ValueError):
        enhancement_scan(cfg, [0.1, 0.05], [0.05, 0.035, 0.025], EMBEDDED)
    with pytest.raises(ValueError):
        enhancement_scan(cfg, [0.1, 0.05, 0.025], [0.05, 0.035, 0.025], "Other")
