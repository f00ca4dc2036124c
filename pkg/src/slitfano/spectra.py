"""Frequency sweeps, Fano dip/peak detection and field-enhancement scaling."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import default_alpha, lambda_set, mode_shape, resonance_prediction, rt_asymptotic, slit_field_asymptotic
from .bie import N_DEFAULT, solve_scattering, slit_field
from .errors import FeatureNotFound, OutsideValidRegion, SlitFanoError
from .greens import PhysicalConfig, SpectralPoint
from .resonance import EMBEDDED, FABRY_PEROT, ResonanceBranch, find_resonances

MIDLINE_X2 = (0.25, 0.5, 0.75)
BASE_DENSITY = 400
REFINE_FACTOR = 64
C_CAP = 1024
GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)


@dataclass
class SpectrumRow:
    k: float
    T_abs: float
    R_abs: float
    T_arg: float
    energy_residual: float
    max_slit_amp: float
    source: str
    error: str = ""
    T: complex = complex("nan")
    R: complex = complex("nan")


@dataclass
class FanoFeature:
    k_star: float
    k_dip: float
    k_peak: float
    T_dip: float
    T_peak: float
    window_c: float
    trajectory: list = field(default_factory=list)

    @property
    def separation(self) -> float:
        return abs(self.k_peak - self.k_dip)


@dataclass
class EnhancementReport:
    family: str
    kappa_points: list
    eps_points: list
    slope_kappa: float
    r2_kappa: float
    slope_eps: float
    r2_eps: float


def _threads(threads):
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("SLITFANO_THREADS")
    return max(1, int(env)) if env else (os.cpu_count() or 1)


def _pmap(fn, items, threads):
    n = _threads(threads)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def midline_amplitude(pt: SpectralPoint, cfg: PhysicalConfig, densities) -> float:
    """max |u| over both slit midlines at x2 in {0.25, 0.5, 0.75}."""
    vals = [abs(slit_field(pt, cfg, densities, (s * 0.5 * cfg.d0, x2))) for s in (-1, 1) for x2 in MIDLINE_X2]
    return float(max(vals))


def _row_direct(k, cfg, kappa, N):
    pt = SpectralPoint(float(k), kappa)
    try:
        dens, c = solve_scattering(pt, cfg, N)
        amp = midline_amplitude(pt, cfg, dens)
    except (SlitFanoError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return SpectrumRow(float(k), math.nan, math.nan, math.nan, math.nan, math.nan, "direct", type(exc).__name__)
    flag = "flagged_condition" if c.flagged else ""
    return SpectrumRow(float(k), abs(c.T), abs(c.R), math.atan2(c.T.imag, c.T.real), c.energy_residual, amp, "direct", flag, c.T, c.R)


def _row_asymptotic(k, cfg, kappa, alpha):
    pt = SpectralPoint(float(k), kappa)
    try:
        lam = lambda_set(pt, cfg, alpha, "hat")
        c = rt_asymptotic(pt, cfg, lam, alpha)
        amp = max(abs(slit_field_asymptotic(pt, cfg, lam, alpha, x2, s)) for s in (-1, 1) for x2 in MIDLINE_X2)
    except (SlitFanoError, ZeroDivisionError, FloatingPointError) as exc:
        return SpectrumRow(float(k), math.nan, math.nan, math.nan, math.nan, math.nan, "asymptotic", type(exc).__name__)
    return SpectrumRow(float(k), abs(c.T), abs(c.R), math.atan2(c.T.imag, c.T.real), c.energy_residual, float(amp), "asymptotic", "", c.T, c.R)


def sweep(cfg: PhysicalConfig, kappa: float, k_grid, source: str = "direct", *, N: int = N_DEFAULT, alpha: float | None = None, threads: int | None = None) -> list:
    """One SpectrumRow per k; failures become rows with an error marker.

    Args:
        cfg: Geometry.
        kappa: Bloch wavenumber.
        k_grid: Real frequencies.
        source: "direct" (boundary-integral solve) or "asymptotic" (closed form).
        N: Basis size for the direct solver.
        alpha: Override for alpha in the asymptotic source.
        threads: Worker threads (default SLITFANO_THREADS or all cores).

    Returns:
        Rows in grid order.
    """
    ks = [float(k) for k in k_grid]
    if source == "direct":
        return _pmap(lambda k: _row_direct(k, cfg, kappa, N), ks, threads)
    if source == "asymptotic":
        a = default_alpha() if alpha is None else alpha
        return _pmap(lambda k: _row_asymptotic(k, cfg, kappa, a), ks, threads)
    raise ValueError(f"unknown source {source!r}")


def resonance_cluster(center: float, width: float, n: int = 81, span: float = 40.0) -> np.ndarray:
    """n points within center +- span*width, sinh-graded to a spacing of about width/4 at the center."""
    a = 3.2
    s = np.linspace(-1.0, 1.0, n)
    return center + span * width * np.sinh(a * s) / math.sinh(a)


def adaptive_grid(cfg: PhysicalConfig, kappa: float, k_min: float, k_max: float, *, branches: list | None = None, base_density: int = BASE_DENSITY, refine: int = REFINE_FACTOR) -> np.ndarray:
    """Base grid plus x`refine` density in each predicted embedded window and a cluster at each located root.

    The window half-width is kappa^2 eps; the cluster spacing scales with
    |Im k| so the much narrower true line width is resolved.
    """
    n = max(2, int(round((k_max - k_min) * base_density)) + 1)
    pts = [np.linspace(k_min, k_max, n)]
    m_hi = int(math.floor(k_max / math.pi)) + 1
    alpha = default_alpha()
    half = max(kappa * kappa * cfg.eps, 1.0 / base_density)
    for m in range(1, m_hi + 1):
        if m >= 2.0 / cfg.d:
            break
        kp = resonance_prediction(m, kappa, cfg, alpha)[1].real
        a, b = max(k_min, kp - half), min(k_max, kp + half)
        if a < b:
            pts.append(np.linspace(a, b, max(2, int(round((b - a) * base_density * refine)) + 1)))
    for br in branches or []:
        if br.family != EMBEDDED:
            continue
        width = max(abs(br.k.imag), 1e-9)
        c = resonance_cluster(br.k.real, width)
        pts.append(c[(c >= k_min) & (c <= k_max)])
    return np.unique(np.concatenate(pts))


def _abs_T(k, cfg, kappa, N):
    return abs(solve_scattering(SpectralPoint(float(k), kappa), cfg, N)[1].T)


def _golden(fn, a, b, tol, maximize):
    sgn = -1.0 if maximize else 1.0
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = sgn * fn(c), sgn * fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = sgn * fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = sgn * fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def detect_fano(cfg: PhysicalConfig, kappa: float, branch: ResonanceBranch, *, N: int = N_DEFAULT, threads: int | None = None, scan_points: int = 64, trajectory_points: int = 41) -> FanoFeature:
    """Locate the transmission dip and peak next to an embedded-family root.

    Windows I_c = [k* - c kappa^2 eps, k* + c kappa^2 eps] grow with c = 1, 2, 4, ...
    until |T| dips to <= 10 eps and peaks to >= 1 - 10 eps inside; both extrema
    are then refined by golden-section search.

    Args:
        cfg: Geometry.
        kappa: Nonzero Bloch wavenumber.
        branch: Embedded-family ResonanceBranch.
        N: Basis size.
        threads: Worker threads for the scan.
        scan_points: Uniform samples per window (a root-scaled cluster is added).
        trajectory_points: Complex T samples kept for the circle check.

    Returns:
        FanoFeature.

    Raises:
        FeatureNotFound: If c exceeds 1024, with the best extrema seen.
    """
    if branch.family != EMBEDDED:
        raise OutsideValidRegion("detect_fano needs an Embedded branch")
    if kappa == 0.0:
        raise OutsideValidRegion("no Fano feature at kappa = 0")
    k_star = branch.k.real
    width = max(abs(branch.k.imag), 1e-10)
    unit = kappa * kappa * cfg.eps
    tol = min(unit / 100.0, width / 100.0)
    lo_thr, hi_thr = 10.0 * cfg.eps, 1.0 - 10.0 * cfg.eps
    cache: dict = {}

    def absT(k):
        if k not in cache:
            cache[k] = _abs_T(k, cfg, kappa, N)
        return cache[k]

    c = 1.0
    best = None
    while c <= C_CAP:
        a, b = k_star - c * unit, k_star + c * unit
        grid = np.concatenate([np.linspace(a, b, scan_points), resonance_cluster(k_star, width)])
        grid = np.unique(grid[(grid >= a) & (grid <= b)])
        todo = [k for k in grid if k not in cache]
        for k, v in zip(todo, _pmap(lambda k: _abs_T(k, cfg, kappa, N), todo, threads)):
            cache[k] = v
        vals = np.array([cache[k] for k in grid])
        inner = np.arange(1, grid.size - 1)
        i_min = inner[np.argmin(vals[inner])]
        i_max = inner[np.argmax(vals[inner])]
        best = {"c": c, "k_dip": float(grid[i_min]), "T_dip": float(vals[i_min]), "k_peak": float(grid[i_max]), "T_peak": float(vals[i_max])}
        if vals[i_min] <= lo_thr and vals[i_max] >= hi_thr:
            k_dip, T_dip = _golden(absT, grid[i_min - 1], grid[i_min + 1], tol, False)
            k_peak, T_peak = _golden(absT, grid[i_max - 1], grid[i_max + 1], tol, True)
            sep = abs(k_peak - k_dip)
            lo, hi = min(k_dip, k_peak) - sep, max(k_dip, k_peak) + sep
            ks = np.linspace(lo, hi, trajectory_points)
            traj = _pmap(lambda k: (float(k), solve_scattering(SpectralPoint(float(k), kappa), cfg, N)[1].T), list(ks), threads)
            return FanoFeature(k_star, float(k_dip), float(k_peak), float(T_dip), float(T_peak), c, traj)
        c *= 2.0
    raise FeatureNotFound(f"no Fano dip/peak pair within c <= {C_CAP}", best)


def circle_distance(T_values) -> float:
    """max over samples of the distance to the circle |z + 1/2| = 1/2."""
    z = np.asarray(T_values, dtype=np.complex128)
    return float(np.max(np.abs(np.abs(z + 0.5) - 0.5)))


def loglog_slope(x, y) -> tuple:
    """Least-squares slope of log y against log x and its R^2."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), r2


def resonance_amplitude(cfg: PhysicalConfig, kappa: float, family: str, N: int = N_DEFAULT) -> tuple:
    """(Re k of the branch, max midline |u| there) with the root located at the solver's N."""
    br = [b for b in find_resonances(cfg, kappa, 1, True, N=N, verify=False) if b.family == family][0]
    pt = SpectralPoint(br.k.real, kappa)
    dens, _ = solve_scattering(pt, cfg, N)
    return br.k.real, midline_amplitude(pt, cfg, dens)


def enhancement_scan(cfg: PhysicalConfig, kappa_list, eps_list, branch_family: str, *, N: int = N_DEFAULT, threads: int | None = None) -> EnhancementReport:
    """Slopes of log max|u| against log kappa (at cfg.eps) and log eps (at kappa_list[0]).

    Args:
        cfg: Geometry; its eps is used for the kappa scan.
        kappa_list: At least three kappas; the first is used for the eps scan.
        eps_list: At least three eps values.
        branch_family: FabryPerot or Embedded.
        N: Basis size for root location and solves.
        threads: Worker threads.

    Returns:
        EnhancementReport.
    """
    if len(kappa_list) < 3 or len(eps_list) < 3:
        raise ValueError("need at least three kappa and three eps values")
    if branch_family not in (FABRY_PEROT, EMBEDDED):
        raise ValueError(f"unknown family {branch_family!r}")
    jobs = [(cfg, float(kp)) for kp in kappa_list] + [(cfg.with_eps(float(e)), float(kappa_list[0])) for e in eps_list]
    res = _pmap(lambda job: resonance_amplitude(job[0], job[1], branch_family, N), jobs, threads)
    nk = len(kappa_list)
    kp_pts = [(float(kp), r[1], r[0]) for kp, r in zip(kappa_list, res[:nk])]
    ep_pts = [(float(e), r[1], r[0]) for e, r in zip(eps_list, res[nk:])]
    sk, r2k = loglog_slope([p[0] for p in kp_pts], [p[1] for p in kp_pts])
    se, r2e = loglog_slope([p[0] for p in ep_pts], [p[1] for p in ep_pts])
    return EnhancementReport(branch_family, kp_pts, ep_pts, sk, r2k, se, r2e)


def slit_profiles(cfg: PhysicalConfig, kappa: float, k: float, x2_grid=None, *, N: int = N_DEFAULT) -> tuple:
    """Complex midline profiles (x2, u in S^-, u in S^+) at frequency k."""
    x2 = np.linspace(0.25, 0.75, 41) if x2_grid is None else np.asarray(x2_grid, float)
    pt = SpectralPoint(float(k), kappa)
    dens, _ = solve_scattering(pt, cfg, N)
    um = np.array([slit_field(pt, cfg, dens, (-0.5 * cfg.d0, x)) for x in x2])
    up = np.array([slit_field(pt, cfg, dens, (0.5 * cfg.d0, x)) for x in x2])
    return x2, um, up


def mode_shape_report(cfg: PhysicalConfig, kappa: float, k: float, m: int = 1, *, N: int = N_DEFAULT) -> dict:
    """Overlap of each slit profile with the predicted shape and the inter-slit correlation.

    Returns:
        Dict with overlap_minus, overlap_plus (|<u, s>| / (|u||s|)) and
        correlation (Re <u-, u+> / (|u-||u+|), -1 for exact antisymmetry).
    """
    x2 = np.linspace(0.25, 0.75, 41)
    _, um, up = slit_profiles(cfg, kappa, k, x2, N=N)
    s = mode_shape(k, m, x2)

    def overlap(u):
        return float(abs(np.vdot(s, u)) / (np.linalg.norm(s) * np.linalg.norm(u)))

    corr = float(np.real(np.vdot(um, up)) / (np.linalg.norm(um) * np.linalg.norm(up)))
    return {"overlap_minus": overlap(um), "overlap_plus": overlap(up), "correlation": corr}
