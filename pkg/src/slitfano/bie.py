"""Galerkin discretization of the four-aperture boundary-integral system.

Densities on I = (-1/2, 1/2) are expanded in psi_j(X) = T_j(2X)/sqrt(1/4 - X^2).
With t = 2X the Galerkin entries read

    A_ij = int int T_i(t) w(t) K(t/2, s/2) T_j(s) w(s) dt ds,  w = (1 - t^2)^(-1/2),

so a constant kernel c contributes c*pi^2 at (0, 0) and <phi, 1> = pi*c_0.
Log singularities are integrated in closed form, smooth remainders by
Gauss-Chebyshev quadrature, and the Rayleigh / slit-mode tails through exact
Bessel projections of the exponentials and cosines.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
from scipy.special import jv

from . import _kernels
from .errors import ModeResonance, OutsideValidRegion, QuadratureFailure, SingularSystem
from .greens import (
    BetaSet,
    PhysicalConfig,
    SpectralPoint,
    beta_cross,
    beta_e,
    branch_sqrt,
    check_branch_points,
    zeta,
)

N_DEFAULT = 48
M_EXTERIOR = 4096
M_INTERIOR = 2048
COND_FLAG = 1e12
LN2 = math.log(2.0)

_I_POW = np.array([1.0, 1.0j, -1.0, -1.0j])


def _ipow(idx):
    """i**idx for integer arrays, exact."""
    return _I_POW[np.mod(idx, 4)]


@dataclass
class DiscreteOperator:
    """Dense Galerkin matrix of one rescaled boundary-integral operator."""

    n_modes: int
    entries: np.ndarray
    basis: str = "weighted_chebyshev"
    name: str = ""


@dataclass
class ApertureDensities:
    """Coefficient vectors of phi_1^-, phi_1^+, phi_2^-, phi_2^+ in the weighted basis."""

    phi1_minus: np.ndarray
    phi1_plus: np.ndarray
    phi2_minus: np.ndarray
    phi2_plus: np.ndarray
    averages: dict = field(default_factory=dict)

    @classmethod
    def from_coefficients(cls, blocks) -> "ApertureDensities":
        b = [np.asarray(x, dtype=np.complex128) for x in blocks]
        names = ("phi1_minus", "phi1_plus", "phi2_minus", "phi2_plus")
        avg = {n: complex(np.pi * v[0]) for n, v in zip(names, b)}
        return cls(*b, averages=avg)

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.phi1_minus, self.phi1_plus, self.phi2_minus, self.phi2_plus])


@dataclass
class ScatteringCoefficients:
    """Zeroth-order reflection and transmission with the energy residual."""

    R: complex
    T: complex
    energy_residual: float
    condition: float = float("nan")
    flagged: bool = False


# ---------------------------------------------------------------------------
# basis and k-independent pieces
# ---------------------------------------------------------------------------


class ChebyshevBasis:
    """Quadrature tables and closed-form log matrices for basis size N."""

    def __init__(self, n_modes: int):
        if n_modes < 8:
            raise ValueError("basis size N must be at least 8")
        self.N = n = n_modes
        self.Q = q = 4 * n
        theta = (2.0 * np.arange(1, q + 1) - 1.0) * np.pi / (2.0 * q)
        self.t = np.cos(theta)
        self.T = np.cos(np.outer(theta, np.arange(n)))
        self.qw = np.pi / q
        j = np.arange(n, dtype=np.float64)
        # Galerkin matrix of ln|X - Y| (diagonal)
        self.log_diag = np.where(j == 0, -2.0 * np.pi**2 * LN2, -(np.pi**2) / (2.0 * np.maximum(j, 1.0)))
        self.norms = np.where(j == 0, np.pi, 0.5 * np.pi)
        self.P = np.zeros((n, n))
        self.P[0, 0] = np.pi**2
        self.e0 = np.zeros(n)
        self.e0[0] = np.pi
        self.corner_minus = self._corner_matrix()
        sign = (-1.0) ** j
        self.corner_plus = np.outer(sign, sign) * self.corner_minus
        self.H1 = self.smooth_galerkin(self._h1_kernel)
        self.H2 = self.smooth_galerkin(self._h2_kernel)
        self.S = (
            2.0 * np.diag(self.log_diag) + self.H1 + self.corner_minus + self.corner_plus - 2.0 * LN2 * self.P + self.H2
        ) / np.pi
        self._pm = None
        self._pm_lock = threading.Lock()

    def smooth_galerkin(self, kernel) -> np.ndarray:
        """(pi/Q)^2 T^T K T for a kernel K(X, Y) evaluated on the Chebyshev nodes."""
        X = 0.5 * self.t[:, None]
        Y = 0.5 * self.t[None, :]
        K = kernel(X, Y)
        if not np.all(np.isfinite(K)):
            raise QuadratureFailure("non-finite kernel values on the quadrature grid")
        return self.qw**2 * (self.T.T @ K @ self.T)

    @staticmethod
    def _h1_kernel(X, Y):
        v = X - Y
        return np.log(0.5 * np.pi * np.sinc(0.5 * v))

    @staticmethod
    def _h2_kernel(X, Y):
        u = X + Y
        # cos(pi u/2)/((1-u)(1+u)) = (pi/2) sinc((1-u)/2)/(1+u)
        return np.log(0.5 * np.pi * np.sinc(0.5 * (1.0 - u)) / (1.0 + u))

    def _corner_matrix(self) -> np.ndarray:
        """Galerkin matrix of ln(2 - t - s), exact inner integral, Gauss-Legendre outer.

        t = cos(2 phi) makes the outer integrand analytic on [0, pi/2].
        """
        n = self.N
        x, wq = np.polynomial.legendre.leggauss(8 * n + 64)
        phi = 0.25 * np.pi * (x + 1.0)
        wq = 0.25 * np.pi * wq * 2.0
        theta = 2.0 * phi
        rho = 2.0 - np.cos(theta) + np.sqrt(2.0) * np.sin(phi) * np.sqrt(3.0 - np.cos(theta))
        j = np.arange(n)
        F = np.empty((phi.size, n))
        F[:, 0] = np.pi * np.log(0.5 * rho)
        F[:, 1:] = -(np.pi / j[1:]) * rho[:, None] ** (-j[1:].astype(np.float64))
        C = np.cos(np.outer(theta, j))
        return (C * wq[:, None]).T @ F

    def mode_projections(self) -> np.ndarray:
        """p[m-1, i] = int psi_i(X) cos(m pi (X + 1/2)) dX for m = 1..M_INTERIOR."""
        with self._pm_lock:
            if self._pm is None:
                m = np.arange(1, M_INTERIOR + 1)
                i = np.arange(self.N)
                Jt = jv(i[None, :], 0.5 * np.pi * m[:, None])
                ph = np.cos(0.5 * np.pi * (m[:, None] + i[None, :]))
                ph = np.rint(ph)
                self._pm = np.pi * Jt * ph
            return self._pm


_basis_lock = threading.Lock()
_basis_cache: dict = {}


def get_basis(n_modes: int) -> ChebyshevBasis:
    with _basis_lock:
        b = _basis_cache.get(n_modes)
        if b is None:
            b = ChebyshevBasis(n_modes)
            _basis_cache[n_modes] = b
        return b


def bessel_projection(n_modes: int, omega) -> np.ndarray:
    """f_i(omega) = int T_i(t) w(t) exp(i omega t) dt = pi i^i J_i(omega)."""
    i = np.arange(n_modes)
    return np.pi * _ipow(i) * jv(i, omega)


def _product_projection(size: int, omega: float) -> np.ndarray:
    """F_il = int T_i T_l w exp(i omega t) dt for i, l < size."""
    idx = np.arange(size)
    s = idx[:, None] + idx[None, :]
    d = np.abs(idx[:, None] - idx[None, :])
    top = 2 * size
    Jv = jv(np.arange(top), omega)
    return 0.5 * np.pi * (_ipow(s) * Jv[s] + _ipow(d) * Jv[d])


def modulated_log(n_modes: int, omega: float, extra: int = 24) -> np.ndarray:
    """Galerkin matrix of exp(i omega (t - s)) ln|X - Y|, X - Y = (t - s)/2."""
    size = n_modes + extra
    Fp = _product_projection(size, omega)
    Fm = _product_projection(size, -omega)
    l = np.arange(size, dtype=np.float64)
    lam = np.where(l == 0, -np.pi * LN2, -np.pi / np.maximum(l, 1.0))
    norms = np.where(l == 0, np.pi, 0.5 * np.pi)
    ml = (Fp[:n_modes, :] * (lam / norms)) @ Fm[:, :n_modes]
    f_p = bessel_projection(n_modes, omega)
    f_m = bessel_projection(n_modes, -omega)
    return ml - LN2 * np.outer(f_p, f_m)


@lru_cache(maxsize=64)
def _static_pieces(d: float, d0: float, eps: float, kappa: float, n_modes: int, m_ext: int):
    """k-independent exterior pieces for fixed geometry, kappa and N."""
    basis = get_basis(n_modes)
    cfg = PhysicalConfig(d, d0, eps)
    omega = 0.5 * kappa * eps
    f_p = bessel_projection(n_modes, omega)
    f_m = bessel_projection(n_modes, -omega)
    lg = np.diag(basis.log_diag)
    ln_scale = math.log(2.0 * math.pi * eps / d)
    # same slit: everything in G^e except beta_e*P, (1/pi) ln|X-Y| and the Rayleigh tail
    def sigma_k(X, Y):
        z = eps * (X - Y)
        return np.exp(1j * kappa * z) * np.log(np.abs(np.sinc(z / d)))

    same = (
        ln_scale * (np.outer(f_p, f_m) - basis.P)
        + (modulated_log(n_modes, omega) - lg)
        + basis.smooth_galerkin(sigma_k)
    ) / np.pi

    cross = {}
    for sgn in (1, -1):
        s = sgn * cfg.d0

        def rho_k(X, Y, s=s):
            z = eps * (X - Y) + s
            head = np.exp(1j * kappa * z) * np.log(np.abs(2.0 * np.sin(np.pi * z / d)))
            return head - np.exp(1j * kappa * s) * math.log(abs(2.0 * math.sin(math.pi * s / d)))

        cross[sgn] = basis.smooth_galerkin(rho_k) / np.pi

    n = np.arange(-m_ext, m_ext + 1)
    kn = kappa + 2.0 * np.pi * n / d
    om = 0.5 * eps * kn
    i = np.arange(n_modes)
    J = jv(i[None, :], np.abs(om)[:, None]) * np.where(om[:, None] < 0, (-1.0) ** i[None, :], 1.0)
    J = np.ascontiguousarray(J)
    phase = _ipow(i[:, None]) * _ipow(-i[None, :])
    for arr in (same, cross[1], cross[-1], J):
        arr.setflags(write=False)
    return same, cross, J, kn, phase


# ---------------------------------------------------------------------------
# k-dependent assembly
# ---------------------------------------------------------------------------


@dataclass
class SystemPieces:
    """Decomposed operator blocks at one spectral point.

    Te + Ti = beta P + S + Sinf, Te^{+-} = beta^{+-} P + Sinf_pm[+-1],
    T~i = beta~ P + Sinf_tilde.
    """

    n_modes: int
    P: np.ndarray
    S: np.ndarray
    Sinf: np.ndarray
    Sinf_ext: np.ndarray
    Sinf_int: np.ndarray
    Sinf_pm: dict
    Sinf_tilde: np.ndarray
    beta_e: complex
    beta_plus: complex
    beta_minus: complex
    beta_i: complex
    beta_tilde: complex
    beta_sum: complex
    beta_diff: complex
    f_forcing: np.ndarray
    f_conj: np.ndarray
    zeta0: complex


def assemble_pieces(pt: SpectralPoint, cfg: PhysicalConfig, N: int = N_DEFAULT, m_ext: int = M_EXTERIOR) -> SystemPieces:
    """Assemble all decomposed blocks at a spectral point (complex k allowed).

    Args:
        pt: Spectral point.
        cfg: Geometry.
        N: Basis size.
        m_ext: Rayleigh truncation |n| <= m_ext for the Bessel-projected tail.

    Returns:
        SystemPieces.
    """
    check_branch_points(pt, cfg)
    basis = get_basis(N)
    k = pt.k
    eps = cfg.eps
    same, cross, J, kn, phase = _static_pieces(cfg.d, cfg.d0, eps, pt.kappa, N, m_ext)

    z = branch_sqrt(k * k - kn * kn)
    r = -1j / (cfg.d * z)
    nz = kn != pt.kappa
    nvals = np.rint((kn - pt.kappa) * cfg.d / (2.0 * np.pi))
    r[nz] += 1.0 / (2.0 * np.pi * np.abs(nvals[nz]))
    z0 = zeta(0, pt, cfg)

    be = beta_e(pt, cfg)
    bp = beta_cross(pt, cfg, +1)
    bm = bp if pt.kappa == 0.0 else beta_cross(pt, cfg, -1)
    ln_scale = math.log(2.0 * math.pi * eps / cfg.d) / math.pi

    g_same = np.pi**2 * phase * _kernels.weighted_gram(r, J)
    Sinf_e = same + g_same - (be - ln_scale) * basis.P
    Sinf_pm = {}
    for sgn, bval in ((1, bp), (-1, bm)):
        w = r * np.exp(1j * kn * sgn * cfg.d0)
        head = np.exp(1j * pt.kappa * sgn * cfg.d0) * math.log(abs(2.0 * math.sin(math.pi * cfg.d0 / cfg.d))) / np.pi
        g = np.pi**2 * phase * _kernels.weighted_gram(w, J)
        Sinf_pm[sgn] = cross[sgn] + g + (head - bval) * basis.P

    q = _kernels.interior_coeffs(k, eps, M_INTERIOR, False)
    qt = _kernels.interior_coeffs(k, eps, M_INTERIOR, True)
    pm = basis.mode_projections()
    Sinf_i = _kernels.weighted_gram(2.0 * q, pm)
    Sinf_t = _kernels.weighted_gram(2.0 * qt, pm)
    if k.imag == 0.0 and pt.kappa == 0.0:
        Sinf_i = Sinf_i.real.astype(np.complex128)
        Sinf_t = Sinf_t.real.astype(np.complex128)

    sin_k = np.sin(k)
    two_ln2 = 2.0 * LN2 / np.pi
    with np.errstate(all="ignore"):
        bi = np.cos(k) / (sin_k * eps * k) + two_ln2
        bt = 1.0 / (eps * k * sin_k)
        b_sum = be + two_ln2 + 1.0 / (np.tan(0.5 * k) * eps * k)
        b_diff = be + two_ln2 - np.tan(0.5 * k) / (eps * k)

    omega = 0.5 * pt.kappa * eps
    return SystemPieces(
        n_modes=N,
        P=basis.P,
        S=basis.S,
        Sinf=Sinf_e + Sinf_i,
        Sinf_ext=Sinf_e,
        Sinf_int=Sinf_i,
        Sinf_pm=Sinf_pm,
        Sinf_tilde=Sinf_t,
        beta_e=be,
        beta_plus=bp,
        beta_minus=bm,
        beta_i=complex(bi),
        beta_tilde=complex(bt),
        beta_sum=complex(b_sum),
        beta_diff=complex(b_diff),
        f_forcing=bessel_projection(N, omega),
        f_conj=bessel_projection(N, -omega),
        zeta0=z0,
    )


def assemble_block(pt: SpectralPoint, cfg: PhysicalConfig, N: int = N_DEFAULT, which: str = "Te") -> DiscreteOperator:
    """Galerkin matrix of one rescaled operator.

    Args:
        pt: Spectral point.
        cfg: Geometry.
        N: Basis size (>= 8).
        which: One of "Te", "Ti", "Te_plus", "Te_minus", "Ti_tilde".

    Returns:
        DiscreteOperator.

    Raises:
        ModeResonance: For the interior blocks exactly at sin k = 0.
    """
    pcs = assemble_pieces(pt, cfg, N)
    basis = get_basis(N)
    if which in ("Ti", "Ti_tilde") and not np.isfinite(pcs.beta_tilde):
        raise ModeResonance(f"slit cavity resonance at k={pt.k}")
    lg = np.diag(basis.log_diag) / np.pi
    if which == "Te":
        m = pcs.beta_e * pcs.P + lg + pcs.Sinf_ext
    elif which == "Ti":
        m = pcs.beta_i * pcs.P + (pcs.S - lg) + pcs.Sinf_int
    elif which == "Te_plus":
        m = pcs.beta_plus * pcs.P + pcs.Sinf_pm[1]
    elif which == "Te_minus":
        m = pcs.beta_minus * pcs.P + pcs.Sinf_pm[-1]
    elif which == "Ti_tilde":
        m = pcs.beta_tilde * pcs.P + pcs.Sinf_tilde
    else:
        raise ValueError(f"unknown block {which!r}")
    return DiscreteOperator(n_modes=N, entries=np.asarray(m, dtype=np.complex128), name=which)


def full_matrix(pcs: SystemPieces) -> np.ndarray:
    """4N x 4N Galerkin matrix of the full system (unknown psi = eps*phi)."""
    if not (np.isfinite(pcs.beta_i) and np.isfinite(pcs.beta_tilde)):
        raise ModeResonance("slit cavity resonance: sin k = 0")
    A = (pcs.beta_e + pcs.beta_i) * pcs.P + pcs.S + pcs.Sinf
    Em = pcs.beta_minus * pcs.P + pcs.Sinf_pm[-1]
    Ep = pcs.beta_plus * pcs.P + pcs.Sinf_pm[1]
    Tt = pcs.beta_tilde * pcs.P + pcs.Sinf_tilde
    Z = np.zeros_like(A)
    return np.block([[A, Em, Tt, Z], [Ep, A, Z, Tt], [Tt, Z, A, Em], [Z, Tt, Ep, A]])


def half_matrix(pcs: SystemPieces, sign: int) -> np.ndarray:
    """2N x 2N matrix of T_+ (sign=+1) or T_- (sign=-1), built without the sin k poles."""
    bdiag = pcs.beta_sum if sign > 0 else pcs.beta_diff
    D = bdiag * pcs.P + pcs.S + pcs.Sinf + sign * pcs.Sinf_tilde
    Em = pcs.beta_minus * pcs.P + pcs.Sinf_pm[-1]
    Ep = pcs.beta_plus * pcs.P + pcs.Sinf_pm[1]
    return np.block([[D, Em], [Ep, D]])


def _lu_solve(A: np.ndarray, b: np.ndarray):
    """LU solve with a reciprocal 1-norm condition estimate."""
    with np.errstate(all="ignore"):
        lu, piv = sla.lu_factor(A, check_finite=True)
    if np.any(np.diag(lu) == 0.0):
        raise SingularSystem("exactly singular system matrix", condition=float("inf"))
    anorm = np.linalg.norm(A, 1)
    gecon = sla.get_lapack_funcs("gecon", (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    cond = float("inf") if rcond == 0.0 else 1.0 / rcond
    x = sla.lu_solve((lu, piv), b)
    return x, cond


def _rt_from_psi(pcs: SystemPieces, cfg: PhysicalConfig, kappa: float, psi_blocks) -> tuple:
    c1m, c1p, c2m, c2p = psi_blocks
    pref = -1j / (cfg.d * pcs.zeta0)
    em = np.exp(1j * kappa * cfg.d0 / 2.0)
    ep = np.exp(-1j * kappa * cfg.d0 / 2.0)
    fc = pcs.f_conj
    R = 1.0 + pref * (em * (fc @ c1m) + ep * (fc @ c1p))
    T = pref * (em * (fc @ c2m) + ep * (fc @ c2p))
    return complex(R), complex(T)


def forcing(pcs: SystemPieces, cfg: PhysicalConfig, kappa: float):
    """Galerkin projections of f^- and f^+."""
    fm = -np.exp(-1j * kappa * cfg.d0 / 2.0) * pcs.f_forcing
    fp = -np.exp(1j * kappa * cfg.d0 / 2.0) * pcs.f_forcing
    return fm, fp


def solve_scattering(pt: SpectralPoint, cfg: PhysicalConfig, N: int = N_DEFAULT, pieces: SystemPieces | None = None):
    """Direct solve of the 4N x 4N system for a plane wave at Bloch wavenumber kappa.

    Args:
        pt: Spectral point with real k.
        cfg: Geometry.
        N: Basis size.
        pieces: Pre-assembled blocks (optional).

    Returns:
        Tuple (ApertureDensities, ScatteringCoefficients).  Densities are the
        coefficients of phi (not eps*phi).  If the condition estimate exceeds
        1e12 the result is returned with ``flagged=True``.

    Raises:
        SingularSystem: If the matrix is exactly singular.
    """
    pcs = pieces if pieces is not None else assemble_pieces(pt, cfg, N)
    A = full_matrix(pcs)
    fm, fp = forcing(pcs, cfg, pt.kappa)
    Z = np.zeros(N, dtype=np.complex128)
    rhs = np.concatenate([2.0 * fm, 2.0 * fp, Z, Z])
    psi, cond = _lu_solve(A, rhs)
    blocks = [psi[j * N : (j + 1) * N] for j in range(4)]
    R, T = _rt_from_psi(pcs, cfg, pt.kappa, blocks)
    dens = ApertureDensities.from_coefficients([b / cfg.eps for b in blocks])
    coeffs = ScatteringCoefficients(
        R=R,
        T=T,
        energy_residual=abs(abs(R) ** 2 + abs(T) ** 2 - 1.0),
        condition=cond,
        flagged=cond > COND_FLAG,
    )
    return dens, coeffs


@dataclass
class EvenOddSystems:
    """Discretized T_+ and T_- with the shared right-hand side [f^-, f^+]."""

    T_plus: np.ndarray
    T_minus: np.ndarray
    rhs: np.ndarray
    pieces: SystemPieces


def even_odd_split(pt: SpectralPoint, cfg: PhysicalConfig, N: int = N_DEFAULT, pieces: SystemPieces | None = None) -> EvenOddSystems:
    """Discretizations of T_+ = T^ + T~ and T_- = T^ - T~."""
    pcs = pieces if pieces is not None else assemble_pieces(pt, cfg, N)
    fm, fp = forcing(pcs, cfg, pt.kappa)
    return EvenOddSystems(half_matrix(pcs, +1), half_matrix(pcs, -1), np.concatenate([fm, fp]), pcs)


def solve_even_odd(pt: SpectralPoint, cfg: PhysicalConfig, N: int = N_DEFAULT, pieces: SystemPieces | None = None):
    """Solve T_+ and T_- separately and recombine into the full solution.

    Returns:
        Same as :func:`solve_scattering`.
    """
    sysm = even_odd_split(pt, cfg, N, pieces)
    xp, cp = _lu_solve(sysm.T_plus, sysm.rhs)
    xm, cm = _lu_solve(sysm.T_minus, sysm.rhs)
    top = xp + xm
    bot = xp - xm
    blocks = [top[:N], top[N:], bot[:N], bot[N:]]
    R, T = _rt_from_psi(sysm.pieces, cfg, pt.kappa, blocks)
    dens = ApertureDensities.from_coefficients([b / cfg.eps for b in blocks])
    cond = max(cp, cm)
    return dens, ScatteringCoefficients(R, T, abs(abs(R) ** 2 + abs(T) ** 2 - 1.0), cond, cond > COND_FLAG)


# ---------------------------------------------------------------------------
# field inside the slits
# ---------------------------------------------------------------------------


def _mode_profiles(k: complex, eps: float, m: np.ndarray, x2: float):
    """cos(g x2)/(g sin g) and cos(g (1 - x2))/(g sin g) for g = gamma_m."""
    big = m * np.pi / eps
    g = branch_sqrt(big * big - k * k)
    top = np.empty(m.size, dtype=np.complex128)
    bot = np.empty(m.size, dtype=np.complex128)
    good = g.real > 0.0
    with np.errstate(over="ignore", under="ignore"):
        den = g[good] * (1.0 - np.exp(-2.0 * g[good]))
        top[good] = -(np.exp(-g[good] * (1.0 - x2)) + np.exp(-g[good] * (1.0 + x2))) / den
        bot[good] = -(np.exp(-g[good] * x2) + np.exp(-g[good] * (2.0 - x2))) / den
        gam = k * np.ones(int(np.sum(~good)), dtype=np.complex128) if False else 1j * g[~good]
        top[~good] = np.cos(gam * x2) / (gam * np.sin(gam))
        bot[~good] = np.cos(gam * (1.0 - x2)) / (gam * np.sin(gam))
    return top, bot


def slit_modal_coefficients(pt: SpectralPoint, densities: ApertureDensities):
    """Propagating-mode amplitudes (a0, b0) in each slit.

    u = a0 cos(k x2) + b0 cos(k (1 - x2)) + evanescent terms, with
    a0 = -<phi_1, 1>/(k sin k) and b0 = -<phi_2, 1>/(k sin k).

    Returns:
        Dict with keys "minus" and "plus" holding (a0, b0).
    """
    k = pt.k
    ks = k * np.sin(k)
    if ks == 0:
        raise ModeResonance("k sin k = 0")
    av = densities.averages
    return {
        "minus": (-av["phi1_minus"] / ks, -av["phi2_minus"] / ks),
        "plus": (-av["phi1_plus"] / ks, -av["phi2_plus"] / ks),
    }


def slit_field(pt: SpectralPoint, cfg: PhysicalConfig, densities: ApertureDensities, x, margin: float = 5.0, modes: int = M_INTERIOR) -> complex:
    """Total field at a point inside one of the slits from the interior representation.

    Args:
        pt: Spectral point.
        cfg: Geometry.
        densities: Solved aperture densities.
        x: Point (x1, x2) with |x1 -+ d0/2| < eps/2.
        margin: Required distance of x2 from both ends, in units of eps.
        modes: Number of transverse modes m >= 1 kept.

    Returns:
        u(x).

    Raises:
        OutsideValidRegion: If x is not inside a slit away from its ends.
    """
    x1, x2 = float(x[0]), float(x[1])
    eps = cfg.eps
    if not (margin * eps <= x2 <= 1.0 - margin * eps):
        raise OutsideValidRegion(f"x2={x2} closer than {margin}*eps to a slit end")
    if abs(x1 - 0.5 * cfg.d0) < 0.5 * eps:
        X = (x1 - 0.5 * cfg.d0) / eps
        c1, c2 = densities.phi1_plus, densities.phi2_plus
    elif abs(x1 + 0.5 * cfg.d0) < 0.5 * eps:
        X = (x1 + 0.5 * cfg.d0) / eps
        c1, c2 = densities.phi1_minus, densities.phi2_minus
    else:
        raise OutsideValidRegion(f"x1={x1} is not inside a slit")
    k = pt.k
    N = c1.size
    basis = get_basis(N)
    sk = np.sin(k)
    u0 = -(np.pi * c1[0] * np.cos(k * x2) + np.pi * c2[0] * np.cos(k * (1.0 - x2))) / (k * sk)
    pm = basis.mode_projections()[:modes]
    m = np.arange(1, pm.shape[0] + 1)
    top, bot = _mode_profiles(k, eps, m, x2)
    cosm = np.cos(m * np.pi * (X + 0.5))
    um = -np.sum(2.0 * cosm * (top * (pm @ c1) + bot * (pm @ c2)))
    return complex(u0 + um)
