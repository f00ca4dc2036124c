"""Quasi-periodic Green functions, slit modal kernels and the beta constants.

Conventions: the slab occupies 0 < x2 < 1, the two slits of width ``eps`` are
centred at x1 = -d0/2 and x1 = +d0/2, and aperture points are written
x1 = eps*X +- d0/2 with X in I = (-1/2, 1/2).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli
from scipy.special import zeta as hurwitz_zeta

from . import _kernels
from .errors import (
    BranchPointProximity,
    ConfigError,
    ModeResonance,
    NonConvergence,
    SingularArgument,
)

DELTA_WOOD = 1e-6
DEFAULT_TOL = 1e-12
MAX_TERMS = 1_000_000


@dataclass(frozen=True)
class PhysicalConfig:
    """Grating geometry: period ``d``, slit offset ``d0``, slit width ``eps``."""

    d: float = 1.0
    d0: float = 0.4
    eps: float = 0.05

    def __post_init__(self):
        if not (0.0 < self.eps < self.d0):
            raise ConfigError(f"need 0 < eps < d0, got eps={self.eps}, d0={self.d0}")
        if not (self.d0 + self.eps < self.d):
            raise ConfigError(f"need d0 + eps < d, got d0={self.d0}, eps={self.eps}, d={self.d}")

    def with_eps(self, eps: float) -> "PhysicalConfig":
        return PhysicalConfig(self.d, self.d0, eps)


@dataclass(frozen=True)
class SpectralPoint:
    """Complex frequency ``k`` and real Bloch wavenumber ``kappa``."""

    k: complex
    kappa: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "k", complex(self.k))
        object.__setattr__(self, "kappa", float(self.kappa))

    def kappa_n(self, n: int, cfg: PhysicalConfig) -> float:
        return self.kappa + 2.0 * math.pi * n / cfg.d

    def check_zone(self, cfg: PhysicalConfig) -> None:
        """Raise ConfigError unless kappa lies in (-pi/d, pi/d]."""
        half = math.pi / cfg.d
        if not (-half < self.kappa <= half):
            raise ConfigError(f"kappa={self.kappa} outside the first Brillouin zone")


@dataclass(frozen=True)
class BetaSet:
    """Scalar constants governing the leading-order aperture interaction."""

    beta_e: complex
    beta_plus: complex
    beta_minus: complex
    beta_i: complex
    beta_tilde: complex
    beta: complex
    gamma: complex
    beta_hat: complex
    eta: complex

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


def branch_sqrt(z):
    """Square root with the branch cut on the negative imaginary axis.

    Args:
        z: Complex scalar or array.

    Returns:
        sqrt(z) with values in the sector arg in (-pi/4, 3pi/4].
    """
    if np.ndim(z) == 0:
        s = cmath.sqrt(complex(z))
        if s.imag < 0.0 and -s.imag >= s.real:
            s = -s
        return s
    return _kernels._np_branch_sqrt(z)


def zeta(n: int, pt: SpectralPoint, cfg: PhysicalConfig, delta_wood: float = DELTA_WOOD) -> complex:
    """Vertical wavenumber zeta_n = sqrt(k^2 - kappa_n^2).

    Args:
        n: Rayleigh order.
        pt: Spectral point.
        cfg: Geometry.
        delta_wood: Exclusion radius around branch points for real k.

    Returns:
        zeta_n on the branch cut along the negative imaginary axis.

    Raises:
        BranchPointProximity: If k is real and within ``delta_wood`` of |kappa_n|.
    """
    kn = pt.kappa_n(n, cfg)
    k = pt.k
    if k.imag == 0.0 and abs(abs(k.real) - abs(kn)) < delta_wood:
        raise BranchPointProximity(f"k={k.real} within {delta_wood} of branch point |kappa_{n}|={abs(kn)}")
    return branch_sqrt(k * k - kn * kn)


def in_diamond(pt: SpectralPoint, cfg: PhysicalConfig) -> bool:
    """True iff (kappa, k) lies in the single-propagating-mode diamond D1."""
    k = pt.k.real
    if pt.k.imag != 0.0:
        return False
    a = 2.0 * math.pi / cfg.d
    if not abs(pt.kappa) < math.pi / cfg.d:
        return False
    return 0.0 < k < min(abs(pt.kappa - a), abs(pt.kappa + a))


def check_branch_points(pt: SpectralPoint, cfg: PhysicalConfig, delta_wood: float = DELTA_WOOD, n_max: int = 4) -> None:
    """Raise BranchPointProximity if real k sits near any |kappa_n|, |n| <= n_max."""
    if pt.k.imag != 0.0:
        return
    for n in range(-n_max, n_max + 1):
        zeta(n, pt, cfg, delta_wood)


# ---------------------------------------------------------------------------
# exterior (Rayleigh-Bloch) sums
# ---------------------------------------------------------------------------


_B2K = np.abs(bernoulli(60)[2::2])
_K2 = np.arange(1, _B2K.size + 1, dtype=np.float64) * 2.0
_CL_COEF = np.array([_B2K[i] / (_K2[i] * (_K2[i] + 1.0) * math.factorial(int(_K2[i]))) for i in range(_B2K.size)])


def clausen2(theta: float) -> float:
    """Clausen function Cl2(theta) = sum_{j>=1} sin(j theta)/j^2."""
    t = math.remainder(float(theta), 2.0 * math.pi)
    if t == 0.0:
        return 0.0
    powers = t ** (_K2 + 1.0)
    return t - t * math.log(abs(t)) + float(np.sum(_CL_COEF * powers))


def _residual_sum(pt: SpectralPoint, cfg: PhysicalConfig, shift: float, tol: float, cap: int) -> complex:
    """sum over all n of r_n exp(i kappa_n shift), including r_0."""
    z0 = zeta(0, pt, cfg)
    total, used, ok = _kernels.kummer_pair_sum(pt.k, pt.kappa, cfg.d, shift, tol, cap)
    if not ok:
        raise NonConvergence(f"Rayleigh residual sum did not reach tol={tol} within {cap} terms")
    a = 2.0 * math.pi / cfg.d
    if shift != 0.0 and pt.kappa != 0.0:
        c1 = 1j * pt.kappa / (math.pi * a) * cmath.exp(1j * pt.kappa * shift)
        total += c1 * clausen2(a * shift)
    if shift == 0.0:
        coef = -(pt.kappa**2 + 0.5 * pt.k**2) / (math.pi * a * a)
        total += coef * float(hurwitz_zeta(3.0, used + 1))
    return total + (-1j / cfg.d) / z0 * cmath.exp(1j * pt.kappa * shift)


def lattice_sum(pt: SpectralPoint, cfg: PhysicalConfig, delta: float, tol: float = DEFAULT_TOL, cap: int = MAX_TERMS) -> complex:
    """-(i/d) sum_n exp(i kappa_n delta)/zeta_n for real delta not a multiple of d.

    The 1/(2 pi |n|) asymptote is subtracted and replaced by its closed-form
    log sum, leaving an O(1/n^2) tail.
    """
    s = math.sin(math.pi * delta / cfg.d)
    if abs(s) < 1e-300:
        raise SingularArgument(f"offset {delta} coincides with a lattice image")
    log_part = cmath.exp(1j * pt.kappa * delta) * math.log(abs(2.0 * s)) / math.pi
    return log_part + _residual_sum(pt, cfg, delta, tol, cap)


def quasiperiodic_green(pt: SpectralPoint, cfg: PhysicalConfig, x, y, tol: float = DEFAULT_TOL, cap: int = MAX_TERMS) -> complex:
    """Free-space quasi-periodic Green function g(k, kappa; x, y).

    Args:
        pt: Spectral point.
        cfg: Geometry (only the period is used).
        x: Target point (x1, x2).
        y: Source point (y1, y2).
        tol: Absolute accuracy.
        cap: Maximum number of Rayleigh orders.

    Returns:
        Value of the Rayleigh-Bloch series.

    Raises:
        SingularArgument: If x coincides with y or a periodic image of y.
        NonConvergence: If ``tol`` is not met within ``cap`` terms.
    """
    dx1 = float(x[0]) - float(y[0])
    dx2 = abs(float(x[1]) - float(y[1]))
    zeta(0, pt, cfg)
    if dx2 > 0.0:
        val, _, ok = _kernels.green_offplane(pt.k, pt.kappa, cfg.d, dx1, dx2, tol, cap)
        if not ok:
            raise NonConvergence(f"evanescent sum did not reach tol={tol} within {cap} terms")
        return val
    if dx1 == 0.0:
        raise SingularArgument("x = y")
    return 0.5 * lattice_sum(pt, cfg, dx1, tol, cap)


def exterior_green(pt: SpectralPoint, cfg: PhysicalConfig, x, y, tol: float = DEFAULT_TOL) -> complex:
    """Neumann Green function of the upper half-space x2 > 1 (image in x2 = 1)."""
    xi = (x[0], 2.0 - x[1])
    return quasiperiodic_green(pt, cfg, x, y, tol) + quasiperiodic_green(pt, cfg, xi, y, tol)


_SHIFTS = {"same_slit": 0.0, "cross_plus": 1.0, "cross_minus": -1.0}


def exterior_kernel(pt: SpectralPoint, cfg: PhysicalConfig, X: float, Y: float, which: str = "same_slit", tol: float = DEFAULT_TOL) -> complex:
    """Rescaled exterior kernel G^e, G^{e,+} or G^{e,-} on the apertures.

    Args:
        pt: Spectral point.
        cfg: Geometry.
        X: Target coordinate in I.
        Y: Source coordinate in I.
        which: "same_slit", "cross_plus" (target on the + slit, source on -)
            or "cross_minus".
        tol: Absolute accuracy.

    Returns:
        Kernel value.
    """
    if which not in _SHIFTS:
        raise ValueError(f"unknown exterior kernel {which!r}")
    delta = cfg.eps * (X - Y) + _SHIFTS[which] * cfg.d0
    if which == "same_slit" and X == Y:
        raise SingularArgument("X = Y on the log-singular same-slit kernel")
    return lattice_sum(pt, cfg, delta, tol)


# ---------------------------------------------------------------------------
# interior (slit) modal kernels
# ---------------------------------------------------------------------------


def _check_cavity(k: complex, mode_tol: float) -> None:
    if abs(cmath.sin(k)) < mode_tol:
        raise ModeResonance(f"sin(k) = 0 to {mode_tol} at k={k}: slit cavity resonance")


def mode_coefficient(k: complex, eps: float, m: int, variant: str = "same_end", mode_tol: float = 1e-13) -> complex:
    """Coefficient of transverse mode m in the collapsed interior series.

    Args:
        k: Frequency.
        eps: Slit width.
        m: Transverse mode index (m >= 0).
        variant: "same_end" gives cot(g)/(eps g), "opposite_end" 1/(eps g sin g),
            with g = sqrt(k^2 - (m pi/eps)^2).
        mode_tol: Threshold on |sin g| for ModeResonance.

    Returns:
        The complex coefficient.
    """
    k = complex(k)
    if m == 0:
        _check_cavity(k, mode_tol)
        if variant == "same_end":
            return cmath.cos(k) / (cmath.sin(k) * eps * k)
        return 1.0 / (eps * k * cmath.sin(k))
    opposite = variant == "opposite_end"
    q = _kernels.interior_coeffs(k, eps, m, opposite)[m - 1]
    if opposite:
        return q
    return q - 1.0 / (m * math.pi)


def interior_kernel(pt: SpectralPoint, cfg: PhysicalConfig, X: float, Y: float, variant: str = "same_end", tol: float = DEFAULT_TOL) -> complex:
    """Rescaled slit kernel G^i (same_end) or G~^i (opposite_end).

    The same_end log singularity is split off analytically; the remaining
    mode coefficients decay like 1/m^3.
    """
    eps = cfg.eps
    k = pt.k
    _check_cavity(k, 1e-13)
    if variant == "same_end":
        if X == Y:
            raise SingularArgument("X = Y on the log-singular same-end kernel")
        head = beta_i(k, eps) + (
            math.log(abs(math.sin(0.5 * math.pi * (X - Y)))) + math.log(abs(math.sin(0.5 * math.pi * (X + Y + 1.0))))
        ) / math.pi
        opposite = False
    elif variant == "opposite_end":
        head = beta_tilde(k, eps)
        opposite = True
    else:
        raise ValueError(f"unknown interior kernel {variant!r}")
    tail, used, ok = _kernels.interior_tail(k, eps, X, Y, opposite, tol, MAX_TERMS)
    if not ok:
        raise NonConvergence(f"interior mode series did not reach tol={tol}")
    return head + tail


# ---------------------------------------------------------------------------
# beta constants
# ---------------------------------------------------------------------------


def beta_i(k: complex, eps: float) -> complex:
    k = complex(k)
    return cmath.cos(k) / (cmath.sin(k) * eps * k) + 2.0 * math.log(2.0) / math.pi


def beta_tilde(k: complex, eps: float) -> complex:
    k = complex(k)
    return 1.0 / (eps * k * cmath.sin(k))


def beta_e(pt: SpectralPoint, cfg: PhysicalConfig, tol: float = DEFAULT_TOL) -> complex:
    return math.log(2.0 * math.pi * cfg.eps / cfg.d) / math.pi + _residual_sum(pt, cfg, 0.0, tol, MAX_TERMS)


def beta_cross(pt: SpectralPoint, cfg: PhysicalConfig, sign: int, tol: float = DEFAULT_TOL) -> complex:
    """beta^+ (sign=+1) or beta^- (sign=-1) = -(i/d) sum_n exp(+-i kappa_n d0)/zeta_n."""
    return lattice_sum(pt, cfg, sign * cfg.d0, tol)


def beta_hat(k: complex, cfg: PhysicalConfig, tol: float = DEFAULT_TOL, cap: int = MAX_TERMS) -> complex:
    """Normal-incidence cross constant, summed independently of ``beta_cross``.

    Uses the cosine series over n >= 1 with the 1/(2 pi n) asymptote removed
    and restored through the closed form (1/pi) ln|2 sin(pi d0/d)|.
    """
    k = complex(k)
    d, d0 = cfg.d, cfg.d0
    z0 = branch_sqrt(k * k)
    total = -1j / (d * z0) + math.log(abs(2.0 * math.sin(math.pi * d0 / d))) / math.pi
    start, block = 1, 2048
    while start <= cap:
        n = np.arange(start, min(cap, start + block - 1) + 1, dtype=np.float64)
        zn = branch_sqrt(k * k - (2.0 * np.pi * n / d) ** 2)
        terms = 2.0 * np.cos(2.0 * np.pi * n * d0 / d) * (1.0 / (2.0 * np.pi * n) - 1j / (d * zn))
        small = np.abs(terms) < 0.1 * tol
        # four consecutive small terms end the sum
        run = np.convolve(small.astype(np.int64), np.ones(4, dtype=np.int64), mode="valid")
        hit = np.nonzero(run == 4)[0]
        if hit.size:
            return total + np.sum(terms[: hit[0] + 4])
        total += np.sum(terms)
        start += n.size
        block *= 2
    raise NonConvergence(f"beta_hat did not reach tol={tol}")


def _align_sqrt(product: complex, reference: complex) -> complex:
    s = cmath.sqrt(product)
    if (s * reference.conjugate()).real < 0.0:
        s = -s
    return s


def beta_constants(pt: SpectralPoint, cfg: PhysicalConfig, tol: float = DEFAULT_TOL) -> BetaSet:
    """All beta constants at a spectral point.

    Args:
        pt: Spectral point (complex k allowed).
        cfg: Geometry.
        tol: Absolute accuracy of the lattice sums.

    Returns:
        BetaSet.  At the slit cavity poles sin k = 0 the fields beta_i,
        beta_tilde and beta are infinite while gamma stays finite.
    """
    k = pt.k
    eps = cfg.eps
    be = beta_e(pt, cfg, tol)
    if pt.kappa == 0.0:
        bp = bm = beta_cross(pt, cfg, +1, tol)
    else:
        bp = beta_cross(pt, cfg, +1, tol)
        bm = beta_cross(pt, cfg, -1, tol)
    bh = beta_hat(k, cfg, tol)
    with np.errstate(all="ignore"):
        s = cmath.sin(k)
        if s == 0:
            bi = bt = complex(np.inf)
        else:
            bi = beta_i(k, eps)
            bt = beta_tilde(k, eps)
    gam = be + 2.0 * math.log(2.0) / math.pi - math.log(eps) / math.pi
    root = _align_sqrt(bm * bp, 0.5 * (bp + bm))
    eta = root / bm - 1.0
    return BetaSet(
        beta_e=be,
        beta_plus=bp,
        beta_minus=bm,
        beta_i=bi,
        beta_tilde=bt,
        beta=be + bi,
        gamma=gam,
        beta_hat=bh,
        eta=eta,
    )
