"""Closed-form asymptotic objects: alpha, the 2x2 reduced matrices and their
eigenvalues, reflection/transmission and slit-field expansions."""

from __future__ import annotations

import cmath
import math
import threading
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bie import SystemPieces, assemble_pieces, get_basis
from .errors import DivisionByZeroLambda, OutsideValidRegion, SingularOperator
from .greens import BetaSet, PhysicalConfig, SpectralPoint, beta_constants, zeta

KAPPA_LIMIT = 0.3  # in units of pi/d
LN2 = math.log(2.0)
ALPHA_GRID = (48, 96, 192)
NYSTROM_GRID = (256, 512, 1024)


@dataclass
class AlphaConstant:
    """alpha = <S^{-1} 1, 1> with its convergence record."""

    value: float
    grid_sizes: list
    richardson_estimate: float
    error_estimate: float
    raw: list = field(default_factory=list)


@dataclass
class LambdaSet:
    """Eigenvalues ordered as [lambda_{1,+}, lambda_{2,+}, lambda_{1,-}, lambda_{2,-}]."""

    lam: np.ndarray
    lam_hat: np.ndarray
    variant: str = "hat"
    eta: complex = 0.0

    def get(self, j: int, sign: int) -> complex:
        return complex(self.lam[(j - 1) + (0 if sign > 0 else 2)])

    def get_hat(self, j: int, sign: int) -> complex:
        return complex(self.lam_hat[(j - 1) + (0 if sign > 0 else 2)])


@dataclass
class MuLambdaCoeffs:
    mu_plus: complex
    mu_minus: complex
    Lambda1_plus: complex
    Lambda1_minus: complex
    Lambda2_plus: complex
    Lambda2_minus: complex
    r_minus: complex
    r_plus: complex
    t_minus: complex
    t_plus: complex


# ---------------------------------------------------------------------------
# alpha
# ---------------------------------------------------------------------------


def _aitken(vals):
    a0, a1, a2 = vals[-3:]
    d1, d2 = a1 - a0, a2 - a1
    den = d2 - d1
    if den == 0.0:
        return a2
    return a2 - d2 * d2 / den


def alpha_galerkin(N: int) -> float:
    """alpha from the spectral Galerkin matrix of S at basis size N."""
    basis = get_basis(N)
    try:
        q = np.linalg.solve(basis.S, basis.e0)
    except np.linalg.LinAlgError as exc:
        raise SingularOperator(f"S is singular at N={N}") from exc
    val = np.pi * q[0]
    return float(np.real(val))


_alpha_lock = threading.Lock()
_alpha_cache: dict = {}


def alpha_constant(N_list=ALPHA_GRID) -> AlphaConstant:
    """alpha on a ladder of basis sizes with Aitken extrapolation.

    Args:
        N_list: Ascending basis sizes, at least three, ideally doubling.

    Returns:
        AlphaConstant whose ``value`` is the extrapolated estimate and whose
        ``error_estimate`` is |alpha_{N_max} - alpha_{N_prev}|.
    """
    key = tuple(int(n) for n in N_list)
    if len(key) < 3 or list(key) != sorted(key):
        raise ValueError("N_list must be ascending with at least three sizes")
    with _alpha_lock:
        hit = _alpha_cache.get(key)
    if hit is not None:
        return hit
    vals = [alpha_galerkin(n) for n in key]
    rich = _aitken(vals)
    res = AlphaConstant(value=rich, grid_sizes=list(key), richardson_estimate=rich, error_estimate=abs(vals[-1] - vals[-2]), raw=vals)
    with _alpha_lock:
        _alpha_cache[key] = res
    return res


def default_alpha() -> float:
    return alpha_constant().value


def _panel_log(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.zeros_like(z)
    nz = z != 0.0
    out[nz] = z[nz] * np.log(np.abs(z[nz])) - z[nz]
    return out


def alpha_nystrom_single(n: int, n_gauss: int = 4) -> float:
    """Independent alpha from piecewise-constant collocation on a cosine-graded mesh.

    The three log singularities ln|X-Y|, ln(1-X-Y), ln(1+X+Y) are integrated
    exactly over each panel; the smooth remainder uses Gauss-Legendre.
    """
    th = np.pi * np.arange(n + 1) / n
    nodes = -0.5 * np.cos(th)
    a, b = nodes[:-1], nodes[1:]
    x = -0.5 * np.cos(0.5 * (th[:-1] + th[1:]))
    X = x[:, None]
    A = a[None, :]
    B = b[None, :]
    L = 2.0 * (_panel_log(X - A) - _panel_log(X - B))
    L += _panel_log(1.0 - X - A) - _panel_log(1.0 - X - B)
    L += _panel_log(1.0 + X + B) - _panel_log(1.0 + X + A)
    gx, gw = np.polynomial.legendre.leggauss(n_gauss)
    smooth = np.zeros((n, n))
    for xi, wi in zip(gx, gw):
        y = 0.5 * (a + b) + 0.5 * (b - a) * xi
        v = X - y[None, :]
        u = X + y[None, :]
        h = np.log(0.5 * np.pi * np.sinc(0.5 * v)) + np.log(0.5 * np.pi * np.sinc(0.5 * (1.0 - u)) / (1.0 + u))
        smooth += 0.5 * (b - a)[None, :] * wi * h
    K = (L + smooth) / np.pi
    q = np.linalg.solve(K, np.ones(n))
    return float(np.sum(q * (b - a)))


def alpha_nystrom(n_list=NYSTROM_GRID) -> AlphaConstant:
    """Nystrom oracle for alpha with the same extrapolation as the Galerkin path."""
    vals = [alpha_nystrom_single(n) for n in n_list]
    rich = _aitken(vals)
    return AlphaConstant(rich, list(n_list), rich, abs(vals[-1] - vals[-2]), vals)


def rho_kernel(X, Y):
    """(1/pi)[ln|X-Y| + ln|sin(pi(X-Y)/2)| + ln|sin(pi(X+Y+1)/2)|]."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return (
            np.log(np.abs(X - Y)) + np.log(np.abs(np.sin(0.5 * np.pi * (X - Y)))) + np.log(np.abs(np.sin(0.5 * np.pi * (X + Y + 1.0))))
        ) / np.pi


# ---------------------------------------------------------------------------
# reduced 2x2 matrices
# ---------------------------------------------------------------------------


def _check_kappa(pt: SpectralPoint, cfg: PhysicalConfig) -> None:
    if abs(pt.kappa) > KAPPA_LIMIT * math.pi / cfg.d:
        raise OutsideValidRegion(f"|kappa|={abs(pt.kappa)} exceeds {KAPPA_LIMIT}*pi/d")
    if pt.kappa != 0.0 and abs(pt.kappa) > math.sqrt(cfg.eps):
        warnings.warn(f"kappa={pt.kappa} exceeds eps^(1/2); expansions lose accuracy", RuntimeWarning, stacklevel=3)


def diagonal_combo(betas: BetaSet, k: complex, eps: float, sign: int) -> complex:
    """beta + beta~ (sign=+1) or beta - beta~ (sign=-1) without the sin k poles."""
    k = complex(k)
    base = betas.beta_e + 2.0 * LN2 / math.pi
    with np.errstate(all="ignore"):
        if sign > 0:
            return complex(base + 1.0 / (cmath.tan(0.5 * k) * eps * k))
        return complex(base - cmath.tan(0.5 * k) / (eps * k))


def _sqrt_aligned(betas: BetaSet) -> complex:
    s = cmath.sqrt(betas.beta_minus * betas.beta_plus)
    ref = 0.5 * (betas.beta_plus + betas.beta_minus)
    if (s * ref.conjugate()).real < 0.0:
        s = -s
    return s


def matrix_M_hat(pt: SpectralPoint, cfg: PhysicalConfig, alpha: float, sign: int = 1, betas: BetaSet | None = None) -> np.ndarray:
    """M^ = eps*(alpha*[[b, beta^-], [beta^+, b]] + I), b = beta +- beta~.

    Args:
        pt: Spectral point.
        cfg: Geometry.
        alpha: The constant alpha.
        sign: +1 for M^_+, -1 for M^_-.
        betas: Precomputed BetaSet (optional).

    Returns:
        2x2 complex matrix.
    """
    _check_kappa(pt, cfg)
    b = betas if betas is not None else beta_constants(pt, cfg)
    diag = diagonal_combo(b, pt.k, cfg.eps, sign)
    B = np.array([[diag, b.beta_minus], [b.beta_plus, diag]], dtype=np.complex128)
    return cfg.eps * (alpha * B + np.eye(2))


def lambda_hat_values(pt: SpectralPoint, cfg: PhysicalConfig, alpha: float, betas: BetaSet | None = None) -> np.ndarray:
    """[lambda^_{1,+}, lambda^_{2,+}, lambda^_{1,-}, lambda^_{2,-}] from the explicit formulas."""
    _check_kappa(pt, cfg)
    b = betas if betas is not None else beta_constants(pt, cfg)
    s = _sqrt_aligned(b)
    eps = cfg.eps
    out = []
    for sign in (1, -1):
        diag = diagonal_combo(b, pt.k, eps, sign)
        out.append(eps + eps * alpha * (diag + s))
        out.append(eps + eps * alpha * (diag - s))
    return np.array(out, dtype=np.complex128)


def inner_products(pcs: SystemPieces, sign: int) -> np.ndarray:
    """G[i, j] = <L^{-1} e_j, e_i> for the T_+ (sign=+1) or T_- (sign=-1) decomposition."""
    N = pcs.n_modes
    D = pcs.S + pcs.Sinf + sign * pcs.Sinf_tilde
    L = np.block([[D, pcs.Sinf_pm[-1]], [pcs.Sinf_pm[1], D]])
    rhs = np.zeros((2 * N, 2), dtype=np.complex128)
    rhs[0, 0] = np.pi
    rhs[N, 1] = np.pi
    try:
        sol = np.linalg.solve(L, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularOperator("reduced operator L is singular") from exc
    return np.pi * np.array([[sol[0, 0], sol[0, 1]], [sol[N, 0], sol[N, 1]]])


def matrix_M_full(pt: SpectralPoint, cfg: PhysicalConfig, N: int = 32, sign: int = 1, pieces: SystemPieces | None = None) -> np.ndarray:
    """M = eps*(G B + I) with G from the discretized reduced operator.

    Args:
        pt: Spectral point (complex k allowed).
        cfg: Geometry.
        N: Basis size.
        sign: +1 or -1.
        pieces: Pre-assembled blocks (optional).

    Returns:
        2x2 complex matrix.
    """
    pcs = pieces if pieces is not None else assemble_pieces(pt, cfg, N)
    G = inner_products(pcs, sign)
    diag = pcs.beta_sum if sign > 0 else pcs.beta_diff
    B = np.array([[diag, pcs.beta_minus], [pcs.beta_plus, diag]], dtype=np.complex128)
    return cfg.eps * (G @ B + np.eye(2))


def label_eigenvalues(M: np.ndarray, eta: complex) -> tuple:
    """Eigenvalues (lambda_1, lambda_2) with lambda_1 tied to the eigenvector near [1, 1+eta]."""
    p, q = M[0, 0], M[0, 1]
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    disc = np.sqrt(complex(tr * tr / 4.0 - det))
    mu_a = tr / 2.0 + disc
    mu_b = tr / 2.0 - disc
    target = 1.0 + eta
    if q == 0:
        return complex(mu_a), complex(mu_b)
    ra = (mu_a - p) / q
    rb = (mu_b - p) / q
    if abs(ra - target) + abs(rb + target) <= abs(rb - target) + abs(ra + target):
        return complex(mu_a), complex(mu_b)
    return complex(mu_b), complex(mu_a)


def lambda_full_values(pt: SpectralPoint, cfg: PhysicalConfig, N: int = 32, pieces: SystemPieces | None = None, eta: complex | None = None) -> np.ndarray:
    """[lambda_{1,+}, lambda_{2,+}, lambda_{1,-}, lambda_{2,-}] of the discretized M."""
    pcs = pieces if pieces is not None else assemble_pieces(pt, cfg, N)
    if eta is None:
        s = cmath.sqrt(pcs.beta_minus * pcs.beta_plus)
        if (s * (0.5 * (pcs.beta_plus + pcs.beta_minus)).conjugate()).real < 0:
            s = -s
        eta = s / pcs.beta_minus - 1.0
    out = []
    for sign in (1, -1):
        out.extend(label_eigenvalues(matrix_M_full(pt, cfg, N, sign, pcs), eta))
    return np.array(out, dtype=np.complex128)


def lambda_set(pt: SpectralPoint, cfg: PhysicalConfig, alpha: float, variant: str = "hat", N: int = 32) -> LambdaSet:
    """LambdaSet with both the explicit (hat) and, for variant="full", the discrete eigenvalues."""
    b = beta_constants(pt, cfg)
    hat = lambda_hat_values(pt, cfg, alpha, b)
    if variant == "hat":
        return LambdaSet(hat.copy(), hat, "hat", b.eta)
    if variant != "full":
        raise ValueError(f"unknown variant {variant!r}")
    full = lambda_full_values(pt, cfg, N, eta=b.eta)
    return LambdaSet(full, hat, "full", b.eta)


# ---------------------------------------------------------------------------
# solution asymptotics
# ---------------------------------------------------------------------------


def mu_lambda_coeffs(pt: SpectralPoint, cfg: PhysicalConfig, lambdas: LambdaSet) -> MuLambdaCoeffs:
    """mu_+-, Lambda_{j,+-} and the aperture coefficients r^+-, t^+-.

    Raises:
        DivisionByZeroLambda: If any lambda vanishes.
    """
    lam = lambdas.lam
    if np.any(lam == 0):
        raise DivisionByZeroLambda("a lambda eigenvalue is exactly zero")
    eta = lambdas.eta
    ep = cmath.exp(0.5j * pt.kappa * cfg.d0)
    em = cmath.exp(-0.5j * pt.kappa * cfg.d0)
    mu_p = ep + (1.0 + eta) * em
    mu_m = ep - (1.0 + eta) * em
    l1p, l2p, l1m, l2m = (complex(x) for x in lam)
    L1p = 1.0 / l1p + 1.0 / l1m
    L1m = 1.0 / l1p - 1.0 / l1m
    L2p = 1.0 / l2p + 1.0 / l2m
    L2m = 1.0 / l2p - 1.0 / l2m
    h = 2.0 * (1.0 + eta)
    return MuLambdaCoeffs(
        mu_plus=mu_p,
        mu_minus=mu_m,
        Lambda1_plus=L1p,
        Lambda1_minus=L1m,
        Lambda2_plus=L2p,
        Lambda2_minus=L2m,
        r_minus=-mu_p / h * L1p + mu_m / h * L2p,
        r_plus=-0.5 * mu_p * L1p - 0.5 * mu_m * L2p,
        t_minus=-mu_p / h * L1m + mu_m / h * L2m,
        t_plus=-0.5 * mu_p * L1m - 0.5 * mu_m * L2m,
    )


def rt_asymptotic(pt: SpectralPoint, cfg: PhysicalConfig, lambdas: LambdaSet, alpha: float):
    """Leading-order R and T; the energy residual is reported, not enforced.

    Returns:
        ScatteringCoefficients.
    """
    from .bie import ScatteringCoefficients

    c = mu_lambda_coeffs(pt, cfg, lambdas)
    z0 = zeta(0, pt, cfg)
    tau = -1j / (2.0 * cfg.d * z0 * (1.0 + lambdas.eta))
    pre = cfg.eps * tau * alpha
    R = 1.0 + pre * (-(c.mu_plus**2) * c.Lambda1_plus + c.mu_minus**2 * c.Lambda2_plus)
    T = pre * (-(c.mu_plus**2) * c.Lambda1_minus + c.mu_minus**2 * c.Lambda2_minus)
    return ScatteringCoefficients(complex(R), complex(T), abs(abs(R) ** 2 + abs(T) ** 2 - 1.0))


def resonance_prediction(m: int, kappa: float, cfg: PhysicalConfig, alpha: float) -> tuple:
    """Closed-form Fabry-Perot and embedded-family roots near m*pi.

    Args:
        m: Mode index, 1 <= m < 2/d.
        kappa: Bloch wavenumber.
        cfg: Geometry.
        alpha: The constant alpha.

    Returns:
        (k_FP, k_EE) with the O(eps^2 ln^2 eps) remainder dropped.
    """
    if not (1 <= m < 2.0 / cfg.d):
        raise OutsideValidRegion(f"m={m} must satisfy 1 <= m < 2/d")
    k0 = m * math.pi
    b = beta_constants(SpectralPoint(k0, kappa), cfg)
    eps = cfg.eps
    avg = 0.5 * (b.beta_plus + b.beta_minus)
    base = eps * math.log(eps) / math.pi + (1.0 / alpha + b.gamma) * eps
    k_fp = k0 + 2.0 * k0 * (base + avg * eps)
    k_ee = k0 + 2.0 * k0 * (base - avg * eps)
    return complex(k_fp), complex(k_ee)


def slit_field_asymptotic(pt: SpectralPoint, cfg: PhysicalConfig, lambdas: LambdaSet, alpha: float, x2: float, slit_sign: int, margin: float = 5.0) -> complex:
    """u = -alpha/(k sin k) (r cos k x2 + t cos k(1 - x2)) in the slit of the given sign."""
    if not (margin * cfg.eps <= x2 <= 1.0 - margin * cfg.eps):
        raise OutsideValidRegion(f"x2={x2} too close to a slit end")
    c = mu_lambda_coeffs(pt, cfg, lambdas)
    k = pt.k
    r, t = (c.r_plus, c.t_plus) if slit_sign > 0 else (c.r_minus, c.t_minus)
    return complex(-alpha / (k * cmath.sin(k)) * (r * cmath.cos(k * x2) + t * cmath.cos(k * (1.0 - x2))))


def mode_shape(k: float, m: int, x2):
    """Resonant slit profile at Re k_m^(2): cos(k(x2 - 1/2)) for odd m, sin(k(x2 - 1/2)) for even m.

    The dominant term is mu_-/lambda_{2,+} times cos(k x2) + cos(k(1 - x2)) for
    odd m, which is symmetric about the slit midpoint.
    """
    x2 = np.asarray(x2, dtype=np.float64)
    return np.cos(k * (x2 - 0.5)) if m % 2 else np.sin(k * (x2 - 0.5))
