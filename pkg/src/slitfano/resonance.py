"""Complex resonance location: argument-principle counting and Muller refinement."""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .asymptotics import default_alpha, lambda_full_values, lambda_hat_values, resonance_prediction
from .errors import (
    BranchCut,
    ContourThroughZero,
    EscapedRegion,
    NoConvergence,
    NonConvergence,
    OutsideValidRegion,
    RootCountMismatch,
)
from .greens import PhysicalConfig, SpectralPoint, beta_constants

FABRY_PEROT = "FabryPerot"
EMBEDDED = "Embedded"
ZERO_TOL = 1e-14
RESIDUAL_TOL = 1e-10
STEP_TOL = 1e-12
N_ROOTFIND = 32


@dataclass
class ResonanceBranch:
    """A located complex root of lambda_{j,+-}."""

    m: int
    family: str
    parity: str
    k: complex
    kappa: float
    eps: float
    method: str
    residual: float

    @property
    def j(self) -> int:
        return 1 if self.family == FABRY_PEROT else 2


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle in the complex k-plane."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    @classmethod
    def around(cls, center: complex, half_re: float, half_im: float | None = None) -> "Box":
        hi = half_re if half_im is None else half_im
        return cls(center.real - half_re, center.real + half_re, center.imag - hi, center.imag + hi)

    def contains(self, z: complex) -> bool:
        return self.re_min <= z.real <= self.re_max and self.im_min <= z.imag <= self.im_max

    def boundary(self, n_side: int) -> np.ndarray:
        """Counter-clockwise samples, n_side per edge, closing point excluded."""
        t = np.arange(n_side) / n_side
        a, b, c, d = self.re_min, self.re_max, self.im_min, self.im_max
        bottom = (a + (b - a) * t) + 1j * c
        right = b + 1j * (c + (d - c) * t)
        top = (b - (b - a) * t) + 1j * d
        left = a + 1j * (d - (d - c) * t)
        return np.concatenate([bottom, right, top, left])


def crosses_branch_cut(box: Box, kappa: float, cfg: PhysicalConfig, n_max: int = 4, samples: int = 512) -> bool:
    """True if the box boundary crosses a cut of some zeta_n (k^2 - kappa_n^2 on the negative imaginary axis)."""
    z = box.boundary(samples)
    z = np.append(z, z[0])
    for n in range(-n_max, n_max + 1):
        kn = kappa + 2.0 * math.pi * n / cfg.d
        w = z * z - kn * kn
        re = w.real
        flip = np.nonzero(np.signbit(re[:-1]) != np.signbit(re[1:]))[0]
        for i in flip:
            s = re[i] / (re[i] - re[i + 1])
            im = w.imag[i] + s * (w.imag[i + 1] - w.imag[i])
            if im < 0.0:
                return True
    return False


def count_roots(lambda_fn, contour: Box, quad_points: int = 32, *, cfg: PhysicalConfig | None = None, kappa: float | None = None, max_points: int = 2048) -> int:
    """Winding number of lambda_fn around 0 along the rectangle.

    The logarithmic derivative is integrated by the trapezoid rule with a
    finite-difference derivative, which reduces to summing principal-branch
    increments of log(lambda). Samples are doubled until the estimate is
    within 0.25 of an integer and no single increment exceeds pi/2.

    Args:
        lambda_fn: Callable k -> complex, analytic inside the box.
        contour: Box.
        quad_points: Initial samples per edge.
        cfg: Geometry, enables the branch-cut check together with kappa.
        kappa: Bloch wavenumber for the branch-cut check.
        max_points: Cap on samples per edge.

    Returns:
        Number of zeros (minus poles) inside.

    Raises:
        ContourThroughZero: |lambda| < 1e-14 at a sample.
        BranchCut: Contour crosses a zeta_n cut.
        NonConvergence: Sample cap reached without a stable integer.
    """
    if cfg is not None and kappa is not None and crosses_branch_cut(contour, kappa, cfg):
        raise BranchCut(f"contour {contour} crosses a branch cut of zeta_n")
    n = max(4, int(quad_points))
    z = contour.boundary(n)
    f = np.array([complex(lambda_fn(complex(x))) for x in z])
    while True:
        if np.min(np.abs(f)) < ZERO_TOL:
            raise ContourThroughZero("lambda vanishes on the contour")
        ratio = np.roll(f, -1) / f
        dphi = np.angle(ratio)
        est = float(np.sum(dphi)) / (2.0 * math.pi)
        if abs(est - round(est)) < 0.25 and np.max(np.abs(dphi)) < 0.5 * math.pi:
            return int(round(est))
        if n >= max_points:
            raise NonConvergence(f"winding estimate {est:.3f} did not settle with {n} points per edge")
        mid = contour.boundary(2 * n)[1::2]
        fm = np.array([complex(lambda_fn(complex(x))) for x in mid])
        merged = np.empty(2 * f.size, dtype=np.complex128)
        merged[0::2] = f
        merged[1::2] = fm
        f = merged
        n *= 2


def refine_root(lambda_fn, seed: complex, tol: float = RESIDUAL_TOL, *, box: Box | None = None, h: float = 1e-3, max_iter: int = 100, full_output: bool = False):
    """Muller iteration from three points around the seed.

    Args:
        lambda_fn: Callable k -> complex.
        seed: Starting point.
        tol: Residual target for |lambda|.
        box: Region the iterates must stay in.
        h: Initial spread of the three Muller points.
        max_iter: Iteration cap.
        full_output: Also return (iterations, residual).

    Returns:
        Root, or (root, iterations, residual) when full_output.

    Raises:
        NoConvergence: Iteration cap reached.
        EscapedRegion: An iterate leaves the box.
    """
    x2 = complex(seed)
    f2 = complex(lambda_fn(x2))
    if f2 == 0.0:
        return (x2, 0, 0.0) if full_output else x2
    x0, x1 = x2 - h, x2 + h
    f0, f1 = complex(lambda_fn(x0)), complex(lambda_fn(x1))
    for it in range(1, max_iter + 1):
        q = (x2 - x1) / (x1 - x0)
        A = q * f2 - q * (1 + q) * f1 + q * q * f0
        B = (2 * q + 1) * f2 - (1 + q) ** 2 * f1 + q * q * f0
        C = (1 + q) * f2
        D = cmath.sqrt(B * B - 4 * A * C)
        den = B + D if abs(B + D) >= abs(B - D) else B - D
        if den == 0:
            x3 = x2 + h
        else:
            x3 = x2 - (x2 - x1) * 2 * C / den
        if box is not None and not box.contains(x3):
            raise EscapedRegion(f"iterate {x3} left {box}")
        f3 = complex(lambda_fn(x3))
        step = abs(x3 - x2)
        x0, x1, x2 = x1, x2, x3
        f0, f1, f2 = f1, f2, f3
        if f3 == 0.0 or (abs(f3) < tol and step < STEP_TOL):
            return (x3, it, abs(f3)) if full_output else x3
    raise NoConvergence(f"Muller did not converge from {seed} in {max_iter} iterations (|lambda|={abs(f2):.3e})")


def lambda_function(cfg: PhysicalConfig, kappa: float, j: int, sign: int, use_full: bool = False, N: int = N_ROOTFIND, alpha: float | None = None, regularize: bool = False):
    """Callable k -> lambda_{j,sign}(k), optionally times sin(k/2) (sign +) or cos(k/2) (sign -).

    The regularized form removes the poles of beta +- beta~ at even or odd
    multiples of pi so that the function is analytic for argument counting.
    """
    a = default_alpha() if alpha is None else alpha
    idx = (j - 1) + (0 if sign > 0 else 2)

    def fn(k):
        pt = SpectralPoint(complex(k), kappa)
        if use_full:
            b = beta_constants(pt, cfg)
            val = lambda_full_values(pt, cfg, N, eta=b.eta)[idx]
        else:
            val = lambda_hat_values(pt, cfg, a)[idx]
        if regularize:
            val *= cmath.sin(0.5 * k) if sign > 0 else cmath.cos(0.5 * k)
        return complex(val)

    return fn


def search_box(m: int, kappa: float, cfg: PhysicalConfig) -> Box:
    """Default box around m*pi of half-width max(20 eps|ln eps|, 0.05), capped and clipped to stay between cuts."""
    hw = min(max(20.0 * cfg.eps * abs(math.log(cfg.eps)), 0.05), 0.45)
    c = m * math.pi
    re_max = min(c + hw, 2.0 * math.pi / cfg.d - abs(kappa) - 1e-3)
    re_min = max(c - hw, abs(kappa) + 1e-3)
    return Box(re_min, re_max, -hw, hw)


def _parity(m: int) -> int:
    return 1 if m % 2 else -1


def _find_one(cfg, kappa, m, j, use_full, N, alpha, verify):
    sign = _parity(m)
    pred = resonance_prediction(m, kappa, cfg, alpha)
    seed = pred[j - 1]
    box = search_box(m, kappa, cfg)
    fn_hat = lambda_function(cfg, kappa, j, sign, False, N, alpha)
    k = refine_root(fn_hat, seed, box=box)
    method = "numeric_hat"
    fn = fn_hat
    if use_full:
        fn = lambda_function(cfg, kappa, j, sign, True, N, alpha)
        k = refine_root(fn, k, box=box)
        method = "numeric_full"
    residual = abs(fn(k))
    if verify:
        other = refine_root(lambda_function(cfg, kappa, 3 - j, sign, False, N, alpha), pred[2 - j], box=box)
        sep = abs(other - k)
        local = Box.around(k, min(0.5 * sep, 0.05), min(0.5 * sep, 0.05, box.im_max - k.imag))
        reg = lambda_function(cfg, kappa, j, sign, use_full, N, alpha, regularize=True)
        n = count_roots(reg, local, 16, cfg=cfg, kappa=kappa)
        if n != 1:
            raise RootCountMismatch(f"m={m} j={j}: {n} roots counted around refined root {k}")
    family = FABRY_PEROT if j == 1 else EMBEDDED
    return ResonanceBranch(m, family, "+" if sign > 0 else "-", complex(k), float(kappa), cfg.eps, method, float(residual))


def find_resonances(cfg: PhysicalConfig, kappa: float, m_max: int = 1, use_full: bool = False, *, N: int = N_ROOTFIND, alpha: float | None = None, verify: bool = True, include_asymptotic: bool = False, threads: int | None = None) -> list:
    """Both resonance families for each m <= m_max.

    Args:
        cfg: Geometry.
        kappa: Bloch wavenumber.
        m_max: Largest mode index; must satisfy m_max < 2/d.
        use_full: Refine against the discretized operator rather than the closed form.
        N: Basis size for use_full.
        alpha: Override for alpha.
        verify: Check a single root inside a local box by the argument principle.
        include_asymptotic: Also return the closed-form predictions.
        threads: Worker threads for independent (m, family) searches.

    Returns:
        ResonanceBranch list ordered by (m, family).

    Raises:
        RootCountMismatch: A local count disagrees with the refinement.
    """
    if m_max < 1 or m_max >= 2.0 / cfg.d:
        raise OutsideValidRegion(f"m_max={m_max} must satisfy 1 <= m_max < 2/d")
    a = default_alpha() if alpha is None else alpha
    jobs = [(m, j) for m in range(1, m_max + 1) for j in (1, 2)]
    out = []
    if include_asymptotic:
        for m in range(1, m_max + 1):
            pred = resonance_prediction(m, kappa, cfg, a)
            sign = "+" if m % 2 else "-"
            for j in (1, 2):
                fam = FABRY_PEROT if j == 1 else EMBEDDED
                out.append(ResonanceBranch(m, fam, sign, complex(pred[j - 1]), float(kappa), cfg.eps, "asymptotic", float("nan")))
    if threads is not None and threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            res = list(ex.map(lambda mj: _find_one(cfg, kappa, mj[0], mj[1], use_full, N, a, verify), jobs))
    else:
        res = [_find_one(cfg, kappa, m, j, use_full, N, a, verify) for m, j in jobs]
    out.extend(res)
    return out


def find_branch(cfg: PhysicalConfig, kappa: float, family: str, m: int = 1, use_full: bool = False, **kw) -> ResonanceBranch:
    """The single numeric branch of the given family."""
    for b in find_resonances(cfg, kappa, m, use_full, **kw):
        if b.m == m and b.family == family and b.method != "asymptotic":
            return b
    raise OutsideValidRegion(f"no {family} branch for m={m}")
