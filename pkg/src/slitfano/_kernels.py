"""Hot loops: Kummer-accelerated lattice sums, interior mode series, Gram sums.

Every kernel has a pure-numpy reference implementation.  When numba is
importable and ``SLITFANO_DISABLE_NUMBA`` is unset (or "0"), the public names
are bound to ``@njit`` compiled versions of the scalar loops instead.  Both
variants follow the same summation order, so results agree to rounding.
"""

import cmath
import math
import os

import numpy as np

_FLAG = os.environ.get("SLITFANO_DISABLE_NUMBA", "0").strip().lower()
NUMBA_REQUESTED = _FLAG in ("", "0", "false", "no")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and NUMBA_REQUESTED


# --------------------------------------------------------------------------
# scalar loop bodies (plain python, valid numba source)
# --------------------------------------------------------------------------


def _branch_sqrt_scalar(z):
    s = cmath.sqrt(z)
    if s.imag < 0.0 and -s.imag >= s.real:
        return -s
    return s


def _kummer_pair_sum_py(k, kappa, d, shift, tol, cap, min_run):
    """Sum over n != 0 of r_n exp(i kappa_n shift), r_n = 1/(2 pi |n|) - (i/d)/zeta_n.

    Terms are paired (n, -n), and the O(1/n^2) pair asymptote
    (i kappa/(pi a n^2)) exp(i kappa shift) sin(a n shift) is removed; the
    caller adds back its Clausen-function sum.  Stops after ``min_run``
    consecutive pairs below tol/10.  Returns (sum, pairs_used, converged).
    """
    a = 2.0 * math.pi / d
    k2 = k * k
    c1 = 1j * kappa / (math.pi * a) * cmath.exp(1j * kappa * shift)
    total = 0.0 + 0.0j
    run = 0
    j = 0
    for j in range(1, cap + 1):
        kp = kappa + a * j
        km = kappa - a * j
        zp = _branch_sqrt_scalar(k2 - kp * kp)
        zm = _branch_sqrt_scalar(k2 - km * km)
        base = 1.0 / (2.0 * math.pi * j)
        rp = base - 1j / (d * zp)
        rm = base - 1j / (d * zm)
        term = rp * cmath.exp(1j * kp * shift) + rm * cmath.exp(1j * km * shift)
        term -= c1 * math.sin(a * j * shift) / (j * j)
        total += term
        if abs(term) < 0.1 * tol:
            run += 1
            if run >= min_run:
                return total, j, True
        else:
            run = 0
    return total, j, False


def _green_offplane_py(k, kappa, d, dx1, adx2, tol, cap):
    """-(i/2d) sum_n exp(i kappa_n dx1 + i zeta_n |dx2|)/zeta_n for |dx2| > 0."""
    a = 2.0 * math.pi / d
    k2 = k * k
    z0 = _branch_sqrt_scalar(k2 - kappa * kappa)
    total = cmath.exp(1j * kappa * dx1 + 1j * z0 * adx2) / z0
    j = 0
    for j in range(1, cap + 1):
        kp = kappa + a * j
        km = kappa - a * j
        zp = _branch_sqrt_scalar(k2 - kp * kp)
        zm = _branch_sqrt_scalar(k2 - km * km)
        tp = cmath.exp(1j * kp * dx1 + 1j * zp * adx2) / zp
        tm = cmath.exp(1j * km * dx1 + 1j * zm * adx2) / zm
        total += tp + tm
        evan = abs(kp) > abs(k) and abs(km) > abs(k)
        if evan and abs(tp) + abs(tm) < 0.1 * tol * d:
            return -0.5j / d * total, j, True
    return -0.5j / d * total, j, False


def _interior_tail_py(k, eps, X, Y, opposite, tol, cap):
    """Residual interior series sum_{m>=1} 2 q_m cos(m pi (X+1/2)) cos(m pi (Y+1/2)).

    For same_end, q_m = cot(g_m)/(eps g_m) + 1/(m pi); for opposite_end,
    q_m = 1/(eps g_m sin g_m).  Returns (sum, terms_used, converged).
    """
    k2 = k * k
    total = 0.0 + 0.0j
    m = 0
    for m in range(1, cap + 1):
        mp = m * math.pi
        q = _interior_coeff(k2, eps, mp, opposite)
        c = math.cos(mp * (X + 0.5)) * math.cos(mp * (Y + 0.5))
        term = 2.0 * q * c
        total += term
        if abs(2.0 * q) < 0.1 * tol:
            return total, m, True
    return total, m, False


def _interior_coeff(k2, eps, mp, opposite):
    """Residual coefficient of transverse mode m (m >= 1), stable for large m/eps."""
    big = mp / eps
    g = _branch_sqrt_scalar(big * big - k2)
    if g.real > 0.0:
        e2 = cmath.exp(-2.0 * g)
        if opposite:
            return -2.0 * cmath.exp(-g) / (eps * g * (1.0 - e2))
        num = -eps * k2 / (g + big) - 2.0 * mp * e2 / (1.0 - e2)
        return num / (mp * eps * g)
    gam = 1j * g
    if opposite:
        return 1.0 / (eps * gam * cmath.sin(gam))
    return cmath.cos(gam) / (cmath.sin(gam) * eps * gam) + 1.0 / mp


def _interior_coeffs_py(k, eps, m_max, opposite):
    out = np.empty(m_max, dtype=np.complex128)
    k2 = k * k
    for i in range(m_max):
        out[i] = _interior_coeff(k2, eps, (i + 1) * math.pi, opposite)
    return out


def _weighted_gram_py(w, J):
    """G[i, j] = sum_n w[n] J[n, i] J[n, j]."""
    n_terms, n = J.shape
    out = np.zeros((n, n), dtype=np.complex128)
    for p in range(n_terms):
        wp = w[p]
        if wp == 0.0:
            continue
        for i in range(n):
            a = wp * J[p, i]
            if a == 0.0:
                continue
            for j in range(i, n):
                out[i, j] += a * J[p, j]
    for i in range(n):
        for j in range(i):
            out[i, j] = out[j, i]
    return out


def _zeta_coeffs_py(k, kappa, d, n_max):
    """r_n for n = -n_max..n_max, with r_0 = -(i/d)/zeta_0 and r_n = 1/(2 pi |n|) - (i/d)/zeta_n."""
    a = 2.0 * math.pi / d
    k2 = k * k
    out = np.empty(2 * n_max + 1, dtype=np.complex128)
    for idx in range(2 * n_max + 1):
        n = idx - n_max
        kn = kappa + a * n
        z = _branch_sqrt_scalar(k2 - kn * kn)
        r = -1j / (d * z)
        if n != 0:
            r += 1.0 / (2.0 * math.pi * abs(n))
        out[idx] = r
    return out


# --------------------------------------------------------------------------
# numpy reference versions (vectorized where it matters)
# --------------------------------------------------------------------------


def _np_branch_sqrt(z):
    z = np.asarray(z, dtype=np.complex128)
    s = np.sqrt(z)
    flip = (s.imag < 0.0) & (-s.imag >= s.real)
    return np.where(flip, -s, s)


def _np_kummer_pair_sum(k, kappa, d, shift, tol, cap, min_run):
    a = 2.0 * np.pi / d
    k = complex(k)
    c1 = 1j * kappa / (np.pi * a) * np.exp(1j * kappa * shift)
    total = 0.0 + 0.0j
    run = 0
    start = 1
    block = 4096
    while start <= cap:
        stop = min(cap, start + block - 1)
        j = np.arange(start, stop + 1, dtype=np.float64)
        kp = kappa + a * j
        km = kappa - a * j
        zp = _np_branch_sqrt(k * k - kp * kp)
        zm = _np_branch_sqrt(k * k - km * km)
        base = 1.0 / (2.0 * np.pi * j)
        terms = (base - 1j / (d * zp)) * np.exp(1j * kp * shift) + (base - 1j / (d * zm)) * np.exp(
            1j * km * shift
        )
        terms -= c1 * np.sin(a * j * shift) / (j * j)
        small = np.abs(terms) < 0.1 * tol
        for idx in range(terms.size):
            total += terms[idx]
            if small[idx]:
                run += 1
                if run >= min_run:
                    return total, start + idx, True
            else:
                run = 0
        start = stop + 1
        block *= 2
    return total, cap, False


def _np_green_offplane(k, kappa, d, dx1, adx2, tol, cap):
    a = 2.0 * np.pi / d
    k = complex(k)
    n_try = 64
    while True:
        n = np.arange(-n_try, n_try + 1, dtype=np.float64)
        kn = kappa + a * n
        zn = _np_branch_sqrt(k * k - kn * kn)
        terms = np.exp(1j * kn * dx1 + 1j * zn * adx2) / zn
        edge = np.abs(terms[0]) + np.abs(terms[-1])
        evan = abs(kappa + a * n_try) > abs(k) and abs(kappa - a * n_try) > abs(k)
        if evan and edge < 0.1 * tol * d:
            # pairwise accumulation in the same order as the scalar loop
            mid = n_try
            total = terms[mid]
            for j in range(1, n_try + 1):
                total += terms[mid + j] + terms[mid - j]
            return -0.5j / d * total, n_try, True
        if n_try >= cap:
            total = np.sum(terms)
            return -0.5j / d * total, n_try, False
        n_try = min(cap, 2 * n_try)


def _np_interior_coeffs(k, eps, m_max, opposite):
    k = complex(k)
    k2 = k * k
    mp = np.arange(1, m_max + 1, dtype=np.float64) * np.pi
    big = mp / eps
    g = _np_branch_sqrt(big * big - k2)
    out = np.empty(m_max, dtype=np.complex128)
    good = g.real > 0.0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        e2 = np.exp(-2.0 * g)
        if opposite:
            stable = -2.0 * np.exp(-g) / (eps * g * (1.0 - e2))
            gam = 1j * g
            other = 1.0 / (eps * gam * np.sin(gam))
        else:
            stable = (-eps * k2 / (g + big) - 2.0 * mp * e2 / (1.0 - e2)) / (mp * eps * g)
            gam = 1j * g
            other = np.cos(gam) / (np.sin(gam) * eps * gam) + 1.0 / mp
    out[good] = stable[good]
    out[~good] = other[~good]
    return out


def _np_interior_tail(k, eps, X, Y, opposite, tol, cap):
    m_try = 64
    while True:
        q = _np_interior_coeffs(k, eps, m_try, opposite)
        small = np.nonzero(np.abs(2.0 * q) < 0.1 * tol)[0]
        if small.size or m_try >= cap:
            last = int(small[0]) + 1 if small.size else m_try
            mp = np.arange(1, last + 1) * np.pi
            terms = 2.0 * q[:last] * np.cos(mp * (X + 0.5)) * np.cos(mp * (Y + 0.5))
            total = 0.0 + 0.0j
            for t in terms:
                total += t
            return total, last, bool(small.size)
        m_try = min(cap, 4 * m_try)


def _np_weighted_gram(w, J):
    JT = J.T
    return (JT * w.real) @ J + 1j * ((JT * w.imag) @ J)


def _np_zeta_coeffs(k, kappa, d, n_max):
    a = 2.0 * np.pi / d
    k = complex(k)
    n = np.arange(-n_max, n_max + 1, dtype=np.float64)
    kn = kappa + a * n
    z = _np_branch_sqrt(k * k - kn * kn)
    r = -1j / (d * z)
    nz = n != 0
    r[nz] += 1.0 / (2.0 * np.pi * np.abs(n[nz]))
    return r


NUMPY_IMPL = {
    "kummer_pair_sum": _np_kummer_pair_sum,
    "green_offplane": _np_green_offplane,
    "interior_tail": _np_interior_tail,
    "interior_coeffs": _np_interior_coeffs,
    "weighted_gram": _np_weighted_gram,
    "zeta_coeffs": _np_zeta_coeffs,
}

if HAVE_NUMBA:
    _jit = numba.njit(cache=False, nogil=True, fastmath=False)
    _branch_sqrt_scalar = _jit(_branch_sqrt_scalar)
    _interior_coeff = _jit(_interior_coeff)
    NUMBA_IMPL = {
        "kummer_pair_sum": _jit(_kummer_pair_sum_py),
        "green_offplane": _jit(_green_offplane_py),
        "interior_tail": _jit(_interior_tail_py),
        "interior_coeffs": _jit(_interior_coeffs_py),
        "weighted_gram": _jit(_weighted_gram_py),
        "zeta_coeffs": _jit(_zeta_coeffs_py),
    }
else:  # pragma: no cover
    NUMBA_IMPL = dict(NUMPY_IMPL)

_ACTIVE = dict(NUMBA_IMPL if USE_NUMBA else NUMPY_IMPL)
# The Gram sum is a real matrix product; BLAS beats the compiled loop.
_ACTIVE["weighted_gram"] = _np_weighted_gram


def kummer_pair_sum(k, kappa, d, shift, tol=1e-12, cap=1_000_000, min_run=4):
    """Accelerated residual Rayleigh sum over n != 0.

    Args:
        k: Complex frequency.
        kappa: Bloch wavenumber.
        d: Period.
        shift: Horizontal offset multiplying kappa_n in the phase.
        tol: Target absolute accuracy; pairs are summed until below tol/10.
        cap: Maximum number of (n, -n) pairs.
        min_run: Consecutive small pairs required before stopping.

    Returns:
        Tuple (value, pairs_used, converged).
    """
    return _ACTIVE["kummer_pair_sum"](complex(k), float(kappa), float(d), float(shift), float(tol), int(cap), int(min_run))


def green_offplane(k, kappa, d, dx1, adx2, tol=1e-12, cap=1_000_000):
    """Plain truncated Rayleigh sum for the free quasi-periodic Green function, |dx2| > 0."""
    return _ACTIVE["green_offplane"](complex(k), float(kappa), float(d), float(dx1), float(adx2), float(tol), int(cap))


def interior_tail(k, eps, X, Y, opposite, tol=1e-12, cap=1_000_000):
    """Residual transverse-mode series of the interior kernels at a point."""
    return _ACTIVE["interior_tail"](complex(k), float(eps), float(X), float(Y), bool(opposite), float(tol), int(cap))


def interior_coeffs(k, eps, m_max, opposite):
    """Residual coefficients q_m, m = 1..m_max."""
    return _ACTIVE["interior_coeffs"](complex(k), float(eps), int(m_max), bool(opposite))


def weighted_gram(w, J):
    """Symmetric Gram sum G = J^T diag(w) J with real J and complex w (BLAS in both backends)."""
    w = np.ascontiguousarray(w, dtype=np.complex128)
    J = np.ascontiguousarray(J, dtype=np.float64)
    return _ACTIVE["weighted_gram"](w, J)


def zeta_coeffs(k, kappa, d, n_max):
    """Kummer residual coefficients r_n for |n| <= n_max (r_0 is the bare n=0 term)."""
    return _ACTIVE["zeta_coeffs"](complex(k), float(kappa), float(d), int(n_max))


def backend():
    """Name of the active kernel backend ("numba" or "numpy")."""
    return "numba" if USE_NUMBA else "numpy"
