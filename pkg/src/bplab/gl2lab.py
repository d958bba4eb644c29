"""GL(2) laboratory: Bessel functions, Kloosterman sums, Petersson, Sato-Tate.

``bessel_j`` is backed by ``scipy.special.jv``; ``bessel_j_mp`` evaluates the
ascending series in high precision and is the reference it is tested against.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import integrate as sp_integrate
from scipy.special import gammaln, jv
from sympy import divisor_count, factorint

from .errors import ConvergenceFailure, InvalidArgument

VALIDATED_ORDER = 200.0
VALIDATED_ARGUMENT = 1e4
KITAOKA_TOL = 1e-9


class BesselRangeWarning(UserWarning):
    """Argument outside the range where ``bessel_j`` was validated."""


def bessel_j(nu, x):
    """``J_nu(x)`` for ``nu >= 0`` and ``x >= 0`` (scalar or array)."""
    nu_a = np.asarray(nu, dtype=float)
    x_a = np.asarray(x, dtype=float)
    if np.any(nu_a < 0) or np.any(x_a < 0):
        raise InvalidArgument("bessel_j needs nu >= 0 and x >= 0")
    if np.any(nu_a > VALIDATED_ORDER) or np.any(x_a > VALIDATED_ARGUMENT):
        warnings.warn("bessel_j outside the validated range", BesselRangeWarning, stacklevel=2)
    out = jv(nu_a, x_a)
    return float(out) if out.ndim == 0 else out


def bessel_j_mp(nu, x, dps=50):
    """Ascending series ``sum (-1)^m (x/2)^{2m+nu} / (m! Gamma(m+nu+1))`` at ``dps`` digits.

    The largest term is about ``e^x``, so ``x / ln 10`` guard digits are added
    to absorb the cancellation.
    """
    guard = int(float(x) / math.log(10)) + 10
    with mpmath.workdps(dps + guard):
        nu = mpmath.mpf(nu)
        h = mpmath.mpf(x) / 2
        h2 = h * h
        term = h**nu / mpmath.gamma(nu + 1)
        total = term
        m = 0
        eps = mpmath.mpf(10) ** (-dps - guard)
        while True:
            m += 1
            term *= -h2 / (m * (m + nu))
            total += term
            if m > h and abs(term) < eps * max(1, abs(total)):
                break
        return total


# ---------------------------------------------------------------------------
# asymptotic bounds
# ---------------------------------------------------------------------------

@dataclass
class BoundCheck:
    """Largest ``|J_k(x)| / bound`` over the bound's domain on the grid."""

    name: str
    max_ratio: float
    argmax: tuple
    points: int


def _log_abs_j(k, x):
    v = abs(float(bessel_j_mp(k, x, dps=30))) if x > 0 else 0.0
    return -math.inf if v == 0 else math.log(v)


def verify_bessel_bounds(k_range, x_grid):
    """Fitted constants for the small-argument, uniform and crude bounds.

    * small argument: ``x^k / Gamma(k+1)`` for ``0 < x <= sqrt(k+1)``
    * uniform: ``min(1, x/k) k^{-1/3}`` for ``x >= 1``
    * crude: ``2^k / sqrt(x)`` for ``x > 0``
    """
    checks = {
        "small_argument": BoundCheck("small_argument", 0.0, (), 0),
        "uniform": BoundCheck("uniform", 0.0, (), 0),
        "crude": BoundCheck("crude", 0.0, (), 0),
    }

    def record(name, k, x, log_ratio):
        c = checks[name]
        c.points += 1
        r = math.exp(log_ratio)
        if r > c.max_ratio:
            c.max_ratio, c.argmax = r, (k, x)

    for k in k_range:
        if k < 1:
            raise InvalidArgument("bounds are stated for k >= 1")
        for x in x_grid:
            if x <= 0:
                continue
            # the small-argument regime underflows double precision for large k
            lj = _log_abs_j(k, x) if x <= math.sqrt(k + 1) else math.log(abs(jv(k, x)) or 1e-320)
            if x <= math.sqrt(k + 1):
                record("small_argument", k, x, lj - (k * math.log(x) - gammaln(k + 1)))
            if x >= 1:
                record("uniform", k, x, lj - math.log(min(1.0, x / k) * k ** (-1 / 3)))
            record("crude", k, x, lj - (k * math.log(2) - 0.5 * math.log(x)))
    return checks


def bessel_recurrence_residual(nus, xs):
    """Max ``|J_{nu-1} + J_{nu+1} - (2 nu / x) J_nu|`` over the grid (``nu >= 1``)."""
    nu, x = np.meshgrid(np.asarray(nus, float), np.asarray(xs, float), indexing="ij")
    res = bessel_j(nu - 1, x) + bessel_j(nu + 1, x) - 2 * nu / x * bessel_j(nu, x)
    return float(np.max(np.abs(res)))


# ---------------------------------------------------------------------------
# Kitaoka's Bessel integral
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadValue:
    value: float
    error: float


def kitaoka_integral(k, s1, s2, tol=KITAOKA_TOL):
    """``int_0^{pi/2} J_{k-3/2}(4 pi s1 sin t) J_{k-3/2}(4 pi s2 sin t) sin t dt``."""
    if k < 6:
        raise InvalidArgument("k must be at least 6")
    if s1 <= 0 or s2 <= 0:
        raise InvalidArgument("s1 and s2 must be positive")
    nu = k - 1.5
    a, b = 4 * math.pi * s1, 4 * math.pi * s2

    def f(t):
        st = math.sin(t)
        return jv(nu, a * st) * jv(nu, b * st) * st

    val, err = sp_integrate.quad(f, 0, math.pi / 2, epsabs=1e-13, epsrel=1e-12, limit=400)
    if err > tol:
        raise ConvergenceFailure(f"Bessel integral error {err:.3g} above {tol:.3g}", val, err)
    return QuadValue(val, err)


def kitaoka_integral_mp(k, s1, s2, dps=30):
    """Independent reference: mpmath Gauss-Legendre with mpmath Bessel functions."""
    with mpmath.workdps(dps):
        nu = mpmath.mpf(k) - mpmath.mpf(3) / 2
        a = 4 * mpmath.pi * s1
        b = 4 * mpmath.pi * s2

        def f(t):
            st = mpmath.sin(t)
            return mpmath.besselj(nu, a * st) * mpmath.besselj(nu, b * st) * st

        n_pieces = max(4, int(2 * (s1 + s2)) + 4)
        edges = mpmath.linspace(0, mpmath.pi / 2, n_pieces + 1)
        return float(mpmath.quad(f, edges))


def kitaoka_decay_constant(ks, s1, s2):
    """``max_k |J_k| k^{2/3}`` over ``ks``: the constant in the ``k^{-2/3}`` bound."""
    return max(abs(kitaoka_integral(k, s1, s2).value) * k ** (2 / 3) for k in ks)


# ---------------------------------------------------------------------------
# Kloosterman sums
# ---------------------------------------------------------------------------

IMAG_TOL = 1e-10


def kloosterman(m, n, c):
    """``S(m, n; c) = sum_{x mod c, (x, c) = 1} e((m x + n x^{-1}) / c)``."""
    if c < 1:
        raise InvalidArgument("c must be positive")
    if c == 1:
        return 1.0
    x = np.array([u for u in range(1, c) if math.gcd(u, c) == 1], dtype=np.int64)
    xinv = np.array([pow(int(u), -1, c) for u in x], dtype=np.int64)
    phase = 2 * math.pi * ((m * x + n * xinv) % c) / c
    re = float(np.sum(np.cos(phase)))
    im = float(np.sum(np.sin(phase)))
    if abs(im) > IMAG_TOL * max(1.0, c):
        raise ArithmeticError(f"Kloosterman sum has imaginary part {im:.3g}")
    return re


def weil_bound(m, n, c):
    """``d(c) sqrt(gcd(m, n, c)) sqrt(c)``."""
    return int(divisor_count(c)) * math.sqrt(math.gcd(math.gcd(m, n), c)) * math.sqrt(c)


# ---------------------------------------------------------------------------
# Sato-Tate and Hecke relations
# ---------------------------------------------------------------------------

def chebyshev_u(l, x):
    """``U_l(x)`` normalized so that ``U_l(2 cos t) = sin((l+1) t) / sin t``."""
    x = np.asarray(x, dtype=float)
    prev, cur = np.zeros_like(x), np.ones_like(x)
    for _ in range(l):
        prev, cur = cur, x * cur - prev
    return cur


SATO_TATE_DENSITY_CONSTANT = 1 / math.pi
PRINTED_SATO_TATE_CONSTANT = 2 / math.pi


def sato_tate_mass(constant=SATO_TATE_DENSITY_CONSTANT):
    """Mass of ``constant * sqrt(1 - x^2/4)`` on ``[-2, 2]``."""
    val, _ = sp_integrate.quad(
        lambda x: constant * math.sqrt(max(0.0, 1 - x * x / 4)), -2, 2, epsabs=1e-14
    )
    return val


def chebyshev_sato_tate(l):
    """``(U_l evaluator, int U_l d mu_ST)`` with ``d mu_ST = (1/pi) sqrt(1 - x^2/4) dx``.

    The integral uses the algebraic weight ``(2 - x)^{1/2} (2 + x)^{1/2}``,
    for which QUADPACK is exact on polynomials up to rounding.
    """
    if l < 0:
        raise InvalidArgument("l must be non-negative")

    def U(x):
        return chebyshev_u(l, x)

    with warnings.catch_warnings():
        # exact zeros trip QUADPACK's roundoff detector
        warnings.simplefilter("ignore", sp_integrate.IntegrationWarning)
        val, _ = sp_integrate.quad(
            lambda x: float(U(x)) / 2, -2, 2, weight="alg", wvar=(0.5, 0.5), epsabs=1e-14
        )
    return U, val / math.pi


def hecke_multiplicativity_check(thetas, L):
    """Residual between two evaluations of ``lambda(L)`` from ``lambda(p) = 2 cos theta_p``.

    Path one: ``prod_p U_{l_p}(2 cos theta_p)`` via ``sin((l+1) t) / sin t``.
    Path two: the Hecke recursion ``lambda(p^{l+1}) = lambda(p) lambda(p^l) - lambda(p^{l-1})``.
    """
    if L < 1:
        raise InvalidArgument("L must be positive")
    closed = 1.0
    recursive = 1.0
    for p, l in factorint(L).items():
        t = thetas[p]
        closed *= math.sin((l + 1) * t) / math.sin(t)
        lp = 2 * math.cos(t)
        prev, cur = 0.0, 1.0
        for _ in range(l):
            prev, cur = cur, lp * cur - prev
        recursive *= cur
    return abs(closed - recursive), closed


# ---------------------------------------------------------------------------
# Petersson formula, Kloosterman side
# ---------------------------------------------------------------------------

TAIL_STOP = 1e-13
TAIL_WARN = 1e-8


@dataclass
class PeterssonSide:
    """``-(-1)^{k/2} 2 pi sum_{c <= C} S(L,1;c)/c J_{k-1}(4 pi sqrt(L)/c)``.

    ``tail_bound`` is the rigorous bound from ``|S| <= c`` and
    ``|J_nu(x)| <= (x/2)^nu / Gamma(nu+1)``; the sum stops once it is below
    ``TAIL_STOP``.  ``insufficient_cutoff`` flags a bound above ``TAIL_WARN``.
    """

    value: float
    k: int
    L: int
    terms_used: int
    tail_bound: float
    insufficient_cutoff: bool = field(default=False)


def petersson_tail_bound(k, L, C):
    """``2 pi sum_{c > C} (2 pi sqrt(L)/c)^{k-1} / Gamma(k)``, bounded by an integral."""
    return math.exp(
        math.log(2 * math.pi)
        + (k - 1) * math.log(2 * math.pi * math.sqrt(L))
        - gammaln(k)
        - math.log(k - 2)
        - (k - 2) * math.log(C)
    )


def petersson_kloosterman_side(k, L, c_max=10**4):
    if k < 6 or k % 2:
        raise InvalidArgument("k must be even and at least 6")
    if L < 1 or c_max < 1:
        raise InvalidArgument("L and c_max must be positive")
    total = 0.0
    c = 0
    while c < c_max:
        c += 1
        total += kloosterman(L, 1, c) / c * jv(k - 1, 4 * math.pi * math.sqrt(L) / c)
        if petersson_tail_bound(k, L, c) < TAIL_STOP:
            break
    sign = -((-1) ** (k // 2))
    tail = petersson_tail_bound(k, L, c)
    return PeterssonSide(sign * 2 * math.pi * total, k, L, c, tail, tail > TAIL_WARN)


# ---------------------------------------------------------------------------
# Ramanujan tau
# ---------------------------------------------------------------------------

def _pack(a, width):
    # signed coefficients: pack the positive and negative parts separately
    def raw(parts):
        return int.from_bytes(b"".join(c.to_bytes(width, "little") for c in parts), "little")

    return raw(max(c, 0) for c in a) - raw(max(-c, 0) for c in a)


def _mul_trunc(f, g, n):
    """Product of integer series truncated to ``n`` terms, by Kronecker substitution."""
    f, g = f[:n], g[:n]
    bound = max(map(abs, f)) * max(map(abs, g)) * min(len(f), len(g))
    width = (bound.bit_length() + 2) // 8 + 1
    half = 1 << (8 * width - 1)
    # shift every digit into [0, 2^(8 width)) so the bytes can be read off directly
    v = _pack(f, width) * _pack(g, width) + _pack([half] * (len(f) + len(g) - 1), width)
    data = v.to_bytes(width * (len(f) + len(g)), "little")
    m = min(n, len(f) + len(g) - 1)
    out = [int.from_bytes(data[i * width:(i + 1) * width], "little") - half for i in range(m)]
    return out + [0] * (n - m)


def delta_q_expansion(N):
    """``[tau(1), ..., tau(N)]`` from ``q prod (1 - q^n)^24`` in exact integers.

    ``prod (1 - q^n)^3 = sum_m (-1)^m (2m+1) q^{m(m+1)/2}`` (Jacobi), raised
    to the eighth power by repeated squaring.
    """
    if not 1 <= N <= 10**4:
        raise InvalidArgument("N must lie in 1..10^4")
    eta3 = [0] * N
    m = 0
    while m * (m + 1) // 2 < N:
        eta3[m * (m + 1) // 2] = (-1) ** m * (2 * m + 1)
        m += 1
    f = eta3
    for _ in range(3):
        f = _mul_trunc(f, f, N)
    return [int(v) for v in f[:N]]


def tau_multiplicativity_violations(tau, limit=100):
    """Coprime pairs ``(m, n)`` with ``m n <= len(tau)``, ``m, n <= limit`` and ``tau(mn) != tau(m) tau(n)``."""
    bad = []
    N = len(tau)
    for m in range(2, limit + 1):
        for n in range(m + 1, limit + 1):
            if m * n <= N and math.gcd(m, n) == 1:
                if tau[m * n - 1] != tau[m - 1] * tau[n - 1]:
                    bad.append((m, n))
    return bad
