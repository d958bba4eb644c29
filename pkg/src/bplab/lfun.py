"""Local L-factors, their Dirichlet coefficients, and averaged Euler products."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma, gammaln

from .classgroup import (
    characters,
    enumerate_class_group,
    is_fundamental,
    kronecker,
    kronecker_symbol,
    lambda_p_exact,
    primes_up_to,
    unit_count,
)
from .errors import InvalidArgument, InvalidDiscriminant, PoleError, UnsupportedRegion
from .measures import SpectralPoint, integrate, plancherel_from_datum, plancherel_measure
from .sugano import LocalBesselDatum
from .wpoly import LaurentPolynomial

SPIN = "spin"
PROJECTION = "projection"
LOCAL_FACTOR_KINDS = (SPIN, PROJECTION)
POLE_TOL = 1e-14


def _pair(point):
    if isinstance(point, SpectralPoint):
        return point.a, point.b
    a, b = point
    return complex(a), complex(b)


def factor_roots(kind, a, b):
    """The roots ``x`` of the inverse linear factors ``(1 - x T)``."""
    if kind == SPIN:
        return [a, b, 1 / a, 1 / b]
    if kind == PROJECTION:
        return [1, a * b, a / b, b / a, 1 / (a * b)]
    raise InvalidArgument(f"unknown local factor kind {kind!r}")


def local_factor(kind, point, s, p):
    """``prod (1 - x p^{-s})^{-1}`` over the roots of ``kind`` at ``point``."""
    a, b = _pair(point)
    T = complex(p) ** (-complex(s))
    out = 1.0 + 0j
    for x in factor_roots(kind, a, b):
        f = 1 - x * T
        if abs(f) < POLE_TOL:
            raise PoleError(x, f"factor (1 - {x:.6g} p^-s) vanishes")
        out /= f
    return out


# ---------------------------------------------------------------------------
# Dirichlet coefficients of the spin factor
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DirichletCoefficients:
    """``H_m`` (coefficient of ``p^{-ms}``) and power sums ``c_m``.

    ``monomial_counts[m]`` is the number of compositions of ``m`` into four
    parts, i.e. the monomial count of ``H_m`` with multiplicity.
    """

    p: int
    H: tuple
    c: tuple
    monomial_counts: tuple


def _H_by_compositions(m):
    terms = {}
    count = 0
    for k1 in range(m + 1):
        for k2 in range(m + 1 - k1):
            for k3 in range(m + 1 - k1 - k2):
                k4 = m - k1 - k2 - k3
                key = (k1 - k3, k2 - k4)
                terms[key] = terms.get(key, 0) + 1
                count += 1
    return LaurentPolynomial(terms), count


def power_sum(m):
    """``c_m = a^m + a^-m + b^m + b^-m`` (``c_0 = 4``)."""
    if m == 0:
        return LaurentPolynomial.constant(4)
    return LaurentPolynomial({(m, 0): 1, (-m, 0): 1, (0, m): 1, (0, -m): 1})


def dirichlet_coefficients(p, M):
    if M < 0:
        raise InvalidArgument("M must be non-negative")
    H, counts = [], []
    for m in range(M + 1):
        h, n = _H_by_compositions(m)
        H.append(h)
        counts.append(n)
    return DirichletCoefficients(
        p, tuple(H), tuple(power_sum(m) for m in range(1, M + 1)), tuple(counts)
    )


def spin_denominator():
    """Coefficients ``q_0..q_4`` of ``prod (1 - x T)`` over the spin roots."""
    one = LaurentPolynomial.constant(1)
    q = [one]
    for root in ((1, 0), (0, 1), (-1, 0), (0, -1)):
        x = LaurentPolynomial.monomial(*root)
        q = [
            (q[i] if i < len(q) else LaurentPolynomial())
            - (x * q[i - 1] if i >= 1 else LaurentPolynomial())
            for i in range(len(q) + 1)
        ]
    return q


def generating_identity_check(coeffs):
    """Index of the first ``H_m`` violating ``Q(T) * sum H_m T^m = 1``, or None.

    ``Q`` is the spin denominator; its coefficients are elementary symmetric
    functions of the roots, so this is independent of the composition count.
    """
    q = spin_denominator()
    for m, h in enumerate(coeffs.H):
        acc = LaurentPolynomial()
        for j in range(min(m, 4) + 1):
            acc = acc + q[j] * coeffs.H[m - j]
        target = LaurentPolynomial.constant(1 if m == 0 else 0)
        if acc != target:
            return m
    return None


def newton_check(rng, n_points=20, M=8, radius=0.5, n_fft=256):
    """Max error of ``[T^m] log L_spin = c_m / m`` at random torus points.

    Taylor coefficients of the logarithm are read off by FFT on the circle
    ``|T| = radius``.
    """
    worst = 0.0
    k = np.arange(n_fft)
    T = radius * np.exp(2j * np.pi * k / n_fft)
    for _ in range(n_points):
        t1, t2 = rng.uniform(0, math.pi, size=2)
        a, b = cmath.exp(1j * t1), cmath.exp(1j * t2)
        vals = -sum(np.log(1 - x * T) for x in factor_roots(SPIN, a, b))
        coef = np.fft.fft(vals) / n_fft / radius ** k
        for m in range(1, M + 1):
            cm = 2 * math.cos(m * t1) + 2 * math.cos(m * t2)
            worst = max(worst, abs(coef[m] - cm / m))
    return worst


# ---------------------------------------------------------------------------
# local averages and Euler products
# ---------------------------------------------------------------------------

def closed_form_average(datum, s):
    """``(1 - lambda_p p^{-1/2-s} + eps p^{-1-2s})^{-1}``."""
    p = datum.p
    u = complex(p) ** (-0.5 - complex(s))
    return 1 / (1 - float(datum.lambda_p) * u + datum.epsilon * u * u)


def _check_half_plane(s):
    if complex(s).real <= 0.5:
        raise UnsupportedRegion("the local average needs Re(s) > 1/2")


def spin_integrand(p, s):
    T = complex(p) ** (-complex(s))

    def f(t1, t2):
        return 1 / ((1 - 2 * np.cos(t1) * T + T * T) * (1 - 2 * np.cos(t2) * T + T * T))

    return f


@dataclass(frozen=True)
class LocalAverage:
    numeric: complex
    closed_form: complex
    quad_error: float

    @property
    def deviation(self):
        return abs(self.numeric - self.closed_form)


def average_local_factor_datum(datum, s, measure=None, rule=None):
    _check_half_plane(s)
    measure = measure or plancherel_from_datum(datum)
    val, err = integrate(spin_integrand(datum.p, s), measure, rule)
    return LocalAverage(val, closed_form_average(datum, s), err)


def resolve_character(d, char_index):
    if not is_fundamental(d):
        raise InvalidDiscriminant(f"-{d} is not a fundamental discriminant")
    G = enumerate_class_group(d)
    chars = characters(G)
    if not 0 <= char_index < len(chars):
        raise InvalidArgument(f"character index {char_index} out of range 0..{len(chars) - 1}")
    return G, chars[char_index]


def average_local_factor(d, chi, p, s, rule=None):
    """Quadrature and closed form of the spin factor averaged over ``mu_p``."""
    m = plancherel_measure(d, chi, p)
    return average_local_factor_datum(m.datum, s, m, rule)


def local_data(G, chi, primes):
    return [
        LocalBesselDatum(p, kronecker_symbol(G.d, p), lambda_p_exact(G, chi, p)) for p in primes
    ]


@dataclass
class EulerProduct:
    """Truncated Euler product with partial values at the checkpoints.

    ``tail_bound`` bounds ``|log(full / truncated)|`` via
    ``sum_{p > cutoff} 3 p^{-(Re s + 1/2)}``.
    """

    value: complex
    cutoff: int
    partials: dict = field(default_factory=dict)
    tail_bound: float = math.inf


def _prime_power_tail(beta, cutoff, scale=3.0):
    # sum_{n > X} n^-beta <= X^{1-beta} / (beta - 1)
    return scale * cutoff ** (1 - beta) / (beta - 1)


def euler_product_average(G, chi, s, prime_cutoff, checkpoints=()):
    """``prod_{p <= cutoff}`` of the closed-form local averages."""
    _check_half_plane(s)
    if prime_cutoff < 2:
        raise InvalidArgument("prime cutoff must be at least 2")
    marks = sorted(c for c in set(checkpoints) if c <= prime_cutoff)
    partials = {}
    log_total = 0j
    primes = primes_up_to(prime_cutoff)
    mi = 0
    for datum in local_data(G, chi, primes):
        while mi < len(marks) and marks[mi] < datum.p:
            partials[marks[mi]] = cmath.exp(log_total)
            mi += 1
        log_total += cmath.log(closed_form_average(datum, s))
    for c in marks[mi:]:
        partials[c] = cmath.exp(log_total)
    value = cmath.exp(log_total)
    partials[prime_cutoff] = value
    beta = complex(s).real + 0.5
    return EulerProduct(value, prime_cutoff, partials, _prime_power_tail(beta, prime_cutoff))


# ---------------------------------------------------------------------------
# reference L-values by direct summation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesValue:
    value: complex
    tail_bound: float
    terms: int


def character_table(d):
    """``chi_d(n)`` for ``n mod d`` (Kronecker symbol ``(-d / n)``); ``d=1`` is trivial."""
    if d == 1:
        return np.ones(1)
    return np.array([0] + [kronecker(-d, n) for n in range(1, d)], dtype=float)


def _power_tail(M, t):
    """``sum_{k >= M} k^-t`` to three Euler-Maclaurin terms, and the next-term size."""
    val = M ** (1 - t) / (t - 1) + 0.5 * M ** (-t) + t * M ** (-t - 1) / 12
    return val, abs(t * (t + 1) * (t + 2)) * abs(M ** (-t - 3)) / 720


def _character_tail(table, s, M):
    """Tail ``sum_{n > M d} chi(n) n^-s`` for a nontrivial character.

    Expanding ``(k d + a)^-s`` in ``a / (k d)`` gives moments
    ``S_j = sum_a a^j chi(a)``; ``S_0 = 0``, and two further orders are kept.
    The bound is the third-order Taylor remainder plus the k-sum errors.
    """
    d = len(table)
    a = np.arange(d, dtype=float)
    S1 = float(np.sum(a * table))
    S2 = float(np.sum(a**2 * table))
    t1, e1 = _power_tail(M, s + 1)
    t2, e2 = _power_tail(M, s + 2)
    c1 = -s * S1 * d ** (-s - 1)
    c2 = s * (s + 1) / 2 * S2 * d ** (-s - 2)
    val = c1 * t1 + c2 * t2
    sr = s.real
    cube = (d * (d - 1) / 2) ** 2
    rem = abs(s * (s + 1) * (s + 2)) / 6 * cube * d ** (-sr - 3)
    rem *= M ** (-sr - 2) / (sr + 2) + M ** (-sr - 3)
    return val, rem + abs(c1) * e1 + abs(c2) * e2


def dirichlet_L(d, s, terms=10**6):
    """``sum_{n <= terms} chi_d(n) n^-s`` with a tail correction and bound.

    ``d = 1`` gives zeta, for which the Euler-Maclaurin tail
    ``N^{1-s}/(s-1) - N^{-s}/2`` is added and the bound is the next term.
    For a nontrivial character the sum stops at a multiple of the modulus
    and the leading tail terms are added (see :func:`_character_tail`).
    ``s = 1`` is accepted only for a nontrivial character.
    """
    s = complex(s)
    if terms < 1000:
        raise InvalidArgument("at least 1000 terms are required")
    if d != 1 and not is_fundamental(d):
        raise InvalidDiscriminant(f"-{d} is not a fundamental discriminant")
    trivial = d == 1
    at_one = s == 1 and not trivial
    if s.real <= 1 and not at_one:
        raise UnsupportedRegion("plain summation needs Re(s) > 1")
    table = character_table(d)
    if not trivial:
        terms -= terms % d
    n = np.arange(1, terms + 1, dtype=float)
    chi = table[np.arange(1, terms + 1) % len(table)]
    val = complex(np.sum(chi * n ** (-s)))
    N = float(terms)
    if trivial:
        val += N ** (1 - s) / (s - 1) - 0.5 * N ** (-s)
        bound = abs(s) * N ** (-s.real - 1) / 12 * 1.01
    else:
        tail, bound = _character_tail(table, s, terms // d)
        val += tail
    return SeriesValue(val, bound, terms)


def L1_digamma(d):
    """``L(1, chi_d) = -(1/d) sum_a chi_d(a) psi(a/d)`` (finite closed form)."""
    table = character_table(d)
    a = np.arange(1, d)
    return float(-np.sum(table[1:] * digamma(a / d)) / d)


def hecke_L(G, chi, s, radius=200):
    """``L(chi, s)`` over ideals, summed through the reduced forms.

    ``sum_c chi(c) sum_{(x,y) != 0} Q_c(x,y)^{-s} / w`` over the box
    ``|x|, |y| <= radius``; the tail bound integrates ``Q^{-Re s}`` outside
    the inscribed disc using the smallest eigenvalue of each form.
    """
    s = complex(s)
    if s.real <= 1:
        raise UnsupportedRegion("lattice summation needs Re(s) > 1")
    r = np.arange(-radius, radius + 1, dtype=float)
    X, Y = np.meshgrid(r, r, indexing="ij")
    nonzero = (X != 0) | (Y != 0)
    X, Y = X[nonzero], Y[nonzero]
    total = 0j
    bound = 0.0
    for c, form in enumerate(G.classes):
        Q = form.A * X * X + form.B * X * Y + form.C * Y * Y
        total += chi.value(c) * complex(np.sum(Q ** (-s)))
        lam_min = (form.A + form.C - math.hypot(form.A - form.C, form.B)) / 2
        sig = s.real
        bound += 2 * math.pi * (lam_min * radius**2) ** (1 - sig) / (2 * sig - 2) / lam_min
    w = G.w
    return SeriesValue(total / w, bound / w, (2 * radius + 1) ** 2)


# ---------------------------------------------------------------------------
# normalizing constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalizingConstants:
    """Natural logarithms of ``c_k`` and of ``c_{k,d}`` in two printed forms."""

    k: int
    d: int
    log_c_k: float
    log_c_kd: float
    log_c_kd_alt: float

    @property
    def ratio(self):
        return math.exp(self.log_c_kd - self.log_c_k)

    @property
    def form_agreement(self):
        return abs(self.log_c_kd - self.log_c_kd_alt)


def log_c_k(k):
    if k < 3:
        raise InvalidArgument("k must be at least 3")
    return (
        0.5 * math.log(math.pi)
        - math.log(4)
        + (3 - 2 * k) * math.log(4 * math.pi)
        + gammaln(k - 1.5)
        + gammaln(k - 2)
    )


def normalizing_constants(k, d):
    lck = log_c_k(k)
    G = enumerate_class_group(d)
    w, h = unit_count(d), G.h
    log_d4 = math.log(d / 4)
    first = (1.5 - k) * log_d4 + math.log(4) + lck - math.log(w * h)
    alt = (1 - k) * log_d4 + math.log(4 * math.pi) + lck - 2 * math.log(w) - math.log(L1_digamma(d))
    return NormalizingConstants(k, d, lck, first, alt)


def iter_grid(ds, primes):
    """``(d, char_index, chi, p)`` over every character of each class group."""
    for d in ds:
        G = enumerate_class_group(d)
        for j, chi in enumerate(characters(G)):
            for p in primes:
                yield d, j, chi, p

