"""Generating function for the unramified Bessel polynomials ``U^{l,m}``.

``C(X, Y) = H(X, Y) / (P(X) Q(Y)) = sum_{l,m} U^{l,m}(a, b) X^m Y^l`` with
``P``, ``Q``, ``H``, ``M1``, ``M2`` built from the local datum
``(p, epsilon, lambda_p)``.  Everything is computed exactly in Q(sqrt p)
whenever ``lambda_p`` is an integer, otherwise with complex coefficients.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sympy import isprime

from .errors import InvalidArgument, NotInvariantError, SingularSystemError
from .wpoly import (
    FLOAT_TOL,
    LaurentPolynomial,
    QSqrt,
    decompose_orbit_basis,
    orbit_sum,
    sigma,
    tau,
)

FLOAT_IDENTITY_TOL = 1e-9


@dataclass(frozen=True)
class LocalBesselDatum:
    """Local data ``(p, epsilon, lambda_p)`` at one prime.

    ``lambda_p`` is kept exact (an ``int``) when it is integral; any other
    real value switches the whole computation to floating mode.
    """

    p: int
    epsilon: int
    lambda_p: object

    def __post_init__(self):
        if not isprime(self.p):
            raise InvalidArgument(f"p={self.p} is not prime")
        if self.epsilon not in (-1, 0, 1):
            raise InvalidArgument("epsilon must be -1, 0 or +1")
        lam = self.lambda_p
        if isinstance(lam, complex):
            if abs(lam.imag) > 1e-12:
                raise InvalidArgument("lambda_p must be real")
            lam = lam.real
        if isinstance(lam, float) and abs(lam - round(lam)) < 1e-12:
            lam = int(round(lam))
        if isinstance(lam, Fraction) and lam.denominator == 1:
            lam = int(lam)
        object.__setattr__(self, "lambda_p", lam)
        if self.epsilon == -1 and lam != 0:
            raise InvalidArgument("inert prime needs lambda_p = 0")
        if abs(float(lam)) > 2 + 1e-12:
            raise InvalidArgument("|lambda_p| must be at most 2")

    @property
    def exact(self):
        return isinstance(self.lambda_p, int)

    def scalar(self, value):
        """Coerce a QSqrt scalar into this datum's coefficient mode."""
        return value if self.exact else complex(value)

    @property
    def lam(self):
        return QSqrt(self.lambda_p) if self.exact else float(self.lambda_p)

    @property
    def inv_sqrt_p(self):
        """``p^{-1/2}`` as an exact element ``sqrt(p)/p``."""
        q = QSqrt(0, Fraction(1, self.p), self.p)
        return self.scalar(q)

    @property
    def sqrt_p(self):
        return self.scalar(QSqrt.sqrt_p(self.p))


def _const(datum, c):
    return LaurentPolynomial.constant(c, datum.p, datum.exact)


def _poly(datum, P):
    """Bring a rational polynomial into the datum's prime context and mode."""
    out = LaurentPolynomial(P.terms, datum.p, True)
    return out if datum.exact else out.to_floating()


@dataclass(frozen=True)
class SuganoComponents:
    """Coefficient lists in the auxiliary variables.

    ``P_X[i]`` is the coefficient of ``X^i``; likewise ``Q_Y``, ``M1_X``,
    ``M2_X``.  ``H_XY`` maps ``(i, j)`` to the coefficient of ``X^i Y^j``.
    """

    datum: LocalBesselDatum
    sigma: LaurentPolynomial
    tau: LaurentPolynomial
    P_X: tuple
    Q_Y: tuple
    M1_X: tuple
    M2_X: tuple
    H_XY: dict = field(hash=False)


def _linear_product(datum, roots):
    """Coefficients of ``prod (1 - r X)`` for monomials ``r`` given as exponents."""
    coeffs = [_const(datum, 1)]
    for e in roots:
        mono = LaurentPolynomial({e: 1}, datum.p, True)
        if not datum.exact:
            mono = mono.to_floating()
        new = [None] * (len(coeffs) + 1)
        for i in range(len(new)):
            term = coeffs[i] if i < len(coeffs) else _const(datum, 0)
            if i > 0:
                term = term - mono * coeffs[i - 1]
            new[i] = term
        coeffs = new
    return tuple(coeffs)


def _uni_mul(f, g):
    out = [None] * (len(f) + len(g) - 1)
    for i, x in enumerate(f):
        for j, y in enumerate(g):
            out[i + j] = x * y if out[i + j] is None else out[i + j] + x * y
    return out


def _add_term(dct, key, value):
    dct[key] = dct[key] + value if key in dct else value


def build_components(datum):
    """Assemble ``P``, ``Q``, ``H``, ``M1``, ``M2``, ``sigma`` and ``tau``."""
    p, eps = datum.p, datum.epsilon
    sig = _poly(datum, sigma())
    ta = _poly(datum, tau())
    one = _const(datum, 1)
    lam = datum.lam
    ip = datum.inv_sqrt_p
    c_eps_p = datum.scalar(QSqrt(Fraction(eps, p)))

    P = _linear_product(datum, [(1, 1), (1, -1), (-1, 1), (-1, -1)])
    Q = _linear_product(datum, [(1, 0), (0, 1), (-1, 0), (0, -1)])

    inner = sig * (datum.sqrt_p * lam) - (ta - one) * eps - one * (lam * lam)
    m1_lin = inner * datum.scalar(QSqrt(Fraction(1, p - eps)))
    M1 = (one, -m1_lin, -(one * c_eps_p))
    M2 = (one, -ta, -ta, one)

    # H = (1 + X Y^2)(M1 (1 + X) + ip*lam*sigma X^2)
    #     - X Y (sigma M1 - ip*lam M2) - ip*lam P Y + (eps/p) P Y^2
    A = list(_uni_mul(M1, (one, one)))
    while len(A) < 3:
        A.append(_const(datum, 0))
    A[2] = A[2] + sig * (ip * lam)
    H = {}
    for i, c in enumerate(A):
        _add_term(H, (i, 0), c)
        _add_term(H, (i + 1, 2), c)
    B = [sig * c for c in M1]
    B.append(_const(datum, 0))
    for i, c in enumerate(M2):
        B[i] = B[i] - c * (ip * lam)
    for i, c in enumerate(B):
        _add_term(H, (i + 1, 1), -c)
    for i, c in enumerate(P):
        _add_term(H, (i, 1), -(c * (ip * lam)))
        _add_term(H, (i, 2), c * c_eps_p)
    H = {k: v for k, v in H.items() if not v.is_zero()}
    return SuganoComponents(datum, sig, ta, P, Q, M1, M2, H)


# ---------------------------------------------------------------------------
# inverse-series machinery on integer Laurent dictionaries
# ---------------------------------------------------------------------------

def _int_mul(f, g):
    out = {}
    for (i1, j1), c1 in f.items():
        for (i2, j2), c2 in g.items():
            k = (i1 + i2, j1 + j2)
            out[k] = out.get(k, 0) + c1 * c2
    return {k: v for k, v in out.items() if v}


def _inverse_series(monomials, order):
    """Coefficients of ``1 / prod (1 - r T)`` up to ``T^order`` (integer dicts).

    The long-division recurrence ``g_n = -sum_i e_i g_{n-i}`` with the
    elementary symmetric coefficients of the denominator.
    """
    den = [{(0, 0): 1}]
    for e in monomials:
        new = [dict(c) for c in den] + [{}]
        for i in range(1, len(new)):
            for k, v in den[i - 1].items():
                kk = (k[0] + e[0], k[1] + e[1])
                new[i][kk] = new[i].get(kk, 0) - v
        den = [{k: v for k, v in c.items() if v} for c in new]
    g = [{(0, 0): 1}]
    for n in range(1, order + 1):
        acc = {}
        for i in range(1, min(n, len(den) - 1) + 1):
            for k, v in _int_mul(den[i], g[n - i]).items():
                acc[k] = acc.get(k, 0) - v
        g.append({k: v for k, v in acc.items() if v})
    return g


_P_ROOTS = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
_Q_ROOTS = [(1, 0), (0, 1), (-1, 0), (0, -1)]


class _SeriesCache:
    """Thread-safe memo for inverse series and expanded U polynomials.

    Concurrent writers may both compute a value; whichever lands last wins,
    and both values are identical.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._inv = {}
        self._u = {}

    def inverse(self, which, order):
        key = (which, order)
        with self._lock:
            hit = self._inv.get(key)
        if hit is None:
            hit = _inverse_series(_P_ROOTS if which == "P" else _Q_ROOTS, order)
            with self._lock:
                self._inv[key] = hit
        return hit

    def get_u(self, key):
        with self._lock:
            return self._u.get(key)

    def put_u(self, key, value):
        with self._lock:
            self._u[key] = value


_CACHE = _SeriesCache()


def _split_coefficients(poly, exact):
    """Split ``poly`` into integer dictionaries over a common denominator."""
    if not exact:
        return None
    den = 1
    for c in poly.terms.values():
        den = math.lcm(den, c.r.denominator, c.s.denominator)
    rational = {}
    irrational = {}
    for k, c in poly.items():
        if c.r:
            rational[k] = int(c.r * den)
        if c.s:
            irrational[k] = int(c.s * den)
    return den, rational, irrational


def _components(datum):
    key = ("components", datum)
    hit = _CACHE.get_u(key)
    if hit is None:
        hit = build_components(datum)
        _CACHE.put_u(key, hit)
    return hit


def expand_U(datum, l, m):
    """Coefficient of ``X^m Y^l`` in ``H / (P Q)``."""
    if l < 0 or m < 0:
        raise InvalidArgument("l and m must be non-negative")
    key = ("U", datum, l, m)
    hit = _CACHE.get_u(key)
    if hit is not None:
        return hit
    comps = _components(datum)
    gp = _CACHE.inverse("P", max(m, 4))
    gq = _CACHE.inverse("Q", max(l, 4))
    if datum.exact:
        num_r, num_s = {}, {}
        den = 1
        pieces = []
        for (i, j), h in comps.H_XY.items():
            if i > m or j > l:
                continue
            split = _split_coefficients(h, True)
            den = math.lcm(den, split[0])
            pieces.append((i, j, split))
        for i, j, (hden, hr, hs) in pieces:
            g = _int_mul(gp[m - i], gq[l - j])
            scale = den // hden
            for part, target in ((hr, num_r), (hs, num_s)):
                if not part:
                    continue
                prod = _int_mul({k: v * scale for k, v in part.items()}, g)
                for k, v in prod.items():
                    target[k] = target.get(k, 0) + v
        terms = {}
        for k in set(num_r) | set(num_s):
            r = Fraction(num_r.get(k, 0), den)
            s = Fraction(num_s.get(k, 0), den)
            if r or s:
                terms[k] = QSqrt(r, s, datum.p)
        result = LaurentPolynomial(terms, datum.p, True)
    else:
        acc = {}
        for (i, j), h in comps.H_XY.items():
            if i > m or j > l:
                continue
            g = _int_mul(gp[m - i], gq[l - j])
            for (e1, c1) in h.items():
                for (e2, c2) in g.items():
                    k = (e1[0] + e2[0], e1[1] + e2[1])
                    acc[k] = acc.get(k, 0) + c1 * c2
        result = LaurentPolynomial(
            {k: v for k, v in acc.items() if abs(v) > 1e-15}, datum.p, False
        )
    _CACHE.put_u(key, result)
    return result


def expand_U_row(datum, l_max):
    """``U^{0,0}, ..., U^{l_max,0}`` from the one-variable specialization.

    Long division of ``1 - p^{-1/2} lambda Y + (eps/p) Y^2`` by ``Q(Y)``.
    """
    if l_max < 0:
        raise InvalidArgument("l_max must be non-negative")
    key = ("row", datum, l_max)
    hit = _CACHE.get_u(key)
    if hit is not None:
        return list(hit)
    comps = _components(datum)
    Q = comps.Q_Y
    num = [
        _const(datum, 1),
        _const(datum, -(datum.inv_sqrt_p * datum.lam)),
        _const(datum, datum.scalar(QSqrt(Fraction(datum.epsilon, datum.p)))),
    ]
    row = []
    for n in range(l_max + 1):
        acc = num[n] if n < len(num) else _const(datum, 0)
        for i in range(1, min(n, 4) + 1):
            acc = acc - Q[i] * row[n - i]
        row.append(acc)
    _CACHE.put_u(key, tuple(row))
    return row


def u_index_order(degree):
    """Indices ``(l, m)`` with ``l + 2m <= degree`` sorted by ``(l + 2m, l)``."""
    idx = [(l, m) for m in range(degree // 2 + 1) for l in range(degree - 2 * m + 1)]
    return sorted(idx, key=lambda lm: (lm[0] + 2 * lm[1], lm[0]))


def decompose_in_U_basis(datum, poly):
    """Coordinates of a W-invariant polynomial in the ``U^{l,m}`` basis."""
    exact = datum.exact and poly.exact
    if poly.p is not None and poly.p != datum.p:
        raise InvalidArgument("polynomial and datum use different primes")
    poly = _poly(datum, poly) if exact else poly.to_floating()
    tol = None if exact else FLOAT_IDENTITY_TOL
    bad = poly.violated_generator(tol)
    if bad is not None:
        raise NotInvariantError(bad)
    target, degree = decompose_orbit_basis(poly, tol)
    unknowns = u_index_order(degree)
    rows = sorted(
        [(j, k) for j in range(degree + 1) for k in range(j + 1) if j + k <= degree],
        key=lambda jk: (jk[0] + jk[1], jk[1]),
    )
    if len(rows) != len(unknowns):
        raise SingularSystemError("orbit basis and U basis sizes differ")
    columns = []
    for l, m in unknowns:
        u = expand_U(datum, l, m)
        coords, _ = decompose_orbit_basis(u if exact else u.to_floating(), tol)
        columns.append(coords)
    if exact:
        zero = QSqrt(0)
        A = [[col.get(r, zero) for col in columns] for r in rows]
        rhs = [target.get(r, zero) for r in rows]
        sol = _solve_exact(A, rhs)
    else:
        A = np.array([[complex(col.get(r, 0)) for col in columns] for r in rows])
        rhs = np.array([complex(target.get(r, 0)) for r in rows])
        sol = list(np.linalg.solve(A, rhs)) if rows else []
    out = {}
    for lm, c in zip(unknowns, sol):
        if exact:
            if c:
                out[lm] = c
        elif abs(c) > FLOAT_IDENTITY_TOL:
            out[lm] = complex(c)
    return out


def _solve_exact(A, b):
    n = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col]), None)
        if piv is None:
            raise SingularSystemError("U basis system is singular")
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col].inverse()
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def reassemble(datum, coords):
    out = _const(datum, 0)
    for (l, m), c in coords.items():
        out = out + expand_U(datum, l, m) * c
    return out


# ---------------------------------------------------------------------------
# numerical size checks on the tempered torus
# ---------------------------------------------------------------------------

def tempered_grid(n=200):
    """``n x n`` grid of angles covering [0, pi]^2 (a W-fundamental domain)."""
    t = np.linspace(0.0, np.pi, n)
    return np.meshgrid(t, t, indexing="ij")


def sup_norm(poly, n=200):
    t = np.linspace(0.0, np.pi, n)
    return float(np.max(np.abs(poly.evaluate_tensor(t, t))))


def u_bound_ratio(datum, l, m, n=200):
    """``max |U^{l,m}| / ((l+3)^3 (m+3)^3)`` on the tempered grid."""
    return sup_norm(expand_U(datum, l, m), n) / ((l + 3) ** 3 * (m + 3) ** 3)


def u20_remainder(datum):
    """``U^{2,0} - (1 - lambda p^{-1/2} U^{1,0} + c_2 + tau)`` as a polynomial."""
    u20 = expand_U(datum, 2, 0)
    u10 = expand_U(datum, 1, 0)
    one = _const(datum, 1)
    c2 = _poly(datum, orbit_sum(2, 0))
    approx = one - u10 * (datum.lam * datum.inv_sqrt_p) + c2 + _poly(datum, tau())
    return u20 - approx
