"""Weyl-invariant Laurent polynomials in two variables.

Polynomials live in ``K[a, 1/a, b, 1/b]`` where ``K`` is either the exact
field Q(sqrt p) for a fixed prime ``p`` or the complex numbers.  The Weyl
group W of order 8 is generated by ``a <-> b``, ``a -> 1/a`` and ``b -> 1/b``.

Exact coefficients are :class:`QSqrt` values ``r + s*sqrt(p)`` with rational
``r, s``; floating coefficients are Python complex numbers compared with an
absolute tolerance (``FLOAT_TOL`` unless overridden per call).
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import InvalidArgument, NotInvariantError

FLOAT_TOL = 1e-12

WEYL_GENERATORS = ("swap", "invert_a", "invert_b")


class QSqrt:
    """Exact element ``r + s*sqrt(p)`` of Q(sqrt p).

    ``p`` may be None for a plain rational (then ``s`` must be zero); such
    values combine with any prime context.
    """

    __slots__ = ("r", "s", "p")

    def __init__(self, r=0, s=0, p=None):
        r = Fraction(r)
        s = Fraction(s)
        if s and p is None:
            raise InvalidArgument("irrational part needs a prime context")
        self.r = r
        self.s = s
        self.p = p if s else None

    @classmethod
    def _make(cls, r, s, p):
        # trusted constructor for Fraction parts produced by arithmetic
        out = object.__new__(cls)
        out.r = r
        out.s = s
        out.p = p if s else None
        return out

    @classmethod
    def sqrt_p(cls, p):
        return cls(0, 1, p)

    def _ctx(self, other):
        if self.p is None:
            return other.p
        if other.p is None or other.p == self.p:
            return self.p
        raise InvalidArgument(f"mixed prime contexts {self.p} and {other.p}")

    @staticmethod
    def _coerce(x):
        if isinstance(x, QSqrt):
            return x
        if isinstance(x, (int, Rational)):
            return QSqrt(x)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QSqrt._make(self.r + other.r, self.s + other.s, self._ctx(other))

    __radd__ = __add__

    def __neg__(self):
        return QSqrt._make(-self.r, -self.s, self.p)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return QSqrt._make(self.r * other, self.s * other, self.p)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self._ctx(other)
        if not self.s:
            return QSqrt._make(self.r * other.r, self.r * other.s, p)
        if not other.s:
            return QSqrt._make(self.r * other.r, self.s * other.r, p)
        r = self.r * other.r + self.s * other.s * p
        return QSqrt._make(r, self.r * other.s + self.s * other.r, p)

    __rmul__ = __mul__

    def inverse(self):
        if not self:
            raise ZeroDivisionError("inverse of zero in Q(sqrt p)")
        if not self.s:
            return QSqrt(1 / self.r)
        norm = self.r * self.r - self.s * self.s * self.p
        return QSqrt(self.r / norm, -self.s / norm, self.p)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __bool__(self):
        return bool(self.r) or bool(self.s)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.r == other.r and self.s == other.s and (
            not self.s or self.p == other.p
        )

    def __hash__(self):
        return hash((self.r, self.s, self.p if self.s else None))

    def __float__(self):
        return float(self.r) + (float(self.s) * math.sqrt(self.p) if self.s else 0.0)

    def __complex__(self):
        return complex(float(self))

    def __repr__(self):
        if not self.s:
            return f"QSqrt({self.r})"
        return f"QSqrt({self.r} + {self.s}*sqrt({self.p}))"


def _exact(x, p=None):
    if isinstance(x, QSqrt):
        return x
    if isinstance(x, (int, Rational)):
        return QSqrt(x)
    raise InvalidArgument(f"cannot use {x!r} as an exact coefficient")


class LaurentPolynomial:
    """Finite map ``(i, j) -> coefficient`` standing for ``sum c * a^i b^j``.

    Instances are immutable.  ``exact=True`` stores :class:`QSqrt`
    coefficients; ``exact=False`` stores complex numbers.
    """

    __slots__ = ("_terms", "p", "exact", "_key")

    def __init__(self, terms=None, p=None, exact=True):
        clean = {}
        for (i, j), c in (terms or {}).items():
            if exact:
                c = _exact(c)
                if c.p is not None:
                    if p is None:
                        p = c.p
                    elif c.p != p:
                        raise InvalidArgument(f"mixed prime contexts {p} and {c.p}")
                if c:
                    clean[(int(i), int(j))] = c
            else:
                c = complex(c)
                if c != 0:
                    clean[(int(i), int(j))] = c
        self._terms = dict(sorted(clean.items()))
        self.p = p
        self.exact = exact
        self._key = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, c, p=None, exact=True):
        return cls({(0, 0): c}, p, exact)

    @classmethod
    def monomial(cls, i, j, c=1, p=None, exact=True):
        return cls({(i, j): c}, p, exact)

    # -- basic accessors --------------------------------------------------
    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __getitem__(self, exponent):
        return self._terms.get(tuple(exponent), QSqrt(0) if self.exact else 0j)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self, tol=None):
        if self.exact:
            return not self._terms
        tol = FLOAT_TOL if tol is None else tol
        return all(abs(c) <= tol for c in self._terms.values())

    # -- context handling -------------------------------------------------
    def to_floating(self):
        if not self.exact:
            return self
        return LaurentPolynomial(
            {e: complex(c) for e, c in self._terms.items()}, self.p, exact=False
        )

    def _combine_ctx(self, other):
        if self.p is not None and other.p is not None and self.p != other.p:
            raise InvalidArgument(f"mixed prime contexts {self.p} and {other.p}")
        p = self.p if self.p is not None else other.p
        if self.exact and other.exact:
            return self, other, p, True
        return self.to_floating(), other.to_floating(), p, False

    def _lift(self, other):
        if isinstance(other, LaurentPolynomial):
            return other
        if isinstance(other, (int, Rational, QSqrt)) and self.exact:
            return LaurentPolynomial.constant(other, self.p, True)
        if isinstance(other, (int, float, complex, Rational, QSqrt)):
            return LaurentPolynomial.constant(complex(other), self.p, False)
        return NotImplemented

    # -- ring operations --------------------------------------------------
    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        x, y, p, exact = self._combine_ctx(other)
        out = dict(x._terms)
        for e, c in y._terms.items():
            out[e] = out[e] + c if e in out else c
        return LaurentPolynomial(out, p, exact)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPolynomial({e: -c for e, c in self._terms.items()}, self.p, self.exact)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        x, y, p, exact = self._combine_ctx(other)
        out = {}
        for (i1, j1), c1 in x._terms.items():
            for (i2, j2), c2 in y._terms.items():
                e = (i1 + i2, j1 + j2)
                prod = c1 * c2
                out[e] = out[e] + prod if e in out else prod
        return LaurentPolynomial(out, p, exact)

    __rmul__ = __mul__

    def scale(self, c):
        return self * c

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise InvalidArgument("only non-negative integer powers")
        result = LaurentPolynomial.constant(1, self.p, self.exact)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- comparison -------------------------------------------------------
    def equals(self, other, tol=None):
        other = self._lift(other)
        if self.exact and other.exact:
            if self.p is not None and other.p is not None and self.p != other.p:
                return False
            return self._terms == other._terms
        return (self - other).is_zero(tol)

    def __eq__(self, other):
        if not isinstance(other, (LaurentPolynomial, int, Rational, QSqrt)):
            return NotImplemented
        return self.equals(other)

    def __hash__(self):
        if self._key is None:
            if self.exact:
                self._key = hash(tuple(self._terms.items()))
            else:
                # floating values compare with a tolerance, so only the
                # support is safe to hash
                self._key = hash(tuple(self._terms))
        return self._key

    # -- Weyl action ------------------------------------------------------
    def act(self, generator):
        if generator == "swap":
            f = lambda i, j: (j, i)
        elif generator == "invert_a":
            f = lambda i, j: (-i, j)
        elif generator == "invert_b":
            f = lambda i, j: (i, -j)
        else:
            raise InvalidArgument(f"unknown Weyl generator {generator!r}")
        return LaurentPolynomial(
            {f(i, j): c for (i, j), c in self._terms.items()}, self.p, self.exact
        )

    def violated_generator(self, tol=None):
        for g in WEYL_GENERATORS:
            if not self.act(g).equals(self, tol):
                return g
        return None

    def is_invariant(self, tol=None):
        return self.violated_generator(tol) is None

    # -- evaluation -------------------------------------------------------
    def evaluate(self, a, b):
        """Evaluate at ``(a, b)``; arrays broadcast elementwise."""
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        if np.any(a == 0) or np.any(b == 0):
            raise InvalidArgument("evaluation point has a zero coordinate")
        apow, bpow = {}, {}
        total = np.zeros(np.broadcast(a, b).shape, dtype=complex)
        for (i, j), c in self._terms.items():
            if i not in apow:
                apow[i] = a**i
            if j not in bpow:
                bpow[j] = b**j
            total = total + complex(c) * apow[i] * bpow[j]
        if total.ndim == 0:
            return complex(total)
        return total

    def evaluate_angles(self, theta1, theta2):
        """Evaluate at ``(e^{i theta1}, e^{i theta2})`` without complex powers."""
        t1 = np.asarray(theta1, dtype=float)
        t2 = np.asarray(theta2, dtype=float)
        total = np.zeros(np.broadcast(t1, t2).shape, dtype=complex)
        rows = {}
        for (i, j), c in self._terms.items():
            rows.setdefault(i, []).append((j, complex(c)))
        col = {}
        for i, row in rows.items():
            inner = np.zeros(t2.shape, dtype=complex)
            for j, c in row:
                if j not in col:
                    col[j] = np.exp(1j * j * t2)
                inner = inner + c * col[j]
            total = total + np.exp(1j * i * t1) * inner
        if total.ndim == 0:
            return complex(total)
        return total

    def evaluate_tensor(self, t1, t2):
        """Values on the tensor grid ``t1 x t2`` (1-d angle arrays).

        Uses ``sum c_ij e^{i i t1} e^{i j t2} = E1 C E2^T``.
        """
        t1 = np.asarray(t1, dtype=float)
        t2 = np.asarray(t2, dtype=float)
        if not self._terms:
            return np.zeros((len(t1), len(t2)), dtype=complex)
        iexp = sorted({i for i, _ in self._terms})
        jexp = sorted({j for _, j in self._terms})
        ii = {e: k for k, e in enumerate(iexp)}
        jj = {e: k for k, e in enumerate(jexp)}
        C = np.zeros((len(iexp), len(jexp)), dtype=complex)
        for (i, j), c in self._terms.items():
            C[ii[i], jj[j]] = complex(c)
        E1 = np.exp(1j * np.outer(t1, iexp))
        E2 = np.exp(1j * np.outer(t2, jexp))
        return E1 @ C @ E2.T

    # -- misc -------------------------------------------------------------
    def max_abs_exponent(self):
        return max((max(abs(i), abs(j)) for i, j in self._terms), default=0)

    def to_json(self):
        terms = {}
        for (i, j), c in self._terms.items():
            if self.exact:
                terms[f"{i},{j}"] = [str(c.r), str(c.s)]
            else:
                terms[f"{i},{j}"] = [c.real, c.imag]
        return {
            "p": self.p,
            "mode": "exact" if self.exact else "floating",
            "terms": terms,
        }

    @classmethod
    def from_json(cls, doc):
        exact = doc.get("mode", "exact") == "exact"
        p = doc.get("p")
        terms = {}
        for key, (u, v) in doc["terms"].items():
            i, j = (int(x) for x in key.split(","))
            if exact:
                terms[(i, j)] = QSqrt(Fraction(u), Fraction(v), p if Fraction(v) else None)
            else:
                terms[(i, j)] = complex(u, v)
        return cls(terms, p, exact)

    def __repr__(self):
        if not self._terms:
            return "LaurentPolynomial(0)"
        parts = []
        for (i, j), c in self._terms.items():
            parts.append(f"({c if not self.exact else _fmt(c)})*a^{i}*b^{j}")
        return "LaurentPolynomial(" + " + ".join(parts) + ")"


def _fmt(c):
    if not c.s:
        return str(c.r)
    return f"{c.r}+{c.s}*sqrt{c.p}"


def orbit_sum(j, k, p=None, exact=True):
    """Sum of the distinct monomials in the W-orbit of ``a^j b^k``."""
    if not (isinstance(j, int) and isinstance(k, int)) or k < 0 or j < k:
        raise InvalidArgument(f"orbit_sum needs j >= k >= 0, got ({j}, {k})")
    orbit = set()
    for x, y in ((j, k), (k, j)):
        for sx in (1, -1):
            for sy in (1, -1):
                orbit.add((sx * x, sy * y))
    return LaurentPolynomial({e: 1 for e in orbit}, p, exact)


def sigma(p=None, exact=True):
    """``a + b + 1/a + 1/b``."""
    return orbit_sum(1, 0, p, exact)


def tau(p=None, exact=True):
    """``1 + ab + a/b + b/a + 1/(ab)``."""
    return orbit_sum(1, 1, p, exact) + orbit_sum(0, 0, p, exact)


def poly_arith(op, *operands):
    """Functional form of the ring operations: add, mul, scale, negate."""
    if op == "add":
        x, y = operands
        return x + y
    if op == "mul":
        x, y = operands
        return x * y
    if op == "scale":
        x, c = operands
        return x.scale(c)
    if op == "negate":
        (x,) = operands
        return -x
    raise InvalidArgument(f"unknown operation {op!r}")


def evaluate(poly, point):
    a, b = point
    return poly.evaluate(a, b)


def decompose_orbit_basis(poly, tol=None):
    """Orbit-sum coordinates of a W-invariant polynomial.

    Returns ``(coords, trace_degree)`` where ``coords`` maps ``(j, k)`` with
    ``j >= k >= 0`` to the coefficient of ``orbit_sum(j, k)`` and
    ``trace_degree`` is the total degree in ``(a + 1/a, b + 1/b)``.
    """
    bad = poly.violated_generator(tol)
    if bad is not None:
        raise NotInvariantError(bad)
    coords = {}
    for (i, j), c in poly.items():
        if i >= j >= 0:
            if poly.exact or abs(c) > (FLOAT_TOL if tol is None else tol):
                coords[(i, j)] = c
    degree = max((j + k for j, k in coords), default=0)
    return coords, degree


def trace_degree(poly, tol=None):
    return decompose_orbit_basis(poly, tol)[1]


def from_orbit_coordinates(coords, p=None, exact=True):
    out = LaurentPolynomial({}, p, exact)
    for (j, k), c in coords.items():
        out = out + orbit_sum(j, k, p, exact) * c
    return out
