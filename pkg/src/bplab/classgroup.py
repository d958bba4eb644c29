"""Class groups of imaginary quadratic fields via reduced binary forms.

A form ``(A, B, C)`` stands for ``A x^2 + B xy + C y^2`` of discriminant
``B^2 - 4AC = -d``.  Characters of the class group are stored as exponent
tables ``k`` meaning the value ``exp(2 pi i k / h)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

from sympy import Poly, cyclotomic_poly, factorint, gcdex, isprime, sieve
from sympy.ntheory import sqrt_mod

from .errors import InvalidArgument, InvalidDiscriminant


def is_squarefree(n):
    return n >= 1 and all(e == 1 for e in factorint(n).values())


def is_prime(n):
    return bool(isprime(n))


def primes_up_to(n):
    """All primes ``p <= n`` in increasing order."""
    return list(sieve.primerange(2, n + 1))


def is_fundamental(d):
    """True when ``-d`` is the discriminant of an imaginary quadratic field."""
    if d < 3:
        return False
    if d % 4 == 3:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (1, 2) and is_squarefree(m)
    return False


def fundamental_discriminants(limit):
    return [d for d in range(3, limit + 1) if is_fundamental(d)]


def unit_count(d):
    return {3: 6, 4: 4}.get(d, 2)


@dataclass(frozen=True, order=True)
class QuadraticFormClass:
    A: int
    B: int
    C: int

    @property
    def discriminant(self):
        return self.B * self.B - 4 * self.A * self.C

    def __call__(self, x, y):
        return self.A * x * x + self.B * x * y + self.C * y * y

    def as_tuple(self):
        return (self.A, self.B, self.C)


def reduce_form(A, B, C):
    """Reduced representative of a positive-definite form's SL(2,Z) class."""
    if A <= 0 or B * B - 4 * A * C >= 0:
        raise InvalidArgument("form is not positive definite")
    while True:
        # normalize B into (-A, A]
        if not (-A < B <= A):
            r = (A - B) // (2 * A)
            C = A * r * r + B * r + C
            B = B + 2 * A * r
        if A > C:
            A, B, C = C, -B, A
            continue
        if A == C and B < 0:
            B = -B
        return QuadraticFormClass(A, B, C)


def compose(f, g):
    """Dirichlet composition of two primitive forms of equal discriminant."""
    a1, b1, c1 = f.as_tuple()
    a2, b2, c2 = g.as_tuple()
    D = b1 * b1 - 4 * a1 * c1
    if b2 * b2 - 4 * a2 * c2 != D:
        raise InvalidArgument("forms have different discriminants")
    beta = (b1 + b2) // 2
    # e = gcd(a1, a2, beta) = u a1 + v a2 + w beta
    u1, v1, g1 = (int(x) for x in gcdex(a1, a2))
    u2, w, e = (int(x) for x in gcdex(g1, beta))
    u, v = u1 * u2, v1 * u2
    a3 = a1 * a2 // (e * e)
    B = (u * a1 * b2 + v * a2 * b1 + w * (b1 * b2 + D) // 2) // e
    B %= 2 * a3
    C = (B * B - D) // (4 * a3)
    return reduce_form(a3, B, C)


def inverse_form(f):
    return reduce_form(f.A, -f.B, f.C)


def reduced_forms(d):
    """All reduced primitive forms of discriminant ``-d`` (exhaustive scan)."""
    forms = []
    A = 1
    while 3 * A * A <= d:
        for B in range(-A + 1, A + 1):
            if (B * B + d) % (4 * A):
                continue
            C = (B * B + d) // (4 * A)
            if C < A:
                continue
            if A == C and B < 0:
                continue
            if math.gcd(math.gcd(A, B), C) != 1:
                continue
            forms.append(QuadraticFormClass(A, B, C))
        A += 1
    return forms


@dataclass(frozen=True)
class ClassGroup:
    d: int
    classes: tuple
    table: tuple
    identity: int
    w: int

    @property
    def h(self):
        return len(self.classes)

    def index(self, form):
        if isinstance(form, tuple):
            form = QuadraticFormClass(*form)
        try:
            return self.classes.index(form)
        except ValueError:
            raise InvalidArgument(f"{form} is not a reduced class of discriminant {-self.d}")

    def mul(self, i, j):
        return self.table[i][j]

    def inverse(self, i):
        return self.index(inverse_form(self.classes[i]))

    def power(self, i, n):
        out = self.identity
        for _ in range(n % self.h if self.h else 0):
            out = self.mul(out, i)
        return out

    def order(self, i):
        n, x = 1, i
        while x != self.identity:
            x = self.mul(x, i)
            n += 1
        return n

    def is_two_torsion(self, i):
        return self.mul(i, i) == self.identity


def enumerate_class_group(d):
    if not is_fundamental(d):
        raise InvalidDiscriminant(f"-{d} is not a fundamental discriminant")
    classes = tuple(sorted(reduced_forms(d), key=lambda f: (f.A, abs(f.B), -f.B)))
    pos = {f: i for i, f in enumerate(classes)}
    table = tuple(
        tuple(pos[compose(f, g)] for g in classes) for f in classes
    )
    principal = reduce_form(1, d % 2, (d % 2 + d) // 4)
    return ClassGroup(d, classes, table, pos[principal], unit_count(d))


@dataclass(frozen=True)
class ClassCharacter:
    """Character with values ``exp(2 pi i k / h)``; ``exponents[c] = k``."""

    group: ClassGroup
    exponents: tuple

    @property
    def h(self):
        return self.group.h

    def value(self, i):
        k = self.exponents[i] % self.h
        if k == 0:
            return 1 + 0j
        if 2 * k == self.h:
            return -1 + 0j
        if 4 * k == self.h:
            return 1j
        if 4 * k == 3 * self.h:
            return -1j
        return cmath.exp(2j * math.pi * k / self.h)

    def values(self):
        return [self.value(i) for i in range(self.h)]

    @property
    def is_trivial(self):
        return all(k % self.h == 0 for k in self.exponents)

    @property
    def is_real(self):
        return all((2 * k) % self.h == 0 for k in self.exponents)

    @property
    def d_lambda(self):
        return 1 if self.is_real else 2

    @property
    def order(self):
        n = 1
        for k in self.exponents:
            n = math.lcm(n, self.h // math.gcd(k % self.h, self.h))
        return n


def characters(G):
    """All ``h`` characters, the trivial one first.

    Built by extending along a chain of generators: if ``g`` has order ``n``
    modulo the subgroup generated so far, the value at ``g`` runs over the
    ``n`` solutions of ``n k = chi(g^n) (mod h)``.
    """
    h = G.h
    gens = []
    span = {G.identity}
    for i in range(h):
        if i not in span:
            gens.append(i)
            new = set(span)
            frontier = set(span)
            while frontier:
                frontier = {G.mul(x, i) for x in frontier} - new
                new |= frontier
            span = new
    partial = [{G.identity: 0}]
    for g in gens:
        extended = []
        for chi in partial:
            n, x = 1, g
            while x not in chi:
                x = G.mul(x, g)
                n += 1
            target = chi[x]
            for k in range(h):
                if (n * k - target) % h:
                    continue
                new = {}
                for base, v in chi.items():
                    y = base
                    for e in range(n):
                        new[y] = (v + e * k) % h
                        y = G.mul(y, g)
                extended.append(new)
        partial = extended
    out = [ClassCharacter(G, tuple(chi[i] for i in range(h))) for chi in partial]
    out.sort(key=lambda c: (not c.is_trivial, c.order, c.exponents))
    return out


def kronecker(a, n):
    """Kronecker symbol ``(a/n)`` for integers ``a`` and ``n >= 1``."""
    if n < 1:
        raise InvalidArgument("kronecker needs n >= 1")
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker_symbol(d, p):
    """Splitting of ``p`` in Q(sqrt(-d)): -1 inert, 0 ramified, +1 split."""
    if not is_prime(p):
        raise InvalidArgument(f"{p} is not prime")
    return kronecker(-d, p)


def prime_form(d, p):
    """Reduced class of ``(p, b, c)`` with smallest ``b`` in ``[0, 2p)``.

    Returns None when ``p`` is inert.
    """
    if p == 2:
        cands = range(4)
    else:
        roots = sqrt_mod(-d % p, p, all_roots=True) or []
        cands = sorted({r for r0 in roots for r in (r0, r0 + p)})
    for b in cands:
        if (b * b + d) % (4 * p) == 0:
            return reduce_form(p, b, (b * b + d) // (4 * p))
    return None


def lambda_p(G, chi, p):
    """Sum of the character over the prime ideals of norm ``p``."""
    eps = kronecker_symbol(G.d, p)
    if eps == -1:
        return 0j
    c = G.index(prime_form(G.d, p))
    if eps == 0:
        return chi.value(c)
    return chi.value(c) + chi.value(G.inverse(c))


def lambda_p_exact(G, chi, p):
    """``lambda_p`` as an int when it is integral, else a float."""
    lam = lambda_p(G, chi, p).real
    r = round(lam)
    return int(r) if abs(lam - r) < 1e-12 else lam


def aut_count(G, c):
    """Order of the GL(2,Z) automorphism group of a form in class ``c``."""
    if isinstance(c, QuadraticFormClass):
        c = G.index(c)
    elif not 0 <= c < G.h:
        raise InvalidArgument("class index out of range")
    return 2 * G.w if G.is_two_torsion(c) else G.w


def gl2_equivalent(G, c, c2):
    return c2 == c or c2 == G.inverse(c)


def autcsum_identity(G, chi):
    """Exact double sum over class pairs against ``2 h w / d_Lambda``.

    Character values are handled as exponents modulo ``h``, so the
    left-hand side is an exact element of Z[zeta_h]; it is returned as a
    Fraction after checking that every non-real part cancels.
    """
    h = G.h
    acc = [0] * h  # coefficient of zeta_h^k
    for c in range(h):
        for c2 in range(h):
            if gl2_equivalent(G, c, c2):
                k = (chi.exponents[c] - chi.exponents[c2]) % h
                acc[k] += aut_count(G, c)
    lhs = _cyclotomic_to_rational(acc, h)
    rhs = Fraction(2 * h * G.w, chi.d_lambda)
    return lhs, rhs


def cyclotomic_polynomial(n):
    """Integer coefficients (lowest degree first) of the n-th cyclotomic polynomial."""
    return [int(c) for c in reversed(Poly(cyclotomic_poly(n)).all_coeffs())]


def _poly_divmod(num, den):
    num = list(num)
    q = [0] * max(len(num) - len(den) + 1, 1)
    lead = den[-1]
    for i in range(len(num) - len(den), -1, -1):
        c = num[i + len(den) - 1] // lead
        q[i] = c
        for j, dj in enumerate(den):
            num[i + j] -= c * dj
    rem = num[: len(den) - 1] or [0]
    return q, rem


def _cyclotomic_to_rational(coeffs, h):
    """Exact value of ``sum coeffs[k] zeta_h^k`` when it is rational.

    The polynomial is reduced modulo the h-th cyclotomic polynomial; a
    rational value leaves only a constant remainder.
    """
    _, rem = _poly_divmod(list(coeffs), cyclotomic_polynomial(h))
    if any(rem[1:]):
        raise ArithmeticError("character sum is not rational")
    return Fraction(rem[0])


def class_number_formula_check(d, L1):
    """``|h - w sqrt(d) L(1, chi_d) / (2 pi)|``."""
    G = enumerate_class_group(d)
    return abs(G.h - G.w * math.sqrt(d) * L1 / (2 * math.pi))
