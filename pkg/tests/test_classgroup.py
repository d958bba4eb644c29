import cmath
import math
from fractions import Fraction

import pytest
from sympy import factorint
from sympy.functions.combinatorial.numbers import jacobi_symbol

from bplab.classgroup import (
    QuadraticFormClass,
    aut_count,
    autcsum_identity,
    characters,
    class_number_formula_check,
    compose,
    enumerate_class_group,
    fundamental_discriminants,
    is_fundamental,
    kronecker,
    kronecker_symbol,
    lambda_p,
    lambda_p_exact,
    prime_form,
    primes_up_to,
    reduce_form,
)
from bplab.errors import InvalidArgument, InvalidDiscriminant
from bplab.lfun import L1_digamma, dirichlet_L

DS = fundamental_discriminants(200)


def kronecker_oracle(a, n):
    # multiplicative in n, with the p = 2 rule written out separately
    out = 1
    m = n
    while m % 2 == 0:
        m //= 2
        out *= 0 if a % 2 == 0 else (1 if a % 8 in (1, 7) else -1)
    return out * (jacobi_symbol(a % m, m) if m > 1 else 1)


def class_number_oracle(d):
    # h = -(w / 2d) sum_{a=1}^{d} a chi_d(a)
    w = {3: 6, 4: 4}.get(d, 2)
    s = sum(a * kronecker_oracle(-d, a) for a in range(1, d + 1))
    return Fraction(-w * s, 2 * d)


def test_fundamental_discriminants():
    assert DS[:10] == [3, 4, 7, 8, 11, 15, 19, 20, 23, 24]
    assert not is_fundamental(12)
    assert not is_fundamental(16)
    assert not is_fundamental(5)

    def squarefree(n):
        return all(e == 1 for e in factorint(n).values())

    expect = [
        d for d in range(3, 201)
        if (d % 4 == 3 and squarefree(d)) or (d % 4 == 0 and (d // 4) % 4 in (1, 2) and squarefree(d // 4))
    ]
    assert DS == expect
    assert len(DS) == 62


def test_non_fundamental_rejected():
    with pytest.raises(InvalidDiscriminant):
        enumerate_class_group(12)


def test_examples():
    G = enumerate_class_group(4)
    assert [f.as_tuple() for f in G.classes] == [(1, 0, 1)] and G.w == 4
    G = enumerate_class_group(23)
    assert {f.as_tuple() for f in G.classes} == {(1, 1, 6), (2, 1, 3), (2, -1, 3)}
    assert G.h == 3 and G.w == 2
    G = enumerate_class_group(3)
    assert [f.as_tuple() for f in G.classes] == [(1, 1, 1)] and G.w == 6


def test_class_numbers_against_analytic_oracle():
    for d in DS:
        assert enumerate_class_group(d).h == class_number_oracle(d), d


def test_forms_are_reduced_primitive():
    for d in DS:
        for f in enumerate_class_group(d).classes:
            assert f.discriminant == -d
            assert abs(f.B) <= f.A <= f.C
            assert math.gcd(math.gcd(f.A, f.B), f.C) == 1
            assert reduce_form(*f.as_tuple()) == f


def test_reduce_form_examples():
    assert reduce_form(6, 1, 1).as_tuple() == (1, 1, 6)
    assert reduce_form(3, 2, 2).as_tuple() == (2, 2, 3)
    assert reduce_form(2, -2, 3).as_tuple() == (2, 2, 3)
    with pytest.raises(InvalidArgument):
        reduce_form(1, 3, 1)


def test_group_laws_exhaustive():
    for d in DS:
        G = enumerate_class_group(d)
        r = range(G.h)
        for i in r:
            assert G.mul(i, G.identity) == i
            assert G.mul(i, G.inverse(i)) == G.identity
            f = G.classes[i]
            assert G.classes[G.inverse(i)] == reduce_form(f.A, -f.B, f.C)
            for j in r:
                assert G.mul(i, j) == G.mul(j, i)
                for k in r:
                    assert G.mul(G.mul(i, j), k) == G.mul(i, G.mul(j, k))


def test_composition_examples():
    # the two order-3 classes of discriminant -23 are mutually inverse
    G = enumerate_class_group(23)
    f, g = G.classes[1], G.classes[2]
    h = compose(f, g)
    assert h == G.classes[G.identity]
    assert compose(f, f) == G.classes[2]


def test_characters_examples():
    (chi,) = characters(enumerate_class_group(4))
    assert chi.is_trivial and chi.d_lambda == 1
    chars = characters(enumerate_class_group(23))
    assert len(chars) == 3
    assert chars[0].is_trivial
    for chi in chars[1:]:
        assert chi.d_lambda == 2
        for v in chi.values():
            assert abs(v**3 - 1) < 1e-12


def test_characters_multiplicative_and_orthogonal():
    for d in DS:
        G = enumerate_class_group(d)
        chars = characters(G)
        assert len(chars) == G.h
        assert chars[0].is_trivial and chars[0].d_lambda == 1
        for chi in chars:
            assert chi.value(G.identity) == 1
            assert chi.d_lambda == (1 if chi.order <= 2 else 2)
            for i in range(G.h):
                for j in range(G.h):
                    assert abs(chi.value(G.mul(i, j)) - chi.value(i) * chi.value(j)) < 1e-12
        for x in chars:
            for y in chars:
                s = sum(x.value(c) * y.value(c).conjugate() for c in range(G.h))
                assert abs(s - (G.h if x is y else 0)) < 1e-9


def test_kronecker_examples():
    assert kronecker_symbol(4, 3) == -1
    assert kronecker_symbol(4, 5) == 1
    assert kronecker_symbol(4, 2) == 0
    with pytest.raises(InvalidArgument):
        kronecker_symbol(4, 9)
    with pytest.raises(InvalidArgument):
        kronecker(3, 0)


def test_kronecker_against_sympy():
    for a in range(-60, 61):
        for n in range(1, 80):
            assert kronecker(a, n) == kronecker_oracle(a, n), (a, n)


def test_prime_form_brute_force():
    for d in DS[:30]:
        for p in primes_up_to(150):
            b = next((b for b in range(2 * p) if (b * b + d) % (4 * p) == 0), None)
            expect = None if b is None else reduce_form(p, b, (b * b + d) // (4 * p))
            assert prime_form(d, p) == expect, (d, p)
            assert (expect is None) == (kronecker_symbol(d, p) == -1)


def test_lambda_examples():
    G = enumerate_class_group(4)
    (chi,) = characters(G)
    assert lambda_p(G, chi, 5) == 2
    assert lambda_p(G, chi, 3) == 0
    assert lambda_p(G, chi, 2) == 1


def test_lambda_trivial_character():
    for d in DS:
        G = enumerate_class_group(d)
        chi = characters(G)[0]
        for p in primes_up_to(100):
            eps = kronecker_symbol(d, p)
            expect = 1 if eps == 0 else 1 + eps
            assert lambda_p(G, chi, p) == expect


def test_lambda_real_and_bounded():
    for d in (23, 47, 56, 71, 104):
        G = enumerate_class_group(d)
        for chi in characters(G):
            for p in primes_up_to(60):
                lam = lambda_p(G, chi, p)
                assert abs(lam.imag) < 1e-12 and abs(lam) <= 2 + 1e-12
                if kronecker_symbol(d, p) == -1:
                    assert lam == 0


def test_lambda_order_three_value():
    G = enumerate_class_group(23)
    chi = characters(G)[1]
    # 2 splits as a product of the two order-3 classes: lambda_2 = 2 cos(2 pi / 3)
    assert lambda_p(G, chi, 2) == pytest.approx(-1.0, abs=1e-14)
    assert lambda_p_exact(G, chi, 2) == -1
    assert isinstance(lambda_p_exact(G, chi, 2), int)


def test_aut_count_examples():
    G = enumerate_class_group(4)
    assert aut_count(G, G.identity) == 8
    G = enumerate_class_group(23)
    assert aut_count(G, QuadraticFormClass(2, 1, 3)) == 2
    assert aut_count(G, G.identity) == 4
    with pytest.raises(InvalidArgument):
        aut_count(G, 7)


def test_autcsum_examples():
    G = enumerate_class_group(4)
    assert autcsum_identity(G, characters(G)[0]) == (8, 8)
    G = enumerate_class_group(23)
    chars = characters(G)
    assert autcsum_identity(G, chars[0]) == (12, 12)
    assert autcsum_identity(G, chars[1]) == (6, 6)


def test_autcsum_brute_force_complex():
    # direct complex evaluation of the double sum agrees with the exact one
    G = enumerate_class_group(71)
    for chi in characters(G):
        s = 0
        for c in range(G.h):
            for c2 in (c, G.inverse(c)) if G.inverse(c) != c else (c,):
                s += chi.value(c) * chi.value(c2).conjugate() * aut_count(G, c)
        lhs, rhs = autcsum_identity(G, chi)
        assert abs(s - float(lhs)) < 1e-9
        assert lhs == rhs


def test_autcsum_all():
    for d in DS:
        G = enumerate_class_group(d)
        for chi in characters(G):
            lhs, rhs = autcsum_identity(G, chi)
            assert lhs == rhs == Fraction(2 * G.h * G.w, chi.d_lambda)


@pytest.mark.parametrize("d", [4, 3, 23])
def test_class_number_formula(d):
    assert class_number_formula_check(d, dirichlet_L(d, 1).value.real) < 1e-6
    assert class_number_formula_check(d, L1_digamma(d)) < 1e-12


def test_leibniz_value():
    assert dirichlet_L(4, 1).value == pytest.approx(math.pi / 4, abs=1e-6)


def test_character_value_is_root_of_unity():
    G = enumerate_class_group(4 * 14)
    for chi in characters(G):
        for i in range(G.h):
            assert abs(chi.value(i) - cmath.exp(2j * math.pi * chi.exponents[i] / G.h)) < 1e-15
