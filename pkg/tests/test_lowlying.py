import math

import numpy as np
import pytest
from scipy.special import digamma
from sympy import primerange

from bplab.errors import InvalidArgument
from bplab.lfun import resolve_character
from bplab.lowlying import (
    THEOREM_SUPPORT_LIMIT,
    fejer_test_function,
    fit_offset_decay,
    gamma_term_check,
    gamma_term_deviation,
    higher_power_tail,
    log_k2,
    prime_sum,
    prime_sum_M,
    prime_sum_N,
    sigma_integral,
    synthetic_family_density,
    zero_test_function,
)
from bplab.measures import integrate, plancherel_measure

PHI = fejer_test_function(0.25)
KS = (10**3, 10**4, 10**5, 10**6)


def direct_sum(k, alpha, scale, weight):
    # plain loop over sympy primes, no shared code with the package
    L = 2 * math.log(k)
    total = 0.0
    for p in primerange(2, int(math.exp(alpha * L / scale)) + 2):
        x = scale * math.log(p) / L
        total += weight(p) * math.log(p) / p * max(0.0, 1 - x / alpha)
    return 2 / L * total


def test_fejer_pair():
    assert float(PHI.phi(0.0)) == pytest.approx(0.25)
    assert float(PHI.phi_hat(0.0)) == 1.0
    assert float(PHI.phi_hat(0.125)) == pytest.approx(0.5)
    assert float(PHI.phi_hat(0.3)) == 0.0
    # sinc^2 zeros at multiples of 1/alpha
    assert abs(float(PHI.phi(4.0))) < 1e-17
    with pytest.raises(InvalidArgument):
        fejer_test_function(0)


def test_fejer_fourier_check():
    assert PHI.fourier_check([0.0, 0.125, 0.25, 0.3]) < 1e-6
    assert fejer_test_function(1.0).fourier_check(np.linspace(0, 1.2, 7)) < 1e-6


def test_sigma_integral():
    assert sigma_integral(PHI, "Sp") == pytest.approx(0.875)
    assert sigma_integral(PHI, "O") == pytest.approx(1.125)
    assert sigma_integral(zero_test_function(), "Sp") == 0
    with pytest.raises(InvalidArgument):
        sigma_integral(PHI, "U")


def test_support_limit():
    assert THEOREM_SUPPORT_LIMIT == pytest.approx(4 / 15)
    assert PHI.alpha < THEOREM_SUPPORT_LIMIT


def test_log_k2():
    assert log_k2(100) == pytest.approx(math.log(10**4))
    with pytest.raises(InvalidArgument):
        log_k2(9)


def test_tiny_alpha_gives_empty_sum():
    phi = fejer_test_function(1e-3)
    assert prime_sum(phi, 10**4) == (0.0, 0)
    G, chi = resolve_character(4, 0)
    assert prime_sum_M(phi, 10**4, G, chi).value == 0
    assert prime_sum_N(phi, 10**4).value == 0


def test_prime_sums_against_direct_loop():
    G, chi = resolve_character(4, 0)
    lam = lambda p: 1 if p == 2 else (2 if p % 4 == 1 else 0)
    for k in (10**3, 10**5):
        assert prime_sum_M(PHI, k, G, chi).value == pytest.approx(direct_sum(k, 0.25, 1, lam), rel=1e-12)
        assert prime_sum_N(PHI, k).value == pytest.approx(direct_sum(k, 0.25, 2, lambda p: 1), rel=1e-12)


def test_N_is_reindexed_half_support_sum():
    # phi_hat(2t) for support alpha is the Fejer transform with support alpha/2
    half = fejer_test_function(0.125)
    for k in KS:
        assert prime_sum_N(PHI, k).value == pytest.approx(prime_sum(half, k)[0], rel=1e-13)


@pytest.mark.parametrize("d", [4, 3])
def test_prime_sum_trends(d):
    G, chi = resolve_character(d, 0)
    M = [prime_sum_M(PHI, k, G, chi) for k in KS]
    N = [prime_sum_N(PHI, k) for k in KS]
    for seq in (M, N):
        devs = [s.deviation for s in seq]
        assert all(x > y for x, y in zip(devs, devs[1:]))
        assert devs[-1] < 0.15
    assert M[0].target == 0.25 and N[0].target == 0.125
    # frozen at k = 10^6
    assert N[-1].deviation == pytest.approx(0.0521575, abs=1e-6)
    assert N[-1].n_primes == 11


def test_prime_sum_M_frozen_values():
    G, chi = resolve_character(4, 0)
    m = prime_sum_M(PHI, 10**6, G, chi)
    assert m.value == pytest.approx(0.1547172, abs=1e-6)
    assert m.n_primes == 168


def test_higher_power_tail():
    tails = [higher_power_tail(PHI, k) for k in (100, 10**3, 10**4, 10**5)]
    assert all(x < y for x, y in zip(tails, tails[1:]))
    # this crude bound is about 0.134 at k = 10^4, well above 2% of the main terms
    assert tails[2] == pytest.approx(0.13367, abs=1e-4)


def test_gamma_term_offset():
    # psi(99) + psi(98) - 2 log 100 is about -4/k, not within 0.03
    dev = complex(gamma_term_deviation(100, 0.0))
    assert dev.imag == 0
    assert dev.real == pytest.approx(float(digamma(99) + digamma(98)) - 2 * math.log(100), abs=1e-14)
    assert dev.real == pytest.approx(-0.0404228, abs=1e-6)
    chk = gamma_term_check(100)
    assert chk.offset == pytest.approx(dev.real)
    assert chk.max_abs == pytest.approx(abs(dev.real), rel=1e-9)


def test_gamma_term_t_dependence_is_quadratic():
    chk = gamma_term_check(1000)
    # the t-dependent part is O(t^2 / k^2) with a moderate constant
    assert chk.curvature < 50
    t = 2.0
    for k in (100, 1000, 10000):
        d = gamma_term_deviation(k, t) - gamma_term_deviation(k, 0.0)
        assert abs(d) * k**2 / t**2 < 5


def test_gamma_offset_decays_like_inverse_k():
    slope, C = fit_offset_decay([100, 1000, 10**4, 10**5])
    assert slope == pytest.approx(-1.0, abs=0.01)
    assert C == pytest.approx(4.0, abs=0.1)


def test_gamma_term_rejects_small_k():
    with pytest.raises(InvalidArgument):
        gamma_term_check(5)


def test_synthetic_single_sample_deterministic():
    G, chi = resolve_character(4, 0)
    a = synthetic_family_density(10**4, G, chi, PHI, 100, 1, np.random.default_rng(4))
    b = synthetic_family_density(10**4, G, chi, PHI, 100, 1, np.random.default_rng(4))
    assert a.estimate == b.estimate
    assert math.isnan(a.stderr)


def test_synthetic_rejects_bad_cutoff():
    G, chi = resolve_character(4, 0)
    with pytest.raises(InvalidArgument):
        synthetic_family_density(10**4, G, chi, PHI, 1, 100, np.random.default_rng(0))


def test_synthetic_terms_match_prime_sums():
    # E[c_1] = lambda_p / sqrt(p) turns the m = 1 term into the M-sum
    G, chi = resolve_character(4, 0)
    k = 10**4
    sd = synthetic_family_density(k, G, chi, PHI, 10**3, 200, np.random.default_rng(1))
    assert not sd.truncated
    assert sd.mk_term == pytest.approx(prime_sum_M(PHI, k, G, chi).value, abs=1e-9)
    # the m = 2 term is the N-sum reweighted by -E[c_2] = 1 + O(1/p)

    def minus_e2(p):
        m = plancherel_measure(4, chi, p)
        return -integrate(lambda a, b: 2 * np.cos(2 * a) + 2 * np.cos(2 * b), m)[0].real

    assert sd.nk_term == pytest.approx(prime_sum(PHI, k, weights=minus_e2, scale=2)[0], abs=1e-9)
    assert sd.expected == pytest.approx(1 - sd.mk_term + sd.nk_term, abs=1e-12)


def test_synthetic_estimate_matches_expectation():
    G, chi = resolve_character(23, 1)
    sd = synthetic_family_density(10**4, G, chi, PHI, 10**3, 2000, np.random.default_rng(7))
    assert abs(sd.estimate - sd.expected) < 4 * sd.stderr
    assert sd.target_sp == pytest.approx(0.875)


def test_synthetic_truncation_flag():
    G, chi = resolve_character(4, 0)
    sd = synthetic_family_density(10**4, G, chi, PHI, 50, 100, np.random.default_rng(0))
    assert sd.truncated
    assert sd.n_primes == 15


def test_exact_model_moments():
    G, chi = resolve_character(4, 0)
    C = 0.0
    for p in primerange(5, 102):
        m = plancherel_measure(4, chi, p)
        e1 = integrate(lambda a, b: 2 * np.cos(a) + 2 * np.cos(b), m)[0].real
        e2 = integrate(lambda a, b: 2 * np.cos(2 * a) + 2 * np.cos(2 * b), m)[0].real
        assert abs(e1 - float(m.datum.lambda_p) / math.sqrt(p)) < 1e-9
        C = max(C, abs(e2 + 1) * p)
    assert C <= 3
