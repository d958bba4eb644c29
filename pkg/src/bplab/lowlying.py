"""Explicit-formula pieces of the one-level density of low-lying zeros.

Everything depends on ``k`` only through ``L = log(k^2)``.  The synthetic
family replaces Siegel eigenforms by independent draws ``x_p ~ mu_p``; it
models the limiting statement, not any finite-weight family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import digamma

from .classgroup import kronecker_symbol, lambda_p_exact, primes_up_to
from .errors import InvalidArgument
from .measures import integrate, plancherel_from_datum, sample
from .sugano import LocalBesselDatum

THEOREM_SUPPORT_LIMIT = 4 / 15
SYMMETRY_TYPES = ("Sp", "O")


@dataclass(frozen=True)
class TestFunction:
    """Even test function with Fourier transform supported in ``[-alpha, alpha]``.

    ``phi_hat(t) = int phi(x) e^{-2 pi i x t} dx``.
    """

    __test__ = False  # keep pytest from collecting this class

    alpha: float
    phi: Callable
    phi_hat: Callable
    tag: str = "custom"

    def fourier_check(self, ts, span=2000, order=16):
        """Max ``|numerical FT of phi - phi_hat|`` over ``ts``.

        Composite Gauss-Legendre for the cosine transform on ``[0, X]`` and
        ``[0, 2X]`` with ``X = span / alpha``, extrapolated in ``1/X`` to
        remove the ``x^-2`` tail (non-oscillating at ``t = 0`` and ``t = alpha``).
        """
        X = span / self.alpha
        worst = 0.0
        gx, gw = np.polynomial.legendre.leggauss(order)
        for t in ts:
            t = abs(float(t))
            width = 0.25 / max(self.alpha, t)
            part = []
            for x_end in (X, 2 * X):
                edges = np.linspace(0.0, x_end, int(math.ceil(x_end / width)) + 1)
                half = 0.5 * np.diff(edges)[:, None]
                nodes = edges[:-1, None] + half * (gx + 1)
                vals = self.phi(nodes) * np.cos(2 * math.pi * t * nodes)
                part.append(float(np.sum(half * gw * vals)))
            val = 2 * part[1] - part[0]
            worst = max(worst, abs(2 * val - float(self.phi_hat(t))))
        return worst


def fejer_test_function(alpha):
    if not alpha > 0:
        raise InvalidArgument("alpha must be positive")

    def phi(x):
        return alpha * np.sinc(alpha * np.asarray(x, dtype=float)) ** 2

    def phi_hat(t):
        return np.maximum(0.0, 1.0 - np.abs(np.asarray(t, dtype=float)) / alpha)

    return TestFunction(float(alpha), phi, phi_hat, "fejer")


def zero_test_function(alpha=1.0):
    def zero(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return TestFunction(float(alpha), zero, zero, "zero")


def sigma_integral(phi, symmetry):
    """``phi_hat(0) -+ phi(0)/2`` for ``Sp`` / ``O``."""
    if symmetry not in SYMMETRY_TYPES:
        raise InvalidArgument(f"symmetry must be one of {SYMMETRY_TYPES}")
    half = float(phi.phi(0.0)) / 2
    base = float(phi.phi_hat(0.0))
    return base - half if symmetry == "Sp" else base + half


# ---------------------------------------------------------------------------
# prime sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrimeSum:
    value: float
    target: float
    n_primes: int

    @property
    def deviation(self):
        return abs(self.value - self.target)


def log_k2(k):
    if k < 10:
        raise InvalidArgument("k must be at least 10")
    return 2 * math.log(k)


def _support_primes(phi, L, scale):
    # phi_hat(scale * log p / L) vanishes once scale * log p / L >= alpha
    return primes_up_to(int(math.exp(phi.alpha * L / scale)))


def prime_sum(phi, k, weights=None, scale=1):
    """``(2/L) sum_p w_p (log p / p) phi_hat(scale log p / L)``.

    ``weights`` maps a prime to ``w_p`` (default 1).
    """
    L = log_k2(k)
    primes = _support_primes(phi, L, scale)
    if not primes:
        return 0.0, 0
    p = np.array(primes, dtype=float)
    w = np.ones_like(p) if weights is None else np.array([weights(q) for q in primes], float)
    lp = np.log(p)
    return float(2 / L * np.sum(w * lp / p * phi.phi_hat(scale * lp / L))), len(primes)


def prime_sum_M(phi, k, G, chi):
    """The ``lambda_p``-weighted sum, whose limit is ``phi(0)``."""
    val, n = prime_sum(phi, k, weights=lambda q: float(lambda_p_exact(G, chi, q)))
    return PrimeSum(val, float(phi.phi(0.0)), n)


def prime_sum_N(phi, k):
    """The squared-prime sum, whose limit is ``phi(0)/2``."""
    val, n = prime_sum(phi, k, scale=2)
    return PrimeSum(val, float(phi.phi(0.0)) / 2, n)


def higher_power_tail(phi, k, m_max=60):
    """Crude bound ``(2/L) sum_{m>=3,p} (log p) p^{-m/2} 4 |phi_hat(m log p / L)|``."""
    L = log_k2(k)
    total = 0.0
    for m in range(3, m_max + 1):
        for p in _support_primes(phi, L, m):
            lp = math.log(p)
            total += lp * p ** (-m / 2) * 4 * abs(float(phi.phi_hat(m * lp / L)))
    return 2 / L * total


@dataclass(frozen=True)
class GammaTermCheck:
    """Deviation of ``psi(k-1+it) + psi(k-2-it)`` from ``2 log k``.

    ``max_scaled`` is ``max |dev(t)| k^2 / t^2`` over nonzero grid points;
    ``offset`` is ``dev(0)`` (real, about ``-4/k``) and ``curvature`` is
    ``max |dev(t) - dev(0)| k^2 / t^2``.
    """

    k: float
    offset: float
    max_scaled: float
    curvature: float
    max_abs: float


def gamma_term_deviation(k, t):
    t = np.asarray(t, dtype=float)
    return digamma(k - 1 + 1j * t) + digamma(k - 2 - 1j * t) - 2 * math.log(k)


def gamma_term_check(k, t_grid=None):
    if k < 10:
        raise InvalidArgument("k must be at least 10")
    if t_grid is None:
        t_grid = np.linspace(0.0, math.sqrt(k), 201)
    t = np.asarray(t_grid, dtype=float)
    t = t[np.abs(t) <= math.sqrt(k)]
    dev = gamma_term_deviation(k, t)
    off = complex(gamma_term_deviation(k, 0.0))
    nz = t != 0
    scaled = np.abs(dev[nz]) * k**2 / t[nz] ** 2
    curv = np.abs(dev[nz] - off) * k**2 / t[nz] ** 2
    return GammaTermCheck(
        k,
        off.real,
        float(np.max(scaled)) if scaled.size else 0.0,
        float(np.max(curv)) if curv.size else 0.0,
        float(np.max(np.abs(dev))),
    )


def fit_offset_decay(ks):
    """Least-squares slope of ``log |dev(0)|`` against ``log k`` (about -1)."""
    x = np.log(np.asarray(ks, dtype=float))
    y = np.log([abs(gamma_term_check(k, [0.0]).offset) for k in ks])
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(math.exp(intercept))


# ---------------------------------------------------------------------------
# synthetic family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticDensity:
    """Monte Carlo one-level density with its exact model expectation.

    ``expected`` integrates ``c_1`` and ``c_2`` against each ``mu_p`` by
    quadrature; ``truncated`` is set when the cutoff is below the support.
    """

    estimate: float
    stderr: float
    expected: float
    target_sp: float
    target_o: float
    mk_term: float
    nk_term: float
    truncated: bool
    n_primes: int


def _c1(t1, t2):
    return 2 * np.cos(t1) + 2 * np.cos(t2)


def _c2(t1, t2):
    return 2 * np.cos(2 * t1) + 2 * np.cos(2 * t2)


def synthetic_family_density(k, G, chi, phi, prime_cutoff, n_samples, rng):
    if prime_cutoff < 2:
        raise InvalidArgument("prime cutoff must be at least 2")
    if n_samples < 1:
        raise InvalidArgument("n_samples must be positive")
    L = log_k2(k)
    support = math.exp(phi.alpha * L)
    # primes beyond the support of phi_hat contribute nothing, so are not drawn
    primes = [p for p in primes_up_to(prime_cutoff) if p < support]
    D = np.full(n_samples, float(phi.phi_hat(0.0)))
    expected = float(phi.phi_hat(0.0))
    mk = nk = 0.0
    for p in primes:
        lp = math.log(p)
        w1 = lp * p**-0.5 * float(phi.phi_hat(lp / L))
        w2 = lp / p * float(phi.phi_hat(2 * lp / L))
        datum = LocalBesselDatum(p, kronecker_symbol(G.d, p), lambda_p_exact(G, chi, p))
        m = plancherel_from_datum(datum)
        pts = sample(m, rng, n_samples)
        t1, t2 = pts[:, 0], pts[:, 1]
        D -= 2 / L * (w1 * _c1(t1, t2) + w2 * _c2(t1, t2))
        e1 = integrate(_c1, m)[0].real
        e2 = integrate(_c2, m)[0].real
        expected -= 2 / L * (w1 * e1 + w2 * e2)
        mk += 2 / L * w1 * e1
        nk -= 2 / L * w2 * e2
    stderr = float(np.std(D, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else math.nan
    return SyntheticDensity(
        float(np.mean(D)),
        stderr,
        expected,
        sigma_integral(phi, "Sp"),
        sigma_integral(phi, "O"),
        mk,
        nk,
        support > prime_cutoff,
        len(primes),
    )
