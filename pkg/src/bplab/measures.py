"""Haar and Plancherel measures on tempered Satake parameters.

Points are angle pairs ``(theta1, theta2)`` in ``[0, pi]^2`` standing for
``(a, b) = (e^{i theta1}, e^{i theta2})``; the canonical representative has
``theta1 <= theta2``.  Every measure is a shape function on the square,
symmetric in the two angles, normalized numerically over the ordered
region ``theta1 <= theta2``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceFailure,
    DegenerateMeasure,
    EnvelopeError,
    InvalidArgument,
)
from .sugano import LocalBesselDatum, expand_U
from .wpoly import LaurentPolynomial

LADDER = (32, 64, 128, 256)
PRINTED_HAAR_CONSTANT = 4 / math.pi**2
ENVELOPE_GRID = 512
ENVELOPE_HEADROOM = 1.10


@dataclass(frozen=True)
class SpectralPoint:
    theta1: float
    theta2: float

    def __post_init__(self):
        for t in (self.theta1, self.theta2):
            if not 0.0 <= t <= math.pi:
                raise InvalidArgument("angles must lie in [0, pi]")

    def canonical(self):
        if self.theta1 <= self.theta2:
            return self
        return SpectralPoint(self.theta2, self.theta1)

    @property
    def a(self):
        return complex(math.cos(self.theta1), math.sin(self.theta1))

    @property
    def b(self):
        return complex(math.cos(self.theta2), math.sin(self.theta2))


def canonicalize(points):
    """Sort each row of an ``(n, 2)`` angle array so that theta1 <= theta2."""
    return np.sort(np.asarray(points, dtype=float), axis=-1)


def _check_domain(t1, t2):
    if np.any(t1 < 0) or np.any(t1 > math.pi) or np.any(t2 < 0) or np.any(t2 > math.pi):
        raise InvalidArgument("angles must lie in [0, pi]")


def haar_density(theta1, theta2):
    """Unnormalized Weyl density ``(cos t1 - cos t2)^2 sin^2 t1 sin^2 t2``."""
    t1 = np.asarray(theta1, dtype=float)
    t2 = np.asarray(theta2, dtype=float)
    _check_domain(t1, t2)
    out = (np.cos(t1) - np.cos(t2)) ** 2 * np.sin(t1) ** 2 * np.sin(t2) ** 2
    return float(out) if out.ndim == 0 else out


def _delta_factor(datum, c):
    p = datum.p
    lam = float(datum.lambda_p)
    if datum.epsilon == -1:
        return (1 + 1 / p) ** 2 - 4 * c * c / p
    if datum.epsilon == 1:
        rp = math.sqrt(p)
        return (1 - 1 / p) ** 2 + (2 * c * rp - lam) * (2 * c / rp - lam) / p
    return 1 - 2 * lam * c / math.sqrt(p) + 1 / p


def delta_p(datum, theta1, theta2):
    """The density ``Delta_p``: a product of one factor per angle."""
    t1 = np.asarray(theta1, dtype=float)
    t2 = np.asarray(theta2, dtype=float)
    _check_domain(t1, t2)
    out = _delta_factor(datum, np.cos(t1)) * _delta_factor(datum, np.cos(t2))
    return float(out) if out.ndim == 0 else out


@functools.lru_cache(maxsize=None)
def gauss_legendre(n, lo=0.0, hi=math.pi):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss-Legendre ladder on the full square ``[0, pi]^2``.

    Integration starts at ``ladder[0]`` nodes per axis and doubles until two
    consecutive rungs agree within ``tol``; the error estimate is
    ``|I_{2N} - I_N|``.
    """

    ladder: tuple = LADDER
    tol: float = 1e-12

    def nodes(self, n):
        return gauss_legendre(n)


DEFAULT_RULE = QuadratureRule()


class SpectralMeasure:
    """Probability measure on the ordered region ``theta1 <= theta2``.

    ``shape(t1, t2)`` is the unnormalized symmetric density on the square;
    ``printed_shape`` (when available) uses the literal published constants,
    so its mass over the ordered region is a diagnostic of those constants.
    """

    def __init__(self, kind, shape, params=None, printed_shape=None, rule=DEFAULT_RULE):
        self.kind = kind
        self.shape = shape
        self.params = dict(params or {})
        self.printed_shape = printed_shape
        self.rule = rule
        self._weights = {}
        self._envelope = None
        Z, err = self._ladder(lambda w, t1, t2: float(np.sum(w)))
        if not Z > 0:
            raise DegenerateMeasure(f"{kind} measure has non-positive mass")
        self.Z_square = Z
        self.Z = Z / 2  # mass of the ordered region
        self.Z_error = err / 2

    # -- quadrature plumbing ---------------------------------------------
    def weights(self, n):
        """Tensor weights ``w_i w_j shape(t_i, t_j)`` on the n-point grid."""
        hit = self._weights.get(n)
        if hit is None:
            t, w = gauss_legendre(n)
            T1, T2 = np.meshgrid(t, t, indexing="ij")
            dens = self.shape(T1, T2)
            if np.any(dens < -1e-300):
                raise DegenerateMeasure(f"{self.kind} density is negative somewhere")
            hit = np.outer(w, w) * dens
            self._weights[n] = hit
        return hit

    def _ladder(self, fn, tol=None):
        tol = self.rule.tol if tol is None else tol
        prev = None
        err = math.inf
        for n in self.rule.ladder:
            t, _ = gauss_legendre(n)
            val = fn(self.weights(n), t, t)
            if prev is not None:
                err = abs(val - prev)
                if err <= tol * max(1.0, abs(val)):
                    return val, err
            prev = val
        return prev, err

    def density(self, theta1, theta2):
        """Normalized density w.r.t. ``d theta1 d theta2`` on the ordered region."""
        return self.shape(np.asarray(theta1, float), np.asarray(theta2, float)) / self.Z

    def printed_mass(self):
        """Mass of the ordered region under the literally printed constants."""
        if self.printed_shape is None:
            return None
        val, _ = _plain_integral(self.printed_shape, self.rule)
        return val / 2

    # -- sampling support -------------------------------------------------
    def envelope(self):
        """Grid-scan sup of the shape plus headroom (cached)."""
        if self._envelope is None:
            t = np.linspace(0.0, math.pi, ENVELOPE_GRID)
            T1, T2 = np.meshgrid(t, t, indexing="ij")
            self._envelope = float(np.max(self.shape(T1, T2))) * ENVELOPE_HEADROOM
        return self._envelope

    def recompute_envelope(self, factor=1.5):
        self._envelope = self.envelope() * factor
        return self._envelope


def _plain_integral(fn, rule):
    prev = None
    err = math.inf
    for n in rule.ladder:
        t, w = gauss_legendre(n)
        T1, T2 = np.meshgrid(t, t, indexing="ij")
        val = float(np.sum(np.outer(w, w) * fn(T1, T2)))
        if prev is not None:
            err = abs(val - prev)
            if err <= rule.tol * max(1.0, abs(val)):
                return val, err
        prev = val
    return prev, err


def haar_measure(rule=DEFAULT_RULE):
    return SpectralMeasure(
        "haar",
        haar_density,
        printed_shape=lambda t1, t2: PRINTED_HAAR_CONSTANT * haar_density(t1, t2),
        rule=rule,
    )


def plancherel_from_datum(datum, rule=DEFAULT_RULE, params=None):
    """Plancherel measure for one local datum: ``haar / Delta_p``, normalized."""
    t = np.linspace(0.0, math.pi, 257)
    fac = _delta_factor(datum, np.cos(t))
    if np.min(fac) <= 0:
        raise DegenerateMeasure("Delta_p vanishes on the tempered set")

    def shape(t1, t2):
        return haar_density(t1, t2) / delta_p(datum, t1, t2)

    prefactor = 1 - datum.epsilon / datum.p

    def printed(t1, t2):
        return prefactor * PRINTED_HAAR_CONSTANT * shape(t1, t2)

    info = {"p": datum.p, "epsilon": datum.epsilon, "lambda_p": datum.lambda_p}
    info.update(params or {})
    m = SpectralMeasure("plancherel", shape, info, printed, rule)
    m.datum = datum
    return m


def local_datum(d, chi, p):
    """``LocalBesselDatum`` for the class-group character ``chi`` at ``p``."""
    from .classgroup import kronecker_symbol, lambda_p_exact

    return LocalBesselDatum(p, kronecker_symbol(d, p), lambda_p_exact(chi.group, chi, p))


@functools.lru_cache(maxsize=256)
def _plancherel_cached(datum, rule):
    return plancherel_from_datum(datum, rule)


def plancherel_measure(d, chi, p, rule=DEFAULT_RULE):
    datum = local_datum(d, chi, p)
    m = _plancherel_cached(datum, rule)
    m.params.setdefault("d", d)
    return m


def printed_constant_diagnostics(m):
    """How far the literal published constants are from a probability measure.

    ``printed_mass`` is the ordered-region mass with the constants as printed;
    for Plancherel measures ``prefactor_consistency`` compares it with the
    printed Haar mass, i.e. tests whether ``(1 - eps/p)`` alone normalizes
    ``haar / Delta_p``.
    """
    out = {"printed_mass": m.printed_mass(), "Z": m.Z}
    if m.kind == "plancherel":
        haar = haar_measure(m.rule)
        ratio = m.printed_mass() / haar.printed_mass()
        out["haar_printed_mass"] = haar.printed_mass()
        out["prefactor_consistency"] = abs(ratio - 1)
    return out


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def _poly_on_grid(poly, t):
    """Values of a Laurent polynomial on the tensor grid ``t x t``."""
    return poly.evaluate_tensor(t, t)


def _values(f, t):
    if isinstance(f, LaurentPolynomial):
        return _poly_on_grid(f, t)
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    v = np.asarray(f(T1, T2))
    vt = np.asarray(f(T2, T1))
    return 0.5 * (v + vt)


def integrate(f, m, rule=None, tol=None):
    """``(integral of f dm, error estimate)`` by the refinement ladder.

    ``f`` is a :class:`LaurentPolynomial` or a vectorized callable of
    ``(theta1, theta2)``; callables are symmetrized in the two angles.
    Raises :class:`ConvergenceFailure` (carrying the value) when the error
    estimate exceeds ``tol``.
    """
    if rule is not None and rule is not m.rule:
        m = SpectralMeasure(m.kind, m.shape, m.params, m.printed_shape, rule)
    prev = None
    err = math.inf
    val = None
    goal = m.rule.tol if tol is None else tol
    for n in m.rule.ladder:
        t, _ = gauss_legendre(n)
        W = m.weights(n)
        val = complex(np.sum(W * _values(f, t))) / m.Z_square
        if prev is not None:
            err = abs(val - prev)
            if err <= goal:
                break
        prev = val
    if tol is not None and err > tol:
        raise ConvergenceFailure(
            f"quadrature error estimate {err:.3g} exceeds {tol:.3g}", val, err
        )
    return val, err


def integrate_U(datum, l, m_idx, measure=None, rule=None):
    measure = measure or plancherel_from_datum(datum)
    return integrate(expand_U(datum, l, m_idx), measure, rule)


def delta_relation_table(datum, max_degree, measure=None, tol=1e-8):
    """Rows ``(l, m, integral, target, deviation, passed)`` for l + 2m <= max_degree."""
    from .sugano import u_index_order

    measure = measure or plancherel_from_datum(datum)
    rows = []
    for l, m_idx in u_index_order(max_degree):
        val, err = integrate(expand_U(datum, l, m_idx), measure)
        target = 1.0 if l == m_idx == 0 else 0.0
        dev = abs(val - target)
        rows.append(
            {
                "l": l,
                "m": m_idx,
                "integral": val.real,
                "imag": val.imag,
                "quad_error": err,
                "target": target,
                "deviation": dev,
                "passed": dev < tol,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def sample(m, rng, n, batch=None):
    """``n`` i.i.d. canonical points from ``m`` as an ``(n, 2)`` angle array.

    Rejection from the uniform law on the square against the grid-certified
    envelope; :class:`EnvelopeError` if a proposal exceeds the envelope.
    """
    if n < 1:
        raise InvalidArgument("sample size must be at least 1")
    env = m.envelope()
    out = []
    have = 0
    batch = batch or max(1024, 4 * n)
    while have < n:
        prop = rng.uniform(0.0, math.pi, size=(batch, 2))
        dens = m.shape(prop[:, 0], prop[:, 1])
        if np.any(dens > env):
            raise EnvelopeError(
                f"density {float(np.max(dens)):.6g} above envelope {env:.6g}"
            )
        keep = prop[rng.uniform(0.0, env, size=batch) < dens]
        out.append(keep)
        have += len(keep)
    return canonicalize(np.concatenate(out)[:n])


def sample_points(m, rng, n):
    """Like :func:`sample` but returns :class:`SpectralPoint` objects."""
    return [SpectralPoint(float(a), float(b)) for a, b in sample(m, rng, n)]
