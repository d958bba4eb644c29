"""Eigenangle ensembles of USp(2n) and SO(2n) sampled from the Weyl densities.

A sample is ``n`` angles in ``[0, pi]``; the full spectrum is
``{e^{+i theta_j}, e^{-i theta_j}}``.  One-level statistics use the matrix
size ``N = 2n``: ``sum over all 2n eigenangles of phi(N theta / (2 pi))``.
"""

from __future__ import annotations

import functools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize

from .errors import EnvelopeError, InvalidArgument, InvalidCombination
from .lowlying import sigma_integral

USP = "USp"
SO_EVEN = "SOeven"
ENSEMBLES = (USP, SO_EVEN)
MAX_N = 6
HEADROOM = 1.10


def _check(ensemble, n):
    if ensemble not in ENSEMBLES:
        raise InvalidArgument(f"ensemble must be one of {ENSEMBLES}")
    if not 1 <= n <= MAX_N:
        raise InvalidArgument(f"n must lie in 1..{MAX_N}")


def weyl_density(ensemble, theta):
    """Unnormalized Weyl density at each row of ``theta`` (shape ``(..., n)``)."""
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)
    n = theta.shape[-1]
    out = np.ones(theta.shape[:-1])
    for i in range(n):
        for j in range(i + 1, n):
            out = out * (c[..., i] - c[..., j]) ** 2
    if ensemble == USP:
        out = out * np.prod(np.sin(theta) ** 2, axis=-1)
    return out


@functools.lru_cache(maxsize=None)
def density_sup(ensemble, n, starts=24):
    """Sup of the Weyl density: multistart L-BFGS-B on the log density.

    Two equispaced configurations seed the search (random starts alone
    miss the maximum for n >= 5).
    """
    _check(ensemble, n)
    if ensemble == SO_EVEN and n == 1:
        return 1.0
    rng = np.random.default_rng(12345)

    def neg_log(th):
        # a floor rather than a huge penalty keeps finite-difference gradients usable
        return -math.log(max(float(weyl_density(ensemble, th)), 1e-300))

    seeds = [
        math.pi * (np.arange(n) + 1) / (n + 1),
        math.pi * (np.arange(n) + 0.5) / n,
    ]
    seeds += [np.sort(rng.uniform(0.1, math.pi - 0.1, size=n)) for _ in range(starts)]
    best = 0.0
    for x0 in seeds:
        res = minimize(neg_log, x0, method="L-BFGS-B", bounds=[(0.0, math.pi)] * n)
        best = max(best, float(weyl_density(ensemble, res.x)))
    return best


@dataclass(frozen=True)
class EigenangleBatch:
    """``count`` samples as an array ``angles`` of shape ``(count, n)``, rows sorted."""

    ensemble: str
    n: int
    angles: np.ndarray

    def __len__(self):
        return len(self.angles)


def sample_weyl(ensemble, n, rng, count, batch=None):
    """I.i.d. eigenangle samples by rejection from the uniform law on ``[0, pi]^n``."""
    _check(ensemble, n)
    if count < 1:
        raise InvalidArgument("count must be positive")
    env = density_sup(ensemble, n) * HEADROOM
    batch = batch or max(4096, min(2 * count, 1 << 20))
    out = []
    have = 0
    while have < count:
        prop = rng.uniform(0.0, math.pi, size=(batch, n))
        dens = weyl_density(ensemble, prop)
        if np.any(dens > env):
            raise EnvelopeError(f"Weyl density {float(dens.max()):.6g} above envelope {env:.6g}")
        keep = prop[rng.uniform(0.0, env, size=batch) < dens]
        out.append(keep)
        have += len(keep)
    angles = np.sort(np.concatenate(out)[:count], axis=1)
    return EigenangleBatch(ensemble, n, angles)


def det_one_minus(angles):
    """``det(1 - g) = prod_j (2 - 2 cos theta_j)``, row-wise for 2-d input."""
    angles = np.asarray(angles, dtype=float)
    return np.prod(2 - 2 * np.cos(angles), axis=-1)


def cn_statistics(angles):
    """``(1 / mean det(1 - g), delta-method standard error)`` from SO(2n) samples."""
    det = det_one_minus(angles)
    mean = float(np.mean(det))
    se_mean = float(np.std(det, ddof=1) / math.sqrt(len(det)))
    return 1 / mean, se_mean / mean**2


def estimate_cn(n, samples, rng):
    """``1 / E[det(1 - g)]`` over SO(2n) with its delta-method standard error."""
    return cn_statistics(sample_weyl(SO_EVEN, n, rng, samples).angles)


def sample_weyl_chunked(ensemble, n, seed, count, chunks=8, workers=1):
    """Like :func:`sample_weyl`, drawn in ``chunks`` independent streams.

    Streams come from ``SeedSequence(seed).spawn(chunks)`` and are
    concatenated in chunk order, so the result does not depend on ``workers``.
    """
    _check(ensemble, n)
    streams = np.random.SeedSequence(seed).spawn(chunks)
    sizes = [count // chunks + (1 if i < count % chunks else 0) for i in range(chunks)]
    jobs = [(np.random.default_rng(ss), m) for ss, m in zip(streams, sizes) if m > 0]

    def run(job):
        return sample_weyl(ensemble, n, job[0], job[1]).angles

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    return EigenangleBatch(ensemble, n, np.concatenate(parts))


def one_point_density(ensemble, n, theta):
    """Density of the ``2n`` eigenangles on ``[-pi, pi]`` (integrates to ``2n``)."""
    theta = np.asarray(theta, dtype=float)
    m = 2 * n - 1 if ensemble == SO_EVEN else 2 * n + 1
    s = np.sin(theta)
    safe = np.where(s == 0, 1.0, s)
    kernel = np.where(s == 0, float(m), np.sin(m * theta) / safe)
    if ensemble == SO_EVEN:
        return (m + kernel) / (2 * math.pi)
    return (m - kernel) / (2 * math.pi)


def exact_one_level(ensemble, n, phi):
    """Exact expectation of :func:`linear_statistic` from the one-point density."""
    _check(ensemble, n)
    def f(x):
        return float(phi.phi(x)) * one_point_density(ensemble, n, math.pi * x / n)

    val, _ = quad(f, 0, n, limit=500)
    return 2 * math.pi / n * val


def linear_statistic(angles, phi):
    """``sum_j 2 phi(n theta_j / pi)`` per row: all ``2n`` eigenangles at size ``2n``."""
    angles = np.asarray(angles, dtype=float)
    n = angles.shape[-1]
    return np.sum(2 * phi.phi(n * angles / math.pi), axis=-1)


@dataclass(frozen=True)
class OneLevelEstimate:
    estimate: float
    stderr: float
    target: float


def one_level_statistics(batch, phi, weighted=False):
    """Mean of the one-level statistic over ``batch`` with its standard error.

    ``weighted`` reweights SO(2n) samples by ``det(1 - g) / mean``; the
    standard error then uses the ratio-estimator linearization.
    """
    if weighted and batch.ensemble != SO_EVEN:
        raise InvalidCombination("det(1 - g) weighting applies to SOeven only")
    stat = linear_statistic(batch.angles, phi)
    target = sigma_integral(phi, "Sp" if batch.ensemble == USP else "O")
    size = len(stat)
    if not weighted:
        return OneLevelEstimate(
            float(np.mean(stat)), float(np.std(stat, ddof=1) / math.sqrt(size)), target
        )
    w = det_one_minus(batch.angles)
    est = float(np.sum(w * stat) / np.sum(w))
    resid = w * (stat - est) / np.mean(w)
    return OneLevelEstimate(est, float(np.std(resid, ddof=1) / math.sqrt(size)), target)


def one_level_density(ensemble, n, phi, samples, rng, weighted=False):
    """Monte Carlo one-level density of ``ensemble`` against ``phi``."""
    if weighted and ensemble != SO_EVEN:
        raise InvalidCombination("det(1 - g) weighting applies to SOeven only")
    return one_level_statistics(sample_weyl(ensemble, n, rng, samples), phi, weighted)
