"""Eigenvalues, empirical spectral distributions, reference laws, distances,
and stochastic trace estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate

from .laplacian import LaplacianView

CATALAN_CAP = 30


def eigenvalues_dense(view: LaplacianView) -> np.ndarray:
    """Full ascending spectrum of a dense-mode view."""
    M = view.dense
    if not np.isfinite(M).all():
        raise ValueError("non-finite entries")
    return np.linalg.eigvalsh(M)


def catalan(k: int) -> int:
    """C_k = binom(2k, k) / (k+1), exact."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > CATALAN_CAP:
        raise OverflowError(f"catalan capped at k <= {CATALAN_CAP}")
    return math.comb(2 * k, k) // (k + 1)


def semicircle_moment(k: int) -> float:
    """k-th moment of the semicircle law: 0 for odd k, C_{k/2} for even k."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return 0.0 if k % 2 else float(catalan(k // 2))


def semicircle_density(x) -> np.ndarray | float:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 2
    out[inside] = np.sqrt(4.0 - x[inside] ** 2) / (2.0 * np.pi)
    return out if out.ndim else float(out)


def semicircle_cdf(x) -> np.ndarray | float:
    x = np.asarray(x, dtype=float)
    xc = np.clip(x, -2.0, 2.0)
    out = 0.5 + xc * np.sqrt(4.0 - xc ** 2) / (4.0 * np.pi) + np.arcsin(xc / 2.0) / np.pi
    return out if out.ndim else float(out)


def kesten_mckay_density(x, d: int) -> np.ndarray | float:
    """Limiting spectral density of random d-regular graphs, rescaled by
    1/sqrt(d) so that the second moment is 1 (matching M's normalization).

    The raw Kesten-McKay law lives on adjacency eigenvalues with second
    moment d; dividing the variable by sqrt(d) makes it comparable with the
    semicircle reference used here.
    """
    if d < 3:
        raise ValueError("d must be >= 3")
    x = np.asarray(x, dtype=float)
    y = x * math.sqrt(d)          # back to the adjacency scale
    out = np.zeros_like(x)
    edge = 2.0 * math.sqrt(d - 1.0)
    inside = np.abs(y) < edge
    yi = y[inside]
    out[inside] = d * np.sqrt(4.0 * (d - 1.0) - yi ** 2) / (2.0 * np.pi * (d ** 2 - yi ** 2))
    out *= math.sqrt(d)           # Jacobian of the rescaling
    return out if out.ndim else float(out)


def kesten_mckay_support(d: int) -> tuple[float, float]:
    edge = 2.0 * math.sqrt((d - 1.0) / d)
    return -edge, edge


@dataclass(frozen=True)
class ReferenceDistribution:
    kind: str
    support: tuple[float, float]
    density: Callable
    cdf: Callable
    moment: Callable


def semicircle() -> ReferenceDistribution:
    def moment(k):
        return semicircle_moment(k)
    return ReferenceDistribution("semicircle", (-2.0, 2.0),
                                 semicircle_density, semicircle_cdf, moment)


def kesten_mckay(d: int) -> ReferenceDistribution:
    lo, hi = kesten_mckay_support(d)

    def density(x):
        return kesten_mckay_density(x, d)

    def cdf(x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(xs)
        for i, xi in enumerate(xs):
            if xi <= lo:
                out[i] = 0.0
            elif xi >= hi:
                out[i] = 1.0
            else:
                out[i], _ = integrate.quad(density, lo, xi, limit=200)
        return out if np.ndim(x) else float(out[0])

    def moment(k):
        val, _ = integrate.quad(lambda t: t ** k * density(t), lo, hi, limit=200)
        return val

    return ReferenceDistribution(f"kesten_mckay({d})", (lo, hi), density, cdf, moment)


def empirical_moment(eigs: np.ndarray, k: int) -> float:
    """(1/n) sum lambda_i^k (numpy pairwise summation)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    eigs = np.asarray(eigs, dtype=float)
    return float(np.sum(eigs ** k) / eigs.size)


def ks_distance(eigs: np.ndarray, ref: ReferenceDistribution | Callable) -> float:
    """sup_x |F_n(x) - F_ref(x)|, evaluated at both sides of every jump."""
    eigs = np.sort(np.asarray(eigs, dtype=float))
    if eigs.size == 0:
        raise ValueError("empty eigenvalue list")
    cdf = ref.cdf if isinstance(ref, ReferenceDistribution) else ref
    n = eigs.size
    F = np.asarray(cdf(eigs), dtype=float)
    upper = np.arange(1, n + 1) / n - F   # right side of each jump
    lower = F - np.arange(0, n) / n       # left side
    return float(max(upper.max(), lower.max(), 0.0))


def ks_distance_two_sample(eigs_a: np.ndarray, eigs_b: np.ndarray) -> float:
    """sup |F_a - F_b| for two discrete spectra (exact, at all jump points)."""
    a = np.sort(np.asarray(eigs_a, dtype=float))
    b = np.sort(np.asarray(eigs_b, dtype=float))
    grid = np.concatenate([a, b])
    Fa = np.searchsorted(a, grid, side="right") / a.size
    Fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.abs(Fa - Fb).max())


def wasserstein1_distance(eigs: np.ndarray, ref: ReferenceDistribution,
                          grid_points: int = 4000) -> float:
    """integral |F_n - F_ref| on a fine grid spanning both supports."""
    eigs = np.sort(np.asarray(eigs, dtype=float))
    lo = min(eigs[0], ref.support[0])
    hi = max(eigs[-1], ref.support[1])
    xs = np.linspace(lo, hi, grid_points)
    Fn = np.searchsorted(eigs, xs, side="right") / eigs.size
    Fr = np.asarray(ref.cdf(xs), dtype=float)
    return float(np.trapezoid(np.abs(Fn - Fr), xs))


def stochastic_moment(view: LaplacianView, k: int, probes: int,
                      rng_seed) -> tuple[float, float]:
    """Hutchinson estimate of (1/n) Tr(M^k) with Rademacher probes.

    Returns (estimate, standard error).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if probes < 2:
        raise ValueError("need at least 2 probes for a standard error")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) \
        else np.random.default_rng(rng_seed)
    n = view.n
    vals = np.empty(probes)
    for i in range(probes):
        z = rng.integers(0, 2, size=n) * 2.0 - 1.0
        w = z
        for _ in range(k):
            w = view.apply(w)
        vals[i] = (z @ w) / n
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(probes))
    return est, se


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    overflow_low: int
    overflow_high: int

    def to_csv(self, path: str | Path) -> None:
        rows = ["bin_left,bin_right,count,density"]
        for i in range(self.counts.size):
            rows.append(f"{self.bin_edges[i]},{self.bin_edges[i + 1]},"
                        f"{self.counts[i]},{self.density[i]}")
        Path(path).write_text("\n".join(rows) + "\n")


def esd_histogram(eigs: np.ndarray, bins: int, range_: tuple[float, float]) -> Histogram:
    """Counts plus density = count / (n * width); out-of-range eigenvalues go
    to the overflow fields."""
    lo, hi = range_
    if bins < 1 or not lo < hi:
        raise ValueError("need bins >= 1 and lo < hi")
    eigs = np.asarray(eigs, dtype=float)
    n = eigs.size
    counts, edges = np.histogram(eigs, bins=bins, range=(lo, hi))
    width = edges[1] - edges[0]
    density = counts / (n * width)
    return Histogram(
        bin_edges=edges,
        counts=counts.astype(np.int64),
        density=density,
        overflow_low=int(np.count_nonzero(eigs < lo)),
        overflow_high=int(np.count_nonzero(eigs > hi)),
    )


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray
    moments: dict
    histogram: Histogram


def spectral_summary(eigs: np.ndarray, k_list, bins: int,
                     range_: tuple[float, float]) -> SpectralSummary:
    eigs = np.sort(np.asarray(eigs, dtype=float))
    moments = {int(k): empirical_moment(eigs, int(k)) for k in k_list}
    return SpectralSummary(eigs, moments, esd_histogram(eigs, bins, range_))
