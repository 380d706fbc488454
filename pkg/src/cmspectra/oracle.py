"""Exhaustive enumeration over the matching space for tiny D: exact adjacency
statistics and exact moments of (1/n) Tr M^k, against which every sampling
estimator is validated."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .confmodel import (adjacency_counts, double_factorial,
                        enumerate_partner_arrays, owners_of,
                        sample_matching, sample_matching_batch)
from .degseq import DegreeSequence
from .laplacian import build_dense

ORACLE_D_CAP = 14
ORACLE_K_CAP = 8
BATCH_D_CAP = 24


@dataclass(frozen=True)
class ExactStats:
    degree_sequence: DegreeSequence
    matching_count: int
    mean_adjacency: dict          # (i, j) -> Fraction, exact
    variance_adjacency: dict      # (i, j) -> Fraction, exact
    exact_moments: dict           # (subtract: bool, k) -> float

    def to_json(self, path: str | Path) -> None:
        payload = {
            "degrees": self.degree_sequence.degrees.tolist(),
            "matching_count": self.matching_count,
            "mean_adjacency": {f"{i},{j}": str(v)
                               for (i, j), v in self.mean_adjacency.items()},
            "variance_adjacency": {f"{i},{j}": str(v)
                                   for (i, j), v in self.variance_adjacency.items()},
            "exact_moments": {f"{'sub' if s else 'nosub'},{k}": v
                              for (s, k), v in self.exact_moments.items()},
        }
        Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def _count_tensors(ds: DegreeSequence, partners: np.ndarray) -> np.ndarray:
    """(num, n, n) multiplicity tensors from stacked partner arrays."""
    num, D = partners.shape
    n = ds.n
    idx = np.arange(D)
    mask = idx[None, :] < partners
    a_ids = np.broadcast_to(idx, partners.shape)[mask].reshape(num, D // 2)
    b_ids = partners[mask].reshape(num, D // 2)
    own = owners_of(ds, np.arange(D))
    oi = own[a_ids]
    oj = own[b_ids]
    counts = np.zeros((num, n * n), dtype=np.int64)
    rows = np.repeat(np.arange(num), D // 2)
    np.add.at(counts, (rows, (oi * n + oj).ravel()), 1)
    np.add.at(counts, (rows, (oj * n + oi).ravel()), 1)
    return counts.reshape(num, n, n)


def _batched_moments(ds: DegreeSequence, counts: np.ndarray, max_k: int,
                     subtract: bool) -> np.ndarray:
    """(max_k, num) traces of M^k / n for each multiplicity tensor."""
    n, D = ds.n, ds.total
    scale = math.sqrt(D / n)
    sqd = np.sqrt(ds.degrees.astype(float))
    M = counts.astype(float) / (sqd[None, :, None] * sqd[None, None, :])
    if subtract:
        M -= np.outer(sqd, sqd)[None, :, :] / (D - 1)
    M *= scale
    out = np.empty((max_k, counts.shape[0]))
    P = M.copy()
    for k in range(1, max_k + 1):
        out[k - 1] = np.einsum("mii->m", P) / n
        if k < max_k:
            P = P @ M
    return out


def exact_stats(ds: DegreeSequence, max_k: int = 4,
                chunk: int = 8192) -> ExactStats:
    """Equal-weight averages over every perfect matching (D <= 14, k <= 8)."""
    D, n = ds.total, ds.n
    if D > ORACLE_D_CAP:
        raise ValueError(f"oracle capped at D <= {ORACLE_D_CAP}, got {D}")
    if max_k > ORACLE_K_CAP:
        raise ValueError(f"oracle moments capped at k <= {ORACLE_K_CAP}")
    partners = enumerate_partner_arrays(D)
    num = partners.shape[0]
    assert num == double_factorial(D - 1)
    sum_a = np.zeros((n, n), dtype=np.int64)
    sum_a2 = np.zeros((n, n), dtype=np.int64)
    moment_chunks = {(s, k): [] for s in (True, False) for k in range(1, max_k + 1)}
    for lo in range(0, num, chunk):
        counts = _count_tensors(ds, partners[lo:lo + chunk])
        sum_a += counts.sum(axis=0)
        sum_a2 += (counts ** 2).sum(axis=0)
        for subtract in (True, False):
            tr = _batched_moments(ds, counts, max_k, subtract)
            for k in range(1, max_k + 1):
                moment_chunks[(subtract, k)].append(tr[k - 1])
    mean = {}
    var = {}
    for i in range(n):
        for j in range(n):
            m = Fraction(int(sum_a[i, j]), num)
            mean[(i, j)] = m
            var[(i, j)] = Fraction(int(sum_a2[i, j]), num) - m * m
    moments = {(s, k): math.fsum(np.concatenate(vals)) / num
               for (s, k), vals in moment_chunks.items()}
    return ExactStats(ds, num, mean, var, moments)


def monte_carlo_moment(ds: DegreeSequence, k: int, samples: int, rng_seed,
                       subtract_rank1: bool = True) -> tuple[float, float]:
    """Mean and standard error of (1/n) Tr(M^k) over sampled matchings."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) \
        else np.random.default_rng(rng_seed)
    if ds.total <= BATCH_D_CAP:
        partners = sample_matching_batch(ds, samples, rng)
        counts = _count_tensors(ds, partners)
        vals = _batched_moments(ds, counts, k, subtract_rank1)[k - 1]
    else:
        vals = np.empty(samples)
        for i in range(samples):
            m = sample_matching(ds, rng)
            view = build_dense(ds, adjacency_counts(m), subtract_rank1, cap=None)
            eigs = np.linalg.eigvalsh(view.dense)
            vals[i] = float(np.sum(eigs ** k) / ds.n)
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(samples))
    return est, se
