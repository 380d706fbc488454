"""Uniform perfect matchings of half-edges and the multigraphs they induce.

Half-edges are indexed globally: vertex i owns the contiguous id block
[offsets[i], offsets[i+1]).  The sampler repeatedly takes the smallest unused
id and pairs it with a uniform choice among the remaining unused ids, which
yields the uniform law on all (D-1)!! perfect matchings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse, stats

from .degseq import DegreeSequence, ParityError

ENUMERATION_CAP = 14   # (13)!! = 135135 matchings

_ENUM_CACHE: dict[int, np.ndarray] = {}


def half_edge_offsets(ds: DegreeSequence) -> np.ndarray:
    """offsets[i] is the first global id owned by vertex i; offsets[n] = D."""
    off = np.zeros(ds.n + 1, dtype=np.int64)
    np.cumsum(ds.degrees, out=off[1:])
    return off


def owners_of(ds: DegreeSequence, ids: np.ndarray) -> np.ndarray:
    """Vertex index owning each global half-edge id."""
    off = half_edge_offsets(ds)
    return np.searchsorted(off, np.asarray(ids), side="right") - 1


@dataclass(frozen=True)
class Matching:
    """A perfect pairing of the D half-edges: partner[a] = b and partner[b] = a."""

    partner: np.ndarray
    degree_sequence: DegreeSequence

    def __post_init__(self):
        p = np.asarray(self.partner, dtype=np.int64)
        D = self.degree_sequence.total
        if p.shape != (D,):
            raise ValueError(f"partner array must have length D={D}")
        if np.any(p[p] != np.arange(D)) or np.any(p == np.arange(D)):
            raise ValueError("partner must be a fixed-point-free involution")
        p.setflags(write=False)
        object.__setattr__(self, "partner", p)

    def pairs(self) -> np.ndarray:
        """(D/2, 2) array of pairs (a, b) with a < b, sorted by a."""
        a = np.arange(self.partner.size)
        mask = a < self.partner
        return np.column_stack([a[mask], self.partner[mask]])


@dataclass(frozen=True)
class Multigraph:
    """Symmetric multiplicity counts; a self-loop contributes 2 to A_ii."""

    n: int
    adjacency: sparse.csr_matrix = field(compare=False)

    def multiplicity(self, i: int, j: int) -> int:
        return int(self.adjacency[i, j])

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1)).ravel().astype(np.int64)

    def entries(self) -> dict[tuple[int, int], int]:
        """Upper-triangle (i <= j) multiplicities, nonzero only."""
        coo = self.adjacency.tocoo()
        out: dict[tuple[int, int], int] = {}
        for i, j, v in zip(coo.row, coo.col, coo.data):
            if i <= j:
                out[(int(i), int(j))] = int(v)
        return out


def _pair_ranks(rng: np.random.Generator, num_ids: int) -> np.ndarray:
    """Partner ranks for the sequential pairing: rank t is uniform on
    [0, num_ids - 1 - 2t)."""
    steps = num_ids // 2
    pools = num_ids - 1 - 2 * np.arange(steps, dtype=np.int64)
    u = rng.random(steps)
    ranks = np.minimum((u * pools).astype(np.int64), pools - 1)
    return ranks


def _decode_single(ranks, num_ids: int) -> np.ndarray:
    """Sequential pairing on ids 0..num_ids-1 driven by partner ranks.

    At each step the smallest unused id is paired with arr[rank], where arr
    holds the unused ids in swap-delete order.  The state evolution is
    identical to :func:`_decode_batch`.
    """
    partner = np.empty(num_ids, dtype=np.int64)
    arr = list(range(num_ids))
    pos = list(range(num_ids))
    used = bytearray(num_ids)
    size = num_ids
    ptr = 0
    for r in ranks:
        while used[ptr]:
            ptr += 1
        a = ptr
        used[a] = 1
        size -= 1
        p = pos[a]
        last = arr[size]
        arr[p] = last
        pos[last] = p
        b = arr[r]
        used[b] = 1
        size -= 1
        p = pos[b]
        last = arr[size]
        arr[p] = last
        pos[last] = p
        partner[a] = b
        partner[b] = a
    return partner


def _decode_batch(ranks: np.ndarray, num_ids: int) -> np.ndarray:
    """Vectorized :func:`_decode_single` over many rank rows (small num_ids)."""
    m = ranks.shape[0]
    rows = np.arange(m)
    partner = np.empty((m, num_ids), dtype=np.int64)
    arr = np.tile(np.arange(num_ids, dtype=np.int64), (m, 1))
    pos = arr.copy()
    unused = np.ones((m, num_ids), dtype=bool)
    size = num_ids
    for t in range(num_ids // 2):
        a = np.argmax(unused, axis=1)
        unused[rows, a] = False
        size -= 1
        p = pos[rows, a]
        last = arr[rows, size]
        arr[rows, p] = last
        pos[rows, last] = p
        b = arr[rows, ranks[:, t]]
        unused[rows, b] = False
        size -= 1
        p = pos[rows, b]
        last = arr[rows, size]
        arr[rows, p] = last
        pos[rows, last] = p
        partner[rows, a] = b
        partner[rows, b] = a
    return partner


def match_ids_sequentially(ids: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Sequential uniform pairing of an ascending id list; returns (m/2, 2) pairs."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size % 2 != 0:
        raise ParityError("cannot pair an odd number of half-edges")
    if ids.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    ranks = _pair_ranks(rng, ids.size)
    local = _decode_single(ranks, ids.size)
    a = np.arange(ids.size)
    mask = a < local
    return np.column_stack([ids[a[mask]], ids[local[mask]]])


def sample_matching(ds: DegreeSequence, rng_seed) -> Matching:
    """One uniform perfect matching; deterministic given the seed."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) \
        else np.random.default_rng(rng_seed)
    D = ds.total
    ranks = _pair_ranks(rng, D)
    return Matching(_decode_single(ranks, D), ds)


def sample_matching_batch(ds: DegreeSequence, num: int, rng_seed) -> np.ndarray:
    """(num, D) partner arrays, same law and decision process as
    :func:`sample_matching`.  Intended for small D."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) \
        else np.random.default_rng(rng_seed)
    D = ds.total
    steps = D // 2
    pools = D - 1 - 2 * np.arange(steps, dtype=np.int64)
    u = rng.random((num, steps))
    ranks = np.minimum((u * pools).astype(np.int64), pools - 1)
    return _decode_batch(ranks, D)


def biased_sample_matching(ds: DegreeSequence, rng_seed) -> Matching:
    """Negative control: always pairs half-edges 0 and 1 first, then samples
    the rest sequentially.  Deliberately non-uniform whenever D > 2."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) \
        else np.random.default_rng(rng_seed)
    D = ds.total
    if D < 2:
        raise ValueError("need at least one pair")
    partner = np.empty(D, dtype=np.int64)
    partner[0], partner[1] = 1, 0
    rest = np.arange(2, D)
    for a, b in match_ids_sequentially(rest, rng):
        partner[a] = b
        partner[b] = a
    return Matching(partner, ds)


def enumerate_matchings(ds: DegreeSequence):
    """All (D-1)!! perfect matchings in canonical order.

    Canonical order: recursively pair the smallest unmatched id with each
    larger unmatched id, in increasing order.
    """
    D = ds.total
    for partner in _enumerate_partners(D):
        yield Matching(partner, ds)


def enumerate_partner_arrays(D: int) -> np.ndarray:
    """((D-1)!!, D) stacked partner arrays in canonical order (cached)."""
    if D > ENUMERATION_CAP:
        raise ValueError(f"enumeration capped at D <= {ENUMERATION_CAP}, got {D}")
    if D % 2 != 0:
        raise ParityError(f"D={D} is odd")
    if D not in _ENUM_CACHE:
        _ENUM_CACHE[D] = np.array(list(_enumerate_partners(D)), dtype=np.int64)
    return _ENUM_CACHE[D]


def _enumerate_partners(D: int):
    if D > ENUMERATION_CAP:
        raise ValueError(f"enumeration capped at D <= {ENUMERATION_CAP}, got {D}")
    if D % 2 != 0:
        raise ParityError(f"D={D} is odd")
    partner = np.full(D, -1, dtype=np.int64)
    ids = list(range(D))

    def rec(remaining):
        if not remaining:
            yield partner.copy()
            return
        a = remaining[0]
        for k in range(1, len(remaining)):
            b = remaining[k]
            partner[a], partner[b] = b, a
            yield from rec(remaining[1:k] + remaining[k + 1:])
        partner[a] = -1

    yield from rec(ids)


def double_factorial(m: int) -> int:
    """m!! for odd m (number of perfect matchings of m+1 points)."""
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def adjacency_counts(m: Matching) -> Multigraph:
    """Multiplicity matrix from a matching; loops count twice on the diagonal."""
    ds = m.degree_sequence
    pairs = m.pairs()
    oi = owners_of(ds, pairs[:, 0])
    oj = owners_of(ds, pairs[:, 1])
    # symmetric: add both orientations, so a loop (i,i) lands twice on A_ii
    row = np.concatenate([oi, oj])
    col = np.concatenate([oj, oi])
    data = np.ones(row.size, dtype=np.int64)
    adj = sparse.coo_matrix((data, (row, col)), shape=(ds.n, ds.n)).tocsr()
    mg = Multigraph(ds.n, adj)
    if not np.array_equal(mg.row_sums(), ds.degrees):
        raise AssertionError("row sums do not match the degree sequence")
    return mg


def matching_key(partner: np.ndarray) -> tuple:
    """Canonical hashable form: sorted (a, b) pairs with a < b."""
    a = np.arange(partner.size)
    mask = a < partner
    return tuple(zip(a[mask].tolist(), partner[mask].tolist()))


def uniformity_chisquare(ds: DegreeSequence, samples: int, rng_seed,
                         sampler: str = "sequential"):
    """Chi-square test of the sampler law against uniform over all matchings.

    ``sampler`` is "sequential" (the real sampler, via the batch path) or
    "biased" (the documented negative control).  Returns (statistic, p_value).
    """
    D = ds.total
    if D > 10:
        raise ValueError("uniformity test requires D <= 10 (enumerable space)")
    index = {matching_key(p): i
             for i, p in enumerate(enumerate_partner_arrays(D))}
    counts = np.zeros(len(index), dtype=np.int64)
    if sampler == "sequential":
        partners = sample_matching_batch(ds, samples, rng_seed)
        # a partner array is a base-(D+1) numeral; bin the integer codes
        base = (D + 1) ** np.arange(D, dtype=np.int64)
        enum_codes = enumerate_partner_arrays(D) @ base
        order = np.argsort(enum_codes)
        slots = order[np.searchsorted(enum_codes[order], partners @ base)]
        np.add.at(counts, slots, 1)
    elif sampler == "biased":
        rng = np.random.default_rng(rng_seed)
        for _ in range(samples):
            m = biased_sample_matching(ds, rng)
            counts[index[matching_key(m.partner)]] += 1
    else:
        raise ValueError(f"unknown sampler {sampler!r}")
    if len(index) == 1:
        return 0.0, 1.0
    stat, p = stats.chisquare(counts)
    return float(stat), float(p)


def save_matching(m: Matching, path: str | Path) -> None:
    """D/2 lines "a b" with a < b, sorted by a."""
    lines = [f"{a} {b}" for a, b in m.pairs()]
    Path(path).write_text("\n".join(lines) + "\n")


def load_matching(ds: DegreeSequence, path: str | Path) -> Matching:
    partner = np.empty(ds.total, dtype=np.int64)
    for line in Path(path).read_text().split("\n"):
        if line.strip():
            a, b = map(int, line.split())
            partner[a], partner[b] = b, a
    return Matching(partner, ds)


def save_multigraph(g: Multigraph, path: str | Path) -> None:
    """Lines "i j multiplicity" with i <= j, lexicographic."""
    lines = [f"{i} {j} {v}" for (i, j), v in sorted(g.entries().items())]
    Path(path).write_text("\n".join(lines) + "\n")
