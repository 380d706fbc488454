"""Degree pruning: forced matching of half-edges on low-degree vertices until
every vertex has 0 or at least C*sqrt(D/n) unused half-edges, plus the
birth-death bookkeeping of the light-half-edge count.

Vocabulary: a vertex is *light* while 0 < unused < C*sqrt(D/n), *heavy*
otherwise.  Light status never reverts except by dropping to 0.  S_t is the
number of light half-edges after t forced pairings.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .confmodel import Matching, half_edge_offsets, match_ids_sequentially
from .degseq import DegreeSequence


@dataclass
class PruneStep:
    """Per-step record: state just before the uniform partner draw."""
    pool: int            # unused half-edges available as partner
    light_count: int     # light half-edges among them (S after the forced removal)
    threshold_vertices: int   # heavy vertices sitting exactly at the threshold
    action: str          # 'light' | 'threshold' | 'other' (partner class)


@dataclass
class PruneOutcome:
    degree_sequence: DegreeSequence
    C: float
    threshold: float
    forced_matches: list
    residual_degrees: np.ndarray
    residual_half_edges: np.ndarray
    removed_vertex_count: int
    reduced_vertex_count: int     # ended positive but below the original degree
    removed_edge_count: int
    trajectory: list              # S_0, S_1, ..., S_tau
    steps: list = field(default_factory=list)   # list[PruneStep]
    cap_exceeded: bool = False

    def trajectory_csv(self, path: str | Path) -> None:
        rows = ["t,S_t,D_t,action"]
        rows.append(f"0,{self.trajectory[0]},"
                    f"{self.steps[0].threshold_vertices if self.steps else ''},start")
        for t, (s, step) in enumerate(zip(self.trajectory[1:], self.steps), start=1):
            rows.append(f"{t},{s},{step.threshold_vertices},{step.action}")
        Path(path).write_text("\n".join(rows) + "\n")

    def summary(self) -> dict:
        return {
            "n": self.degree_sequence.n,
            "D": self.degree_sequence.total,
            "C": self.C,
            "threshold": self.threshold,
            "removed_vertex_count": self.removed_vertex_count,
            "reduced_vertex_count": self.reduced_vertex_count,
            "removed_edge_count": self.removed_edge_count,
            "cap_exceeded": self.cap_exceeded,
            "final_S": self.trajectory[-1],
        }


def threshold_value(ds: DegreeSequence, C: float) -> float:
    return C * math.sqrt(ds.total / ds.n)


def prune(ds: DegreeSequence, C: float, rng_seed, epsilon: float | None = None
          ) -> PruneOutcome:
    """Run the forced-pairing loop to completion.

    While some vertex has 0 < unused < C*sqrt(D/n): take the smallest-index
    unused half-edge among such vertices, pair it with a uniform choice among
    all other unused half-edges.  ``epsilon``, if given, only sets
    ``cap_exceeded`` (step count past 3*eps*C*sqrt(n*D)); the run itself
    always finishes.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) \
        else np.random.default_rng(rng_seed)
    n, D = ds.n, ds.total
    thr = threshold_value(ds, C)
    c_thr = math.ceil(thr)        # the integer count at which a heavy vertex
    #                               turns light on its next loss
    offsets = half_edge_offsets(ds)
    counts = ds.degrees.astype(np.int64).copy()
    light = (counts < thr)        # counts > 0 at start, so light == 0<c<thr

    # unused-id pool with swap-delete, for uniform partner selection
    arr = np.arange(D, dtype=np.int64)
    pos = np.arange(D, dtype=np.int64)
    used = np.zeros(D, dtype=bool)
    size = D

    def remove_id(h: int) -> None:
        nonlocal size
        used[h] = True
        size -= 1
        p = pos[h]
        last = arr[size]
        arr[p] = last
        pos[last] = p

    def owner(h: int) -> int:
        return int(np.searchsorted(offsets, h, side="right") - 1)

    heap: list[int] = []
    for v in np.nonzero(light)[0]:
        heap.extend(range(int(offsets[v]), int(offsets[v + 1])))
    heapq.heapify(heap)

    S = int(counts[light].sum())
    threshold_vertices = int(np.count_nonzero(~light & (counts == c_thr)))
    trajectory = [S]
    steps: list[PruneStep] = []
    forced: list[tuple[int, int]] = []

    while S > 0:
        # forced removal: smallest unused light half-edge
        while heap and used[heap[0]]:
            heapq.heappop(heap)
        a = heapq.heappop(heap)
        va = owner(a)
        remove_id(a)
        counts[va] -= 1
        S -= 1
        if counts[va] == 0:
            light[va] = False
        record = PruneStep(pool=size, light_count=S,
                           threshold_vertices=threshold_vertices, action="other")
        # uniform partner among the remaining unused half-edges
        b = int(arr[int(rng.integers(size))])
        vb = owner(b)
        remove_id(b)
        if light[vb]:
            record.action = "light"
            counts[vb] -= 1
            S -= 1
            if counts[vb] == 0:
                light[vb] = False
        else:
            c_old = int(counts[vb])
            counts[vb] = c_old - 1
            if c_old == c_thr:
                threshold_vertices -= 1
                if c_old - 1 > 0:
                    record.action = "threshold"
                    light[vb] = True
                    S += c_old - 1
                    for h in range(int(offsets[vb]), int(offsets[vb + 1])):
                        if not used[h]:
                            heapq.heappush(heap, h)
                # c_old == 1 means the vertex died heavy (threshold == 1)
            elif c_old - 1 == c_thr:
                threshold_vertices += 1
        forced.append((int(a), int(b)))
        trajectory.append(S)
        steps.append(record)

    residual_ids = arr[:size].copy()
    residual_ids.sort()
    removed = int(np.count_nonzero(counts == 0))
    reduced = int(np.count_nonzero((counts > 0) & (counts < ds.degrees)))
    cap_exceeded = False
    if epsilon is not None:
        cap_exceeded = len(forced) > 3 * epsilon * C * math.sqrt(n * D)
    return PruneOutcome(
        degree_sequence=ds,
        C=float(C),
        threshold=thr,
        forced_matches=forced,
        residual_degrees=counts,
        residual_half_edges=residual_ids,
        removed_vertex_count=removed,
        reduced_vertex_count=reduced,
        removed_edge_count=len(forced),
        trajectory=trajectory,
        steps=steps,
        cap_exceeded=cap_exceeded,
    )


def complete_after_prune(outcome: PruneOutcome, rng_seed) -> Matching:
    """Uniformly match the residual half-edges and concatenate with the forced
    matches, giving a full perfect matching on the original D half-edges.

    With no pruning steps this reproduces sample_matching for the same seed.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) \
        else np.random.default_rng(rng_seed)
    ds = outcome.degree_sequence
    partner = np.full(ds.total, -1, dtype=np.int64)
    for a, b in outcome.forced_matches:
        partner[a], partner[b] = b, a
    for a, b in match_ids_sequentially(outcome.residual_half_edges, rng):
        partner[a], partner[b] = b, a
    return Matching(partner, ds)


def bound_check(outcome: PruneOutcome, ds: DegreeSequence,
                epsilon: float, C: float) -> tuple[bool, bool]:
    """Removal bounds: vertices <= 2*eps*n and edges <= 4*eps*C*sqrt(n*D)."""
    vertices_ok = outcome.removed_vertex_count <= 2 * epsilon * ds.n
    edges_ok = outcome.removed_edge_count <= 4 * epsilon * C * math.sqrt(ds.n * ds.total)
    return vertices_ok, edges_ok


def step_distribution(counts: np.ndarray, ds: DegreeSequence, C: float
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Exact one-step law of the light-half-edge change from a given state.

    ``counts`` are current unused half-edge counts.  Returns (values, probs)
    for the net change X in {-2, c_thr - 2, -1}, where c_thr is the integer
    threshold ceil(C*sqrt(D/n)).  The masses are the ones the simulator
    realizes: after the forced removal, the partner is uniform over the
    remaining pool.
    """
    counts = np.asarray(counts, dtype=np.int64)
    thr = threshold_value(ds, C)
    c_thr = math.ceil(thr)
    light = (counts > 0) & (counts < thr)
    S = int(counts[light].sum())
    if S <= 0:
        raise ValueError("no light half-edges: the step is undefined")
    total = int(counts.sum())
    pool = total - 1
    s_after = S - 1
    d_t = int(np.count_nonzero(~light & (counts == c_thr)))
    p_light = s_after / pool
    p_up = d_t * c_thr / pool
    values = np.array([-2.0, c_thr - 2.0, -1.0])
    probs = np.array([p_light, p_up, 1.0 - p_light - p_up])
    if probs[2] < -1e-12:
        raise ValueError("inconsistent state: masses exceed 1")
    probs[2] = max(probs[2], 0.0)
    return values, probs


@dataclass(frozen=True)
class DominatingChainRun:
    trajectory: np.ndarray
    tau: int
    hit_zero: bool
    parameter_contract_ok: bool


def dominating_chain_sim(ds: DegreeSequence, epsilon: float, C: float, K: float,
                         rng_seed, s0: float | None = None) -> DominatingChainRun:
    """Simulate the dominating birth-death chain.

    Starts at eps*C*sqrt(nD) (or ``s0``), steps by C*sqrt(D/n) - 1 with the
    upsurge probability 4*eps*n*C*sqrt(D/n)/D and by -1 otherwise, capped at
    3*eps*C*sqrt(nD) steps.  The parameter contract K*eps*C^2 < 0.1 is
    reported, not enforced.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) \
        else np.random.default_rng(rng_seed)
    n, D = ds.n, ds.total
    root = math.sqrt(D / n)
    p_up = min(4.0 * epsilon * n * C * root / D, 1.0)
    contract_ok = K * epsilon * C ** 2 < 0.1
    s = float(epsilon * C * math.sqrt(n * D)) if s0 is None else float(s0)
    cap = math.ceil(3.0 * epsilon * C * math.sqrt(n * D)) if s0 is None \
        else max(math.ceil(3.0 * epsilon * C * math.sqrt(n * D)), 3 * math.ceil(s) + 1)
    traj = [s]
    t = 0
    while s > 0 and t < cap:
        if p_up > 0 and rng.random() < p_up:
            s += C * root - 1.0
        else:
            s -= 1.0
        t += 1
        traj.append(s)
    return DominatingChainRun(np.array(traj), t, s <= 0, contract_ok)


def coupled_dominance_run(ds: DegreeSequence, epsilon: float, C: float,
                          rng_seed) -> tuple[np.ndarray, np.ndarray, bool]:
    """Couple a real prune trajectory with the dominating chain.

    The chain upsurges whenever the real run does, plus independent fill-in
    draws covering the probability gap, so S_t <= S~_t pathwise whenever the
    chain's upsurge mass dominates the real one at every step.  Returns
    (S, S~, dominated) over the real run's lifetime.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) \
        else np.random.default_rng(rng_seed)
    outcome = prune(ds, C, rng)
    n, D = ds.n, ds.total
    root = math.sqrt(D / n)
    c_thr = math.ceil(outcome.threshold)
    p_up_chain = min(4.0 * epsilon * n * C * root / D, 1.0)
    s = epsilon * C * math.sqrt(n * D)
    chain = [s]
    for step in outcome.steps:
        p_up_real = step.threshold_vertices * c_thr / step.pool
        if step.action == "threshold":
            up = True
        else:
            gap = max(0.0, (p_up_chain - p_up_real) / max(1.0 - p_up_real, 1e-300))
            up = rng.random() < gap
        s = s + (C * root - 1.0 if up else -1.0)
        chain.append(s)
    real = np.array(outcome.trajectory, dtype=float)
    chain_arr = np.array(chain)
    dominated = bool(np.all(real <= chain_arr + 1e-9))
    return real, chain_arr, dominated
