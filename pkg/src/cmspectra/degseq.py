"""Degree sequences for the configuration model, with threshold diagnostics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ParityError(ValueError):
    """Total degree is odd, so no perfect matching of half-edges exists."""


@dataclass(frozen=True)
class DegreeSequence:
    """Prescribed degrees d_1..d_n. Every degree is >= 1 and the total is even."""

    degrees: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        deg = np.asarray(self.degrees, dtype=np.int64)
        if deg.ndim != 1 or deg.size == 0:
            raise ValueError("degree sequence must be a nonempty 1-d array")
        if np.any(deg < 1):
            raise ValueError("zero or negative degrees are not allowed; "
                             "drop isolated vertices before construction")
        if int(deg.sum()) % 2 != 0:
            raise ParityError(f"total degree {int(deg.sum())} is odd")
        deg.setflags(write=False)
        object.__setattr__(self, "degrees", deg)

    @property
    def n(self) -> int:
        return int(self.degrees.size)

    @property
    def total(self) -> int:
        """Total degree D = sum d_i (number of half-edges)."""
        return int(self.degrees.sum())

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class ConditionReport:
    """Where the degrees sit relative to the threshold C*sqrt(D/n)."""

    C: float
    epsilon: float
    min_degree: int
    threshold: float
    fraction_below: float
    satisfies_strict: bool
    epsilon_bound_holds: bool


def make_regular(n: int, d: int) -> DegreeSequence:
    """All n vertices get degree d. Requires n*d even."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    if (n * d) % 2 != 0:
        raise ParityError(f"n*d = {n * d} is odd")
    return DegreeSequence(np.full(n, d, dtype=np.int64),
                          metadata={"kind": "regular", "n": n, "d": d})


def make_two_valued(n: int, d1: int, d2: int, rng_seed: int) -> DegreeSequence:
    """Each vertex independently gets d1 or d2 with probability 1/2.

    If the total comes out odd, one uniformly chosen vertex has its degree
    incremented by 1; the fixup is recorded in the metadata.
    """
    if n < 1 or d1 < 1 or d2 < 1:
        raise ValueError("n, d1, d2 must be positive")
    rng = np.random.default_rng(rng_seed)
    picks = rng.integers(0, 2, size=n)
    deg = np.where(picks == 0, d1, d2).astype(np.int64)
    meta = {"kind": "two_valued", "n": n, "d1": d1, "d2": d2,
            "rng_seed": int(rng_seed), "fixup_vertex": None}
    if int(deg.sum()) % 2 != 0:
        v = int(rng.integers(0, n))
        deg[v] += 1
        meta["fixup_vertex"] = v
    return DegreeSequence(deg, metadata=meta)


def condition_report(ds: DegreeSequence, C: float, epsilon: float) -> ConditionReport:
    """Count degrees strictly below C*sqrt(D/n) and compare with epsilon*n."""
    if C < 0:
        raise ValueError("C must be nonnegative")
    threshold = C * math.sqrt(ds.total / ds.n)
    below = int(np.count_nonzero(ds.degrees < threshold))
    min_degree = int(ds.degrees.min())
    return ConditionReport(
        C=float(C),
        epsilon=float(epsilon),
        min_degree=min_degree,
        threshold=threshold,
        fraction_below=below / ds.n,
        satisfies_strict=min_degree > threshold,
        epsilon_bound_holds=below <= epsilon * ds.n,
    )


def degree_moment_diagnostic(ds: DegreeSequence, m: int) -> float:
    """Ratio (sum_l d_l^(-m)) / (n * (n/D)^(m/2)).

    Values well below 1 (for every m >= 1) indicate the optimal condition for
    semicircle convergence; a value of order 1 flags degrees sitting at the
    sqrt(D/n) scale.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    num = float(np.sum(ds.degrees.astype(float) ** (-m)))
    den = ds.n * (ds.n / ds.total) ** (m / 2.0)
    return num / den


def save_degrees(ds: DegreeSequence, path: str | Path) -> None:
    """One integer per line; metadata goes to a <path>.meta.json sidecar."""
    path = Path(path)
    path.write_text("\n".join(str(int(d)) for d in ds.degrees) + "\n")
    sidecar = path.with_suffix(path.suffix + ".meta.json")
    sidecar.write_text(json.dumps(ds.metadata, indent=2) + "\n")


def load_degrees(path: str | Path) -> DegreeSequence:
    path = Path(path)
    deg = np.array([int(line) for line in path.read_text().split()], dtype=np.int64)
    sidecar = path.with_suffix(path.suffix + ".meta.json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    return DegreeSequence(deg, metadata=meta)
