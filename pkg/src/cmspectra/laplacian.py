"""Centered, degree-scaled adjacency M = sqrt(D/n) D^-1/2 (A - d d^T/(D-1)) D^-1/2.

Dense storage for moderate n, and a matrix-free operator for large n where
the centering term applies as a rank-1 update.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy import sparse

from .confmodel import Multigraph
from .degseq import DegreeSequence

DENSE_CAP = 8192


class LaplacianView:
    """Either a dense symmetric matrix or a matvec-only operator.

    The two modes agree: for any v, dense @ v equals apply(v) to rounding.
    """

    def __init__(self, ds: DegreeSequence, adjacency: Multigraph,
                 subtract_rank1: bool, mode: str, dense_storage=None):
        if mode not in ("dense", "operator"):
            raise ValueError(f"unknown mode {mode!r}")
        if adjacency.n != ds.n:
            raise ValueError("adjacency dimension does not match degree sequence")
        if not np.array_equal(adjacency.row_sums(), ds.degrees):
            raise ValueError("adjacency row sums do not match the degree sequence")
        self.degree_sequence = ds
        self.adjacency = adjacency
        self.subtract_rank1 = bool(subtract_rank1)
        self.mode = mode
        self.n = ds.n
        self.dense_storage = dense_storage
        self._scale = np.sqrt(ds.total / ds.n)
        self._sqrt_d = np.sqrt(ds.degrees.astype(float))
        self._inv_sqrt_d = 1.0 / self._sqrt_d
        self._csr = adjacency.adjacency.astype(float)

    @property
    def dense(self) -> np.ndarray:
        if self.mode != "dense":
            raise ValueError("dense storage only available in dense mode")
        return self.dense_storage

    def apply(self, v: np.ndarray) -> np.ndarray:
        """M @ v in O(nnz(A) + n) work."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise ValueError(f"vector must have length {self.n}")
        if self.mode == "dense":
            return self.dense_storage @ v
        w = self._inv_sqrt_d * (self._csr @ (self._inv_sqrt_d * v))
        if self.subtract_rank1:
            w -= self._sqrt_d * (self._sqrt_d @ v) / (self.degree_sequence.total - 1)
        return self._scale * w

    def __matmul__(self, v):
        return self.apply(v)


def build_dense(ds: DegreeSequence, adjacency: Multigraph,
                subtract_rank1: bool = True, cap: int | None = DENSE_CAP) -> LaplacianView:
    """Dense symmetric M; cap guards against accidental huge allocations."""
    if cap is not None and ds.n > cap:
        raise ValueError(f"n={ds.n} exceeds the dense cap {cap}; "
                         "use build_operator or raise the cap")
    M = adjacency.adjacency.astype(float).toarray()
    sqrt_d = np.sqrt(ds.degrees.astype(float))
    inv = 1.0 / sqrt_d
    M *= inv[:, None]
    M *= inv[None, :]
    if subtract_rank1:
        M -= np.outer(sqrt_d, sqrt_d / (ds.total - 1))
    M *= np.sqrt(ds.total / ds.n)
    if not np.isfinite(M).all():
        raise ValueError("non-finite entries in the dense matrix")
    return LaplacianView(ds, adjacency, subtract_rank1, "dense", dense_storage=M)


def build_operator(ds: DegreeSequence, adjacency: Multigraph,
                   subtract_rank1: bool = True) -> LaplacianView:
    """Matrix-free M, suitable for large n."""
    return LaplacianView(ds, adjacency, subtract_rank1, "operator")


def as_linear_operator(view: LaplacianView) -> sparse.linalg.LinearOperator:
    return sparse.linalg.LinearOperator(
        shape=(view.n, view.n), matvec=view.apply, rmatvec=view.apply, dtype=float)


def export_csv(view: LaplacianView, path: str | Path) -> None:
    """Dense matrix as CSV, one row per line."""
    np.savetxt(Path(path), view.dense, delimiter=",")
