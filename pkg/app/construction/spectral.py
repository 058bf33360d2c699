"""
Walk counting through the dominating operator A = A_R (x) J_r + P^T (A_B (x) J_r) P.

A is applied matrix-free through block membership: block sums of x are
taken with the membership matrix, pushed through the base adjacency and
lifted back. Bicolored edges therefore carry weight 2.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, aslinearoperator, eigsh

from ..core.config import settings
from ..core.errors import ConvergenceError, DimensionError, PreconditionError
from ..core.seeding import as_rng
from ..models.params import Params
from ..models.reports import SpectralSummary
from .model import BaseGraph, ColoredGraph, PartitionPair

logger = logging.getLogger(__name__)

# below this size eigsh is skipped in favour of a dense solve
ARPACK_MIN_DIM = 12
INT64_HEADROOM = 2 ** 62


def _start_vector(n: int, seed) -> np.ndarray:
    rng = as_rng(seed)
    x = np.ones(n) + 0.01 * rng.standard_normal(n)
    return x / np.linalg.norm(x)


def leading_eigenpair(
    op: LinearOperator,
    which: str = "LM",
    tol: Optional[float] = None,
    cap: Optional[int] = None,
    seed=None,
) -> Tuple[float, np.ndarray, float]:
    """Extreme eigenpair of a symmetric operator, certified by ||A v - theta v|| <= tol |theta|.

    which="LM" picks the eigenvalue of largest magnitude, "LA" the largest
    algebraic one.
    """
    tol = settings.SPECTRAL_TOL if tol is None else tol
    cap = settings.ITERATION_CAP if cap is None else cap
    n = op.shape[0]
    if n < ARPACK_MIN_DIM:
        dense = op @ np.eye(n)
        values, vectors = np.linalg.eigh((dense + dense.T) / 2)
        idx = int(np.argmax(np.abs(values))) if which == "LM" else int(np.argmax(values))
        theta, v = float(values[idx]), vectors[:, idx]
    else:
        try:
            values, vectors = eigsh(op, k=1, which=which, v0=_start_vector(n, seed), maxiter=cap, tol=0)
        except ArpackNoConvergence as exc:
            logger.warning("eigsh did not converge within %d iterations", cap)
            raise ConvergenceError(cap, float("nan")) from exc
        theta, v = float(values[0]), vectors[:, 0]
    v = v / np.linalg.norm(v)
    residual = float(np.linalg.norm(op @ v - theta * v))
    if residual > tol * abs(theta) and residual > 1e-12:
        logger.warning("eigenpair residual %.3e above tolerance %.1e", residual, tol)
        raise ConvergenceError(cap, residual)
    return theta, v, residual


def deviation_operator(base: BaseGraph, p: float) -> LinearOperator:
    """x -> (A - pJ) x on the base graph."""
    matrix = base.matrix.astype(float)

    def matvec(x):
        x = np.asarray(x, dtype=float).ravel()
        return matrix @ x - p * x.sum()

    return LinearOperator((base.m, base.m), matvec=matvec, rmatvec=matvec, dtype=float)


def dense_spectral_deviation(base: BaseGraph, p: float) -> float:
    dense = base.matrix.toarray().astype(float) - p
    return float(np.max(np.abs(np.linalg.eigvalsh(dense))))


def spectral_deviation(base: BaseGraph, p: float, tol: Optional[float] = None, seed=None) -> float:
    """Operator norm of A - pJ for the base adjacency A."""
    if base.m < 2:
        raise PreconditionError("spectral deviation needs at least two vertices")
    theta, _, _ = leading_eigenpair(deviation_operator(base, p), which="LM", tol=tol, seed=seed)
    value = abs(theta)
    if base.m <= settings.DENSE_CHECK_MAX:
        dense = dense_spectral_deviation(base, p)
        if abs(dense - value) > 1e-6 * max(dense, 1.0):
            raise ConvergenceError(0, abs(dense - value))
    return value


def tensor_with_ones(matrix: np.ndarray, r: int) -> np.ndarray:
    """X (x) J_r as a dense array."""
    return np.kron(matrix, np.ones((r, r)))


@dataclass(frozen=True, eq=False)
class DominatingOperator:
    red_base: BaseGraph
    blue_base: BaseGraph
    partitions: PartitionPair

    def __post_init__(self):
        if self.red_base.m != self.partitions.red.m or self.blue_base.m != self.partitions.blue.m:
            raise DimensionError("base graphs and partitions disagree on the block count")

    @property
    def n(self) -> int:
        return self.partitions.n

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n, self.n)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """A x for a vector or an (n, k) block of vectors."""
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.n:
            raise DimensionError(f"operator acts on {self.n}-vectors, got {x.shape}")
        out = None
        for base, part in ((self.red_base, self.partitions.red), (self.blue_base, self.partitions.blue)):
            member = part.membership
            lifted = member @ (base.matrix @ (member.T @ x))
            out = lifted if out is None else out + lifted
        return out

    def as_linear_operator(self) -> LinearOperator:
        n = self.n
        return LinearOperator(
            (n, n),
            matvec=lambda x: self.apply(np.ravel(x)),
            rmatvec=lambda x: self.apply(np.ravel(x)),
            matmat=self.apply,
            dtype=float,
        )

    @cached_property
    def matrix(self) -> sparse.csr_matrix:
        """Integer matrix of A, entries in {0, 1, 2}."""
        total = None
        for base, part in ((self.red_base, self.partitions.red), (self.blue_base, self.partitions.blue)):
            member = part.membership
            term = member @ base.matrix @ member.T
            total = term if total is None else total + term
        return sparse.csr_matrix(total, dtype=np.int64)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def dominating_operator(red_base: BaseGraph, blue_base: BaseGraph, partitions: PartitionPair) -> DominatingOperator:
    return DominatingOperator(red_base=red_base, blue_base=blue_base, partitions=partitions)


@dataclass(frozen=True)
class SpectralDecomposition:
    mu: float
    v: np.ndarray
    m_norm: float
    residual: float

    @property
    def v_inf(self) -> float:
        return float(np.max(np.abs(self.v)))


def top_eigenpair(
    op: DominatingOperator, tol: Optional[float] = None, cap: Optional[int] = None, seed=None
) -> Tuple[float, np.ndarray]:
    """Largest eigenvalue of A with its unit Perron vector (entrywise nonnegative).

    The vector is certified again after taking absolute values; in a
    degenerate top eigenspace the solver may return mixed signs.
    """
    tol = settings.SPECTRAL_TOL if tol is None else tol
    mu, v, _ = leading_eigenpair(op.as_linear_operator(), which="LA", tol=tol, cap=cap, seed=seed)
    v = np.abs(v)
    v = v / np.linalg.norm(v)
    residual = float(np.linalg.norm(op.apply(v) - mu * v))
    if residual > tol * abs(mu) and residual > 1e-12:
        logger.warning("nonnegative eigenvector residual %.3e above tolerance %.1e", residual, tol)
        raise ConvergenceError(settings.ITERATION_CAP if cap is None else cap, residual)
    return mu, v


def _applier(op) -> Tuple[int, object]:
    if isinstance(op, DominatingOperator):
        return op.n, op.apply
    linear = aslinearoperator(op)
    return linear.shape[0], linear.matvec


def deflated_operator(op, mu: float, v: np.ndarray) -> LinearOperator:
    """M = A - mu v v^T acting on the orthogonal complement of v; op is a DominatingOperator or any symmetric matrix."""
    n, apply = _applier(op)

    def matvec(x):
        x = np.asarray(x, dtype=float).ravel()
        x = x - (v @ x) * v
        y = apply(x)
        return y - (v @ y) * v

    return LinearOperator((n, n), matvec=matvec, rmatvec=matvec, dtype=float)


def estimate_M_norm(
    op,
    mu: float,
    v: np.ndarray,
    tol: Optional[float] = None,
    cap: Optional[int] = None,
    seed=None,
) -> float:
    deflated = deflated_operator(op, mu, v)
    trial = deflated @ _start_vector(deflated.shape[0], seed)
    if np.linalg.norm(trial) <= 1e-12 * max(abs(mu), 1.0):
        return 0.0
    theta, _, _ = leading_eigenpair(deflated, which="LM", tol=tol, cap=cap, seed=seed)
    return abs(theta)


def decompose(op: DominatingOperator, tol: Optional[float] = None, seed=None) -> SpectralDecomposition:
    mu, v = top_eigenpair(op, tol=tol, seed=seed)
    residual = float(np.linalg.norm(op.apply(v) - mu * v))
    m_norm = estimate_M_norm(op, mu, v, tol=tol, seed=seed)
    logger.info("spectral decomposition mu=%.4f |M|=%.4f residual=%.2e", mu, m_norm, residual)
    return SpectralDecomposition(mu=mu, v=v, m_norm=m_norm, residual=residual)


def summarize(decomposition: SpectralDecomposition, params: Params) -> SpectralSummary:
    n, p = params.n, params.p
    return SpectralSummary(
        mu=decomposition.mu,
        v_inf=decomposition.v_inf,
        m_norm=decomposition.m_norm,
        residual=decomposition.residual,
        mu_ratio=decomposition.mu / (2.0 * p * n),
        v_inf_bound=1.0 / (params.delta * math.sqrt(n)),
        m_norm_bound=6.0 * math.sqrt(params.r * p * n),
    )


WalkSource = Union[ColoredGraph, DominatingOperator, sparse.spmatrix]


def _walk_matrix(source: WalkSource) -> sparse.csr_matrix:
    if isinstance(source, ColoredGraph):
        return source.union_matrix()
    if isinstance(source, DominatingOperator):
        return source.matrix
    return sparse.csr_matrix(source, dtype=np.int64)


def _apply_exact(matrix: sparse.csr_matrix, x: list) -> list:
    indptr, indices, data = matrix.indptr, matrix.indices, matrix.data
    return [
        sum(int(data[k]) * x[indices[k]] for k in range(indptr[v], indptr[v + 1]))
        for v in range(matrix.shape[0])
    ]


def count_walks_exact(source: WalkSource, J: Iterable[int], length: int) -> int:
    """Ordered walks x_0 .. x_length with both ends in J, weighted by the source's entries."""
    if length < 1:
        raise PreconditionError("walk length must be at least 1")
    J = sorted(set(J))
    if not J:
        raise PreconditionError("J must be non-empty")
    matrix = _walk_matrix(source)
    row_weight = int(np.max(np.asarray(abs(matrix).sum(axis=1)))) if matrix.nnz else 0
    x = np.zeros(matrix.shape[0], dtype=np.int64)
    x[J] = 1
    exact: Optional[list] = None
    for _ in range(length):
        if exact is None and int(x.max(initial=0)) * max(row_weight, 1) >= INT64_HEADROOM:
            logger.debug("walk counts near int64 range, continuing with Python integers")
            exact = [int(value) for value in x]
        if exact is None:
            x = matrix @ x
        else:
            exact = _apply_exact(matrix, exact)
    if exact is not None:
        return sum(exact[v] for v in J)
    return int(x[J].sum())


def walk_bound(
    params: Params,
    J_size: int,
    decomposition: Optional[SpectralDecomposition] = None,
    J: Optional[Iterable[int]] = None,
) -> Tuple[float, Optional[float]]:
    """Closed-form bound and, given a decomposition and J, the spectral intermediate."""
    ell, n, p = params.ell, params.n, params.p
    closed = params.delta ** -2 * 2.0 ** ell * p ** (ell - 1) * float(n) ** (ell - 2) * J_size ** 2
    intermediate = None
    if decomposition is not None and J is not None:
        J = sorted(set(J))
        overlap = float(decomposition.v[J].sum())
        intermediate = (
            decomposition.mu ** (ell - 1) * overlap ** 2
            + len(J) * decomposition.m_norm ** (ell - 1)
        )
    return closed, intermediate


def operator_for(instance) -> DominatingOperator:
    return dominating_operator(instance.red_base, instance.blue_base, instance.partitions)


