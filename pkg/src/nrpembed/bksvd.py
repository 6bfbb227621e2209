"""Randomized block Krylov SVD (Musco & Musco style) over a linear operator."""
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from . import _rng
from .errors import CapExceededError, ConfigError

# Largest r*c a dense SVD is allowed to see. Covers the Krylov projection at
# n=1e5 with a few hundred basis columns, and every test oracle.
DENSE_SVD_MAX_ENTRIES = 200_000_000

DEFAULT_OVERSAMPLE = 8
DEFAULT_DEPTH_CONST = 1.0
MIN_DEPTH = 4


@dataclass
class SvdFactors:
    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    @property
    def rank(self):
        return len(self.sigma)

    def reconstruct(self):
        return (self.U * self.sigma) @ self.V.T


def dense_svd_small(M, max_entries=DENSE_SVD_MAX_ENTRIES):
    """Thin SVD ``M = U @ diag(s) @ Vt`` of a modest dense matrix.

    Returns ``(U, s, Vt)`` with ``s`` non-increasing.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("dense_svd_small expects a 2-D matrix")
    if M.size > max_entries:
        raise CapExceededError(f"dense SVD of {M.shape[0]}x{M.shape[1]} exceeds {max_entries} entries")
    if not np.all(np.isfinite(M)):
        raise ValueError("dense_svd_small: matrix has non-finite entries")
    return np.linalg.svd(M, full_matrices=False)


def krylov_depth(n, eps, c=DEFAULT_DEPTH_CONST, min_depth=MIN_DEPTH):
    """Number of Krylov blocks ``q = ceil(c * log(n) / sqrt(eps))``, at least ``min_depth``."""
    return max(min_depth, math.ceil(c * math.log(max(n, 2)) / math.sqrt(eps)))


def _as_operator(op):
    if isinstance(op, LinearOperator):
        return op
    if hasattr(op, "as_operator"):
        return op.as_operator()
    if sp.issparse(op):
        return aslinearoperator(op.tocsr())
    return aslinearoperator(np.asarray(op, dtype=np.float64))


# Cholesky QR is used while the block's Gram matrix is this well conditioned
CHOLQR_MIN_PIVOT_RATIO = 1e-5


def _orth(M):
    """Orthonormal basis of a tall thin block.

    Two rounds of Cholesky QR (all GEMM), falling back to Householder QR
    when the block is close to rank deficient.
    """
    W = M
    for _ in range(2):
        try:
            R = np.linalg.cholesky(W.T @ W).T
        except np.linalg.LinAlgError:
            return np.linalg.qr(M)[0]
        d = np.abs(np.diag(R))
        if d.min() <= CHOLQR_MIN_PIVOT_RATIO * d.max():
            return np.linalg.qr(M)[0]
        W = W @ np.linalg.inv(R)
    return W


def _orth_against(W, prefix):
    """Orthonormalise ``W`` against the orthonormal columns of ``prefix``; two Gram-Schmidt rounds."""
    for _ in range(2):
        W = W - prefix @ (prefix.T @ W)
        W = _orth(W)
    return W


def _fix_signs(U, V):
    # largest-magnitude entry of each U column made nonnegative
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, V * signs


def bksvd(op, k, eps=0.2, seed=0, *, depth=None, oversample=DEFAULT_OVERSAMPLE,
          depth_const=DEFAULT_DEPTH_CONST, min_depth=MIN_DEPTH):
    """Rank-``k`` approximate SVD of ``op`` by block Krylov iteration.

    ``op`` may be a Graph (its adjacency operator), a dense array, a scipy
    sparse matrix or a ``LinearOperator`` providing ``matmat``/``rmatmat``.
    A Gaussian block of width ``k + oversample`` seeds the Krylov sequence
    ``A G, (A Aᵀ) A G, ...``. Each new block is orthonormalised against all
    earlier ones before the next product, so the blocks together form an
    orthonormal basis ``Q`` of the Krylov space. The top-``k`` singular
    subspace of ``Qᵀ A`` is taken from its ``K x K`` Gram matrix and refined
    by an exact thin SVD of ``Aᵀ Q Ū``.
    """
    A = _as_operator(op)
    n_rows, n_cols = A.shape
    if not 1 <= k <= min(n_rows, n_cols):
        raise ConfigError(f"k={k} must be in [1, {min(n_rows, n_cols)}]")
    if not 0 < eps < 1:
        raise ConfigError(f"eps={eps} must lie in (0, 1)")
    q = depth if depth is not None else krylov_depth(n_rows, eps, depth_const, min_depth)
    if q < 1:
        raise ConfigError("Krylov depth must be >= 1")
    rng = _rng.stream(seed, "svd")

    width = min(k + oversample, n_cols)
    G = rng.standard_normal((n_cols, width))
    if width * q >= n_rows:
        # the Krylov space can span everything; the identity basis is exact and stable
        Q = np.eye(n_rows)
    else:
        Q = np.empty((n_rows, width * q), order="F")
        Q[:, :width] = _orth(A.matmat(G))
        for i in range(1, q):
            prev = Q[:, (i - 1) * width:i * width]
            Q[:, i * width:(i + 1) * width] = _orth_against(A.matmat(A.rmatmat(prev)), Q[:, :i * width])

    # Rayleigh-Ritz on QᵀA through its small Gram matrix, then an exact thin
    # SVD of the chosen rank-k slice: Uk Ukᵀ A = (Uk Z) S Wᵀ
    C = A.rmatmat(Q)
    evals, evecs = np.linalg.eigh(C.T @ C)
    top = evecs[:, np.argsort(evals)[::-1][:k]]
    del C
    Uk = Q @ top
    Wm, s, Zt = dense_svd_small(A.rmatmat(Uk))
    U = Uk @ Zt.T
    V = Wm
    U, V = _fix_signs(U, V)
    return SvdFactors(U=np.ascontiguousarray(U), sigma=s.copy(), V=np.ascontiguousarray(V))


def exact_svd(op, k):
    """Deterministic rank-``k`` truncation of the exact SVD (materialises ``op``)."""
    A = _as_operator(op)
    M = A.matmat(np.eye(A.shape[1]))
    U, s, Vt = dense_svd_small(M)
    if not 1 <= k <= len(s):
        raise ConfigError(f"k={k} must be in [1, {len(s)}]")
    U, V = _fix_signs(U[:, :k], Vt[:k].T)
    return SvdFactors(U=U, sigma=s[:k].copy(), V=V)


def spectral_norm_estimate(op, factors=None, iters=50, seed=0):
    """Power-iteration estimate of ``‖A - U Σ Vᵀ‖₂`` (or ``‖A‖₂`` without factors)."""
    A = _as_operator(op)
    n_rows, n_cols = A.shape

    def mv(x):
        y = A.matvec(x)
        if factors is not None:
            y = y - factors.U @ (factors.sigma * (factors.V.T @ x))
        return y

    def rmv(y):
        x = A.rmatvec(y)
        if factors is not None:
            x = x - factors.V @ (factors.sigma * (factors.U.T @ y))
        return x

    rng = _rng.stream(seed, "spectral-norm")
    x = rng.standard_normal(n_cols)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        y = mv(x)
        x = rmv(y)
        nx = np.linalg.norm(x)
        if nx == 0.0:
            return 0.0
        est = math.sqrt(nx)
        x /= nx
    return est
