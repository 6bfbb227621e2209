"""Truncated Personalized PageRank: exact dense oracle and the factorised approximation."""
import math
from dataclasses import dataclass

import numpy as np

from .bksvd import bksvd, dense_svd_small, exact_svd
from .errors import CapExceededError, ConfigError
from .graph import transition_multiply

EXACT_PPR_MAX_NODES = 5000
TAIL_TOLERANCE = 1e-12


@dataclass
class EmbeddingPair:
    """Forward embeddings ``X`` and backward embeddings ``Y`` (both n x k')."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        if self.X.shape != self.Y.shape or self.X.ndim != 2:
            raise ValueError(f"X and Y must be equal-shape matrices, got {self.X.shape} and {self.Y.shape}")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.Y))):
            raise ValueError("embeddings contain non-finite entries")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def dim(self):
        return self.X.shape[1]

    def scores(self):
        """Dense ``X @ Y.T`` (test scale only)."""
        return self.X @ self.Y.T


@dataclass
class PprMatrix:
    values: np.ndarray
    alpha: float
    L: int
    include_self_term: bool = True


def default_truncation(alpha, tol=TAIL_TOLERANCE):
    """Smallest L with ``(1 - alpha)^(L+1) < tol``."""
    _check_alpha(alpha)
    L = max(0, math.ceil(math.log(tol) / math.log(1.0 - alpha)) - 1)
    while (1.0 - alpha) ** (L + 1) >= tol:
        L += 1
    while L > 0 and (1.0 - alpha) ** L < tol:
        L -= 1
    return L


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha={alpha} must lie in (0, 1)")


def exact_ppr(g, alpha=0.15, L=None, include_self_term=True, max_nodes=EXACT_PPR_MAX_NODES):
    """Dense ``sum_{i=0..L} alpha (1-alpha)^i P^i`` built by repeated ``P @ block``.

    With ``include_self_term=False`` the ``i = 0`` term is dropped, giving the
    series that starts at one hop.
    """
    _check_alpha(alpha)
    if g.n > max_nodes:
        raise CapExceededError(f"exact_ppr materialises n x n; n={g.n} exceeds cap {max_nodes}")
    if L is None:
        L = default_truncation(alpha)
    if L < 0:
        raise ConfigError("L must be >= 0")
    term = np.eye(g.n)
    total = alpha * term if include_self_term else np.zeros((g.n, g.n))
    coef = alpha
    for _ in range(L):
        term = transition_multiply(g, term)
        coef *= 1.0 - alpha
        total += coef * term
    return PprMatrix(values=total, alpha=alpha, L=L, include_self_term=include_self_term)


def approx_ppr(g, k, alpha=0.15, ell1=20, eps=0.2, seed=0, svd="bksvd"):
    """Factorised truncated PPR: returns ``EmbeddingPair`` with ``X Yᵀ ≈ Π'``.

    ``svd="exact"`` swaps the randomized factorisation for the exact
    rank-``k`` SVD of the dense adjacency matrix (test scale).
    """
    _check_alpha(alpha)
    if k < 1:
        raise ConfigError("k' must be >= 1")
    if ell1 < 1:
        raise ConfigError("ell1 must be >= 1")
    if not 0.0 < eps < 1.0:
        raise ConfigError(f"eps={eps} must lie in (0, 1)")
    if svd == "bksvd":
        f = bksvd(g, k, eps, seed=seed)
    elif svd == "exact":
        f = exact_svd(g, k)
    else:
        raise ConfigError(f"unknown svd method {svd!r}")
    root = np.sqrt(np.maximum(f.sigma, 0.0))
    X1 = g.inv_d_out[:, None] * (f.U * root)
    Y = f.V * root
    X = X1.copy()
    for _ in range(2, ell1 + 1):
        X = (1.0 - alpha) * transition_multiply(g, X) + X1
    X *= alpha * (1.0 - alpha)
    return EmbeddingPair(X=X, Y=Y)


def approximation_error_bound(g, k, alpha=0.15, ell1=20, eps=0.2, max_nodes=EXACT_PPR_MAX_NODES):
    """Entrywise and row-sum error bounds for ``approx_ppr`` against ``Π``.

    ``sigma`` is the (k+1)-th singular value of A from a dense SVD; it is 0
    when ``k >= n``.
    """
    _check_alpha(alpha)
    if g.n > max_nodes:
        raise CapExceededError(f"dense SVD oracle needs n <= {max_nodes}, got {g.n}")
    s = dense_svd_small(g.to_dense())[1] if g.n else np.zeros(0)
    sigma = float(s[k]) if k < len(s) else 0.0
    decay = 1.0 - alpha
    svd_part = (1.0 + eps) * sigma * decay * (1.0 - decay ** ell1)
    tail = decay ** (ell1 + 1)
    return svd_part + tail, math.sqrt(g.n) * svd_part + tail
