"""Sparse directed graphs: edge-list ingestion, degrees and block products."""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from . import _rng
from .errors import ConfigError, IngestionError

COMMENT_PREFIXES = ("#", "%")


@dataclass
class EdgeList:
    """Raw edges before graph construction.

    ``labels`` is set when external node names were remapped to dense ids;
    ``labels[i]`` is the external name of node ``i``. ``lines`` optionally
    records the source line number of each pair for error reporting.
    """

    pairs: np.ndarray
    directed: bool = True
    n: int | None = None
    labels: list | None = None
    lines: np.ndarray | None = None

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.int64)
        if pairs.size == 0:
            pairs = pairs.reshape(0, 2)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise IngestionError("edge pairs must have shape (m, 2)")
        self.pairs = pairs


def read_edge_list(path, directed=True, n=None, relabel=False):
    """Parse a whitespace-separated ``u v`` edge file.

    Lines starting with ``#`` or ``%`` and blank lines are skipped. Extra
    columns (e.g. weights) are ignored. Without ``relabel`` every id must be
    a nonnegative integer; with it, arbitrary tokens are mapped to dense ids
    in order of first appearance.
    """
    us, vs, lines = [], [], []
    index = {}
    labels = []

    def node_id(tok, lineno):
        if relabel:
            if tok not in index:
                index[tok] = len(labels)
                labels.append(tok)
            return index[tok]
        try:
            val = int(tok)
        except ValueError:
            raise IngestionError(f"{path}:{lineno}: node id {tok!r} is not an integer") from None
        if val < 0:
            raise IngestionError(f"{path}:{lineno}: negative node id {val}")
        return val

    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith(COMMENT_PREFIXES):
                continue
            parts = line.split()
            if len(parts) < 2:
                raise IngestionError(f"{path}:{lineno}: expected 'u v', got {line!r}")
            us.append(node_id(parts[0], lineno))
            vs.append(node_id(parts[1], lineno))
            lines.append(lineno)

    pairs = np.column_stack([np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64)])
    if relabel and n is None:
        n = len(labels)
    return EdgeList(pairs, directed=directed, n=n, labels=labels if relabel else None,
                    lines=np.asarray(lines, dtype=np.int64))


def write_edge_list(g, path):
    """Write every directed edge of ``g`` as one ``u v`` line."""
    with open(path, "w") as fh:
        fh.write(f"# n={g.n} m={g.m}\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


@dataclass(eq=False)
class Graph:
    """Immutable directed graph stored as out- and in-CSR adjacency.

    Undirected inputs are stored as two opposing directed edges. ``A`` is
    0/1: duplicate edges are merged at construction; self-loops are kept.
    """

    n: int
    out_csr: sp.csr_matrix
    in_csr: sp.csr_matrix
    directed: bool = True
    labels: list | None = None
    d_out: np.ndarray = field(init=False)
    d_in: np.ndarray = field(init=False)

    def __post_init__(self):
        self.d_out = np.diff(self.out_csr.indptr).astype(np.int64)
        self.d_in = np.diff(self.in_csr.indptr).astype(np.int64)
        with np.errstate(divide="ignore"):
            inv = 1.0 / self.d_out
        inv[self.d_out == 0] = 0.0
        self._inv_d_out = inv
        for arr in (self.d_out, self.d_in, self._inv_d_out):
            arr.flags.writeable = False

    @property
    def m(self):
        return int(self.out_csr.nnz)

    @property
    def inv_d_out(self):
        """1/d_out with zeros on dangling nodes."""
        return self._inv_d_out

    def out_neighbors(self, u):
        return self.out_csr.indices[self.out_csr.indptr[u]:self.out_csr.indptr[u + 1]]

    def in_neighbors(self, v):
        return self.in_csr.indices[self.in_csr.indptr[v]:self.in_csr.indptr[v + 1]]

    def edges(self):
        """All directed edges as an (m, 2) array in row-major order."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.d_out)
        return np.column_stack([src, self.out_csr.indices.astype(np.int64)])

    def has_edge(self, u, v):
        nbrs = self.out_neighbors(u)
        i = np.searchsorted(nbrs, v)
        return bool(i < len(nbrs) and nbrs[i] == v)

    def edge_keys(self):
        """Sorted ``u * n + v`` codes of all edges, for vectorised membership tests."""
        e = self.edges()
        return e[:, 0] * self.n + e[:, 1]

    def to_dense(self):
        return self.out_csr.toarray().astype(np.float64)

    def as_operator(self):
        """``scipy`` LinearOperator view of A (A·M and Aᵀ·M via the CSR views)."""
        return LinearOperator(
            (self.n, self.n),
            matvec=lambda x: adjacency_multiply(self, x.reshape(-1, 1)).ravel(),
            rmatvec=lambda x: adjacency_multiply(self, x.reshape(-1, 1), transposed=True).ravel(),
            matmat=lambda M: adjacency_multiply(self, M),
            rmatmat=lambda M: adjacency_multiply(self, M, transposed=True),
            dtype=np.float64,
        )

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and self.directed == other.directed
                and np.array_equal(self.out_csr.indptr, other.out_csr.indptr)
                and np.array_equal(self.out_csr.indices, other.out_csr.indices))

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"Graph(n={self.n}, m={self.m}, {kind})"


def _csr_from_keys(keys, n):
    rows = keys // n
    cols = keys % n
    data = np.ones(len(keys), dtype=np.float64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    np.cumsum(indptr, out=indptr)
    # keys are sorted, so cols are sorted within each row
    return sp.csr_matrix((data, cols.astype(np.int32 if n < 2**31 else np.int64), indptr), shape=(n, n))


def from_edges(edges, directed=None):
    """Build a :class:`Graph` from an :class:`EdgeList` (or an (m, 2) array).

    Undirected input adds both orientations of every edge. Duplicates are
    merged. ``n`` defaults to ``max id + 1``.
    """
    if not isinstance(edges, EdgeList):
        edges = EdgeList(np.asarray(edges), directed=True if directed is None else directed)
    elif directed is not None:
        edges = EdgeList(edges.pairs, directed=directed, n=edges.n, labels=edges.labels, lines=edges.lines)
    pairs = edges.pairs
    if pairs.size and pairs.min() < 0:
        bad = int(np.argmax((pairs < 0).any(axis=1)))
        raise IngestionError(f"negative node id on {_where(edges, bad)}")
    n = edges.n
    if n is None:
        n = int(pairs.max()) + 1 if len(pairs) else 0
    elif len(pairs) and pairs.max() >= n:
        bad = int(np.argmax((pairs >= n).any(axis=1)))
        u, v = pairs[bad]
        raise IngestionError(f"node id out of range on {_where(edges, bad)}: ({u}, {v}) with n={n}")

    if not edges.directed:
        pairs = np.concatenate([pairs, pairs[:, ::-1]])
    keys = np.unique(pairs[:, 0] * n + pairs[:, 1]) if len(pairs) else np.zeros(0, dtype=np.int64)
    out_csr = _csr_from_keys(keys, n)
    rev = np.sort((keys % n) * n + keys // n) if len(keys) else keys
    in_csr = _csr_from_keys(rev, n)
    return Graph(n=n, out_csr=out_csr, in_csr=in_csr, directed=edges.directed, labels=edges.labels)


def _where(edges, i):
    if edges.lines is not None and i < len(edges.lines):
        return f"line {int(edges.lines[i])}"
    return f"edge #{i}"


def _check_rows(g, M):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    if M.ndim != 2 or M.shape[0] != g.n:
        raise ValueError(f"expected a matrix with {g.n} rows, got shape {M.shape}")
    return M


def adjacency_multiply(g, M, transposed=False):
    """Return ``A @ M`` (or ``A.T @ M``) for a dense block ``M``."""
    M = _check_rows(g, M)
    A = g.in_csr if transposed else g.out_csr
    return np.asarray(A @ M)


def transition_multiply(g, M):
    """Return ``P @ M`` where ``P = D⁻¹A``; dangling rows of P are zero."""
    M = _check_rows(g, M)
    return g.inv_d_out[:, None] * np.asarray(g.out_csr @ M)


def sample_pairs(n, count, rng, exclude_self=True):
    """Draw ``count`` distinct ordered pairs ``(u, v)`` uniformly without replacement."""
    slots = n * (n - 1) if exclude_self else n * n
    if count > slots:
        raise ConfigError(f"cannot draw {count} distinct pairs from {slots} slots")
    s = rng.choice(slots, size=count, replace=False)
    if not exclude_self:
        return np.column_stack([s // n, s % n]).astype(np.int64)
    u = s // (n - 1)
    r = s % (n - 1)
    v = r + (r >= u)
    return np.column_stack([u, v]).astype(np.int64)


def generate_erdos_renyi(n, m_target, seed=0):
    """Directed simple G(n, m): exactly ``m_target`` distinct non-loop edges."""
    if n < 0 or m_target < 0:
        raise ConfigError("n and m_target must be nonnegative")
    if m_target > n * (n - 1):
        raise ConfigError(f"m_target={m_target} exceeds n(n-1)={n * (n - 1)}")
    rng = _rng.stream(seed, "erdos-renyi")
    pairs = sample_pairs(n, m_target, rng) if m_target else np.zeros((0, 2), dtype=np.int64)
    return from_edges(EdgeList(pairs, directed=True, n=n))
