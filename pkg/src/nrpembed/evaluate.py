"""Link-prediction and graph-reconstruction harnesses."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from . import _rng
from .errors import ConfigError, SamplingError
from .graph import EdgeList, from_edges, sample_pairs

FULL_CANDIDATES_MAX_NODES = 1500
CANDIDATE_SAMPLE_FRACTION = 0.01
NEGATIVE_RETRY_FACTOR = 50


@dataclass
class LinkSplit:
    train: object
    test_pos: np.ndarray
    test_neg: np.ndarray


@dataclass
class MetricReport:
    auc: float | None = None
    precision_at_k: dict = field(default_factory=dict)

    def rows(self):
        out = []
        if self.auc is not None:
            out.append(("auc", "-", self.auc))
        for k in sorted(self.precision_at_k):
            out.append(("precision@k", str(k), self.precision_at_k[k]))
        return out

    def to_tsv(self):
        return "".join(f"{m}\t{p}\t{v:.9g}\n" for m, p, v in self.rows())

    def summary(self):
        parts = []
        if self.auc is not None:
            parts.append(f"AUC = {self.auc:.4f}")
        parts += [f"precision@{k} = {v:.4f}" for k, v in sorted(self.precision_at_k.items())]
        return ", ".join(parts)


def _edge_units(g):
    """Edges as removable units: one row per directed edge, or per undirected pair."""
    e = g.edges()
    if g.directed:
        return e
    return e[e[:, 0] <= e[:, 1]]


def split_edges(g, remove_ratio=0.3, seed=0, min_edges=10):
    """Hold out ``remove_ratio`` of the edges plus as many sampled non-edges.

    Undirected edges are removed as a unit and reported once as ``(u, v)``
    with ``u <= v``. Negatives are distinct pairs ``u != v`` that are not
    edges of ``g`` in the queried direction; for undirected graphs they are
    canonicalised to ``u < v`` as well.
    """
    if not 0.0 <= remove_ratio <= 1.0:
        raise ConfigError(f"remove_ratio must lie in [0, 1], got {remove_ratio}")
    if g.m < min_edges:
        raise ConfigError(f"graph has {g.m} edges; at least {min_edges} are needed for a split")
    units = _edge_units(g)
    n_test = int(round(remove_ratio * len(units)))
    rng = _rng.stream(seed, "split")
    pick = np.sort(rng.choice(len(units), size=n_test, replace=False)) if n_test else np.zeros(0, dtype=np.int64)
    test_pos = units[pick]
    keep = np.ones(len(units), dtype=bool)
    keep[pick] = False
    train = from_edges(EdgeList(units[keep], directed=g.directed, n=g.n, labels=g.labels))
    test_neg = sample_negatives(g, n_test, _rng.stream(seed, "negatives"))
    return LinkSplit(train=train, test_pos=test_pos, test_neg=test_neg)


def sample_negatives(g, count, rng):
    """Distinct non-edge pairs drawn uniformly by rejection."""
    if count == 0:
        return np.zeros((0, 2), dtype=np.int64)
    n = g.n
    if g.directed:
        pool = n * (n - 1) - int(np.sum(g.edges()[:, 0] != g.edges()[:, 1]))
    else:
        u = _edge_units(g)
        pool = n * (n - 1) // 2 - int(np.sum(u[:, 0] != u[:, 1]))
    if pool < count:
        raise SamplingError(f"need {count} negative pairs but only {pool} non-edges exist")
    edge_keys = g.edge_keys()
    chosen = set()
    out = []
    max_draws = NEGATIVE_RETRY_FACTOR * count + 1000
    draws = 0
    while len(out) < count:
        if draws >= max_draws:
            raise SamplingError(f"negative sampling gave up after {draws} draws ({len(out)}/{count} found)")
        batch = max(64, 2 * (count - len(out)))
        uv = rng.integers(0, n, size=(batch, 2))
        draws += batch
        for a, b in uv:
            if a == b:
                continue
            if not g.directed and a > b:
                a, b = b, a
            key = int(a) * n + int(b)
            if key in chosen:
                continue
            i = np.searchsorted(edge_keys, key)
            if i < len(edge_keys) and edge_keys[i] == key:
                continue
            chosen.add(key)
            out.append((a, b))
            if len(out) == count:
                break
    return np.asarray(out, dtype=np.int64)


def auc(pos_scores, neg_scores):
    """Mann-Whitney AUC with ties counted as one half."""
    pos = np.asarray(pos_scores, dtype=np.float64).ravel()
    neg = np.asarray(neg_scores, dtype=np.float64).ravel()
    if pos.size == 0 or neg.size == 0:
        raise ValueError("auc needs at least one positive and one negative score")
    ranks = rankdata(np.concatenate([pos, neg]))
    u = ranks[: pos.size].sum() - pos.size * (pos.size + 1) / 2.0
    return float(u / (pos.size * neg.size))


def pair_scores(emb, pairs):
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return np.einsum("ij,ij->i", emb.X[pairs[:, 0]], emb.Y[pairs[:, 1]])


def link_prediction_auc(emb, split):
    return MetricReport(auc=auc(pair_scores(emb, split.test_pos), pair_scores(emb, split.test_neg)))


def candidate_pairs(n, seed=0, max_full=FULL_CANDIDATES_MAX_NODES, fraction=CANDIDATE_SAMPLE_FRACTION):
    """All ordered pairs ``u != v`` for small graphs, otherwise a seeded sample.

    The sample holds ``ceil(fraction * n(n-1)/2)`` distinct ordered pairs.
    """
    if n <= max_full:
        u, v = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        mask = u != v
        return np.column_stack([u[mask], v[mask]]).astype(np.int64)
    count = math.ceil(fraction * n * (n - 1) / 2)
    pairs = sample_pairs(n, count, _rng.stream(seed, "candidates"))
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]


def precision_at_k(emb, g, candidates, ks):
    """Fraction of true edges among the top-K scored candidates, for each K.

    Ties in score are broken by ``(u, v)`` ascending.
    """
    cand = np.asarray(candidates, dtype=np.int64).reshape(-1, 2)
    if len(cand) == 0:
        raise ValueError("candidate set is empty")
    ks = [int(k) for k in ks]
    for k in ks:
        if not 1 <= k <= len(cand):
            raise ConfigError(f"K={k} out of range [1, {len(cand)}]")
    s = pair_scores(emb, cand)
    order = np.lexsort((cand[:, 1], cand[:, 0], -s))
    keys = cand[order, 0] * g.n + cand[order, 1]
    edge_keys = g.edge_keys()
    idx = np.searchsorted(edge_keys, keys)
    idx[idx >= len(edge_keys)] = 0
    hit = (edge_keys[idx] == keys) if len(edge_keys) else np.zeros(len(keys), dtype=bool)
    cum = np.cumsum(hit)
    return MetricReport(precision_at_k={k: float(cum[k - 1] / k) for k in ks})
