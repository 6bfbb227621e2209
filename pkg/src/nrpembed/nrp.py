"""End-to-end pipeline: factorised PPR, then degree-targeted node reweighting."""
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError
from .ppr import EmbeddingPair, approx_ppr
from .reweight import WeightState, update_bwd_weights, update_fwd_weights


@dataclass
class NrpConfig:
    k: int = 128
    alpha: float = 0.15
    ell1: int = 20
    ell2: int = 10
    epsilon: float = 0.2
    lam: float = 10.0
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 2:
            raise ConfigError(f"k must be an even integer >= 2, got {self.k}")
        if self.k % 2:
            raise ConfigError("k must be even")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.ell1 < 1:
            raise ConfigError(f"ell1 must be >= 1, got {self.ell1}")
        if self.ell2 < 0:
            raise ConfigError(f"ell2 must be >= 0, got {self.ell2}")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.lam < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")

    @property
    def half_dim(self):
        return self.k // 2

    def to_dict(self):
        return asdict(self)


@dataclass
class NrpResult:
    embedding: EmbeddingPair
    base: EmbeddingPair
    weights: WeightState


def initial_weights(g, lam):
    """Forward weights start at out-degree (floored at 1/n), backward at 1."""
    floor = 1.0 / g.n
    fwd = np.maximum(g.d_out.astype(np.float64), floor)
    return WeightState(fwd=fwd, bwd=np.ones(g.n), lam=float(lam))


def nrp_fit(g, cfg, init=None, epoch_callback=None):
    """Run the whole pipeline and keep the intermediate pieces.

    ``init`` overrides the starting weights. ``epoch_callback(epoch, state)``
    is called after the initialisation (epoch 0) and after every epoch.
    """
    if g.n < 1:
        raise ConfigError("graph must have at least one node")
    k = cfg.half_dim
    if k > g.n:
        raise ConfigError(f"k/2={k} exceeds the number of nodes ({g.n})")
    base = approx_ppr(g, k, alpha=cfg.alpha, ell1=cfg.ell1, eps=cfg.epsilon, seed=cfg.seed)
    w = init.copy() if init is not None else initial_weights(g, cfg.lam)
    w.lam = float(cfg.lam)
    if epoch_callback is not None:
        epoch_callback(0, w)
    for epoch in range(1, cfg.ell2 + 1):
        w = update_bwd_weights(g, base, w, seed=cfg.seed, stream_name=f"bwd-pass-{epoch}")
        w = update_fwd_weights(g, base, w, seed=cfg.seed, stream_name=f"fwd-pass-{epoch}")
        if epoch_callback is not None:
            epoch_callback(epoch, w)
    emb = EmbeddingPair(X=w.fwd[:, None] * base.X, Y=w.bwd[:, None] * base.Y)
    return NrpResult(embedding=emb, base=base, weights=w)


def nrp_embed(g, cfg):
    """Forward and backward embeddings (each ``n x k/2``) for graph ``g``."""
    return nrp_fit(g, cfg).embedding


def score(emb, u, v):
    """Directed proximity ``X_u · Y_v``."""
    n = emb.n
    for node in (u, v):
        if not 0 <= node < n:
            raise IndexError(f"node id {node} out of range [0, {n})")
    return float(emb.X[u] @ emb.Y[v])


def strength_residuals(g, emb):
    """Per-node ``sum_{v != u} score(u, v) - d_out(u)`` (dense, test scale)."""
    S = emb.X @ emb.Y.T
    np.fill_diagonal(S, 0.0)
    return S.sum(axis=1) - g.d_out
