"""Coordinate-descent learning of forward/backward node weights.

Both directions share one kernel. A sweep updates the weights ``w`` that
scale the ``own`` embedding rows, while the ``partner`` rows and their
weights ``f`` stay fixed:

* backward sweep: own = Y, w = bwd, partner = X, f = fwd, target = d_in,
  partner degree = d_out;
* forward sweep: own = X, w = fwd, partner = Y, f = bwd, target = d_out,
  partner degree = d_in.
"""
from dataclasses import dataclass, field

import numba
import numpy as np

from . import _rng
from .errors import CapExceededError

NAIVE_MAX_NODES = 2000

# b1 from the diagonal surrogate (production)
MODE_FAST = 0
# b1 by direct summation, everything else as in the fast path
MODE_EXACT_B1 = 1
# exact b1 and a1/a3 without the u = t terms: the true coordinate minimiser
MODE_EXACT = 2
MODES = {"fast": MODE_FAST, "exact_b1": MODE_EXACT_B1, "exact": MODE_EXACT}


@dataclass
class WeightState:
    fwd: np.ndarray
    bwd: np.ndarray
    lam: float = 10.0

    def copy(self):
        return WeightState(self.fwd.copy(), self.bwd.copy(), self.lam)


@dataclass
class Accelerators:
    xi: np.ndarray
    chi: np.ndarray
    rho1: np.ndarray
    rho2: np.ndarray
    Lambda: np.ndarray
    phi: np.ndarray

    def copy(self):
        return Accelerators(*(getattr(self, f).copy() for f in ("xi", "chi", "rho1", "rho2", "Lambda", "phi")))


@dataclass
class CoordinateTerms:
    a1: float
    a2: float
    a3: float
    b1: float
    b2: float

    def update(self, n, lam):
        """Clamped minimiser ``max(1/n, (a1 + a2 - a3) / (b1 + b2 + lam))``."""
        return _clamped_update(self.a1, self.a2, self.a3, self.b1, self.b2, lam, n)


def _roles(g, emb, w, direction):
    if direction == "bwd":
        return emb.Y, w.bwd, emb.X, w.fwd, g.d_in, g.d_out
    if direction == "fwd":
        return emb.X, w.fwd, emb.Y, w.bwd, g.d_out, g.d_in
    raise ValueError(f"direction must be 'bwd' or 'fwd', got {direction!r}")


def _check_cap(n, max_nodes):
    if n > max_nodes:
        raise CapExceededError(f"naive O(n^2) routine capped at n={max_nodes}, got n={n}")


@numba.njit(cache=True)
def _clamped_update(a1, a2, a3, b1, b2, lam, n):
    floor = 1.0 / n
    denom = b1 + b2 + lam
    if denom == 0.0:
        return floor
    val = (a1 + a2 - a3) / denom
    return val if val > floor else floor


# ---------------------------------------------------------------------------
# naive objective and coordinate terms (test scale)

def objective(g, emb, w, max_nodes=NAIVE_MAX_NODES):
    """Degree-calibration objective with squared residuals and L2 penalty.

    Sums over in-strength residuals, out-strength residuals (both excluding
    self pairs) and ``lam * sum(fwd^2 + bwd^2)``.
    """
    _check_cap(g.n, max_nodes)
    S = (w.fwd[:, None] * emb.X) @ (emb.Y * w.bwd[:, None]).T
    np.fill_diagonal(S, 0.0)
    col = S.sum(axis=0) - g.d_in
    row = S.sum(axis=1) - g.d_out
    return float(col @ col + row @ row + w.lam * (w.fwd @ w.fwd + w.bwd @ w.bwd))


def _naive_terms(own, wown, partner, f, d_target, d_partner, t):
    n = own.shape[0]
    others = np.arange(n) != t
    B = own[t]
    g_u = f * (partner @ B)                       # f_u (F_u . B_t) for every u
    # S[u, v] = f_u (F_u . B_v) w_v, with the diagonal and column t removed
    S = (f[:, None] * partner) @ (own * wown[:, None]).T
    np.fill_diagonal(S, 0.0)
    S[:, t] = 0.0
    a1 = float(np.sum(d_partner * g_u))
    c = float(np.sum(g_u[others]))
    a2 = float(d_target[t] * c)
    a3 = float(np.sum(S.sum(axis=1) * g_u))
    b1 = float(np.sum(g_u[others] ** 2))
    b2 = c * c
    return CoordinateTerms(a1, a2, a3, b1, b2)


def naive_terms_bwd(g, emb, w, v, max_nodes=NAIVE_MAX_NODES):
    """Backward-weight terms for node ``v`` by direct summation of their definitions."""
    _check_cap(g.n, max_nodes)
    return _naive_terms(*_roles(g, emb, w, "bwd"), v)


def naive_terms_fwd(g, emb, w, u, max_nodes=NAIVE_MAX_NODES):
    """Forward-weight terms for node ``u`` by direct summation of their definitions."""
    _check_cap(g.n, max_nodes)
    return _naive_terms(*_roles(g, emb, w, "fwd"), u)


# ---------------------------------------------------------------------------
# accelerated path

def compute_accelerators(g, emb, w, direction):
    """Cached aggregates for one sweep direction, from scratch."""
    own, wown, partner, f, _, d_partner = _roles(g, emb, w, direction)
    fp = f[:, None] * partner
    xi = d_partner @ fp
    chi = fp.sum(axis=0)
    Lambda = fp.T @ fp
    phi = (fp * fp).sum(axis=0)
    rho1 = wown @ own
    diag = np.einsum("ij,ij->i", partner, own)
    rho2 = (f * f * wown * diag) @ partner
    return Accelerators(xi=xi, chi=chi, rho1=rho1, rho2=rho2, Lambda=Lambda, phi=phi)


@numba.njit(cache=True)
def _terms(t, own, wown, partner, f, d_target, d_partner, xi, chi, rho1, rho2, Lam, phi, mode):
    k = own.shape[1]
    a1 = 0.0
    c = 0.0
    fb = 0.0
    for r in range(k):
        a1 += xi[r] * own[t, r]
        c += (chi[r] - f[t] * partner[t, r]) * own[t, r]
        fb += partner[t, r] * own[t, r]
    a2 = d_target[t] * c
    b2 = c * c
    a3 = 0.0
    quad = 0.0
    for r in range(k):
        lr = 0.0
        for s in range(k):
            lr += Lam[r, s] * own[t, s]
        a3 += rho1[r] * lr
        quad += own[t, r] * lr
        a3 -= rho2[r] * own[t, r]
    a3 += -wown[t] * quad + wown[t] * fb * fb * f[t] * f[t]
    if mode == MODE_EXACT:
        # drop the u = t contributions to a1 and a3: they do not depend on w[t]
        g_t = f[t] * fb
        s_t = 0.0
        for r in range(k):
            s_t += partner[t, r] * (rho1[r] - wown[t] * own[t, r])
        s_t *= f[t]
        a1 -= d_partner[t] * g_t
        a3 -= s_t * g_t
    if mode != MODE_FAST:
        n = own.shape[0]
        b1 = 0.0
        for u in range(n):
            if u == t:
                continue
            dot = 0.0
            for r in range(k):
                dot += partner[u, r] * own[t, r]
            dot *= f[u]
            b1 += dot * dot
    else:
        b1 = 0.0
        for r in range(k):
            b1 += own[t, r] * own[t, r] * (phi[r] - f[t] * f[t] * partner[t, r] * partner[t, r])
        b1 *= k / 2.0
    return a1, a2, a3, b1, b2


@numba.njit(cache=True)
def _sweep(order, own, wown, partner, f, d_target, d_partner, lam,
           xi, chi, rho1, rho2, Lam, phi, mode):
    n = own.shape[0]
    k = own.shape[1]
    for idx in range(order.shape[0]):
        t = order[idx]
        a1, a2, a3, b1, b2 = _terms(t, own, wown, partner, f, d_target, d_partner,
                                    xi, chi, rho1, rho2, Lam, phi, mode)
        new = _clamped_update(a1, a2, a3, b1, b2, lam, n)
        delta = new - wown[t]
        wown[t] = new
        if delta != 0.0:
            fb = 0.0
            for r in range(k):
                fb += partner[t, r] * own[t, r]
            scale = delta * f[t] * f[t] * fb
            for r in range(k):
                rho1[r] += delta * own[t, r]
                rho2[r] += scale * partner[t, r]


@dataclass
class Sweep:
    """One direction of coordinate descent with live accelerators.

    ``step`` updates the listed nodes in order (Gauss-Seidel), writing into
    ``state`` and keeping ``acc.rho1``/``acc.rho2`` current. ``mode`` is one
    of ``"fast"`` (production), ``"exact_b1"`` or ``"exact"``; the latter two
    cost O(n k') per coordinate and exist for verification.
    """

    g: object
    emb: object
    state: WeightState
    direction: str
    mode: str = "fast"
    acc: Accelerators = field(init=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {sorted(MODES)}, got {self.mode!r}")
        self.acc = compute_accelerators(self.g, self.emb, self.state, self.direction)
        own, wown, partner, f, d_target, d_partner = _roles(self.g, self.emb, self.state, self.direction)
        for arr in (wown, f):
            if arr.dtype != np.float64 or not arr.flags.c_contiguous:
                raise TypeError("weight vectors must be contiguous float64 arrays")
        self._args = (np.ascontiguousarray(own, dtype=np.float64), wown,
                      np.ascontiguousarray(partner, dtype=np.float64), f,
                      np.ascontiguousarray(d_target, dtype=np.float64),
                      np.ascontiguousarray(d_partner, dtype=np.float64))

    def terms(self, t):
        a = self.acc
        return CoordinateTerms(*_terms(t, *self._args, a.xi, a.chi, a.rho1, a.rho2,
                                       a.Lambda, a.phi, MODES[self.mode]))

    def step(self, nodes):
        a = self.acc
        order = np.ascontiguousarray(np.atleast_1d(nodes), dtype=np.int64)
        _sweep(order, *self._args, float(self.state.lam),
               a.xi, a.chi, a.rho1, a.rho2, a.Lambda, a.phi, MODES[self.mode])

    def run(self, rng):
        self.step(rng.permutation(self.g.n))
        return self.state


def _pass(g, emb, w, seed, direction, mode, stream_name):
    state = WeightState(np.array(w.fwd, dtype=np.float64), np.array(w.bwd, dtype=np.float64), float(w.lam))
    return Sweep(g, emb, state, direction, mode=mode).run(_rng.stream(seed, stream_name))


def update_bwd_weights(g, emb, w, seed=0, mode="fast", stream_name="bwd-pass"):
    """One pass over all backward weights in seeded random order; returns a new state."""
    return _pass(g, emb, w, seed, "bwd", mode, stream_name)


def update_fwd_weights(g, emb, w, seed=0, mode="fast", stream_name="fwd-pass"):
    """One pass over all forward weights in seeded random order; returns a new state."""
    return _pass(g, emb, w, seed, "fwd", mode, stream_name)
