"""NMF, deep autoencoder-like NMF, and their self-paced weighted variants.

Every solver here is one multiplicative-update loop parameterised by a
weight matrix ``W``. ``W = None`` means all ones, which is how the plain
solvers (:func:`nmf_fit`, :func:`danmf_fit`, :func:`dnmf_fit`) are obtained
from the weighted ones. Shapes follow the community-detection convention:
``A`` is ``n x n``, ``U`` is ``n x k`` and the membership matrix ``V`` is
``k x n`` with one column per node.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import selfpace
from .errors import NumericalError, ValidationError
from .graph import Graph, LayerConfig, Partition
from .selfpace import PaceSchedule

log = logging.getLogger(__name__)

StepCallback = Callable[[str, list, np.ndarray], None]


@dataclass(frozen=True)
class SolverOptions:
    lam: float = 0.01
    max_inner_iters: int = 100
    pretrain_iters: int = 100
    tol: float = 1e-6
    epsilon: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.lam < 0:
            raise ValidationError("lambda must be >= 0")
        if not self.tol > 0 or not self.epsilon > 0:
            raise ValidationError("tol and epsilon must be positive")
        if self.max_inner_iters < 1 or self.pretrain_iters < 0:
            raise ValidationError("iteration budgets must be positive")


@dataclass
class FactorPair:
    U: np.ndarray
    V: np.ndarray

    def as_stack(self) -> "FactorStack":
        return FactorStack([self.U], self.V)


@dataclass
class FactorStack:
    layers: list
    Vp: np.ndarray

    @property
    def depth(self) -> int:
        return len(self.layers)

    def psi(self, i: Optional[int] = None) -> np.ndarray:
        """``U_1 @ ... @ U_i`` (all layers when ``i`` is None)."""
        layers = self.layers if i is None else self.layers[:i]
        out = layers[0]
        for u in layers[1:]:
            out = out @ u
        return out

    def shapes(self) -> list[tuple[int, int]]:
        return [u.shape for u in self.layers] + [self.Vp.shape]

    def copy(self) -> "FactorStack":
        return FactorStack([u.copy() for u in self.layers], self.Vp.copy())


@dataclass
class FitReport:
    loss_trace: list = field(default_factory=list)
    # per outer round: the weighted objective without f(W, gamma), and the unweighted one
    outer_trace: list = field(default_factory=list)
    raw_trace: list = field(default_factory=list)
    gamma_trace: list = field(default_factory=list)
    converged: bool = False
    iterations_used: int = 0

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations_used": self.iterations_used,
            "loss_trace": [float(x) for x in self.loss_trace],
            "outer_trace": [float(x) for x in self.outer_trace],
            "raw_trace": [float(x) for x in self.raw_trace],
            "gamma_trace": [float(x) for x in self.gamma_trace],
        }


def _check_finite(stage: str, *mats):
    for m in mats:
        if not np.all(np.isfinite(m)):
            bad = int(np.size(m) - np.count_nonzero(np.isfinite(m)))
            raise NumericalError(f"{stage}: {bad} non-finite entries in a {m.shape} factor")


def _init_uniform(rng, shape):
    # uniform on (0, 1]; an exact zero would be a fixed point of the updates
    return 1.0 - rng.random(shape)


def _reg_trace(V, A, deg):
    """``tr(V L V^T)`` with ``L = diag(deg) - A``."""
    return float(np.sum(V * (V * deg)) - np.sum(V * (V @ A)))


def _relative_change(prev, cur):
    return abs(prev - cur) / max(abs(prev), 1e-12)


# ---------------------------------------------------------------------------
# shallow NMF


def nmf_objective(A, U, V, W=None, gamma=None, lam=0.0, deg=None) -> float:
    """``sum W (A - UV)^2 + lam tr(V L V^T) + f(W, gamma)``.

    The self-paced term is included only when ``gamma`` is given.
    """
    R = (A - U @ V) ** 2
    total = float(np.sum(R if W is None else W * R))
    if lam:
        total += lam * _reg_trace(V, A, A.sum(axis=1) if deg is None else deg)
    if gamma is not None and W is not None:
        total += selfpace.regularizer_value(W, gamma)
    return total


def nmf_step(A, U, V, W=None, lam=0.0, deg=None, eps=1e-10):
    """One multiplicative update of ``U`` then ``V`` for weighted NMF."""
    WA = A if W is None else W * A
    UV = U @ V
    WUV = UV if W is None else W * UV
    U = U * ((WA @ V.T) / (WUV @ V.T + eps))
    UV = U @ V
    WUV = UV if W is None else W * UV
    num = U.T @ WA
    den = U.T @ WUV
    if lam:
        d = A.sum(axis=1) if deg is None else deg
        num = num + lam * (V @ A)
        den = den + lam * (V * d)
    V = V * (num / (den + eps))
    return U, V


def nmf_round(A, U, V, gamma, lam=0.0, eps=1e-10, deg=None):
    """Weight update followed by one factor update, at a fixed age ``gamma``."""
    W = selfpace.update_weights((A - U @ V) ** 2, gamma)
    U, V = nmf_step(A, U, V, W, lam, deg, eps)
    return U, V, W


def silencer_nmf_fit(
    g: Graph,
    k: int,
    sched: PaceSchedule,
    opts: SolverOptions = SolverOptions(),
    init: Optional[FactorPair] = None,
    callback: Optional[StepCallback] = None,
):
    """Self-paced weighted NMF. Returns ``(FactorPair, W, FitReport)``.

    Each outer round recomputes the pixel weights from the current squared
    residuals at age ``gamma_t`` and then runs multiplicative updates until
    the relative objective change drops below ``opts.tol``.
    """
    A = g.adjacency
    n = g.n
    if not 1 <= k <= n:
        raise ValidationError(f"k={k} must lie in [1, n={n}]")
    if init is None:
        rng = np.random.default_rng(opts.seed)
        U = _init_uniform(rng, (n, k))
        V = _init_uniform(rng, (k, n))
    else:
        U, V = np.array(init.U, dtype=float), np.array(init.V, dtype=float)
        if U.shape != (n, k) or V.shape != (k, n):
            raise ValidationError(f"init shapes {U.shape}, {V.shape} do not match n={n}, k={k}")
    deg = A.sum(axis=1)
    lam, eps = opts.lam, opts.epsilon
    report = FitReport()
    W = None
    gamma = None
    gamma0 = None if sched.frozen else sched.resolve((A - U @ V) ** 2)

    for t in range(sched.outer_iters):
        if not sched.frozen:
            gamma = sched.advance(t, gamma0)
            W = selfpace.update_weights((A - U @ V) ** 2, gamma)
            report.gamma_trace.append(gamma)
        prev = nmf_objective(A, U, V, W, gamma, lam, deg)
        report.converged = False
        for _ in range(opts.max_inner_iters):
            U, V = nmf_step(A, U, V, W, lam, deg, eps)
            _check_finite("silencer-nmf", U, V)
            report.iterations_used += 1
            if callback is not None:
                callback("fit", [U], V)
            cur = nmf_objective(A, U, V, W, gamma, lam, deg)
            report.loss_trace.append(cur)
            if _relative_change(prev, cur) < opts.tol:
                report.converged = True
                break
            prev = cur
        report.outer_trace.append(nmf_objective(A, U, V, W, None, lam, deg))
        report.raw_trace.append(nmf_objective(A, U, V, None, None, lam, deg))

    W_out = np.ones_like(A) if W is None else W
    return FactorPair(U, V), W_out, report


def nmf_fit(g: Graph, k: int, opts: SolverOptions = SolverOptions(), init=None, callback=None):
    """Graph-regularised NMF (plain NMF when ``opts.lam == 0``)."""
    pair, _, report = silencer_nmf_fit(g, k, PaceSchedule.disabled(), opts, init, callback)
    return pair, report


# ---------------------------------------------------------------------------
# deep autoencoder-like NMF


def _suffix_products(layers, k):
    """``phis[i] = U_{i+1} @ ... @ U_p`` (identity for the last layer)."""
    phis = [None] * len(layers)
    acc = np.eye(k)
    for i in reversed(range(len(layers))):
        phis[i] = acc
        acc = layers[i] @ acc
    return phis


def danmf_step(A, layers, Vp, W=None, lam=0.0, deg=None, eps=1e-10, encoder=True):
    """Update every ``U_i`` in order, then ``V_p``.

    ``W`` weights the encoder residual ``V_p - Psi_p^T A`` and has the shape
    of ``V_p``. With ``encoder=False`` all encoder terms are dropped (the
    decoder-only deep NMF). Products are associated so that no ``n x n x r``
    product is formed; the cost per sweep is ``O(p n^2 k + n r^2)``.
    """
    layers = list(layers)
    k = Vp.shape[0]
    phis = _suffix_products(layers, k)
    WV = Vp if W is None else W * Vp
    S = Vp + WV if encoder else Vp
    AS = A @ S.T
    VVt = Vp @ Vp.T
    psi = None
    for i, U in enumerate(layers):
        phi = phis[i]
        num = (AS if psi is None else psi.T @ AS) @ phi.T
        UPhi = U @ phi
        dec = UPhi @ VVt @ phi.T
        if psi is not None:
            dec = (psi.T @ psi) @ dec
        den = dec
        if encoder:
            psi_p = UPhi if psi is None else psi @ UPhi
            E = psi_p.T @ A
            WE = E if W is None else W * E
            AE = A @ WE.T
            den = den + (AE if psi is None else psi.T @ AE) @ phi.T
        U = U * (num / (den + eps))
        layers[i] = U
        psi = U if psi is None else psi @ U

    B = psi.T @ A
    num = B + (B if W is None else W * B) if encoder else B
    den = (psi.T @ psi) @ Vp
    if encoder:
        den = den + WV
    if lam:
        d = A.sum(axis=1) if deg is None else deg
        num = num + lam * (Vp @ A)
        den = den + lam * (Vp * d)
    Vp = Vp * (num / (den + eps))
    return layers, Vp


def danmf_objective(A, stack: FactorStack, W=None, gamma=None, lam=0.0, deg=None, encoder=True) -> float:
    psi = stack.psi()
    Vp = stack.Vp
    total = float(np.sum((A - psi @ Vp) ** 2))
    if encoder:
        R = (Vp - psi.T @ A) ** 2
        total += float(np.sum(R if W is None else W * R))
    if lam:
        total += lam * _reg_trace(Vp, A, A.sum(axis=1) if deg is None else deg)
    if gamma is not None and W is not None:
        total += selfpace.regularizer_value(W, gamma)
    return total


def encoder_losses(A, stack: FactorStack) -> np.ndarray:
    """Pixel losses ``(V_p - Psi_p^T A)^2``, shape ``k x n``."""
    return (stack.Vp - stack.psi().T @ A) ** 2


def pretrain(g: Graph, layers: LayerConfig, opts: SolverOptions = SolverOptions(), callback=None) -> FactorStack:
    """Layer-wise shallow initialisation.

    Layer ``i`` factorises the previous membership matrix ``X ~ U_i V_i`` while
    also asking ``V_i ~ U_i^T X``; only the last ``V`` is kept.
    """
    layers.check(g)
    rng = np.random.default_rng(opts.seed)
    X = g.adjacency
    Us = []
    V = X
    for r in layers.sizes[1:]:
        U = _init_uniform(rng, (X.shape[0], r))
        V = _init_uniform(rng, (r, X.shape[1]))
        prev = danmf_objective(X, FactorStack([U], V))
        for _ in range(opts.pretrain_iters):
            (U,), V = danmf_step(X, [U], V, None, 0.0, None, opts.epsilon, encoder=True)
            _check_finite("pretrain", U, V)
            if callback is not None:
                callback("pretrain", [U], V)
            cur = danmf_objective(X, FactorStack([U], V))
            if _relative_change(prev, cur) < opts.tol:
                break
            prev = cur
        Us.append(U)
        X = V
    return FactorStack(Us, V)


def silencer_danmf_fit(
    g: Graph,
    layers: LayerConfig,
    sched: PaceSchedule,
    opts: SolverOptions = SolverOptions(),
    init: Optional[FactorStack] = None,
    callback: Optional[StepCallback] = None,
    encoder: bool = True,
):
    """Deep autoencoder-like NMF with self-paced weights on the encoder residual.

    Returns ``(FactorStack, W, FitReport)``; ``W`` is ``k x n``. Pre-training
    is skipped when ``init`` is supplied.
    """
    A = g.adjacency
    layers.check(g)
    stack = pretrain(g, layers, opts, callback) if init is None else init.copy()
    if [u.shape for u in stack.layers] != list(zip(layers.sizes[:-1], layers.sizes[1:])):
        raise ValidationError(f"stack shapes {stack.shapes()} do not match layers {layers.sizes}")
    if stack.Vp.shape != (layers.k, g.n):
        raise ValidationError(f"V_p has shape {stack.Vp.shape}, expected {(layers.k, g.n)}")
    deg = A.sum(axis=1)
    lam, eps = opts.lam, opts.epsilon
    Us, Vp = list(stack.layers), stack.Vp
    report = FitReport()
    W = None
    gamma = None
    use_weights = encoder and not sched.frozen
    gamma0 = sched.resolve(encoder_losses(A, stack)) if use_weights else None
    rounds = sched.outer_iters if use_weights else 1

    for t in range(rounds):
        if use_weights:
            gamma = sched.advance(t, gamma0)
            W = selfpace.update_weights(encoder_losses(A, FactorStack(Us, Vp)), gamma)
            report.gamma_trace.append(gamma)
        prev = danmf_objective(A, FactorStack(Us, Vp), W, gamma, lam, deg, encoder)
        report.converged = False
        for _ in range(opts.max_inner_iters):
            Us, Vp = danmf_step(A, Us, Vp, W, lam, deg, eps, encoder)
            _check_finite("danmf", Vp, *Us)
            report.iterations_used += 1
            if callback is not None:
                callback("fit", Us, Vp)
            cur = danmf_objective(A, FactorStack(Us, Vp), W, gamma, lam, deg, encoder)
            report.loss_trace.append(cur)
            if _relative_change(prev, cur) < opts.tol:
                report.converged = True
                break
            prev = cur
        report.outer_trace.append(danmf_objective(A, FactorStack(Us, Vp), W, None, lam, deg, encoder))
        report.raw_trace.append(danmf_objective(A, FactorStack(Us, Vp), None, None, lam, deg, encoder))

    W_out = np.ones_like(Vp) if W is None else W
    return FactorStack(Us, Vp), W_out, report


def danmf_fit(g: Graph, layers: LayerConfig, opts: SolverOptions = SolverOptions(), init=None, callback=None):
    stack, _, report = silencer_danmf_fit(g, layers, PaceSchedule.disabled(), opts, init, callback)
    return stack, report


def dnmf_fit(g: Graph, layers: LayerConfig, opts: SolverOptions = SolverOptions(), init=None, callback=None):
    """Deep NMF without the encoder term (decoder and graph regulariser only)."""
    stack, _, report = silencer_danmf_fit(g, layers, PaceSchedule.disabled(), opts, init, callback, encoder=False)
    return stack, report


# ---------------------------------------------------------------------------


def assign_communities(obj) -> Partition:
    """Label each node by the row holding the largest entry of its column of V.

    Accepts a :class:`FactorStack`, a :class:`FactorPair` or a bare ``k x n``
    membership matrix. ``np.argmax`` returns the first maximum, so ties go to
    the lowest community index.
    """
    if isinstance(obj, FactorStack):
        V = obj.Vp
    elif isinstance(obj, FactorPair):
        V = obj.V
    else:
        V = np.asarray(obj)
    return Partition(np.argmax(V, axis=0).astype(np.int64), V.shape[0])


def reconstruction_errors(g: Graph, stack) -> tuple[float, float]:
    """``(||A - Psi V||_F / n, ||V - Psi^T A||_F / n)``."""
    if isinstance(stack, FactorPair):
        stack = stack.as_stack()
    A = g.adjacency
    psi = stack.psi()
    dec = float(np.linalg.norm(A - psi @ stack.Vp)) / g.n
    enc = float(np.linalg.norm(stack.Vp - psi.T @ A)) / g.n
    return dec, enc
