"""Mean-field variational Bayesian engine for device-state recovery.

Model: the received tensor is kruskal(A_1..A_d, X) + noise, with a
circular complex Gaussian prior CN(mu_k^-1 1_M, v_k^-1 I_M) on each column
of X and near-flat Gamma(eps, eps) hyperpriors on mu_k, v_k and the noise
precision beta. The factorized posterior is optimized by coordinate
ascent; every update below is the closed-form optimum of its block with
the other blocks fixed.

The q(mu_k) block is not conjugate: its density in u = mu^-1 is
proportional to u^(-1-eps) exp(-o u^2 + t u), whose inverse-moment ratios
evaluate to Gamma/1F1 expressions spanning huge dynamic range. They are
assembled in signed-log space (see :mod:`leojadce.specfun`).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .signals import PreambleSet
from .specfun import SignedLogValue, hyp1f1, ln_gamma_signed, signed_log_sum
from .tensors import ComplexTensor, hadamard, khatri_rao, unfold_last


class EngineError(RuntimeError):
    """Numerical failure inside the update loop (reported, never clamped)."""


@dataclass(frozen=True)
class EngineConfig:
    eps: float = 1e-6           # Gamma hyperprior shape/rate
    max_iters: int = 35
    rel_tol: float = 1e-3       # on the relative Frobenius change of M_X
    threshold_ratio: float = 0.3

    def __post_init__(self):
        if not (0.0 < self.eps <= 1e-2):
            raise ValueError("eps must lie in (0, 1e-2]")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be > 0")
        if not (0.0 < self.threshold_ratio < 1.0):
            raise ValueError("threshold_ratio must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class PosteriorState:
    """All variational statistics.

    The posterior over X is matrix Gaussian with mean M_X and one shared
    K x K column covariance C_X. Gamma blocks are parameterized as
    (rate a, shape b) with E = b / a; b_v and b_beta never change.
    """

    M_X: np.ndarray          # M x K posterior mean
    C_X: np.ndarray          # K x K Hermitian positive-definite
    a_v: np.ndarray          # K rates for q(v_k)
    b_v: float               # shape M + eps, fixed
    o_mu: np.ndarray         # K coefficients of mu^-2
    t_mu: np.ndarray         # K coefficients of mu^-1
    E_mu_inv: np.ndarray     # K posterior means of mu^-1
    E_mu_inv2: np.ndarray    # K posterior means of mu^-2
    a_beta: float            # rate for q(beta)
    b_beta: float            # shape L*M + eps, fixed
    eps: float
    iter: int = 0

    @property
    def E_v(self) -> np.ndarray:
        return self.b_v / self.a_v

    @property
    def E_beta(self) -> float:
        return self.b_beta / self.a_beta


@dataclass(frozen=True)
class EngineResult:
    state: PosteriorState
    n_iters: int
    converged: bool
    # rows of (iteration, residual F, max column energy of M_X)
    trace: list[tuple[int, float, float]]

    @property
    def M_X(self) -> np.ndarray:
        return self.state.M_X


def precompute_gram(p: PreambleSet) -> np.ndarray:
    """K x K Gram hadamard_i (A_i^H A_i)^*; since the factors are known
    constants this is the whole expectation entering the X-covariance."""
    return hadamard([(a.conj().T @ a).conj() for a in p.factors])


def init_posterior(p: PreambleSet, Y: ComplexTensor, cfg: EngineConfig) -> PosteriorState:
    """Deterministic start: matched-filter mean, identity covariance, unit
    v-means, zero prior-mean moments, noise precision from total energy."""
    L, K = p.L, p.K
    M = Y.dims[-1]
    kr = khatri_rao(list(p.factors))
    m_x = unfold_last(Y) @ kr.conj() / L
    b_v = M + cfg.eps
    b_beta = L * M + cfg.eps
    energy = float(np.vdot(Y.array, Y.array).real)
    a_beta = b_beta * energy / (L * M) if energy > 0 else b_beta
    return PosteriorState(
        M_X=m_x,
        C_X=np.eye(K, dtype=complex),
        a_v=np.full(K, b_v),
        b_v=b_v,
        o_mu=np.full(K, float(M)),
        t_mu=np.full(K, -cfg.eps),
        E_mu_inv=np.zeros(K),
        E_mu_inv2=np.zeros(K),
        a_beta=a_beta,
        b_beta=b_beta,
        eps=cfg.eps,
    )


def update_qX(s: PosteriorState, G: np.ndarray, p: PreambleSet, Y: ComplexTensor,
              Ty: np.ndarray | None = None) -> PosteriorState:
    """Refresh (C_X, M_X).

    C_X = (E[beta] G + diag(E[v]))^-1 via a Hermitian factorization;
    M_X = (E[beta] Y_(d+1) KR^* + 1_M (E[mu^-1] E[v])^T) C_X.
    ``Ty`` may carry the precomputed constant Y_(d+1) KR^*.
    """
    if Ty is None:
        Ty = unfold_last(Y) @ khatri_rao(list(p.factors)).conj()
    M = Ty.shape[0]
    e_beta, e_v = s.E_beta, s.E_v
    A_sys = e_beta * G + np.diag(e_v.astype(complex))
    try:
        cho = cho_factor(A_sys, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise EngineError(f"X-covariance system not positive-definite: {exc}") from exc
    C_X = cho_solve(cho, np.eye(len(e_v), dtype=complex), check_finite=False)
    C_X = 0.5 * (C_X + C_X.conj().T)  # strip factorization roundoff
    rhs = e_beta * Ty + np.ones((M, 1)) * (s.E_mu_inv * e_v)[None, :]
    M_X = rhs @ C_X
    if not (np.all(np.isfinite(M_X)) and np.all(np.isfinite(C_X))):
        raise EngineError("non-finite entries in q(X) update")
    return dataclasses.replace(s, M_X=M_X, C_X=C_X)


def inverse_mean_moments(o: np.ndarray, t: np.ndarray, eps: float
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Posterior means of mu^-1 and mu^-2 for densities with log-kernel
    -o mu^-2 + t mu^-1 + (eps - 1) ln mu.

    Both are ratios of Gamma * 1F1 pairs at argument x = t^2 / (4 o),
    evaluated in signed-log space:

      E[mu^-1] = (t G(1-e/2) Hy(1-e/2,3/2,x) + sqrt(o) G((1-e)/2) Hy((1-e)/2,1/2,x))
                 / (o G(-e/2) Hy(-e/2,1/2,x) + sqrt(o) t G((1-e)/2) Hy((1-e)/2,3/2,x))
      E[mu^-2] = (sqrt(o) G(1-e/2) Hy(1-e/2,1/2,x) + t G((3-e)/2) Hy((3-e)/2,3/2,x))
                 / (o^3/2 G(-e/2) Hy(-e/2,1/2,x) + o t G((1-e)/2) Hy((1-e)/2,3/2,x))
    """
    o = np.asarray(o, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(o <= 0):
        raise EngineError("mu^-2 coefficient must be strictly positive")
    g_m = ln_gamma_signed(-eps / 2.0)
    g_a = ln_gamma_signed((1.0 - eps) / 2.0)
    g_b = ln_gamma_signed(1.0 - eps / 2.0)
    g_c = ln_gamma_signed((3.0 - eps) / 2.0)

    e1 = np.empty_like(o)
    e2 = np.empty_like(o)
    for i, (oi, ti) in enumerate(zip(o.ravel(), t.ravel())):
        x = ti * ti / (4.0 * oi)
        hy_m_half = hyp1f1(-eps / 2.0, 0.5, x)
        hy_a_half = hyp1f1((1.0 - eps) / 2.0, 0.5, x)
        hy_a_three = hyp1f1((1.0 - eps) / 2.0, 1.5, x)
        hy_b_half = hyp1f1(1.0 - eps / 2.0, 0.5, x)
        hy_b_three = hyp1f1(1.0 - eps / 2.0, 1.5, x)
        hy_c_three = hyp1f1((3.0 - eps) / 2.0, 1.5, x)
        sq_o = math.sqrt(oi)

        num1 = signed_log_sum([
            (g_b * hy_b_three).scaled(ti),
            (g_a * hy_a_half).scaled(sq_o),
        ])
        den1 = signed_log_sum([
            (g_m * hy_m_half).scaled(oi),
            (g_a * hy_a_three).scaled(sq_o * ti),
        ])
        num2 = signed_log_sum([
            (g_b * hy_b_half).scaled(sq_o),
            (g_c * hy_c_three).scaled(ti),
        ])
        den2 = signed_log_sum([
            (g_m * hy_m_half).scaled(oi * sq_o),
            (g_a * hy_a_three).scaled(oi * ti),
        ])
        if den1.sign == 0 or den2.sign == 0:
            raise EngineError(f"vanishing moment denominator at o={oi}, t={ti}")
        e1.flat[i] = (num1 / den1).value()
        e2.flat[i] = (num2 / den2).value()
    return e1, e2


def update_qmu(s: PosteriorState) -> PosteriorState:
    """Refresh the prior-mean block: o = M E[v], t = 2 Re(sum_m M_X) E[v] - eps,
    then the inverse-mean moments."""
    if np.any(s.a_v <= 0):
        raise EngineError("q(v) rates must be positive before the mu update")
    M = s.M_X.shape[0]
    e_v = s.E_v
    col_sum = np.real(np.sum(s.M_X, axis=0))
    o_mu = M * e_v
    t_mu = 2.0 * col_sum * e_v - s.eps
    e1, e2 = inverse_mean_moments(o_mu, t_mu, s.eps)
    return dataclasses.replace(s, o_mu=o_mu, t_mu=t_mu, E_mu_inv=e1, E_mu_inv2=e2)


def update_qv(s: PosteriorState) -> PosteriorState:
    """Refresh the column-precision rates:
    a_v[k] = ||M_X(:,k)||^2 + M C_X(k,k) - 2 E[mu^-1] Re(sum_m M_X(m,k))
             + M E[mu^-2] + eps."""
    M = s.M_X.shape[0]
    col_energy = np.sum(np.abs(s.M_X) ** 2, axis=0)
    col_sum = np.real(np.sum(s.M_X, axis=0))
    a_v = (col_energy + M * np.real(np.diag(s.C_X))
           - 2.0 * s.E_mu_inv * col_sum + M * s.E_mu_inv2 + s.eps)
    if np.any(a_v <= 0) or not np.all(np.isfinite(a_v)):
        raise EngineError("non-positive or non-finite q(v) rate")
    return dataclasses.replace(s, a_v=a_v)


def expected_residual(s: PosteriorState, G: np.ndarray, p: PreambleSet,
                      Y: ComplexTensor, Ty: np.ndarray | None = None,
                      y_energy: float | None = None) -> float:
    """Posterior-expected squared residual
    E||Y - kruskal(A, X)||_F^2 = ||Y||^2 - 2 Re Tr(Ty M_X^H) + Tr(G E[X^H X]),
    with E[X^H X] = M_X^H M_X + M C_X."""
    if Ty is None:
        Ty = unfold_last(Y) @ khatri_rao(list(p.factors)).conj()
    if y_energy is None:
        y_energy = float(np.vdot(Y.array, Y.array).real)
    M = s.M_X.shape[0]
    second_moment = s.M_X.conj().T @ s.M_X + M * s.C_X
    fit = float(np.sum(G * second_moment.T).real)
    cross = float(np.sum(Ty * s.M_X.conj()).real)
    return y_energy - 2.0 * cross + fit


def update_qbeta(s: PosteriorState, G: np.ndarray, p: PreambleSet, Y: ComplexTensor,
                 Ty: np.ndarray | None = None,
                 y_energy: float | None = None) -> PosteriorState:
    """Refresh the noise-precision rate a_beta = F + eps.

    F is mathematically >= 0; anything below -1e-8 (relative to the
    observation energy) is reported as numerical failure, and mere roundoff
    below zero is truncated before adding eps.
    """
    if y_energy is None:
        y_energy = float(np.vdot(Y.array, Y.array).real)
    F = expected_residual(s, G, p, Y, Ty=Ty, y_energy=y_energy)
    if F < -1e-8 * (1.0 + y_energy):
        raise EngineError(f"negative expected residual F={F}")
    return dataclasses.replace(s, a_beta=max(F, 0.0) + s.eps)


def run(p: PreambleSet, Y: ComplexTensor, cfg: EngineConfig,
        on_iteration: Callable[[int, PosteriorState], None] | None = None
        ) -> EngineResult:
    """Iterate qX -> qmu -> qv -> qbeta until the relative Frobenius change
    of M_X drops below cfg.rel_tol or cfg.max_iters is reached."""
    G = precompute_gram(p)
    kr = khatri_rao(list(p.factors))
    Ty = unfold_last(Y) @ kr.conj()
    y_energy = float(np.vdot(Y.array, Y.array).real)
    s = init_posterior(p, Y, cfg)
    trace: list[tuple[int, float, float]] = []
    converged = False
    for it in range(1, cfg.max_iters + 1):
        prev = s.M_X
        s = update_qX(s, G, p, Y, Ty=Ty)
        s = update_qmu(s)
        s = update_qv(s)
        s = update_qbeta(s, G, p, Y, Ty=Ty, y_energy=y_energy)
        s.iter = it
        resid = s.a_beta - s.eps
        max_col = float(np.max(np.sum(np.abs(s.M_X) ** 2, axis=0)))
        trace.append((it, resid, max_col))
        if on_iteration is not None:
            on_iteration(it, s)
        denom = float(np.linalg.norm(prev))
        delta = float(np.linalg.norm(s.M_X - prev))
        if denom > 0 and delta / denom < cfg.rel_tol:
            converged = True
            break
    return EngineResult(state=s, n_iters=s.iter, converged=converged, trace=trace)


def theorem1_moment(M_S: np.ndarray, C_blocks: Sequence[np.ndarray]) -> np.ndarray:
    """Second moment E[S^H S] of a matrix Gaussian: M_S^H M_S plus the sum
    of the per-row diagonal covariance blocks."""
    M_S = np.asarray(M_S, dtype=complex)
    if len(C_blocks) != M_S.shape[0]:
        raise ValueError(f"expected {M_S.shape[0]} diagonal blocks, got {len(C_blocks)}")
    k = M_S.shape[1]
    out = M_S.conj().T @ M_S
    for c in C_blocks:
        c = np.asarray(c, dtype=complex)
        if c.shape != (k, k):
            raise ValueError(f"covariance block must be {k} x {k}, got {c.shape}")
        out = out + c
    return out
