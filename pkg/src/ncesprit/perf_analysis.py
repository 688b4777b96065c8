"""First-order performance analysis of the NC ESPRIT estimators.

The expansions are built around the noise-free augmented data
``X0_nc = A_nc S``.  The subspace error is the leakage
``U_n U_n^H N_nc V_s Sigma_s^-1`` and each spatial-frequency error is a linear
functional of it; the MSE needs only the covariance and pseudo-covariance of
vec(N_nc).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .array_model import SamplingGrid, SelectionSet, SourceParams, augmented_steering, steering_matrix
from .errors import ModelError, NumericalError, RankDeficiencyError
from .estimators import RANK_TOL, signal_subspace

NEG_MSE_TOL = 1e-15


def commutation(M: int, N: int) -> np.ndarray:
    """K_{M,N} with K vec(A) = vec(A^T) for A of size M x N (column-major vec)."""
    K = np.zeros((M * N, M * N))
    i, j = np.meshgrid(np.arange(M), np.arange(N), indexing="ij")
    K[(j + i * N).ravel(), (i + j * M).ravel()] = 1.0
    return K


def k_tilde(M: int, N: int) -> np.ndarray:
    """Permutation with vec([N; Pi_M N*]) = K~ [vec(N); vec(N*)]."""
    K = commutation(M, N)
    flip = np.kron(np.eye(N), np.eye(M)[::-1])
    Z = np.zeros_like(K)
    blk = np.block([[K, Z], [Z, K @ flip]])
    return commutation(2 * M, N).T @ blk


@dataclass(frozen=True)
class AugmentedNoiseStats:
    Rnc: np.ndarray
    Cnc: np.ndarray
    K: np.ndarray


def augment_noise_stats(Rnn: np.ndarray, Cnn: np.ndarray, M: int, N: int) -> AugmentedNoiseStats:
    """Covariance and pseudo-covariance of vec(N_nc) from those of vec(N)."""
    Rnn = np.asarray(Rnn, dtype=complex)
    Cnn = np.asarray(Cnn, dtype=complex)
    if Rnn.shape != (M * N, M * N) or Cnn.shape != (M * N, M * N):
        raise ModelError(f"noise statistics must be {M * N}x{M * N}")
    K = k_tilde(M, N)
    Rnc = K @ np.block([[Rnn, Cnn], [Cnn.conj(), Rnn.conj()]]) @ K.T
    Cnc = K @ np.block([[Cnn, Rnn], [Rnn.conj(), Cnn.conj()]]) @ K.T
    return AugmentedNoiseStats(Rnc, Cnc, K)


def white_noise_stats(sigma2: float, M: int, N: int) -> AugmentedNoiseStats:
    return augment_noise_stats(sigma2 * np.eye(M * N), np.zeros((M * N, M * N)), M, N)


@dataclass
class AnalyticContext:
    """Noise-free subspaces plus per-mode eigen structure.

    ``Q[r]`` holds the unit-norm eigenvectors of Gamma^(r) (columns in source
    order), ``P[r] = inv(Q[r])`` and ``lam[r, i]`` the matching eigenvalues.
    """

    U_s: np.ndarray
    U_n: np.ndarray
    sigma_s: np.ndarray
    V_s: np.ndarray
    Q: list
    P: list
    lam: np.ndarray
    sel: SelectionSet
    pinvs: list  # (J~1 U_s)^+ per mode

    @property
    def R(self) -> int:
        return self.lam.shape[0]

    @property
    def d(self) -> int:
        return self.lam.shape[1]

    @property
    def M(self) -> int:
        return self.U_s.shape[0] // 2

    @property
    def N(self) -> int:
        return self.V_s.shape[0]

    def proj_noise(self) -> np.ndarray:
        return self.U_n @ self.U_n.conj().T


def analytic_context(grid: SamplingGrid, src: SourceParams, S: np.ndarray,
                     sel: SelectionSet | None = None, per_mode: bool = False) -> AnalyticContext:
    """Build the context from the true model and the symbol realization S.

    With ``per_mode`` the eigenvectors come from each Gamma^(r) separately
    instead of the common basis U_s^H A_nc.
    """
    sel = SelectionSet.max_overlap(grid) if sel is None else sel
    A_nc = augmented_steering(steering_matrix(grid, src), src.phi)
    sub = signal_subspace(A_nc @ S, src.d)
    U = sub.U_s
    T = U.conj().T @ A_nc
    T = T / np.linalg.norm(T, axis=0)
    lam = np.exp(1j * src.mu)
    Qs, Ps, pinvs = [], [], []
    for r in range(grid.R):
        S1 = U[sel.rows(r, 1, nc=True)]
        sv = np.linalg.svd(S1, compute_uv=False)
        if sv[-1] <= RANK_TOL * sv[0]:
            raise RankDeficiencyError(f"J~1 U_s is rank deficient in mode {r}")
        pinv = np.linalg.pinv(S1)
        pinvs.append(pinv)
        if per_mode:
            G = pinv @ U[sel.rows(r, 2, nc=True)]
            ev, V = np.linalg.eig(G)
            order = [int(np.argmin(np.abs(ev - l))) for l in lam[r]]
            if len(set(order)) != src.d:
                raise NumericalError(f"mode {r} eigenvalues cannot be matched to sources")
            Qr = V[:, order] / np.linalg.norm(V[:, order], axis=0)
        else:
            Qr = T
        Qs.append(Qr)
        Ps.append(np.linalg.inv(Qr))
    return AnalyticContext(U, sub.U_n, sub.sigma_s, sub.V_s, Qs, Ps, lam, sel, pinvs)


def subspace_perturbation(ctx: AnalyticContext, Nnc: np.ndarray) -> np.ndarray:
    """First-order error of the estimated signal subspace."""
    if np.any(ctx.sigma_s <= 0):
        raise NumericalError("singular signal singular values")
    lead = ctx.U_n @ (ctx.U_n.conj().T @ Nnc)
    return lead @ ctx.V_s / ctx.sigma_s


def _shift_operator(ctx: AnalyticContext, r: int, i: int) -> np.ndarray:
    """d x 2M matrix (J~1 U_s)^+ (J~2 / lambda_i - J~1)."""
    sel = ctx.sel
    B = np.zeros((ctx.d, 2 * ctx.M), dtype=complex)
    pinv = ctx.pinvs[r]
    B[:, sel.rows(r, 2, nc=True)] += pinv / ctx.lam[r, i]
    B[:, sel.rows(r, 1, nc=True)] -= pinv
    return B


def error_expansion(ctx: AnalyticContext, dU: np.ndarray) -> np.ndarray:
    """R x d first-order spatial-frequency errors for a subspace error dU."""
    out = np.empty((ctx.R, ctx.d))
    for r in range(ctx.R):
        pinv = ctx.pinvs[r]
        Y2 = ctx.P[r] @ pinv @ dU[ctx.sel.rows(r, 2, nc=True)] @ ctx.Q[r]
        Y1 = ctx.P[r] @ pinv @ dU[ctx.sel.rows(r, 1, nc=True)] @ ctx.Q[r]
        out[r] = (np.diag(Y2) / ctx.lam[r] - np.diag(Y1)).imag
    return out


def _check_mse(val: complex) -> float:
    if abs(val.imag) > 1e-12 * max(abs(val.real), 1e-300) and abs(val.imag) > 1e-30:
        raise NumericalError(f"MSE expression has imaginary residual {val.imag:.3e}")
    if val.real < -NEG_MSE_TOL:
        raise NumericalError(f"negative MSE {val.real:.3e}")
    return max(val.real, 0.0)


def mse_predict(ctx: AnalyticContext, stats: AugmentedNoiseStats) -> np.ndarray:
    """R x d first-order MSE for arbitrary zero-mean noise statistics.

    Assembles the weighting matrix W = (Sigma^-1 V_s^T) (x) (U_n U_n^H)
    explicitly; use :func:`mse_predict_white` for large white-noise problems.
    """
    M2, N = 2 * ctx.M, ctx.N
    if stats.Rnc.shape != (M2 * N, M2 * N):
        raise ModelError(f"noise statistics are {stats.Rnc.shape[0]}-dim, need {M2 * N}")
    W = np.kron((ctx.V_s / ctx.sigma_s).T, ctx.proj_noise())
    out = np.empty((ctx.R, ctx.d))
    for r in range(ctx.R):
        for i in range(ctx.d):
            B = _shift_operator(ctx, r, i)
            rv = np.kron(ctx.Q[r][:, i], B.T @ ctx.P[r][i])
            wt = rv @ W  # r^T W
            t1 = rv.conj() @ W.conj() @ stats.Rnc.T @ W.T @ rv
            t2 = wt @ stats.Cnc.T @ wt
            out[r, i] = _check_mse(0.5 * (t1 - t2.real))
    return out


def mse_predict_white(ctx: AnalyticContext, sigma2: float) -> np.ndarray:
    """Matrix-free MSE for circular white noise of power sigma2.

    Uses r^T W = b^T (x) a^T with a^T = p^T B U_n U_n^H and b = V_s Sigma^-1 q.
    """
    out = np.empty((ctx.R, ctx.d))
    Vw = ctx.V_s / ctx.sigma_s
    for r in range(ctx.R):
        for i in range(ctx.d):
            B = _shift_operator(ctx, r, i)
            a = ((ctx.P[r][i] @ B) @ ctx.U_n) @ ctx.U_n.conj().T
            b = Vw @ ctx.Q[r][:, i]
            e_abs = np.vdot(a, a).real * np.vdot(b, b).real
            e_sq = (b @ b) * (a @ a[::-1])
            out[r, i] = _check_mse(complex(0.5 * sigma2 * (e_abs - e_sq.real)))
    return out


def rmse_predict(ctx: AnalyticContext, noise) -> float:
    """Square root of the MSE averaged over all modes and sources.

    ``noise`` is either an :class:`AugmentedNoiseStats` or a white-noise power.
    """
    if isinstance(noise, AugmentedNoiseStats):
        mse = mse_predict(ctx, noise)
    else:
        mse = mse_predict_white(ctx, float(noise))
    return float(np.sqrt(np.mean(mse)))
