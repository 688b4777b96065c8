"""Strictly non-circular symbols, sensor noise and measurement matrices."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ModelError

PSD_CLIP = 1e-12


def correlation_matrix(rho, d: int) -> np.ndarray:
    """Expand a scalar pairwise correlation into a d x d matrix (or validate one)."""
    if np.isscalar(rho):
        C = np.full((d, d), float(rho))
        np.fill_diagonal(C, 1.0)
    else:
        C = np.asarray(rho, dtype=float)
        if C.shape != (d, d):
            raise ModelError(f"correlation must be {d}x{d}, got {C.shape}")
    if not np.allclose(C, C.T):
        raise ModelError("correlation matrix must be symmetric")
    if not np.allclose(np.diag(C), 1.0):
        raise ModelError("correlation matrix must have a unit diagonal")
    if np.any(np.abs(C) > 1 + 1e-12):
        raise ModelError("correlations must satisfy |rho| <= 1")
    return C


def _psd_sqrt(C: np.ndarray, what: str) -> np.ndarray:
    """Square root L with L L^T = C; eigenvalue clipping for tiny negatives."""
    try:
        return np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        pass
    w, V = np.linalg.eigh(C)
    scale = max(np.abs(w).max(initial=0.0), 1.0)
    if w.min(initial=0.0) < -PSD_CLIP * scale:
        raise ModelError(f"{what} is not positive semi-definite (min eig {w.min():.3e})")
    return V * np.sqrt(np.clip(w, 0.0, None))


@dataclass(frozen=True)
class SymbolModel:
    """Real Gaussian symbols with the given correlation and powers, rotated by phi.

    With ``exact_covariance`` the realization satisfies S_0 S_0^T / N equal to
    the nominal covariance exactly: powers (hence the effective SNR) are fixed
    and nominally uncorrelated sources are also uncorrelated in the sample.
    """

    phi: np.ndarray
    correlation: object = 0.0
    powers: Optional[np.ndarray] = None
    exact_covariance: bool = False

    @property
    def d(self) -> int:
        return np.asarray(self.phi).size

    def covariance(self) -> np.ndarray:
        d = self.d
        p = np.ones(d) if self.powers is None else np.asarray(self.powers, dtype=float)
        if p.shape != (d,) or np.any(p <= 0):
            raise ModelError("powers must be d positive values")
        sp = np.sqrt(p)
        return sp[:, None] * correlation_matrix(self.correlation, d) * sp[None, :]


def gen_real_symbols(model: SymbolModel, N: int, rng: np.random.Generator) -> np.ndarray:
    """Real d x N symbol matrix S_0."""
    if N < 1:
        raise ModelError("need at least one snapshot")
    cov = model.covariance()
    L = _psd_sqrt(cov, "symbol covariance")
    if not model.exact_covariance:
        return L @ rng.standard_normal((model.d, N))
    if N < model.d:
        raise ModelError(f"exact covariance needs N >= d, got N={N}, d={model.d}")
    # Haar-distributed orthonormal rows
    Q, Rq = np.linalg.qr(rng.standard_normal((N, model.d)))
    Q *= np.sign(np.diag(Rq))
    return np.sqrt(N) * L @ Q.T


def rotate(S0: np.ndarray, phi: np.ndarray) -> np.ndarray:
    return np.exp(1j * np.asarray(phi, dtype=float))[:, None] * S0


def gen_symbols(model: SymbolModel, N: int, rng: np.random.Generator) -> np.ndarray:
    """Complex d x N matrix S = Psi S_0."""
    return rotate(gen_real_symbols(model, N, rng), model.phi)


@dataclass(frozen=True)
class NoiseModel:
    """Either circular white noise (``sigma2``) or general second-order
    statistics of vec(N): covariance ``Rnn`` and pseudo-covariance ``Cnn``."""

    sigma2: Optional[float] = None
    Rnn: Optional[np.ndarray] = None
    Cnn: Optional[np.ndarray] = None

    def __post_init__(self):
        if (self.sigma2 is None) == (self.Rnn is None):
            raise ModelError("give either sigma2 or (Rnn, Cnn)")
        if self.sigma2 is not None and self.sigma2 < 0:
            raise ModelError("noise power must be non-negative")
        if self.Rnn is not None:
            R = np.asarray(self.Rnn, dtype=complex)
            C = np.zeros_like(R) if self.Cnn is None else np.asarray(self.Cnn, dtype=complex)
            if R.shape != C.shape or R.shape[0] != R.shape[1]:
                raise ModelError("Rnn and Cnn must be square and of equal size")
            if not np.allclose(R, R.conj().T):
                raise ModelError("Rnn must be Hermitian")
            if not np.allclose(C, C.T):
                raise ModelError("Cnn must be symmetric")
            object.__setattr__(self, "Rnn", R)
            object.__setattr__(self, "Cnn", C)

    @classmethod
    def circular(cls, sigma2: float) -> "NoiseModel":
        return cls(sigma2=float(sigma2))

    @classmethod
    def general(cls, Rnn, Cnn) -> "NoiseModel":
        return cls(Rnn=Rnn, Cnn=Cnn)

    @property
    def is_circular_white(self) -> bool:
        return self.sigma2 is not None

    def second_order(self, M: int, N: int) -> tuple[np.ndarray, np.ndarray]:
        """(Rnn, Cnn) of vec(N) as MN x MN matrices."""
        if self.is_circular_white:
            return self.sigma2 * np.eye(M * N), np.zeros((M * N, M * N))
        if self.Rnn.shape[0] != M * N:
            raise ModelError(f"noise statistics are {self.Rnn.shape[0]}-dim, need {M * N}")
        return self.Rnn, self.Cnn

    def composite_sqrt(self) -> np.ndarray:
        """L with L L^T = cov([Re n; Im n])."""
        R, C = self.Rnn, self.Cnn
        cxx = (R + C).real / 2
        cyy = (R - C).real / 2
        cyx = (R + C).imag / 2
        cxy = (C - R).imag / 2
        return _psd_sqrt(np.block([[cxx, cxy], [cyx, cyy]]), "augmented noise covariance")


def gen_noise(model: NoiseModel, M: int, N: int, rng: np.random.Generator) -> np.ndarray:
    if model.is_circular_white:
        if model.sigma2 == 0:
            return np.zeros((M, N), dtype=complex)
        g = rng.standard_normal((2, M, N))
        return np.sqrt(model.sigma2 / 2) * (g[0] + 1j * g[1])
    if model.Rnn.shape[0] != M * N:
        raise ModelError(f"noise statistics are {model.Rnn.shape[0]}-dim, need {M * N}")
    v = model.composite_sqrt() @ rng.standard_normal(2 * M * N)
    n = v[: M * N] + 1j * v[M * N:]
    return n.reshape((M, N), order="F")


def synthesize(A: np.ndarray, S: np.ndarray, noise: Optional[np.ndarray] = None) -> np.ndarray:
    if A.shape[1] != S.shape[0]:
        raise ModelError(f"A has {A.shape[1]} columns but S has {S.shape[0]} rows")
    X = A @ S
    if noise is not None:
        if noise.shape != X.shape:
            raise ModelError(f"noise shape {noise.shape} != data shape {X.shape}")
        X = X + noise
    return X


def augment(X: np.ndarray) -> np.ndarray:
    """``[X; Pi_M X*]``."""
    return np.vstack([X, X.conj()[::-1]])


def fba_augment(Xnc: np.ndarray) -> np.ndarray:
    """Forward-backward averaged augmented data ``[Xnc, Xnc Pi_N]``."""
    return np.hstack([Xnc, Xnc[:, ::-1]])


def effective_snr(s: np.ndarray, sigma2: float):
    """||s||^2 / sigma2 (= N P_s / sigma2); one value per row for a d x N matrix."""
    if sigma2 <= 0:
        raise ModelError("effective SNR needs a positive noise power")
    s = np.asarray(s)
    if s.ndim == 2:
        return np.sum(np.abs(s) ** 2, axis=1) / sigma2
    return float(np.sum(np.abs(s) ** 2) / sigma2)
