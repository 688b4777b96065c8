"""Deterministic Cramer-Rao bounds and single-source closed forms."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .array_model import SamplingGrid, SourceParams, steering_matrix
from .errors import ModelError, NumericalError

COND_LIMIT = 1e12


def derivative_matrix(grid: SamplingGrid, src: SourceParams) -> np.ndarray:
    """M x Rd matrix [D^(0), ..., D^(R-1)]; column block r holds da(mu_i)/dmu_i^(r)."""
    if src.R != grid.R:
        raise ModelError(f"grid has R={grid.R} modes but sources have R={src.R}")
    blocks = []
    for r in range(grid.R):
        D = np.ones((1, src.d), dtype=complex)
        for l in range(grid.R):
            a = np.exp(1j * np.outer(grid.positions[l], src.mu[l]))
            if l == r:
                a = 1j * grid.positions[l][:, None] * a
            D = (D[:, None, :] * a[None, :, :]).reshape(-1, src.d)
        blocks.append(D)
    return np.hstack(blocks)


def _guarded_inv(F: np.ndarray, what: str) -> np.ndarray:
    if np.linalg.cond(F) > COND_LIMIT:
        raise NumericalError(f"{what} is singular or ill-conditioned")
    return np.linalg.inv(F)


@dataclass
class CrbInputs:
    A: np.ndarray  # M x d
    D: np.ndarray  # M x Rd
    phi: np.ndarray  # d
    R_S0: np.ndarray  # d x d empirical covariance of the real symbols
    sigma2: float
    N: int

    @classmethod
    def from_model(cls, grid: SamplingGrid, src: SourceParams, S0: np.ndarray,
                   sigma2: float, center: bool = True) -> "CrbInputs":
        """Assemble bound inputs; positions are centroid-referenced by default."""
        g = grid.centered() if center else grid
        N = S0.shape[1]
        return cls(steering_matrix(g, src), derivative_matrix(g, src), src.phi,
                   S0 @ S0.T / N, sigma2, N)


def nc_fisher_blocks(inp: CrbInputs) -> dict:
    """Intermediate G_0, H_0, G_1, H_1, G_2 matrices of the NC bound."""
    d = inp.A.shape[1]
    R = inp.D.shape[1] // d
    psi = np.exp(1j * inp.phi)
    psi_R = np.tile(psi, R)
    AhA = psi.conj()[:, None] * (inp.A.conj().T @ inp.A) * psi[None, :]
    DhA = psi_R.conj()[:, None] * (inp.D.conj().T @ inp.A) * psi[None, :]
    DhD = psi_R.conj()[:, None] * (inp.D.conj().T @ inp.D) * psi_R[None, :]
    return {"G0": AhA.real, "H0": AhA.imag, "G1": DhA.real, "H1": DhA.imag, "G2": DhD.real}


def nc_information(inp: CrbInputs) -> np.ndarray:
    """The Rd x Rd matrix J of the deterministic NC bound (phases are nuisance)."""
    b = nc_fisher_blocks(inp)
    G0, H0, G1, H1, G2 = b["G0"], b["H0"], b["G1"], b["H1"], b["G2"]
    Rs = inp.R_S0
    R = G2.shape[0] // Rs.shape[0]
    R_sq = np.tile(Rs, (R, R))
    R_col = np.tile(Rs, (R, 1))
    R_row = R_col.T
    iG0 = _guarded_inv(G0, "G_0")

    schur = (G0 - H0.T @ iG0 @ H0) * Rs
    iS = _guarded_inv(schur, "symbol information")
    iG = _guarded_inv(G0 * Rs, "G_0 (.) R_S0")
    H1R = H1 * R_col
    cross = (H0.T @ iG0 @ G1.T) * R_row

    J = (G2 - G1 @ iG0 @ G1.T) * R_sq
    J = J + ((G1 @ iG0 @ H0) * R_col) @ iS @ ((H1.T - H0.T @ iG0 @ G1.T) * R_row)
    J = J + H1R @ iG @ cross
    J = J + H1R @ iG @ ((H0.T @ iG0 @ H0) * Rs) @ iS @ cross
    J = J - H1R @ iS @ (H1.T * R_row)
    return J


def nc_crb_full(inp: CrbInputs) -> np.ndarray:
    """Deterministic R-D NC CRB, Rd x Rd, ordered mode-major like D."""
    J = nc_information(inp)
    Jr = 0.5 * (J + J.T)
    C = inp.sigma2 / (2 * inp.N) * _guarded_inv(Jr, "NC information matrix")
    return 0.5 * (C + C.T)


def det_crb_circular(A: np.ndarray, D: np.ndarray, R_S: np.ndarray,
                     sigma2: float, N: int) -> np.ndarray:
    """Deterministic CRB for arbitrary (circular) complex amplitudes."""
    d = A.shape[1]
    R = D.shape[1] // d
    P_perp = np.eye(A.shape[0]) - A @ np.linalg.pinv(A)
    H = D.conj().T @ P_perp @ D
    F = np.real(H * np.tile(R_S.T, (R, R)))
    F = 0.5 * (F + F.T)
    C = sigma2 / (2 * N) * _guarded_inv(F, "circular information matrix")
    return 0.5 * (C + C.T)


def _mode_sizes(grid: SamplingGrid) -> np.ndarray:
    if not grid.is_uniform():
        raise ModelError("closed forms hold for uniform sampling grids only")
    return np.array(grid.sizes, dtype=float)


def nc_crb_single(grid: SamplingGrid, rho_hat: float) -> np.ndarray:
    """Single-source NC CRB per mode: 6 / (rho M (M_r^2 - 1))."""
    if rho_hat <= 0:
        raise ModelError("effective SNR must be positive")
    Mr = _mode_sizes(grid)
    return 6.0 / (rho_hat * grid.M * (Mr**2 - 1))


def single_source_mse(grid: SamplingGrid, rho_hat: float) -> np.ndarray:
    """Single-source first-order MSE per mode: M_r / (rho M (M_r - 1)^2)."""
    if rho_hat <= 0:
        raise ModelError("effective SNR must be positive")
    Mr = _mode_sizes(grid)
    return Mr / (rho_hat * grid.M * (Mr - 1) ** 2)


def asymptotic_efficiency_1d(M: int) -> Fraction:
    """Exact high-SNR efficiency 6(M-1) / (M(M+1)) of 1-D LS NC ESPRIT."""
    if M < 2:
        raise ModelError("need at least two sensors")
    return Fraction(6 * (M - 1), M * (M + 1))
