"""R-D NC Standard / NC Unitary ESPRIT and the non-NC baselines.

All four estimators share the same back end: a truncated SVD for the signal
subspace, per-mode least-squares shift-invariance solves, and a joint
eigendecomposition that keeps the R-tuples paired.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .array_model import SamplingGrid, SelectionSet, exchange, pi_real_basis
from .errors import (RankDeficiencyError, ResolvabilityError, SingularInvarianceError,
                     UnsupportedGeometryError)
from .signal_synth import augment

RANK_TOL = 1e-12
PAIRING_COND_LIMIT = 1e8
COMPLEX_EIG_WARN = 1e-6
JOINT_EIG_SEED = 20140601


class PairingWarning(RuntimeWarning):
    pass


class ComplexEigenvalueWarning(RuntimeWarning):
    pass


@dataclass
class SubspaceDecomp:
    U_s: np.ndarray
    sigma_s: np.ndarray
    V_s: np.ndarray
    U_n: np.ndarray


@dataclass
class EstimationResult:
    mu_hat: np.ndarray  # R x d, column i is one source
    eigvals: np.ndarray  # R x d, in the same column order
    imag_residual: float = 0.0
    ls_cond: list = field(default_factory=list)
    pairing_cond: float = 1.0
    warnings: list = field(default_factory=list)


def signal_subspace(X: np.ndarray, d: int) -> SubspaceDecomp:
    """d dominant left singular vectors of X and the orthogonal complement."""
    p, q = X.shape
    if d > min(p, q):
        raise RankDeficiencyError(f"d={d} exceeds min(rows, cols)={min(p, q)}")
    U, s, Vh = np.linalg.svd(X, full_matrices=False)
    if s[0] == 0 or s[d - 1] / s[0] < RANK_TOL:
        raise RankDeficiencyError(f"data has numerical rank below d={d}")
    U_s = U[:, :d]
    if U.shape[1] == p:
        U_n = U[:, d:]
    else:
        U_n = np.linalg.qr(U_s, mode="complete")[0][:, d:]
    return SubspaceDecomp(U_s, s[:d], Vh[:d].conj().T, U_n)


def ls_invariance(S1: np.ndarray, S2: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares solution of S1 G = S2, where S_k = J~k U_s.

    Returns (G, cond(S1)).
    """
    sv = np.linalg.svd(S1, compute_uv=False)
    if sv.size == 0 or sv[-1] <= RANK_TOL * sv[0] or S1.shape[0] < S1.shape[1]:
        raise SingularInvarianceError("selected subspace J1 U_s is rank deficient")
    G = np.linalg.lstsq(S1, S2, rcond=None)[0]
    return G, float(sv[0] / sv[-1])


def joint_eig(mats: list, real: bool = False, seed: int = JOINT_EIG_SEED):
    """Paired eigenvalues of R matrices sharing one eigenvector basis.

    The basis is taken from the eigenvectors of a linear combination of the
    inputs.  A few fixed combinations are tried (equal weights, each single
    mode, seeded random directions) and the one whose eigenvalues are best
    separated wins, since a small gap amplifies eigenvector errors.  Returns
    (eigvals R x d, T, cond(T)); columns are sorted by the mode-0 eigenvalue
    phase (complex) or value (real).
    """
    R = len(mats)
    if R < 1:
        raise ValueError("need at least one matrix")
    T, best_gap = None, -1.0
    for w in _combination_weights(R, seed):
        ev, V = np.linalg.eig(sum(wr * G for wr, G in zip(w, mats)))
        gap = _min_gap(ev)
        if gap > best_gap:
            T, best_gap = V, gap
    cond = float(np.linalg.cond(T))
    Tinv = np.linalg.inv(T)
    lam = np.array([np.diag(Tinv @ G @ T) for G in mats])
    key = lam[0].real if real else np.angle(lam[0])
    order = np.argsort(key, kind="stable")
    return lam[:, order], T[:, order], cond


def _combination_weights(R: int, seed: int, n_random: int = 4) -> list:
    if R == 1:
        return [np.ones(1)]
    cands = [np.full(R, 1 / np.sqrt(R))] + list(np.eye(R))
    rnd = np.random.default_rng(seed).standard_normal((n_random, R))
    cands += list(rnd / np.linalg.norm(rnd, axis=1, keepdims=True))
    return cands


def _min_gap(ev: np.ndarray) -> float:
    if ev.size < 2:
        return np.inf
    diff = np.abs(ev[:, None] - ev[None, :])
    return float(diff[~np.eye(ev.size, dtype=bool)].min())


def _wrap_arg(z: np.ndarray) -> np.ndarray:
    mu = np.angle(z)
    mu[mu <= -np.pi] = np.pi
    return mu


def _finish_complex(gammas, conds) -> EstimationResult:
    lam, _, cond = joint_eig(gammas)
    res = EstimationResult(_wrap_arg(lam), lam, ls_cond=conds, pairing_cond=cond)
    _pairing_check(res)
    return res


def _finish_real(upsilons, conds) -> EstimationResult:
    omega, _, cond = joint_eig(upsilons, real=True)
    resid = float(np.abs(omega.imag).max(initial=0.0))
    res = EstimationResult(2.0 * np.arctan(omega.real), omega, imag_residual=resid,
                           ls_cond=conds, pairing_cond=cond)
    if resid > COMPLEX_EIG_WARN:
        msg = f"complex eigenvalues in real-valued invariance (residual {resid:.2e})"
        res.warnings.append(msg)
        warnings.warn(msg, ComplexEigenvalueWarning, stacklevel=3)
    _pairing_check(res)
    return res


def _pairing_check(res: EstimationResult) -> None:
    if res.pairing_cond > PAIRING_COND_LIMIT:
        msg = f"ill-conditioned eigenvector basis (cond {res.pairing_cond:.2e}); pairing unreliable"
        res.warnings.append(msg)
        warnings.warn(msg, PairingWarning, stacklevel=3)


def _check_d(d: int, limit: int, name: str) -> None:
    if d < 1 or d > limit:
        raise ResolvabilityError(f"{name} resolves at most {limit} sources here, asked for {d}")


def _selection(grid: SamplingGrid, sel) -> SelectionSet:
    return SelectionSet.max_overlap(grid) if sel is None else sel


def nc_standard_esprit(X: np.ndarray, d: int, grid: SamplingGrid,
                       sel: SelectionSet | None = None) -> EstimationResult:
    sel = _selection(grid, sel)
    _check_d(d, sel.max_sources("nc", X.shape[1]), "NC Standard ESPRIT")
    U = signal_subspace(augment(X), d).U_s
    gammas, conds = [], []
    for r in range(grid.R):
        G, c = ls_invariance(U[sel.rows(r, 1, nc=True)], U[sel.rows(r, 2, nc=True)])
        gammas.append(G)
        conds.append(c)
    return _finish_complex(gammas, conds)


def nc_unitary_esprit(X: np.ndarray, d: int, grid: SamplingGrid,
                      sel: SelectionSet | None = None) -> EstimationResult:
    sel = _selection(grid, sel)
    _check_d(d, sel.max_sources("nc", X.shape[1]), "NC Unitary ESPRIT")
    E = signal_subspace(np.vstack([X.real, X.imag]), d).U_s
    ups, conds = [], []
    for r in range(grid.R):
        K1, K2 = sel.transformed(r, nc=True)
        G, c = ls_invariance(K1 @ E, K2 @ E)
        ups.append(G)
        conds.append(c)
    return _finish_real(ups, conds)


def standard_esprit(X: np.ndarray, d: int, grid: SamplingGrid,
                    sel: SelectionSet | None = None) -> EstimationResult:
    sel = _selection(grid, sel)
    _check_d(d, sel.max_sources("se", X.shape[1]), "Standard ESPRIT")
    U = signal_subspace(X, d).U_s
    gammas, conds = [], []
    for r in range(grid.R):
        G, c = ls_invariance(U[sel.rows(r, 1)], U[sel.rows(r, 2)])
        gammas.append(G)
        conds.append(c)
    return _finish_complex(gammas, conds)


def unitary_fba_transform(X: np.ndarray) -> np.ndarray:
    """Q_M^H [X, Pi X* Pi] Q_2N computed without forming the FBA matrix."""
    M = X.shape[0]
    Y = X[::-1].conj()
    Z = np.hstack([X + Y, 1j * (X - Y)]) / np.sqrt(2.0)
    return (pi_real_basis(M).conj().T @ Z).real


def unitary_esprit(X: np.ndarray, d: int, grid: SamplingGrid,
                   sel: SelectionSet | None = None) -> EstimationResult:
    if not grid.is_centro_symmetric():
        raise UnsupportedGeometryError("Unitary ESPRIT needs a centro-symmetric array")
    sel = _selection(grid, sel)
    _check_d(d, sel.max_sources("ue", X.shape[1]), "Unitary ESPRIT")
    for r in range(grid.R):
        J1, J2 = sel.dense(r, 1), sel.dense(r, 2)
        if not np.array_equal(exchange(J2.shape[0]) @ J2 @ exchange(J2.shape[1]), J1):
            raise UnsupportedGeometryError(f"subarrays of mode {r} are not centro-symmetric")
    E = signal_subspace(unitary_fba_transform(X), d).U_s
    ups, conds = [], []
    for r in range(grid.R):
        K1, K2 = sel.transformed(r, nc=False)
        G, c = ls_invariance(K1 @ E, K2 @ E)
        ups.append(G)
        conds.append(c)
    return _finish_real(ups, conds)


ESTIMATORS = {
    "nc_se": nc_standard_esprit,
    "nc_ue": nc_unitary_esprit,
    "se": standard_esprit,
    "ue": unitary_esprit,
}
