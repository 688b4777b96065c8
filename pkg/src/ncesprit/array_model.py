"""Array geometry: sampling grids, steering matrices, selection matrices and
the left Pi-real transforms used by the unitary estimators.

Row ordering convention: the M = M_1 * ... * M_R sensors are stacked
lexicographically with mode 0 the slowest-varying index, so a steering
vector is ``kron(a_0, a_1, ..., a_{R-1})``.  Mode indices are 0-based.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ModelError

PAIR_TOL = 1e-9
CENTRO_HERMITIAN_TOL = 1e-9


def exchange(n: int) -> np.ndarray:
    """n x n exchange matrix (ones on the antidiagonal)."""
    return np.eye(n)[::-1]


@dataclass(frozen=True)
class SamplingGrid:
    """Outer product of R one-dimensional sampling grids.

    ``positions[r]`` holds the real sample offsets of mode ``r`` in units of
    the shift distance (a ULA has offsets 0, 1, ..., M_r - 1).
    """

    positions: tuple[np.ndarray, ...]

    def __post_init__(self):
        modes = []
        for r, p in enumerate(self.positions):
            p = np.asarray(p, dtype=float).ravel()
            if p.size < 2:
                raise ModelError(f"mode {r} needs at least 2 positions, got {p.size}")
            if np.any(np.diff(p) <= 0):
                raise ModelError(f"positions of mode {r} must be strictly increasing")
            p.setflags(write=False)
            modes.append(p)
        if not modes:
            raise ModelError("grid needs at least one mode")
        object.__setattr__(self, "positions", tuple(modes))

    @classmethod
    def uniform(cls, *sizes: int) -> "SamplingGrid":
        return cls(tuple(np.arange(m, dtype=float) for m in sizes))

    @property
    def R(self) -> int:
        return len(self.positions)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(p.size for p in self.positions)

    @property
    def M(self) -> int:
        return int(np.prod(self.sizes))

    def check_mode(self, r: int) -> None:
        if not 0 <= r < self.R:
            raise ModelError(f"mode index {r} out of range for R={self.R}")

    def is_uniform(self) -> bool:
        return all(np.allclose(np.diff(p), 1.0, atol=PAIR_TOL, rtol=0) for p in self.positions)

    def is_centro_symmetric(self) -> bool:
        return all(np.allclose(p + p[::-1], p[0] + p[-1], atol=PAIR_TOL, rtol=0)
                   for p in self.positions)

    def centered(self) -> "SamplingGrid":
        """Same grid with the phase reference moved to the centroid."""
        return SamplingGrid(tuple(p - p.mean() for p in self.positions))


@dataclass(frozen=True)
class SourceParams:
    """Spatial frequencies ``mu`` (R x d, radians) and rotation phases ``phi`` (d)."""

    mu: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        mu = np.atleast_2d(np.asarray(self.mu, dtype=float))
        phi = np.asarray(self.phi, dtype=float).ravel()
        if phi.size != mu.shape[1]:
            raise ModelError(f"{mu.shape[1]} sources but {phi.size} phases")
        if np.any(mu <= -np.pi) or np.any(mu > np.pi):
            raise ModelError("spatial frequencies must lie in (-pi, pi]")
        d = mu.shape[1]
        for i in range(d):
            for j in range(i + 1, d):
                if np.array_equal(mu[:, i], mu[:, j]):
                    raise ModelError(f"sources {i} and {j} share the same frequencies")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "phi", phi)

    @property
    def R(self) -> int:
        return self.mu.shape[0]

    @property
    def d(self) -> int:
        return self.mu.shape[1]

    def permuted(self, order: Sequence[int]) -> "SourceParams":
        order = list(order)
        return SourceParams(self.mu[:, order], self.phi[order])


# ---------------------------------------------------------------------------
# steering


def mode_steering(grid: SamplingGrid, r: int, mu: float) -> np.ndarray:
    grid.check_mode(r)
    return np.exp(1j * grid.positions[r] * mu)


def steering_matrix(grid: SamplingGrid, src: SourceParams) -> np.ndarray:
    """M x d steering matrix; column i is the Kronecker product over modes."""
    if src.R != grid.R:
        raise ModelError(f"grid has R={grid.R} modes but sources have R={src.R}")
    A = np.ones((1, src.d), dtype=complex)
    for r in range(grid.R):
        # column-wise Kronecker product (Khatri-Rao)
        a_r = np.exp(1j * np.outer(grid.positions[r], src.mu[r]))
        A = (A[:, None, :] * a_r[None, :, :]).reshape(-1, src.d)
    return A


def augmented_steering(A: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """2M x d augmented steering matrix ``[A; Pi A* Psi* Psi*]``."""
    rot = np.exp(-2j * np.asarray(phi, dtype=float))
    return np.vstack([A, A.conj()[::-1] * rot])


# ---------------------------------------------------------------------------
# selection matrices


@dataclass(frozen=True)
class ModeSelection:
    """Subarray pair of a single mode, stored as row index lists."""

    idx1: np.ndarray
    idx2: np.ndarray
    size: int

    @property
    def m_sel(self) -> int:
        return self.idx1.size

    @property
    def J1(self) -> np.ndarray:
        return _rows_to_matrix(self.idx1, self.size)

    @property
    def J2(self) -> np.ndarray:
        return _rows_to_matrix(self.idx2, self.size)


def _rows_to_matrix(idx: np.ndarray, ncols: int) -> np.ndarray:
    J = np.zeros((idx.size, ncols))
    J[np.arange(idx.size), idx] = 1.0
    return J


def max_overlap_selection(grid: SamplingGrid, r: int, shift: float = 1.0) -> ModeSelection:
    """Pair every position p of mode r with p + shift when both exist."""
    grid.check_mode(r)
    p = grid.positions[r]
    idx1, idx2 = [], []
    for i, pos in enumerate(p):
        hit = np.flatnonzero(np.abs(p - (pos + shift)) <= PAIR_TOL)
        if hit.size:
            idx1.append(i)
            idx2.append(int(hit[0]))
    if not idx1:
        raise ModelError(f"mode {r} is not shift-invariant for shift {shift}")
    return ModeSelection(np.array(idx1), np.array(idx2), p.size)


def _mode_blocks(grid: SamplingGrid, r: int) -> tuple[int, int]:
    left = int(np.prod(grid.sizes[:r]))
    right = int(np.prod(grid.sizes[r + 1:]))
    return left, right


def effective_selection(Jk: np.ndarray, grid: SamplingGrid, r: int) -> np.ndarray:
    """Dense ``I_left (x) Jk (x) I_right`` for mode r."""
    grid.check_mode(r)
    if Jk.shape[1] != grid.sizes[r]:
        raise ModelError(f"selection has {Jk.shape[1]} columns, mode {r} has {grid.sizes[r]}")
    left, right = _mode_blocks(grid, r)
    return np.kron(np.kron(np.eye(left), Jk), np.eye(right))


def effective_indices(idx: np.ndarray, grid: SamplingGrid, r: int) -> np.ndarray:
    """Row indices selected by ``I (x) J (x) I`` when J selects ``idx``."""
    left, right = _mode_blocks(grid, r)
    Mr = grid.sizes[r]
    rows = (np.arange(left)[:, None, None] * Mr * right
            + np.asarray(idx)[None, :, None] * right
            + np.arange(right)[None, None, :])
    return rows.ravel()


def nc_selection(J1: np.ndarray, J2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mode-level augmented selection matrices ``blkdiag{J1, Pi J2 Pi}`` etc."""
    m, Mr = J1.shape
    Pm, PM = exchange(m), exchange(Mr)
    Z = np.zeros((m, Mr))
    Jn1 = np.block([[J1, Z], [Z, Pm @ J2 @ PM]])
    Jn2 = np.block([[J2, Z], [Z, Pm @ J1 @ PM]])
    return Jn1, Jn2


@dataclass(frozen=True)
class SelectionSet:
    """Per-mode subarray selections for a grid.

    The augmented selections act on ``[x; Pi_M x*]`` and are assembled as
    ``blkdiag{J~1, Pi J~2 Pi}`` / ``blkdiag{J~2, Pi J~1 Pi}``, which keeps the
    column ordering of the stacked augmented data for any R.
    """

    grid: SamplingGrid
    modes: tuple[ModeSelection, ...]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def max_overlap(cls, grid: SamplingGrid, shift: float = 1.0) -> "SelectionSet":
        return cls(grid, tuple(max_overlap_selection(grid, r, shift) for r in range(grid.R)))

    def n_rows(self, r: int) -> int:
        """(M / M_r) * M_r^(sel): rows of the physical effective selection."""
        return self.grid.M // self.grid.sizes[r] * self.modes[r].m_sel

    def rows(self, r: int, k: int, nc: bool = False) -> np.ndarray:
        """Row-gather indices equivalent to multiplying by J~k (or J~k^(nc))."""
        key = ("rows", r, k, nc)
        if key not in self._cache:
            sel = self.modes[r]
            own = sel.idx1 if k == 1 else sel.idx2
            eff = effective_indices(own, self.grid, r)
            if nc:
                other = sel.idx2 if k == 1 else sel.idx1
                M = self.grid.M
                flipped = M - 1 - effective_indices(other, self.grid, r)[::-1]
                eff = np.concatenate([eff, M + flipped])
            eff.setflags(write=False)
            self._cache[key] = eff
        return self._cache[key]

    def dense(self, r: int, k: int, nc: bool = False) -> np.ndarray:
        ncols = 2 * self.grid.M if nc else self.grid.M
        return _rows_to_matrix(self.rows(r, k, nc), ncols)

    def transformed(self, r: int, nc: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """Real-valued selection pair (K~1, K~2) for mode r."""
        key = ("K", r, nc)
        if key not in self._cache:
            self._cache[key] = transformed_selection(self.dense(r, 2, nc))
        return self._cache[key]

    def max_sources(self, kind: str, N: int) -> int:
        """Identifiability limit for ``kind`` in {"nc", "se", "ue"}."""
        m = min(self.n_rows(r) for r in range(self.grid.R))
        if kind == "nc":
            return min(2 * m, N)
        if kind == "se":
            return min(m, N)
        if kind == "ue":
            return min(m, 2 * N)
        raise ValueError(f"unknown estimator family {kind!r}")


# ---------------------------------------------------------------------------
# left Pi-real transforms


def pi_real_basis(n: int) -> np.ndarray:
    """Sparse unitary left Pi-real matrix Q_n (Pi_n Q_n* = Q_n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    h = n // 2
    I, P = np.eye(h), exchange(h)
    Q = np.zeros((n, n), dtype=complex)
    Q[:h, :h] = I
    Q[:h, n - h:] = 1j * I
    Q[n - h:, :h] = P
    Q[n - h:, n - h:] = -1j * P
    if n % 2:
        Q[h, h] = np.sqrt(2.0)
    return Q / np.sqrt(2.0)


def is_centro_hermitian(Z: np.ndarray, tol: float = CENTRO_HERMITIAN_TOL) -> bool:
    scale = max(np.abs(Z).max(initial=0.0), 1.0)
    return np.abs(Z[::-1, ::-1].conj() - Z).max(initial=0.0) <= tol * scale


def real_transform(Z: np.ndarray, tol: float = CENTRO_HERMITIAN_TOL) -> np.ndarray:
    """Map a centro-Hermitian p x q matrix to the real matrix Q_p^H Z Q_q."""
    if not is_centro_hermitian(Z, tol):
        raise ModelError("input is not centro-Hermitian")
    p, q = Z.shape
    return (pi_real_basis(p).conj().T @ Z @ pi_real_basis(q)).real


def fast_real_stack(X: np.ndarray) -> np.ndarray:
    """``[Re X; Im X]``: the nonzero half of the transformed NC data, up to 2."""
    return np.vstack([X.real, X.imag])


def transformed_selection(J2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """K~1 = 2 Re{Q^H J2 Q}, K~2 = 2 Im{Q^H J2 Q} for an augmented J2."""
    m, n = J2.shape
    T = pi_real_basis(m).conj().T @ J2 @ pi_real_basis(n)
    return 2.0 * T.real, 2.0 * T.imag
