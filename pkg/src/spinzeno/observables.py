"""Measurement post-processing on reduced density matrices.

Conventions: a DensityMatrix over m kept sites uses local bit j for the
j-th kept site in ascending global order, so when the measured spin is
global site 0 it is local bit 0; conditioned blocks then address the
remaining m-1 sites with the same ordering shifted down by one.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError, ConfigurationError, NumericalFailure
from .hilbert import StateVector, TermList, to_matrix

UP = "up"
DOWN = "down"
_BIT = {UP: 1, DOWN: 0}

_HERMITICITY_TOL = 1e-12
_TRACE_TOL = 1e-12
_EIGENVALUE_FLOOR = -1e-10
_ENTROPY_CLIP = 1e-14
_DEGENERACY_GAP = 1e-10


@dataclass
class DensityMatrix:
    n_sites_kept: int
    elements: np.ndarray

    @property
    def dim(self) -> int:
        return 1 << self.n_sites_kept

    def trace(self) -> float:
        return float(np.real(np.trace(self.elements)))

    def validate(self, context: str = "density matrix") -> None:
        """Hermiticity, unit trace, and positivity to module tolerances."""
        m = self.elements
        if np.max(np.abs(m - m.conj().T)) > _HERMITICITY_TOL:
            raise NumericalFailure(f"{context}: lost hermiticity")
        if abs(np.trace(m).real - 1.0) > _TRACE_TOL or abs(np.trace(m).imag) > _TRACE_TOL:
            raise NumericalFailure(f"{context}: trace deviates from 1")
        if np.min(np.linalg.eigvalsh(m)) < _EIGENVALUE_FLOOR:
            raise NumericalFailure(f"{context}: negative eigenvalue")


@dataclass
class ConditionedBlock:
    """Sub-block <a| rho |b> of the measured spin, over the remaining sites."""

    a: str
    b: str
    block: np.ndarray
    trace_ab: complex

    def normalized(self) -> "ConditionedBlock":
        if abs(self.trace_ab) <= 1e-12:
            raise NumericalFailure(
                f"conditioned block ({self.a},{self.b}) has vanishing trace"
            )
        return ConditionedBlock(self.a, self.b, self.block / self.trace_ab, 1.0 + 0j)

    def to_density_matrix(self) -> DensityMatrix:
        m = int(np.log2(self.block.shape[0]))
        return DensityMatrix(m, self.block)


@dataclass
class StructureFactorSample:
    kappa: float
    components: np.ndarray    # 3x3 complex, indices (a, b) over (x, y, z)

    def diagonal(self, axis: str) -> float:
        i = "xyz".index(axis)
        return float(np.real(self.components[i, i]))


# ---------------------------------------------------------------------------
# reduction and conditioning


def reduce(psi: StateVector, kept, layout=None) -> DensityMatrix:
    """Partial trace of |psi><psi| onto the kept sites."""
    kept = sorted(kept)
    n = psi.n_sites
    if any(not 0 <= k < n for k in kept) or len(set(kept)) != len(kept):
        raise ConfigurationError(f"invalid kept set {kept}")
    m = len(kept)
    if m > 14:
        raise CapacityError(f"dense RDM over {m} sites refused (cap 14)")
    # tensor axis of site k is n-1-k; put kept axes last, most significant first
    env_axes = [n - 1 - k for k in range(n - 1, -1, -1) if k not in kept]
    kept_axes = [n - 1 - k for k in reversed(kept)]
    tensor = psi.amplitudes.reshape((2,) * n).transpose(env_axes + kept_axes)
    mat = np.ascontiguousarray(tensor).reshape(1 << (n - m), 1 << m)
    rho = mat.T @ mat.conj()
    return DensityMatrix(m, rho)


def condition(rho: DensityMatrix, a: str, b: str) -> ConditionedBlock:
    """RDM block conditioned on the measured spin, which must be local site 0."""
    if a not in _BIT or b not in _BIT:
        raise ConfigurationError(f"labels must be '{UP}' or '{DOWN}'")
    if rho.n_sites_kept < 2:
        raise ConfigurationError("conditioning needs at least 2 kept sites")
    block = rho.elements[_BIT[a]::2, _BIT[b]::2]
    return ConditionedBlock(a, b, np.ascontiguousarray(block), complex(np.trace(block)))


def coherence_local(rho: DensityMatrix) -> float:
    """Largest magnitude in the up-down block (computational basis)."""
    return float(np.max(np.abs(condition(rho, UP, DOWN).block)))


def coherence_global(rho: DensityMatrix) -> float:
    """Largest off-diagonal magnitude within the up-up block."""
    block = np.abs(condition(rho, UP, UP).block.copy())
    np.fill_diagonal(block, 0.0)
    return float(np.max(block))


def entropy(rho: DensityMatrix) -> float:
    """von Neumann entropy -Tr rho ln rho via eigenvalues."""
    evals = np.linalg.eigvalsh(rho.elements)
    if evals[0] < -1e-8:
        raise NumericalFailure(f"entropy: eigenvalue {evals[0]:.3e} below -1e-8")
    evals = evals[evals > _ENTROPY_CLIP]
    return float(-np.sum(evals * np.log(evals)))


def correlation(rho: DensityMatrix, i: int, j: int) -> float:
    """Tr[rho S_i . S_j] for two (local) kept sites."""
    m = rho.n_sites_kept
    if i == j or not (0 <= i < m and 0 <= j < m):
        raise ConfigurationError(f"invalid site pair ({i}, {j}) for {m} kept sites")
    op = _spin_dot_matrix(m, i, j)
    return float(np.real(np.trace(rho.elements @ op)))


@lru_cache(maxsize=256)
def _spin_dot_matrix(m: int, i: int, j: int) -> np.ndarray:
    tl = TermList(m, tuple(
        (1.0, ((i, a), (j, a))) for a in ("x", "y", "z")
    ))
    return to_matrix(tl)


# ---------------------------------------------------------------------------
# structure factor


@lru_cache(maxsize=64)
def _fourier_spin(m: int, kappa: float, axis: str) -> np.ndarray:
    """S^a(kappa) = N^(-1/2) sum_l e^(i kappa l) S_l^a as a dense matrix."""
    dim = 1 << m
    out = np.zeros((dim, dim), dtype=np.complex128)
    for l in range(m):
        tl = TermList(m, ((1.0, ((l, axis),)),))
        out += np.exp(1j * kappa * l) * to_matrix(tl)
    return out / np.sqrt(m)


def momentum_grid(n_sites: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n_sites) / n_sites


def structure_factor(rho: DensityMatrix, kappa: float) -> StructureFactorSample:
    """Equal-time spin correlations K^{ab}(kappa) = Tr[rho S^a(kappa) S^b(-kappa)]."""
    m = rho.n_sites_kept
    ratio = kappa * m / (2.0 * np.pi)
    if abs(ratio - round(ratio)) > 1e-9:
        raise ConfigurationError(
            f"kappa={kappa} is not a multiple of 2*pi/{m}"
        )
    comps = np.zeros((3, 3), dtype=np.complex128)
    ops = {a: _fourier_spin(m, kappa, a) for a in "xyz"}
    for ia, a in enumerate("xyz"):
        for ib, b in enumerate("xyz"):
            # S^b(-kappa) = S^b(kappa)^dagger
            comps[ia, ib] = np.trace(rho.elements @ ops[a] @ ops[b].conj().T)
    return StructureFactorSample(kappa, comps)


# ---------------------------------------------------------------------------
# eigenbasis coherence


def _tiebroken_eigenbasis(h_mat: np.ndarray, rho_block: np.ndarray) -> np.ndarray:
    """Eigenbasis of h_mat with degenerate clusters fixed by diagonalizing
    total S^z and then the block itself inside each cluster."""
    dim = h_mat.shape[0]
    m = int(np.log2(dim))
    evals, evecs = np.linalg.eigh(h_mat)
    sz_diag = np.array(
        [sum(((b >> k) & 1) - 0.5 for k in range(m)) for b in range(dim)]
    )

    def refine(cols: np.ndarray, operator_diagonalizer) -> list[np.ndarray]:
        vals, rot = operator_diagonalizer(cols)
        cols = cols @ rot
        out = []
        start = 0
        for t in range(1, len(vals) + 1):
            if t == len(vals) or vals[t] - vals[t - 1] > _DEGENERACY_GAP:
                out.append(cols[:, start:t])
                start = t
        return out

    basis_cols = []
    start = 0
    for t in range(1, dim + 1):
        if t == dim or evals[t] - evals[t - 1] > _DEGENERACY_GAP:
            cluster = evecs[:, start:t]
            if cluster.shape[1] == 1:
                basis_cols.append(cluster)
            else:
                for sub in refine(
                    cluster,
                    lambda c: np.linalg.eigh(c.conj().T @ (sz_diag[:, None] * c)),
                ):
                    if sub.shape[1] == 1:
                        basis_cols.append(sub)
                    else:
                        _, rot = np.linalg.eigh(sub.conj().T @ rho_block @ sub)
                        basis_cols.append(sub @ rot)
            start = t
    return np.hstack(basis_cols)


def coherence_eigenbasis(block: ConditionedBlock, H_eff: TermList) -> float:
    """Largest off-diagonal magnitude of the block in the H_eff eigenbasis."""
    rho_block = block.block
    h_mat = to_matrix(H_eff)
    if h_mat.shape != rho_block.shape:
        raise ConfigurationError("effective Hamiltonian does not match block size")
    basis = _tiebroken_eigenbasis(h_mat, rho_block)
    rotated = np.abs(basis.conj().T @ rho_block @ basis)
    np.fill_diagonal(rotated, 0.0)
    return float(np.max(rotated))
