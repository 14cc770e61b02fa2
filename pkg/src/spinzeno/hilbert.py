"""State vectors, spin-operator term lists, and the kernels applying them.

Basis convention, fixed for the whole package:

* site k of an n-site system is bit k of the basis-state integer,
* bit value 1 is the single-site state "up" (S^z eigenvalue +1/2),
* spin operators are S^a = sigma^a / 2; the factor 1/2 lives in the
  kernel, never in term coefficients.

All energies are expressed in units of the central-system exchange
constant, all amplitudes in double precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernel
from .errors import CapacityError, ConfigurationError

AXES = ("x", "y", "z")

#: hard cap on representable systems (memory guard lives in the harness)
MAX_SITES = 26


def _check_n_sites(n: int) -> None:
    if not 1 <= n <= MAX_SITES:
        raise CapacityError(f"n_sites={n} outside supported range 1..{MAX_SITES}")


# ---------------------------------------------------------------------------
# state vectors


@dataclass
class StateVector:
    """Dense complex amplitudes over the 2^n_sites computational basis."""

    n_sites: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_n_sites(self.n_sites)
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n_sites,):
            raise ConfigurationError(
                f"amplitude array has length {self.amplitudes.shape}, "
                f"expected 2^{self.n_sites}"
            )

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise ConfigurationError("cannot normalize the zero vector")
        return StateVector(self.n_sites, self.amplitudes / nrm)

    def copy(self) -> "StateVector":
        return StateVector(self.n_sites, self.amplitudes.copy())


def basis_state(n_sites: int, bits: int) -> StateVector:
    """The computational basis state whose site occupations are `bits`."""
    _check_n_sites(n_sites)
    amp = np.zeros(1 << n_sites, dtype=np.complex128)
    amp[bits] = 1.0
    return StateVector(n_sites, amp)


def inner_product(phi: StateVector, psi: StateVector) -> complex:
    """<phi|psi> with conjugation on phi."""
    if phi.n_sites != psi.n_sites:
        raise ConfigurationError(
            f"inner_product: {phi.n_sites} vs {psi.n_sites} sites"
        )
    return complex(np.vdot(phi.amplitudes, psi.amplitudes))


def tensor_product(parts: Sequence[StateVector], layout) -> StateVector:
    """Product state over the site blocks of `layout`.

    `layout` must provide n_total and part_blocks(); parts are given in
    block order (ascending site index), each block contiguous.
    """
    blocks = layout.part_blocks()
    if len(blocks) != len(parts):
        raise ConfigurationError(
            f"{len(parts)} parts for {len(blocks)} layout blocks"
        )
    lo = 0
    for part, block in zip(parts, blocks):
        sites = sorted(block)
        if sites != list(range(lo, lo + len(sites))):
            raise ConfigurationError("layout blocks must be contiguous and ordered")
        if part.n_sites != len(sites):
            raise ConfigurationError(
                f"part with {part.n_sites} sites assigned to block of {len(sites)}"
            )
        lo += len(sites)
    if lo != layout.n_total:
        raise ConfigurationError("layout blocks do not cover all sites")
    _check_n_sites(layout.n_total)
    # high blocks are leading kron factors: site k <-> bit k
    amp = parts[-1].amplitudes
    for part in reversed(parts[:-1]):
        amp = np.kron(amp, part.amplitudes)
    return StateVector(layout.n_total, amp)


# ---------------------------------------------------------------------------
# term lists


@dataclass(frozen=True)
class Term:
    """coefficient * product of single-site spin operators on distinct sites."""

    coefficient: float
    factors: tuple[tuple[int, str], ...]


@dataclass
class TermList:
    """A Hermitian operator as a weighted sum of spin-operator products."""

    n_sites: int
    terms: tuple[Term, ...]
    _compiled: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        _check_n_sites(self.n_sites)
        self.terms = tuple(
            t if isinstance(t, Term) else Term(float(t[0]), tuple(t[1]))
            for t in self.terms
        )
        for t in self.terms:
            coeff = float(t.coefficient)
            if not np.isfinite(coeff):
                raise ConfigurationError(f"non-finite coefficient in {t}")
            sites = [s for s, _ in t.factors]
            if len(set(sites)) != len(sites):
                raise ConfigurationError(f"repeated site in term {t}")
            for s, a in t.factors:
                if not 0 <= s < self.n_sites:
                    raise ConfigurationError(
                        f"site {s} out of range for {self.n_sites} sites"
                    )
                if a not in AXES:
                    raise ConfigurationError(f"unknown axis {a!r}")

    def __add__(self, other: "TermList") -> "TermList":
        if other.n_sites != self.n_sites:
            raise ConfigurationError("cannot add term lists of different size")
        return TermList(self.n_sites, self.terms + other.terms)

    def scaled(self, factor: float) -> "TermList":
        return TermList(
            self.n_sites,
            tuple(Term(t.coefficient * factor, t.factors) for t in self.terms),
        )

    def term_norm_bound(self) -> float:
        """Sum of operator norms of the individual terms (each S^a has norm 1/2)."""
        return float(
            sum(abs(t.coefficient) * 0.5 ** len(t.factors) for t in self.terms)
        )


def shift_sites(H: TermList, offset: int, n_sites: int) -> TermList:
    """The same operator with every site index shifted by `offset`."""
    terms = tuple(
        Term(t.coefficient, tuple((s + offset, a) for s, a in t.factors))
        for t in H.terms
    )
    return TermList(n_sites, terms)


# ---------------------------------------------------------------------------
# term-list compilation
#
# Each term reduces to (flipmask, signmask, c0); see _kernel for the
# amplitude formula.  Off-diagonal terms are grouped by flipmask.


def _term_masks(term: Term):
    flip = 0
    sign = 0
    n_y = 0
    n_z = 0
    for site, axis in term.factors:
        bit = 1 << site
        if axis == "x":
            flip |= bit
        elif axis == "y":
            flip |= bit
            sign |= bit
            n_y += 1
        else:
            sign |= bit
            n_z += 1
    c0 = (
        term.coefficient
        * 0.5 ** len(term.factors)
        * (-1.0) ** n_z
        * (-1j) ** n_y
    )
    return flip, sign, complex(c0)


class _PairPlan:
    """Fast-path plan: diagonal + two-site flip groups with real weights."""

    def __init__(self, diag, r, lk, ll, lf, lw4, hk, hl, hw4):
        self.diag = diag
        self.diag2 = np.repeat(diag, 2)
        self.r = r
        self.lk, self.ll, self.lf, self.lw4 = lk, ll, lf, lw4
        self.hk, self.hl, self.hw4 = hk, hl, hw4
        self._ws = None

    def workspace(self):
        ws = _kernel.make_workspace(self.r)
        if self._ws is None or self._ws.shape != ws.shape:
            self._ws = ws
        return self._ws

    def matvec(self, psi: np.ndarray, out: np.ndarray) -> None:
        _kernel.pair_matvec(
            psi.view(np.float64), out.view(np.float64), self.diag2, self.r,
            self.lk, self.ll, self.lf, self.lw4, self.hk, self.hl, self.hw4,
        )

    def cheb_step(self, psi, prev, acc, scale2, pm, coef) -> None:
        _kernel.pair_cheb(
            psi.view(np.float64), prev.view(np.float64), acc.view(np.float64),
            self.workspace(), self.diag2, self.r,
            self.lk, self.ll, self.lf, self.lw4, self.hk, self.hl, self.hw4,
            float(scale2), float(pm), float(coef.real), float(coef.imag),
        )


class _GenericPlan:
    """Scalar-gather plan for arbitrary term structures."""

    def __init__(self, diag, gflip, gstart, tc0, tsign):
        self.diag = diag
        self.gflip, self.gstart, self.tc0, self.tsign = gflip, gstart, tc0, tsign

    def matvec(self, psi, out) -> None:
        _kernel.generic_matvec(
            psi, out, self.diag, self.gflip, self.gstart, self.tc0, self.tsign
        )

    def cheb_step(self, psi, prev, acc, scale2, pm, coef) -> None:
        _kernel.generic_cheb(
            psi, prev, acc, self.diag, self.gflip, self.gstart, self.tc0,
            self.tsign, float(scale2), float(pm), complex(coef),
        )


def _choose_run_exponent(n_sites: int, pair_bits: list[tuple[int, int]]) -> int:
    # largest r <= 10 with no pair straddling the run boundary
    for r in range(min(10, n_sites), -1, -1):
        if all(l < r or k >= r for k, l in pair_bits):
            return r
    return 0


def _compile(tl: TermList):
    dim = 1 << tl.n_sites
    diag = np.zeros(dim, dtype=np.float64)
    groups: dict[int, list[tuple[complex, int]]] = {}
    diag_c0 = []
    diag_sign = []
    for term in tl.terms:
        flip, sign, c0 = _term_masks(term)
        if flip == 0:
            diag_c0.append(c0.real)
            diag_sign.append(sign)
        else:
            groups.setdefault(flip, []).append((c0, sign))
    if diag_c0:
        _kernel.fill_diagonal(
            diag,
            np.asarray(diag_c0, dtype=np.float64),
            np.asarray(diag_sign, dtype=np.int64),
        )

    # try the pair fast path
    pair_ok = True
    pairs = []
    for flip, entries in groups.items():
        bits = [k for k in range(tl.n_sites) if flip >> k & 1]
        if len(bits) != 2 or any(sign & ~flip for _, sign in entries):
            pair_ok = False
            break
        k, l = bits
        w4 = np.zeros(4, dtype=np.complex128)
        for q in range(4):
            src_bits = (q & 1) << k | (q >> 1) << l
            for c0, sign in entries:
                par = bin(src_bits & sign).count("1") & 1
                w4[q] += -c0 if par else c0
        if np.any(w4.imag != 0.0):
            pair_ok = False
            break
        pairs.append((k, l, w4.real.copy()))

    if pair_ok:
        r = _choose_run_exponent(tl.n_sites, [(k, l) for k, l, _ in pairs])
        low = [(k, l, w) for k, l, w in pairs if l < r]
        high = [(k, l, w) for k, l, w in pairs if k >= r]
        lk = np.asarray([k for k, _, _ in low], dtype=np.int64)
        ll = np.asarray([l for _, l, _ in low], dtype=np.int64)
        lf = np.asarray([(1 << k) | (1 << l) for k, l, _ in low], dtype=np.int64)
        lw4 = np.asarray([w for _, _, w in low], dtype=np.float64).reshape(-1, 4)
        hk = np.asarray([k for k, _, _ in high], dtype=np.int64)
        hl = np.asarray([l for _, l, _ in high], dtype=np.int64)
        hw4 = np.asarray([w for _, _, w in high], dtype=np.float64).reshape(-1, 4)
        return _PairPlan(diag, r, lk, ll, lf, lw4, hk, hl, hw4)

    flips = sorted(groups)
    gflip = np.asarray(flips, dtype=np.int64)
    gstart = np.zeros(len(flips) + 1, dtype=np.int64)
    tc0 = []
    tsign = []
    for i, f in enumerate(flips):
        for c0, sign in groups[f]:
            tc0.append(c0)
            tsign.append(sign)
        gstart[i + 1] = len(tc0)
    return _GenericPlan(
        diag,
        gflip,
        gstart,
        np.asarray(tc0, dtype=np.complex128),
        np.asarray(tsign, dtype=np.int64),
    )


def compiled(tl: TermList):
    if tl._compiled is None:
        tl._compiled = _compile(tl)
    return tl._compiled


# ---------------------------------------------------------------------------
# operator application


def apply_term_list(H: TermList, psi: StateVector) -> StateVector:
    """H|psi>, out of place; no normalization."""
    if H.n_sites != psi.n_sites:
        raise ConfigurationError(
            f"operator on {H.n_sites} sites applied to {psi.n_sites}-site state"
        )
    out = np.empty_like(psi.amplitudes)
    compiled(H).matvec(psi.amplitudes, out)
    return StateVector(psi.n_sites, out)


def expectation(H: TermList, psi: StateVector) -> float:
    """<psi|H|psi> (real for the Hermitian term lists built here)."""
    return float(np.real(inner_product(psi, apply_term_list(H, psi))))


def to_matrix(H: TermList, max_dim: int = 4096) -> np.ndarray:
    """Dense matrix of H, materialized column-by-column through the kernel."""
    dim = 1 << H.n_sites
    if dim > max_dim:
        raise CapacityError(f"dense materialization of dim {dim} refused")
    plan = compiled(H)
    mat = np.empty((dim, dim), dtype=np.complex128)
    col_in = np.zeros(dim, dtype=np.complex128)
    col_out = np.empty(dim, dtype=np.complex128)
    for j in range(dim):
        col_in[j] = 1.0
        plan.matvec(col_in, col_out)
        mat[:, j] = col_out
        col_in[j] = 0.0
    return mat
