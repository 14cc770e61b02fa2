"""Ground, random, and thermal state construction.

Ground states come from Lanczos iteration with full reorthogonalization
(dense diagonalization for small dimensions), random states from explicit
Box-Muller complex Gaussians, thermal-like states from imaginary-time
Chebyshev evolution of a random state followed by normalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure
from .hilbert import StateVector, TermList, apply_term_list, to_matrix
from .propagation import IMAG_TIME, evolve, plan_evolution, spectral_window

_DENSE_DIM = 4096
_LANCZOS_MAX_ITER = 500
_LANCZOS_TOL = 1e-12
_DEGENERACY_GAP = 1e-10
#: fixed stream for the Lanczos start vector; ground states carry no user seed
_LANCZOS_SEED = 0x5EED


@dataclass
class PreparedState:
    vector: StateVector
    kind: str                       # ground | random | thermal | product
    seed: int | None = None
    beta: float | None = None
    residual: float | None = None
    degenerate_flag: bool = False


def _box_muller(rng: np.random.Generator, n: int) -> np.ndarray:
    """n independent standard complex Gaussians from uniform draws."""
    u1 = 1.0 - rng.random(n)        # (0, 1]; keeps log finite
    u2 = rng.random(n)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    return radius * (np.cos(angle) + 1j * np.sin(angle))


def random_state(n_sites: int, seed: int) -> PreparedState:
    """Haar-uniform direction: normalized Box-Muller Gaussian amplitudes."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    amp = _box_muller(rng, 1 << n_sites)
    amp /= np.linalg.norm(amp)
    return PreparedState(StateVector(n_sites, amp), "random", seed=seed)


def _dense_ground(H: TermList) -> tuple[np.ndarray, float, bool]:
    mat = to_matrix(H, max_dim=_DENSE_DIM)
    evals, evecs = np.linalg.eigh(mat)
    degenerate = len(evals) > 1 and evals[1] - evals[0] < _DEGENERACY_GAP
    return np.ascontiguousarray(evecs[:, 0]), float(evals[0]), degenerate


def _lanczos_ground(H: TermList) -> tuple[np.ndarray, float, bool]:
    dim = 1 << H.n_sites
    halfwidth = spectral_window(H).halfwidth
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(_LANCZOS_SEED)))
    v = _box_muller(rng, dim)
    v /= np.linalg.norm(v)
    basis = [v]
    alphas: list[float] = []
    betas: list[float] = []
    max_iter = min(_LANCZOS_MAX_ITER, dim)
    for it in range(max_iter):
        w = apply_term_list(H, StateVector(H.n_sites, basis[-1])).amplitudes
        alphas.append(float(np.real(np.vdot(basis[-1], w))))
        w -= alphas[-1] * basis[-1]
        if len(basis) > 1:
            w -= betas[-1] * basis[-2]
        # full reorthogonalization, twice for numerical safety
        for _ in range(2):
            for b in basis:
                w -= np.vdot(b, w) * b
        beta = float(np.linalg.norm(w))
        # Ritz residual for the current lowest eigenpair: beta * |y[-1]|
        tri = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
        tvals, tvecs = np.linalg.eigh(tri)
        resid = beta * abs(tvecs[-1, 0])
        if resid <= _LANCZOS_TOL * max(halfwidth, 1e-300) or beta < 1e-14:
            vec = np.zeros(dim, dtype=np.complex128)
            for coef, b in zip(tvecs[:, 0], basis):
                vec += coef * b
            vec /= np.linalg.norm(vec)
            degenerate = len(tvals) > 1 and tvals[1] - tvals[0] < _DEGENERACY_GAP
            if beta < 1e-14 and resid > _LANCZOS_TOL * max(halfwidth, 1e-300):
                # Krylov space closed on an invariant subspace; restart from
                # a fresh direction orthogonal to it
                v = _box_muller(rng, dim)
                for b in basis:
                    v -= np.vdot(b, v) * b
                nv = np.linalg.norm(v)
                if nv < 1e-10:
                    return vec, float(tvals[0]), degenerate
                basis.append(v / nv)
                betas.append(0.0)
                continue
            return vec, float(tvals[0]), degenerate
        betas.append(beta)
        basis.append(w / beta)
    raise NumericalFailure(
        f"Lanczos did not converge in {max_iter} iterations (residual {resid:.3e})"
    )


def ground_state(H: TermList, method: str = "auto") -> tuple[PreparedState, float]:
    """Lowest eigenpair of H; returns (prepared state, ground energy)."""
    dim = 1 << H.n_sites
    if method == "auto":
        method = "dense" if dim <= _DENSE_DIM else "lanczos"
    if method == "dense":
        vec, e0, degenerate = _dense_ground(H)
    elif method == "lanczos":
        vec, e0, degenerate = _lanczos_ground(H)
    else:
        raise NumericalFailure(f"unknown ground-state method {method!r}")
    state = StateVector(H.n_sites, vec)
    hw = max(spectral_window(H).halfwidth, 1e-300)
    residual = float(
        np.linalg.norm(apply_term_list(H, state).amplitudes - e0 * vec)
    )
    if residual > 1e-10 * hw:
        raise NumericalFailure(
            f"ground-state residual {residual:.3e} exceeds 1e-10 * halfwidth"
        )
    return (
        PreparedState(state, "ground", residual=residual, degenerate_flag=degenerate),
        e0,
    )


def thermal_state(H_env: TermList, beta: float, seed: int) -> PreparedState:
    """normalize(exp(-beta H_env / 2) |random>), the typicality thermal state.

    The imaginary-time evolution is applied in segments with normalization
    in between, which leaves the direction unchanged but keeps every
    intermediate norm finite for any beta.
    """
    if beta < 0:
        raise NumericalFailure("thermal state needs beta >= 0")
    prep = random_state(H_env.n_sites, seed)
    psi = prep.vector
    tau_total = 0.5 * beta
    hw = spectral_window(H_env).halfwidth
    # normalize between short segments; the direction is unchanged but the
    # norm stays 1 and truncation errors are not amplified across segments
    seg = tau_total if tau_total * hw <= 30.0 else 30.0 / hw
    remaining = tau_total
    while remaining > 0.0:
        tau = min(seg, remaining)
        plan = plan_evolution(H_env, tau, IMAG_TIME)
        psi = evolve(psi, plan, H_env).normalized()
        remaining -= tau
    return PreparedState(psi, "thermal", seed=seed, beta=beta)
