"""Projective measurement of a single spin and the repeated-collapse protocol.

The protocol mirrors the ideal-measurement operator [exp(-i dt H) P]^n:
a collapse happens at the start of every interval (t = 0, dt, 2dt, ...),
the state at a grid time is reported after that collapse, and the final
time T is reported after the last evolution with no additional collapse.

Two modes: `ensemble` evolves the density matrix exactly under the
dephasing channel rho -> P+ rho P+ + P- rho P- (the deterministic branch
average), `trajectory` samples one collapse outcome per interval by its
Born probability.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericalFailure
from .hamiltonians import FAMILY_TRAJECTORY, stream
from .hilbert import StateVector, TermList, to_matrix
from .propagation import REAL_TIME, evolve, plan_evolution

ENSEMBLE = "ensemble"
TRAJECTORY = "trajectory"

_P_UNDERFLOW = 1e-14


@dataclass(frozen=True)
class CollapseProtocol:
    site: int
    interval: float
    horizon: float
    mode: str = ENSEMBLE
    seed: int = 0

    def __post_init__(self):
        if self.interval <= 0:
            raise ConfigurationError("collapse interval must be positive")
        if self.horizon < self.interval:
            raise ConfigurationError("horizon must be at least one interval")
        if self.mode not in (ENSEMBLE, TRAJECTORY):
            raise ConfigurationError(f"unknown collapse mode {self.mode!r}")

    def times(self) -> np.ndarray:
        n = int(np.floor(self.horizon / self.interval + 1e-9))
        return self.interval * np.arange(n + 1)


@dataclass
class CollapseSeries:
    """Observable time series on the protocol grid."""

    t: np.ndarray
    values: dict[str, np.ndarray]
    mode: str
    resample_flags: int = 0


def project(psi: StateVector, site: int, sign: str) -> tuple[StateVector, float]:
    """P^(+-) psi (unnormalized) and its squared norm, the Born probability."""
    if not 0 <= site < psi.n_sites:
        raise ConfigurationError(f"site {site} out of range")
    if sign not in ("+", "-"):
        raise ConfigurationError("sign must be '+' or '-'")
    bits = (np.arange(psi.dim) >> site) & 1
    keep = bits == (1 if sign == "+" else 0)
    amp = np.where(keep, psi.amplitudes, 0.0)
    prob = float(np.real(np.vdot(amp, amp)))
    return StateVector(psi.n_sites, amp), prob


def _dense_propagator(H_S: TermList, dt: float) -> np.ndarray:
    """exp(-i dt H) for the small central system, from exact eigenpairs."""
    mat = to_matrix(H_S)
    evals, evecs = np.linalg.eigh(mat)
    return (evecs * np.exp(-1j * dt * evals)) @ evecs.conj().T


def run_repeated_collapse(H_S: TermList, psi0: StateVector,
                          protocol: CollapseProtocol,
                          observables: dict[str, np.ndarray]) -> CollapseSeries:
    """Repeated z-collapse of one spin interleaved with unitary evolution.

    `observables` maps names to dense matrices on the full system of H_S;
    expectation values are recorded at every grid time.
    """
    if H_S.n_sites != psi0.n_sites:
        raise ConfigurationError("state and Hamiltonian dimensions differ")
    times = protocol.times()
    u = _dense_propagator(H_S, protocol.interval)
    dim = psi0.dim
    bits = (np.arange(dim) >> protocol.site) & 1
    values = {name: np.empty(len(times)) for name in observables}
    flags = 0

    if protocol.mode == ENSEMBLE:
        rho = np.outer(psi0.amplitudes, psi0.amplitudes.conj())
        same = bits[:, None] == bits[None, :]
        for k, _ in enumerate(times):
            if k < len(times) - 1:
                rho = np.where(same, rho, 0.0)   # P+ rho P+ + P- rho P-
            for name, op in observables.items():
                values[name][k] = np.real(np.trace(rho @ op))
            if k < len(times) - 1:
                rho = u @ rho @ u.conj().T
    else:
        rng = stream(protocol.seed, FAMILY_TRAJECTORY)
        amp = psi0.amplitudes.copy()
        for k, _ in enumerate(times):
            if k < len(times) - 1:
                p_plus = float(np.real(np.vdot(amp[bits == 1], amp[bits == 1])))
                p_minus = float(np.real(np.vdot(amp[bits == 0], amp[bits == 0])))
                pick_up = rng.random() < p_plus / (p_plus + p_minus)
                prob = p_plus if pick_up else p_minus
                if prob < _P_UNDERFLOW:
                    pick_up = not pick_up
                    prob = p_plus if pick_up else p_minus
                    flags += 1
                amp = np.where(bits == (1 if pick_up else 0), amp, 0.0)
                amp = amp / np.sqrt(prob)
            for name, op in observables.items():
                values[name][k] = np.real(np.vdot(amp, op @ amp))
            if k < len(times) - 1:
                amp = u @ amp
    return CollapseSeries(times, values, protocol.mode, flags)


def trotter_reference(H_S: TermList, H_I: TermList, t: float, n: int,
                      psi0: StateVector) -> StateVector:
    """[exp(-i t H_S / n) exp(-i t H_I / n)]^n psi0, built from the
    Chebyshev engine per factor.  Test utility, not a production path."""
    if n < 1:
        raise ConfigurationError("Trotter step count must be >= 1")
    plan_s = plan_evolution(H_S, t / n, REAL_TIME)
    plan_i = plan_evolution(H_I, t / n, REAL_TIME)
    psi = psi0
    for _ in range(n):
        psi = evolve(psi, plan_i, H_I)
        psi = evolve(psi, plan_s, H_S)
    return psi
