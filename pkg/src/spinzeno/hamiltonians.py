"""Builders for every model Hamiltonian and their random-coupling draws.

All couplings are expressed in units of the central-system exchange
constant J_S = 1.  Random draws come from named, independently seeded
streams (one per coupling family) so resizing one family never perturbs
another.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .hilbert import Term, TermList

ROLE_CS = "CS"
ROLE_E1 = "E1"
ROLE_E2 = "E2"

# stream family codes; combined with the run seed via SeedSequence((seed, code))
FAMILY_R = 1          # uniform strengths of the measured-spin star coupling
FAMILY_IPRIME = 2     # binary CS-reservoir couplings
FAMILY_K = 3          # spin-glass reservoir couplings
FAMILY_STATE_E1 = 4   # random initial state of fragment E1
FAMILY_STATE_E2 = 5   # random initial state of fragment E2
FAMILY_TRAJECTORY = 6  # collapse-trajectory sampling


def stream(seed: int, family: int) -> np.random.Generator:
    """Deterministic, family-isolated PCG64 stream."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, family))))


def child_seed(seed: int, family: int) -> int:
    """A derived 64-bit seed for APIs that take a plain integer seed."""
    return int(np.random.SeedSequence((seed, family)).generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# layouts and coupling draws


@dataclass(frozen=True)
class SystemLayout:
    """Partition of sites into central system and environment fragments."""

    n_total: int
    role_of_site: tuple[str, ...]
    measured_site: int
    cs_geometry: str

    def __post_init__(self):
        if len(self.role_of_site) != self.n_total:
            raise ConfigurationError("role_of_site must cover every site")
        if any(r not in (ROLE_CS, ROLE_E1, ROLE_E2) for r in self.role_of_site):
            raise ConfigurationError("unknown site role")
        if self.cs_geometry not in ("open", "ring"):
            raise ConfigurationError(f"unknown geometry {self.cs_geometry!r}")
        if self.role_of_site[self.measured_site] != ROLE_CS:
            raise ConfigurationError("measured site must belong to the CS")

    def sites_with_role(self, role: str) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.role_of_site) if r == role)

    @property
    def cs_sites(self) -> tuple[int, ...]:
        return self.sites_with_role(ROLE_CS)

    @property
    def e1_sites(self) -> tuple[int, ...]:
        return self.sites_with_role(ROLE_E1)

    @property
    def e2_sites(self) -> tuple[int, ...]:
        return self.sites_with_role(ROLE_E2)

    def part_blocks(self) -> list[tuple[int, ...]]:
        """Non-empty site blocks in (CS, E1, E2) order; used by tensor_product."""
        return [b for b in (self.cs_sites, self.e1_sites, self.e2_sites) if b]

    def sublattice_signs(self) -> dict[int, int]:
        """+1 on the sublattice of the measured spin, -1 on the other,
        alternating along the CS chain/ring."""
        return {s: (1 if (i % 2 == 0) else -1) for i, s in enumerate(self.cs_sites)}


def contiguous_layout(n_s: int, n_e1: int, n_e2: int, geometry: str) -> SystemLayout:
    roles = (ROLE_CS,) * n_s + (ROLE_E1,) * n_e1 + (ROLE_E2,) * n_e2
    return SystemLayout(n_s + n_e1 + n_e2, roles, 0, geometry)


@dataclass(frozen=True)
class CouplingDraw:
    """Record of one family of random couplings, sufficient to rebuild them."""

    family: str
    kind: str                 # uniform01 | binary | sym_uniform
    magnitude: float
    values: tuple[float, ...]
    seed_used: int


def draw_uniform01(n: int, seed: int, family: str = "r") -> CouplingDraw:
    g = stream(seed, FAMILY_R)
    return CouplingDraw(family, "uniform01", 1.0, tuple(g.random(n)), seed)


def draw_binary(n: int, magnitude: float, seed: int, family: str = "iprime") -> CouplingDraw:
    g = stream(seed, FAMILY_IPRIME)
    vals = np.where(g.random(n) < 0.5, magnitude, -magnitude)
    return CouplingDraw(family, "binary", magnitude, tuple(vals), seed)


def draw_sym_uniform(n: int, magnitude: float, seed: int, family: str = "k") -> CouplingDraw:
    g = stream(seed, FAMILY_K)
    vals = (2.0 * g.random(n) - 1.0) * magnitude
    return CouplingDraw(family, "sym_uniform", magnitude, tuple(vals), seed)


# ---------------------------------------------------------------------------
# builders


def build_heisenberg(N: int, J: float, geometry: str, n_sites: int | None = None) -> TermList:
    """Nearest-neighbour Heisenberg exchange J * sum_i S_i . S_{i+1}.

    Open geometry couples the N-1 chain bonds; ring geometry adds the
    closing bond between sites N-1 and 0.
    """
    if N < 2:
        raise ConfigurationError("Heisenberg model needs at least 2 sites")
    if geometry not in ("open", "ring"):
        raise ConfigurationError(f"unknown geometry {geometry!r}")
    bonds = [(i, i + 1) for i in range(N - 1)]
    if geometry == "ring":
        bonds.append((N - 1, 0))
    terms = [
        Term(J, ((i, a), (j, a))) for i, j in bonds for a in ("x", "y", "z")
    ]
    return TermList(n_sites or N, tuple(terms))


def build_star_coupling(center: int, targets, strengths: CouplingDraw,
                        scale: float, n_sites: int) -> TermList:
    """Ising star sum_i scale * r_i * S_center^z S_i^z."""
    targets = tuple(targets)
    if center in targets:
        raise ConfigurationError("star center cannot be one of its targets")
    if len(strengths.values) != len(targets):
        raise ConfigurationError(
            f"{len(strengths.values)} strengths for {len(targets)} targets"
        )
    terms = [
        Term(scale * r, ((center, "z"), (i, "z")))
        for i, r in zip(targets, strengths.values)
    ]
    return TermList(n_sites, tuple(terms))


def glass_from_values(sites, values, n_sites: int) -> TermList:
    """Spin-glass term list from pre-drawn couplings.

    Value order is axis-major (x, y, z), pairs lexicographic; each unordered
    pair appears exactly once per axis.
    """
    sites = tuple(sites)
    pairs = [(k, l) for i, k in enumerate(sites) for l in sites[i + 1:]]
    if len(values) != 3 * len(pairs):
        raise ConfigurationError(
            f"{len(values)} couplings for {3 * len(pairs)} glass terms"
        )
    terms = []
    idx = 0
    for a in ("x", "y", "z"):
        for k, l in pairs:
            terms.append(Term(values[idx], ((k, a), (l, a))))
            idx += 1
    return TermList(n_sites, tuple(terms))


def build_spin_glass(sites, K: float, seed: int, n_sites: int | None = None
                     ) -> tuple[TermList, CouplingDraw]:
    """Spin glass sum_a sum_{k<l} K_kl^a S_k^a S_l^a, K_kl^a uniform in [-K, K]."""
    sites = tuple(sites)
    if len(sites) < 2:
        raise ConfigurationError("spin glass needs at least 2 sites")
    n_pairs = len(sites) * (len(sites) - 1) // 2
    draw = draw_sym_uniform(3 * n_pairs, K, seed, family="k")
    return glass_from_values(sites, draw.values, n_sites or (max(sites) + 1)), draw


def build_collective_coupling(sites_a, sites_b, coeff: float, n_sites: int) -> TermList:
    """coeff * S_A . S_B for two groups of sites (expanded pairwise)."""
    sites_a, sites_b = tuple(sites_a), tuple(sites_b)
    if set(sites_a) & set(sites_b):
        raise ConfigurationError("collective groups must be disjoint")
    terms = [
        Term(coeff, ((i, a), (j, a)))
        for i in sites_a for j in sites_b for a in ("x", "y", "z")
    ]
    return TermList(n_sites, tuple(terms))


def build_lieb_mattis(N: int, J_prime: float, n_sites: int | None = None) -> TermList:
    """(J'/N) S_A . S_B with sublattice A on even 0-based sites, B on odd."""
    if N < 2 or N % 2:
        raise ConfigurationError("Lieb-Mattis model needs an even site count >= 2")
    sub_a = tuple(range(0, N, 2))
    sub_b = tuple(range(1, N, 2))
    return build_collective_coupling(sub_a, sub_b, J_prime / N, n_sites or N)


def add_staggered_field(H: TermList, h: float, sublattice_sign_of_site) -> TermList:
    """H plus sum_i sign_i * h * S_i^z.

    `sublattice_sign_of_site` maps every site in H's support to +1 or -1.
    """
    support = sorted({s for t in H.terms for s, _ in t.factors})
    extra = []
    for s in support:
        if s not in sublattice_sign_of_site:
            raise ConfigurationError(f"no sublattice sign for site {s}")
    if h == 0.0:
        return H
    for s, sign in sorted(sublattice_sign_of_site.items()):
        if sign not in (1, -1):
            raise ConfigurationError(f"sublattice sign must be +-1, got {sign}")
        extra.append(Term(sign * h, ((s, "z"),)))
    return TermList(H.n_sites, H.terms + tuple(extra))


# ---------------------------------------------------------------------------
# full models


def assemble_model(config) -> tuple[TermList, SystemLayout, list[CouplingDraw]]:
    """Total Hamiltonian, site layout, and coupling records for a run config.

    Model A: open CS chain + uniform-random Ising star from the measured
    spin into the environment.  Model B: CS ring + star into fragment E1 +
    binary couplings from every CS site into the spin-glass fragment E2.
    """
    model = config.model
    seed = config.seed
    if model in ("model_a", "zeno_compare"):
        layout = contiguous_layout(config.n_s, config.n_e1, 0, "open")
        n = layout.n_total
        h_s = build_heisenberg(config.n_s, 1.0, "open", n_sites=n)
        r_draw = draw_uniform01(config.n_e1, seed)
        h_i = build_star_coupling(
            layout.measured_site, layout.e1_sites, r_draw, config.i_strength, n
        )
        return h_s + h_i, layout, [r_draw]
    if model == "model_b":
        layout = contiguous_layout(config.n_s, config.n_e1, config.n_e2, "ring")
        n = layout.n_total
        h_s = build_heisenberg(config.n_s, 1.0, "ring", n_sites=n)
        r_draw = draw_uniform01(config.n_e1, seed)
        h_i1 = build_star_coupling(
            layout.measured_site, layout.e1_sites, r_draw, config.i_strength, n
        )
        ip_draw = draw_binary(config.n_s * config.n_e2, config.i_prime, seed)
        h_i2 = TermList(n, ())
        idx = 0
        for i in layout.cs_sites:
            vals = ip_draw.values[idx:idx + config.n_e2]
            idx += config.n_e2
            part = CouplingDraw("iprime", "binary", config.i_prime, vals, seed)
            h_i2 = h_i2 + build_star_coupling(i, layout.e2_sites, part, 1.0, n)
        h_e2, k_draw = build_spin_glass(layout.e2_sites, config.k_strength, seed, n_sites=n)
        return h_s + h_i1 + h_i2 + h_e2, layout, [r_draw, ip_draw, k_draw]
    raise ConfigurationError(f"unknown model {model!r}")


def heisenberg_energy_bounds(N: int, J: float) -> tuple[float, float]:
    """Rigorous (non-strict) ground-state energy window for the
    nearest-neighbour antiferromagnet: coordination number Z = 2, S = 1/2."""
    z, s = 2, 0.5
    neel = -0.5 * N * J * z * s * s
    return neel * (1.0 + 1.0 / (z * s)), neel
