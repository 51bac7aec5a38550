"""Single-photon propagation through the waveguide lattice.

The propagation coordinate ``z`` is dimensionless (conjugate to the
coupling ``t``). ``Z_EXP`` is the value standing in for the 35 mm chip
length; see ``calibrate_z_exp`` for how it was fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, SiteIndexError, UndefinedEstimateError
from .lattice import LatticeParams, build_hamiltonian
from .spectral import EDGE_WINDOW, EigenSystem, diagonalize

CHIP_LENGTH_MM = 35.0
Z_EXP = 27.5
MM_TO_Z = Z_EXP / CHIP_LENGTH_MM

NORM_TOL = 1e-12


def z_from_mm(length_mm: float) -> float:
    return length_mm * MM_TO_Z


@dataclass(frozen=True)
class AmplitudeState:
    """Unit-norm complex site amplitudes of one photon."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex).reshape(-1)
        norm = float(np.vdot(amp, amp).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ParameterError(f"state norm^2 is {norm!r}, expected 1")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def n_sites(self) -> int:
        return self.amplitudes.size

    @classmethod
    def normalized(cls, amplitudes) -> "AmplitudeState":
        amp = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amp)
        if norm == 0:
            raise ParameterError("cannot normalize the zero vector")
        return cls(amp / norm)


def single_site_input(n_sites: int, j: int) -> AmplitudeState:
    if not 1 <= j <= n_sites:
        raise SiteIndexError(f"input site {j} outside 1..{n_sites}")
    amp = np.zeros(n_sites, dtype=complex)
    amp[j - 1] = 1.0
    return AmplitudeState(amp)


def evolve(es: EigenSystem, initial: AmplitudeState, z: float) -> AmplitudeState:
    """Apply U(z) = sum_m exp(-i E_m z) |v_m><v_m| to ``initial``.

    Negative ``z`` runs the evolution backwards.
    """
    if es.n_sites != initial.n_sites:
        raise ValueError(
            f"dimension mismatch: eigensystem has {es.n_sites} sites, "
            f"state has {initial.n_sites}"
        )
    if z == 0:
        return initial
    coeffs = es.states.T @ initial.amplitudes
    out = es.states @ (np.exp(-1j * es.energies * z) * coeffs)
    # rounding drift is ~1e-15; renormalise so chained steps stay unit norm
    out /= np.linalg.norm(out)
    return AmplitudeState(out)


def output_distribution(state: AmplitudeState) -> np.ndarray:
    prob = np.abs(state.amplitudes) ** 2
    return prob / prob.sum()


def return_probability(dist, j: int, d: int = EDGE_WINDOW) -> float:
    """Share of the distribution within ``d`` sites of site ``j`` (1-based).

    The window [j - d, j + d] is clipped to the lattice. Input need not be
    normalised.
    """
    dist = np.asarray(dist, dtype=float)
    n = dist.size
    if not 1 <= j <= n:
        raise SiteIndexError(f"site {j} outside 1..{n}")
    if d < 1:
        raise ParameterError(f"window half-width d must be >= 1, got {d}")
    if np.any(dist < 0):
        raise ParameterError("distribution has negative entries")
    total = dist.sum()
    if total == 0:
        raise UndefinedEstimateError("return probability of an all-zero distribution")
    lo, hi = max(1, j - d), min(n, j + d)
    return float(dist[lo - 1:hi].sum() / total)


@dataclass(frozen=True)
class PropagationResult:
    z_samples: np.ndarray
    distributions: np.ndarray  # (samples, sites)
    input_site: int
    params: LatticeParams

    @property
    def final_distribution(self) -> np.ndarray:
        return self.distributions[-1]

    def xi(self, site: int | None = None, d: int = EDGE_WINDOW) -> float:
        """Return probability of the final distribution (input site by default)."""
        return return_probability(self.final_distribution, site or self.input_site, d)


def propagate_experiment(
    params: LatticeParams, input_site: int, z_samples=(Z_EXP,), es: EigenSystem | None = None
) -> PropagationResult:
    z_samples = np.asarray(z_samples, dtype=float).reshape(-1)
    if z_samples.size == 0:
        raise ParameterError("z_samples must be non-empty")
    if z_samples[0] < 0 or np.any(np.diff(z_samples) <= 0):
        raise ParameterError("z_samples must be increasing and start at z >= 0")
    if es is None:
        es = diagonalize(build_hamiltonian(params))
    psi0 = single_site_input(params.n_sites, input_site)
    rows = [output_distribution(evolve(es, psi0, z)) for z in z_samples]
    return PropagationResult(z_samples, np.array(rows), input_site, params)


def calibrate_z_exp(
    n_sites: int = 100,
    z_max: float = 40.0,
    z_step: float = 0.5,
    trivial_below: float = 0.15,
    topological_above: float = 0.5,
    d: int = EDGE_WINDOW,
) -> float:
    """Smallest z on a grid where the trivial (phi = 0.9 pi) edge injection
    has spread (xi_1 < ``trivial_below``) while the topological
    (phi = 0.2 pi) one stays put (xi_1 > ``topological_above``).

    Uses t = lambda = 0.5, golden b, input at site 1. Produces ``Z_EXP``.
    """
    from .lattice import paper_params

    es_topo = diagonalize(build_hamiltonian(paper_params(n_sites, 0.2)))
    es_triv = diagonalize(build_hamiltonian(paper_params(n_sites, 0.9)))
    psi0 = single_site_input(n_sites, 1)
    for z in np.arange(0.0, z_max + z_step / 2, z_step):
        xi_triv = return_probability(output_distribution(evolve(es_triv, psi0, z)), 1, d)
        xi_topo = return_probability(output_distribution(evolve(es_topo, psi0, z)), 1, d)
        if xi_triv < trivial_below and xi_topo > topological_above:
            return float(z)
    raise ParameterError(f"no z in [0, {z_max}] separates the two phases")
