"""Spectra, band scans versus phase, local density of states, boundary modes."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ParameterError, SiteIndexError
from .lattice import Hamiltonian, LatticeParams, build_hamiltonian
from .tridiag import tql2

EDGE_WINDOW = 7
EDGE_THRESHOLD = 0.5
MIN_GAP_FACTOR = 5.0
SIGMA_FRACTION = 0.02
# at most this many eigenvalues (one per edge) may sit inside one gap
MAX_IN_GAP_MODES = 2


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class EigenSystem:
    """Ascending energies; ``states[:, m]`` pairs with ``energies[m]``."""

    energies: np.ndarray
    states: np.ndarray

    @property
    def n_sites(self) -> int:
        return self.energies.size

    def residuals(self, h: Hamiltonian) -> np.ndarray:
        hv = np.stack([h.matvec(self.states[:, m]) for m in range(self.n_sites)], axis=1)
        return np.linalg.norm(hv - self.states * self.energies, axis=0)


def diagonalize(h: Hamiltonian) -> EigenSystem:
    energies, states = tql2(h.diagonal, h.off_diagonal)
    energies.setflags(write=False)
    states.setflags(write=False)
    return EigenSystem(energies, states)


def edge_weight(state, d: int, side: Side | str) -> float:
    """Probability mass on the ``d`` sites nearest the chosen edge."""
    state = np.asarray(state)
    n = state.shape[0]
    if not 1 <= d <= n:
        raise SiteIndexError(f"edge window d={d} outside 1..{n}")
    side = Side(side)
    window = state[:d] if side is Side.LEFT else state[n - d:]
    return float(min(1.0, np.sum(np.abs(window) ** 2)))


def _edge_weights(states: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    n = states.shape[0]
    if not 1 <= d <= n:
        raise SiteIndexError(f"edge window d={d} outside 1..{n}")
    prob = np.abs(states) ** 2
    left = np.minimum(prob[:d].sum(axis=0), 1.0)
    right = np.minimum(prob[n - d:].sum(axis=0), 1.0)
    return left, right


def default_min_gap(energies) -> float:
    """Five times the median level spacing."""
    energies = np.asarray(energies)
    if energies.size < 2:
        return math.inf
    return MIN_GAP_FACTOR * float(np.median(np.diff(energies)))


def detect_gaps(energies, min_gap: float | None = None) -> list[tuple[float, float]]:
    """Spectral gaps as ``(lower band edge, upper band edge)`` pairs.

    A level spacing of at least ``min_gap`` opens a gap. Gaps are maximal:
    consecutive wide spacings separated by no more than MAX_IN_GAP_MODES
    eigenvalues are one gap, and those eigenvalues are its in-gap modes.
    Without this merge an isolated boundary mode would split its own gap
    in two and never lie strictly inside either half.
    """
    energies = np.asarray(energies, dtype=float)
    if min_gap is None:
        min_gap = default_min_gap(energies)
    if min_gap <= 0:
        raise ParameterError(f"min_gap must be > 0, got {min_gap}")
    wide = np.flatnonzero(np.diff(energies) >= min_gap)
    gaps: list[tuple[float, float]] = []
    start = prev = None
    for m in wide:
        if start is None:
            start = prev = m
        elif m - prev <= MAX_IN_GAP_MODES:
            prev = m
        else:
            gaps.append((float(energies[start]), float(energies[prev + 1])))
            start = prev = m
    if start is not None:
        gaps.append((float(energies[start]), float(energies[prev + 1])))
    return gaps


@dataclass(frozen=True)
class BoundaryMode:
    mode_index: int
    energy: float
    side: Side
    edge_weight: float
    gap_interval: tuple[float, float]


def _classify(energies, left, right, weight_threshold, min_gap):
    gaps = detect_gaps(energies, min_gap)
    modes = []
    for m, energy in enumerate(energies):
        gap = next((g for g in gaps if g[0] < energy < g[1]), None)
        if gap is None:
            continue
        side = Side.LEFT if left[m] >= right[m] else Side.RIGHT
        weight = left[m] if side is Side.LEFT else right[m]
        if weight >= weight_threshold:
            modes.append(BoundaryMode(m, float(energy), side, float(weight), gap))
    return modes


def classify_boundary_modes(
    es: EigenSystem,
    d: int = EDGE_WINDOW,
    weight_threshold: float = EDGE_THRESHOLD,
    min_gap: float | None = None,
) -> list[BoundaryMode]:
    """In-gap eigenmodes whose edge weight reaches ``weight_threshold``.

    ``mode_index`` is 0-based into ``es.energies``. Side ties go Left.
    """
    if not 0 < weight_threshold < 1:
        raise ParameterError(f"weight_threshold must be in (0, 1), got {weight_threshold}")
    left, right = _edge_weights(es.states, d)
    return _classify(es.energies, left, right, weight_threshold, min_gap)


def side_census(modes) -> dict[str, int]:
    census = {Side.LEFT.value: 0, Side.RIGHT.value: 0}
    for mode in modes:
        census[mode.side.value] += 1
    return census


@dataclass(frozen=True)
class BandScan:
    params_template: LatticeParams
    phi_grid: np.ndarray
    energies_per_phi: np.ndarray
    left_edge_weight_per_mode: np.ndarray
    right_edge_weight_per_mode: np.ndarray
    edge_window: int = EDGE_WINDOW

    def boundary_mask(self, threshold: float = EDGE_THRESHOLD, min_gap: float | None = None):
        """Boolean (grid x N) masks ``(left, right)`` marking in-gap edge modes."""
        left_mask = np.zeros(self.energies_per_phi.shape, dtype=bool)
        right_mask = np.zeros_like(left_mask)
        for i, row in enumerate(self.energies_per_phi):
            for mode in _classify(
                row,
                self.left_edge_weight_per_mode[i],
                self.right_edge_weight_per_mode[i],
                threshold,
                min_gap,
            ):
                mask = left_mask if mode.side is Side.LEFT else right_mask
                mask[i, mode.mode_index] = True
        return left_mask, right_mask


def _scan_point(params_template: LatticeParams, phi: float, d: int):
    try:
        es = diagonalize(build_hamiltonian(params_template.replace(phi=phi)))
    except ConvergenceError as exc:
        raise _tag_phi(exc, phi) from exc
    left, right = _edge_weights(es.states, d)
    return es.energies, left, right


def _tag_phi(exc: ConvergenceError, phi: float) -> ConvergenceError:
    tagged = ConvergenceError(exc.index, exc.iterations)
    tagged.phi = phi
    tagged.args = (f"{exc.args[0]} (phi = {phi!r})",)
    return tagged


def band_scan(
    params_template: LatticeParams,
    phi_grid,
    d: int = EDGE_WINDOW,
    workers: int = 1,
) -> BandScan:
    """Sorted spectrum and per-mode edge weights at every phase in ``phi_grid``.

    Rows come back in grid order whatever ``workers`` is.
    """
    phi_grid = np.asarray(phi_grid, dtype=float).reshape(-1)
    if phi_grid.size == 0:
        raise ParameterError("phi_grid must be non-empty")
    if np.any(np.diff(phi_grid) <= 0):
        raise ParameterError("phi_grid must be strictly increasing")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda p: _scan_point(params_template, p, d), phi_grid))
    else:
        rows = [_scan_point(params_template, p, d) for p in phi_grid]
    energies, left, right = (np.array(col) for col in zip(*rows))
    return BandScan(params_template, phi_grid, energies, left, right, d)


@dataclass(frozen=True)
class LdosMap:
    energy_grid: np.ndarray
    density: np.ndarray  # (energies, sites)
    broadening_sigma: float

    @property
    def site_count(self) -> int:
        return self.density.shape[1]

    def site_integrals(self) -> np.ndarray:
        """Trapezoid integral over energy of each site's density."""
        return np.trapezoid(self.density, self.energy_grid, axis=0)

    def edge_fraction(self, d: int = EDGE_WINDOW) -> np.ndarray:
        """Per energy row, share of the density within ``d`` sites of either edge."""
        total = self.density.sum(axis=1)
        edges = self.density[:, :d].sum(axis=1) + self.density[:, -d:].sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(total > 0, edges / total, 0.0)


def default_sigma(energies) -> float:
    energies = np.asarray(energies)
    width = float(energies[-1] - energies[0])
    return SIGMA_FRACTION * width if width > 0 else SIGMA_FRACTION


def default_energy_grid(energies, sigma: float, points_per_sigma: float = 8.0) -> np.ndarray:
    """Grid spanning the spectrum plus 5 sigma on each side."""
    lo = float(energies[0]) - 5 * sigma
    hi = float(energies[-1]) + 5 * sigma
    count = max(int(math.ceil((hi - lo) / sigma * points_per_sigma)) + 1, 2)
    return np.linspace(lo, hi, count)


def ldos(es: EigenSystem, energy_grid=None, sigma: float | None = None) -> LdosMap:
    """Gaussian-broadened D_n(E) = sum_m G(E - E_m) |phi_n^(m)|^2."""
    if sigma is None:
        sigma = default_sigma(es.energies)
    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    if energy_grid is None:
        energy_grid = default_energy_grid(es.energies, sigma)
    grid = np.asarray(energy_grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise ParameterError("energy_grid must be non-empty")
    if np.any(np.diff(grid) <= 0):
        raise ParameterError("energy_grid must be increasing")
    x = (grid[:, None] - es.energies[None, :]) / sigma
    kernel = np.exp(-0.5 * x * x) / (sigma * math.sqrt(2 * math.pi))
    density = kernel @ (es.states.T ** 2)
    return LdosMap(grid, density, float(sigma))
