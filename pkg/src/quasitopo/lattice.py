"""Off-diagonal Harper (Aubry-Andre) chain: parameters, couplings, Hamiltonian.

Sites are numbered 1..N in every public function. Bond ``n`` joins sites
``n`` and ``n + 1`` and carries the coupling

    J(n) = t * (1 + lambda * cos(2*pi*b*n + phi)).

Boundaries are open (hard wall): there is no bond between site N and site 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import ParameterError, SiteIndexError

GOLDEN_MEAN = (math.sqrt(5.0) + 1.0) / 2.0
TWO_PI = 2.0 * math.pi


def golden_mean() -> float:
    """Return (sqrt(5) + 1) / 2, the incommensuration used throughout."""
    return GOLDEN_MEAN


@dataclass(frozen=True)
class LatticeParams:
    """The five numbers that define one quasi-crystal instance.

    ``phi`` is reduced to [0, 2*pi) on construction. ``|lam| > 1`` makes some
    couplings negative and is rejected unless ``allow_nonphysical`` is set;
    such instances report ``physical == False``.
    """

    n_sites: int
    t: float = 0.5
    lam: float = 0.5
    b: float = GOLDEN_MEAN
    phi: float = 0.0
    allow_nonphysical: bool = field(default=False, compare=False)

    def __post_init__(self):
        if isinstance(self.n_sites, bool) or int(self.n_sites) != self.n_sites:
            raise ParameterError(f"n_sites must be an integer, got {self.n_sites!r}")
        object.__setattr__(self, "n_sites", int(self.n_sites))
        for name in ("t", "lam", "b", "phi"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.n_sites < 2:
            raise ParameterError(f"n_sites must be >= 2, got {self.n_sites}")
        if self.t <= 0:
            raise ParameterError(f"t must be > 0, got {self.t}")
        if self.b <= 0:
            raise ParameterError(f"b must be > 0, got {self.b}")
        if abs(self.lam) > 1 and not self.allow_nonphysical:
            raise ParameterError(
                f"|lambda| must be <= 1 for non-negative couplings, got {self.lam}; "
                "pass allow_nonphysical=True to override"
            )
        phi = math.fmod(self.phi, TWO_PI)
        if phi < 0:
            phi += TWO_PI
        if phi >= TWO_PI:  # fmod of a tiny negative number can round up
            phi = 0.0
        object.__setattr__(self, "phi", phi)

    @property
    def physical(self) -> bool:
        return abs(self.lam) <= 1

    @property
    def phi_pi(self) -> float:
        """Modulation phase in units of pi."""
        return self.phi / math.pi

    def replace(self, **changes) -> "LatticeParams":
        values = {
            "n_sites": self.n_sites,
            "t": self.t,
            "lam": self.lam,
            "b": self.b,
            "phi": self.phi,
            "allow_nonphysical": self.allow_nonphysical,
        }
        values.update(changes)
        return LatticeParams(**values)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "n_sites": self.n_sites,
            "t": self.t,
            "lambda": self.lam,
            "b": self.b,
            "phi": self.phi,
        }
        if self.allow_nonphysical:
            out["allow_nonphysical"] = True
        return out

    @classmethod
    def from_dict(cls, block: Mapping[str, Any]) -> "LatticeParams":
        """Parse a flat config block.

        Exactly one of ``phi`` (radians) or ``phi_pi`` (multiples of pi) must
        be present. ``b`` defaults to the golden mean when omitted.
        """
        known = {"n_sites", "t", "lambda", "b", "phi", "phi_pi", "allow_nonphysical"}
        unknown = set(block) - known
        if unknown:
            raise ParameterError(f"unknown lattice keys: {sorted(unknown)}")
        has_phi, has_phi_pi = "phi" in block, "phi_pi" in block
        if has_phi == has_phi_pi:
            raise ParameterError("exactly one of 'phi' or 'phi_pi' must be given")
        phi = float(block["phi"]) if has_phi else float(block["phi_pi"]) * math.pi
        for key in ("n_sites", "t", "lambda"):
            if key not in block:
                raise ParameterError(f"missing lattice key '{key}'")
        return cls(
            n_sites=block["n_sites"],
            t=block["t"],
            lam=block["lambda"],
            b=block.get("b", GOLDEN_MEAN),
            phi=phi,
            allow_nonphysical=bool(block.get("allow_nonphysical", False)),
        )


def paper_params(n_sites: int = 100, phi_pi: float = 0.2) -> LatticeParams:
    """t = 0.5, lambda = 0.5, b = golden mean, phi = phi_pi * pi."""
    return LatticeParams(n_sites=n_sites, t=0.5, lam=0.5, b=GOLDEN_MEAN, phi=phi_pi * math.pi)


def coupling_strength(params: LatticeParams, n: int) -> float:
    """Coupling J(n) on the bond between sites n and n+1 (1-based)."""
    if not 1 <= n <= params.n_sites - 1:
        raise SiteIndexError(f"bond index {n} outside 1..{params.n_sites - 1}")
    return params.t * (1.0 + params.lam * math.cos(TWO_PI * params.b * n + params.phi))


@dataclass(frozen=True)
class CouplingProfile:
    couplings: np.ndarray

    def __post_init__(self):
        arr = np.array(self.couplings, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "couplings", arr)

    def __len__(self):
        return len(self.couplings)

    def __getitem__(self, n):
        """1-based bond access, matching the physics convention."""
        if not 1 <= n <= len(self.couplings):
            raise SiteIndexError(f"bond index {n} outside 1..{len(self.couplings)}")
        return float(self.couplings[n - 1])


def build_couplings(params: LatticeParams) -> CouplingProfile:
    # evaluated through the scalar formula so both paths agree bit-for-bit
    return CouplingProfile(
        np.array([coupling_strength(params, n) for n in range(1, params.n_sites)])
    )


@dataclass(frozen=True)
class Hamiltonian:
    """Real symmetric tridiagonal matrix with zero diagonal.

    Only the off-diagonal band is stored; symmetry is structural.
    """

    off_diagonal: np.ndarray

    def __post_init__(self):
        arr = np.array(self.off_diagonal, dtype=float).reshape(-1)
        if arr.size < 1:
            raise ParameterError("a Hamiltonian needs at least one bond")
        arr.setflags(write=False)
        object.__setattr__(self, "off_diagonal", arr)

    @property
    def dimension(self) -> int:
        return self.off_diagonal.size + 1

    @property
    def diagonal(self) -> np.ndarray:
        return np.zeros(self.dimension)

    def trace(self) -> float:
        return 0.0

    def to_dense(self) -> np.ndarray:
        return np.diag(self.off_diagonal, 1) + np.diag(self.off_diagonal, -1)

    def matvec(self, vec: np.ndarray) -> np.ndarray:
        vec = np.asarray(vec)
        out = np.zeros_like(vec, dtype=np.result_type(vec, float))
        out[:-1] += self.off_diagonal * vec[1:]
        out[1:] += self.off_diagonal * vec[:-1]
        return out


def build_hamiltonian(params: LatticeParams) -> Hamiltonian:
    return Hamiltonian(build_couplings(params).couplings)
