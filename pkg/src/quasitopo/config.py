"""Experiment configuration files (TOML).

A config names its ``kind``, an output root, a ``[lattice]`` block and one
block for the kind::

    kind = "evolve"
    out_dir = "runs"

    [lattice]
    n_sites = 100
    t = 0.5
    lambda = 0.5
    phi_pi = 0.2

    [evolve]
    input_site = 1

Angles may be given in radians (``phi``, ``start``) or in units of pi
(``phi_pi``, ``start_pi``), never both. Serialisation always writes radians.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, ParameterError
from .evolution import Z_EXP
from .lattice import GOLDEN_MEAN, LatticeParams
from .photon_stats import SourceModel
from .spectral import EDGE_THRESHOLD, EDGE_WINDOW

KINDS = ("bands", "ldos", "evolve", "sweep_phi", "hbt")


def _take(block: dict, key: str, path: str, kind=float, default=None, required=False):
    if key not in block:
        if required:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    value = block.pop(key)
    if value is None:
        return None
    try:
        if kind is int and (isinstance(value, bool) or int(value) != value):
            raise ValueError(value)
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.{key}", f"expected {kind.__name__}, got {value!r}") from None


def _take_angle(block: dict, key: str, path: str, default=None, required=False):
    has_rad, has_pi = key in block, f"{key}_pi" in block
    if has_rad and has_pi:
        raise ConfigError(f"{path}.{key}", f"give '{key}' or '{key}_pi', not both")
    if has_pi:
        return _take(block, f"{key}_pi", path) * math.pi
    return _take(block, key, path, default=default, required=required)


def _no_leftovers(block: dict, path: str):
    if block:
        raise ConfigError(f"{path}.{sorted(block)[0]}", "unknown field")


def _drop_none(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


@dataclass(frozen=True)
class BandsSettings:
    start: float = 0.0
    end: float = 2 * math.pi
    count: int = 201
    endpoint: bool = False
    d: int = EDGE_WINDOW
    threshold: float = EDGE_THRESHOLD
    min_gap: float | None = None
    workers: int = 1

    @classmethod
    def from_dict(cls, block, path="bands"):
        block = dict(block)
        out = cls(
            start=_take_angle(block, "start", path, 0.0),
            end=_take_angle(block, "end", path, 2 * math.pi),
            count=_take(block, "count", path, int, 201),
            endpoint=_take(block, "endpoint", path, bool, False),
            d=_take(block, "d", path, int, EDGE_WINDOW),
            threshold=_take(block, "threshold", path, float, EDGE_THRESHOLD),
            min_gap=_take(block, "min_gap", path, float),
            workers=_take(block, "workers", path, int, 1),
        )
        _no_leftovers(block, path)
        if out.count < 1:
            raise ConfigError(f"{path}.count", "must be >= 1")
        if out.count > 1 and not out.end > out.start:
            raise ConfigError(f"{path}.end", "must exceed start")
        return out

    def phi_grid(self):
        import numpy as np

        if self.count == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.end, self.count, endpoint=self.endpoint)

    def to_dict(self):
        return _drop_none(self.__dict__)


@dataclass(frozen=True)
class LdosSettings:
    sigma: float | None = None
    e_min: float | None = None
    e_max: float | None = None
    n_energies: int | None = None
    d: int = EDGE_WINDOW

    @classmethod
    def from_dict(cls, block, path="ldos"):
        block = dict(block)
        out = cls(
            sigma=_take(block, "sigma", path),
            e_min=_take(block, "e_min", path),
            e_max=_take(block, "e_max", path),
            n_energies=_take(block, "n_energies", path, int),
            d=_take(block, "d", path, int, EDGE_WINDOW),
        )
        _no_leftovers(block, path)
        if out.sigma is not None and not out.sigma > 0:
            raise ConfigError(f"{path}.sigma", "must be > 0")
        if (out.e_min is None) != (out.e_max is None):
            raise ConfigError(f"{path}.e_min", "give both e_min and e_max or neither")
        if out.e_min is not None and not out.e_max > out.e_min:
            raise ConfigError(f"{path}.e_max", "must exceed e_min")
        if out.n_energies is not None and out.n_energies < 2:
            raise ConfigError(f"{path}.n_energies", "must be >= 2")
        return out

    def to_dict(self):
        return _drop_none(self.__dict__)


@dataclass(frozen=True)
class EvolveSettings:
    input_site: int = 1
    z: float = Z_EXP
    n_samples: int = 1
    z_samples: tuple[float, ...] | None = None

    @classmethod
    def from_dict(cls, block, path="evolve"):
        block = dict(block)
        z_samples = block.pop("z_samples", None)
        out = cls(
            input_site=_take(block, "input_site", path, int, 1),
            z=_take(block, "z", path, float, Z_EXP),
            n_samples=_take(block, "n_samples", path, int, 1),
            z_samples=None if z_samples is None else tuple(float(z) for z in z_samples),
        )
        _no_leftovers(block, path)
        if out.z < 0:
            raise ConfigError(f"{path}.z", "must be >= 0")
        if out.n_samples < 1:
            raise ConfigError(f"{path}.n_samples", "must be >= 1")
        if out.z_samples is not None:
            zs = out.z_samples
            if not zs or zs[0] < 0 or any(b <= a for a, b in zip(zs, zs[1:])):
                raise ConfigError(f"{path}.z_samples", "must be non-empty, increasing, >= 0")
        return out

    def samples(self):
        import numpy as np

        if self.z_samples is not None:
            return np.array(self.z_samples)
        if self.n_samples == 1:
            return np.array([self.z])
        return np.linspace(0.0, self.z, self.n_samples)

    def to_dict(self):
        out = _drop_none(self.__dict__)
        if self.z_samples is not None:
            out["z_samples"] = list(self.z_samples)
        return out


@dataclass(frozen=True)
class SweepCase:
    n_sites: int
    phi: float
    input_site: int

    @property
    def phi_pi(self):
        return self.phi / math.pi

    def to_dict(self):
        return {"n_sites": self.n_sites, "phi": self.phi, "input_site": self.input_site}


# the four fabricated lattices, each driven from both edges
PAPER_CASES = tuple(
    SweepCase(n, phi_pi * math.pi, site)
    for n in (100, 101)
    for phi_pi in (0.2, 0.9)
    for site in (1, n)
)


@dataclass(frozen=True)
class SweepSettings:
    cases: tuple[SweepCase, ...] = PAPER_CASES
    z: float = Z_EXP
    d: int = EDGE_WINDOW

    @classmethod
    def from_dict(cls, block, path="sweep_phi"):
        block = dict(block)
        raw_cases = block.pop("cases", None)
        cases = PAPER_CASES
        if raw_cases is not None:
            if not isinstance(raw_cases, list):
                raise ConfigError(f"{path}.cases", "must be a list of tables")
            parsed = []
            for i, raw in enumerate(raw_cases):
                cpath = f"{path}.cases[{i}]"
                if not isinstance(raw, Mapping):
                    raise ConfigError(cpath, "must be a table")
                raw = dict(raw)
                case = SweepCase(
                    n_sites=_take(raw, "n_sites", cpath, int, required=True),
                    phi=_take_angle(raw, "phi", cpath, required=True),
                    input_site=_take(raw, "input_site", cpath, int, required=True),
                )
                _no_leftovers(raw, cpath)
                if not 1 <= case.input_site <= case.n_sites:
                    raise ConfigError(f"{cpath}.input_site", f"outside 1..{case.n_sites}")
                parsed.append(case)
            cases = tuple(parsed)
        if not cases:
            raise ConfigError(f"{path}.cases", "case list is empty")
        out = cls(
            cases=cases,
            z=_take(block, "z", path, float, Z_EXP),
            d=_take(block, "d", path, int, EDGE_WINDOW),
        )
        _no_leftovers(block, path)
        if out.z < 0:
            raise ConfigError(f"{path}.z", "must be >= 0")
        return out

    def to_dict(self):
        return {"cases": [c.to_dict() for c in self.cases], "z": self.z, "d": self.d}


@dataclass(frozen=True)
class HbtSettings:
    source: SourceModel = field(default_factory=lambda: SourceModel(pair_mean=0.1))
    n_windows: int = 1_000_000
    seed: int = 42
    workers: int = 1

    @classmethod
    def from_dict(cls, block, path="hbt"):
        block = dict(block)
        source_block = block.pop("source", {"pair_mean": 0.1})
        try:
            source = SourceModel.from_dict(source_block)
        except (ParameterError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}.source", str(exc)) from None
        out = cls(
            source=source,
            n_windows=_take(block, "n_windows", path, int, 1_000_000),
            seed=_take(block, "seed", path, int, 42),
            workers=_take(block, "workers", path, int, 1),
        )
        _no_leftovers(block, path)
        if out.n_windows < 1:
            raise ConfigError(f"{path}.n_windows", "must be >= 1")
        if not 0 <= out.seed < 2**64:
            raise ConfigError(f"{path}.seed", "must be a 64-bit unsigned integer")
        return out

    def to_dict(self):
        return {
            "source": self.source.to_dict(),
            "n_windows": self.n_windows,
            "seed": self.seed,
            "workers": self.workers,
        }


SETTINGS = {
    "bands": BandsSettings,
    "ldos": LdosSettings,
    "evolve": EvolveSettings,
    "sweep_phi": SweepSettings,
    "hbt": HbtSettings,
}

DEFAULT_LATTICE = {"n_sites": 100, "t": 0.5, "lambda": 0.5, "b": GOLDEN_MEAN, "phi_pi": 0.2}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    lattice: LatticeParams | None
    settings: Any
    out_dir: str = "runs"

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any], kind: str | None = None) -> "ExperimentConfig":
        raw = dict(raw)
        file_kind = raw.pop("kind", None)
        if file_kind is not None:
            file_kind = str(file_kind).replace("-", "_")
        if kind is None:
            kind = file_kind
        kind = kind.replace("-", "_") if kind else None
        if kind not in KINDS:
            raise ConfigError("kind", f"expected one of {KINDS}, got {kind!r}")
        if file_kind is not None and file_kind != kind:
            raise ConfigError("kind", f"config is for '{file_kind}', not '{kind}'")

        out_dir = str(raw.pop("out_dir", "runs"))
        lattice_block = raw.pop("lattice", None)
        others = [k for k in KINDS if k in raw and k != kind]
        if others:
            raise ConfigError(others[0], f"block does not belong to a '{kind}' config")
        settings_block = raw.pop(kind, {})
        _no_leftovers(raw, "")

        lattice = None
        if kind != "hbt" or lattice_block is not None:
            block = DEFAULT_LATTICE if lattice_block is None else lattice_block
            try:
                lattice = LatticeParams.from_dict(block)
            except ParameterError as exc:
                raise ConfigError("lattice", str(exc)) from None
        if not isinstance(settings_block, Mapping):
            raise ConfigError(kind, "must be a table")
        settings = SETTINGS[kind].from_dict(settings_block, kind)
        if kind == "evolve" and lattice is not None:
            if not 1 <= settings.input_site <= lattice.n_sites:
                raise ConfigError("evolve.input_site", f"outside 1..{lattice.n_sites}")
        return cls(kind, lattice, settings, out_dir)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind, "out_dir": self.out_dir}
        if self.lattice is not None:
            out["lattice"] = self.lattice.to_dict()
        out[self.kind] = self.settings.to_dict()
        return out

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_dict())


def load_raw(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("--config", f"{path}: {exc}") from None


def load(path, kind: str | None = None) -> ExperimentConfig:
    return ExperimentConfig.from_dict(load_raw(path), kind)


def loads(text: str, kind: str | None = None) -> ExperimentConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("", str(exc)) from None
    return ExperimentConfig.from_dict(raw, kind)


def save(config: ExperimentConfig, path) -> Path:
    path = Path(path)
    path.write_text(config.dumps(), encoding="utf-8")
    return path
