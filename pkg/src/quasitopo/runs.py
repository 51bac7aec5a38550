"""Experiment recipes: compute, write artifacts, record a manifest.

Each ``run_*`` takes an ExperimentConfig and returns the RunManifest that
it also wrote as ``manifest.json`` in the run directory. The manifest is
written last, and is written for failed runs too (status ``failed`` or
``incomplete``) before the exception propagates.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, export, svg
from .config import ExperimentConfig
from .errors import ConfigError
from .evolution import propagate_experiment, return_probability
from .lattice import build_hamiltonian
from .photon_stats import alpha_estimate, simulate_hbt
from .spectral import (
    band_scan,
    classify_boundary_modes,
    default_sigma,
    diagonalize,
    ldos,
    side_census,
)

MANIFEST = "manifest.json"
LATEST = "LATEST"


@dataclass
class RunManifest:
    config: dict
    run_dir: Path
    files: list[dict] = field(default_factory=list)
    tool_version: str = __version__
    duration_s: float | None = None
    started_at: str | None = None
    status: str = "running"
    error: str | None = None
    summary: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema_version": export.SCHEMA_VERSION,
            "status": self.status,
            "tool_version": self.tool_version,
            "started_at": self.started_at,
            "duration_s": self.duration_s,
            "config": self.config,
            "files": self.files,
            "summary": self.summary,
            "error": self.error,
        }


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class _Run:
    """Run-directory bookkeeping shared by every recipe."""

    def __init__(self, config: ExperimentConfig, timestamp: bool):
        self.timestamp = timestamp
        self.t0 = time.perf_counter()
        now = _dt.datetime.now(_dt.timezone.utc)
        root = Path(config.out_dir)
        name = f"{config.kind}-{now:%Y%m%dT%H%M%S_%f}" if timestamp else config.kind
        self.dir = root / name
        try:
            self.dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError("out_dir", f"cannot create {self.dir}: {exc.strerror}") from None
        self.stamp = now.isoformat() if timestamp else None
        self.manifest = RunManifest(config=config.to_dict(), run_dir=self.dir, started_at=self.stamp)
        (root / LATEST).write_text(name + "\n", encoding="utf-8")

    def path(self, name: str) -> Path:
        p = self.dir / name
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def add(self, path: Path):
        path = Path(path)
        self.manifest.files.append({
            "path": path.relative_to(self.dir).as_posix(),
            "sha256": sha256_file(path),
            "bytes": path.stat().st_size,
        })

    def close(self, status: str, error: BaseException | None = None) -> RunManifest:
        m = self.manifest
        m.status = status
        if error is not None:
            m.error = f"{type(error).__name__}: {error}"
        if self.timestamp:
            m.duration_s = time.perf_counter() - self.t0
        (self.dir / MANIFEST).write_text(
            json.dumps(m.to_dict(), indent=2, default=export._json_default) + "\n",
            encoding="utf-8",
        )
        return m


def _recipe(func):
    def wrapper(config: ExperimentConfig, timestamp: bool = True) -> RunManifest:
        if config.kind != func.__name__.removeprefix("run_"):
            raise ConfigError("kind", f"{func.__name__} cannot run a '{config.kind}' config")
        run = _Run(config, timestamp)
        try:
            func(config, run)
        except BaseException as exc:
            run.close(getattr(exc, "run_status", "failed"), exc)
            raise
        return run.close("complete")

    wrapper.__name__ = func.__name__
    wrapper.__doc__ = func.__doc__
    return wrapper


def _annotations(params, with_phi: bool = True) -> list[str]:
    text = [f"N={params.n_sites}", f"t={params.t:g}", f"lambda={params.lam:g}", f"b={params.b:.6g}"]
    if with_phi:
        text.append(f"phi={params.phi_pi:.4g}pi")
    if not params.physical:
        text.append("NON-PHYSICAL (|lambda|>1)")
    return text


@_recipe
def run_bands(config: ExperimentConfig, run: _Run):
    """Spectrum versus phi with boundary modes marked."""
    s = config.settings
    scan = band_scan(config.lattice, s.phi_grid(), d=min(s.d, config.lattice.n_sites),
                     workers=s.workers)
    left, right = scan.boundary_mask(s.threshold, s.min_gap)
    run.add(export.band_scan_csv(scan, run.path("bands.csv")))
    run.add(export.band_scan_json(scan, run.path("bands.json")))
    svg.band_scatter(
        scan.phi_grid, scan.energies_per_phi, left, right, run.path("bands.svg"),
        annotations=_annotations(config.lattice, with_phi=False), timestamp=run.stamp,
    )
    run.add(run.path("bands.svg"))
    run.manifest.summary = {
        "phi_points": int(scan.phi_grid.size),
        "left_mode_points": int(left.sum()),
        "right_mode_points": int(right.sum()),
    }


@_recipe
def run_ldos(config: ExperimentConfig, run: _Run):
    """Broadened local density of states and its in-gap boundary modes."""
    s = config.settings
    es = diagonalize(build_hamiltonian(config.lattice))
    grid = None
    if s.e_min is not None:
        grid = np.linspace(s.e_min, s.e_max, s.n_energies or 600)
    elif s.n_energies is not None:
        sigma = s.sigma or default_sigma(es.energies)
        grid = np.linspace(es.energies[0] - 5 * sigma, es.energies[-1] + 5 * sigma, s.n_energies)
    result = ldos(es, grid, s.sigma)
    # tiny lattices: the edge window cannot exceed the chain
    modes = classify_boundary_modes(es, d=min(s.d, es.n_sites))
    run.add(export.ldos_csv(result, run.path("ldos.csv")))
    run.add(export.ldos_json(result, config.lattice, run.path("ldos.json"), modes))
    svg.heatmap(
        result.energy_grid, result.density, run.path("ldos.svg"),
        annotations=_annotations(config.lattice) + [f"sigma={result.broadening_sigma:.3g}"],
        timestamp=run.stamp,
    )
    run.add(run.path("ldos.svg"))
    run.manifest.summary = {"sigma": result.broadening_sigma, **side_census(modes)}


def _write_propagation(run: _Run, prefix: str, result, d: int):
    n = result.params.n_sites
    xi = result.xi(d=d)
    run.add(export.propagation_csv(result, run.path(f"{prefix}propagation.csv")))
    run.add(export.propagation_json(
        result, run.path(f"{prefix}propagation.json"),
        {"xi_input": xi, "xi_window": d},
    ))
    svg.bar_chart(
        result.final_distribution, run.path(f"{prefix}distribution.svg"),
        highlight=result.input_site,
        title=f"Output distribution at z={result.z_samples[-1]:g}, input site {result.input_site}",
        annotations=_annotations(result.params)
        + [f"xi_{result.input_site}(d={d})={xi:.3f}", f"sites 1..{n}"],
        timestamp=run.stamp,
    )
    run.add(run.path(f"{prefix}distribution.svg"))
    return xi


@_recipe
def run_evolve(config: ExperimentConfig, run: _Run):
    """Propagate a photon injected at one site and report xi there."""
    s = config.settings
    result = propagate_experiment(config.lattice, s.input_site, s.samples())
    xi = _write_propagation(run, "", result, 7)
    run.manifest.summary = {
        "input_site": s.input_site,
        "z": float(result.z_samples[-1]),
        "xi_input": xi,
        "xi_left": return_probability(result.final_distribution, 1),
        "xi_right": return_probability(result.final_distribution, config.lattice.n_sites),
    }


@_recipe
def run_sweep_phi(config: ExperimentConfig, run: _Run):
    """Run every (N, phi, input) case and tabulate xi and the mode census."""
    s = config.settings
    rows = []
    try:
        for i, case in enumerate(s.cases):
            params = config.lattice.replace(n_sites=case.n_sites, phi=case.phi)
            es = diagonalize(build_hamiltonian(params))
            census = side_census(classify_boundary_modes(es, d=min(s.d, params.n_sites)))
            result = propagate_experiment(params, case.input_site, [s.z], es=es)
            prefix = f"case-{i:03d}-N{case.n_sites}-phi{case.phi_pi:.4g}pi-in{case.input_site}/"
            xi = _write_propagation(run, prefix, result, s.d)
            rows.append((case.n_sites, params.phi, params.phi_pi, case.input_site, xi,
                         census["left"], census["right"]))
    except BaseException as exc:
        exc.run_status = "incomplete"
        raise
    finally:
        if rows:
            run.add(export._write_csv(
                run.path("summary.csv"),
                ["n_sites", "phi", "phi_pi", "input_site", "xi_input", "left_modes", "right_modes"],
                rows,
            ))
        run.manifest.summary = {"cases": [
            {"n_sites": r[0], "phi_pi": r[2], "input_site": r[3], "xi_input": r[4],
             "left_modes": r[5], "right_modes": r[6]}
            for r in rows
        ]}


@_recipe
def run_hbt(config: ExperimentConfig, run: _Run):
    """Monte-Carlo HBT counts and the alpha estimate."""
    s = config.settings
    counts = simulate_hbt(s.source, s.n_windows, s.seed, workers=s.workers)
    try:
        estimate = alpha_estimate(counts)
    except ZeroDivisionError:
        run.add(export.hbt_json(s.source, s.n_windows, s.seed, counts, None, run.path("hbt.json")))
        raise
    run.add(export.hbt_json(s.source, s.n_windows, s.seed, counts, estimate, run.path("hbt.json")))
    run.manifest.summary = {
        "alpha": estimate.alpha,
        "std_error": estimate.std_error,
        "upper_bound": estimate.upper_bound,
        "formatted": estimate.format(),
    }


RECIPES = {
    "bands": run_bands,
    "ldos": run_ldos,
    "evolve": run_evolve,
    "sweep_phi": run_sweep_phi,
    "hbt": run_hbt,
}


def run(config: ExperimentConfig, timestamp: bool = True) -> RunManifest:
    return RECIPES[config.kind](config, timestamp)
