"""CSV and JSON serialisation of results.

Floats are written with ``repr`` so output is byte-stable and round-trips.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from . import __version__
from .evolution import PropagationResult
from .lattice import LatticeParams
from .photon_stats import AlphaEstimate, HbtCounts, SourceModel
from .spectral import BandScan, LdosMap, side_census, BoundaryMode

SCHEMA_VERSION = "1"


def _num(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, header, rows) -> Path:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_num(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def write_json(path: Path, kind: str, payload: dict) -> Path:
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, "tool_version": __version__}
    doc.update(payload)
    path.write_text(json.dumps(doc, indent=2, default=_json_default) + "\n", encoding="utf-8")
    return path


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def band_scan_csv(scan: BandScan, path: Path) -> Path:
    def rows():
        for i, phi in enumerate(scan.phi_grid):
            for m, energy in enumerate(scan.energies_per_phi[i]):
                yield (
                    phi,
                    m + 1,
                    energy,
                    scan.left_edge_weight_per_mode[i, m],
                    scan.right_edge_weight_per_mode[i, m],
                )

    return _write_csv(path, ["phi", "mode", "energy", "left_edge_weight", "right_edge_weight"], rows())


def band_scan_json(scan: BandScan, path: Path) -> Path:
    return write_json(path, "band_scan", {
        "params": scan.params_template.to_dict(),
        "edge_window": scan.edge_window,
        "phi_grid": scan.phi_grid,
        "energies": scan.energies_per_phi,
        "left_edge_weight": scan.left_edge_weight_per_mode,
        "right_edge_weight": scan.right_edge_weight_per_mode,
    })


def ldos_csv(ldos_map: LdosMap, path: Path) -> Path:
    def rows():
        for e, energy in enumerate(ldos_map.energy_grid):
            for n in range(ldos_map.site_count):
                yield energy, n + 1, ldos_map.density[e, n]

    return _write_csv(path, ["energy", "site", "density"], rows())


def ldos_json(ldos_map: LdosMap, params: LatticeParams, path: Path, modes=()) -> Path:
    return write_json(path, "ldos", {
        "params": params.to_dict(),
        "broadening_sigma": ldos_map.broadening_sigma,
        "site_count": ldos_map.site_count,
        "energy_grid": ldos_map.energy_grid,
        "density": ldos_map.density,
        "boundary_modes": [mode_to_dict(m) for m in modes],
    })


def mode_to_dict(mode: BoundaryMode) -> dict:
    return {
        "mode_index": mode.mode_index,
        "energy": mode.energy,
        "side": mode.side.value,
        "edge_weight": mode.edge_weight,
        "gap_interval": list(mode.gap_interval),
    }


def propagation_csv(result: PropagationResult, path: Path) -> Path:
    def rows():
        for i, z in enumerate(result.z_samples):
            for n, p in enumerate(result.distributions[i]):
                yield z, n + 1, p

    return _write_csv(path, ["z", "site", "probability"], rows())


def propagation_json(result: PropagationResult, path: Path, extra: dict | None = None) -> Path:
    payload = {
        "params": result.params.to_dict(),
        "input_site": result.input_site,
        "z_samples": result.z_samples,
        "distributions": result.distributions,
    }
    payload.update(extra or {})
    return write_json(path, "propagation", payload)


def hbt_json(model: SourceModel, n_windows: int, seed: int, counts: HbtCounts,
             estimate: AlphaEstimate | None, path: Path, extra: dict | None = None) -> Path:
    payload = {
        "source": model.to_dict(),
        "n_windows": n_windows,
        "seed": seed,
        "counts": counts.to_dict(),
        "alpha": estimate.to_dict() if estimate is not None else None,
    }
    payload.update(extra or {})
    return write_json(path, "hbt", payload)


def census_row(modes) -> tuple[int, int]:
    census = side_census(modes)
    return census["left"], census["right"]


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
