"""Snapshots and report files.

All writes go through a temp-and-rename so a failed run never leaves a
partial file. Snapshots round-trip exactly: loading and re-serializing a
snapshot reproduces it byte for byte (floats are emitted with repr
precision, which is lossless for doubles).
"""

from __future__ import annotations

import json
import os
import tempfile
from math import isfinite
from pathlib import Path
from typing import Any

import numpy as np

from .composite import CompositeState, Frame
from .sectors import CompartmentSpec, SectorGrid
from .statespace import MeterBasis

SNAPSHOT_VERSION = 1


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write text via a temp file in the target directory, then rename."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(value: Any) -> Any:
    """Make report values JSON-safe; non-finite floats become strings."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        f = float(value)
        return f if isfinite(f) else repr(f)
    if isinstance(value, np.integer):
        return int(value)
    return value


def dump_json(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def write_json(path: str | Path, obj: Any) -> None:
    atomic_write_text(path, dump_json(obj))


def write_csv(path: str | Path, header: list[str], rows: list[list[Any]]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _csv_cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def state_snapshot_dict(state: CompositeState) -> dict:
    spec = state.grid.spec
    sectors = []
    blocks = []
    for iq in range(spec.n_q):
        for iv in range(spec.n_v):
            a = state.grid.amplitudes[iq, iv]
            sectors.append([iq, iv, float(a.real), float(a.imag)])
            blocks.append(
                [[float(c.real), float(c.imag)] for c in state.blocks[iq, iv].tolist()]
            )
    return {
        "snapshot": SNAPSHOT_VERSION,
        "frame": state.frame.value,
        "time": float(state.time),
        "phase_time": float(state.phase_time),
        "meter": {
            "eigenvalues": list(state.basis.eigenvalues),
            "labels": list(state.basis.labels) if state.basis.labels else None,
        },
        "compartments": {
            "q_min": spec.q_min,
            "q_max": spec.q_max,
            "n_q": spec.n_q,
            "kappa": spec.kappa,
            "n_v": spec.n_v,
            "v_center": spec.v_center,
        },
        "coverage": state.grid.coverage,
        "sector_amplitudes": sectors,
        "meter_blocks": blocks,
    }


def state_from_snapshot_dict(data: dict) -> CompositeState:
    if data.get("snapshot") != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {data.get('snapshot')!r}")
    c = data["compartments"]
    spec = CompartmentSpec(
        q_min=c["q_min"], q_max=c["q_max"], n_q=c["n_q"],
        kappa=c["kappa"], n_v=c["n_v"], v_center=c["v_center"],
    )
    meter = data["meter"]
    labels = tuple(meter["labels"]) if meter.get("labels") else None
    basis = MeterBasis(tuple(meter["eigenvalues"]), labels)
    amps = np.zeros((spec.n_q, spec.n_v), dtype=complex)
    for iq, iv, re, im in data["sector_amplitudes"]:
        amps[iq, iv] = re + 1j * im
    grid = SectorGrid(spec=spec, amplitudes=amps, coverage=data.get("coverage"))
    blocks = np.zeros((spec.n_q, spec.n_v, basis.dim), dtype=complex)
    for row, (iq, iv, _, _) in zip(data["meter_blocks"], data["sector_amplitudes"]):
        blocks[iq, iv] = [re + 1j * im for re, im in row]
    return CompositeState(
        grid=grid,
        basis=basis,
        blocks=blocks,
        time=data["time"],
        phase_time=data["phase_time"],
        frame=Frame(data["frame"]),
    )


def save_state_snapshot(state: CompositeState, path: str | Path) -> None:
    atomic_write_text(path, dump_json(state_snapshot_dict(state)))


def load_state_snapshot(path: str | Path) -> CompositeState:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return state_from_snapshot_dict(data)
