import csv
import hashlib
import json
import logging
import os
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

import config
from errors import ConfigError
from forms import CELL_NAMES, SMOOTH_NAMES, BodyGrid, MotorForm, complex_for

# Configure logging
logger = logging.getLogger(__name__)

CSV_HEADER = ["cell_type", "i", "j", "k", "v1", "v2", "v3", "v4", "v5", "v6"]


def _number(value: float) -> str:
    return config.FLOAT_FORMAT % float(value)


def form_rows(form: MotorForm) -> List[List[str]]:
    """
    Rows of a form in the field CSV layout

    Smooth forms give one row per (component, vertex); cochains one row per
    cell. Values shorter than six entries are padded with zeros.
    """
    rows = []
    names = CELL_NAMES if form.is_cochain else SMOOTH_NAMES
    for c, block in enumerate(form.blocks()):
        flat = block.reshape(block.shape[:3] + (-1,))
        for index in np.ndindex(*flat.shape[:3]):
            values = list(flat[index]) + [0.0] * (6 - flat.shape[-1])
            rows.append([names[form.degree][c], *[str(n) for n in index], *[_number(v) for v in values[:6]]])
    return rows


def write_field_csv(path: str, rows: Iterable[Sequence[str]]) -> str:
    """
    Write rows under the fixed header

    Args:
        path: Destination file
        rows: Rows as produced by ``form_rows`` or ``vertex_rows``

    Returns:
        The path written
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(rows)
    logger.debug(f"Wrote field CSV {path}")
    return path


def vertex_rows(values: np.ndarray) -> List[List[str]]:
    """Rows of a (n1+1, n2+1, n3+1, 6) vertex array with cell type 'vertex'"""
    return [["vertex", *[str(n) for n in index], *[_number(v) for v in values[index]]]
            for index in np.ndindex(*values.shape[:3])]


def read_vertex_csv(path: str, grid: BodyGrid) -> np.ndarray:
    """
    Read six values per vertex from a field CSV

    Raises:
        ConfigError: if the file is missing, has another header, or does not
            cover every vertex of the grid exactly once
    """
    if not os.path.exists(path):
        raise ConfigError(f"Field file not found: {path}")
    values = np.full(grid.vertex_shape + (6,), np.nan)
    seen = np.zeros(grid.vertex_shape, dtype=bool)
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ConfigError(f"{path}: expected header {','.join(CSV_HEADER)}")
        for line, row in enumerate(reader, start=2):
            try:
                if row[0] != "vertex" or len(row) != len(CSV_HEADER):
                    raise ValueError("expected a vertex row with six values")
                index = tuple(int(n) for n in row[1:4])
                if seen[index] or min(index) < 0:
                    raise ValueError(f"duplicate or invalid vertex {index}")
                values[index] = [float(v) for v in row[4:]]
                seen[index] = True
            except (ValueError, IndexError) as e:
                raise ConfigError(f"{path}:{line}: {e}")
    if not np.all(seen):
        raise ConfigError(f"{path}: {int((~seen).sum())} grid vertices have no values")
    logger.info(f"Read {seen.size} vertex values from {path}")
    return values


def form_scalars(form: MotorForm, prefix: str) -> Dict[str, np.ndarray]:
    """Split a smooth form into named vertex scalars, e.g. ``E_dx1_3``"""
    if form.is_cochain:
        raise ConfigError("VTK export needs a smooth (vertex-sampled) form")
    scalars = {}
    for c, block in enumerate(form.blocks()):
        flat = block.reshape(block.shape[:3] + (-1,))
        for v in range(flat.shape[-1]):
            scalars[f"{prefix}_{SMOOTH_NAMES[form.degree][c]}_{v + 1}"] = flat[..., v]
    return scalars


def write_vtk(path: str, grid: BodyGrid, scalars: Mapping[str, np.ndarray], title: str = "cosserat field") -> str:
    """Legacy ASCII STRUCTURED_POINTS file, one SCALARS block per entry, x1 fastest"""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    dims = grid.vertex_shape
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {dims[0]} {dims[1]} {dims[2]}",
        "ORIGIN " + " ".join(_number(v) for v in grid.origin),
        "SPACING " + " ".join(_number(v) for v in grid.spacing),
        f"POINT_DATA {int(np.prod(dims))}",
    ]
    for name, values in scalars.items():
        values = np.asarray(values, dtype=float)
        if values.shape != dims:
            raise ConfigError(f"Scalar '{name}' has shape {values.shape}, expected {dims}")
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(_number(v) for v in values.ravel(order="F"))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    logger.debug(f"Wrote VTK file {path} with {len(scalars)} scalars")
    return path


def write_form(directory: str, name: str, form: MotorForm) -> List[str]:
    """CSV of every component and, for smooth forms, the matching VTK file"""
    written = [write_field_csv(os.path.join(directory, f"{name}.csv"), form_rows(form))]
    if not form.is_cochain:
        written.append(write_vtk(os.path.join(directory, f"{name}.vtk"), form.grid, form_scalars(form, name)))
    return written


def write_json(path: str, document: Mapping) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
    return path


def sha256_of(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def grid_summary(grid: BodyGrid) -> Dict[str, object]:
    return {
        "dims": list(grid.dims),
        "spacing": [float(h) for h in grid.spacing],
        "origin": [float(o) for o in grid.origin],
        "cells": [complex_for(grid).n_cells(p) for p in range(4)],
    }


def write_manifest(path: str, inputs: Mapping[str, object], grid: Optional[BodyGrid], files: Sequence[str]) -> str:
    """
    Manifest listing the run inputs, the grid and a sha256 per output file

    File names are stored relative to the manifest's directory. No
    timestamps are written, so identical runs give identical manifests.
    """
    base = os.path.dirname(os.path.abspath(path))
    document = {
        "inputs": dict(inputs),
        "grid": grid_summary(grid) if grid is not None else None,
        "files": {os.path.relpath(os.path.abspath(f), base): sha256_of(f) for f in sorted(files)},
    }
    write_json(path, document)
    logger.info(f"Wrote manifest {path} covering {len(files)} files")
    return path
