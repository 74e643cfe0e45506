"""File formats: binary grids/measures, CSV mirrors, key=value configs.

Binary field file ("LQGF"): magic, u32 version=1, u32 nx, u32 ny,
f64 gamma (NaN if unset), then f64 node values row-major, little-endian.
Binary measure file ("LQGM") adds f64 eps after gamma.
"""
from __future__ import annotations

import math
import struct
from pathlib import Path

import numpy as np

from .domains import BoundaryCondition, DomainSpec, Shape
from .errors import InputError
from .gff import FieldGrid
from .measures import CellMeasure

_FIELD_MAGIC = b"LQGF"
_MEASURE_MAGIC = b"LQGM"
_VERSION = 1


def write_field(path, field: FieldGrid) -> None:
    gamma = field.gamma_context if field.gamma_context is not None else math.nan
    nx, ny = field.values.shape
    with open(path, "wb") as fh:
        fh.write(_FIELD_MAGIC)
        fh.write(struct.pack("<IIId", _VERSION, nx, ny, gamma))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_field_values(path):
    """Read an LQGF file; returns (values, gamma_or_None)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _FIELD_MAGIC:
            raise InputError(f"{path}: not a field grid file (magic {magic!r})")
        version, nx, ny, gamma = struct.unpack("<IIId", fh.read(20))
        if version != _VERSION:
            raise InputError(f"{path}: unsupported version {version}")
        values = np.frombuffer(fh.read(8 * nx * ny), dtype="<f8").reshape(nx, ny)
    return values.astype(float), (None if math.isnan(gamma) else gamma)


def write_measure(path, measure: CellMeasure) -> None:
    nx, ny = measure.mass.shape
    with open(path, "wb") as fh:
        fh.write(_MEASURE_MAGIC)
        fh.write(struct.pack("<IIIdd", _VERSION, nx, ny, measure.gamma, measure.eps))
        fh.write(np.ascontiguousarray(measure.mass, dtype="<f8").tobytes())


def read_measure_values(path):
    """Read an LQGM file; returns (masses, gamma, eps)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MEASURE_MAGIC:
            raise InputError(f"{path}: not a measure file (magic {magic!r})")
        version, nx, ny, gamma, eps = struct.unpack("<IIIdd", fh.read(28))
        if version != _VERSION:
            raise InputError(f"{path}: unsupported version {version}")
        mass = np.frombuffer(fh.read(8 * nx * ny), dtype="<f8").reshape(nx, ny)
    return mass.astype(float), gamma, eps


def _fmt(v) -> str:
    """Shortest exact decimal for floats; plain str otherwise."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Returns (header list, list of row lists of strings)."""
    lines = Path(path).read_text().strip("\n").split("\n")
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def field_csv_rows(field: FieldGrid):
    X, Y = field.domain.node_coords()
    nx, ny = field.values.shape
    for i in range(nx):
        for j in range(ny):
            yield (i, j, X[i, j], Y[i, j], field.values[i, j])


def measure_csv_rows(measure: CellMeasure):
    nx, ny = measure.mass.shape
    for i in range(nx):
        for j in range(ny):
            yield (i, j, measure.mass[i, j])


# --------------------------------------------------------------------------
# key = value config files


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def read_config(path) -> dict[str, str]:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"config file not found: {path}")
    return parse_config_text(p.read_text())


def dump_config(values: dict) -> str:
    return "\n".join(f"{k} = {v}" for k, v in values.items()) + "\n"


def domain_from_config(name: str, n: int, boundary: str | None = None) -> DomainSpec:
    shapes = {s.value: s for s in Shape}
    if name not in shapes:
        raise InputError(f"unknown domain {name!r} (expected one of {sorted(shapes)})")
    shape = shapes[name]
    if boundary is None:
        bc = (
            BoundaryCondition.MIXED
            if shape is Shape.UPPER_UNIT_DISK
            else BoundaryCondition.DIRICHLET
        )
    else:
        bcs = {b.value: b for b in BoundaryCondition}
        if boundary not in bcs:
            raise InputError(f"unknown boundary condition {boundary!r}")
        bc = bcs[boundary]
    return DomainSpec(shape, n, bc)
