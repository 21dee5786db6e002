"""Result files: CSV and legacy-VTK fields, EOC tables.

Numbers are written with 17 significant digits, which round-trips every
double exactly. Writes go to a temporary file in the target directory and
are moved into place with ``os.replace`` so readers never see partial files.
"""

from __future__ import annotations

import io
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, OutputError
from ..grid import Grid

FORMATS = ("csv", "vtk")
FLOAT_FMT = "%.17g"


@dataclass
class FieldData:
    """Named cell-centre columns read back from a result file.

    ``coords`` holds the coordinate columns (``x`` or ``x, y``) and
    ``columns`` the variables, each flattened with ``x`` varying fastest.
    ``shape`` is the grid shape ``(nx,)`` or ``(nx, ny)`` when known.
    """

    coords: dict
    columns: dict
    shape: tuple

    def grid_array(self, name: str) -> np.ndarray:
        """Column ``name`` reshaped to ``shape`` with ``ij`` indexing."""
        col = self.columns[name]
        return col.reshape(self.shape[::-1]).T if len(self.shape) == 2 else col.reshape(self.shape)


def variable_names(model) -> list:
    """Output column names of the primitive variables of ``model``."""
    if model.name == "euler":
        return ["rho", *[f"u{l + 1}" for l in range(model.dim)], "p"]
    return ["rho", "u1", "u2", "u3", "p", "B1", "B2", "B3", "phi"]


def primitive_columns(values, model) -> dict:
    """Primitive variables of interior conserved ``values`` keyed by column name."""
    names = variable_names(model)
    if model.name == "euler":
        rho, u, p = model.primitives(values, check=False)
        arrays = [rho, *u, p]
    else:
        rho, u, p, B, phi = model.primitives(values, check=False)
        arrays = [rho, *u, p, *B, phi]
    return dict(zip(names, arrays))


def _flat(a) -> np.ndarray:
    # x fastest: transpose so that the first grid axis varies last in C order
    return np.asarray(a).T.ravel()


def _atomic_write(path, text: str) -> None:
    if not path:
        raise OutputError("empty output path")
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    tmp = None
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise OutputError(f"cannot write {path}: {exc}") from exc


def _read_text(path) -> str:
    if not path:
        raise OutputError("empty input path")
    try:
        with open(path, newline="") as fh:
            return fh.read()
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc


def _csv_text(header, table) -> str:
    buf = io.StringIO()
    np.savetxt(buf, table, fmt=FLOAT_FMT, delimiter=",", header=",".join(header), comments="")
    return buf.getvalue()


def field_csv(values, grid: Grid, model) -> str:
    cols = primitive_columns(values, model)
    coord_names = ["x", "y"][: grid.dim]
    coords = [_flat(c) for c in grid.mesh()]
    table = np.column_stack(coords + [_flat(c) for c in cols.values()])
    return _csv_text(coord_names + list(cols), table)


def field_vtk(values, grid: Grid, model, title: str = "splitrelax field") -> str:
    cols = primitive_columns(values, model)
    n = tuple(grid.n) + (1,) * (3 - grid.dim)
    origin = [grid.lo[l] + 0.5 * grid.dx[l] for l in range(grid.dim)] + [0.0] * (3 - grid.dim)
    spacing = list(grid.dx) + [1.0] * (3 - grid.dim)
    lines = [
        "# vtk DataFile Version 3.0",
        title.replace("\n", " ")[:255],
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        "DIMENSIONS " + " ".join(str(k) for k in n),
        "ORIGIN " + " ".join(FLOAT_FMT % v for v in origin),
        "SPACING " + " ".join(FLOAT_FMT % v for v in spacing),
        f"POINT_DATA {grid.size}",
    ]
    for name, arr in cols.items():
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [FLOAT_FMT % v for v in _flat(arr)]
    return "\n".join(lines) + "\n"


def write_output(values, grid: Grid, model, path, fmt: str = "csv") -> str:
    """Write the primitive variables of ``values`` to ``path``.

    Returns the path written. Raises ``OutputError`` on I/O failure and
    ``ConfigError`` for an unknown format.
    """
    if fmt not in FORMATS:
        raise ConfigError(f"unknown output format {fmt!r}; expected one of {FORMATS}")
    text = field_csv(values, grid, model) if fmt == "csv" else field_vtk(values, grid, model)
    _atomic_write(path, text)
    return os.fspath(path)


def _parse_csv(text: str, path) -> FieldData:
    lines = text.splitlines()
    if not lines:
        raise OutputError(f"{path}: empty file")
    header = lines[0].split(",")
    try:
        data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise OutputError(f"{path}: malformed CSV: {exc}") from exc
    if data.shape[1] != len(header):
        raise OutputError(f"{path}: {data.shape[1]} columns but header names {len(header)}")
    ncoord = 2 if header[:2] == ["x", "y"] else 1
    coords = {h: data[:, k] for k, h in enumerate(header[:ncoord])}
    cols = {h: data[:, k] for k, h in enumerate(header) if k >= ncoord}
    if ncoord == 1:
        shape = (data.shape[0],)
    else:
        nx = int(np.unique(coords["x"]).size)
        shape = (nx, data.shape[0] // max(nx, 1))
    return FieldData(coords, cols, shape)


def _parse_vtk(text: str, path) -> FieldData:
    tokens = text.split("\n")
    try:
        dims = origin = spacing = None
        cols = {}
        k = 0
        while k < len(tokens):
            line = tokens[k].strip()
            if line.startswith("DIMENSIONS"):
                dims = [int(v) for v in line.split()[1:]]
            elif line.startswith("ORIGIN"):
                origin = [float(v) for v in line.split()[1:]]
            elif line.startswith("SPACING"):
                spacing = [float(v) for v in line.split()[1:]]
            elif line.startswith("SCALARS"):
                name = line.split()[1]
                count = int(np.prod(dims))
                cols[name] = np.array([float(v) for v in tokens[k + 2 : k + 2 + count]])
                k += 1 + count
            k += 1
    except (ValueError, TypeError, IndexError) as exc:
        raise OutputError(f"{path}: malformed VTK file: {exc}") from exc
    if dims is None or origin is None or spacing is None:
        raise OutputError(f"{path}: missing VTK geometry")
    dim = 2 if dims[1] > 1 else 1
    shape = tuple(dims[:dim])
    axes = [origin[l] + spacing[l] * np.arange(dims[l]) for l in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = {c: _flat(m) for c, m in zip(("x", "y"), mesh)}
    return FieldData(coords, cols, shape)


def read_output(path) -> FieldData:
    """Read a field written by ``write_output`` (format from the file content)."""
    text = _read_text(path)
    if text.startswith("# vtk"):
        return _parse_vtk(text, path)
    return _parse_csv(text, path)


def eoc_csv(table) -> str:
    lines = ["N,var,error,rate"]
    for n, var, err, rate in table.rows:
        lines.append(f"{n},{var},{FLOAT_FMT % err},{'' if rate is None else FLOAT_FMT % rate}")
    return "\n".join(lines) + "\n"


def write_eoc(table, path) -> str:
    """Write an ``EocTable`` as CSV ``N,var,error,rate`` (empty rate on the coarsest grid)."""
    _atomic_write(path, eoc_csv(table))
    return os.fspath(path)


def read_eoc(path) -> list:
    """Rows ``(N, var, error, rate)`` of an EOC CSV file."""
    lines = _read_text(path).splitlines()
    if not lines or lines[0] != "N,var,error,rate":
        raise OutputError(f"{path}: not an EOC table")
    rows = []
    for line in lines[1:]:
        n, var, err, rate = line.split(",")
        rows.append((int(n), var, float(err), None if rate == "" else float(rate)))
    return rows
