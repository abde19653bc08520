"""CSV and legacy-VTK writers for fields and convergence tables.

Floats are written with 17 significant digits so a re-read recovers every
64-bit value exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping

import numpy as np

from .euler import GasModel, cons_to_prim
from .solver import ConservedField

FLOAT = "%.17g"


class OutputError(OSError):
    pass


def _g(v) -> str:
    return FLOAT % v


def _open(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", newline="")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from None


def write_profile_csv(fld: ConservedField, gas: GasModel, path) -> Path:
    """1D field as ``x,rho,u,p`` rows, one per cell."""
    if fld.grid.dim != 1:
        raise ValueError("profile CSV needs a 1D field")
    path = Path(path)
    rho, u, p = cons_to_prim(fld.interior, gas, check=False)
    x = fld.grid.centers(0)
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "rho", "u", "p"])
        for row in zip(x, rho, u, p):
            w.writerow([_g(v) for v in row])
    return path


def read_profile_csv(path) -> dict:
    """Columns of a profile CSV as float arrays."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float).reshape(-1, len(rows[0]))
    return {name: body[:, k] for k, name in enumerate(header)}


def write_slice_csv(fld: ConservedField, gas: GasModel, path, row=None) -> Path:
    """One x-row of a 2D field (default: the middle row) as ``x,y,rho,u,v,p``."""
    if fld.grid.dim != 2:
        raise ValueError("slice CSV needs a 2D field")
    path = Path(path)
    j = fld.grid.n[1] // 2 if row is None else row
    rho, u, v, p = cons_to_prim(fld.interior[:, :, j], gas, check=False)
    x = fld.grid.centers(0)
    y = fld.grid.centers(1)[j]
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "rho", "u", "v", "p"])
        for k in range(x.size):
            w.writerow([_g(x[k]), _g(y), _g(rho[k]), _g(u[k]), _g(v[k]), _g(p[k])])
    return path


def write_vtk(fld: ConservedField, gas: GasModel, path, title: str = "recweno") -> Path:
    """Legacy ASCII STRUCTURED_POINTS with cell data rho, p and velocity."""
    grid = fld.grid
    if grid.dim != 2:
        raise ValueError("VTK output needs a 2D field")
    path = Path(path)
    nx, ny = grid.n
    rho, u, v, p = cons_to_prim(fld.interior, gas, check=False)

    def flat(a):  # VTK runs x fastest
        return a.T.ravel()

    with _open(path) as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(title.replace("\n", " ")[:255] + "\n")
        fh.write("ASCII\nDATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {nx + 1} {ny + 1} 1\n")
        fh.write(f"ORIGIN {_g(grid.lower[0])} {_g(grid.lower[1])} 0\n")
        fh.write(f"SPACING {_g(grid.dx[0])} {_g(grid.dx[1])} 1\n")
        fh.write(f"CELL_DATA {nx * ny}\n")
        for name, data in (("rho", rho), ("p", p)):
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            fh.writelines(_g(val) + "\n" for val in flat(data))
        fh.write("VECTORS velocity double\n")
        fh.writelines(f"{_g(a)} {_g(b)} 0\n" for a, b in zip(flat(u), flat(v)))
    return path


def read_vtk_cell_data(path) -> dict:
    """Parse the writer's own VTK back into ``{name: array(ny, nx[, 3])}``."""
    lines = Path(path).read_text().splitlines()
    dims = next([int(t) for t in ln.split()[1:3]] for ln in lines if ln.startswith("DIMENSIONS"))
    nx, ny = dims[0] - 1, dims[1] - 1
    out, k = {}, 0
    while k < len(lines):
        parts = lines[k].split()
        if parts and parts[0] == "SCALARS":
            vals = np.array(lines[k + 2 : k + 2 + nx * ny], dtype=float)
            out[parts[1]] = vals.reshape(ny, nx)
            k += 2 + nx * ny
        elif parts and parts[0] == "VECTORS":
            vals = np.array([ln.split() for ln in lines[k + 1 : k + 1 + nx * ny]], dtype=float)
            out[parts[1]] = vals.reshape(ny, nx, 3)
            k += 1 + nx * ny
        else:
            k += 1
    return out


def write_convergence_csv(reports: Mapping, path) -> Path:
    """Table layout: ``mesh`` then ``<label>_L1, <label>_order`` per scheme."""
    path = Path(path)
    reports = dict(reports)
    meshes = None
    for rep in reports.values():
        if meshes is None:
            meshes = list(rep.resolutions)
        elif list(rep.resolutions) != meshes:
            raise ValueError("all reports must share the same resolutions")
    header = ["mesh"]
    for label in reports:
        header += [f"{label}_L1", f"{label}_order"]
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k, n in enumerate(meshes or []):
            row = [str(n)]
            for rep in reports.values():
                order = rep.orders[k]
                row += [_g(rep.l1[k]), "" if order is None else _g(order)]
            w.writerow(row)
    return path
