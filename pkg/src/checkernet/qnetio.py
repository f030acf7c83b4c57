"""Text formats: the qnet grid format, OBJ export, and analysis reports.

qnet layout (whitespace-separated, one vertex per line, 17 significant
digits so float64 round-trips bit-identically):

    qnet 1
    rows R
    cols C
    x y z          <- R*C lines; vertex (k, l) on line l*R + k
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .curvature import principal_curvature_table, vertex_normals
from .errors import (CountMismatchError, GridTooSmallError, MalformedHeaderError,
                     NonFiniteValueError)
from .isothermic import is_isothermic
from .koenigs import is_koenigs
from .nets import Checkerboard, QuadNet, Tolerances, build_checkerboard, classify

__all__ = ["read_qnet", "write_qnet", "export_obj", "analysis_report", "write_report"]

FORMAT_VERSION = 1


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_qnet(net: QuadNet, path) -> None:
    lines = [f"qnet {FORMAT_VERSION}", f"rows {net.rows}", f"cols {net.cols}"]
    v = net.vertices
    for l in range(net.cols):
        for k in range(net.rows):
            lines.append(" ".join(_fmt(c) for c in v[k, l]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_qnet(path) -> QuadNet:
    with open(path) as fh:
        raw = [ln.strip() for ln in fh]
    lines = [ln for ln in raw if ln]
    if len(lines) < 3:
        raise MalformedHeaderError(f"{path}: missing header lines")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "qnet":
        raise MalformedHeaderError(f"{path}: first line must be 'qnet <version>'")
    try:
        version = int(head[1])
    except ValueError:
        raise MalformedHeaderError(f"{path}: non-integer version {head[1]!r}") from None
    if version != FORMAT_VERSION:
        raise MalformedHeaderError(f"{path}: unsupported version {version}")

    def _dim(line: str, name: str) -> int:
        parts = line.split()
        if len(parts) != 2 or parts[0] != name:
            raise MalformedHeaderError(f"{path}: expected '{name} <count>', got {line!r}")
        try:
            val = int(parts[1])
        except ValueError:
            raise MalformedHeaderError(f"{path}: non-integer {name} {parts[1]!r}") from None
        if val < 2:
            raise MalformedHeaderError(f"{path}: {name} must be >= 2, got {val}")
        return val

    rows = _dim(lines[1], "rows")
    cols = _dim(lines[2], "cols")
    body = lines[3:]
    if len(body) != rows * cols:
        raise CountMismatchError(
            f"{path}: header declares {rows * cols} vertices, found {len(body)}")
    verts = np.empty((rows, cols, 3))
    for i, line in enumerate(body):
        parts = line.split()
        if len(parts) != 3:
            raise CountMismatchError(
                f"{path}: vertex line {i} has {len(parts)} fields, expected 3")
        try:
            xyz = [float(p) for p in parts]
        except ValueError:
            raise NonFiniteValueError(f"{path}: unparseable number on vertex line {i}") from None
        if not all(math.isfinite(c) for c in xyz):
            raise NonFiniteValueError(f"{path}: non-finite coordinate on vertex line {i}")
        verts[i % rows, i // rows] = xyz
    return QuadNet(verts)


def export_obj(obj: QuadNet | Checkerboard, path) -> None:
    """Write a control net as quad faces, or a checkerboard pattern as two
    face groups named 'black' and 'white'. Vertices are 1-indexed."""
    lines: list[str] = []
    if isinstance(obj, QuadNet):
        if obj.rows * obj.cols == 0:
            raise ValueError("empty net")
        rows, cols = obj.rows, obj.cols
        for k in range(rows):
            for l in range(cols):
                x, y, z = obj.vertices[k, l]
                lines.append(f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}")
        vid = lambda k, l: k * cols + l + 1
        for k in range(rows - 1):
            for l in range(cols - 1):
                lines.append(f"f {vid(k, l)} {vid(k + 1, l)} {vid(k + 1, l + 1)} {vid(k, l + 1)}")
    elif isinstance(obj, Checkerboard):
        hm, vm = obj.hmid, obj.vmid
        rows, cols = obj.rows, obj.cols
        for grid in (hm, vm):
            for p in grid.reshape(-1, 3):
                lines.append(f"v {_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}")
        h_id = lambda k, l: k * cols + l + 1
        v_id = lambda k, l: hm.shape[0] * cols + k * (cols - 1) + l + 1
        lines.append("g black")
        for k in range(rows - 1):
            for l in range(cols - 1):
                lines.append(f"f {h_id(k, l)} {v_id(k + 1, l)} {h_id(k, l + 1)} {v_id(k, l)}")
        lines.append("g white")
        for k in range(1, rows - 1):
            for l in range(1, cols - 1):
                lines.append(f"f {h_id(k - 1, l)} {v_id(k, l - 1)} {h_id(k, l)} {v_id(k, l)}")
    else:
        raise TypeError(f"cannot export {type(obj).__name__}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def analysis_report(net: QuadNet, tol: Tolerances, provenance: dict[str, Any]) -> dict[str, Any]:
    """Full classification / Koenigs / isothermic / curvature report as a
    JSON-serializable document. Sections needing larger grids are null."""
    cbp = build_checkerboard(net)
    cls = classify(cbp, tol)
    report: dict[str, Any] = {
        "classification": {
            "orthogonal": cls.orthogonal,
            "conjugate": cls.conjugate,
            "principal": cls.principal,
            "residuals": {
                "orthogonality": cls.orthogonality_residual,
                "planarity": cls.planarity_residual,
            },
            "degenerate_black_faces": [list(f) for f in cls.degenerate_black],
            "degenerate_white_faces": [list(f) for f in cls.degenerate_white],
        },
        "koenigs": None,
        "isothermic": None,
        "curvature": None,
        "tolerances": {
            "tol_par": tol.tol_par,
            "tol_orth": tol.tol_orth,
            "tol_plan": tol.tol_plan,
            "tol_koenigs": tol.tol_koenigs,
            "tol_eq": tol.tol_eq,
        },
        "provenance": provenance,
    }
    if net.rows >= 4 and net.cols >= 4:
        if cls.conjugate:
            verdict = is_koenigs(cbp, tol=tol.tol_koenigs, conjugacy_tol=float("inf"))
            report["koenigs"] = {
                "is_koenigs": verdict.is_koenigs,
                "residuals": {
                    "laplace": verdict.laplace_residual,
                    "conic_max": (None if np.isnan(verdict.conic_residuals).all()
                                  else float(np.nanmax(verdict.conic_residuals))),
                    "one_form_max": float(verdict.one_form_residuals.max()),
                },
                "degenerate_faces": [list(f) for f in verdict.degenerate_faces],
            }
            report["isothermic"] = bool(cls.principal and verdict.is_koenigs)
        else:
            report["isothermic"] = False
        try:
            table = principal_curvature_table(net, vertex_normals(net))
        except GridTooSmallError:
            table = None
        if table is not None:
            faces = []
            for i, k in enumerate(table.ks):
                for j, l in enumerate(table.ls):
                    faces.append({
                        "face": [int(k), int(l)],
                        "kappa1": float(table.kappa1[i, j]),
                        "kappa2": float(table.kappa2[i, j]),
                        "mean": float(table.mean[i, j]),
                        "gauss": float(table.gauss[i, j]),
                        "dir1": [float(x) for x in table.dir1[i, j]],
                        "dir2": [float(x) for x in table.dir2[i, j]],
                    })
            report["curvature"] = faces
    return report


def write_report(report: dict[str, Any], path_or_none) -> str:
    text = json.dumps(report, indent=2)
    if path_or_none is not None:
        with open(path_or_none, "w") as fh:
            fh.write(text + "\n")
    return text
