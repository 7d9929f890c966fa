"""Plain-text mesh persistence.

Format (versioned, line-oriented, whitespace-delimited)::

    shellmesh 1
    nodes <N>
    <x> <y> <z>          # repr() floats, bit-exact round trip
    ...
    tets <M>
    <a> <b> <c> <d>
    ...
    tris <S>
    <a> <b> <c> <tag>
    ...
"""
from __future__ import annotations

import numpy as np

from .cylinder import Mesh

FORMAT_NAME = "shellmesh"
FORMAT_VERSION = 1


class MeshFormatError(ValueError):
    """Malformed mesh file; message carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def save_mesh(mesh: Mesh, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{FORMAT_NAME} {FORMAT_VERSION}\n")
        fh.write(f"nodes {mesh.node_count}\n")
        for x, y, z in mesh.nodes:
            fh.write(f"{x!r} {y!r} {z!r}\n")
        fh.write(f"tets {mesh.tets.shape[0]}\n")
        for a, b, c, d in mesh.tets:
            fh.write(f"{a} {b} {c} {d}\n")
        fh.write(f"tris {mesh.surface_tris.shape[0]}\n")
        for (a, b, c), tag in zip(mesh.surface_tris, mesh.surface_tags):
            fh.write(f"{a} {b} {c} {tag}\n")


def load_mesh(path) -> Mesh:
    with open(path, encoding="ascii") as fh:
        lines = fh.read().splitlines()
    pos = 0

    def next_line():
        nonlocal pos
        if pos >= len(lines):
            raise MeshFormatError(len(lines) + 1, "unexpected end of file")
        pos += 1
        return lines[pos - 1]

    def section(keyword: str) -> int:
        line = next_line()
        parts = line.split()
        if len(parts) != 2 or parts[0] != keyword:
            raise MeshFormatError(pos, f"expected '{keyword} <count>'")
        try:
            count = int(parts[1])
        except ValueError:
            raise MeshFormatError(pos, f"bad {keyword} count {parts[1]!r}")
        if count < 0:
            raise MeshFormatError(pos, f"negative {keyword} count")
        return count

    header = next_line().split()
    if header[:1] != [FORMAT_NAME]:
        raise MeshFormatError(1, f"not a {FORMAT_NAME} file")
    if header[1:] != [str(FORMAT_VERSION)]:
        raise MeshFormatError(1, f"unsupported version {header[1:]}")

    n_nodes = section("nodes")
    if n_nodes == 0:
        raise MeshFormatError(pos, "mesh has no nodes")
    nodes = np.empty((n_nodes, 3))
    for i in range(n_nodes):
        parts = next_line().split()
        if len(parts) != 3:
            raise MeshFormatError(pos, "expected 3 coordinates")
        try:
            nodes[i] = [float(p) for p in parts]
        except ValueError:
            raise MeshFormatError(pos, f"bad coordinate in {parts}")

    n_tets = section("tets")
    if n_tets == 0:
        raise MeshFormatError(pos, "mesh has no tetrahedra")
    tets = np.empty((n_tets, 4), dtype=np.int32)
    for i in range(n_tets):
        parts = next_line().split()
        if len(parts) != 4:
            raise MeshFormatError(pos, "expected 4 node indices")
        try:
            tets[i] = [int(p) for p in parts]
        except ValueError:
            raise MeshFormatError(pos, f"bad node index in {parts}")

    n_tris = section("tris")
    tris = np.empty((n_tris, 3), dtype=np.int32)
    tags = []
    for i in range(n_tris):
        parts = next_line().split()
        if len(parts) != 4:
            raise MeshFormatError(pos, "expected 3 node indices and a tag")
        try:
            tris[i] = [int(p) for p in parts[:3]]
        except ValueError:
            raise MeshFormatError(pos, f"bad node index in {parts}")
        tags.append(parts[3])

    if pos != len(lines):
        raise MeshFormatError(pos + 1, "trailing content after tris section")
    for name, arr in (("tets", tets), ("tris", tris)):
        if arr.size and (arr.min() < 0 or arr.max() >= n_nodes):
            raise MeshFormatError(pos, f"{name} reference out-of-range nodes")
    return Mesh(nodes=nodes, tets=tets, surface_tris=tris, surface_tags=tuple(tags))
