"""OFF / OBJ / ASCII-PLY mesh files and `path<TAB>label` dataset manifests."""
import logging
import os
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd

from meshkit.errors import ArgumentError, ParseError
from meshkit.mesh.core import TriMesh, validate_mesh

logger = logging.getLogger(__name__)

FORMATS = ("off", "obj", "ply")


class LoadedMesh(NamedTuple):
    mesh: TriMesh
    colors: Optional[np.ndarray] = None


def mesh_format(path, fmt=None):
    fmt = (fmt or os.path.splitext(str(path))[1].lstrip(".")).lower()
    if fmt not in FORMATS:
        raise ArgumentError(f"unsupported mesh format {fmt!r} for {path}, expected one of {FORMATS}")
    return fmt


def _content_lines(path, comment="#"):
    """(lineno, tokens) of every non-empty line, comments stripped."""
    with open(path, "rb") as f:
        for lineno, raw in enumerate(f, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(f"undecodable bytes at offset {exc.start}", path, lineno)
            if comment is not None:
                line = line.split(comment, 1)[0]
            tokens = line.split()
            if tokens:
                yield lineno, tokens


def _numbers(tokens, cast, path, lineno, what):
    try:
        return [cast(t) for t in tokens]
    except ValueError:
        raise ParseError(f"non-numeric token in {what}: {' '.join(tokens)!r}", path, lineno)


def _count(token, path, lineno, what):
    (value,) = _numbers([token], int, path, lineno, what)
    if value < 0:
        raise ParseError(f"negative {what} {value}", path, lineno)
    return value


def _fan(polygon, path, lineno):
    if len(polygon) < 3:
        raise ParseError(f"face with {len(polygon)} vertices", path, lineno)
    return [(polygon[0], polygon[k], polygon[k + 1]) for k in range(1, len(polygon) - 1)]


def _next(lines, path, what):
    try:
        return next(lines)
    except StopIteration:
        raise ParseError(f"file ends before {what}", path)


def _read_off(path):
    lines = _content_lines(path)
    lineno, header = _next(lines, path, "the OFF header")
    keyword = header[0].upper()
    if keyword not in ("OFF", "COFF"):
        raise ParseError(f"expected OFF header, got {header[0]!r}", path, lineno)
    counts = header[1:]
    if not counts:
        lineno, counts = _next(lines, path, "the OFF counts")
    if len(counts) < 2:
        raise ParseError("OFF counts line needs vertex and face counts", path, lineno)
    n_vertices = _count(counts[0], path, lineno, "vertex count")
    n_faces = _count(counts[1], path, lineno, "face count")

    vertices, colors = [], []
    for k in range(n_vertices):
        lineno, tokens = _next(lines, path, f"vertex {k}")
        values = _numbers(tokens, float, path, lineno, "vertex")
        if len(values) < 3:
            raise ParseError("vertex needs 3 coordinates", path, lineno)
        vertices.append(values[:3])
        if len(values) >= 6:
            colors.append(values[3:6])
    facets = []
    for k in range(n_faces):
        lineno, tokens = _next(lines, path, f"face {k}")
        values = _numbers(tokens, int, path, lineno, "face")
        size = values[0]
        if size < 0 or len(values) < size + 1:
            raise ParseError(f"face declares {size} vertices but lists {len(values) - 1}", path, lineno)
        facets.extend(_fan(values[1:size + 1], path, lineno))
    return vertices, facets, _scaled_colors(colors, n_vertices)


def _read_obj(path):
    vertices, colors, facets = [], [], []
    for lineno, tokens in _content_lines(path):
        record = tokens[0]
        if record == "v":
            values = _numbers(tokens[1:], float, path, lineno, "vertex")
            if len(values) < 3:
                raise ParseError("vertex needs 3 coordinates", path, lineno)
            vertices.append(values[:3])
            if len(values) >= 6:
                colors.append(values[3:6])
        elif record == "f":
            # v, v/vt, v//vn and v/vt/vn all start with the position index
            refs = _numbers([t.split("/")[0] for t in tokens[1:]], int, path, lineno, "face")
            polygon = []
            for ref in refs:
                if ref == 0:
                    raise ParseError("OBJ indices are 1-based, got 0", path, lineno)
                polygon.append(ref - 1 if ref > 0 else len(vertices) + ref)
            facets.extend(_fan(polygon, path, lineno))
    return vertices, facets, _scaled_colors(colors, len(vertices))


def _read_ply(path):
    lines = _content_lines(path, comment=None)
    lineno, magic = _next(lines, path, "the PLY header")
    if magic != ["ply"]:
        raise ParseError("missing 'ply' magic", path, lineno)
    n_vertices = n_faces = 0
    vertex_props, current = [], None
    while True:
        lineno, tokens = _next(lines, path, "end_header")
        keyword = tokens[0]
        if keyword == "format":
            if len(tokens) < 2 or tokens[1] != "ascii":
                raise ParseError(f"only ascii PLY is supported, got {' '.join(tokens[1:])!r}", path, lineno)
        elif keyword == "element":
            if len(tokens) < 3:
                raise ParseError("element line needs a name and a count", path, lineno)
            current = tokens[1]
            if current == "vertex":
                n_vertices = _count(tokens[2], path, lineno, "vertex count")
            elif current == "face":
                n_faces = _count(tokens[2], path, lineno, "face count")
        elif keyword == "property" and current == "vertex":
            vertex_props.append(tokens[-1])
        elif keyword == "end_header":
            break

    try:
        position = [vertex_props.index(axis) for axis in ("x", "y", "z")]
    except ValueError:
        raise ParseError("vertex element lacks x, y, z properties", path)
    rgb = [vertex_props.index(c) for c in ("red", "green", "blue") if c in vertex_props]
    vertices, colors = [], []
    for k in range(n_vertices):
        lineno, tokens = _next(lines, path, f"vertex {k}")
        values = _numbers(tokens, float, path, lineno, "vertex")
        if len(values) < len(vertex_props):
            raise ParseError(f"vertex has {len(values)} of {len(vertex_props)} properties", path, lineno)
        vertices.append([values[i] for i in position])
        if len(rgb) == 3:
            colors.append([values[i] for i in rgb])
    facets = []
    for k in range(n_faces):
        lineno, tokens = _next(lines, path, f"face {k}")
        values = _numbers(tokens, int, path, lineno, "face")
        size = values[0]
        if size < 0 or len(values) < size + 1:
            raise ParseError(f"face declares {size} vertices but lists {len(values) - 1}", path, lineno)
        facets.extend(_fan(values[1:size + 1], path, lineno))
    return vertices, facets, _scaled_colors(colors, n_vertices)


def _scaled_colors(colors, n_vertices):
    if len(colors) != n_vertices or n_vertices == 0:
        return None
    colors = np.asarray(colors, dtype=np.float64)
    if colors.max() > 1.0:
        colors = colors / 255.0
    return colors


_READERS = {"off": _read_off, "obj": _read_obj, "ply": _read_ply}


def load_mesh(path, fmt=None):
    """Read a triangle mesh, fan-splitting polygons; colours come back in [0, 1]."""
    fmt = mesh_format(path, fmt)
    vertices, facets, colors = _READERS[fmt](path)
    mesh = TriMesh(np.asarray(vertices, dtype=np.float64).reshape(-1, 3), np.asarray(facets, dtype=np.int64).reshape(-1, 3))
    report = validate_mesh(mesh)
    if len(report.out_of_range_facets):
        raise ParseError(f"{len(report.out_of_range_facets)} face(s) reference missing vertices", path)
    if not report.is_clean:
        logger.warning("%s: %s", path, report.summary())
    logger.debug("loaded %s: %d vertices, %d facets", path, mesh.n_vertices, mesh.n_facets)
    return LoadedMesh(mesh, colors)


def write_mesh(path, mesh, fmt=None, colors=None, labels=None):
    """Write OFF, OBJ or ASCII PLY; PLY can carry a per-vertex integer label column."""
    fmt = mesh_format(path, fmt)
    if labels is not None and fmt != "ply":
        raise ArgumentError("per-vertex labels can only be written to PLY")
    with open(path, "w") as f:
        if fmt == "off":
            f.write("OFF\n%d %d 0\n" % (mesh.n_vertices, mesh.n_facets))
            np.savetxt(f, mesh.vertices, fmt="%.9g")
            np.savetxt(f, np.hstack([np.full((mesh.n_facets, 1), 3), mesh.facets]), fmt="%d")
        elif fmt == "obj":
            rows = mesh.vertices if colors is None else np.hstack([mesh.vertices, colors])
            np.savetxt(f, rows, fmt="v" + " %.9g" * rows.shape[1])
            np.savetxt(f, mesh.facets + 1, fmt="f %d %d %d")
        else:
            f.write("ply\nformat ascii 1.0\nelement vertex %d\n" % mesh.n_vertices)
            f.write("property float x\nproperty float y\nproperty float z\n")
            columns, formats = [mesh.vertices], ["%.9g %.9g %.9g"]
            if colors is not None:
                f.write("property uchar red\nproperty uchar green\nproperty uchar blue\n")
                columns.append(np.rint(np.clip(colors, 0.0, 1.0) * 255))
                formats.append("%d %d %d")
            if labels is not None:
                f.write("property int label\n")
                columns.append(np.asarray(labels).reshape(-1, 1))
                formats.append("%d")
            f.write("element face %d\nproperty list uchar int vertex_indices\nend_header\n" % mesh.n_facets)
            np.savetxt(f, np.hstack(columns), fmt=" ".join(formats))
            np.savetxt(f, np.hstack([np.full((mesh.n_facets, 1), 3), mesh.facets]), fmt="%d")


def load_manifest(path):
    """DataFrame with columns path and label; relative paths resolve against the manifest folder."""
    try:
        table = pd.read_csv(
            path, sep="\t", header=None, names=["path", "label"], dtype=str, skip_blank_lines=False, comment="#"
        )
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise ParseError(str(exc), path)
    table.index = table.index + 1
    table = table.dropna(how="all")
    missing = table["label"].isna()
    if missing.any():
        raise ParseError("expected 'path<TAB>label'", path, int(table.index[missing][0]))
    labels = pd.to_numeric(table["label"], errors="coerce")
    invalid = ~np.isfinite(labels) | (labels < 0) | (labels != np.floor(labels))
    if invalid.any():
        bad = table.index[invalid][0]
        raise ParseError(f"label must be a non-negative integer, got {table.loc[bad, 'label']!r}", path, int(bad))
    root = os.path.dirname(os.path.abspath(path))
    table["path"] = [p if os.path.isabs(p) else os.path.join(root, p) for p in table["path"].str.strip()]
    table["label"] = labels.astype(np.int64)
    return table.reset_index(drop=True)


def write_manifest(path, entries):
    """entries: iterable of (mesh path, label); paths are stored relative to the manifest."""
    root = os.path.dirname(os.path.abspath(path))
    table = pd.DataFrame(
        [(os.path.relpath(os.path.abspath(p), root), int(label)) for p, label in entries], columns=["path", "label"]
    )
    table.to_csv(path, sep="\t", header=False, index=False)
