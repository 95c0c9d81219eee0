"""Procedural meshes: engraved cubes for classification, icospheres and random grids."""
import logging
from typing import NamedTuple

import numpy as np
from tqdm import tqdm

from meshkit.errors import ArgumentError
from meshkit.mesh.core import TriMesh
from meshkit.preprocess.preprocess import normalize_shape

logger = logging.getLogger(__name__)

CUBE_SEGMENTS = 7
ENGRAVE_DEPTH = 0.6

# 4x4 stencils over interior lattice vertices of one cube face
MOTIFS = {
    "bar": ["....", "####", "....", "...."],
    "cross": [".#..", "####", ".#..", ".#.."],
    "ring": ["####", "#..#", "#..#", "####"],
    "L": ["#...", "#...", "#...", "####"],
    "T": ["####", ".#..", ".#..", ".#.."],
    "step": ["##..", ".##.", "..##", "...."],
    "block": ["....", ".##.", ".##.", "...."],
    "diagonal": ["#...", ".#..", "..#.", "...#"],
}
MOTIF_NAMES = tuple(MOTIFS)


class LabelledMesh(NamedTuple):
    mesh: TriMesh
    label: int


def motif_cells(name, quarter_turns=0):
    """(row, col) cells of a motif stencil rotated by quarter_turns * 90 degrees."""
    stencil = np.array([[c == "#" for c in row] for row in MOTIFS[name]])
    return np.argwhere(np.rot90(stencil, quarter_turns))


def cube_lattice(segments=CUBE_SEGMENTS):
    """Surface of the cube [-1, 1]^3 split into segments x segments quads per face, two triangles each.

    Returns the mesh and the integer lattice coordinate of every vertex.
    """
    n = segments
    index = {}
    coords = []

    def vertex(key):
        if key not in index:
            index[key] = len(coords)
            coords.append(key)
        return index[key]

    facets = []
    for axis in range(3):
        u, v = [a for a in range(3) if a != axis]
        for side in (0, n):
            outward = 1.0 if side == n else -1.0
            for p in range(n):
                for q in range(n):
                    corners = []
                    for dp, dq in ((0, 0), (1, 0), (1, 1), (0, 1)):
                        key = [0, 0, 0]
                        key[axis], key[u], key[v] = side, p + dp, q + dq
                        corners.append(vertex(tuple(key)))
                    a, b, c, d = corners
                    # (u, v, axis) is right-handed for axis 0 and 2, left-handed for axis 1
                    ccw = outward * (1.0 if axis != 1 else -1.0) > 0
                    if ccw:
                        facets.extend([(a, b, c), (a, c, d)])
                    else:
                        facets.extend([(a, c, b), (a, d, c)])
    lattice = np.asarray(coords, dtype=np.int64)
    vertices = lattice * (2.0 / n) - 1.0
    return TriMesh(vertices, np.asarray(facets, dtype=np.int64)), lattice


def engrave(mesh, lattice, motif, face, offset, quarter_turns, depth=ENGRAVE_DEPTH, segments=CUBE_SEGMENTS):
    """Push the motif's lattice vertices on one face inwards by depth grid spacings."""
    axis, side = divmod(face, 2)
    side = segments * side
    u, v = [a for a in range(3) if a != axis]
    cells = motif_cells(motif, quarter_turns) + np.asarray(offset)
    on_face = lattice[:, axis] == side
    targets = {(int(r), int(c)) for r, c in cells}
    hit = np.array(
        [on_face[i] and (int(lattice[i, u]), int(lattice[i, v])) in targets for i in range(len(lattice))]
    )
    vertices = mesh.vertices.copy()
    inward = -1.0 if side == segments else 1.0
    vertices[hit, axis] += inward * depth * 2.0 / segments
    return TriMesh(vertices, mesh.facets.copy())


def synth_engraved_cubes(n_classes, per_class, seed=0, progress=False):
    """per_class cubes of every class, engraved with the class motif at a random face, place and turn.

    Sample k draws from its own stream seeded by (seed, k), so the dataset is
    identical for every thread count.
    """
    if not 0 <= n_classes <= len(MOTIFS):
        raise ArgumentError(f"n_classes must be in [0, {len(MOTIFS)}], got {n_classes}")
    if per_class < 0:
        raise ArgumentError(f"per_class must be >= 0, got {per_class}")
    base, lattice = cube_lattice()
    dataset = []
    jobs = [(label, k) for label in range(n_classes) for k in range(per_class)]
    for index, (label, _) in enumerate(tqdm(jobs, disable=not progress, desc="cubes")):
        rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
        face = int(rng.integers(6))
        offset = rng.integers(1, CUBE_SEGMENTS - 3, size=2)
        turns = int(rng.integers(4))
        mesh = engrave(base, lattice, MOTIF_NAMES[label], face, offset, turns)
        dataset.append(LabelledMesh(normalize_shape(mesh), label))
    logger.debug("generated %d engraved cubes over %d classes", len(dataset), n_classes)
    return dataset


def icosphere(subdivisions=3):
    """Unit icosphere; subdivision s has 10 * 4^s + 2 vertices."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    vertices = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    facets = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    vertices = [np.asarray(v, dtype=np.float64) / np.linalg.norm(v) for v in vertices]
    for _ in range(subdivisions):
        midpoints = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in midpoints:
                m = vertices[a] + vertices[b]
                vertices.append(m / np.linalg.norm(m))
                midpoints[key] = len(vertices) - 1
            return midpoints[key]

        refined = []
        for a, b, c in facets:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
        facets = refined
    return TriMesh(np.asarray(vertices), np.asarray(facets, dtype=np.int64))


def grid_mesh(rows, cols):
    """Flat rows x cols grid of unit squares in the z = 0 plane, two triangles per square."""
    ii, jj = np.meshgrid(np.arange(rows + 1), np.arange(cols + 1), indexing="ij")
    vertices = np.stack([ii.ravel(), jj.ravel(), np.zeros(ii.size)], axis=1).astype(np.float64)
    idx = np.arange((rows + 1) * (cols + 1)).reshape(rows + 1, cols + 1)
    a, b = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel()
    c, d = idx[1:, 1:].ravel(), idx[:-1, 1:].ravel()
    facets = np.concatenate([np.stack([a, b, c], axis=1), np.stack([a, c, d], axis=1)])
    return TriMesh(vertices, facets)


def random_grid_mesh(n_edges, rng, roughness=0.3):
    """Square height-field grid with about n_edges edges and random vertex heights."""
    if n_edges < 3:
        raise ArgumentError(f"n_edges must be >= 3, got {n_edges}")
    # a x a grid has 3a^2 + 2a edges
    side = max(1, int(np.ceil((-2.0 + np.sqrt(4.0 + 12.0 * n_edges)) / 6.0)))
    mesh = grid_mesh(side, side)
    mesh.vertices[:, :2] += rng.uniform(-0.25, 0.25, size=(mesh.n_vertices, 2))
    mesh.vertices[:, 2] = rng.normal(0.0, roughness, size=mesh.n_vertices)
    return mesh
