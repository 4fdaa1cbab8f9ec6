"""Hairy-surface generators: the soshs cuboid tree and the wild hair chain.

The straight one-sided hairy square is built as a nested intersection of
cuboid layers over the unit square.  The seed layer splits the square into
nine equal cells with the center cuboid at height 3/2 and the ring at 1/2;
a level-n cuboid then splits its base into ``(2n+1)^2`` equal squares whose
cuboids keep the parent height at the center, scale it by ``n/(n+1)`` in
the interior and by ``1/(n+1)`` on the boundary ring.  All geometry is
exact rational; floats appear only at export.

The wild chain stacks cuboids of height ``2^-n`` over the central squares,
threading an overhand-knotted polyline through each; the knot template is
a fixed 32-vertex polyline in the unit cube with endpoints at the bottom
and top face centers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, NamedTuple

from .errors import DomainError

MIN_SOSHS_DEPTH = 2
MAX_SOSHS_DEPTH = 8
MAX_WILD_LEVELS = 20

SEED_CENTER_HEIGHT = Fraction(3, 2)
SEED_RING_HEIGHT = Fraction(1, 2)


def grid_width(level: int) -> int:
    """Number of cells per side at a level: 3 at level 2, times (2n+1) each level."""
    if level < MIN_SOSHS_DEPTH:
        raise DomainError("levels start at 2")
    w = 3
    for n in range(2, level):
        w *= 2 * n + 1
    return w


class CuboidNode(NamedTuple):
    """Cuboid of the soshs layer ``level`` at 1-based grid position (i, j)."""

    level: int
    i: int
    j: int
    height: Fraction

    @property
    def side(self) -> Fraction:
        return Fraction(1, grid_width(self.level))

    @property
    def base(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        """(x0, x1, y0, y1) of the base square."""
        s = self.side
        return ((self.i - 1) * s, self.i * s, (self.j - 1) * s, self.j * s)

    @property
    def center(self) -> tuple[Fraction, Fraction]:
        x0, x1, y0, y1 = self.base
        return ((x0 + x1) / 2, (y0 + y1) / 2)


def seed_nodes() -> list[CuboidNode]:
    """The nine level-2 cuboids: center 3/2, ring 1/2."""
    nodes = []
    for k in (1, 2, 3):
        for l in (1, 2, 3):
            h = SEED_CENTER_HEIGHT if (k, l) == (2, 2) else SEED_RING_HEIGHT
            nodes.append(CuboidNode(2, k, l, h))
    return nodes


def _child_height(n: int, h: Fraction, k: int, l: int) -> Fraction:
    w = 2 * n + 1
    if k == 1 or k == w or l == 1 or l == w:
        return h / (n + 1)
    if k == n + 1 and l == n + 1:
        return h
    return h * n / (n + 1)


def soshs_children(node: CuboidNode) -> list[CuboidNode]:
    """The ``(2n+1)^2`` children of a level-n cuboid, exact heights."""
    n = node.level
    if n < 2:
        raise DomainError("children are defined for levels >= 2")
    w = 2 * n + 1
    out = []
    for k in range(1, w + 1):
        ci = (node.i - 1) * w + k
        for l in range(1, w + 1):
            cj = (node.j - 1) * w + l
            out.append(CuboidNode(n + 1, ci, cj, _child_height(n, node.height, k, l)))
    return out


@dataclass(frozen=True)
class SoshsTree:
    """Lazy cuboid tree down to a fixed depth (leaf level)."""

    depth: int

    def __post_init__(self):
        if not MIN_SOSHS_DEPTH <= self.depth <= MAX_SOSHS_DEPTH:
            raise DomainError(
                f"depth must lie in [{MIN_SOSHS_DEPTH}, {MAX_SOSHS_DEPTH}]; "
                "node counts explode beyond that"
            )

    def seeds(self) -> list[CuboidNode]:
        return seed_nodes()

    def leaves(self) -> Iterator[CuboidNode]:
        """Depth-first iteration over the level-``depth`` cuboids."""
        stack = list(reversed(self.seeds()))
        while stack:
            node = stack.pop()
            if node.level == self.depth:
                yield node
            else:
                stack.extend(reversed(soshs_children(node)))

    def leaf_count(self) -> int:
        count = 9
        for n in range(2, self.depth):
            count *= (2 * n + 1) ** 2
        return count


def soshs_build(depth: int) -> SoshsTree:
    """Validated tree handle for the layers T_2 .. T_depth."""
    return SoshsTree(depth)


def _descend(x: Fraction, lo: Fraction, side: Fraction, w: int) -> int:
    """1-based child slot of x in [lo, lo+side] split w ways; ties go low."""
    local = (x - lo) / side * w
    k = math.ceil(local)
    return min(max(k, 1), w)


def soshs_length(x, y, depth: int) -> Fraction:
    """Height of the depth-level cuboid containing (x, y); exact.

    Boundary points between cells are assigned to the lower-index child.
    The value upper-approximates the hair length at (x, y) and is
    nonincreasing in depth.
    """
    x, y = Fraction(x), Fraction(y)
    if not (0 <= x <= 1 and 0 <= y <= 1):
        raise DomainError("the base point must lie in the unit square")
    if not MIN_SOSHS_DEPTH <= depth <= MAX_SOSHS_DEPTH:
        raise DomainError(f"depth must lie in [{MIN_SOSHS_DEPTH}, {MAX_SOSHS_DEPTH}]")
    k = _descend(x, Fraction(0), Fraction(1), 3)
    l = _descend(y, Fraction(0), Fraction(1), 3)
    node = CuboidNode(2, k, l, SEED_CENTER_HEIGHT if (k, l) == (2, 2) else SEED_RING_HEIGHT)
    while node.level < depth:
        n = node.level
        w = 2 * n + 1
        x0, _, y0, _ = node.base
        k = _descend(x, x0, node.side, w)
        l = _descend(y, y0, node.side, w)
        node = CuboidNode(
            n + 1, (node.i - 1) * w + k, (node.j - 1) * w + l, _child_height(n, node.height, k, l)
        )
    return node.height


def _path_nodes(leaf_path) -> list[CuboidNode]:
    """Nodes selected by a path of 1-based (k, l) child choices."""
    path = [(int(k), int(l)) for k, l in leaf_path]
    if not path:
        raise DomainError("path must select at least the seed cell")
    k, l = path[0]
    if not (1 <= k <= 3 and 1 <= l <= 3):
        raise DomainError("seed choice must lie in the 3x3 grid")
    node = CuboidNode(2, k, l, SEED_CENTER_HEIGHT if (k, l) == (2, 2) else SEED_RING_HEIGHT)
    nodes = [node]
    for k, l in path[1:]:
        n = node.level
        w = 2 * n + 1
        if not (1 <= k <= w and 1 <= l <= w):
            raise DomainError(f"child choice {(k, l)} out of range at level {n}")
        node = CuboidNode(
            n + 1, (node.i - 1) * w + k, (node.j - 1) * w + l, _child_height(n, node.height, k, l)
        )
        nodes.append(node)
    return nodes


def _central_levels(leaf_path) -> list[int]:
    levels = []
    for m, (k, l) in enumerate((int(k), int(l)) for k, l in leaf_path):
        central = (2, 2) if m == 0 else (m + 2, m + 2)
        if (k, l) == central:
            levels.append(m + 2)
    return levels


class ApproachStep(NamedTuple):
    x_k: Fraction
    ratio: Fraction


def approach_sequence(leaf_path, k: int) -> ApproachStep:
    """Base abscissa and exact length ratio of the k-th approach hair.

    The k-th level at which the path picks the central square admits a
    left-translated copy of the tail of the path; the copy's hair sits at
    ``x - side(level)`` and its length is exactly ``level/(level+1)`` times
    the original.
    """
    if k < 1:
        raise DomainError("k is 1-based")
    nodes = _path_nodes(leaf_path)
    centrals = _central_levels(leaf_path)
    if len(centrals) < k:
        raise DomainError("path does not pass through central squares often enough")
    level = centrals[k - 1]
    x_base = nodes[-1].center[0]
    x_k = x_base - Fraction(1, grid_width(level))
    return ApproachStep(x_k, Fraction(level, level + 1))


def path_base_x(leaf_path) -> Fraction:
    """Abscissa of the hair base the path converges to (all-central tail)."""
    return _path_nodes(leaf_path)[-1].center[0]


# ---------------------------------------------------------------------------
# wild hair chain

# Open overhand-knot polyline in the unit cube: a trefoil arc cut open near
# its lowest crossing-free point, with the loose ends routed below/above the
# tangle onto the vertical center axis.  Endpoints are exactly the bottom
# and top face centers; interior vertices keep a 3% margin to every face,
# and nonadjacent segments stay at least 0.14 apart.
WILD_ARC_TEMPLATE: tuple[tuple[Fraction, Fraction, Fraction], ...] = (
    (Fraction(1, 2), Fraction(1, 2), Fraction(0, 1)),
    (Fraction(2571, 4096), Fraction(1, 2), Fraction(77, 2048)),
    (Fraction(2571, 4096), Fraction(1, 2), Fraction(1603, 4096)),
    (Fraction(3261, 4096), Fraction(1147, 2048), Fraction(1129, 4096)),
    (Fraction(3753, 4096), Fraction(2695, 4096), Fraction(523, 2048)),
    (Fraction(3973, 4096), Fraction(3163, 4096), Fraction(1391, 4096)),
    (Fraction(3895, 4096), Fraction(1797, 2048), Fraction(2015, 4096)),
    (Fraction(887, 1024), Fraction(1945, 2048), Fraction(2653, 4096)),
    (Fraction(47, 64), Fraction(3973, 4096), Fraction(1517, 2048)),
    (Fraction(149, 256), Fraction(119, 128), Fraction(2995, 4096)),
    (Fraction(1797, 4096), Fraction(1703, 2048), Fraction(319, 512)),
    (Fraction(1353, 4096), Fraction(353, 512), Fraction(1895, 4096)),
    (Fraction(565, 2048), Fraction(2157, 4096), Fraction(1303, 4096)),
    (Fraction(1155, 4096), Fraction(1517, 4096), Fraction(257, 1024)),
    (Fraction(1407, 4096), Fraction(127, 512), Fraction(297, 1024)),
    (Fraction(1815, 4096), Fraction(741, 4096), Fraction(857, 2048)),
    (Fraction(2281, 4096), Fraction(741, 4096), Fraction(1191, 2048)),
    (Fraction(2689, 4096), Fraction(127, 512), Fraction(727, 1024)),
    (Fraction(2941, 4096), Fraction(1517, 4096), Fraction(767, 1024)),
    (Fraction(1483, 2048), Fraction(2157, 4096), Fraction(2793, 4096)),
    (Fraction(2743, 4096), Fraction(353, 512), Fraction(2201, 4096)),
    (Fraction(2299, 4096), Fraction(1703, 2048), Fraction(193, 512)),
    (Fraction(107, 256), Fraction(119, 128), Fraction(1101, 4096)),
    (Fraction(17, 64), Fraction(3973, 4096), Fraction(531, 2048)),
    (Fraction(137, 1024), Fraction(1945, 2048), Fraction(1443, 4096)),
    (Fraction(201, 4096), Fraction(1797, 2048), Fraction(2081, 4096)),
    (Fraction(123, 4096), Fraction(3163, 4096), Fraction(2705, 4096)),
    (Fraction(343, 4096), Fraction(2695, 4096), Fraction(1525, 2048)),
    (Fraction(835, 4096), Fraction(1147, 2048), Fraction(2967, 4096)),
    (Fraction(1525, 4096), Fraction(1, 2), Fraction(2493, 4096)),
    (Fraction(1525, 4096), Fraction(1, 2), Fraction(1971, 2048)),
    (Fraction(1, 2), Fraction(1, 2), Fraction(1, 1)),
)


class Cuboid(NamedTuple):
    x0: Fraction
    x1: Fraction
    y0: Fraction
    y1: Fraction
    z0: Fraction
    z1: Fraction


class WildLevel(NamedTuple):
    cuboid: Cuboid
    arc: tuple[tuple[Fraction, Fraction, Fraction], ...]


def wild_hair_chain(levels: int) -> list[WildLevel]:
    """Stacked knotted-hair cuboids.

    Level n sits over the level-n central square of the soshs grid, at
    cumulative height ``1 - 2^(1-n)`` with height ``2^-n`` (tops converge
    to 1).  Each arc is the knot template scaled into its cuboid, so
    consecutive arcs chain endpoint-to-endpoint along the center axis.
    """
    if not 1 <= levels <= MAX_WILD_LEVELS:
        raise DomainError(f"levels must lie in [1, {MAX_WILD_LEVELS}]")
    half = Fraction(1, 2)
    out = []
    for n in range(1, levels + 1):
        side = Fraction(1) if n == 1 else Fraction(1, grid_width(n))
        z0 = 1 - Fraction(1, 2 ** (n - 1))
        h = Fraction(1, 2**n)
        cub = Cuboid(half - side / 2, half + side / 2, half - side / 2, half + side / 2, z0, z0 + h)
        arc = tuple(
            (half + (tx - half) * side, half + (ty - half) * side, z0 + tz * h)
            for tx, ty, tz in WILD_ARC_TEMPLATE
        )
        for a, b in zip(arc, arc[1:]):
            if a == b:
                raise AssertionError("degenerate arc segment after scaling")
        out.append(WildLevel(cub, arc))
    return out


# ---------------------------------------------------------------------------
# mesh export

@dataclass
class Mesh:
    """Triangle mesh with optional polylines; indices are 0-based."""

    vertices: list[tuple[float, float, float]] = field(default_factory=list)
    faces: list[tuple[int, int, int]] = field(default_factory=list)
    lines: list[tuple[int, ...]] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)

    def validate(self) -> None:
        nv = len(self.vertices)
        for f in self.faces:
            if len(set(f)) != 3:
                raise DomainError(f"degenerate face {f}")
            if not all(0 <= i < nv for i in f):
                raise DomainError(f"face index out of range in {f}")
        for ln in self.lines:
            if not all(0 <= i < nv for i in ln):
                raise DomainError("line index out of range")

    def add_box(self, x0, x1, y0, y1, z0, z1, label: str = "box") -> None:
        base = len(self.vertices)
        coords = [
            (x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0),
            (x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1),
        ]
        self.vertices.extend((float(x), float(y), float(z)) for x, y, z in coords)
        self.labels.extend([label] * 8)
        quads = [
            (0, 2, 1), (0, 3, 2),  # bottom
            (4, 5, 6), (4, 6, 7),  # top
            (0, 1, 5), (0, 5, 4),  # y = y0
            (2, 3, 7), (2, 7, 6),  # y = y1
            (0, 4, 7), (0, 7, 3),  # x = x0
            (1, 2, 6), (1, 6, 5),  # x = x1
        ]
        self.faces.extend(tuple(base + i for i in tri) for tri in quads)

    def add_polyline(self, points, label: str = "arc") -> None:
        base = len(self.vertices)
        pts = [(float(x), float(y), float(z)) for x, y, z in points]
        self.vertices.extend(pts)
        self.labels.extend([label] * len(pts))
        self.lines.append(tuple(base + i for i in range(len(pts))))


def mesh_from_soshs(tree: SoshsTree) -> Mesh:
    mesh = Mesh()
    for node in tree.leaves():
        x0, x1, y0, y1 = node.base
        mesh.add_box(x0, x1, y0, y1, 0, node.height, label=f"soshs_{node.level}_{node.i}_{node.j}")
    mesh.validate()
    return mesh


def mesh_from_chain(chain: list[WildLevel]) -> Mesh:
    mesh = Mesh()
    for idx, level in enumerate(chain, start=1):
        c = level.cuboid
        mesh.add_box(c.x0, c.x1, c.y0, c.y1, c.z0, c.z1, label=f"cuboid_{idx}")
        mesh.add_polyline(level.arc, label=f"arc_{idx}")
    mesh.validate()
    return mesh


def _as_mesh(source) -> Mesh:
    if isinstance(source, Mesh):
        return source
    if isinstance(source, SoshsTree):
        return mesh_from_soshs(source)
    if isinstance(source, list) and source and isinstance(source[0], WildLevel):
        return mesh_from_chain(source)
    raise DomainError("mesh_export accepts a SoshsTree, a wild chain or a Mesh")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _export_obj(mesh: Mesh) -> bytes:
    out = []
    for v in mesh.vertices:
        out.append(f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}")
    for f in mesh.faces:
        out.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
    for ln in mesh.lines:
        out.append("l " + " ".join(str(i + 1) for i in ln))
    return ("\n".join(out) + "\n").encode("ascii")


def _export_ply(mesh: Mesh) -> bytes:
    edges = [(ln[i], ln[i + 1]) for ln in mesh.lines for i in range(len(ln) - 1)]
    head = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(mesh.vertices)}",
        "property float x",
        "property float y",
        "property float z",
        f"element face {len(mesh.faces)}",
        "property list uchar int vertex_indices",
    ]
    if edges:
        head += [f"element edge {len(edges)}", "property int vertex1", "property int vertex2"]
    head.append("end_header")
    body = [f"{_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}" for v in mesh.vertices]
    body += [f"3 {f[0]} {f[1]} {f[2]}" for f in mesh.faces]
    body += [f"{a} {b}" for a, b in edges]
    return ("\n".join(head + body) + "\n").encode("ascii")


def _export_csv(mesh: Mesh) -> bytes:
    rows = ["element,x1,x2,x3"]
    for label, v in zip(mesh.labels, mesh.vertices):
        rows.append(f"{label},{_fmt(v[0])},{_fmt(v[1])},{_fmt(v[2])}")
    return ("\n".join(rows) + "\n").encode("ascii")


def _export_json(mesh: Mesh) -> bytes:
    doc = {
        "vertices": [list(v) for v in mesh.vertices],
        "faces": [list(f) for f in mesh.faces],
        "lines": [list(ln) for ln in mesh.lines],
    }
    return (json.dumps(doc, sort_keys=True) + "\n").encode("ascii")


_EXPORTERS = {"obj": _export_obj, "ply": _export_ply, "csv": _export_csv, "json": _export_json}


def mesh_export(source, fmt: str) -> bytes:
    """Serialize a soshs tree, wild chain or mesh; deterministic bytes."""
    if fmt not in _EXPORTERS:
        raise DomainError(f"unknown format {fmt!r}; choose from {sorted(_EXPORTERS)}")
    return _EXPORTERS[fmt](_as_mesh(source))
