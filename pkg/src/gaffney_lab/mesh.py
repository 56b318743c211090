"""
Conforming triangulations of polygonal benchmark domains.

A :class:`Mesh` carries counterclockwise triangles and an ordered list of
boundary edges.  Each boundary edge is traversed with the domain on its left,
so its unit tangent ``tau`` and outward normal ``nu`` satisfy
``tau = (-nu[1], nu[0])``.  Boundary edges are grouped into segments tagged
``1..N``; boundary conditions attach to these tags.

Example
-------

>>> m = generate_structured_square(2)
>>> len(m.vertices), len(m.triangles), len(m.boundary_edges)
(9, 8, 8)
>>> validate(refine(m))
[]
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidParameter

__all__ = [
    "Edge",
    "Mesh",
    "Finding",
    "generate_structured_square",
    "generate_lshape",
    "generate_regular_polygon",
    "generate_domain",
    "refine",
    "validate",
    "boundary_angles",
]


@dataclass(frozen=True)
class Edge:
    """Oriented boundary edge; ``endpoints`` follow the counterclockwise traversal."""

    endpoints: tuple[int, int]
    segment_tag: int
    normal: tuple[float, float]
    tangent: tuple[float, float]
    length: float

    @classmethod
    def between(cls, vertices, i: int, j: int, tag: int) -> "Edge":
        d = np.asarray(vertices[j], dtype=float) - np.asarray(vertices[i], dtype=float)
        length = float(np.hypot(d[0], d[1]))
        tau = d / length
        return cls((int(i), int(j)), int(tag), (float(tau[1]), float(-tau[0])),
                   (float(tau[0]), float(tau[1])), length)


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: tuple[Edge, ...]
    segment_count: int
    corners: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        t = np.array(self.triangles, dtype=np.int64).reshape(-1, 3)
        v.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "boundary_edges", tuple(self.boundary_edges))

    @classmethod
    def from_boundary(cls, vertices, triangles, boundary, segment_count, corners=None) -> "Mesh":
        """Build a mesh from ``(i, j, tag)`` boundary triples, computing normals and tangents."""
        v = np.asarray(vertices, dtype=float)
        edges = tuple(Edge.between(v, i, j, tag) for i, j, tag in boundary)
        return cls(v, triangles, edges, int(segment_count), corners)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @cached_property
    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def area(self) -> float:
        return float(self.signed_areas.sum())

    @property
    def perimeter(self) -> float:
        return float(sum(e.length for e in self.boundary_edges))

    @cached_property
    def h(self) -> float:
        """Longest edge length."""
        p = self.vertices[self.triangles]
        lengths = np.linalg.norm(p - np.roll(p, -1, axis=1), axis=2)
        return float(lengths.max())

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        return np.unique([e.endpoints for e in self.boundary_edges])

    @cached_property
    def edge_triangle(self) -> dict:
        """Map from undirected edge ``(min, max)`` to the lowest-index triangle containing it."""
        out = {}
        for ti, (a, b, c) in enumerate(self.triangles.tolist()):
            for i, j in ((a, b), (b, c), (c, a)):
                out.setdefault((min(i, j), max(i, j)), ti)
        return out

    def boundary_triangle(self, edge: Edge) -> int:
        i, j = edge.endpoints
        return self.edge_triangle[(min(i, j), max(i, j))]

    def to_dict(self) -> dict:
        return {
            "vertices": self.vertices.tolist(),
            "triangles": self.triangles.tolist(),
            "boundary_edges": [{"v": list(e.endpoints), "tag": e.segment_tag}
                               for e in self.boundary_edges],
            "segment_count": self.segment_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Mesh":
        boundary = [(e["v"][0], e["v"][1], e["tag"]) for e in data["boundary_edges"]]
        return cls.from_boundary(data["vertices"], data["triangles"], boundary,
                                 data["segment_count"])

    @classmethod
    def from_json(cls, text: str) -> "Mesh":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Finding:
    kind: str
    index: int
    detail: str


def _subdivide(points, triangles, k):
    """Split every triangle into k**2 congruent pieces, sharing edge points."""
    points = [np.asarray(p, dtype=float) for p in points]
    verts = list(points)
    edge_points = {}

    def on_edge(a, b, i):
        # point at fraction i/k from a towards b
        if i == 0:
            return a
        if i == k:
            return b
        if a > b:
            a, b, i = b, a, k - i
        key = (a, b, i)
        if key not in edge_points:
            edge_points[key] = len(verts)
            verts.append(points[a] + (i / k) * (points[b] - points[a]))
        return edge_points[key]

    tris = []
    for a, b, c in triangles:
        idx = {}
        for i in range(k + 1):
            for j in range(k + 1 - i):
                if j == 0:
                    idx[i, j] = on_edge(a, b, i)
                elif i == 0:
                    idx[i, j] = on_edge(a, c, j)
                elif i + j == k:
                    idx[i, j] = on_edge(b, c, j)
                else:
                    idx[i, j] = len(verts)
                    verts.append(points[a] + (i / k) * (points[b] - points[a])
                                 + (j / k) * (points[c] - points[a]))
        for i in range(k):
            for j in range(k - i):
                tris.append((idx[i, j], idx[i + 1, j], idx[i, j + 1]))
                if i + j <= k - 2:
                    tris.append((idx[i + 1, j], idx[i + 1, j + 1], idx[i, j + 1]))
    return np.array(verts), np.array(tris, dtype=np.int64)


def _extract_boundary(vertices, triangles, corners):
    """Boundary edges in loop order starting at ``corners[0]``, tagged by polygon side."""
    count = {}
    oriented = {}
    for a, b, c in triangles.tolist():
        for i, j in ((a, b), (b, c), (c, a)):
            key = (min(i, j), max(i, j))
            count[key] = count.get(key, 0) + 1
            oriented[key] = (i, j)
    nxt = {}
    for key, n in count.items():
        if n == 1:
            i, j = oriented[key]
            nxt[i] = j

    corners = np.asarray(corners, dtype=float)
    start = int(np.argmin(np.linalg.norm(vertices - corners[0], axis=1)))
    sides = len(corners)

    def side_of(p):
        for s in range(sides):
            a, b = corners[s], corners[(s + 1) % sides]
            d = b - a
            t = np.dot(p - a, d) / np.dot(d, d)
            if -1e-12 <= t <= 1 + 1e-12 and np.linalg.norm(a + t * d - p) < 1e-9:
                return s + 1
        raise ValueError(f"boundary point {p} lies on no polygon side")

    boundary = []
    i = start
    while True:
        j = nxt[i]
        boundary.append((i, j, side_of(0.5 * (vertices[i] + vertices[j]))))
        i = j
        if i == start:
            break
    return boundary


def _polygon_mesh(points, triangles, corners, k):
    if k < 1:
        raise InvalidParameter(f"subdivision count must be >= 1, got {k}")
    v, t = _subdivide(points, triangles, k)
    boundary = _extract_boundary(v, t, corners)
    return Mesh.from_boundary(v, t, boundary, len(corners), corners=np.asarray(corners, float))


def generate_structured_square(k: int) -> Mesh:
    """Unit square with ``2 k**2`` triangles; tags 1..4 are bottom, right, top, left."""
    corners = [(0, 0), (1, 0), (1, 1), (0, 1)]
    return _polygon_mesh(corners, [(0, 1, 2), (0, 2, 3)], corners, k)


def generate_lshape(k: int) -> Mesh:
    """``[0,1]^2`` minus ``[1/2,1]^2``, grid spacing ``1/(2k)``, reentrant corner at (1/2, 1/2).

    Segments run counterclockwise from the origin:
    1 bottom, 2 lower right, 3 inner horizontal, 4 inner vertical, 5 upper top, 6 left.
    """
    pts = [(0, 0), (0.5, 0), (1, 0), (0, 0.5), (0.5, 0.5), (1, 0.5), (0, 1), (0.5, 1)]
    squares = [(0, 1, 4, 3), (1, 2, 5, 4), (3, 4, 7, 6)]
    tris = []
    for ll, lr, ur, ul in squares:
        tris += [(ll, lr, ur), (ll, ur, ul)]
    corners = [(0, 0), (1, 0), (1, 0.5), (0.5, 0.5), (0.5, 1), (0, 1)]
    return _polygon_mesh(pts, tris, corners, k)


def generate_regular_polygon(sides: int, k: int) -> Mesh:
    """Regular polygon inscribed in the unit circle, fan-triangulated from the centre.

    Each fan triangle is split into ``k**2`` pieces; side ``s`` (from corner
    ``s-1`` to corner ``s``, corner 0 at angle 0) carries tag ``s``.
    """
    if sides < 3:
        raise InvalidParameter(f"a polygon needs at least 3 sides, got {sides}")
    theta = 2 * np.pi * np.arange(sides) / sides
    corners = np.column_stack([np.cos(theta), np.sin(theta)])
    pts = np.vstack([[0.0, 0.0], corners])
    tris = [(0, 1 + s, 1 + (s + 1) % sides) for s in range(sides)]
    return _polygon_mesh(pts, tris, corners, k)


def generate_domain(name: str, k: int) -> Mesh:
    """Look up a benchmark domain by name: square, lshape, hexagon, polygon:<sides>."""
    if name == "square":
        return generate_structured_square(k)
    if name in ("lshape", "l-shape", "L"):
        return generate_lshape(k)
    if name == "hexagon":
        return generate_regular_polygon(6, k)
    if name.startswith("polygon:"):
        return generate_regular_polygon(int(name.split(":", 1)[1]), k)
    raise InvalidParameter(f"unknown domain {name!r}")


def refine(m: Mesh) -> Mesh:
    """Uniform red refinement: every triangle splits into four, boundary edges bisect."""
    verts = [tuple(p) for p in m.vertices]
    mid = {}

    def midpoint(i, j):
        key = (min(i, j), max(i, j))
        if key not in mid:
            mid[key] = len(verts)
            verts.append(tuple(0.5 * (m.vertices[i] + m.vertices[j])))
        return mid[key]

    tris = []
    for a, b, c in m.triangles.tolist():
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        tris += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
    boundary = []
    for e in m.boundary_edges:
        i, j = e.endpoints
        c = midpoint(i, j)
        boundary += [(i, c, e.segment_tag), (c, j, e.segment_tag)]
    return Mesh.from_boundary(np.array(verts), tris, boundary, m.segment_count, m.corners)


def validate(m: Mesh, tol: float = 1e-14) -> list[Finding]:
    """Check the mesh invariants; an empty list means the mesh is valid."""
    report = []
    for ti, a in enumerate(m.signed_areas):
        if not a > 0:
            report.append(Finding("negative-area", ti, f"signed area {a:.3e}"))

    starts, ends = {}, {}
    for ei, e in enumerate(m.boundary_edges):
        i, j = e.endpoints
        starts[i] = starts.get(i, 0) + 1
        ends[j] = ends.get(j, 0) + 1
    for v in sorted(set(starts) | set(ends)):
        if starts.get(v, 0) != 1 or ends.get(v, 0) != 1:
            report.append(Finding("open-boundary", v,
                                  f"vertex has {starts.get(v, 0)} outgoing and "
                                  f"{ends.get(v, 0)} incoming boundary edges"))

    for ei, e in enumerate(m.boundary_edges):
        nu = np.array(e.normal)
        tau = np.array(e.tangent)
        if abs(np.linalg.norm(nu) - 1) > tol:
            report.append(Finding("normal-length", ei, f"|nu| = {np.linalg.norm(nu)!r}"))
        if abs(nu @ tau) > tol:
            report.append(Finding("normal-tangent", ei, f"<nu;tau> = {nu @ tau:.3e}"))
        if abs(tau[0] + nu[1]) > tol or abs(tau[1] - nu[0]) > tol:
            report.append(Finding("tangent-convention", ei, "tau != (-nu2, nu1)"))
        i, j = e.endpoints
        key = (min(i, j), max(i, j))
        if key not in m.edge_triangle:
            report.append(Finding("dangling-edge", ei, "boundary edge belongs to no triangle"))
            continue
        tri = m.triangles[m.edge_triangle[key]]
        opposite = [v for v in tri if v not in (i, j)][0]
        centre = 0.5 * (m.vertices[i] + m.vertices[j])
        if nu @ (centre - m.vertices[opposite]) <= 0:
            report.append(Finding("normal-orientation", ei, "normal points into the domain"))
    return report


def boundary_angles(m: Mesh) -> dict[int, float]:
    """Interior angle of the domain at every boundary vertex (pi on straight runs)."""
    incoming = {e.endpoints[1]: e for e in m.boundary_edges}
    out = {}
    for e in m.boundary_edges:
        v = e.endpoints[0]
        t_in = np.array(incoming[v].tangent)
        t_out = np.array(e.tangent)
        turn = np.arctan2(t_in[0] * t_out[1] - t_in[1] * t_out[0], t_in @ t_out)
        out[v] = float(np.pi - turn)
    return out
