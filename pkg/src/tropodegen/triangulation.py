"""Ideal triangulations: face pairings, edge classes, cusp triangulations and
peripheral curves.

Vertices of every tetrahedron are numbered 0..3 and face ``f`` is the face
opposite vertex ``f``.  A gluing of face ``f`` of tetrahedron ``i`` is a pair
``(j, perm)`` where ``perm`` maps the vertices of ``i`` to those of ``j``;
face ``f`` is glued to face ``perm[f]`` of ``j``.

Edge labels: shape ``z`` sits on edges {01} and {23}, ``z'`` on {02} and
{13}, ``z''`` on {03} and {12} of a positively oriented tetrahedron.  For a
tetrahedron that is negatively oriented relative to its vertex numbering the
roles of ``z'`` and ``z''`` are swapped, so labels always follow the coherent
orientation of the manifold.
"""
from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Mapping, Sequence

from .errors import GluingError, OrientabilityError, PathError, SchemaError, TopologyError

VERTICES = (0, 1, 2, 3)
LABEL_NAMES = ("z", "z'", "z''")
EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
_BASE_LABEL = {(0, 1): 0, (2, 3): 0, (0, 2): 1, (1, 3): 1, (0, 3): 2, (1, 2): 2}
_PERMS = frozenset(permutations(VERTICES))


def perm_sign(perm: Sequence[int]) -> int:
    inversions = sum(
        1 for a in range(len(perm)) for b in range(a + 1, len(perm)) if perm[a] > perm[b]
    )
    return -1 if inversions % 2 else 1


def perm_inverse(perm: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for a, b in enumerate(perm):
        inv[b] = a
    return tuple(inv)


def edge_label(a: int, b: int, orientation: int = 1) -> int:
    """Shape label index (0 for z, 1 for z', 2 for z'') of edge {a, b}."""
    k = _BASE_LABEL[(min(a, b), max(a, b))]
    if orientation < 0 and k:
        k = 3 - k
    return k


def _ccw(orientation: int, v: int, a: int, b: int, c: int) -> bool:
    # corners a, b, c of the cusp triangle at v, counterclockwise seen from the cusp
    return orientation * perm_sign((v, a, b, c)) > 0


class _UnionFind:
    def __init__(self, items: Iterable):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)

    def classes(self) -> list[list]:
        groups: dict = {}
        for x in self.parent:
            groups.setdefault(self.find(x), []).append(x)
        return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


@dataclass(frozen=True)
class Gluing:
    tet: int
    perm: tuple[int, int, int, int]


@dataclass(frozen=True)
class EdgeMember:
    tet: int
    label: int
    edge: tuple[int, int]


@dataclass(frozen=True)
class EdgeClass:
    id: int
    members: tuple[EdgeMember, ...]

    @property
    def degree(self) -> int:
        return len(self.members)

    def label_counts(self, tet_count: int) -> list[int]:
        """Row of the gluing exponent matrix: incidences per (tet, label)."""
        row = [0] * (3 * tet_count)
        for m in self.members:
            row[3 * m.tet + m.label] += 1
        return row


@dataclass(frozen=True)
class Corner:
    tet: int
    vertex: int  # ideal vertex of the tetrahedron (the cusp triangle)
    other: int  # far end of the tetrahedron edge through this corner


@dataclass(frozen=True)
class CuspTriangulation:
    id: int
    triangles: tuple[tuple[int, int], ...]
    # (tet, vertex, side) -> (tet, vertex, side) across that side
    adjacency: Mapping[tuple[int, int, int], tuple[int, int, int]]
    # cusp vertices, each the cyclic fan of triangle corners around it
    vertices: tuple[tuple[Corner, ...], ...]
    corner_labels: Mapping[Corner, int]

    @property
    def euler_characteristic(self) -> int:
        faces = len(self.triangles)
        return len(self.vertices) - 3 * faces // 2 + faces

    @property
    def genus(self) -> int:
        return (2 - self.euler_characteristic) // 2


@dataclass(frozen=True)
class Step:
    tet: int
    vertex: int
    enter: int
    exit: int

    @property
    def corner(self) -> int:
        (c,) = set(VERTICES) - {self.vertex, self.enter, self.exit}
        return c


@dataclass(frozen=True)
class PeripheralCurve:
    """A closed normal path on a cusp torus.

    ``mu_vector`` and ``sign`` give the holonomy as the signed monomial
    ``sign * prod(shape ** mu_vector)``; each exponent triple is reduced by the
    relation z z' z'' = -1 so that its median entry is zero.  ``nu_vector``
    holds the coefficients of the functional on quad coordinates.
    """

    cusp: int
    name: str
    steps: tuple[Step, ...]
    mu_vector: tuple[int, ...]
    sign: int
    nu_vector: tuple[int, ...]
    raw_mu_vector: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.steps)

    def to_json(self) -> dict:
        return {
            "cusp": self.cusp,
            "name": self.name,
            "path": [
                {"tri": [s.tet, s.vertex], "in": s.enter, "out": s.exit} for s in self.steps
            ],
        }


class IdealTriangulation:
    """Validated ideal triangulation with derived combinatorics.

    Instances are treated as immutable once constructed.
    """

    def __init__(
        self,
        gluings: Sequence[Sequence],
        curves: Sequence[Mapping] = (),
        name: str = "",
        shape_names: Sequence[str] | None = None,
        quad_names: Sequence[str] | None = None,
    ):
        self.name = name
        self.tet_count = len(gluings)
        if self.tet_count == 0:
            raise SchemaError("triangulation needs at least one tetrahedron")
        self.gluings: tuple[tuple[Gluing, ...], ...] = tuple(
            tuple(_coerce_gluing(g, self.tet_count) for g in faces)
            for faces in _check_face_lists(gluings)
        )
        self._check_pairings()
        self.orientation = self._orient()
        self.edge_classes = self._build_edge_classes()
        self.cusps = self._build_cusps()
        if shape_names is not None and len(shape_names) != self.tet_count:
            raise SchemaError("'shape_names' needs one name per tetrahedron")
        self.shape_names = tuple(shape_names) if shape_names else None
        if quad_names is not None and len(quad_names) != self.tet_count:
            raise SchemaError("'quad_names' needs one name per tetrahedron")
        self.quad_names = tuple(quad_names) if quad_names else None
        self.peripheral_curves = tuple(validate_curve(self, c) for c in curves)

    # -- construction helpers -------------------------------------------------

    def _check_pairings(self) -> None:
        for i, faces in enumerate(self.gluings):
            for f, g in enumerate(faces):
                target_face = g.perm[f]
                if g.tet == i and target_face == f:
                    raise GluingError(f"face ({i},{f}) is glued to itself")
                back = self.gluings[g.tet][target_face]
                if back.tet != i or back.perm != perm_inverse(g.perm):
                    raise GluingError(
                        f"face ({i},{f}) -> ({g.tet},{target_face}) is not matched by "
                        f"an inverse pairing"
                    )

    def _orient(self) -> tuple[int, ...]:
        orientation: list[int | None] = [None] * self.tet_count
        orientation[0] = 1
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for g in self.gluings[i]:
                # orientation-preserving gluings of coherently oriented tets are odd
                want = -orientation[i] * perm_sign(g.perm)
                if orientation[g.tet] is None:
                    orientation[g.tet] = want
                    queue.append(g.tet)
                elif orientation[g.tet] != want:
                    raise OrientabilityError("face pairings admit no coherent orientation")
        if any(o is None for o in orientation):
            raise GluingError("triangulation is not connected")
        return tuple(orientation)

    def _build_edge_classes(self) -> tuple[EdgeClass, ...]:
        uf = _UnionFind((t, a, b) for t in range(self.tet_count) for a in VERTICES for b in VERTICES if a != b)
        for t, faces in enumerate(self.gluings):
            for f, g in enumerate(faces):
                for a in VERTICES:
                    for b in VERTICES:
                        if a != b and f not in (a, b):
                            uf.union((t, a, b), (g.tet, g.perm[a], g.perm[b]))
        seen = set()
        classes = []
        for t in range(self.tet_count):
            for a, b in EDGES:
                if (t, a, b) in seen:
                    continue
                root = uf.find((t, a, b))
                if uf.find((t, b, a)) == root:
                    raise TopologyError(f"edge ({t},{a}{b}) is identified with its own reverse")
                members = []
                for x in uf.parent:
                    if uf.find(x) == root:
                        s, c, d = x
                        seen.add((s, c, d))
                        seen.add((s, d, c))
                        e = (min(c, d), max(c, d))
                        members.append(EdgeMember(s, edge_label(*e, self.orientation[s]), e))
                classes.append(tuple(sorted(members, key=lambda m: (m.tet, m.edge))))
        # canonical order: by exponent row, then by first member
        classes.sort(key=lambda ms: (EdgeClass(0, ms).label_counts(self.tet_count),
                                     (ms[0].tet, ms[0].edge)))
        return tuple(EdgeClass(k, m) for k, m in enumerate(classes))

    def _build_cusps(self) -> tuple[CuspTriangulation, ...]:
        uf = _UnionFind((t, v) for t in range(self.tet_count) for v in VERTICES)
        for t, faces in enumerate(self.gluings):
            for f, g in enumerate(faces):
                for v in VERTICES:
                    if v != f:
                        uf.union((t, v), (g.tet, g.perm[v]))
        return tuple(self._cusp(k, tris) for k, tris in enumerate(uf.classes()))

    def _cusp(self, cusp_id: int, triangles: list) -> CuspTriangulation:
        adjacency = {}
        for t, v in triangles:
            for side in VERTICES:
                if side == v:
                    continue
                g = self.gluings[t][side]
                adjacency[(t, v, side)] = (g.tet, g.perm[v], g.perm[side])
        for key, val in adjacency.items():
            if adjacency.get(val) != key:
                raise TopologyError(f"cusp {cusp_id}: side {key} is not paired consistently")

        # walk the fan of corners around each cusp vertex
        corners = {Corner(t, v, u) for t, v in triangles for u in VERTICES if u != v}
        vertices = []
        while corners:
            start = min(corners, key=lambda c: (c.tet, c.vertex, c.other))
            fan = []
            c = start
            side = min(set(VERTICES) - {c.vertex, c.other})
            while True:
                if c not in corners:
                    raise TopologyError(f"cusp {cusp_id} link is not a closed surface")
                corners.discard(c)
                fan.append(c)
                exit_side = (set(VERTICES) - {c.vertex, c.other, side}).pop()
                t, v, side = adjacency[(c.tet, c.vertex, exit_side)]
                g = self.gluings[c.tet][exit_side]
                c = Corner(t, v, g.perm[c.other])
                if c == start:
                    break
            vertices.append(tuple(fan))
        labels = {
            c: edge_label(c.vertex, c.other, self.orientation[c.tet])
            for fan in vertices
            for c in fan
        }
        return CuspTriangulation(
            cusp_id, tuple(sorted(triangles)), adjacency, tuple(vertices), labels
        )

    # -- accessors ------------------------------------------------------------

    @property
    def cusp_count(self) -> int:
        return len(self.cusps)

    def curve(self, name: str) -> PeripheralCurve:
        for c in self.peripheral_curves:
            if c.name == name:
                return c
        raise KeyError(name)

    def curves_for_cusp(self, cusp: int) -> list[PeripheralCurve]:
        return [c for c in self.peripheral_curves if c.cusp == cusp]

    def cusp_of(self, tet: int, vertex: int) -> int:
        for cusp in self.cusps:
            if (tet, vertex) in cusp.triangles:
                return cusp.id
        raise KeyError((tet, vertex))

    def to_json(self) -> dict:
        doc = {}
        if self.name:
            doc["name"] = self.name
        if self.shape_names:
            doc["shape_names"] = list(self.shape_names)
        if self.quad_names:
            doc["quad_names"] = list(self.quad_names)
        doc |= {
            "tetrahedra": self.tet_count,
            "gluings": [
                [{"tet": g.tet, "perm": list(g.perm)} for g in faces] for faces in self.gluings
            ],
        }
        if self.peripheral_curves:
            doc["peripheral_curves"] = [c.to_json() for c in self.peripheral_curves]
        return doc

    def __repr__(self) -> str:
        return (
            f"IdealTriangulation(tets={self.tet_count}, edges={len(self.edge_classes)}, "
            f"cusps={self.cusp_count})"
        )


def _check_face_lists(gluings) -> list:
    out = []
    for i, faces in enumerate(gluings):
        if not isinstance(faces, (list, tuple)) or len(faces) != 4:
            raise SchemaError(f"tetrahedron {i} must list exactly 4 face gluings")
        out.append(faces)
    return out


def _coerce_gluing(g, n: int) -> Gluing:
    if isinstance(g, Gluing):
        tet, perm = g.tet, g.perm
    elif isinstance(g, Mapping):
        try:
            tet, perm = g["tet"], g["perm"]
        except KeyError as exc:
            raise SchemaError(f"gluing entry missing key {exc}") from None
    else:
        try:
            tet, perm = g
        except (TypeError, ValueError):
            raise SchemaError(f"malformed gluing entry {g!r}") from None
    if not isinstance(tet, int) or isinstance(tet, bool) or not 0 <= tet < n:
        raise SchemaError(f"gluing target {tet!r} is not a tetrahedron index")
    try:
        perm = tuple(int(p) for p in perm)
    except (TypeError, ValueError):
        raise SchemaError(f"malformed permutation {perm!r}") from None
    if perm not in _PERMS:
        raise SchemaError(f"{list(perm)} is not a permutation of 0..3")
    return Gluing(tet, perm)


def parse_triangulation(text: str | bytes | Mapping) -> IdealTriangulation:
    """Parse the JSON triangulation format into a validated triangulation."""
    if isinstance(text, Mapping):
        doc = text
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, Mapping):
        raise SchemaError("top level must be an object")
    n = doc.get("tetrahedra")
    gluings = doc.get("gluings")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise SchemaError("'tetrahedra' must be a positive integer")
    if not isinstance(gluings, list) or len(gluings) != n:
        raise SchemaError(f"'gluings' must be a list of {n} entries")
    curves = doc.get("peripheral_curves", [])
    if not isinstance(curves, list):
        raise SchemaError("'peripheral_curves' must be a list")
    names = {}
    for key in ("shape_names", "quad_names"):
        value = doc.get(key)
        if value is not None and not (
            isinstance(value, list) and all(isinstance(x, str) for x in value)
        ):
            raise SchemaError(f"'{key}' must be a list of strings")
        names[key] = value
    return IdealTriangulation(gluings, curves, str(doc.get("name", "")), **names)


def load_triangulation(path) -> IdealTriangulation:
    with open(path, encoding="utf-8") as fh:
        return parse_triangulation(fh.read())


def edge_classes(T: IdealTriangulation) -> list[EdgeClass]:
    return list(T.edge_classes)


def cusp_triangulation(T: IdealTriangulation, cusp: int) -> CuspTriangulation:
    if not 0 <= cusp < T.cusp_count:
        raise KeyError(f"no cusp {cusp}")
    return T.cusps[cusp]


# -- peripheral curves ------------------------------------------------------------


def _coerce_steps(path) -> list[Step]:
    steps = []
    for k, s in enumerate(path):
        if isinstance(s, Step):
            steps.append(s)
            continue
        try:
            (tet, vertex), enter, exit_ = s["tri"], s["in"], s["out"]
        except (KeyError, TypeError, ValueError):
            raise PathError(f"step {k} must have 'tri': [tet, vertex], 'in' and 'out'") from None
        steps.append(Step(int(tet), int(vertex), int(enter), int(exit_)))
    return steps


def validate_curve(T: IdealTriangulation, data: Mapping | Sequence) -> PeripheralCurve:
    """Check a closed normal path on a cusp and compute its holonomy data.

    ``data`` is either a mapping with keys ``cusp``, ``name``, ``path`` (the
    JSON form) or a bare sequence of steps.
    """
    if isinstance(data, Mapping):
        steps = _coerce_steps(data.get("path", []))
        name = str(data.get("name", ""))
        cusp = data.get("cusp")
    else:
        steps = _coerce_steps(data)
        name, cusp = "", None
    if not steps:
        raise PathError("empty path")
    for k, s in enumerate(steps):
        if not 0 <= s.tet < T.tet_count or s.vertex not in VERTICES:
            raise PathError(f"step {k}: no triangle ({s.tet},{s.vertex})")
        if s.enter not in VERTICES or s.exit not in VERTICES:
            raise PathError(f"step {k}: sides must be faces 0..3")
        if len({s.vertex, s.enter, s.exit}) != 3:
            raise PathError(f"step {k}: entry and exit sides must be distinct sides of the triangle")
    actual_cusp = T.cusp_of(steps[0].tet, steps[0].vertex)
    if cusp is None:
        cusp = actual_cusp
    elif cusp != actual_cusp:
        raise PathError(f"path starts on cusp {actual_cusp}, declared cusp {cusp}")
    for k, s in enumerate(steps):
        g = T.gluings[s.tet][s.exit]
        nxt = steps[(k + 1) % len(steps)]
        if (nxt.tet, nxt.vertex, nxt.enter) != (g.tet, g.perm[s.vertex], g.perm[s.exit]):
            what = "path does not close up" if k == len(steps) - 1 else "steps not adjacent"
            raise PathError(f"{what}: step {k} exits into ({g.tet},{g.perm[s.vertex]}) "
                            f"side {g.perm[s.exit]}")

    n = T.tet_count
    raw = [0] * (3 * n)
    nu = [0] * (3 * n)
    for s in steps:
        o = T.orientation[s.tet]
        c = s.corner
        weight = 1 if _ccw(o, s.vertex, c, s.exit, s.enter) else -1
        raw[3 * s.tet + edge_label(s.vertex, c, o)] += weight
        # Q-modulus of corner c: clockwise (c, u, t) gives q(side ct) - q(side cu),
        # and the quad parallel to a side is the one labelled by the opposite corner
        x, y = s.enter, s.exit
        t_, u = (x, y) if _ccw(o, s.vertex, c, x, y) else (y, x)
        nu[3 * s.tet + edge_label(s.vertex, u, o)] += weight
        nu[3 * s.tet + edge_label(s.vertex, t_, o)] -= weight
    mu, sign = reduce_monomial(raw)
    return PeripheralCurve(cusp, name, tuple(steps), tuple(mu), sign, tuple(nu), tuple(raw))


def reduce_monomial(exponents: Sequence[int]) -> tuple[list[int], int]:
    """Reduce each exponent triple by z z' z'' = -1 so its median is zero.

    Returns the reduced exponents and the sign picked up.
    """
    out = list(exponents)
    sign = 1
    for i in range(0, len(out), 3):
        m = sorted(out[i:i + 3])[1]
        if m:
            out[i:i + 3] = [e - m for e in out[i:i + 3]]
            if m % 2:
                sign = -sign
    return out, sign


def vertex_loop(T: IdealTriangulation, cusp: int, index: int) -> list[Step]:
    """The small loop around one vertex of a cusp triangulation (null-homotopic)."""
    fan = T.cusps[cusp].vertices[index]
    steps = []
    c = fan[0]
    enter = min(set(VERTICES) - {c.vertex, c.other})
    for _ in fan:
        exit_ = (set(VERTICES) - {c.vertex, c.other, enter}).pop()
        steps.append(Step(c.tet, c.vertex, enter, exit_))
        g = T.gluings[c.tet][exit_]
        c = Corner(g.tet, g.perm[c.vertex], g.perm[c.other])
        enter = g.perm[exit_]
    return steps


def random_closed_path(
    T: IdealTriangulation, cusp: int, rng: random.Random, max_steps: int = 400
) -> list[Step]:
    """Random closed normal path on a cusp, found by a random walk."""
    adjacency = T.cusps[cusp].adjacency
    triangles = T.cusps[cusp].triangles
    while True:
        tet, vertex = rng.choice(triangles)
        start_side = rng.choice([s for s in VERTICES if s != vertex])
        state = (tet, vertex, start_side)
        steps = []
        for _ in range(max_steps):
            t, v, enter = state
            exit_ = rng.choice([s for s in VERTICES if s not in (v, enter)])
            steps.append(Step(t, v, enter, exit_))
            state = adjacency[(t, v, exit_)]
            if state == (tet, vertex, start_side):
                return steps


def shortest_closed_paths(T: IdealTriangulation, cusp: int, max_steps: int = 12):
    """All closed normal paths up to ``max_steps`` steps, shortest first.

    Each cyclic path is reported once, starting from its smallest state.
    """
    adjacency = T.cusps[cusp].adjacency
    states = sorted(adjacency.values())
    found = []
    for start in states:
        stack = [(start, [])]
        while stack:
            state, steps = stack.pop()
            t, v, enter = state
            for exit_ in VERTICES:
                if exit_ in (v, enter):
                    continue
                new = steps + [Step(t, v, enter, exit_)]
                nxt = adjacency[(t, v, exit_)]
                if nxt == start:
                    found.append(new)
                elif len(new) < max_steps and nxt > start and all(
                    (s.tet, s.vertex, s.enter) != nxt for s in new
                ):
                    stack.append((nxt, new))
    found.sort(key=lambda p: (len(p), [(s.tet, s.vertex, s.enter, s.exit) for s in p]))
    return found


def find_peripheral_basis(T: IdealTriangulation, cusp: int, max_steps: int = 12):
    """Best-effort search for two closed paths spanning the cusp homology.

    Homology classes are compared through the side-crossing cochain modulo the
    vertex loops, so the returned pair is independent over the rationals; it
    is not promised to be a canonical meridian/longitude pair.
    """
    import sympy

    ct = T.cusps[cusp]
    sides = sorted({tuple(sorted([k, v])) for k, v in ct.adjacency.items()})
    index = {}
    for i, (a, b) in enumerate(sides):
        index[a] = (i, 1)
        index[b] = (i, -1)

    def chain(steps):
        vec = [0] * len(sides)
        for s in steps:
            i, sgn = index[(s.tet, s.vertex, s.exit)]
            vec[i] += sgn
        return vec

    rows = [chain(vertex_loop(T, cusp, k)) for k in range(len(ct.vertices))]
    base_rank = sympy.Matrix(rows).rank()
    chosen = []
    for path in shortest_closed_paths(T, cusp, max_steps):
        trial = rows + [chain(p) for p in chosen] + [chain(path)]
        if sympy.Matrix(trial).rank() == base_rank + len(chosen) + 1:
            chosen.append(path)
            if len(chosen) == 2:
                return chosen
    raise TopologyError(f"no homology basis found on cusp {cusp} within {max_steps} steps")
