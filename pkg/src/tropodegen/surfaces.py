"""Boundary behaviour of spun-normal surfaces: the functionals nu_N, boundary
slopes, non-triviality certificates, integral representatives and the local
dual-spine data used to glue tetrahedra together.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .equations import GluingSystem
from .errors import AdmissibilityError, DimensionError, MatchingError, MissingBasisError
from .triangulation import VERTICES, IdealTriangulation, PeripheralCurve, edge_label
from .tropical import QuadCoordinate, integral_representative

CERTIFIED_NONTRIVIAL = "CERTIFIED_NONTRIVIAL"
UNDETERMINED = "UNDETERMINED"
PRODUCT_NOTE = "foliation near cusp is T^2x(0,1)"


def _quads(N) -> QuadCoordinate:
    return N if isinstance(N, QuadCoordinate) else QuadCoordinate(N)


def check_matching(S: GluingSystem, N) -> QuadCoordinate:
    N = _quads(N)
    if len(N) != S.dim:
        raise DimensionError(f"expected {S.dim} quad coordinates, got {len(N)}")
    if not N.satisfies_matching(S):
        raise MatchingError("B N != 0, so nu_N is not a homotopy invariant")
    return N


def nu_evaluate(N, gamma: PeripheralCurve, S: GluingSystem) -> Fraction:
    """nu_N(gamma), the dot product of the curve's nu-vector with N."""
    N = check_matching(S, N)
    if len(gamma.nu_vector) != len(N):
        raise DimensionError("curve and quad vector live on different triangulations")
    return sum((Fraction(a) * x for a, x in zip(gamma.nu_vector, N)), Fraction(0))


def peripheral_basis(T: IdealTriangulation) -> dict[int, tuple[PeripheralCurve, PeripheralCurve]]:
    """One (meridian, longitude) pair per cusp from the curves attached to T.

    Curves named ``meridian``/``longitude`` (optionally with a cusp suffix)
    are preferred; otherwise the first two curves on the cusp are used.
    """
    basis = {}
    for cusp in range(T.cusp_count):
        curves = T.curves_for_cusp(cusp)
        mer = [c for c in curves if c.name.lower().startswith("meridian")]
        lon = [c for c in curves if c.name.lower().startswith("longitude")]
        if mer and lon:
            basis[cusp] = (mer[0], lon[0])
        elif len(curves) >= 2:
            basis[cusp] = (curves[0], curves[1])
        else:
            raise MissingBasisError(f"cusp {cusp} has no meridian/longitude pair")
    return basis


@dataclass(frozen=True)
class CuspSlope:
    cusp: int
    nu_meridian: Fraction
    nu_longitude: Fraction

    @property
    def slope(self) -> Fraction | None:
        if self.nu_meridian == 0:
            return None
        return -self.nu_longitude / self.nu_meridian

    @property
    def note(self) -> str:
        if self.nu_meridian == 0 and self.nu_longitude == 0:
            return PRODUCT_NOTE
        return ""


@dataclass(frozen=True)
class SlopeReport:
    cusps: tuple[CuspSlope, ...]
    boundary_vector: tuple[int, ...]

    def slope(self, cusp: int = 0) -> Fraction | None:
        return self.cusps[cusp].slope

    def to_json(self) -> dict:
        return {
            "cusps": [
                {
                    "cusp": c.cusp,
                    "nu_meridian": str(c.nu_meridian),
                    "nu_longitude": str(c.nu_longitude),
                    "slope": None if c.slope is None else str(c.slope),
                    **({"note": c.note} if c.note else {}),
                }
                for c in self.cusps
            ],
            "boundary_vector": list(self.boundary_vector),
        }


def boundary_slopes(
    N,
    curves: Mapping[int, Sequence[PeripheralCurve]] | Sequence[Sequence[PeripheralCurve]],
    S: GluingSystem,
    cusp_count: int | None = None,
) -> SlopeReport:
    """Slopes -nu(L)/nu(M) per cusp and the projective boundary vector.

    ``curves`` maps each cusp to its (meridian, longitude) pair; a list of
    pairs is read in cusp order.
    """
    N = check_matching(S, N)
    if not isinstance(curves, Mapping):
        curves = dict(enumerate(curves))
    cusps = range(cusp_count) if cusp_count is not None else sorted(curves)
    rows = []
    vec = []
    for cusp in cusps:
        pair = curves.get(cusp)
        if pair is None or len(pair) < 2:
            raise MissingBasisError(f"no meridian/longitude pair for cusp {cusp}")
        m = nu_evaluate(N, pair[0], S)
        l = nu_evaluate(N, pair[1], S)
        rows.append(CuspSlope(cusp, m, l))
        vec += [-l, m]
    return SlopeReport(tuple(rows), integral_representative(vec)[0])


@dataclass(frozen=True)
class Certificate:
    verdict: str
    witness: str | None = None
    values: dict = field(default_factory=dict)


def nontriviality_certificate(N, curves: Sequence[PeripheralCurve], S: GluingSystem) -> Certificate:
    """A nonzero nu_N on some peripheral curve certifies a non-trivial action.

    When every supplied value vanishes nothing is concluded.
    """
    N = check_matching(S, N)
    values = {c.name: nu_evaluate(N, c, S) for c in curves}
    for c in curves:
        if values[c.name] != 0:
            return Certificate(CERTIFIED_NONTRIVIAL, c.name, values)
    return Certificate(UNDETERMINED, None, values)


@dataclass(frozen=True)
class IntegralSurface:
    scale: Fraction
    vector: tuple[int, ...]
    doubled: tuple[int, ...]
    warnings: tuple[str, ...] = ()
    note: str = "two-sidedness decides between vector and doubled; not computed"


def integral_surface(N) -> IntegralSurface:
    """Minimal positive scaling r1 with r1*N integral of content one."""
    vec, scale = integral_representative(_quads(N).values)
    warnings = ("empty surface",) if not any(vec) else ()
    return IntegralSurface(scale, vec, tuple(2 * v for v in vec), warnings)


# -- dual spines ------------------------------------------------------------------


def _quad_sides(label: int, orientation: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """The vertex pairs separated by the quad of the given type.

    A quad of type k is disjoint from the two edges labelled k; the pair
    containing vertex 0 comes first.
    """
    for a in VERTICES:
        for b in VERTICES:
            if a < b and edge_label(a, b, orientation) == label:
                rest = tuple(v for v in VERTICES if v not in (a, b))
                pair = (a, b)
                return (pair, rest) if 0 in pair else (rest, pair)
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class TetSpine:
    tet: int
    length: Fraction
    quad_type: int | None
    # ideal vertices on the half-lines at 0 and at length
    ends: tuple[tuple[int, int], tuple[int, int]] | None

    def lone_vertex(self, face: int) -> int | None:
        """Vertex of the face cut off by the quad (None without a quad)."""
        if self.ends is None:
            return None
        for pair in self.ends:
            if face in pair:
                return pair[0] if pair[1] == face else pair[1]
        raise AssertionError("unreachable")


@dataclass(frozen=True)
class FaceGluing:
    tet: int
    face: int
    other_tet: int
    other_face: int
    case: str
    p: Fraction
    q: Fraction
    r: Fraction
    s: Fraction


@dataclass(frozen=True)
class SpineDescriptor:
    tets: tuple[TetSpine, ...]
    faces: tuple[FaceGluing, ...]

    @property
    def lengths(self) -> tuple[Fraction, ...]:
        return tuple(t.length for t in self.tets)


def spine_face_parameters(p, q) -> tuple[Fraction, Fraction]:
    """(r, s) for two spine intervals of lengths p and q meeting in a face."""
    p, q = Fraction(p), Fraction(q)
    return max(p, q) - min(p, q), min(p, q)


def spine_descriptor(N, T: IdealTriangulation) -> SpineDescriptor:
    """Per-tetrahedron spine intervals and per-face gluing cases.

    Case 1: the two quads cut off the same vertex of the shared face (or one
    side has no quad); case 2: they cut off different vertices; ``cone`` when
    neither tetrahedron carries a quad.
    """
    N = _quads(N)
    if len(N) != 3 * T.tet_count:
        raise DimensionError(f"expected {3 * T.tet_count} quad coordinates, got {len(N)}")
    if not N.is_admissible():
        raise AdmissibilityError(f"{N} is not admissible")
    tets = []
    for t in range(T.tet_count):
        triple = N.values[3 * t:3 * t + 3]
        k = max(triple)
        if k == 0:
            tets.append(TetSpine(t, Fraction(0), None, None))
        else:
            label = triple.index(k)
            tets.append(TetSpine(t, k, label, _quad_sides(label, T.orientation[t])))
    faces = []
    for i in range(T.tet_count):
        for f in VERTICES:
            g = T.gluings[i][f]
            j, h = g.tet, g.perm[f]
            if (j, h) < (i, f):
                continue
            a, b = tets[i], tets[j]
            p, q = a.length, b.length
            if p == 0 and q == 0:
                case = "cone"
            elif p == 0 or q == 0:
                case = "1"
            else:
                case = "1" if g.perm[a.lone_vertex(f)] == b.lone_vertex(h) else "2"
            r, s = spine_face_parameters(p, q)
            faces.append(FaceGluing(i, f, j, h, case, p, q, r, s))
    return SpineDescriptor(tuple(tets), tuple(faces))
