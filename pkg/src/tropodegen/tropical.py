"""Tropical prevariety of the deformation variety and its identification with
the projective admissible solution space of spun-normal surface theory.

A point of the prevariety is a vector whose coordinate triples have the form
(0,x,-x), (-x,0,x) or (x,-x,0) with x >= 0 and which is orthogonal to every
row of the gluing exponent matrix.  Applying the transpose of the skew block
matrix to an admissible quad vector lands exactly on such points.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .equations import GluingSystem
from .errors import AdmissibilityError, DimensionError, FormError

Number = int | Fraction | float


def _exact(values: Iterable) -> tuple[Fraction, ...]:
    out = []
    for v in values:
        if isinstance(v, float):
            v = Fraction(v).limit_denominator(10**12)
        out.append(Fraction(v))
    return tuple(out)


def integral_representative(values: Sequence) -> tuple[tuple[int, ...], Fraction]:
    """Smallest positive multiple with integer entries of content one.

    Returns the integer vector and the scale factor used.
    """
    vals = _exact(values)
    if not any(vals):
        return tuple(0 for _ in vals), Fraction(1)
    lcm = reduce(lambda a, b: a * b // math.gcd(a, b), (v.denominator for v in vals), 1)
    ints = [int(v * lcm) for v in vals]
    g = reduce(math.gcd, (abs(i) for i in ints))
    return tuple(i // g for i in ints), Fraction(lcm, g)


@dataclass(frozen=True)
class QuadCoordinate:
    values: tuple[Fraction, ...]

    def __init__(self, values: Iterable[Number]):
        object.__setattr__(self, "values", _exact(values))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def is_admissible(self) -> bool:
        if any(v < 0 for v in self.values) or len(self.values) % 3:
            return False
        return all(
            sum(1 for v in self.values[i:i + 3] if v) <= 1 for i in range(0, len(self.values), 3)
        )

    def satisfies_matching(self, S: GluingSystem) -> bool:
        return all(sum(b * v for b, v in zip(row, self.values)) == 0 for row in S.B)

    def integral(self) -> tuple[int, ...]:
        return integral_representative(self.values)[0]

    def scaled(self, c: Number) -> "QuadCoordinate":
        c = Fraction(c)
        return QuadCoordinate(v * c for v in self.values)

    def __str__(self) -> str:
        return "(" + ",".join(str(v) for v in self.values) + ")"


@dataclass(frozen=True)
class TropicalPoint:
    """A nonzero point of the prevariety, kept as an exact projective representative."""

    values: tuple[Fraction, ...]

    def __init__(self, values: Iterable[Number]):
        vals = _exact(values)
        if not any(vals):
            raise FormError("the zero vector is not a projective point")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    @property
    def normalized(self) -> np.ndarray:
        v = np.array([float(x) for x in self.values])
        return v / np.linalg.norm(v)


def _triple_in_sn(t: Sequence) -> bool:
    if sum(t) != 0:
        return False
    return any(t[k] == 0 and t[(k + 1) % 3] >= 0 for k in range(3))


def _close_triple_in_sn(t: Sequence[float], tol: float) -> bool:
    if abs(sum(t)) > tol:
        return False
    return any(abs(t[k]) <= tol and t[(k + 1) % 3] >= -tol for k in range(3))


def prevariety_membership(
    S: GluingSystem, xi: Sequence[Number] | TropicalPoint, tol: float = 1e-9
) -> tuple[bool, str]:
    """Test xi against the triple-form conditions and the gluing hyperplanes.

    Rational input is tested exactly; floats use ``tol``.
    """
    xi = list(xi)
    if len(xi) != S.dim:
        raise DimensionError(f"expected {S.dim} coordinates, got {len(xi)}")
    exact = not any(isinstance(x, float) for x in xi)
    if exact:
        xi = list(_exact(xi))
    if all(x == 0 for x in xi) or (not exact and max(abs(x) for x in xi) <= tol):
        return False, "zero vector is not a projective point"
    for i in range(0, len(xi), 3):
        t = xi[i:i + 3]
        ok = _triple_in_sn(t) if exact else _close_triple_in_sn(t, tol)
        if not ok:
            return False, f"triple {i // 3} {tuple(str(x) for x in t)} is not of the form (0,x,-x), (-x,0,x), (x,-x,0)"
    for j, row in enumerate(S.A):
        dot = sum(a * x for a, x in zip(row, xi))
        if (dot != 0) if exact else (abs(dot) > tol):
            return False, f"gluing hyperplane {j} violated (dot product {dot})"
    return True, "ok"


def sphdual_membership(exponents: Iterable[Sequence[int]], xi: Sequence[Number]) -> bool:
    """Whether the maximum of alpha . xi over the exponent set is attained twice."""
    F = {tuple(a) for a in exponents}
    if not F:
        raise ValueError("need at least one exponent vector")
    xi = _exact(xi) if not any(isinstance(x, float) for x in xi) else list(xi)
    dots = sorted((sum(a * x for a, x in zip(alpha, xi)) for alpha in F), reverse=True)
    return len(dots) >= 2 and dots[0] == dots[1]


def parameter_newton_exponents(i: int, n: int) -> list[list[list[int]]]:
    """Exponent sets of the three parameter polynomials of tetrahedron i."""
    def vec(*entries):
        v = [0] * (3 * n)
        for k in entries:
            v[3 * i + k] += 1
        return v

    # z - z z'' - 1,  z' - z z' - 1,  z'' - z' z'' - 1
    return [
        [vec(0), vec(0, 2), vec()],
        [vec(1), vec(0, 1), vec()],
        [vec(2), vec(1, 2), vec()],
    ]


# -- vertex enumeration -----------------------------------------------------------


def _extend(columns, basis, col, index):
    """Reduce ``col`` against the echelon ``basis``.

    ``basis`` entries are (pivot, reduced vector, combination over chosen
    columns).  Returns a new basis if independent, else the kernel vector.
    """
    vec = list(col)
    combo = {index: Fraction(1)}
    for pivot, rvec, rcombo in basis:
        if vec[pivot]:
            f = vec[pivot] / rvec[pivot]
            vec = [a - f * b for a, b in zip(vec, rvec)]
            for k, c in rcombo.items():
                combo[k] = combo.get(k, 0) - f * c
    nz = next((k for k, a in enumerate(vec) if a), None)
    if nz is None:
        return None, combo
    return basis + [(nz, vec, combo)], None


def _search(B_cols, n, start_tet, chosen, basis, out):
    for t in range(start_tet, n):
        for k in range(3):
            index = 3 * t + k
            new_basis, kernel = _extend(B_cols, basis, B_cols[index], index)
            if new_basis is None:
                vals = [kernel.get(c, Fraction(0)) for c in chosen + [index]]
                if all(v > 0 for v in vals) or all(v < 0 for v in vals):
                    vec = [Fraction(0)] * (3 * n)
                    for c, v in zip(chosen + [index], vals):
                        vec[c] = abs(v)
                    out.add(integral_representative(vec)[0])
            else:
                _search(B_cols, n, t + 1, chosen + [index], new_basis, out)


def _search_branch(args):
    B_cols, n, first = args
    out: set = set()
    index = first
    t = index // 3
    basis, kernel = _extend(B_cols, [], B_cols[index], index)
    if basis is None:
        # zero column: a single quad is already a vertex
        vec = [0] * (3 * n)
        vec[index] = 1
        out.add(tuple(vec))
    else:
        _search(B_cols, n, t + 1, [index], basis, out)
    return out


def enumerate_pf_vertices(S: GluingSystem, jobs: int = 1) -> list[QuadCoordinate]:
    """Vertices of the admissible part of {N >= 0, BN = 0, sum N = 1}.

    Supports are grown one tetrahedron at a time (one quad type or none per
    tetrahedron) while the chosen columns of B stay independent; the first
    dependent column closes a circuit, which is a vertex exactly when its
    kernel vector has constant sign.  Results are minimal integer vectors in
    descending lexicographic order.
    """
    n = S.tet_count
    B_cols = [tuple(Fraction(x) for x in col) for col in zip(*S.B)] if S.B else [
        () for _ in range(3 * n)
    ]
    tasks = [(B_cols, n, i) for i in range(3 * n)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_search_branch, tasks))
    else:
        parts = [_search_branch(t) for t in tasks]
    found = set().union(*parts)
    return [QuadCoordinate(v) for v in sorted(found, reverse=True)]


def brute_force_pf_vertices(S: GluingSystem) -> list[QuadCoordinate]:
    """Reference enumeration: every quad-type selection, every sub-support.

    For each of the 4^n selections (one quad type or none per tetrahedron)
    and each subset of the selected coordinates, the restricted kernel of B
    is computed with sympy; a one-dimensional kernel spanned by a strictly
    positive vector is an extreme ray.
    """
    import sympy

    n = S.tet_count
    B = sympy.Matrix(S.B) if S.B else sympy.zeros(1, 3 * n)
    found = set()
    for choice in product(range(4), repeat=n):
        coords = [3 * t + c for t, c in enumerate(choice) if c < 3]
        for mask in range(1, 1 << len(coords)):
            sub = [c for b, c in enumerate(coords) if mask >> b & 1]
            kernel = B[:, sub].nullspace()
            if len(kernel) != 1:
                continue
            v = kernel[0]
            if all(x > 0 for x in v) or all(x < 0 for x in v):
                vec = [Fraction(0)] * (3 * n)
                for c, x in zip(sub, v):
                    vec[c] = abs(Fraction(int(x.p), int(x.q)))
                found.add(integral_representative(vec)[0])
    return [QuadCoordinate(v) for v in sorted(found, reverse=True)]


# -- the correspondence N <-> xi ---------------------------------------------------


def quads_to_xi(N: QuadCoordinate | Sequence[Number]) -> TropicalPoint:
    N = N if isinstance(N, QuadCoordinate) else QuadCoordinate(N)
    if not N.is_admissible():
        raise AdmissibilityError(f"{N} is not admissible")
    if not any(N.values):
        raise AdmissibilityError("the zero quad vector has no projective class")
    xi = []
    for i in range(0, len(N), 3):
        q0, q1, q2 = N.values[i:i + 3]
        # rows of C_1^T: (0,-1,1), (1,0,-1), (-1,1,0)
        xi += [q2 - q1, q0 - q2, q1 - q0]
    return TropicalPoint(xi)


def xi_to_quads(xi: TropicalPoint | Sequence[Number]) -> QuadCoordinate:
    vals = _exact(xi)
    if len(vals) % 3:
        raise DimensionError("xi needs 3n coordinates")
    out = []
    for i in range(0, len(vals), 3):
        a, b, c = vals[i:i + 3]
        if not _triple_in_sn((a, b, c)):
            raise FormError(f"triple {i // 3} ({a},{b},{c}) is not of the form (0,x,-x), (-x,0,x), (x,-x,0)")
        if a == 0 and b >= 0:
            out += [b, 0, 0]
        elif b == 0 and c >= 0:
            out += [0, c, 0]
        else:
            out += [0, 0, a]
    return QuadCoordinate(out)
