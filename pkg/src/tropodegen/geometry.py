"""Numeric hyperbolic structures: Newton solves of the gluing and completeness
equations, peripheral holonomy, volume, the developing map and tracking of
paths that run off towards an ideal point.

Points of the Riemann sphere are complex numbers, with ``INF`` for infinity.
Matrices are 2x2 numpy arrays and only meaningful up to sign.
"""
from __future__ import annotations

import cmath
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import mpmath
import numpy as np

from .equations import GluingSystem, ShapeAssignment, gluing_residuals, monomial
from .errors import (
    ConsistencyError,
    DegenerateTripleError,
    DimensionError,
    DomainError,
    MissingBasisError,
    NoConvergence,
    SingularJacobian,
)
from .triangulation import VERTICES, IdealTriangulation, PeripheralCurve, edge_label, perm_sign
from .tropical import TropicalPoint

INF = complex("inf")
COMPLETE_SHAPE = complex(0.5, math.sqrt(3) / 2)


# -- solving ----------------------------------------------------------------------


@dataclass(frozen=True)
class SolveOptions:
    initial: Sequence[complex] | None = None
    complete: bool = False
    tolerance: float = 1e-12
    max_iterations: int = 100
    retries: int = 8
    # tetrahedron index -> shape held fixed during the solve
    fixed: Mapping[int, complex] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1 or self.retries < 0:
            raise ValueError("max_iterations must be >= 1 and retries >= 0")


def _dlog_rows(z: complex) -> tuple[complex, complex, complex]:
    # derivatives of log z, log z', log z'' with respect to z
    return 1 / z, 1 / (1 - z), 1 / (z - 1) - 1 / z


def _targets(S: GluingSystem, curves: Sequence[PeripheralCurve]) -> list[tuple[tuple[int, ...], int]]:
    rows = [(tuple(r), 1) for r in S.A]
    rows += [(c.mu_vector, c.sign) for c in curves]
    return rows


def _evaluate(rows, zs):
    Z = ShapeAssignment.from_z(zs)
    values = Z.flat()
    products = [sign * monomial(e, values) for e, sign in rows]
    return Z, products


def _newton(rows, zs, free, opts):
    zs = list(zs)
    for it in range(opts.max_iterations + 1):
        Z, products = _evaluate(rows, zs)
        err = max(abs(p - 1) for p in products)
        if err < opts.tolerance:
            return Z, it, err
        if it == opts.max_iterations:
            break
        F = np.array([cmath.log(p) for p in products])
        derivs = [_dlog_rows(z) for z in zs]
        J = np.zeros((len(rows), len(free)), dtype=complex)
        for r, (e, _) in enumerate(rows):
            for col, t in enumerate(free):
                J[r, col] = sum(e[3 * t + k] * derivs[t][k] for k in range(3))
        if not np.all(np.isfinite(J)) or np.linalg.matrix_rank(J, tol=1e-13) == 0:
            raise SingularJacobian("Jacobian vanishes or is not finite at the current point")
        step = np.linalg.lstsq(J, -F, rcond=None)[0]
        norm0 = np.linalg.norm(F)
        lam = 1.0
        while lam > 1e-6:
            trial = list(zs)
            for col, t in enumerate(free):
                trial[t] = zs[t] + lam * step[col]
            try:
                _, tp = _evaluate(rows, trial)
                tf = np.linalg.norm([cmath.log(p) for p in tp])
            except (DomainError, ValueError, ZeroDivisionError, OverflowError):
                tf = math.inf
            if tf < norm0 or lam < 1e-3:
                break
            lam /= 2
        zs = trial
        if any(z == 0 or z == 1 or not cmath.isfinite(z) for z in zs):
            raise DomainError("Newton iterate left C minus {0, 1}")
    raise NoConvergence(f"residual {err:.3e} after {opts.max_iterations} iterations")


def solve(
    S: GluingSystem,
    curves: Sequence[PeripheralCurve] = (),
    opts: SolveOptions | None = None,
) -> ShapeAssignment:
    """Find shapes satisfying the gluing (and optionally completeness) equations.

    One complex unknown per tetrahedron; companions come from the parameter
    relations so those hold to rounding.  Steps are least-squares Newton
    steps on the principal logarithms, while convergence is judged on the
    products themselves.  Failed starts are retried from random points in
    the upper half plane.
    """
    opts = opts or SolveOptions()
    n = S.tet_count
    if opts.complete and not curves:
        raise MissingBasisError("complete=True needs peripheral curves")
    rows = _targets(S, curves if opts.complete else ())
    initial = list(opts.initial) if opts.initial is not None else [1j] * n
    if len(initial) != n:
        raise DimensionError(f"expected {n} initial shapes, got {len(initial)}")
    for t, v in opts.fixed.items():
        if not 0 <= t < n:
            raise DimensionError(f"no tetrahedron {t} to fix")
        initial[t] = complex(v)
    initial = [complex(z) for z in initial]
    free = [t for t in range(n) if t not in opts.fixed]
    ShapeAssignment.from_z(initial)  # domain check on the start
    if not free:
        Z, products = _evaluate(rows, initial)
        err = max(abs(p - 1) for p in products)
        if err >= opts.tolerance:
            raise NoConvergence("all shapes fixed and equations not satisfied")
        return ShapeAssignment(Z.triples, {"iterations": 0, "attempts": 1, "residual": err})

    rng = random.Random(opts.seed)
    last: Exception | None = None
    start = initial
    for attempt in range(opts.retries + 1):
        try:
            Z, its, err = _newton(rows, start, free, opts)
            info = {"iterations": its, "attempts": attempt + 1, "residual": err}
            return ShapeAssignment(Z.triples, info)
        except SingularJacobian as exc:
            if attempt == 0:
                raise
            last = exc
        except (NoConvergence, DomainError, ZeroDivisionError, OverflowError) as exc:
            last = exc
        start = list(initial)
        for t in free:
            start[t] = complex(rng.uniform(-1.5, 2.5), rng.uniform(0.2, 2.0))
    raise NoConvergence(f"no convergence after {opts.retries + 1} attempts ({last})")


# -- holonomy and volume ------------------------------------------------------------


def holonomy_eval(Z: ShapeAssignment, gamma: PeripheralCurve) -> complex:
    """mu_Z(gamma): the signed monomial of the curve evaluated at Z."""
    values = Z.flat()
    if len(values) != len(gamma.mu_vector):
        raise DimensionError("curve and shapes belong to different triangulations")
    for x in values:
        if x == 0 or not cmath.isfinite(x):
            raise DomainError(f"shape {x} is zero or infinite")
    return gamma.sign * monomial(gamma.mu_vector, values)


def trace_squared(Z: ShapeAssignment, gamma: PeripheralCurve) -> complex:
    mu = holonomy_eval(Z, gamma)
    return mu + 2 + 1 / mu


def lobachevsky(theta: float) -> float:
    """Lobachevsky function, half the Clausen function at twice the angle."""
    # period pi; reducing first keeps flat angles at exactly zero
    theta = math.remainder(theta, math.pi)
    return float(mpmath.clsin(2, 2 * theta)) / 2


def volume(Z: ShapeAssignment) -> float:
    total = 0.0
    for triple in Z.triples:
        for x in triple:
            if x == 0 or not cmath.isfinite(x):
                raise DomainError(f"shape {x} is zero or infinite")
            total += lobachevsky(cmath.phase(x))
    return total


# -- Moebius transformations -----------------------------------------------------------


def _homog(x) -> tuple[complex, complex]:
    x = complex(x)
    if cmath.isinf(x):
        return 1 + 0j, 0j
    if cmath.isnan(x):
        raise DomainError("NaN is not a point of the Riemann sphere")
    return x, 1 + 0j


def _bracket(p, q) -> complex:
    return p[0] * q[1] - p[1] * q[0]


def cross_ratio(a, b, c, d) -> complex:
    """(a,b;c,d) = (a-c)(b-d) / ((a-d)(b-c)), with infinity allowed."""
    A, B, C, D = map(_homog, (a, b, c, d))
    num = _bracket(A, C) * _bracket(B, D)
    den = _bracket(A, D) * _bracket(B, C)
    if den == 0:
        return INF
    return num / den


def mobius_apply(M, x) -> complex:
    X = _homog(x)
    top = M[0][0] * X[0] + M[0][1] * X[1]
    bottom = M[1][0] * X[0] + M[1][1] * X[1]
    if bottom == 0:
        return INF
    return complex(top / bottom)


def normalize(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if det == 0:
        raise DomainError("singular matrix")
    return M / cmath.sqrt(det)


def _to_standard(a, b, c) -> np.ndarray:
    """Matrix sending a, b, c to 0, 1, infinity."""
    A, B, C = map(_homog, (a, b, c))
    if _bracket(A, B) == 0 or _bracket(A, C) == 0 or _bracket(B, C) == 0:
        raise DegenerateTripleError(f"points {a}, {b}, {c} are not distinct")
    # x -> [x,a][b,c] / ([x,c][b,a])
    bc, ba = _bracket(B, C), _bracket(B, A)
    return np.array([[A[1] * bc, -A[0] * bc], [C[1] * ba, -C[0] * ba]], dtype=complex)


def mobius_from_triples(src: Sequence, dst: Sequence) -> np.ndarray:
    """The determinant-one matrix (up to sign) taking src[k] to dst[k]."""
    if len(src) != 3 or len(dst) != 3:
        raise DegenerateTripleError("need exactly three source and three target points")
    g = _to_standard(*src)
    h = _to_standard(*dst)
    return normalize(np.linalg.solve(h, g))


def projective_distance(M, N) -> float:
    """Distance between two normalized matrices, ignoring the sign."""
    M, N = normalize(M), normalize(N)
    return float(min(np.abs(M - N).max(), np.abs(M + N).max()))


# -- developing map ---------------------------------------------------------------------


def _oriented_order(tet_orientation: int, last: int | None = None) -> tuple[int, ...]:
    """Vertex order (a, b, c, d) of the right handedness, ending in ``last``."""
    from itertools import permutations

    for p in permutations(VERTICES):
        if (last is None or p[3] == last) and perm_sign(p) == tet_orientation:
            return p
    raise AssertionError("unreachable")


def _chordal(x, y) -> float:
    X, Y = _homog(x), _homog(y)
    nx = math.sqrt(abs(X[0]) ** 2 + abs(X[1]) ** 2)
    ny = math.sqrt(abs(Y[0]) ** 2 + abs(Y[1]) ** 2)
    return abs(_bracket(X, Y)) / (nx * ny)


@dataclass(frozen=True)
class Development:
    positions: tuple[tuple[complex, complex, complex, complex], ...]
    tree: frozenset  # faces (tet, face) crossed by the spanning tree
    # (tet, face) -> matrix taking the neighbour's developed face onto this tet's face
    pairings: Mapping[tuple[int, int], np.ndarray]
    triangulation: IdealTriangulation = field(repr=False, compare=False)

    @property
    def generators(self) -> dict[tuple[int, int], np.ndarray]:
        """Face pairings off the spanning tree, one per glued face pair."""
        out = {}
        for (i, f), M in self.pairings.items():
            g = self.triangulation.gluings[i][f]
            if (i, f) in self.tree or (g.tet, g.perm[f]) in out:
                continue
            out[(i, f)] = M
        return out

    def cross_ratios(self, tet: int) -> tuple[complex, complex, complex]:
        """The shapes read back from the developed vertices of one tetrahedron."""
        o = self.triangulation.orientation[tet]
        pos = self.positions[tet]
        out = [0j, 0j, 0j]
        for a, b, c, d in (_oriented_order(o, last) for last in (3, 2, 1)):
            out[edge_label(min(a, b), max(a, b), o)] = cross_ratio(pos[a], pos[b], pos[c], pos[d])
        return tuple(out)

    def curve_matrix(self, gamma: PeripheralCurve) -> np.ndarray:
        """Product of the face pairings crossed by a closed path."""
        M = np.eye(2, dtype=complex)
        for s in gamma.steps:
            M = M @ self.pairings[(s.tet, s.exit)]
        return normalize(M)


def develop(T: IdealTriangulation, Z: ShapeAssignment, tolerance: float = 1e-8) -> Development:
    """Place one copy of each tetrahedron along a spanning tree of face pairings.

    Tetrahedron 0 gets vertices at infinity, 0 and 1; every other copy is
    attached across a tree face.  Walking once around each edge class must
    compose the face pairings to the identity, otherwise ConsistencyError.
    """
    n = T.tet_count
    if len(Z) != n:
        raise DimensionError(f"expected {n} shape triples, got {len(Z)}")
    for t in Z.triples:
        if any(x == 0 or x == 1 or not cmath.isfinite(x) for x in t):
            raise DomainError(f"degenerate shape triple {t}")
    positions: list[list[complex] | None] = [None] * n
    a, b, c, d = _oriented_order(T.orientation[0])
    pos = [0j] * 4
    pos[a], pos[b], pos[c] = INF, 0j, 1 + 0j
    pos[d] = Z.triples[0][edge_label(min(a, b), max(a, b), T.orientation[0])]
    positions[0] = pos
    tree = set()
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for f, g in enumerate(T.gluings[i]):
            j = g.tet
            if positions[j] is not None:
                continue
            new = [0j] * 4
            for x in VERTICES:
                if x != f:
                    new[g.perm[x]] = positions[i][x]
            o = T.orientation[j]
            a, b, c, d = _oriented_order(o, g.perm[f])
            shape = Z.triples[j][edge_label(min(a, b), max(a, b), o)]
            h = _to_standard(new[b], new[c], new[a])  # a -> inf, b -> 0, c -> 1
            new[d] = mobius_apply(np.linalg.inv(h), shape)
            positions[j] = new
            tree.add((i, f))
            tree.add((j, g.perm[f]))
            queue.append(j)

    pairings = {}
    for i in range(n):
        for f, g in enumerate(T.gluings[i]):
            face = [x for x in VERTICES if x != f]
            src = [positions[g.tet][g.perm[x]] for x in face]
            dst = [positions[i][x] for x in face]
            pairings[(i, f)] = mobius_from_triples(src, dst)

    dev = Development(tuple(tuple(p) for p in positions), frozenset(tree), pairings, T)
    for t in range(n):
        for got, want in zip(dev.cross_ratios(t), Z.triples[t]):
            if _chordal(got, want) > tolerance:
                raise ConsistencyError(f"tetrahedron {t}: cross ratio {got} differs from shape {want}")
    _check_edges(T, pairings, tolerance)
    return dev


def _check_edges(T: IdealTriangulation, pairings, tolerance: float) -> None:
    for ec in T.edge_classes:
        m = ec.members[0]
        t, (a, b) = m.tet, m.edge
        enter = min(set(VERTICES) - {a, b})
        start = (t, a, b, enter)
        M = np.eye(2, dtype=complex)
        while True:
            x = (set(VERTICES) - {a, b, enter}).pop()
            M = M @ pairings[(t, x)]
            g = T.gluings[t][x]
            t, a, b, enter = g.tet, g.perm[a], g.perm[b], g.perm[x]
            if (t, a, b, enter) == start:
                break
        dist = projective_distance(M, np.eye(2))
        if dist > tolerance:
            raise ConsistencyError(
                f"edge class {ec.id}: face pairings around the edge compose to a "
                f"non-trivial map (distance {dist:.2e}), shapes are off the variety"
            )


# -- degenerations --------------------------------------------------------------------


def log_vector(Z: ShapeAssignment) -> np.ndarray:
    return np.array([math.log(abs(x)) for x in Z.flat()])


def normalized_log(Z: ShapeAssignment) -> tuple[float, np.ndarray]:
    """u(Z) = 1/sqrt(1 + |log|Z||^2) and the vector u(Z) log|Z|."""
    v = log_vector(Z)
    u = 1 / math.sqrt(1 + float(v @ v))
    return u, u * v


def fig8_degeneration_path(samples: int = 20, w0: complex = COMPLETE_SHAPE) -> list[tuple[float, ShapeAssignment]]:
    """Shapes (w, z) with w = r^2 w0 and z on the + branch of z(1-z)w(1-w) = 1,
    for r = 2^-1, ..., 2^-samples."""
    out = []
    for k in range(1, samples + 1):
        r = 2.0**-k
        w = r * r * w0
        z = (1 + cmath.sqrt(1 + 4 / (w * (w - 1)))) / 2
        out.append((r, ShapeAssignment.from_z([w, z], r=r)))
    return out


@dataclass(frozen=True)
class DegenerationSample:
    r: float | None
    Z: ShapeAssignment
    u: float
    normalized: np.ndarray
    distances: tuple[float, ...]


@dataclass(frozen=True)
class DegenerationResult:
    samples: tuple[DegenerationSample, ...]
    verdict: int | None  # index into the candidate list, or None
    candidates: tuple[TropicalPoint, ...]

    @property
    def limit(self) -> TropicalPoint | None:
        return None if self.verdict is None else self.candidates[self.verdict]


def track_degeneration(
    path: Sequence[ShapeAssignment | tuple[float, ShapeAssignment]],
    candidates: Sequence[TropicalPoint | Sequence[float]],
    S: GluingSystem | None = None,
    threshold: float = 1e-3,
    window: int = 5,
    tolerance: float = 1e-8,
) -> DegenerationResult:
    """Follow u(Z) log|Z| along a path and compare with candidate ideal points.

    The verdict is the candidate whose distance ends below ``threshold`` and
    strictly decreases over the last ``window`` samples; with fewer samples
    than the window there is no verdict.  When ``S`` is given every sample
    must satisfy the gluing equations to ``tolerance``.
    """
    cands = tuple(c if isinstance(c, TropicalPoint) else TropicalPoint(c) for c in candidates)
    units = [c.normalized for c in cands]
    samples = []
    for k, item in enumerate(path):
        r, Z = item if isinstance(item, tuple) else (item.info.get("r"), item)
        for x in Z.flat():
            if x == 0 or not cmath.isfinite(x):
                raise DomainError(f"sample {k}: shape {x} is zero or infinite")
        if S is not None:
            res = max(abs(g) for g in gluing_residuals(S, Z))
            if res > tolerance:
                raise DomainError(f"sample {k} is off the variety (gluing residual {res:.2e})")
        u, v = normalized_log(Z)
        if any(len(c) != len(v) for c in units):
            raise DimensionError("candidate and shape dimensions differ")
        dist = tuple(float(np.linalg.norm(v - c)) for c in units)
        samples.append(DegenerationSample(r, Z, u, v, dist))

    verdict = None
    if len(samples) >= max(window, 1):
        tail = samples[-window:]
        for idx in range(len(cands)):
            d = [s.distances[idx] for s in tail]
            if d[-1] < threshold and all(x > y for x, y in zip(d, d[1:])):
                if verdict is None or d[-1] < samples[-1].distances[verdict]:
                    verdict = idx
    return DegenerationResult(tuple(samples), verdict, cands)
