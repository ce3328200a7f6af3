"""Gluing equations, Q-matching equations and residual evaluation.

Coordinates are ordered (z_1, z'_1, z''_1, ..., z''_n) everywhere.  Integer
matrices are tuples of Python ints; shapes are double-precision complex.
"""
from __future__ import annotations

import cmath
import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DimensionError, DomainError
from .triangulation import IdealTriangulation

IntMatrix = tuple[tuple[int, ...], ...]

C1: IntMatrix = ((0, 1, -1), (-1, 0, 1), (1, -1, 0))


def block_skew(n: int) -> IntMatrix:
    """The 3n x 3n block diagonal matrix with n copies of C1."""
    rows = []
    for i in range(3 * n):
        row = [0] * (3 * n)
        b = i // 3 * 3
        for k in range(3):
            row[b + k] = C1[i % 3][k]
        rows.append(tuple(row))
    return tuple(rows)


def matmul(X: Sequence[Sequence[int]], Y: Sequence[Sequence[int]]) -> IntMatrix:
    cols = list(zip(*Y))
    return tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in cols) for row in X)


def transpose(X: Sequence[Sequence[int]]) -> IntMatrix:
    return tuple(tuple(col) for col in zip(*X))


def matvec(X: Sequence[Sequence], v: Sequence) -> list:
    return [sum(a * b for a, b in zip(row, v)) for row in X]


@dataclass(frozen=True)
class GluingSystem:
    A: IntMatrix
    Cn: IntMatrix
    B: IntMatrix
    shape_names: tuple[str, ...] | None = None
    quad_names: tuple[str, ...] | None = None

    @classmethod
    def from_exponents(cls, A: Sequence[Sequence[int]], **names) -> "GluingSystem":
        A = tuple(tuple(int(a) for a in row) for row in A)
        if not A or len(A[0]) % 3:
            raise DimensionError("exponent matrix needs 3n columns")
        Cn = block_skew(len(A[0]) // 3)
        return cls(A, Cn, matmul(A, Cn), **names)

    @property
    def tet_count(self) -> int:
        return len(self.Cn) // 3

    @property
    def dim(self) -> int:
        return len(self.Cn)

    def shape_symbols(self) -> list[str]:
        base = self.shape_names or tuple(f"z{i + 1}" for i in range(self.tet_count))
        return [name + "'" * k for name in base for k in range(3)]

    def quad_symbols(self) -> list[str]:
        base = self.quad_names or tuple(f"q{i + 1}" for i in range(self.tet_count))
        return [name + "'" * k for name in base for k in range(3)]


def build_gluing_system(T: IdealTriangulation) -> GluingSystem:
    A = [e.label_counts(T.tet_count) for e in T.edge_classes]
    return GluingSystem.from_exponents(A, shape_names=T.shape_names, quad_names=T.quad_names)


@dataclass(frozen=True)
class ShapeAssignment:
    """Complex shape triples (z, z', z''), one per tetrahedron."""

    triples: tuple[tuple[complex, complex, complex], ...]
    info: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_z(cls, zs: Sequence[complex], **info) -> "ShapeAssignment":
        """Build triples from one shape per tetrahedron using the parameter relations."""
        triples = []
        for z in zs:
            z = complex(z)
            if z == 0 or z == 1 or not cmath.isfinite(z):
                raise DomainError(f"shape {z} is outside C minus {{0, 1}}")
            triples.append((z, 1 / (1 - z), (z - 1) / z))
        return cls(tuple(triples), dict(info))

    @property
    def z(self) -> list[complex]:
        return [t[0] for t in self.triples]

    def flat(self) -> list[complex]:
        return [x for t in self.triples for x in t]

    def __len__(self) -> int:
        return len(self.triples)

    def conjugate(self) -> "ShapeAssignment":
        return ShapeAssignment(tuple(tuple(x.conjugate() for x in t) for t in self.triples))


def _check_nonzero(Z: ShapeAssignment) -> None:
    for i, t in enumerate(Z.triples):
        if any(x == 0 or not cmath.isfinite(x) for x in t):
            raise DomainError(f"tetrahedron {i} has a zero or infinite shape {t}")


def parameter_residuals(Z: ShapeAssignment) -> list[complex]:
    _check_nonzero(Z)
    out = []
    for z, z1, z2 in Z.triples:
        out += [z * (1 - z2) - 1, z1 * (1 - z) - 1, z2 * (1 - z1) - 1]
    return out


def monomial(exponents: Sequence[int], values: Sequence[complex]) -> complex:
    out = complex(1)
    for e, x in zip(exponents, values):
        if e:
            out *= x**e
    return out


def gluing_residuals(S: GluingSystem, Z: ShapeAssignment) -> list[complex]:
    if len(Z) != S.tet_count:
        raise DimensionError(f"expected {S.tet_count} shape triples, got {len(Z)}")
    _check_nonzero(Z)
    values = Z.flat()
    return [monomial(row, values) - 1 for row in S.A]


def max_residual(S: GluingSystem, Z: ShapeAssignment) -> float:
    res = parameter_residuals(Z) + gluing_residuals(S, Z)
    return max(abs(r) for r in res)


# -- display and export ----------------------------------------------------------


def _power(symbol: str, e: int) -> str:
    if e == 1:
        return symbol
    return f"({symbol})^{e}" if "'" in symbol else f"{symbol}^{e}"


def format_gluing_equations(S: GluingSystem) -> list[str]:
    """Multiplicative form, e.g. ``1 = (w')^2 w'' (z')^2 z''``."""
    symbols = S.shape_symbols()
    lines = []
    for row in S.A:
        terms = [_power(s, e) for s, e in zip(symbols, row) if e]
        lines.append("1 = " + (" ".join(terms) if terms else "1"))
    return lines


def format_matching_equations(S: GluingSystem) -> list[str]:
    """Additive form, e.g. ``0 = -p - p' + 2p'' - q - q' + 2q''``."""
    symbols = S.quad_symbols()
    lines = []
    for row in S.B:
        text = ""
        for s, c in zip(symbols, row):
            if not c:
                continue
            mag = "" if abs(c) == 1 else str(abs(c))
            if not text:
                text = ("-" if c < 0 else "") + mag + s
            else:
                text += (" - " if c < 0 else " + ") + mag + s
        lines.append("0 = " + (text or "0"))
    return lines


def matrix_csv(M: Sequence[Sequence[int]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(M)
    return buf.getvalue()


def system_to_json(S: GluingSystem) -> dict:
    return {
        "A": [list(r) for r in S.A],
        "B": [list(r) for r in S.B],
        "gluing_equations": format_gluing_equations(S),
        "matching_equations": format_matching_equations(S),
    }
