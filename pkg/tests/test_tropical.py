import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tropodegen import (
    AdmissibilityError,
    DimensionError,
    FormError,
    GluingSystem,
    QuadCoordinate,
    build_gluing_system,
    enumerate_pf_vertices,
    parse_triangulation,
    prevariety_membership,
    quads_to_xi,
    sphdual_membership,
    xi_to_quads,
)
from tropodegen.equations import block_skew, matvec, transpose
from tropodegen.tropical import (
    brute_force_pf_vertices,
    integral_representative,
    parameter_newton_exponents,
)

TABLE = [(2, 0, 0, 0, 0, 1), (0, 2, 0, 0, 0, 1), (0, 0, 1, 2, 0, 0), (0, 0, 1, 0, 2, 0)]


def test_fig8_vertices(system):
    assert [v.integral() for v in enumerate_pf_vertices(system)] == TABLE


def test_parallel_enumeration_agrees(system):
    assert enumerate_pf_vertices(system, jobs=2) == enumerate_pf_vertices(system)


def test_zero_matching_matrix_gives_unit_quads():
    S = GluingSystem.from_exponents([[0, 0, 0]])
    assert [v.integral() for v in enumerate_pf_vertices(S)] == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]


def _random_system(rng, n, rows):
    A = [[rng.randint(0, 2) for _ in range(3 * n)] for _ in range(rows)]
    return GluingSystem.from_exponents(A)


def test_random_systems_match_oracle():
    rng = random.Random(11)
    for _ in range(10):
        S = _random_system(rng, 2, rng.randint(1, 2))
        assert enumerate_pf_vertices(S) == brute_force_pf_vertices(S)


def test_relabelled_fig8_gives_relabelled_vertices(fig8):
    # swap the two tetrahedra: vertices are permuted the same way
    doc = fig8.to_json()
    doc.pop("peripheral_curves")
    doc["gluings"] = [
        [{"tet": 1 - g["tet"], "perm": g["perm"]} for g in faces] for faces in doc["gluings"][::-1]
    ]
    S = build_gluing_system(parse_triangulation(doc))
    swapped = sorted((v[3:] + v[:3] for v in TABLE), reverse=True)
    assert [v.integral() for v in enumerate_pf_vertices(S)] == swapped


def test_vertices_are_admissible_prevariety_points(system):
    for N in enumerate_pf_vertices(system):
        assert N.is_admissible() and N.satisfies_matching(system)
        ok, why = prevariety_membership(system, quads_to_xi(N))
        assert ok, why


def test_membership_examples(system):
    xi = (-2, 0, 2, 1, -1, 0)
    assert sum(a * x for a, x in zip(system.A[0], xi)) == 0
    assert sum(a * x for a, x in zip(system.A[1], xi)) == 0
    assert prevariety_membership(system, xi) == (True, "ok")
    ok, why = prevariety_membership(system, (0,) * 6)
    assert not ok and "zero" in why
    ok, why = prevariety_membership(system, (-2, 0, 2, 1, -1, 0.25))
    assert not ok and "triple 1" in why
    ok, why = prevariety_membership(system, (0, 1, -1, 0, 0, 0))
    assert not ok and "hyperplane" in why
    with pytest.raises(DimensionError):
        prevariety_membership(system, (1, 2, 3))


def test_float_membership(system):
    assert prevariety_membership(system, [x / 10**0.5 for x in (-2.0, 0, 2, 1, -1, 0)])[0]


def test_sphdual_examples():
    p = parameter_newton_exponents(0, 1)[0]
    assert sorted(map(tuple, p)) == [(0, 0, 0), (1, 0, 0), (1, 0, 1)]
    assert sphdual_membership(p, (0, 3, -3))
    assert not sphdual_membership([(0,), (1,)], (1,))
    assert sphdual_membership([(0,), (1,), (5,)], (0,))
    with pytest.raises(ValueError):
        sphdual_membership([], (0,))


@given(st.integers(1, 50), st.integers(0, 2))
def test_sn_triples_lie_in_all_three_duals(x, k):
    triple = [(0, x, -x), (-x, 0, x), (x, -x, 0)][k]
    for F in parameter_newton_exponents(0, 1):
        assert sphdual_membership(F, triple)


def test_quads_to_xi_examples():
    assert quads_to_xi((0, 2, 0, 0, 0, 1)).values == (-2, 0, 2, 1, -1, 0)
    assert xi_to_quads((-2, 0, 2, 1, -1, 0)).integral() == (0, 2, 0, 0, 0, 1)
    with pytest.raises(AdmissibilityError):
        quads_to_xi((0,) * 6)
    with pytest.raises(AdmissibilityError):
        quads_to_xi((1, 1, 0))
    with pytest.raises(FormError):
        xi_to_quads((1, 1, -2))


def test_table_round_trip():
    for row in TABLE:
        assert xi_to_quads(quads_to_xi(row)).integral() == row


def test_matches_matrix_product():
    rng = random.Random(2)
    Ct = transpose(block_skew(3))
    for _ in range(30):
        N = [0] * 9
        for t in range(3):
            N[3 * t + rng.randrange(3)] = rng.randint(0, 9)
        if any(N):
            assert list(quads_to_xi(N).values) == matvec(Ct, N)


admissible = st.lists(
    st.tuples(st.integers(0, 2), st.fractions(0, 20, max_denominator=7)), min_size=1, max_size=5
).filter(lambda ts: any(v for _, v in ts))


@settings(max_examples=100)
@given(admissible)
def test_round_trip_and_norm(triples):
    N = []
    for k, v in triples:
        t = [Fraction(0)] * 3
        t[k] = v
        N += t
    xi = quads_to_xi(N)
    assert xi_to_quads(xi).values == tuple(N)
    assert sum(x * x for x in xi) == 2 * sum(x * x for x in N)


def test_a_times_xi_vanishes_for_matching_quads(system):
    for N in enumerate_pf_vertices(system):
        xi = quads_to_xi(N)
        assert all(sum(a * x for a, x in zip(row, xi)) == 0 for row in system.A)


def test_integral_representative():
    assert integral_representative([0, 1, 0, 0, 0, Fraction(1, 2)]) == ((0, 2, 0, 0, 0, 1), 2)
    assert integral_representative([4, 0, 2]) == ((2, 0, 1), Fraction(1, 2))
    assert QuadCoordinate([Fraction(1, 3), 0, 0]).integral() == (1, 0, 0)
