import random
from fractions import Fraction

import pytest

from tropodegen import (
    AdmissibilityError,
    MatchingError,
    MissingBasisError,
    boundary_slopes,
    enumerate_pf_vertices,
    integral_surface,
    nontriviality_certificate,
    nu_evaluate,
    peripheral_basis,
    spine_descriptor,
    validate_curve,
)
from tropodegen.surfaces import CERTIFIED_NONTRIVIAL, PRODUCT_NOTE, UNDETERMINED, spine_face_parameters
from tropodegen.triangulation import random_closed_path, vertex_loop

# solution, nu(M), nu(L), slope
TABLE = [
    ((2, 0, 0, 0, 0, 1), 1, 4, -4),
    ((0, 2, 0, 0, 0, 1), -1, 4, 4),
    ((0, 0, 1, 2, 0, 0), -1, -4, -4),
    ((0, 0, 1, 0, 2, 0), 1, -4, 4),
]


@pytest.mark.parametrize("N, m, l, slope", TABLE)
def test_table_values(fig8, system, meridian, longitude, N, m, l, slope):
    assert nu_evaluate(N, meridian, system) == m
    assert nu_evaluate(N, longitude, system) == l
    report = boundary_slopes(N, peripheral_basis(fig8), system)
    assert report.slope() == slope
    assert report.boundary_vector == (-l, m)


def test_unbalanced_quads_are_rejected(system, meridian):
    with pytest.raises(MatchingError):
        nu_evaluate((1, 0, 0, 0, 0, 0), meridian, system)


def test_contractible_paths_vanish(fig8, system):
    for k in range(len(fig8.cusps[0].vertices)):
        loop = validate_curve(fig8, vertex_loop(fig8, 0, k))
        for N, *_ in TABLE:
            assert nu_evaluate(N, loop, system) == 0


def test_homomorphism_on_concatenated_paths(fig8, system, meridian, longitude):
    # traverse the meridian twice: values add
    twice = validate_curve(fig8, list(meridian.steps) * 2)
    for N, *_ in TABLE:
        assert nu_evaluate(N, twice, system) == 2 * nu_evaluate(N, meridian, system)


def test_homotopic_paths_agree(fig8, system, meridian, longitude):
    # every closed path is homologous to a M + b L; recover (a, b) from two
    # vertices and check it predicts the value on the other two
    rng = random.Random(4)
    vs = [N for N, *_ in TABLE]
    for _ in range(20):
        c = validate_curve(fig8, random_closed_path(fig8, 0, rng))
        vals = [nu_evaluate(N, c, system) for N in vs]
        m = [nu_evaluate(N, meridian, system) for N in vs]
        l = [nu_evaluate(N, longitude, system) for N in vs]
        det = m[0] * l[1] - m[1] * l[0]
        a = Fraction(vals[0] * l[1] - vals[1] * l[0], det)
        b = Fraction(m[0] * vals[1] - m[1] * vals[0], det)
        assert a.denominator == 1 and b.denominator == 1
        for k in (2, 3):
            assert vals[k] == a * m[k] + b * l[k]


def test_scaling(system, meridian):
    N = (2, 0, 0, 0, 0, 1)
    for c in (Fraction(1, 3), 5):
        assert nu_evaluate([c * x for x in N], meridian, system) == c * nu_evaluate(N, meridian, system)


def test_certificates(fig8, system):
    for N, *_ in TABLE:
        cert = nontriviality_certificate(N, fig8.peripheral_curves, system)
        assert cert.verdict == CERTIFIED_NONTRIVIAL
    assert nontriviality_certificate(TABLE[0][0], [fig8.curve("meridian")], system).witness == "meridian"


def test_vanishing_nu_is_undetermined(fig8, system):
    loops = [validate_curve(fig8, vertex_loop(fig8, 0, k)) for k in range(2)]
    cert = nontriviality_certificate(TABLE[0][0], loops, system)
    assert cert.verdict == UNDETERMINED


def test_undefined_slope(fig8, system):
    loops = [validate_curve(fig8, vertex_loop(fig8, 0, k)) for k in range(2)]
    report = boundary_slopes(TABLE[1][0], {0: loops}, system)
    assert report.slope() is None
    assert report.cusps[0].note == PRODUCT_NOTE
    assert report.to_json()["cusps"][0]["note"] == PRODUCT_NOTE


def test_missing_basis(system, meridian):
    with pytest.raises(MissingBasisError):
        boundary_slopes(TABLE[0][0], {0: [meridian]}, system)
    with pytest.raises(MissingBasisError):
        boundary_slopes(TABLE[0][0], {}, system, cusp_count=1)


def test_integral_surface():
    s = integral_surface((0, 1, 0, 0, 0, Fraction(1, 2)))
    assert s.vector == (0, 2, 0, 0, 0, 1) and s.doubled == (0, 4, 0, 0, 0, 2)
    s = integral_surface((2, 0, 0, 0, 0, 1))
    assert s.scale == 1 and s.vector == (2, 0, 0, 0, 0, 1)
    s = integral_surface((0,) * 6)
    assert s.vector == (0,) * 6 and "empty surface" in s.warnings


def test_spine_lengths(fig8):
    d = spine_descriptor((0, 2, 0, 0, 0, 1), fig8)
    assert d.lengths == (2, 1)
    assert len(d.faces) == 4
    for f in d.faces:
        assert (f.r, f.s) == (1, 1)
        assert f.case in ("1", "2")


def test_empty_spines_are_cones(fig8):
    d = spine_descriptor((0,) * 6, fig8)
    assert d.lengths == (0, 0)
    assert {f.case for f in d.faces} == {"cone"}


def test_spine_face_parameters():
    assert spine_face_parameters(3, 1) == (2, 1)
    assert spine_face_parameters(1, 3) == (2, 1)
    assert spine_face_parameters(Fraction(1, 2), 0) == (Fraction(1, 2), 0)


def test_spine_rejects_inadmissible(fig8):
    with pytest.raises(AdmissibilityError):
        spine_descriptor((1, 1, 0, 0, 0, 0), fig8)


def test_spine_lengths_are_max_quads(fig8, system):
    for N in enumerate_pf_vertices(system):
        d = spine_descriptor(N, fig8)
        assert all(t.length == max(N.values[3 * t.tet:3 * t.tet + 3]) for t in d.tets)
