import json
import random
from itertools import product

import pytest

from tropodegen import (
    GluingError,
    OrientabilityError,
    PathError,
    SchemaError,
    cusp_triangulation,
    edge_classes,
    parse_triangulation,
    validate_curve,
)
from tropodegen.equations import block_skew, matvec
from tropodegen.triangulation import (
    VERTICES,
    find_peripheral_basis,
    perm_inverse,
    perm_sign,
    random_closed_path,
    vertex_loop,
)


def test_fig8_counts(fig8):
    assert fig8.tet_count == 2
    assert len(fig8.edge_classes) == 2
    assert fig8.cusp_count == 1
    assert [e.degree for e in edge_classes(fig8)] == [6, 6]


def test_degrees_and_label_counts(fig8):
    assert sum(e.degree for e in fig8.edge_classes) == 6 * fig8.tet_count
    rows = [e.label_counts(fig8.tet_count) for e in fig8.edge_classes]
    for col in range(3 * fig8.tet_count):
        assert sum(r[col] for r in rows) == 2


def test_pairings_are_involutions(fig8):
    for i, faces in enumerate(fig8.gluings):
        for f, g in enumerate(faces):
            back = fig8.gluings[g.tet][g.perm[f]]
            assert back.tet == i
            assert tuple(back.perm[g.perm[v]] for v in VERTICES) == VERTICES


def test_cusp_is_a_torus(fig8):
    ct = cusp_triangulation(fig8, 0)
    assert len(ct.triangles) == 8
    # V - E + F counted directly from the side pairing
    sides = {frozenset([k, v]) for k, v in ct.adjacency.items()}
    assert len(ct.vertices) - len(sides) + len(ct.triangles) == 0
    assert ct.euler_characteristic == 0
    assert ct.genus == 1


def test_corner_census_matches_edge_classes(fig8):
    ct = fig8.cusps[0]
    corners = sorted((c.tet, ct.corner_labels[c]) for fan in ct.vertices for c in fan)
    members = sorted((m.tet, m.label) for e in fig8.edge_classes for m in e.members for _ in range(2))
    assert corners == members


def test_unknown_cusp(fig8):
    with pytest.raises(KeyError):
        cusp_triangulation(fig8, 3)


def _fig8_doc(fig8):
    return json.loads(json.dumps(fig8.to_json()))


def test_json_round_trip(fig8):
    again = parse_triangulation(json.dumps(fig8.to_json()))
    assert again.to_json() == fig8.to_json()


def test_doubly_paired_face(fig8):
    doc = _fig8_doc(fig8)
    doc.pop("peripheral_curves")
    # face (0,0) already goes to (1,1); send (0,2) there as well
    doc["gluings"][0][2] = dict(doc["gluings"][0][0])
    doc["gluings"][0][2]["perm"] = [1, 3, 2, 0]
    with pytest.raises(GluingError):
        parse_triangulation(doc)


@pytest.mark.parametrize(
    "doc",
    [
        "not json",
        "[]",
        {"tetrahedra": 0, "gluings": []},
        {"tetrahedra": 1, "gluings": [[{"tet": 0, "perm": [0, 1, 2, 3]}] * 3]},
        {"tetrahedra": 1, "gluings": [[{"tet": 0, "perm": [0, 0, 2, 3]}] * 4]},
        {"tetrahedra": 1, "gluings": [[{"tet": 5, "perm": [0, 1, 2, 3]}] * 4]},
    ],
)
def test_schema_errors(doc):
    with pytest.raises(SchemaError):
        parse_triangulation(doc if isinstance(doc, dict) else doc)


def _orientable_by_brute_force(gluings) -> bool:
    n = len(gluings)
    for signs in product((1, -1), repeat=n):
        if all(
            signs[g["tet"]] == -signs[i] * perm_sign(g["perm"])
            for i, faces in enumerate(gluings)
            for g in faces
        ):
            return True
    return False


def test_gieseking_pattern_is_rejected():
    p = [1, 0, 3, 2]  # even, so a self-gluing by p reverses orientation
    gluings = [[{"tet": 0, "perm": p}] * 4]
    assert not _orientable_by_brute_force(gluings)
    with pytest.raises(OrientabilityError):
        parse_triangulation({"tetrahedra": 1, "gluings": gluings})


def test_fig8_orientable_by_brute_force(fig8):
    doc = _fig8_doc(fig8)
    assert _orientable_by_brute_force(doc["gluings"])
    assert fig8.orientation == (1, 1)


def test_fixture_curves(meridian, longitude):
    assert meridian.mu_vector == (1, 0, 0, 0, -1, 0)
    assert meridian.sign == 1
    assert meridian.nu_vector == (0, -1, 1, -1, 0, 1)
    assert longitude.mu_vector == (0, 0, 0, 2, -2, 0)
    assert longitude.nu_vector == (0, 0, 0, -2, -2, 4)


def test_path_errors(fig8, meridian):
    with pytest.raises(PathError):
        validate_curve(fig8, [])
    with pytest.raises(PathError):
        validate_curve(fig8, {"cusp": 0, "path": [{"tri": [0, 1], "in": 2, "out": 3}]})
    steps = list(meridian.steps)
    with pytest.raises(PathError):
        validate_curve(fig8, [steps[0], steps[0]])
    with pytest.raises(PathError):
        validate_curve(fig8, {"cusp": 1, "path": meridian.to_json()["path"]})
    with pytest.raises(PathError):
        validate_curve(fig8, [{"tri": [0, 1]}])


def _nu_from_mu(curve, n):
    return tuple(matvec(block_skew(n), curve.mu_vector))


def test_nu_is_mu_times_skew_transpose_on_random_paths(fig8):
    rng = random.Random(7)
    for _ in range(50):
        curve = validate_curve(fig8, random_closed_path(fig8, 0, rng))
        # mu C^T as a row vector is C mu as a column vector
        assert curve.nu_vector == _nu_from_mu(curve, 2)


def test_vertex_loops_give_matrix_rows(fig8, system):
    for k in range(len(fig8.cusps[0].vertices)):
        curve = validate_curve(fig8, vertex_loop(fig8, 0, k))
        raw = curve.raw_mu_vector
        assert any(raw == row or tuple(-x for x in raw) == row for row in system.A)
        assert any(curve.nu_vector == row or tuple(-x for x in curve.nu_vector) == row for row in system.B)


def test_find_peripheral_basis(fig8):
    a, b = find_peripheral_basis(fig8, 0, max_steps=8)
    ca, cb = validate_curve(fig8, a), validate_curve(fig8, b)
    assert ca.nu_vector == _nu_from_mu(ca, 2)
    assert cb.nu_vector == _nu_from_mu(cb, 2)


def test_perm_helpers():
    p = (2, 0, 3, 1)
    q = perm_inverse(p)
    assert tuple(q[p[i]] for i in range(4)) == (0, 1, 2, 3)
    assert perm_sign((0, 1, 2, 3)) == 1
    assert perm_sign((1, 0, 2, 3)) == -1
