import json
import random
from fractions import Fraction

import pytest

from nilbm import group_law as G
from nilbm.errors import DimensionMismatch, NonpositiveLambda
from nilbm.interval import Interval, IntervalBox
from nilbm.lie_core import catalog
from nilbm.polynomial import Polynomial, variables

from _support import CATALOG_INSTANCES, heis, plane_law

half = Fraction(1, 2)


def test_heisenberg_closed_form():
    law, spec = heis()
    z1, z2, z3, w1, w2, w3 = variables(6)
    assert law.polys[0].is_zero() and law.polys[1].is_zero()
    assert law.polys[2] == half * (z1 * w2 - z2 * w1)
    assert law.describe()[2] == "P3 = 1/2*z1*w2 - 1/2*z2*w1"
    assert spec.weights == (1, 1, 2) and spec.Q == 4


def test_abelian_law_is_zero():
    law = G.derive_bch(catalog("abelian(3)"))
    assert all(p.is_zero() for p in law.polys)
    assert G.eval_law(law, (1, 2, 3), (4, 5, 6)) == (5, 7, 9)


def test_engel_third_order_terms():
    law, _ = G.carnot_law(catalog("engel"))
    z1, z2, z3, z4, w1, w2, w3, w4 = variables(8)
    assert law.polys[2] == half * (z1 * w2 - z2 * w1)
    expected = (half * (z1 * w3 - z3 * w1)
                + Fraction(1, 12) * (z1 * z1 * w2 - z1 * z2 * w1 - z1 * w1 * w2 + z2 * w1 * w1))
    assert law.polys[3] == expected


def test_word_coefficients_low_order():
    # log(e^X e^Y) = X + Y + 1/2 [X,Y] + 1/12 [X,[X,Y]] - 1/12 [Y,[X,Y]] + ...
    # weights attach to right-nested words; [Y,X] = -[X,Y] folds two words together
    c = G._word_coefficient
    assert c((0, 1)) - c((1, 0)) == half
    assert c((0, 0, 1)) - c((0, 1, 0)) == Fraction(1, 12)
    assert c((1, 0, 1)) - c((1, 1, 0)) == Fraction(-1, 12)


@pytest.mark.parametrize("name", CATALOG_INSTANCES)
def test_structure_of_catalog_laws(name):
    law, _ = G.carnot_law(catalog(name))
    assert G.verify_triangular(law)
    assert G.verify_first_layer(law)
    assert G.verify_associativity(law, samples=200)


def test_triangular_violation():
    v = variables(4)
    law = G.custom_law(2, [Polynomial.constant(4, 0), v[1] * v[2]])  # P2 uses z2
    res = G.verify_triangular(law)
    assert not res and res.offending == (2, "z2")


def test_first_layer_violation():
    v = variables(6)
    law = G.custom_law(3, [Polynomial.constant(6, 0), v[0] * v[3], v[0] * v[4]])
    assert law.n1 == 2
    assert G.verify_first_layer(law)
    res = G.verify_first_layer(law, n1=1)
    assert not res and res.offending == 2


def test_inverse_and_identity_rational_points():
    rng = random.Random(5)
    for name in ("heisenberg(1)", "engel", "free23"):
        law, _ = G.carnot_law(catalog(name))
        for _ in range(5):
            z = tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(law.d))
            assert G.eval_law(law, z, tuple(-x for x in z)) == (0,) * law.d
            assert G.eval_law(law, z, (0,) * law.d) == z


def test_eval_heisenberg_example():
    law, _ = heis()
    assert G.eval_law(law, (1, 0, 0), (0, 1, 0)) == (1, 1, half)
    with pytest.raises(DimensionMismatch):
        G.eval_law(law, (1, 0), (0, 1, 0))


def test_interval_evaluation():
    law, _ = heis()
    unit = IntervalBox([Interval(0, 1)] * 3)
    out = G.eval_interval(law, unit, unit)
    assert out[2] == Interval(-half, Fraction(5, 2))
    assert out[0] == Interval(0, 2)
    p = IntervalBox.point((1, 2, 3))
    q = IntervalBox.point((3, 1, 0))
    got = G.eval_interval(law, p, q)
    assert tuple(iv.lo for iv in got) == G.eval_law(law, (1, 2, 3), (3, 1, 0))


def test_interval_evaluation_encloses_samples():
    rng = random.Random(11)
    law, _ = G.carnot_law(catalog("engel"))
    Z = IntervalBox([Interval(-1, Fraction(1, 2))] * 4)
    W = IntervalBox([Interval(0, 2)] * 4)
    box = G.eval_interval(law, Z, W)
    for _ in range(100):
        z = [Fraction(rng.randint(-8, 4), 8) for _ in range(4)]
        w = [Fraction(rng.randint(0, 16), 8) for _ in range(4)]
        assert box.contains(G.eval_law(law, z, w))


def test_dilations():
    law, spec = heis()
    assert G.dilate(spec, 1, (3, 4, 5)) == (3, 4, 5)
    assert G.dilate(spec, 2, (1, 1, 1)) == (2, 2, 4)
    assert G.dilation_determinant(spec, 2) == 16
    assert G.verify_dilation_automorphism(law, spec)
    with pytest.raises(NonpositiveLambda):
        G.dilate(spec, 0, (1, 1, 1))


def test_dilation_counterexample_for_non_graded_law():
    res = G.verify_dilation_automorphism(plane_law(), G.DilationSpec((1, 1)))
    assert not res
    assert res.offending["coordinate"] == 2


@pytest.mark.parametrize("name", ["abelian(3)", "heisenberg(2)", "engel", "free23", "free(3,2)"])
def test_dilation_automorphism_catalog(name):
    law, spec = G.carnot_law(catalog(name))
    assert G.verify_dilation_automorphism(law, spec)


def test_associativity_fault_injection():
    law = G.derive_bch(catalog("engel"), depth=2)
    res = G.verify_associativity(law, samples=100)
    assert not res


def test_associativity_symbolic_heisenberg():
    law, _ = heis()
    assert G.verify_associativity(law, symbolic=True)


def test_translation_jacobian():
    law, _ = heis()
    assert G.translation_jacobian(law, (Fraction(3), Fraction(-2), 7)) == 1
    j = G.translation_jacobian(law)
    assert isinstance(j, Polynomial) and j == Polynomial.constant(6, 1)
    assert G.translation_jacobian(G.derive_bch(catalog("abelian(2)")), (1, 1)) == 1
    assert G.translation_jacobian(plane_law(), (2, 5)) == 1


def test_freeze_first():
    law, _ = heis()
    red = G.freeze_first(law, 2, 3)
    z2, z3, w2, w3 = variables(4)
    assert red.d == 2
    assert red.polys[1] == half * (2 * w2 - 3 * z2)
    assert red.polys[0].is_zero()


def test_law_json_round_trip(tmp_path):
    for name in ("heisenberg(1)", "engel"):
        law, _ = G.carnot_law(catalog(name))
        doc = json.loads(G.dump_law(law))
        back = G.law_from_dict(doc)
        assert back.polys == law.polys and back.weights == law.weights
        assert G.law_digest(back) == G.law_digest(law)
    with pytest.raises(ValueError):
        G.law_from_dict({"dim": 2})


def test_digest_distinguishes_laws():
    a = G.law_digest(heis()[0])
    b = G.law_digest(G.derive_bch(catalog("abelian(3)")))
    assert a != b and len(a) == 64


def test_custom_law_shape_checks():
    with pytest.raises(DimensionMismatch):
        G.ProductLaw(2, 0, (Polynomial(4),))
    with pytest.raises(DimensionMismatch):
        G.custom_law(2, [Polynomial(3), Polynomial(3)])
