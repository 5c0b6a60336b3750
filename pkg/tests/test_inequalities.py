import random
from fractions import Fraction

import pytest

from nilbm import inequalities as I
from nilbm.boxes import Box, BoxUnion
from nilbm.errors import HypothesisUnverified, HypothesisViolated, OutOfTheoremScope
from nilbm.group_law import DilationSpec, carnot_law, custom_law
from nilbm.lie_core import catalog
from nilbm.polynomial import Polynomial, variables
from nilbm.reports import FAILS, HOLDS, INCONCLUSIVE, RootOf, SumOfRootsPower, decide
from nilbm.set_arith import outer_product_set

from _support import boxes, cube, heis, random_union, zero_law


# -- verdict arithmetic --------------------------------------------------------------


def test_decide_exact_targets():
    t = SumOfRootsPower(Fraction(1), Fraction(1), 3)
    assert t.exact == 8
    v = decide(Fraction(8), Fraction(9), t)
    assert v.kind == HOLDS and v.margin == 0
    assert decide(Fraction(7), Fraction(15, 2), t).kind == FAILS
    assert decide(Fraction(7), Fraction(9), t).kind == INCONCLUSIVE


def test_decide_irrational_target_is_directed():
    t = SumOfRootsPower(Fraction(1, 100), Fraction(1, 50), 4)  # about 0.22969
    assert t.exact is None
    v = decide(Fraction(0), Fraction(22, 100), t)
    assert v.kind == FAILS and Fraction(2296, 10000) <= v.rhs_lo <= v.rhs_hi <= Fraction(2297, 10000)
    assert decide(Fraction(2297, 10000), Fraction(1), t).kind == HOLDS
    assert decide(Fraction(2296, 10000), Fraction(2297, 10000), t).kind == INCONCLUSIVE
    r = RootOf(Fraction(2), 2)
    assert decide(Fraction(141, 100), Fraction(142, 100), r).kind == INCONCLUSIVE
    assert decide(Fraction(1415, 1000), Fraction(2), r).kind == HOLDS


def test_sum_of_roots_exact_when_ratio_is_a_power():
    assert SumOfRootsPower(Fraction(1, 16), Fraction(1, 16), 3).exact == Fraction(1, 2)
    assert SumOfRootsPower(Fraction(16), Fraction(2), 3).exact == 54  # 2 * (2 + 1)^3
    assert SumOfRootsPower(Fraction(3), Fraction(2), 3).exact is None


def test_rootof_compare_exact():
    r = RootOf(Fraction(2), 2)
    assert r.compare(Fraction(3, 2)) == 1 and r.compare(Fraction(7, 5)) == -1


# -- Brunn-Minkowski -----------------------------------------------------------------


def test_bm_cube_holds():
    law, _ = heis()
    r = I.bm_verify(cube(), cube(), law, 3)
    assert r.kind == HOLDS and r.lower > 8
    assert r.tag == I.TAG_BM_TOPDIM
    d = r.to_dict()
    assert d["verdict"]["kind"] == "holds" and d["lower"]["value"] == str(r.lower)


def test_bm_thin_slab_fails_at_homogeneous_exponent():
    law, _ = heis()
    A = I.slab(Fraction(1, 10))
    r = I.bm_verify(A, A, law, 4)
    assert r.kind == FAILS
    assert r.upper < Fraction(16, 100)
    assert abs(r.upper - Fraction(201, 2500)) < Fraction(1, 10**6)
    assert r.tag == I.TAG_BM_HOMOG


def test_bm_abelian_equality_case():
    law = zero_law(3)
    r = I.bm_verify(cube(), cube(), law, 3)
    assert r.kind == HOLDS and r.verdict.margin == 0
    r2 = I.bm_verify(cube(2), cube(2, 0, 2), zero_law(2), 2)
    assert r2.kind == HOLDS and r2.lower == 9


def test_bm_never_fails_at_topological_dimension():
    law, _ = heis()
    rng = random.Random(77)
    for _ in range(15):
        A, B = random_union(rng, 3), random_union(rng, 3)
        assert I.bm_verify(A, B, law, 3, max_depth=3).kind != FAILS


def test_bm_budget_gives_inconclusive():
    law, _ = heis()
    A = I.slab("1/10")
    r = I.bm_verify(A, A, law, 3, tol="1/100000", max_depth=8, budget=50)
    assert r.kind == INCONCLUSIVE and "budget" in r.extra["note"]
    assert r.lower is not None and r.lower < Fraction(8, 100) < r.upper
    none = I.bm_verify(A, A, law, 3, budget=0)
    assert none.kind == INCONCLUSIVE and none.lower is None
    assert I.bm_verify(A, A, law, 3, tol="1/100000", max_depth=8, budget=500).kind == HOLDS


def test_bm_exponent_validation():
    with pytest.raises(ValueError):
        I.bm_verify(cube(), cube(), heis()[0], 0)


def test_euclidean_examples():
    assert I.bm_euclidean_check(cube(), cube(), 3).verdict.margin == 0
    r = I.bm_euclidean_check(cube(2), cube(2, 0, 2), 2)
    assert r.lower == 9 and r.verdict.margin == 0
    A = boxes(((0, 1), (0, 1)), ((2, 3), (0, 1)))
    r = I.bm_euclidean_check(A, cube(2), 2)
    assert r.kind == HOLDS and r.verdict.margin > 0


# -- cylinders, sharpness -----------------------------------------------------------


def test_cylinder_strict_cube():
    law, _ = heis()
    sq, seg = cube(2), cube(1)
    r = I.cylinder_strict(sq, seg, sq, seg, law)
    assert r.strict and r.sum_volume == 8 and r.product_lower > 8
    assert "/2" in r.to_dict()["convention"]


def test_cylinder_hypotheses():
    law, _ = heis()
    pt = BoxUnion.of(Box((0, 0), (0, 0)))
    with pytest.raises(HypothesisViolated):
        I.cylinder_strict(pt, cube(1), cube(2), cube(1), law)
    flat = BoxUnion.of(Box((0,), (0,)))
    plane = BoxUnion.of(Box((0, 0), (0, 1)))
    with pytest.raises(OutOfTheoremScope):
        I.cylinder_strict(plane, flat, plane, flat, law)


def test_sharpness_scan_rows():
    law, spec = heis()
    rows = I.sharpness_scan(law, spec, ["1/10", "1/4", "1"])
    assert [r.kind for r in rows[:2]] == [FAILS, FAILS]
    table = I.sharpness_csv_rows(rows)
    assert table[0] == list(I.SHARPNESS_COLUMNS)
    assert table[1][0] == "1/10" and table[1][-1] == "fails"
    assert table[3][3] == "16"  # rhs exact for eps = 1
    with pytest.raises(ValueError):
        I.sharpness_scan(law, spec, ["0"])


# -- reduction lemma --------------------------------------------------------------------


def test_selector_endpoints():
    I_, J = (Fraction(0), Fraction(1)), (Fraction(2), Fraction(5))
    assert I.selector(2, I_, J) == (0, 2)
    assert I.selector(6, I_, J) == (1, 5)
    z1, w1 = I.selector(4, I_, J)
    assert z1 + w1 == 4 and 0 <= z1 <= 1 and 2 <= w1 <= 5


def test_reduction_abelian_equality():
    law = zero_law(3)
    r = I.lemma31_verify((0, 1), (0, 2), cube(2), cube(2), law)
    assert r.inequality and r.equality_checked and r.equality
    assert r.full_lower == 12 == r.sum_length * r.tail_lower


def test_reduction_independent_custom_law():
    v = variables(6)
    law = custom_law(3, [Polynomial.constant(6, 0), Polynomial.constant(6, 0), v[1] * v[4]])
    r = I.lemma31_verify((0, 1), (0, 1), cube(2), cube(2), law, tol="1/50")
    assert r.equality_checked and r.equality and r.inequality


def test_reduction_heisenberg_inequality():
    law, _ = heis()
    r = I.lemma31_verify((0, 1), (0, 1), cube(2), cube(2), law, tol="1/10", max_depth=4)
    assert r.inequality and not r.equality_checked
    assert len(r.grid) == 5
    assert r.to_dict()["inequality"] is True


# -- Prekopa-Leindler -------------------------------------------------------------------


def test_step_function_basics():
    f = I.StepFunction(1, [(Box((0,), (1,)), 2), (Box((1,), (3,)), Fraction(1, 2))])
    assert f.integral() == 3
    with pytest.raises(ValueError):
        I.StepFunction(1, [(Box((0,), (2,)), 1), (Box((1,), (3,)), 1)])
    with pytest.raises(ValueError):
        I.StepFunction(1, [(Box((0,), (1,)), -1)])
    g = I.StepFunction.from_dict(f.to_dict())
    assert g.pieces == f.pieces


def test_pl_equality_case():
    f = I.StepFunction(1, [(Box((0,), (1,)), 1)])
    h = I.StepFunction(1, [(Box((0,), (2,)), 1)])
    r = I.pl_verify(f, f, h, "1/2", zero_law(1))
    assert r.hypothesis == "verified"
    assert r.kind == HOLDS and r.verdict.margin == 0 and r.lhs == 2


def test_pl_zero_function():
    zero = I.StepFunction(1, [])
    h = I.StepFunction(1, [])
    r = I.pl_verify(zero, zero, h, "1/3", zero_law(1))
    assert r.kind == HOLDS and r.lhs == 0


def test_pl_unverified_hypothesis():
    f = I.StepFunction(1, [(Box((0,), (1,)), 1)])
    h = I.StepFunction(1, [(Box((0,), (1,)), 1)])  # too small a support
    r = I.pl_verify(f, f, h, "1/2", zero_law(1))
    assert r.hypothesis == "unverified" and r.kind == INCONCLUSIVE
    with pytest.raises(HypothesisUnverified):
        I.pl_verify(f, f, h, "1/2", zero_law(1), raise_unverified=True)


def test_pl_heisenberg_outer_set():
    law, _ = heis()
    f = I.StepFunction.indicator(cube())
    outer = outer_product_set(cube(), cube(), law, 0).to_box_union()
    h = I.StepFunction.indicator(outer)
    r = I.pl_verify(f, f, h, "1/2", law)
    assert r.hypothesis == "verified" and r.kind == HOLDS
    assert r.lhs == 12  # constant 2^3 * 2^3 = 64, so right side is 8


def test_pl_weighted_values():
    f = I.StepFunction(1, [(Box((0,), (1,)), 4)])
    g = I.StepFunction(1, [(Box((0,), (1,)), 1)])
    h = I.StepFunction(1, [(Box((0,), (2,)), 2)])
    # need h >= 4^(1/2) * 1^(1/2) = 2 on [0, 2]: holds with equality
    r = I.pl_verify(f, g, h, "1/2", zero_law(1))
    assert r.hypothesis == "verified" and r.kind == HOLDS


def test_alpha_range():
    f = I.StepFunction(1, [])
    with pytest.raises(ValueError):
        I.pl_verify(f, f, f, 1, zero_law(1))


# -- Carnot corollaries ---------------------------------------------------------------


def test_carnot_additive_dilated_volumes():
    law, spec = heis()
    r = I.carnot_bm(cube(), cube(), "1/2", law, spec, "additive")
    assert r.kind == HOLDS
    assert r.extra["dilated_volume_A"] == Fraction(1, 16) == r.extra["dilated_volume_B"]


def test_carnot_multiplicative():
    law, spec = heis()
    r = I.carnot_bm(cube(), cube(), "1/2", law, spec, "multiplicative")
    assert r.kind == HOLDS and r.tag == I.TAG_CARNOT_MUL


def test_carnot_abelian_equality():
    law = zero_law(2)
    spec = DilationSpec((1, 1))
    r = I.carnot_bm(cube(2), cube(2), "1/3", law, spec)
    # (2/3)A + (1/3)A = A for a convex box, so both sides equal 1
    assert r.kind == HOLDS and r.verdict.margin == 0


def test_carnot_bad_form():
    law, spec = heis()
    with pytest.raises(ValueError):
        I.carnot_bm(cube(), cube(), "1/2", law, spec, "cubic")


def test_order_compare():
    law, _ = heis()
    out = I.bm_order_compare(cube(), I.slab("1/10"), law)
    assert out["AB"].kind != FAILS and out["BA"].kind != FAILS
    assert out["min_side_check"]
    ab = I.bm_order_compare(cube(), random_union(random.Random(1), 3), zero_law(3))
    assert ab["lower_AB"] == ab["lower_BA"]


def test_engel_bm_topological_dimension():
    law, _ = carnot_law(catalog("engel"))
    A = BoxUnion.of(Box.cube(4))
    r = I.bm_verify(A, A, law, 4, max_depth=2)
    assert r.kind != FAILS
