import random
from fractions import Fraction

import pytest

from weightings import expr as ex
from weightings import jets as jt
from weightings.expr import parse_expr
from weightings.fields import lie_bracket, vf_for_weights
from weightings.jets import (JP_ZERO, dilation, epsilon_shift, evaluate_jet,
                             jet_bracket, jet_lift, jet_point, jp_add,
                             jp_evaluate, jp_mul, jp_scale, jp_slot,
                             reparam, reparam_compose, reparametrize,
                             tm_translate, vf_lift)
from weightings.weights import weight_sequence

from conftest import rand_poly_expr, rand_rational


def _rand_point(rng, names, r):
    return jet_point(names, [[rand_rational(rng) for _ in range(r + 1)]
                             for _ in names])


def _rand_vf(rng, names, order):
    W = weight_sequence({n: 1 for n in names}, max(order, 1))
    coeffs = [rand_poly_expr(rng, names, max_degree=2, max_terms=2)
              for _ in names]
    return vf_for_weights(W, coeffs)


def test_evaluate_jet_basic():
    u = jet_point(("x",), [(0, 1, 0)])
    assert evaluate_jet(parse_expr("x"), u).coeffs == (0, 1, 0)
    c = evaluate_jet(parse_expr("5"), u)
    assert c.coeffs == (5, 0, 0)
    with pytest.raises(ValueError, match="not polynomial"):
        evaluate_jet(parse_expr("sin(x)"), u)


def test_jet_lift_level_one_is_total_differential():
    rng = random.Random(61)
    names = ("x1", "x2")
    for _ in range(20):
        f = rand_poly_expr(rng, names)
        lifted = jet_lift(f, 1, 3, names)
        expected = JP_ZERO
        for a, name in enumerate(names):
            partial = ex.differentiate(f, name)
            base = _expr_to_slot0(partial, names)
            expected = jp_add(expected, jp_mul(base, jp_slot(a, 1)))
        assert lifted == expected


def _expr_to_slot0(f, names):
    """Polynomial expression in chart variables as a level-0 slot polynomial."""
    return jet_lift(f, 0, 0, names)


def test_jet_lift_product_example():
    got = jet_lift(parse_expr("x1*x2"), 2, 2, ("x1", "x2"))
    expected = jp_add(
        jp_mul(jp_slot(0, 0), jp_slot(1, 2)),
        jp_mul(jp_slot(0, 1), jp_slot(1, 1)),
        jp_mul(jp_slot(0, 2), jp_slot(1, 0)))
    assert got == expected


def test_jet_lift_cube_example():
    got = jet_lift(parse_expr("x^3"), 3, 3, ("x",))
    expected = jp_add(
        jp_scale(jp_mul(jp_mul(jp_slot(0, 0), jp_slot(0, 0)), jp_slot(0, 3)), 3),
        jp_scale(jp_mul(jp_mul(jp_slot(0, 0), jp_slot(0, 1)), jp_slot(0, 2)), 6),
        jp_mul(jp_mul(jp_slot(0, 1), jp_slot(0, 1)), jp_slot(0, 1)))
    assert got == expected


def test_jet_lift_oracle_equivalence():
    rng = random.Random(67)
    names = ("x1", "x2", "x3")
    for _ in range(40):
        r = rng.randint(1, 4)
        f = rand_poly_expr(rng, names)
        u = _rand_point(rng, names, r)
        series = evaluate_jet(f, u)
        values = u.slot_map()
        for i in range(r + 1):
            assert series.coeffs[i] == jp_evaluate(
                jet_lift(f, i, r, names), values)


def test_product_rule():
    rng = random.Random(71)
    names = ("x1", "x2", "x3")
    for _ in range(100):
        r = rng.randint(1, 4)
        f = rand_poly_expr(rng, names, max_degree=3)
        g = rand_poly_expr(rng, names, max_degree=3)
        i = rng.randint(0, r)
        lhs = jet_lift(ex.mul(f, g), i, r, names)
        rhs = JP_ZERO
        for j in range(i + 1):
            rhs = jp_add(rhs, jp_mul(jet_lift(f, j, r, names),
                                     jet_lift(g, i - j, r, names)))
        assert lhs == rhs


def test_lift_derivation_law():
    rng = random.Random(73)
    names = ("x1", "x2")
    for _ in range(50):
        r = rng.randint(1, 3)
        X = _rand_vf(rng, names, r)
        f = rand_poly_expr(rng, names, max_degree=3)
        i = rng.randint(0, r)
        ell = rng.randint(0, r)
        xi = vf_lift(X, i, r)
        lhs = jt.jvf_apply(xi, jet_lift(f, ell, r, names))
        xf = ex.add(*[ex.mul(c, ex.differentiate(f, v))
                      for v, c in zip(names, X.coeff_exprs())])
        rhs = jet_lift(xf, ell - i, r, names) if ell >= i else JP_ZERO
        assert lhs == rhs


def test_coordinate_lift():
    W = weight_sequence({"x1": 1, "x2": 1}, 1)
    X = vf_for_weights(W, [ex.ONE, ex.ZERO])
    for r in (1, 2, 3):
        for j in range(r + 1):
            xi = vf_lift(X, j, r)
            assert xi.terms == (((0, j), jt.JP_ONE),)


def test_vf_lift_example():
    W = weight_sequence({"x1": 1, "x2": 2}, 2)
    X = vf_for_weights(W, [ex.ZERO, parse_expr("x1")])
    xi = vf_lift(X, 1, 2)
    assert xi.terms == (((1, 1), jp_slot(0, 0)), ((1, 2), jp_slot(0, 1)))


def test_bracket_relation():
    rng = random.Random(79)
    names = ("x1", "x2", "x3")
    for _ in range(100):
        r = rng.randint(1, 4)
        X = _rand_vf(rng, names, r)
        Y = _rand_vf(rng, names, r)
        i = rng.randint(0, r)
        j = rng.randint(0, r)
        lhs = jet_bracket(vf_lift(X, i, r), vf_lift(Y, j, r))
        if i + j > r:
            assert lhs.is_zero
        else:
            assert lhs == vf_lift(lie_bracket(X, Y), i + j, r)


def test_bracket_antisymmetry():
    rng = random.Random(83)
    names = ("x1", "x2")
    X = _rand_vf(rng, names, 2)
    xi = vf_lift(X, 1, 2)
    assert jet_bracket(xi, xi).is_zero


def test_reparametrize_examples():
    u = jet_point(("x",), [(0, 1, 0)])
    moved = reparametrize(u, reparam([1, 1], order=2))
    assert moved.values == ((0, 1, 1),)
    assert reparametrize(u, reparam([1, 0], order=2)) == u
    # pure dilation scales slot j by t^j
    u2 = jet_point(("x", "y"), [(1, 2, 3), (0, 1, 0)])
    d = reparametrize(u2, dilation(Fraction(1, 2), 2))
    assert d.values == ((1, 1, Fraction(3, 4)), (0, Fraction(1, 2), 0))


def test_reparametrize_monoid_law():
    rng = random.Random(89)
    names = ("x", "y")
    for _ in range(50):
        r = rng.randint(1, 4)
        u = _rand_point(rng, names, r)
        p1 = reparam([rand_rational(rng) for _ in range(r)])
        p2 = reparam([rand_rational(rng) for _ in range(r)])
        lhs = reparametrize(reparametrize(u, p1), p2)
        rhs = reparametrize(u, reparam_compose(p2, p1))
        assert lhs == rhs


def test_grading_of_lifts():
    rng = random.Random(97)
    names = ("x1", "x2")
    for _ in range(30):
        r = rng.randint(1, 3)
        f = rand_poly_expr(rng, names, max_degree=3)
        i = rng.randint(0, r)
        u = _rand_point(rng, names, r)
        t = Fraction(rng.randint(1, 5), rng.randint(1, 3))
        scaled = reparametrize(u, dilation(t, r))
        lifted = jet_lift(f, i, r, names)
        assert jp_evaluate(lifted, scaled.slot_map()) == \
            t ** i * jp_evaluate(lifted, u.slot_map())


def test_tm_translate():
    u = jet_point(("x",), [(0, 1, 0)])
    assert tm_translate(u, (0,), (0,)) == u
    assert tm_translate(u, (0,), (5,)).values == ((0, 1, 5),)
    two = tm_translate(tm_translate(u, (0,), (2,)), (0,), (3,))
    assert two == tm_translate(u, (0,), (5,))
    with pytest.raises(ValueError, match="base"):
        tm_translate(u, (1,), (5,))


def test_epsilon_shift():
    rng = random.Random(101)
    names = ("x1", "x2")
    X = _rand_vf(rng, names, 3)
    for r in (2, 3):
        for i in range(r):
            assert epsilon_shift(vf_lift(X, i, r), r) == vf_lift(X, i + 1, r)
        assert epsilon_shift(vf_lift(X, r, r), r).is_zero


def test_jet_point_text_round_trip():
    u = jet_point(("x", "y"),
                  [(0, 1, 0), (0, 2, 5)])
    text = jt.jet_point_text(u)
    assert text == "x=0:0,1:1,2:0; y=0:0,1:2,2:5"
    assert jt.parse_jet_point(text) == u
    fancy = jt.parse_jet_point("x=0:1/2,1:-3")
    assert fancy.values == ((Fraction(1, 2), Fraction(-3)),)
    with pytest.raises(ValueError, match="missing slot"):
        jt.parse_jet_point("x=0:1,2:0")


def test_parse_reparametrization():
    psi = jt.parse_reparametrization("psi=1*e+1*e^2")
    assert psi == reparam([1, 1])
    assert jt.parse_reparametrization("e - 1/2*e^3") == \
        reparam([1, 0, Fraction(-1, 2)])
    assert jt.parse_reparametrization("2*e", order=3) == reparam([2, 0, 0])
    with pytest.raises(ValueError, match="malformed"):
        jt.parse_reparametrization("psi=e^2 + q")
