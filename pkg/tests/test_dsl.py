import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ggmorrey.dsl import (
    BinOp,
    Call,
    EvalDomainError,
    FamilySpec,
    Neg,
    Num,
    ParseError,
    Var,
    evaluate,
    family_to_ast,
    parse,
    unparse,
)


def test_unary_minus_binds_looser_than_power():
    assert parse("-x^2") == Neg(BinOp("^", Var("x"), Num(2.0)))
    assert evaluate(parse("-x^2"), [3.0]) == -9.0


def test_power_is_right_associative():
    assert parse("2^3^2") == BinOp("^", Num(2.0), BinOp("^", Num(3.0), Num(2.0)))
    assert evaluate(parse("2^3^2"), [0.0]) == 512.0


def test_precedence_and_left_associativity():
    assert evaluate(parse("1 - 2 - 3"), [0.0]) == -4.0
    assert evaluate(parse("8 / 4 / 2"), [0.0]) == 1.0
    assert evaluate(parse("1 + 2 * 3"), [0.0]) == 7.0
    assert evaluate(parse("(1 + 2) * 3"), [0.0]) == 9.0
    assert evaluate(parse("2^-1"), [0.0]) == 0.5


def test_negative_literal_folds():
    assert parse("-0.5") == Num(-0.5)
    assert unparse(Num(-0.5)) == "(-0.5)"


def test_numbers_and_functions():
    pts = np.array([[0.25], [0.5]])
    np.testing.assert_allclose(evaluate(parse("1e-1 * x + .5"), pts), [0.525, 0.55])
    assert evaluate(parse("pow(x, 2) + min(x, 1) + max(x, 0)"), [2.0]) == 4 + 1 + 2
    assert evaluate(parse("step(x)"), [0.0]) == 1.0
    assert evaluate(parse("step(x)"), [-1e-300]) == 0.0
    assert evaluate(parse("ln(exp(x))"), [0.7]) == pytest.approx(0.7)
    assert evaluate(parse("sin(x)^2 + cos(x)^2"), [1.3]) == pytest.approx(1.0)


def test_two_dimensional_variables():
    node = parse("x1 * x2 - abs(x1)", dim=2)
    np.testing.assert_allclose(evaluate(node, np.array([[2.0, 3.0], [-1.0, 1.0]])), [4.0, -2.0])


@pytest.mark.parametrize(
    "text, dim, offset",
    [
        ("x +", 1, 3),
        ("foo(x)", 1, 0),
        ("y", 1, 0),
        ("x1", 1, 0),
        ("x", 2, 0),
        ("ln(x, 2)", 1, 0),
        ("pow(x)", 1, 0),
        ("(x", 1, 2),
        ("x $ 2", 1, 2),
        ("", 1, 0),
        ("x 2", 1, 2),
    ],
)
def test_parse_errors_carry_offsets(text, dim, offset):
    with pytest.raises(ParseError) as exc:
        parse(text, dim)
    assert exc.value.offset == offset


@pytest.mark.parametrize(
    "text, point",
    [("ln(x)", 0.0), ("ln(x)", -1.0), ("1/x", 0.0), ("x^(-1)", 0.0), ("x^0.5", -2.0)],
)
def test_evaluation_domain_errors(text, point):
    with pytest.raises(EvalDomainError) as exc:
        evaluate(parse(text), np.array([[1.0], [point]]))
    assert exc.value.point == (point,)


def test_integer_power_of_negative_base_is_fine():
    assert evaluate(parse("x^3"), [-2.0]) == -8.0


NAMES = ["abs", "ln", "exp", "sin", "cos", "step"]


def _ast(dim):
    var_names = ["x"] if dim == 1 else ["x1", "x2"]
    leaves = st.one_of(
        st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False).map(Num),
        st.sampled_from(var_names).map(Var),
    )

    def extend(children):
        return st.one_of(
            children.map(Neg),
            st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda t: BinOp(*t)),
            st.tuples(st.sampled_from(NAMES), children).map(lambda t: Call(t[0], (t[1],))),
            st.tuples(st.sampled_from(["pow", "min", "max"]), children, children).map(
                lambda t: Call(t[0], (t[1], t[2]))
            ),
        )

    return st.recursive(leaves, extend, max_leaves=12)


def _normal(node):
    # the parser folds unary minus on a literal (even a parenthesized one) into it
    if isinstance(node, Neg):
        inner = _normal(node.operand)
        return Num(-inner.value) if isinstance(inner, Num) else Neg(inner)
    if isinstance(node, BinOp):
        return BinOp(node.op, _normal(node.left), _normal(node.right))
    if isinstance(node, Call):
        return Call(node.name, tuple(_normal(a) for a in node.args))
    return node


@settings(max_examples=300, deadline=None)
@given(dim=st.sampled_from([1, 2]), data=st.data())
def test_unparse_parse_round_trip(dim, data):
    node = data.draw(_ast(dim))
    text = unparse(node)
    again = parse(text, dim)
    assert again == _normal(node)
    canonical = unparse(again)
    assert unparse(parse(canonical, dim)) == canonical


@pytest.mark.parametrize("text", ["-x^2", "2^3^2", "1-2-3", "-(-x)", "abs(x-0.5)^(-0.3)", "x*-2"])
def test_canonical_text_is_idempotent(text):
    once = unparse(parse(text))
    assert unparse(parse(once)) == once


@pytest.mark.parametrize(
    "spec, dim, lo, hi",
    [
        (FamilySpec.power(0.45), 1, 0.0, 1.0),
        (FamilySpec.power(0.3, 0.4), 1, 0.0, 1.0),
        (FamilySpec.power(0.7, (0.2, 0.6)), 2, 0.0, 1.0),
        (FamilySpec.indicator(0.25, 0.5), 1, 0.0, 1.0),
        (FamilySpec.indicator((0.1, 0.4), (0.3, 0.9)), 2, 0.0, 1.0),
        (FamilySpec.oscillatory(13.0), 1, -3.0, 3.0),
        (FamilySpec.oscillatory(2.5), 2, -3.0, 3.0),
        (FamilySpec.constant(-2.5), 2, 0.0, 1.0),
    ],
)
def test_family_equals_expression_exactly(spec, dim, lo, hi):
    pts = np.random.default_rng(7).uniform(lo, hi, size=(1000, dim))
    # exercise the indicator's closed-boundary convention too
    if spec.name == "indicator":
        pts[:2] = [[a for a, _ in spec.params["bounds"]], [b for _, b in spec.params["bounds"]]]
    a = spec(pts)
    b = evaluate(family_to_ast(spec, dim), pts)
    assert np.array_equal(a, b)
    assert np.array_equal(b, evaluate(parse(unparse(family_to_ast(spec, dim)), dim), pts))


def test_family_validation_and_singular_points():
    with pytest.raises(ValueError):
        FamilySpec.indicator(0.5, 0.5)
    with pytest.raises(ValueError):
        FamilySpec("gaussian", {})
    assert FamilySpec.power(0.5, 0.2).singular_points == [(0.2,)]
    assert FamilySpec.power(-1.0).singular_points == []
    assert FamilySpec.constant(1).singular_points == []


def test_single_point_returns_float():
    v = evaluate(parse("x^2"), 3.0)
    assert isinstance(v, float) and v == 9.0
    assert math.isclose(evaluate(parse("x1+x2", 2), [1.0, 2.0]), 3.0)
