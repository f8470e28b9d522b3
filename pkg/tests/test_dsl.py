import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import json

import pytest

from backend.dsl import EvalContext, evaluate_expression, load_environment, parse_expression, to_text
from backend.errors import ArityError, BadValence, DslSyntaxError, FnsError, UnboundSymbol, UnknownOperator
from backend.fields import parse_field


def F(text, chart):
    return parse_field(text, chart)


def test_parse_operator_application():
    """gp1(p1*dq1, p1*p2) parses to an application with two arguments."""
    ast = parse_expression("gp1(p1*dq1, p1*p2)")
    assert ast.kind == "apply" and ast.value == "gp1"
    assert len(ast.args) == 2
    assert ast.args[0].value == "*"


def test_parse_round_trip_whitespace():
    """Printing a parsed expression only drops whitespace."""
    ast = parse_expression("FN( h(K) , h(L) ) + 2 * -(dq1 ^ dq2)")
    assert to_text(ast) == "FN(h(K),h(L))+2*-(dq1^dq2)"
    assert parse_expression(to_text(ast)) == parse_expression("FN(h(K),h(L))+2*-(dq1^dq2)")


def test_parse_error_position():
    """d( fails at offset 2."""
    with pytest.raises(DslSyntaxError) as excinfo:
        parse_expression("d(")
    assert excinfo.value.position == 2


def test_parse_unknown_operator_and_arity():
    """Unknown operator names and wrong argument counts."""
    with pytest.raises(UnknownOperator):
        parse_expression("foo(q1)")
    with pytest.raises(ArityError):
        parse_expression("d(q1, q2)")
    with pytest.raises(DslSyntaxError):
        parse_expression("q1 $ q2")


def test_counterexample_bracket(cot2):
    """gp1(p1*dq1, p1*p2) = p2 dp1 and its differential is -dp1^dp2."""
    assert evaluate_expression("gp1(p1*dq1, p1*p2)") == F("p2*dp1", cot2)
    assert evaluate_expression("d(gp1(p1*dq1, p1*p2))") == F("-dp1^dp2", cot2)


def test_fn_bracket_of_field_with_itself(base2):
    """FN(X, X) = 0 for a bound vector field."""
    X = F("q2*v1 + q1*v2", base2)
    assert evaluate_expression("FN(X, X)", {"X": X}).is_zero()


def test_unicode_aliases(base2):
    """∧, ⊗ and ∨ are accepted."""
    assert evaluate_expression("dq1∧dq2") == F("dq1^dq2", base2)
    assert evaluate_expression("dq1⊗v1∨v2") == F("dq1|v1.v2", base2)


def test_base_operators(base2):
    """Insertion, Schouten and extended insertion on the base chart."""
    assert evaluate_expression("i(v1, dq1^dq2)") == F("dq2", base2)
    assert evaluate_expression("SCH(v1.v1, q1^2)") == F("4*q1*v1", base2)
    assert evaluate_expression("XI(v1.v2, q1*dq1)") == F("q1*v2", base2)
    assert evaluate_expression("NB(v1, q1*v2)") == F("v2", base2)


def test_lifts(base2, cot2):
    """h, pb and pbinv move between the charts."""
    assert evaluate_expression("h(v1)") == F("vq1", cot2)
    assert evaluate_expression("pb(q1*v1.v2)") == F("q1*p1*p2", cot2)
    assert evaluate_expression("pbinv(p1*p2*dq1, 2)") == F("dq1|v1.v2", base2)
    assert evaluate_expression("L(I(), pb(v1.v2))") == F("2*p1*p2", cot2)


def test_pbinv_needs_literal_degree():
    """The tensor degree of pbinv is a non-negative integer."""
    with pytest.raises(BadValence):
        evaluate_expression("pbinv(p1*dq1, q1)")


def test_base_forms_pull_back_when_mixed(cot2):
    """Base scalar forms meet cotangent fields through π*."""
    assert evaluate_expression("q1*dq1 + p1*dq1") == F("q1*dq1 + p1*dq1", cot2)


def test_division(base2):
    """Division by numbers scales; division by fields is rejected."""
    assert evaluate_expression("dq1 / 2") == F("1/2*dq1", base2)
    with pytest.raises(BadValence):
        evaluate_expression("dq1 / dq2")


def test_unbound_symbol():
    """Free names must be bound."""
    with pytest.raises(UnboundSymbol):
        evaluate_expression("FN(K, v1)")


def test_connection_operators(shear):
    """Dop and dg use the context connection."""
    context = EvalContext.for_dimension(2, shear)
    assert evaluate_expression("dg(v1)", context=context) == F("dq1 + q1*dq2", shear.chart)
    plain = EvalContext.for_dimension(2)
    assert evaluate_expression("Dop(v1)", context=plain).is_zero()
    assert evaluate_expression("Dop(q1*v1)", context=plain) == F("v1.v1", shear.chart)


def test_load_environment(tmp_path, base2):
    """Bindings are evaluated in order and may refer to earlier names."""
    path = tmp_path / "env.json"
    path.write_text(json.dumps({"K": "q2*dq1|v1", "L": "i(K, dq1^dq2)"}))
    context = EvalContext.for_dimension(2)
    env = load_environment(str(path), context)
    assert env["L"] == F("q2*dq1^dq2", base2)
    assert evaluate_expression("FN(K, K)", context=context) == evaluate_expression("FN(q2*dq1|v1, q2*dq1|v1)")


def test_load_environment_missing_file(tmp_path):
    """Unreadable environment files raise an FnsError."""
    with pytest.raises(FnsError):
        load_environment(str(tmp_path / "nope.json"), EvalContext.for_dimension(2))
