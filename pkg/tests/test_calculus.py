import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import numpy as np
import pytest

from backend.calculus import (commutator, d_handle, derivation_extract, exterior_d, extended_insert, fn_bracket,
                              fn_bracket_oracle, insert, insertion_handle, lie_bracket, lie_derivative, lie_handle,
                              nr_bracket, schouten)
from backend.errors import BadValence, ChartMismatch, NotScalarForm
from backend.fields import MixedField, parse_field, random_field


def F(text, chart):
    return parse_field(text, chart)


def identity(chart):
    return F(" + ".join(f"dq{i + 1}|v{i + 1}" for i in range(chart.dimension)), chart)


def test_exterior_d_function(base2):
    """d(q1 q2) = q2 dq1 + q1 dq2."""
    assert exterior_d(F("q1*q2", base2)) == F("q2*dq1 + q1*dq2", base2)


def test_exterior_d_squares_to_zero(base3):
    """d∘d = 0 on random forms."""
    rng = np.random.default_rng(1)
    for _ in range(20):
        w = random_field(base3, int(rng.integers(0, 3)), 0, 3, rng)
        assert exterior_d(exterior_d(w)).is_zero()


def test_exterior_d_rejects_tensor_valued(base2):
    """d acts on scalar forms only."""
    with pytest.raises(NotScalarForm):
        exterior_d(F("dq1|v1", base2))


def test_insert_vector_field(base2):
    """i_{∂1} dq1^dq2 = dq2 and i_{∂2} dq1^dq2 = -dq1."""
    w = F("dq1^dq2", base2)
    assert insert(F("v1", base2), w) == F("dq2", base2)
    assert insert(F("v2", base2), w) == F("-dq1", base2)


def test_insert_identity_counts_degree(base3):
    """i_I ω = k ω for the identity I = Σ dq^a ⊗ ∂_a."""
    w = F("q2*dq1^dq3 + dq2^dq3", base3)
    assert insert(identity(base3), w) == w.scale(2)


def test_insert_requires_vector_valued(base2):
    """The inserted field must have l = 1."""
    with pytest.raises(BadValence):
        insert(F("v1.v2", base2), F("dq1", base2))


def test_lie_derivative_of_function(base2):
    """L_X f = X(f)."""
    assert lie_derivative(F("q2*v1", base2), F("q1^2", base2)) == F("2*q1*q2", base2)


def test_lie_derivative_identity_is_d(base3):
    """L_I = d."""
    w = F("q1*q3*dq2", base3)
    assert lie_derivative(identity(base3), w) == exterior_d(w)


def test_nr_bracket_example(base2):
    """[dq1⊗∂1, dq2⊗∂1]^ = -dq2⊗∂1."""
    assert nr_bracket(F("dq1|v1", base2), F("dq2|v1", base2)) == F("-dq2|v1", base2)


def test_fn_bracket_vector_fields(base2):
    """On vector fields [,] is the Lie bracket; [X,X] = 0."""
    X, Y = F("v1", base2), F("q1*v2", base2)
    assert fn_bracket(X, Y) == F("v2", base2) == lie_bracket(X, Y)
    Z = F("q2*v1 + q1^2*v2", base2)
    assert fn_bracket(Z, Z).is_zero()


def test_fn_bracket_identity_is_central(base2):
    """[I, K] = 0 for every K."""
    rng = np.random.default_rng(5)
    for _ in range(5):
        K = random_field(base2, int(rng.integers(0, 3)), 1, 2, rng)
        assert fn_bracket(identity(base2), K).is_zero()


def test_fn_bracket_matches_oracle(base2):
    """The closed formula agrees with the commutator of Lie derivations."""
    rng = np.random.default_rng(9)
    for _ in range(10):
        K = random_field(base2, int(rng.integers(0, 2)), 1, 2, rng)
        L = random_field(base2, int(rng.integers(0, 2)), 1, 2, rng)
        assert fn_bracket(K, L) == fn_bracket_oracle(K, L)


def test_fn_bracket_chart_mismatch(base2, base3):
    """Brackets need a common chart."""
    with pytest.raises(ChartMismatch):
        fn_bracket(F("v1", base2), F("v1", base3))


def test_derivation_extract_d(base2):
    """d = L_I."""
    K, L = derivation_extract(d_handle(base2))
    assert K == identity(base2)
    assert L.is_zero()


def test_derivation_extract_insertion(base3):
    """i_L has no Lie part and returns L."""
    L = F("q1*dq2|v3 + dq1|v1", base3)
    K, rest = derivation_extract(insertion_handle(L))
    assert K.is_zero()
    assert rest == L


def test_commutator_of_lie_derivations(base2):
    """[L_X, L_Y] = L_[X,Y] on a sample form."""
    X, Y = F("q2*v1", base2), F("q1*v2", base2)
    w = F("q1*dq2", base2)
    D = commutator(lie_handle(X), lie_handle(Y))
    assert D(w) == lie_derivative(lie_bracket(X, Y), w)


def test_schouten_function_sign(base2):
    """[∂1, q1] = 1 and [q1, ∂1] = -1."""
    assert schouten(F("v1", base2), F("q1", base2)) == F("1", base2)
    assert schouten(F("q1", base2), F("v1", base2)) == F("-1", base2)


def test_schouten_two_functions(base2):
    """Two functions bracket to zero."""
    result = schouten(F("q1", base2), F("q2", base2))
    assert result.is_zero() and result.bidegree == (0, 0)


def test_schouten_quadratic(base2):
    """[∂1∨∂1, q1^2] = 4 q1 ∂1."""
    assert schouten(F("v1.v1", base2), F("q1^2", base2)) == F("4*q1*v1", base2)


def test_schouten_rejects_forms(base2):
    """Schouten takes k = 0 fields."""
    with pytest.raises(BadValence):
        schouten(F("dq1|v1", base2), F("v2", base2))


def test_extended_insert_example(base2):
    """i(∂1∨∂2)(q1 dq1) = q1 ∂2."""
    assert extended_insert(F("v1.v2", base2), F("q1*dq1", base2)) == F("q1*v2", base2)


def test_extended_insert_matches_insert(base3):
    """With l = 1 the extended insertion is i_K."""
    K = F("q2*dq1|v3 + dq2|v1", base3)
    w = F("q1*dq1^dq3 + dq2^dq3", base3)
    assert extended_insert(K, w) == insert(K, w)


def test_extended_insert_needs_tensor_part(base2):
    """l = 0 has nothing to insert."""
    with pytest.raises(BadValence):
        extended_insert(F("dq1", base2), F("dq2", base2))


def test_zero_fields_compare_equal(base2):
    """Zeros of any bidegree are equal."""
    assert MixedField.zero(base2, 1, 0) == MixedField.zero(base2, 0, 2)
