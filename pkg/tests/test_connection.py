import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from fractions import Fraction

import numpy as np
import pytest

from backend.calculus import fn_bracket, lie_derivative, schouten
from backend.connection import (SAMPLE_METRICS, ConnectionData, christoffel_symbols, contravariant_metric,
                                cov_exterior_diff, delta_g, delta_g_prime, levi_civita, load_metric, nabla_bracket,
                                nabla_lie, parse_metric, schouten_with_metric_defect, validate)
from backend.errors import BadValence, ChartMismatch, MetricFileError
from backend.fields import Chart, parse_field, random_field

METRICS_DIR = os.path.join(os.path.dirname(__file__), '..', 'storage', 'metrics')


def F(text, chart):
    return parse_field(text, chart)


def test_shear_christoffel_symbols(shear):
    """Levi-Civita symbols of g = [[1, q1], [q1, 1 + q1^2]]."""
    chart = shear.chart
    x = chart.coordinate(0)
    gamma = shear.gamma
    assert gamma[0][0][0] == -x
    assert gamma[1][0][0] == 1
    assert gamma[0][0][1] == gamma[0][1][0] == -(x * x)
    assert gamma[1][0][1] == x
    assert gamma[0][1][1] == -x - x * x * x
    assert gamma[1][1][1] == x * x


def test_flat_metric_has_no_christoffel_symbols():
    """Constant metrics give Γ = 0."""
    gamma = christoffel_symbols(SAMPLE_METRICS["diagonal"]())
    assert all(c.is_zero() for plane in gamma for row in plane for c in row)


def test_validate_sample_metrics():
    """Every sample metric with its Levi-Civita connection validates."""
    for name, build in SAMPLE_METRICS.items():
        metric = build()
        assert validate(metric, levi_civita(metric)).valid, name


def test_validate_reports_non_parallel_metric(shear):
    """The flat connection does not preserve the shear metric."""
    report = validate(shear.metric, ConnectionData.flat(shear.chart, shear.metric))
    assert not report.valid
    assert any("not parallel" in v for v in report.to_dict()["violations"])


def test_validate_reports_chart_mismatch():
    """A metric and a connection on different charts give a violation, not an exception."""
    report = validate(SAMPLE_METRICS["euclidean2"](), ConnectionData.flat(Chart.base_chart(3)))
    assert not report.valid
    assert len(report.violations) == 1
    assert "chart mismatch" in report.violations[0]


def test_contravariant_metric(shear, flat2):
    """g̲ carries 2 g^ij off the diagonal."""
    assert contravariant_metric(flat2.metric) == F("v1.v1 + v2.v2", flat2.chart)
    assert contravariant_metric(shear.metric) == F("(1 + q1^2)*v1.v1 - 2*q1*v1.v2 + v2.v2", shear.chart)


def test_delta_examples(shear, flat2):
    """δ_g lowers a vector index, δ'_g raises a form index."""
    assert delta_g(flat2.metric, F("v1", flat2.chart)) == F("dq1", flat2.chart)
    assert delta_g(shear.metric, F("v1", shear.chart)) == F("dq1 + q1*dq2", shear.chart)
    assert delta_g_prime(flat2.metric, F("dq1", flat2.chart)) == F("v1", flat2.chart)
    assert delta_g_prime(shear.metric, F("dq2", shear.chart)) == F("-q1*v1 + v2", shear.chart)


def test_delta_identities(shear):
    """δ² = 0, δ'² = 0 and δδ' + δ'δ = (k+l) on random fields."""
    metric = shear.metric
    rng = np.random.default_rng(21)
    for _ in range(10):
        A = random_field(shear.chart, int(rng.integers(0, 3)), int(rng.integers(0, 3)), 2, rng)
        assert delta_g(metric, delta_g(metric, A)).is_zero()
        assert delta_g_prime(metric, delta_g_prime(metric, A)).is_zero()
        total = delta_g(metric, delta_g_prime(metric, A)) + delta_g_prime(metric, delta_g(metric, A))
        assert total == A.scale(A.k + A.l)


def test_cov_exterior_diff_on_forms_is_d(shear):
    """With l = 0 the covariant differential is d."""
    w = F("q1*q2*dq1", shear.chart)
    assert cov_exterior_diff(shear, w) == F("-q1*dq1^dq2", shear.chart)


def test_killing_defect(flat2):
    """Translations and rotations are Killing; q1 ∂1 is not."""
    chart = flat2.chart
    assert schouten_with_metric_defect(flat2, F("v1", chart)).is_zero()
    assert schouten_with_metric_defect(flat2, F("q1*v2 - q2*v1", chart)).is_zero()
    assert schouten_with_metric_defect(flat2, F("q1*v1", chart)) == F("v1.v1", chart)


def test_killing_defect_is_half_schouten(shear):
    """D(S) = 1/2 [g̲, S] for the shear metric."""
    gbar = contravariant_metric(shear.metric)
    S = F("q1^2*v2", shear.chart)
    assert schouten_with_metric_defect(shear, S).scale(2) == schouten(gbar, S)


def test_killing_defect_needs_metric(base2):
    """The derivation needs a metric attached to the connection."""
    with pytest.raises(BadValence):
        schouten_with_metric_defect(ConnectionData.flat(base2), F("v1", base2))


def test_nabla_lie_restricts_to_lie_derivative(shear):
    """L^∇_K = L_K for vector-valued forms."""
    K, w = F("q2*dq1|v2", shear.chart), F("q1*dq2", shear.chart)
    assert nabla_lie(shear, K, w) == lie_derivative(K, w)


def test_nabla_lie_valence(shear):
    """The field must have a tensor part and the target must be a scalar form."""
    with pytest.raises(BadValence):
        nabla_lie(shear, F("dq1", shear.chart), F("q1", shear.chart))
    with pytest.raises(BadValence):
        nabla_lie(shear, F("v1", shear.chart), F("dq1|v1", shear.chart))


def test_nabla_bracket_restrictions(shear):
    """[,]_∇ is the FN bracket for l = 1 and Schouten for k = 0."""
    chart = shear.chart
    K, L = F("q1*dq2|v1", chart), F("q2*dq1|v2", chart)
    assert nabla_bracket(shear, K, L) == fn_bracket(K, L)
    U, V = F("v1.v1", chart), F("q1^2", chart)
    assert nabla_bracket(shear, U, V) == schouten(U, V) == F("4*q1*v1", chart)


def test_nabla_bracket_jacobi_witness(flat2):
    """The pinned triple violates the graded Jacobi identity."""
    chart = flat2.chart
    A, B, C = F("v1.v1", chart), F("q1^2", chart), F("q1*dq1", chart)
    nb = lambda X, Y: nabla_bracket(flat2, X, Y)
    total = nb(A, nb(B, C)) - nb(nb(A, B), C) - nb(B, nb(A, C))
    assert total == F("-4*q1*dq1", chart)


def test_nabla_bracket_chart_mismatch(flat2, base3):
    """Fields must live on the connection's chart."""
    with pytest.raises(ChartMismatch):
        nabla_bracket(flat2, F("v1", base3), F("v1", base3))


def test_parse_metric_file_matches_sample(shear):
    """The shear metric file reproduces the built-in sample."""
    conn = load_metric(os.path.join(METRICS_DIR, "shear.txt"))
    assert conn.chart == Chart.base_chart(2)
    assert conn.gamma == shear.gamma


def test_parse_metric_with_explicit_gamma():
    """Explicit Christoffel lines are taken as given and validated."""
    conn = load_metric(os.path.join(METRICS_DIR, "diagonal3.txt"))
    assert conn.metric.ginv[1][1] == Fraction(1, 2)
    assert validate(conn.metric, conn).valid


def test_parse_metric_errors(tmp_path):
    """Bad documents raise MetricFileError."""
    with pytest.raises(MetricFileError):
        parse_metric("g 1 1 = 1")
    with pytest.raises(MetricFileError):
        parse_metric("variables q1\ng 1 1 = 2\nginv 1 1 = 1")
    with pytest.raises(MetricFileError):
        parse_metric("variables q1\ng 1 2 = 1")
    with pytest.raises(MetricFileError):
        load_metric(str(tmp_path / "missing.txt"))
