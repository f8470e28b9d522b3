"""
Metric and connection calculus on Ω(chart; S T chart).

Metrics come with their exact inverse; Christoffel symbols are either
supplied or computed from g and g^{-1}. All signs follow the form degree.
"""
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction

from backend.calculus import _extended_insert, exterior_d
from backend.errors import BadValence, ChartMismatch, DslSyntaxError, MetricFileError
from backend.fields import Chart, MixedField, basis_field, normalize, product
from backend.polyring import Polynomial

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricData:
    chart: Chart
    g: tuple
    ginv: tuple

    @classmethod
    def from_rows(cls, chart, g, ginv):
        def coerce(rows):
            return tuple(tuple(c if isinstance(c, Polynomial) else chart.poly(c) for c in row) for row in rows)
        return cls(chart, coerce(g), coerce(ginv))

    @property
    def dimension(self):
        return self.chart.dimension


@dataclass(frozen=True)
class ConnectionData:
    """Christoffel symbols gamma[k][i][j] = Γ^k_{ij}."""
    chart: Chart
    gamma: tuple
    metric: MetricData = field(default=None, repr=False)

    @classmethod
    def flat(cls, chart, metric=None):
        n = chart.dimension
        zero = chart.poly(0)
        return cls(chart, tuple(tuple(tuple(zero for _ in range(n)) for _ in range(n)) for _ in range(n)), metric)


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def valid(self):
        return not self.violations

    def to_dict(self):
        return {"valid": self.valid, "violations": list(self.violations)}


def christoffel_symbols(metric):
    """Γ^k_{ij} = 1/2 g^{kl} (∂_i g_{lj} + ∂_j g_{li} - ∂_l g_{ij})."""
    n = metric.dimension
    g, ginv = metric.g, metric.ginv
    half = Fraction(1, 2)
    gamma = []
    for k in range(n):
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                total = metric.chart.poly(0)
                for l in range(n):
                    if ginv[k][l].is_zero():
                        continue
                    inner = g[l][j].partial_derivative(i) + g[l][i].partial_derivative(j) - g[i][j].partial_derivative(l)
                    total = total + ginv[k][l] * inner
                row.append(total.scale(half))
            rows.append(tuple(row))
        gamma.append(tuple(rows))
    return tuple(gamma)


def levi_civita(metric):
    return ConnectionData(metric.chart, christoffel_symbols(metric), metric)


def validate(metric, conn):
    report = ValidationReport()
    if metric.chart != conn.chart:
        report.violations.append(f"chart mismatch: metric on {metric.chart}, connection on {conn.chart}")
        return report
    n = metric.dimension
    g, ginv, gamma = metric.g, metric.ginv, conn.gamma
    for i in range(n):
        for j in range(n):
            if g[i][j] != g[j][i]:
                report.violations.append(f"g is not symmetric at ({i + 1},{j + 1})")
            if ginv[i][j] != ginv[j][i]:
                report.violations.append(f"ginv is not symmetric at ({i + 1},{j + 1})")
            entry = sum((g[i][l] * ginv[l][j] for l in range(n)), metric.chart.poly(0))
            if entry != (1 if i == j else 0):
                report.violations.append(f"g * ginv differs from the identity at ({i + 1},{j + 1}): {entry}")
    for k in range(n):
        for i in range(n):
            for j in range(i + 1, n):
                if gamma[k][i][j] != gamma[k][j][i]:
                    report.violations.append(f"torsion: Gamma^{k + 1}_{i + 1}{j + 1} != Gamma^{k + 1}_{j + 1}{i + 1}")
    for a in range(n):
        for i in range(n):
            for j in range(n):
                defect = g[i][j].partial_derivative(a)
                for k in range(n):
                    defect = defect - gamma[k][a][i] * g[k][j] - gamma[k][a][j] * g[i][k]
                if not defect.is_zero():
                    report.violations.append(f"metric not parallel: (nabla_{a + 1} g)_{i + 1}{j + 1} = {defect}")
    if report.violations:
        logger.debug("Metric validation found %d violations", len(report.violations))
    return report


def contravariant_metric(metric):
    """g̲ as a (0,2) field; off-diagonal coefficients carry the factor 2 of ∂_i∨∂_j + ∂_j∨∂_i."""
    n = metric.dimension
    raw = []
    for i in range(n):
        raw.append(((), (i, i), metric.ginv[i][i]))
        for j in range(i + 1, n):
            raw.append(((), (i, j), metric.ginv[i][j].scale(2)))
    return normalize(metric.chart, raw, 0, 2)


def _check_chart(data, A):
    if data.chart != A.chart:
        raise ChartMismatch(f"Geometric data lives on {data.chart}, field on {A.chart}")


# --- Covariant exterior differential ---

def covariant_derivative(conn, A, a):
    """∇_{∂a} A on coefficients and symmetric indices; the form part is left to d."""
    _check_chart(conn, A)
    raw = []
    for (I, S), f in A.terms.items():
        raw.append((I, S, f.partial_derivative(a)))
        for pos, s in enumerate(S):
            rest = S[:pos] + S[pos + 1:]
            for c in range(A.chart.dimension):
                G = conn.gamma[c][a][s]
                if not G.is_zero():
                    raw.append((I, rest + (c,), f * G))
    return normalize(A.chart, raw, A.k, A.l)


def cov_exterior_diff(conn, A):
    """∇(α⊗F) = dα⊗F + (-1)^k α∧∇F."""
    _check_chart(conn, A)
    raw = []
    for a in range(A.chart.dimension):
        for (I, S), c in covariant_derivative(conn, A, a).terms.items():
            raw.append(((a,) + I, S, c))
    return normalize(A.chart, raw, A.k + 1, A.l)


# --- Metric antiderivations ---

def delta_g(metric, A):
    """C∞-linear antiderivation with δ_g X = g(X, ·) and δ_g on forms zero."""
    _check_chart(metric, A)
    if A.l == 0:
        return MixedField.zero(A.chart, A.k + 1, 0)
    n = A.chart.dimension
    raw = []
    for (I, S), f in A.terms.items():
        for pos, s in enumerate(S):
            rest = S[:pos] + S[pos + 1:]
            for j in range(n):
                gij = metric.g[s][j]
                if not gij.is_zero():
                    coeff = f * gij
                    raw.append((I + (j,), rest, -coeff if A.k % 2 else coeff))
    return normalize(A.chart, raw, A.k + 1, A.l - 1)


def delta_g_prime(metric, A):
    """Contraction with g̲: δ'_g dx^i = g^{ij} ∂_j, zero on symmetric tensors."""
    _check_chart(metric, A)
    if A.k == 0:
        return MixedField.zero(A.chart, 0, A.l + 1)
    n = A.chart.dimension
    raw = []
    for (I, S), f in A.terms.items():
        for r, a in enumerate(I):
            rest = I[:r] + I[r + 1:]
            for j in range(n):
                gaj = metric.ginv[a][j]
                if not gaj.is_zero():
                    coeff = f * gaj
                    raw.append((rest, S + (j,), -coeff if r % 2 else coeff))
    return normalize(A.chart, raw, A.k - 1, A.l + 1)


def schouten_with_metric_defect(conn, S):
    """D = ∇δ'_g + δ'_g∇; on symmetric tensors D(S) = 1/2 [g̲, S]. D(S) = 0 marks a Killing tensor."""
    if conn.metric is None:
        raise BadValence("The metric derivation needs a connection with an attached metric")
    _check_chart(conn, S)
    metric = conn.metric
    return cov_exterior_diff(conn, delta_g_prime(metric, S)) + delta_g_prime(metric, cov_exterior_diff(conn, S))


# --- Connection Lie derivative and bracket ---

def nabla_lie(conn, A, w):
    """L^∇_A ω = i_A ∇ω + (-1)^a ∇ i_A ω."""
    if A.l < 1:
        raise BadValence(f"Lie derivative along a field with no tensor part ({A.k},{A.l})")
    if w.l != 0:
        raise BadValence(f"Lie derivative of a tensor-valued form ({w.k},{w.l}) is not defined here")
    _check_chart(conn, A)
    first = _extended_insert(A, exterior_d(w))
    second = cov_exterior_diff(conn, _extended_insert(A, w))
    return first - second if A.k % 2 else first + second


def _split(A):
    """Decomposables f dx^I ⊗ ∂_S as (term, α, S) with α = f dx^I."""
    for (I, S), f in A.terms.items():
        yield MixedField(A.chart, A.k, A.l, {(I, S): f}), MixedField(A.chart, A.k, 0, {(I, ()): f}), S


def nabla_bracket(conn, A, B):
    """[α⊗F, β⊗G]_∇ = L^∇_{α⊗F}(β)·G - (-1)^{ab} L^∇_{β⊗G}(α)·F over coordinate monomials F, G."""
    _check_chart(conn, A)
    _check_chart(conn, B)
    chart = A.chart
    l_out = A.l + B.l - 1
    if l_out < 0:
        return MixedField.zero(chart, A.k + B.k, 0)
    sign = -1 if (A.k * B.k) % 2 else 1
    result = MixedField.zero(chart, A.k + B.k, l_out)
    for term_a, alpha, F in _split(A):
        for term_b, beta, G in _split(B):
            if F:
                lie = nabla_lie(conn, term_a, beta)
                result = result + product(lie, basis_field(chart, sym=G))
            if G:
                lie = nabla_lie(conn, term_b, alpha)
                result = result - product(lie, basis_field(chart, sym=F)).scale(sign)
    return result


# --- Sample metrics ---

def euclidean_metric(m):
    chart = Chart.base_chart(m)
    identity = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    return MetricData.from_rows(chart, identity, identity)


def constant_diagonal_metric():
    """diag(1, 2, 3) on R^3."""
    chart = Chart.base_chart(3)
    g = [[1, 0, 0], [0, 2, 0], [0, 0, 3]]
    ginv = [[1, 0, 0], [0, Fraction(1, 2), 0], [0, 0, Fraction(1, 3)]]
    return MetricData.from_rows(chart, g, ginv)


def shear_metric():
    """g = [[1, x], [x, 1 + x^2]] on R^2; unimodular, so the inverse is polynomial."""
    chart = Chart.base_chart(2)
    x = chart.coordinate(0)
    g = [[1, x], [x, 1 + x * x]]
    ginv = [[1 + x * x, -x], [-x, 1]]
    return MetricData.from_rows(chart, g, ginv)


SAMPLE_METRICS = {
    "euclidean1": lambda: euclidean_metric(1),
    "euclidean2": lambda: euclidean_metric(2),
    "euclidean3": lambda: euclidean_metric(3),
    "diagonal": constant_diagonal_metric,
    "shear": shear_metric,
}


# --- Metric files ---

_ENTRY = re.compile(r'^(g|ginv|gamma)((?:\s+\d+)+)\s*=\s*(.+)$')


def parse_metric(text):
    """Parse a metric document; returns a validated ConnectionData with its metric attached.

        variables q1 q2
        g 1 2 = q1
        ginv 1 1 = 1 + q1^2
        gamma 1 1 2 = 0      (optional; Levi-Civita when no gamma lines)

    Symmetric entries may be listed once; unlisted entries are zero.
    """
    variables = None
    entries = {"g": {}, "ginv": {}, "gamma": {}}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("variables"):
            variables = tuple(line.split()[1:])
            continue
        m = _ENTRY.match(line)
        if not m or variables is None:
            raise MetricFileError(f"line {lineno}: cannot read {raw.strip()!r}")
        kind, idx = m.group(1), tuple(int(i) - 1 for i in m.group(2).split())
        if len(idx) != (3 if kind == "gamma" else 2) or any(not 0 <= i < len(variables) for i in idx):
            raise MetricFileError(f"line {lineno}: bad index list for {kind}")
        try:
            entries[kind][idx] = Polynomial.parse(m.group(3), variables)
        except DslSyntaxError as e:
            raise MetricFileError(f"line {lineno}: {e}") from e
    if not variables:
        raise MetricFileError("metric file does not declare its variables")

    chart = Chart(variables)
    n = len(variables)
    zero = chart.poly(0)

    def symmetric(table):
        return tuple(tuple(table.get((i, j), table.get((j, i), zero)) for j in range(n)) for i in range(n))

    metric = MetricData(chart, symmetric(entries["g"]), symmetric(entries["ginv"]))
    if entries["gamma"]:
        table = entries["gamma"]
        gamma = tuple(tuple(tuple(table.get((k, i, j), table.get((k, j, i), zero)) for j in range(n))
                            for i in range(n)) for k in range(n))
        conn = ConnectionData(chart, gamma, metric)
    else:
        conn = levi_civita(metric)
    report = validate(metric, conn)
    if not report.valid:
        raise MetricFileError("; ".join(report.violations))
    return conn


def load_metric(filepath):
    try:
        with open(filepath, 'r') as f:
            text = f.read()
    except OSError as e:
        raise MetricFileError(f"cannot read metric file {filepath}: {e}") from e
    logger.info("Loaded metric file %s", filepath)
    return parse_metric(text)
