"""
Identity suites and the fuzz harness.

Each suite draws random inputs from a seeded generator and evaluates both
sides of one identity exactly. A case passes only when the two sides are
equal in canonical form. Expected-failure suites record a pinned witness
that is re-checked on every run; such a suite succeeds only if some case
fails.
"""
import logging
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from backend.calculus import (exterior_d as d, extended_insert, fn_bracket, fn_bracket_oracle, insert,
                              lie_bracket, lie_derivative, nr_bracket, schouten)
from backend.connection import (ConnectionData, SAMPLE_METRICS, contravariant_metric, cov_exterior_diff,
                                delta_g, delta_g_prime, levi_civita, nabla_bracket, nabla_lie,
                                schouten_with_metric_defect, validate)
from backend.cotangent import (PoissonBivector, canonical_structures, graded_poisson_1, graded_poisson_2, h_map as h,
                               hamiltonian as H, horizontal_representative, poincare_primitive, poisson_fn,
                               pullback as pb, pullback_inverse, rho_extend as rho, vertical_euler,
                               zero_section_pullback)
from backend.errors import FnsError, InvalidConfig, UnknownSuite
from backend.fields import Chart, MixedField, parse_field, product, random_field, vector_field
from backend.report import CaseResult, Report

logger = logging.getLogger(__name__)

MAX_DIMENSION = 3


@dataclass(frozen=True)
class CaseConfig:
    dimension: int = 3
    coefficient_degree: int = 2
    form_degree: int = 2
    sym_degree: int = 2
    cases: int = 25
    seed: int = 1994
    workers: int = 1

    def __post_init__(self):
        if not 1 <= self.dimension <= MAX_DIMENSION:
            raise InvalidConfig(f"Base dimension must lie in 1..{MAX_DIMENSION}, got {self.dimension}")
        for name in ("coefficient_degree", "form_degree", "sym_degree", "cases", "workers"):
            if getattr(self, name) < 1:
                raise InvalidConfig(f"{name} must be positive, got {getattr(self, name)}")

    @classmethod
    def from_settings(cls, config, **overrides):
        values = {name: config[name] for name in cls.__dataclass_fields__ if name in config}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class Suite:
    id: str
    formula: str
    generate: Callable
    check: Callable
    expected_failure: bool = False
    witness: Optional[Callable] = None
    info: Optional[Callable] = None
    fixed: bool = False
    scale: int = 1


# --- Input generation ---

def _sign(n):
    return -1 if n % 2 else 1


def _zero(chart):
    return MixedField.zero(chart)


def _draw_degree(rng, bound, minimum=0):
    return int(rng.integers(minimum, max(bound, minimum) + 1))


def _random(rng, config, chart, shape):
    """Random field of a named shape on `chart`."""
    deg = config.coefficient_degree
    kmax = min(config.form_degree, chart.dimension)
    lmax = config.sym_degree
    if shape == "f":
        return random_field(chart, 0, 0, deg, rng, density=1.0)
    if shape == "c":
        return random_field(chart, 0, 0, 0, rng, density=1.0)
    if shape == "X":
        return random_field(chart, 0, 1, deg, rng, density=0.7)
    if shape == "form":
        return random_field(chart, _draw_degree(rng, kmax), 0, deg, rng)
    if shape == "form+":
        return random_field(chart, _draw_degree(rng, kmax, 1), 0, deg, rng)
    if shape == "vv":
        return random_field(chart, _draw_degree(rng, kmax), 1, deg, rng)
    if shape == "sym":
        return random_field(chart, 0, _draw_degree(rng, lmax), deg, rng, density=0.7)
    if shape == "sym+":
        return random_field(chart, 0, _draw_degree(rng, lmax, 1), deg, rng, density=0.7)
    if shape == "mixed":
        return random_field(chart, _draw_degree(rng, kmax), _draw_degree(rng, lmax), deg, rng)
    if shape == "mixed+":
        return random_field(chart, _draw_degree(rng, kmax), _draw_degree(rng, lmax, 1), deg, rng)
    if shape == "const":
        return random_field(chart, _draw_degree(rng, kmax), _draw_degree(rng, lmax), 0, rng)
    raise ValueError(f"unknown field shape {shape!r}")


def _base(rng, config):
    return Chart.base_chart(int(rng.integers(1, config.dimension + 1)))


def on_base(**shapes):
    def generate(rng, config):
        chart = _base(rng, config)
        return {name: _random(rng, config, chart, shape) for name, shape in shapes.items()}
    return generate


def on_cotangent(**shapes):
    def generate(rng, config):
        chart = Chart.cotangent_of(_base(rng, config))
        return {name: _random(rng, config, chart, shape) for name, shape in shapes.items()}
    return generate


def _metric_for(rng, m):
    names = {1: ["euclidean1"], 2: ["euclidean2", "shear"], 3: ["euclidean3", "diagonal"]}[m]
    return SAMPLE_METRICS[names[int(rng.integers(0, len(names)))]]()


def with_connection(flat=False, **shapes):
    def generate(rng, config):
        m = int(rng.integers(1, config.dimension + 1))
        metric = SAMPLE_METRICS[f"euclidean{m}"]() if flat else _metric_for(rng, m)
        conn = levi_civita(metric)
        inputs = {"conn": conn}
        for name, shape in shapes.items():
            inputs[name] = _random(rng, config, metric.chart, shape)
        return inputs
    return generate


def with_torsion_free_connection(**shapes):
    """Random symmetric Christoffel symbols, no metric attached."""
    def generate(rng, config):
        chart = _base(rng, config)
        n = chart.dimension
        symbols = {}
        for k in range(n):
            for i in range(n):
                for j in range(i, n):
                    symbols[k, i, j] = random_field(chart, 0, 0, config.coefficient_degree, rng).scalar()
        gamma = tuple(tuple(tuple(symbols[k, min(i, j), max(i, j)] for j in range(n)) for i in range(n))
                      for k in range(n))
        inputs = {"conn": ConnectionData(chart, gamma)}
        for name, shape in shapes.items():
            inputs[name] = _random(rng, config, chart, shape)
        return inputs
    return generate


def _killing_vector(rng, chart):
    """a + Bq with B skew, an infinitesimal Euclidean isometry."""
    n = chart.dimension
    skew = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            skew[i][j] = int(rng.integers(-2, 3))
            skew[j][i] = -skew[i][j]
    coeffs = []
    for i in range(n):
        c = chart.poly(int(rng.integers(-2, 3)))
        for j in range(n):
            if skew[i][j]:
                c = c + chart.coordinate(j).scale(skew[i][j])
        coeffs.append(c)
    return vector_field(chart, coeffs)


def _killing_tensor(rng, config, chart):
    order = _draw_degree(rng, min(config.sym_degree, 2), 1)
    total = MixedField.zero(chart, 0, order)
    for _ in range(2):
        term = _killing_vector(rng, chart)
        for _ in range(order - 1):
            term = product(term, _killing_vector(rng, chart))
        total = total + term
    return total


def with_killing_tensors(*names):
    """Sums of symmetric products of Killing vectors on Euclidean space."""
    def generate(rng, config):
        m = int(rng.integers(1, config.dimension + 1))
        conn = levi_civita(SAMPLE_METRICS[f"euclidean{m}"]())
        inputs = {"conn": conn}
        for name in names:
            inputs[name] = _killing_tensor(rng, config, conn.chart)
        return inputs
    return generate


def on_lie_poisson(**shapes):
    def generate(rng, config):
        chart = Chart.base_chart(3)
        return {name: _random(rng, config, chart, shape) for name, shape in shapes.items()}
    return generate


# --- Formulas on T*M ---

def l33_1(X, Y):
    return fn_bracket(h(X), h(Y)), h(lie_bracket(X, Y))


def l33_2(phi, psi):
    cot = pb(phi).chart
    return (fn_bracket(rho(pb(phi)), rho(pb(psi))), fn_bracket(h(phi), rho(pb(psi)))), (_zero(cot), _zero(cot))


def l33_3(X, phi):
    return ((fn_bracket(h(X), rho(pb(phi))), fn_bracket(h(X), h(phi))),
            (rho(pb(lie_derivative(X, phi))), h(lie_derivative(X, phi))))


def l33_4(phi, psi):
    cot = pb(phi).chart
    r = rho(pb(phi))
    return (insert(r, pb(psi)), insert(r, rho(pb(psi))), lie_derivative(r, pb(psi))), (_zero(cot),) * 3


def l33_5(X, phi):
    return ((lie_derivative(rho(pb(phi)), pb(X)), lie_derivative(h(phi), pb(X))),
            (-pb(insert(X, phi)), -pb(insert(X, d(phi)))))


def l33_6(K, f, phi):
    hK = h(K)
    return ((lie_derivative(hK, pb(f)), lie_derivative(hK, pb(phi)), insert(hK, pb(phi))),
            (pb(lie_derivative(K, f)), pb(lie_derivative(K, phi)), pb(insert(K, phi))))


def l33_7(L, f):
    return fn_bracket(h(L), h(f)), h(lie_derivative(L, f))


def l33_8(K, L):
    k, l = K.k, L.k
    return lie_derivative(h(K), pb(L)), pb(fn_bracket(K, L)) + d(pb(insert(L, K))).scale(_sign((k - 1) * l))


def l33_9(K, L):
    lhs = (d(lie_derivative(h(K), pb(L))), lie_derivative(h(K), d(pb(L))).scale(_sign(K.k)))
    target = d(pb(fn_bracket(K, L)))
    return lhs, (target, target)


def l33_10(K, psi):
    r = rho(pb(K))
    return (insert(r, pb(psi)), lie_derivative(r, pb(psi))), (_zero(r.chart),) * 2


def l33_11(K, L):
    k, l = K.k, L.k
    return lie_derivative(rho(pb(K)), pb(L)), -pb(insert(L, K)).scale(_sign((k - 1) * l))


def l33_12(K, L):
    return insert(h(K), pb(L)), pb(insert(K, L))


def l33_13(K, L):
    k, l = K.k, L.k
    inner = insert(K, L) + insert(L, K).scale(_sign((k - 1) * (l - 1)))
    return insert(h(K), d(pb(L))), pb(fn_bracket(K, L)) - d(pb(inner)).scale(_sign(k))


def l33_14(X, psi):
    return insert(h(X), rho(pb(psi))), -rho(pb(insert(X, psi)))


def l33_15(phi, L):
    return lie_derivative(h(phi), pb(L)), -pb(insert(L, d(phi))).scale(_sign(phi.k * L.k))


def l33_16(K, psi):
    return (fn_bracket(rho(pb(K)), h(psi)),
            rho(pb(insert(K, d(psi)))) + insert(h(K), h(psi)).scale(_sign(K.k)))


def l34_1(A, psi):
    return lie_derivative(h(psi), pb(A)), -pb(extended_insert(A, d(psi))).scale(_sign(psi.k * A.k))


def l34_2(A, psi):
    return (fn_bracket(rho(pb(A)), h(psi)),
            rho(pb(extended_insert(A, d(psi)))) + insert(h(A), h(psi)).scale(_sign(A.k)))


# --- Lifts of brackets to T*M ---

def t35_1(K, L):
    return fn_bracket(h(K), h(L)), h(fn_bracket(K, L))


def t35_2(U, V):
    return fn_bracket(h(U), h(V)), h(schouten(U, V))


def t35_3(phi, psi):
    return fn_bracket(h(phi), h(psi)), _zero(pb(phi).chart)


def t35_4(A, psi):
    return fn_bracket(h(A), h(psi)), h(extended_insert(A, d(psi)))


def counterexample_inputs():
    base = Chart.base_chart(2)
    return {"A": parse_field("dq1 | v1", base), "B": parse_field("v1.v2", base)}


def counterexample(A, B):
    """{π*A, π*B}¹, its differential, and the membership verdict for H of it in the image of h."""
    chi = graded_poisson_1(pb(A), pb(B))
    verdict = horizontal_representative(chi, A.l + B.l - 1)
    return {"chi": chi, "d_chi": d(chi), "bracket": fn_bracket(h(A), h(B)), "H_chi": H(chi),
            "representative": verdict}


def t35_5(A, B):
    result = counterexample(A, B)
    cot = result["chi"].chart
    verdict = result["representative"]
    lhs = (result["chi"], result["d_chi"], result["bracket"] == result["H_chi"],
           getattr(verdict, "failed_check", None))
    rhs = (parse_field("p2 * dp1", cot), parse_field("-dp1^dp2", cot), True, "horizontal")
    return lhs, rhs


def t35_5_info():
    result = counterexample(**counterexample_inputs())
    verdict = result["representative"]
    return {"bracket": str(result["chi"]), "differential": str(result["d_chi"]),
            "obstruction": verdict.to_dict() if hasattr(verdict, "to_dict") else None}


# --- Frölicher-Nijenhuis algebra ---

def d21_1(K, L, omega):
    k, l = K.k, L.k
    lhs = lie_derivative(K, insert(L, omega)) - insert(L, lie_derivative(K, omega)).scale(_sign(k * (l - 1)))
    rhs = insert(fn_bracket(K, L), omega) - lie_derivative(insert(L, K), omega).scale(_sign(k * (l - 1)))
    return lhs, rhs


def d21_2(omega, L, psi):
    return insert(product(omega, L), psi), product(omega, insert(L, psi))


def d21_3(omega, K, psi):
    q, k = omega.k, K.k
    rhs = product(omega, lie_derivative(K, psi)) - insert(product(d(omega), K), psi).scale(_sign(q + k - 1))
    return lie_derivative(product(omega, K), psi), rhs


def d21_4(omega, K1, K2):
    q, k1, k2 = omega.k, K1.k, K2.k
    rhs = (product(omega, fn_bracket(K1, K2))
           - product(lie_derivative(K2, omega), K1).scale(_sign((q + k1) * k2))
           + product(d(omega), insert(K1, K2)).scale(_sign(q + k1)))
    return fn_bracket(product(omega, K1), K2), rhs


def d21_5(phi, X, psi, Y):
    s = _sign(phi.k)
    rhs = (product(product(phi, psi), lie_bracket(X, Y))
           + product(product(phi, lie_derivative(X, psi)), Y)
           - product(product(lie_derivative(Y, phi), psi), X)
           + (product(product(d(phi), insert(X, psi)), Y) + product(product(insert(Y, phi), d(psi)), X)).scale(s))
    return fn_bracket(product(phi, X), product(psi, Y)), rhs


def nr(K, L, omega):
    k, l = K.k, L.k
    return (insert(nr_bracket(K, L), omega),
            insert(K, insert(L, omega)) - insert(L, insert(K, omega)).scale(_sign((k - 1) * (l - 1))))


def fn_oracle(K, L):
    return fn_bracket(K, L), fn_bracket_oracle(K, L)


def fn_jacobi(K1, K2, K3):
    k1, k2, k3 = K1.k, K2.k, K3.k
    total = (fn_bracket(K1, fn_bracket(K2, K3)).scale(_sign(k1 * k3))
             + fn_bracket(K2, fn_bracket(K3, K1)).scale(_sign(k1 * k2))
             + fn_bracket(K3, fn_bracket(K1, K2)).scale(_sign(k2 * k3)))
    return total, _zero(K1.chart)


def fn_anti(K, L):
    return fn_bracket(K, L), -fn_bracket(L, K).scale(_sign(K.k * L.k))


def fn_lie(X, Y):
    return fn_bracket(X, Y), lie_bracket(X, Y)


# --- Graded Poisson brackets ---

def gp_hom(phi, psi):
    return fn_bracket(H(phi), H(psi)), H(graded_poisson_1(phi, psi))


def gp1_anti(phi, psi):
    return graded_poisson_1(phi, psi), -graded_poisson_1(psi, phi).scale(_sign(phi.k * psi.k))


def gp2_jacobi(phi, psi, chi):
    gp = graded_poisson_2
    return gp(phi, gp(psi, chi)), gp(gp(phi, psi), chi) + gp(psi, gp(phi, chi)).scale(_sign(phi.k * psi.k))


def gp_exact(phi, psi):
    diff = graded_poisson_1(phi, psi) - graded_poisson_2(phi, psi)
    primitive = poincare_primitive(diff) if diff.terms else diff
    exact = d(insert(H(phi), psi)).scale(_sign(phi.k - 1))
    return (diff, d(primitive) if diff.terms else diff), (exact, diff)


def gp1_jacobi(phi, psi, chi):
    gp = graded_poisson_1
    total = gp(phi, gp(psi, chi)) - gp(gp(phi, psi), chi) - gp(psi, gp(phi, chi)).scale(_sign(phi.k * psi.k))
    return total, _zero(phi.chart)


def gp1_jacobi_witness():
    cot = Chart.cotangent_of(Chart.base_chart(1))
    return {"phi": parse_field("p1", cot), "psi": parse_field("q1", cot), "chi": parse_field("q1*p1*dq1", cot)}


def lie_poisson():
    """{x1, x2} = x3 and cyclic: the linear Poisson structure of so(3) on R^3."""
    chart = Chart.base_chart(3)
    x1, x2, x3 = (chart.coordinate(i) for i in range(3))
    zero = chart.poly(0)
    return PoissonBivector.from_matrix(chart, [[zero, x3, -x2], [-x3, zero, x1], [x2, -x1, zero]])


def poisson_general(f, g, k, phi, psi):
    rho_ = lie_poisson()
    bracket = lambda a, b: poisson_fn(a, b, rho_)
    F, G, K = f.scalar(), g.scalar(), k.scalar()
    jacobi = bracket(F, bracket(G, K)) + bracket(G, bracket(K, F)) + bracket(K, bracket(F, G))
    lhs = (jacobi.is_zero(), fn_bracket(H(phi, rho_), H(psi, rho_)))
    return lhs, (True, H(graded_poisson_1(phi, psi, rho_), rho_))


# --- Lifting, homogeneity and kernels ---

def pi_homog(A):
    P = pb(A)
    return lie_derivative(vertical_euler(P.chart), P), P.scale(A.l)


def pi_roundtrip(A):
    return pullback_inverse(pb(A), A.l), A


def pi_kernel(c, f):
    return (h(c).is_zero(), h(f).is_zero()), (True, d(f).is_zero())


def pi_symplectic(A):
    omega = canonical_structures(Chart.cotangent_of(A.chart)).symplectic
    return lie_derivative(h(A), omega), _zero(omega.chart)


def l32_2(A):
    return h(A).is_zero(), A.is_zero()


def l32_3(beta):
    phi = d(beta)
    primitive = poincare_primitive(pb(phi))
    return d(zero_section_pullback(primitive)), phi


# --- Metric and connection calculus ---

def conn_lc(conn):
    return validate(conn.metric, conn).violations, []


def conn_delta2(conn, A):
    m = conn.metric
    return delta_g(m, delta_g(m, A)), _zero(A.chart)


def conn_deltap2(conn, A):
    m = conn.metric
    return delta_g_prime(m, delta_g_prime(m, A)), _zero(A.chart)


def conn_anticomm(conn, A):
    m = conn.metric
    return delta_g(m, delta_g_prime(m, A)) + delta_g_prime(m, delta_g(m, A)), A.scale(A.k + A.l)


def conn_nabla_delta(conn, A):
    m = conn.metric
    return cov_exterior_diff(conn, delta_g(m, A)) + delta_g(m, cov_exterior_diff(conn, A)), _zero(A.chart)


def conn_nl(conn, K, omega):
    return nabla_lie(conn, K, omega), lie_derivative(K, omega)


def conn_nb_fn(conn, K, L):
    return nabla_bracket(conn, K, L), fn_bracket(K, L)


def conn_nb_sch(conn, U, V):
    return nabla_bracket(conn, U, V), schouten(U, V)


def conn_nb_anti(conn, A, B):
    return nabla_bracket(conn, A, B), -nabla_bracket(conn, B, A).scale(_sign(A.k * B.k))


def conn_nb_deriv(conn, A, B, C):
    lhs = nabla_bracket(conn, A, product(B, C))
    rhs = product(nabla_bracket(conn, A, B), C) + product(B, nabla_bracket(conn, A, C)).scale(_sign(A.k * B.k))
    return lhs, rhs


def conn_nb_deriv_witness():
    metric = SAMPLE_METRICS["euclidean2"]()
    chart = metric.chart
    return {"conn": levi_civita(metric), "A": parse_field("dq2|v2", chart),
            "B": parse_field("q1*dq2", chart), "C": parse_field("v2.v2", chart)}


def conn_torsion_free(conn, K, L, omega, U, V):
    """Restrictions of L^∇ and [,]_∇ that do not see the connection."""
    lhs = (nabla_lie(conn, K, omega), nabla_bracket(conn, K, L), nabla_bracket(conn, U, V))
    return lhs, (lie_derivative(K, omega), fn_bracket(K, L), schouten(U, V))


def killing_sub(conn, S, T):
    D = lambda U: schouten_with_metric_defect(conn, U)
    zero = _zero(S.chart)
    return (D(S), D(T), D(schouten(S, T))), (zero, zero, zero)


def conn_d_sch(conn, S):
    gbar = contravariant_metric(conn.metric)
    return schouten_with_metric_defect(conn, S), schouten(gbar, S).scale(Fraction(1, 2))


def measured_constant(lhs, rhs):
    """c with lhs = c * rhs, read off the first term of rhs; None when rhs vanishes."""
    if not rhs.terms:
        return None
    key, coeff = rhs.items()[0]
    exps, value = coeff.sorted_terms()[0]
    return lhs.coefficient(*key).terms.get(exps, Fraction(0)) / value


def conn_d_sch_info():
    conn = levi_civita(SAMPLE_METRICS["shear"]())
    S = parse_field("q1^2 * v2", conn.chart)
    constant = measured_constant(schouten_with_metric_defect(conn, S),
                                 schouten(contravariant_metric(conn.metric), S))
    return {"constant": str(constant), "metric": "shear", "tensor": str(S)}


def nb_jacobi(conn, A, B, C):
    nb = lambda X, Y: nabla_bracket(conn, X, Y)
    total = nb(A, nb(B, C)) - nb(nb(A, B), C) - nb(B, nb(A, C)).scale(_sign(A.k * B.k))
    return total, _zero(A.chart)


def nb_jacobi_witness():
    metric = SAMPLE_METRICS["euclidean2"]()
    chart = metric.chart
    return {"conn": ConnectionData.flat(chart, metric), "A": parse_field("v1.v1", chart),
            "B": parse_field("q1^2", chart), "C": parse_field("q1*dq1", chart)}


# --- Symmetric Schouten calculus ---

def sch_x(U, V):
    cot = Chart.cotangent_of(U.chart)
    bracket = poisson_fn(pb(U).scalar(), pb(V).scalar())
    return schouten(U, V), pullback_inverse(MixedField.from_polynomial(cot, bracket), U.l + V.l - 1)


def sch_jacobi(U, V, W):
    return schouten(U, schouten(V, W)), schouten(schouten(U, V), W) + schouten(V, schouten(U, W))


def sch_leibniz(U, V, W):
    return schouten(U, product(V, W)), product(schouten(U, V), W) + product(V, schouten(U, W))


def xi_deriv(A, B, C):
    lhs = extended_insert(A, product(B, C))
    rhs = product(extended_insert(A, B), C) + product(B, extended_insert(A, C)).scale(_sign((A.k - 1) * B.k))
    return lhs, rhs


def fixed_inputs(inputs):
    def generate(rng, config):
        return inputs()
    return generate


def _catalog():
    suites = [
        Suite("L33-1", "[hX,hY] = h[X,Y]", on_base(X="X", Y="X"), l33_1),
        Suite("L33-2", "[ρφ,ρψ] = 0 and [hφ,ρψ] = 0", on_base(phi="form", psi="form"), l33_2),
        Suite("L33-3", "[hX,ρφ] = ρL_Xφ and [hX,hφ] = hL_Xφ", on_base(X="X", phi="form"), l33_3),
        Suite("L33-4", "i_{ρφ}ψ = 0, i_{ρφ}ρψ = 0, L_{ρφ}ψ = 0", on_base(phi="form", psi="form"), l33_4),
        Suite("L33-5", "L_{ρφ}π*X = -i_Xφ and L_{hφ}π*X = -i_Xdφ", on_base(X="X", phi="form"), l33_5),
        Suite("L33-6", "L_{hK}f = L_Kf, L_{hK}φ = L_Kφ, i_{hK}φ = i_Kφ", on_base(K="vv", f="f", phi="form"), l33_6),
        Suite("L33-7", "[hL,hf] = hL_Lf", on_base(L="vv", f="f"), l33_7),
        Suite("L33-8", "L_{hK}π*L = π*[K,L] + (-1)^((k-1)l) dπ*(i_LK)", on_base(K="vv", L="vv"), l33_8),
        Suite("L33-9", "dL_{hK}π*L = (-1)^k L_{hK}dπ*L = dπ*[K,L]", on_base(K="vv", L="vv"), l33_9),
        Suite("L33-10", "i_{ρπ*K}ψ = 0 and L_{ρπ*K}ψ = 0", on_base(K="vv", psi="form"), l33_10),
        Suite("L33-11", "L_{ρπ*K}π*L = -(-1)^((k-1)l) π*i_LK", on_base(K="vv", L="vv"), l33_11),
        Suite("L33-12", "i_{hK}π*L = π*i_KL", on_base(K="vv", L="vv"), l33_12),
        Suite("L33-13", "i_{hK}dπ*L = π*[K,L] - (-1)^k dπ*(i_KL + (-1)^((k-1)(l-1)) i_LK)",
              on_base(K="vv", L="vv"), l33_13),
        Suite("L33-14", "i_{hX}ρψ = -ρi_Xψ", on_base(X="X", psi="form"), l33_14),
        Suite("L33-15", "L_{hφ}π*L = -(-1)^(pl) i_Ldφ", on_base(phi="form", L="vv"), l33_15),
        Suite("L33-16", "[ρπ*K,hψ] = ρ(i_Kdψ) + (-1)^k i_{hK}hψ", on_base(K="vv", psi="form"), l33_16),
        Suite("L34-1", "L_{hψ}π*A = -(-1)^(qk) π*i_Adψ", on_base(A="mixed+", psi="form"), l34_1),
        Suite("L34-2", "[ρπ*A,hψ] = ρπ*i_Adψ + (-1)^k i_{hA}hψ", on_base(A="mixed+", psi="form"), l34_2),
        Suite("T35-1", "[hK,hL] = h[K,L]", on_base(K="vv", L="vv"), t35_1),
        Suite("T35-2", "[hU,hV] = h[U,V] (symmetric Schouten)", on_base(U="sym", V="sym"), t35_2),
        Suite("T35-3", "[hφ,hψ] = 0", on_base(phi="form", psi="form"), t35_3),
        Suite("T35-4", "[hA,hψ] = h i_Adψ", on_base(A="mixed+", psi="form"), t35_4),
        Suite("T35-5", "[h(dx1⊗∂1), h(∂1∨∂2)] = H(p2 dp1) is not in the image of h",
              fixed_inputs(counterexample_inputs), t35_5, info=t35_5_info, fixed=True),
        Suite("D21-1", "[L_K,i_L] = i([K,L]) - (-1)^(k(l-1)) L(i_LK), L of form degree l",
              on_base(K="vv", L="vv", omega="form"), d21_1),
        Suite("D21-2", "i(ω∧L) = ω∧i(L)", on_base(omega="form", L="vv", psi="form"), d21_2),
        Suite("D21-3", "L(ω∧K) = ω∧L_K - (-1)^(q+k-1) i(dω∧K)", on_base(omega="form", K="vv", psi="form"), d21_3),
        Suite("D21-4", "[ω∧K1,K2] = ω∧[K1,K2] - (-1)^((q+k1)k2) L(K2)ω∧K1 + (-1)^(q+k1) dω∧i(K1)K2",
              on_base(omega="form", K1="vv", K2="vv"), d21_4),
        Suite("D21-5", "[φ⊗X,ψ⊗Y] expansion", on_base(phi="form", X="X", psi="form", Y="X"), d21_5),
        Suite("NR", "i([K,L]^) = [i_K,i_L]", on_base(K="vv", L="vv", omega="form"), nr, scale=2),
        Suite("FN-ORACLE", "[K,L] = L-part of [L_K,L_L]", on_base(K="vv", L="vv"), fn_oracle, scale=2),
        Suite("FN-JACOBI", "graded Jacobi identity of [,]", on_base(K1="vv", K2="vv", K3="vv"), fn_jacobi, scale=2),
        Suite("FN-ANTI", "[K,L] = -(-1)^(kl) [L,K]", on_base(K="vv", L="vv"), fn_anti, scale=2),
        Suite("FN-LIE", "[X,Y] is the Lie bracket on vector fields", on_base(X="X", Y="X"), fn_lie),
        Suite("GP-HOM", "[Hφ,Hψ] = H{φ,ψ}¹", on_cotangent(phi="form", psi="form"), gp_hom),
        Suite("GP1-ANTI", "{φ,ψ}¹ = -(-1)^(pq) {ψ,φ}¹", on_cotangent(phi="form", psi="form"), gp1_anti),
        Suite("GP2-JACOBI", "{φ,{ψ,χ}²}² = {{φ,ψ}²,χ}² + (-1)^(pq) {ψ,{φ,χ}²}²",
              on_cotangent(phi="form", psi="form", chi="form"), gp2_jacobi),
        Suite("GP-EXACT", "{φ,ψ}¹ - {φ,ψ}² = (-1)^(p-1) d i_{Hφ}ψ, with a constructive primitive",
              on_cotangent(phi="form", psi="form"), gp_exact),
        Suite("GP1-JACOBI", "{,}¹ fails the graded Jacobi identity",
              on_cotangent(phi="form", psi="form", chi="form"), gp1_jacobi,
              expected_failure=True, witness=gp1_jacobi_witness),
        Suite("POISSON-GENERAL", "{,}_ρ Jacobi and [Hφ,Hψ] = H{φ,ψ}¹ for the so(3) Poisson structure",
              on_lie_poisson(f="f", g="f", k="f", phi="form", psi="form"), poisson_general),
        Suite("PI-HOMOG", "L_I π*A = l π*A", on_base(A="mixed"), pi_homog),
        Suite("PI-ROUNDTRIP", "(π*)^-1 π*A = A", on_base(A="mixed"), pi_roundtrip),
        Suite("PI-KERNEL", "h(f) = 0 iff df = 0", on_base(c="c", f="f"), pi_kernel),
        Suite("PI-SYMPLECTIC", "L_{hA}ω = 0", on_base(A="mixed"), pi_symplectic),
        Suite("L32-2", "h is injective for l > 0", on_base(A="mixed+"), l32_2),
        Suite("L32-3", "π*φ exact implies φ exact", on_base(beta="form"), l32_3),
        Suite("CONN-LC", "Levi-Civita symbols are torsion free and metric", with_connection(), conn_lc),
        Suite("CONN-DELTA2", "δ_g² = 0", with_connection(A="mixed"), conn_delta2),
        Suite("CONN-DELTAP2", "δ'_g² = 0", with_connection(A="mixed"), conn_deltap2),
        Suite("CONN-ANTICOMM", "δ_gδ'_g + δ'_gδ_g = (k+l) id", with_connection(A="mixed"), conn_anticomm),
        Suite("CONN-NABLA-DELTA", "∇δ_g + δ_g∇ = 0", with_connection(A="mixed"), conn_nabla_delta),
        Suite("CONN-NL", "L^∇_K = L_K for l = 1", with_connection(K="vv", omega="form"), conn_nl),
        Suite("CONN-NB-FN", "[K,L]_∇ = [K,L] for l = 1", with_connection(K="vv", L="vv"), conn_nb_fn),
        Suite("CONN-NB-SCH", "[U,V]_∇ = [U,V] (Schouten) for k = 0", with_connection(U="sym", V="sym"),
              conn_nb_sch),
        Suite("CONN-NB-ANTI", "[A,B]_∇ = -(-1)^(ab) [B,A]_∇", with_connection(A="mixed", B="mixed"), conn_nb_anti),
        Suite("CONN-NB-DERIV", "[A,B·C]_∇ = [A,B]_∇·C + (-1)^(ab) B·[A,C]_∇ fails",
              with_connection(A="mixed", B="mixed", C="mixed"), conn_nb_deriv,
              expected_failure=True, witness=conn_nb_deriv_witness),
        Suite("CONN-TORSION-FREE", "L^∇_K = L_K, [K,L]_∇ = [K,L], [U,V]_∇ = [U,V] for any torsion-free ∇",
              with_torsion_free_connection(K="vv", L="vv", omega="form", U="sym", V="sym"), conn_torsion_free),
        Suite("KILLING-SUB", "Killing tensors are closed under the Schouten bracket", with_killing_tensors("S", "T"),
              killing_sub),
        Suite("CONN-D-SCH", "∇δ'_g + δ'_g∇ = 1/2 [g̲, ·] on symmetric tensors", with_connection(S="sym"),
              conn_d_sch, info=conn_d_sch_info),
        Suite("NB-JACOBI", "[,]_∇ fails the graded Jacobi identity",
              with_connection(flat=True, A="mixed", B="mixed", C="mixed"), nb_jacobi,
              expected_failure=True, witness=nb_jacobi_witness),
        Suite("SCH-X", "[U,V] = (π*)^-1 {π*U,π*V}", on_base(U="sym+", V="sym+"), sch_x, scale=2),
        Suite("SCH-JACOBI", "[U,[V,W]] = [[U,V],W] + [V,[U,W]]", on_base(U="sym", V="sym", W="sym"), sch_jacobi),
        Suite("SCH-LEIBNIZ", "[U,V·W] = [U,V]·W + V·[U,W]", on_base(U="sym", V="sym", W="sym"), sch_leibniz),
        Suite("XI-DERIV", "i_A(B·C) = i_A(B)·C + (-1)^((k-1)p) B·i_A(C)",
              on_base(A="mixed+", B="mixed", C="mixed"), xi_deriv),
    ]
    return {s.id: s for s in suites}


SUITES = _catalog()


def list_suites():
    return [{"id": s.id, "formula": s.formula, "expected_failure": s.expected_failure} for s in SUITES.values()]


def get_suite(suite_id):
    try:
        return SUITES[suite_id]
    except KeyError:
        raise UnknownSuite(f"Unknown suite {suite_id!r}") from None


# --- Harness ---

def case_rng(seed, index, suite_id):
    return np.random.default_rng([seed, index, zlib.crc32(suite_id.encode())])


def render(value):
    if isinstance(value, tuple):
        return "(" + ", ".join(render(v) for v in value) + ")"
    if isinstance(value, ConnectionData):
        return "connection on " + str(value.chart)
    return str(value)


def _fails(suite, inputs):
    try:
        lhs, rhs = suite.check(**inputs)
    except FnsError:
        return True
    return lhs != rhs


def minimize(suite, inputs):
    """Greedily drop terms of each input field while the failure persists."""
    inputs = dict(inputs)
    for name, value in list(inputs.items()):
        if not isinstance(value, MixedField):
            continue
        for key in sorted(value.terms):
            current = inputs[name]
            if key not in current.terms or len(current.terms) == 1:
                continue
            smaller = MixedField(current.chart, current.k, current.l,
                                 {k: c for k, c in current.terms.items() if k != key})
            trial = dict(inputs, **{name: smaller})
            if _fails(suite, trial):
                inputs = trial
    return inputs


def witness_payload(suite, inputs, lhs, rhs, seed, index, error=None):
    payload = {
        "seed": seed,
        "case": index,
        "inputs": {name: render(value) for name, value in inputs.items()},
        "charts": {name: str(value.chart) for name, value in inputs.items() if hasattr(value, "chart")},
        "lhs": render(lhs) if lhs is not None else None,
        "rhs": render(rhs) if rhs is not None else None,
    }
    if error is not None:
        payload["error"] = error
    return payload


def evaluate_case(suite, config, index, inputs=None):
    seed = config.seed
    if inputs is None:
        inputs = suite.generate(case_rng(seed, index, suite.id), config)
    try:
        lhs, rhs = suite.check(**inputs)
    except FnsError as e:
        logger.debug("%s case %d raised %s", suite.id, index, e)
        return CaseResult(index, "error", witness_payload(suite, inputs, None, None, seed, index, str(e)))
    if lhs == rhs:
        return CaseResult(index, "pass")
    small = minimize(suite, inputs)
    try:
        lhs, rhs = suite.check(**small)
    except FnsError:
        small = inputs
    logger.debug("%s case %d failed: %s != %s", suite.id, index, render(lhs), render(rhs))
    return CaseResult(index, "fail", witness_payload(suite, small, lhs, rhs, seed, index))


def run_identity_suite(suite_id, config=None):
    suite = get_suite(suite_id)
    config = config or CaseConfig()
    logger.info("Running %s (%d cases, seed %d)", suite.id, config.cases, config.seed)
    start = time.perf_counter()
    jobs = []
    if suite.witness is not None:
        jobs.append((0, suite.witness()))
    offset = len(jobs)
    count = 1 if suite.fixed else config.cases * suite.scale
    jobs += [(offset + i, None) for i in range(count)]

    def run(job):
        index, inputs = job
        return evaluate_case(suite, config, index, inputs)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            cases = list(pool.map(run, jobs))
    else:
        cases = [run(job) for job in jobs]
    elapsed_ms = (time.perf_counter() - start) * 1000
    info = suite.info() if suite.info else {}
    if suite.expected_failure:
        info["independent_witnesses"] = sum(1 for c in cases[offset:] if c.verdict == "fail")
    report = Report(suite.id, config.to_dict(), cases, round(elapsed_ms, 3), suite.expected_failure, info)
    logger.info("%s: %s (%d/%d cases pass, %.1f ms)", suite.id, "ok" if report.ok else "FAILED",
                report.passed_cases, len(cases), elapsed_ms)
    return report


def run_all(config=None, suite_ids=None):
    return [run_identity_suite(suite_id, config) for suite_id in (suite_ids or SUITES)]
