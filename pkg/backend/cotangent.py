"""
The cotangent chart T*R^m with coordinates (q1..qm, p1..pm) and the maps
that lift base data to it: Θ, ω, ρ, H, π*, h, the vertical Euler field,
the graded Poisson brackets on forms, and the membership test behind the
counterexample "{φ,ψ}¹ does not lie in the image of h".

Conventions: ρ(dp_i) = ∂/∂q_i, ρ(dq_i) = -∂/∂p_i, {f,g} = i_{H_f} dg, and
π* pairs ∂_{j1}∨...∨∂_{jl} with the monomial p_{j1}...p_{jl} (no factorials).

`horizontal_representative` decides whether χ ≡ π*A modulo exact forms.
If χ = π*A + dβ then dχ = dπ*A, and since i_I π*A = 0 and L_I π*A = l π*A
the candidate π*A equals (1/l) i_I dχ. So the candidate is built first and
then checked for horizontality, fiber homogeneity and dΦ = dχ.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from backend.calculus import exterior_d, insert, lie_derivative
from backend.errors import (BadValence, ChartMismatch, InvalidPoisson, MixedDegrees, NotCotangent,
                            NotClosed, NotHomogeneous, NotHorizontal, NotScalarForm)
from backend.fields import Chart, MixedField, normalize
from backend.polyring import Polynomial

logger = logging.getLogger(__name__)


def _require_cotangent(chart):
    if not chart.is_cotangent:
        raise NotCotangent(f"Expected a cotangent chart, got {chart}")


def chart_of_variables(variables):
    """Recover the base or cotangent chart whose variables are `variables`."""
    variables = tuple(variables)
    n = len(variables)
    if n % 2 == 0 and n:
        cot = Chart.cotangent_of(Chart.base_chart(n // 2))
        if cot.variables == variables:
            return cot
    base = Chart.base_chart(n)
    if base.variables == variables:
        return base
    return Chart(variables)


# --- Poisson structures ---

@dataclass(frozen=True)
class PoissonBivector:
    """ρ^{ab} as a full skew matrix of polynomials on `chart`."""
    chart: Chart
    components: tuple

    @classmethod
    def from_matrix(cls, chart, matrix):
        n = chart.dimension
        if len(matrix) != n or any(len(row) != n for row in matrix):
            raise InvalidPoisson(f"Poisson matrix must be {n}x{n}")
        rows = tuple(tuple(c if isinstance(c, Polynomial) else chart.poly(c) for c in row) for row in matrix)
        rho = cls(chart, rows)
        rho.validate()
        return rho

    def __getitem__(self, ab):
        a, b = ab
        return self.components[a][b]

    def image(self, a):
        """ρ(dx^a) as raw (index, coefficient) pairs."""
        return [(b, c) for b, c in enumerate(self.components[a]) if not c.is_zero()]

    def bracket(self, f, g):
        n = self.chart.dimension
        total = self.chart.poly(0)
        df = [f.partial_derivative(a) for a in range(n)]
        dg = [g.partial_derivative(b) for b in range(n)]
        for a in range(n):
            if df[a].is_zero():
                continue
            for b, c in self.image(a):
                total = total + c * df[a] * dg[b]
        return total

    def validate(self):
        n = self.chart.dimension
        for a in range(n):
            for b in range(n):
                if self[a, b] != -self[b, a]:
                    raise InvalidPoisson(f"Poisson matrix is not skew at ({a},{b})")
        coords = [self.chart.coordinate(a) for a in range(n)]
        for a in range(n):
            for b in range(a + 1, n):
                for c in range(b + 1, n):
                    x, y, z = coords[a], coords[b], coords[c]
                    jacobi = (self.bracket(x, self.bracket(y, z)) + self.bracket(y, self.bracket(z, x))
                              + self.bracket(z, self.bracket(x, y)))
                    if not jacobi.is_zero():
                        raise InvalidPoisson(f"Jacobi identity fails on coordinates ({a},{b},{c}): {jacobi}")


@dataclass(frozen=True)
class CanonicalData:
    liouville: MixedField
    symplectic: MixedField
    rho: PoissonBivector = field(repr=False)


@lru_cache(maxsize=None)
def canonical_structures(chart):
    _require_cotangent(chart)
    m = chart.base_dimension
    theta = normalize(chart, [((chart.q_index(i),), (), chart.coordinate(chart.p_index(i))) for i in range(m)], 1, 0)
    omega = normalize(chart, [((chart.q_index(i), chart.p_index(i)), (), 1) for i in range(m)], 2, 0)
    matrix = [[chart.poly(0) for _ in range(2 * m)] for _ in range(2 * m)]
    for i in range(m):
        matrix[chart.p_index(i)][chart.q_index(i)] = chart.poly(1)
        matrix[chart.q_index(i)][chart.p_index(i)] = chart.poly(-1)
    rho = PoissonBivector(chart, tuple(tuple(row) for row in matrix))
    return CanonicalData(theta, omega, rho)


def _rho_for(chart, rho):
    if rho is None:
        return canonical_structures(chart).rho
    if rho.chart != chart:
        raise ChartMismatch(f"Poisson structure lives on {rho.chart}, field on {chart}")
    return rho


def rho_extend(w, rho=None):
    """ρ(φ1∧...∧φk) = Σ_i (-1)^(i-1) φ1∧..φ̂i..∧φk ⊗ ρ(φi); zero on functions."""
    if w.l != 0:
        raise NotScalarForm(f"rho acts on scalar forms, got bidegree ({w.k},{w.l})")
    rho = _rho_for(w.chart, rho)
    if w.k == 0:
        return MixedField.zero(w.chart, 0, 1)
    raw = []
    for (I, _), f in w.terms.items():
        for r, a in enumerate(I):
            rest = I[:r] + I[r + 1:]
            for b, c in rho.image(a):
                coeff = f * c
                raw.append((rest, (b,), -coeff if r % 2 else coeff))
    return normalize(w.chart, raw, w.k - 1, 1)


def hamiltonian(psi, rho=None):
    """H(ψ) = ρ(dψ)."""
    return rho_extend(exterior_d(psi), rho)


def poisson_fn(f, g, rho=None):
    if f.variables != g.variables:
        raise ChartMismatch(f"Polynomials live on different charts: {f.variables} vs {g.variables}")
    chart = rho.chart if rho is not None else chart_of_variables(f.variables)
    if chart.variables != f.variables:
        raise ChartMismatch("Poisson structure does not live on the polynomials' chart")
    return _rho_for(chart, rho).bracket(f, g)


# --- Lifting base data ---

def pullback(A, cotangent=None):
    """π*: f dx^I ⊗ ∂_{j1}∨...∨∂_{jl} -> f(q) p_{j1}...p_{jl} dq^I."""
    cotangent = cotangent or Chart.cotangent_of(A.chart)
    _require_cotangent(cotangent)
    if cotangent.base != A.chart:
        raise ChartMismatch(f"{A.chart} is not the base of {cotangent}")
    m = A.chart.dimension
    raw = []
    for (I, S), f in A.terms.items():
        coeff = f.embed(cotangent.variables, range(m))
        for j in S:
            coeff = coeff * cotangent.coordinate(cotangent.p_index(j))
        raw.append((I, (), coeff))
    return normalize(cotangent, raw, A.k, 0)


def vertical_euler(chart):
    _require_cotangent(chart)
    m = chart.base_dimension
    return normalize(chart, [((), (chart.p_index(i),), chart.coordinate(chart.p_index(i))) for i in range(m)], 0, 1)


def is_horizontal(w):
    m = w.chart.base_dimension
    return all(a < m for (I, _) in w.terms for a in I)


def pullback_inverse(Phi, l):
    """Recover A on the base from a horizontal form homogeneous of fiber degree l."""
    _require_cotangent(Phi.chart)
    if Phi.l != 0:
        raise NotScalarForm(f"Expected a scalar form on the cotangent chart, got ({Phi.k},{Phi.l})")
    if l < 0:
        raise BadValence(f"Tensor degree must be non-negative, got {l}")
    if not is_horizontal(Phi):
        raise NotHorizontal(f"Form has a dp factor: {Phi}")
    base = Phi.chart.base
    m = base.dimension
    raw = []
    for (I, _), c in Phi.terms.items():
        for exps, value in c.terms.items():
            fiber = exps[m:]
            if sum(fiber) != l:
                raise NotHomogeneous(f"Coefficient {c} is not homogeneous of fiber degree {l}")
            sym = tuple(j for j, e in enumerate(fiber) for _ in range(e))
            raw.append((I, sym, Polynomial(base.variables, {exps[:m]: value})))
    return normalize(base, raw, Phi.k, l)


def h_map(A, rho=None):
    """h = H ∘ π*."""
    P = pullback(A)
    return hamiltonian(P, rho)


# --- Graded Poisson brackets ---

def graded_poisson_1(phi, psi, rho=None):
    """{φ,ψ}¹ = i(H φ) dψ, of form degree p+q."""
    if phi.chart != psi.chart:
        raise ChartMismatch(f"Forms live on different charts: {phi.chart} vs {psi.chart}")
    return insert(hamiltonian(phi, rho), exterior_d(psi))


def graded_poisson_2(phi, psi, rho=None):
    """{φ,ψ}² = L_{H φ} ψ, of form degree p+q."""
    if phi.chart != psi.chart:
        raise ChartMismatch(f"Forms live on different charts: {phi.chart} vs {psi.chart}")
    return lie_derivative(hamiltonian(phi, rho), psi)


# --- Exactness ---

def poincare_primitive(w):
    """Radial homotopy primitive: d(P ω) = ω for closed ω of degree >= 1."""
    if w.l != 0:
        raise NotScalarForm(f"Primitives are taken of scalar forms, got ({w.k},{w.l})")
    if w.k < 1:
        raise MixedDegrees("Primitives exist for forms of degree >= 1")
    if not exterior_d(w).is_zero():
        raise NotClosed(f"Form is not closed: {w}")
    chart = w.chart
    raw = []
    for (I, _), c in w.terms.items():
        for exps, value in c.terms.items():
            weight = Fraction(value, w.k + sum(exps))
            mono = Polynomial(chart.variables, {exps: weight})
            for r, a in enumerate(I):
                coeff = mono * chart.coordinate(a)
                raw.append((I[:r] + I[r + 1:], (), -coeff if r % 2 else coeff))
    return normalize(chart, raw, w.k - 1, 0)


@dataclass(frozen=True)
class Obstruction:
    """Why χ is not π*A modulo exact forms; `candidate` is (1/l) i_I dχ."""
    candidate: MixedField
    failed_check: str
    message: str

    def to_dict(self):
        return {"candidate": str(self.candidate), "failed_check": self.failed_check, "message": self.message}


def horizontal_representative(chi, l):
    """Return A with χ - π*A closed, or an Obstruction naming the failing check."""
    _require_cotangent(chi.chart)
    if l < 1:
        raise BadValence(f"Tensor degree must be at least 1, got {l}")
    d_chi = exterior_d(chi)
    candidate = insert(vertical_euler(chi.chart), d_chi).scale(Fraction(1, l))
    if not is_horizontal(candidate):
        logger.debug("Candidate %s is not horizontal", candidate)
        return Obstruction(candidate, "horizontal", f"candidate {candidate} has a dp factor")
    try:
        A = pullback_inverse(candidate, l)
    except NotHomogeneous as e:
        return Obstruction(candidate, "homogeneous", str(e))
    if exterior_d(candidate) != d_chi:
        return Obstruction(candidate, "differential", f"d({candidate}) differs from d(chi)")
    return A


def symplectic_form(chart):
    return canonical_structures(chart).symplectic


def zero_section_pullback(w):
    """s*ω along the zero section p = 0: dp factors and p-dependent terms drop out."""
    _require_cotangent(w.chart)
    if w.l != 0:
        raise NotScalarForm(f"Expected a scalar form on the cotangent chart, got ({w.k},{w.l})")
    base = w.chart.base
    m = base.dimension
    raw = []
    for (I, _), c in w.terms.items():
        if any(a >= m for a in I):
            continue
        restricted = {exps[:m]: value for exps, value in c.terms.items() if not any(exps[m:])}
        raw.append((I, (), Polynomial(base.variables, restricted)))
    return normalize(base, raw, w.k, 0)
