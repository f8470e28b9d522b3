import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from fractions import Fraction

import numpy as np
import pytest

from backend.calculus import exterior_d, fn_bracket, lie_derivative
from backend.cotangent import (Obstruction, PoissonBivector, canonical_structures, graded_poisson_1,
                               graded_poisson_2, h_map, hamiltonian, horizontal_representative, poincare_primitive,
                               poisson_fn, pullback, pullback_inverse, rho_extend, symplectic_form, vertical_euler,
                               zero_section_pullback)
from backend.errors import InvalidPoisson, NotClosed, NotCotangent, NotHomogeneous, NotHorizontal
from backend.fields import Chart, parse_field, random_field


def F(text, chart):
    return parse_field(text, chart)


def test_canonical_structures(cot1, cot2):
    """Θ = Σ p dq and ω = Σ dq^dp."""
    data = canonical_structures(cot1)
    assert data.liouville == F("p1*dq1", cot1)
    assert data.symplectic == F("dq1^dp1", cot1)
    assert symplectic_form(cot2) == F("dq1^dp1 + dq2^dp2", cot2)


def test_canonical_structures_need_cotangent(base2):
    """Base charts carry no canonical data."""
    with pytest.raises(NotCotangent):
        canonical_structures(base2)


def test_poisson_fn_conventions(cot1):
    """{q1, p1} = -1 and {p1, q1} = 1."""
    q, p = cot1.coordinate(0), cot1.coordinate(1)
    assert poisson_fn(q, p) == -1
    assert poisson_fn(p, q) == 1


def test_hamiltonian_of_coordinates(cot1):
    """H(p1) = ∂/∂q1 and H(q1) = -∂/∂p1."""
    assert hamiltonian(F("p1", cot1)) == F("vq1", cot1)
    assert hamiltonian(F("q1", cot1)) == F("-vp1", cot1)


def test_rho_extend_two_form(cot1):
    """ρ(dq1^dp1) = -dp1⊗∂p1 - dq1⊗∂q1."""
    assert rho_extend(F("dq1^dp1", cot1)) == F("-dp1|vp1 - dq1|vq1", cot1)


def test_hamiltonian_field_preserves_symplectic_form(cot2):
    """L_{H f} ω = 0 for random f."""
    rng = np.random.default_rng(4)
    omega = symplectic_form(cot2)
    for _ in range(5):
        f = random_field(cot2, 0, 0, 3, rng, density=1.0)
        assert lie_derivative(hamiltonian(f), omega).is_zero()


def test_poisson_bivector_validation(cot1):
    """A non-skew matrix is rejected."""
    with pytest.raises(InvalidPoisson):
        PoissonBivector.from_matrix(cot1, [[0, 1], [1, 0]])
    rho = PoissonBivector.from_matrix(cot1, [[0, -2], [2, 0]])
    assert hamiltonian(F("p1", cot1), rho) == F("2*vq1", cot1)


def test_poisson_bivector_jacobi(base3):
    """A skew matrix whose bracket fails Jacobi is rejected; so(3) is accepted."""
    q1, q2, q3 = (base3.coordinate(i) for i in range(3))
    with pytest.raises(InvalidPoisson):
        PoissonBivector.from_matrix(base3, [[0, 1, 0], [-1, 0, q2], [0, -q2, 0]])
    rho = PoissonBivector.from_matrix(base3, [[0, q3, -q2], [-q3, 0, q1], [q2, -q1, 0]])
    f, g = q1 * q2, q3 * q3 + q1
    phi, psi = F("q2*dq1", base3), F("q1*q3", base3)
    assert fn_bracket(hamiltonian(phi, rho), hamiltonian(psi, rho)) == \
        hamiltonian(graded_poisson_1(phi, psi, rho), rho)
    assert poisson_fn(f, g, rho) == rho.bracket(f, g)


def test_pullback_examples(base2, cot2):
    """π* pairs ∂_j with p_j."""
    assert pullback(F("q1*v1.v2", base2)) == F("q1*p1*p2", cot2)
    assert pullback(F("dq1|v1", base2)) == F("p1*dq1", cot2)
    assert pullback(F("q2*dq1^dq2", base2)) == F("q2*dq1^dq2", cot2)


def test_pullback_inverse(base2, cot2):
    """Recover the base field from a horizontal homogeneous form."""
    assert pullback_inverse(F("p1*p2*dq1", cot2), 2) == F("dq1|v1.v2", base2)
    with pytest.raises(NotHorizontal):
        pullback_inverse(F("p1*dp1", cot2), 1)
    with pytest.raises(NotHomogeneous):
        pullback_inverse(F("p1 + p1*p2", cot2), 1)


def test_pullback_is_fiber_homogeneous(base2):
    """L_I π*A = l π*A."""
    rng = np.random.default_rng(8)
    for l in range(3):
        A = random_field(base2, 1, l, 2, rng)
        P = pullback(A)
        assert lie_derivative(vertical_euler(P.chart), P) == P.scale(l)


def test_vertical_euler(cot2):
    """I = Σ p ∂/∂p."""
    assert vertical_euler(cot2) == F("p1*vp1 + p2*vp2", cot2)


def test_h_map():
    """h(q1) = -∂/∂p1 and h(∂1) = ∂/∂q1."""
    base = Chart.base_chart(1)
    cot = Chart.cotangent_of(base)
    assert h_map(F("q1", base)) == F("-vp1", cot)
    assert h_map(F("v1", base)) == F("vq1", cot)
    assert h_map(F("3", base)).is_zero()


def test_graded_poisson_counterexample(cot2):
    """{p1 dq1, p1 p2}¹ = p2 dp1 with differential -dp1^dp2."""
    chi = graded_poisson_1(F("p1*dq1", cot2), F("p1*p2", cot2))
    assert chi == F("p2*dp1", cot2)
    assert exterior_d(chi) == F("-dp1^dp2", cot2)


def test_graded_poisson_on_functions(cot1):
    """Both brackets reduce to {f, g} on functions."""
    f, g = F("q1^2*p1", cot1), F("q1*p1^2", cot1)
    expected = poisson_fn(f.scalar(), g.scalar())
    assert graded_poisson_1(f, g).scalar() == expected
    assert graded_poisson_2(f, g).scalar() == expected


def test_gp_hom_sample(cot1):
    """[Hφ, Hψ] = H{φ,ψ}¹ on a sample."""
    phi, psi = F("q1*p1*dq1", cot1), F("p1^2", cot1)
    assert fn_bracket(hamiltonian(phi), hamiltonian(psi)) == hamiltonian(graded_poisson_1(phi, psi))


def test_poincare_primitive(base2):
    """P(dq1^dq2) = 1/2 (q1 dq2 - q2 dq1)."""
    primitive = poincare_primitive(F("dq1^dq2", base2))
    assert primitive == F("1/2*q1*dq2 - 1/2*q2*dq1", base2)
    assert exterior_d(primitive) == F("dq1^dq2", base2)


def test_poincare_primitive_random_exact(base2):
    """d P(dβ) = dβ."""
    rng = np.random.default_rng(12)
    for _ in range(10):
        w = exterior_d(random_field(base2, int(rng.integers(0, 2)), 0, 3, rng))
        if w.is_zero():
            continue
        assert exterior_d(poincare_primitive(w)) == w


def test_poincare_primitive_not_closed(base2):
    """Non-closed forms have no primitive."""
    with pytest.raises(NotClosed):
        poincare_primitive(F("q1*dq2", base2))


def test_horizontal_representative_found():
    """p1 dq1 + d(q1 p1) is π*(dq1⊗∂1) up to an exact form."""
    base = Chart.base_chart(1)
    cot = Chart.cotangent_of(base)
    chi = F("p1*dq1", cot) + exterior_d(F("q1*p1", cot))
    assert horizontal_representative(chi, 1) == F("dq1|v1", base)


def test_horizontal_representative_obstruction(cot2):
    """p2 dp1 is not π*A modulo exact forms."""
    verdict = horizontal_representative(F("p2*dp1", cot2), 2)
    assert isinstance(verdict, Obstruction)
    assert verdict.failed_check == "horizontal"
    assert verdict.to_dict()["failed_check"] == "horizontal"


def test_horizontal_representative_scaling(cot1):
    """The candidate carries the factor 1/l."""
    base = cot1.base
    chi = F("p1^2*dq1", cot1)
    assert horizontal_representative(chi, 2) == F("dq1|v1.v1", base)
    assert horizontal_representative(chi.scale(Fraction(1, 2)), 2) == F("1/2*dq1|v1.v1", base)


def test_zero_section_pullback(cot1):
    """dp factors and p-dependent terms vanish on p = 0."""
    w = F("p1*dq1 + q1*dq1 + dp1 + 2*dq1", cot1)
    assert zero_section_pullback(w) == F("q1*dq1 + 2*dq1", cot1.base)
