from fractions import Fraction
from math import comb

import numpy as np
import pytest

from g2mu import linalg
from g2mu.exterior import DIM, ExteriorForm, inner, interior, wedge
from g2mu.g2 import G2Structure, TypeLabel, standard_phi0

COMPONENTS = {2: (7, 14), 3: (1, 7, 27)}


@pytest.fixture(scope="module")
def s():
    return G2Structure.standard()


def rand_form(rng, p):
    n = comb(DIM, p)
    return ExteriorForm(p, rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n))


def test_phi0_coefficients():
    phi = standard_phi0()
    assert phi.coefficient((1, 2, 3)) == 1
    assert phi.coefficient((2, 5, 7)) == -1
    assert sum(1 for c in phi.coeffs if c != 0) == 7


def test_psi_not_hardcoded(s):
    pairing = wedge(s.phi, s.psi)
    assert pairing.coeffs[0] == 7 * s.metric.vol


def test_type_label_validation():
    with pytest.raises(ValueError):
        TypeLabel(2, 27)
    with pytest.raises(ValueError):
        TypeLabel(4, 7)
    assert TypeLabel(3, 27).component == 27


def test_type_basis_dimensions_and_orthonormality(s):
    for grade, comps in COMPONENTS.items():
        for comp in comps:
            basis = s.type_basis(TypeLabel(grade, comp))
            assert len(basis) == comp
            gram = np.array([[complex(inner(a, b, s.metric)) for b in basis]
                             for a in basis])
            assert np.max(np.abs(gram - np.eye(comp))) < 1e-12


def test_projector_ranks_and_completeness(s):
    eye2 = linalg.identity_frac(21)
    eye3 = linalg.identity_frac(35)
    p27, p214 = s.projector(2, 7), s.projector(2, 14)
    assert np.equal(p27 + p214, eye2).all()
    assert linalg.rank(p27) == 7 and linalg.rank(p214) == 14
    p31, p37, p327 = s.projector(3, 1), s.projector(3, 7), s.projector(3, 27)
    assert np.equal(p31 + p37 + p327, eye3).all()
    assert [linalg.rank(p) for p in (p31, p37, p327)] == [1, 7, 27]


def test_projector_idempotent_orthogonal(s):
    for grade, comps in COMPONENTS.items():
        projs = [s.projector(grade, c) for c in comps]
        for i, p in enumerate(projs):
            assert np.equal(p @ p, p).all()
            for j, q in enumerate(projs):
                if i != j:
                    assert all(x == 0 for x in (p @ q).flat)


def test_projection_completeness_random(s):
    rng = np.random.default_rng(0)
    for _ in range(25):
        a2 = rand_form(rng, 2)
        total = s.project(TypeLabel(2, 7), a2) + s.project(TypeLabel(2, 14), a2)
        assert total.allclose(a2, 1e-12)
        a3 = rand_form(rng, 3)
        total3 = (s.project(TypeLabel(3, 1), a3) + s.project(TypeLabel(3, 7), a3)
                  + s.project(TypeLabel(3, 27), a3))
        assert total3.allclose(a3, 1e-12)


def test_star_equivariance(s):
    # star o pi_q = pi_q o star wherever both sides are defined
    from g2mu.exterior import hodge_star
    rng = np.random.default_rng(1)
    for grade, comps in COMPONENTS.items():
        for comp in comps:
            a = rand_form(rng, grade)
            lhs = hodge_star(s.project(TypeLabel(grade, comp), a), s.metric)
            rhs = s.project(TypeLabel(grade, comp), hodge_star(a, s.metric))
            assert lhs.allclose(rhs, 1e-12)


def test_project_dual_grades(s):
    rng = np.random.default_rng(2)
    a4 = rand_form(rng, 4)
    parts = [s.project(TypeLabel(3, c), a4) for c in (1, 7, 27)]
    total = parts[0] + parts[1] + parts[2]
    assert total.allclose(a4, 1e-12)
    with pytest.raises(ValueError):
        s.project(TypeLabel(2, 7), a4)


def test_pi14_kills_type7(s):
    v7 = interior([1, 0, 0, 0, 0, 0, 0], s.phi)
    assert s.project(TypeLabel(2, 14), v7).is_zero()
    assert s.project(TypeLabel(2, 7), v7) == v7


def test_phi_is_pure_type_one(s):
    assert s.project(TypeLabel(3, 1), s.phi) == s.phi
    assert s.project(TypeLabel(3, 7), s.phi).is_zero()
    assert s.project(TypeLabel(3, 27), s.phi).is_zero()


def test_apply_I_and_J(s):
    assert s.apply_I(s.phi) == s.phi.scale(Fraction(4, 3))
    assert s.apply_J(s.psi) == s.psi.scale(Fraction(3, 4))
    rng = np.random.default_rng(3)
    a = rand_form(rng, 3)
    a27 = s.project(TypeLabel(3, 27), a)
    assert s.apply_I(a27).allclose(a27.scale(-1), 1e-12)
    # I^2 = (16/9) pi_1 + pi_7 + pi_27
    lhs = s.apply_I(s.apply_I(a))
    rhs = (s.project(TypeLabel(3, 1), a).scale(Fraction(16, 9))
           + s.project(TypeLabel(3, 7), a) + s.project(TypeLabel(3, 27), a))
    assert lhs.allclose(rhs, 1e-12)


def test_I_self_adjoint(s):
    rng = np.random.default_rng(4)
    a, b = rand_form(rng, 3), rand_form(rng, 3)
    lhs = inner(s.apply_I(a), b, s.metric)
    rhs = inner(a, s.apply_I(b), s.metric)
    assert abs(lhs - rhs) < 1e-11


def test_J_squares_correctly(s):
    rng = np.random.default_rng(6)
    a = rand_form(rng, 4)
    lhs = s.apply_J(s.apply_J(a))
    rhs = (s.project(TypeLabel(3, 1), a).scale(Fraction(9, 16))
           + s.project(TypeLabel(3, 7), a) + s.project(TypeLabel(3, 27), a))
    assert lhs.allclose(rhs, 1e-12)
    b = rand_form(rng, 4)
    assert abs(inner(s.apply_J(a), b, s.metric) - inner(a, s.apply_J(b), s.metric)) < 1e-11


def test_is_g2_element(s):
    eye = [[1 if i == j else 0 for j in range(7)] for i in range(7)]
    assert s.is_g2_element(eye)
    alpha = [[(1 if i < 3 else -1) if i == j else 0 for j in range(7)] for i in range(7)]
    assert s.is_g2_element(alpha)
    bad = [[(-1 if i == j == 0 else (1 if i == j else 0)) for j in range(7)]
           for i in range(7)]
    assert not s.is_g2_element(bad)


def test_rational_frame_structure():
    F = [[1, 1, 0, 0, 0, 0, 0],
         [0, 1, 0, 0, 0, 0, 0],
         [0, 0, 2, 0, 0, 0, 0],
         [0, 0, 0, 1, 0, 0, 0],
         [0, 0, 0, 0, 1, 0, 0],
         [0, 0, 0, 0, 0, 1, 0],
         [0, 0, 0, 0, 0, 0, 1]]
    s2 = G2Structure(F)
    assert s2.metric.vol == 2
    assert wedge(s2.phi, s2.psi).coeffs[0] == 14
    rng = np.random.default_rng(5)
    a = rand_form(rng, 2)
    total = s2.project(TypeLabel(2, 7), a) + s2.project(TypeLabel(2, 14), a)
    assert total.allclose(a, 1e-9)
    # projections stay orthogonal w.r.t. the frame metric
    p7 = s2.project(TypeLabel(2, 7), a)
    p14 = s2.project(TypeLabel(2, 14), a)
    assert abs(inner(p7, p14, s2.metric)) < 1e-9
