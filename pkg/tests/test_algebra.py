import pytest

from superreflect.algebra import (
    I_UNIT,
    BoundarySpec,
    EmptyAlgebra,
    MixedOnDistinguished,
    OddNForSymmetric,
    SpecOutOfRange,
    active_pairs,
    boundary_e,
    hecke_params,
    hecke_u,
    k_matrix_explicit,
    k_matrix_theorem,
    m_matrix,
    make_grading,
    mixed_distinguished_element,
    r_matrix,
    valid_specs,
)
from superreflect.gmatrix import GradedMatrix, gtensor
from superreflect.scalar import GaussRational, Laurent, cosh_of, sinh_of, var

x, q, Q, r, xi = var("x"), var("q"), var("Q"), var("r"), var("xi")
HALF = Laurent.const(GaussRational("1/2"))


def idx(d, a, b):
    """Flat two-site index of the 1-based basis pair (a, b)."""
    return (a - 1) * d + (b - 1)


def test_grading_examples():
    g = make_grading("distinguished", 2, 1)
    assert g.parities == (0, 0, 1)
    assert g.conj == (1, 0, 2)
    g = make_grading("symmetric", 1, 2)
    assert g.parities == (0, 1, 0)
    assert g.conj == (2, 1, 0)
    g = make_grading("distinguished", 1, 0)
    assert g.parities == (0,) and g.conj == (0,)


def test_grading_errors():
    with pytest.raises(OddNForSymmetric):
        make_grading("symmetric", 1, 1)
    with pytest.raises(EmptyAlgebra):
        make_grading("distinguished", 0, 0)


def test_symmetric_edge_cases():
    # gl(m|0) symmetric puts every index in the odd block; gl(0|2k) is all even
    assert make_grading("symmetric", 2, 0).parities == (1, 1)
    assert make_grading("symmetric", 0, 2).parities == (0, 0)


def test_r_matrix_gl11_entries():
    g = make_grading("distinguished", 1, 1)
    R = r_matrix(g)
    d = 2
    a1 = (x * q - (x * q).invert_unit()) * HALF
    a2 = (x * q.invert_unit() - (x * q.invert_unit()).invert_unit()) * HALF
    b = sinh_of(x)
    assert R.entry(idx(d, 1, 1), idx(d, 1, 1)) == a1
    assert R.entry(idx(d, 2, 2), idx(d, 2, 2)) == a2
    assert R.entry(idx(d, 1, 2), idx(d, 1, 2)) == b
    assert R.entry(idx(d, 2, 1), idx(d, 2, 1)) == b
    # c_12 = -x sinh(i mu) and c_21 = x^-1 sinh(i mu), before the tensor sign
    c12 = gtensor(GradedMatrix.unit(g, 0, 1), GradedMatrix.unit(g, 1, 0)).entry(idx(d, 1, 2), idx(d, 2, 1))
    c21 = gtensor(GradedMatrix.unit(g, 1, 0), GradedMatrix.unit(g, 0, 1)).entry(idx(d, 2, 1), idx(d, 1, 2))
    assert R.entry(idx(d, 1, 2), idx(d, 2, 1)) == -x * sinh_of(q) * c12
    assert R.entry(idx(d, 2, 1), idx(d, 1, 2)) == x.invert_unit() * sinh_of(q) * c21


def test_r_matrix_bosonic_reduces():
    g = make_grading("distinguished", 2, 0)
    R = r_matrix(g)
    for a in (1, 2):
        assert R.entry(idx(2, a, a), idx(2, a, a)) == sinh_of(x * q)
    assert R.entry(idx(2, 1, 2), idx(2, 2, 1)) == x * sinh_of(q)
    assert R.entry(idx(2, 2, 1), idx(2, 1, 2)) == x.invert_unit() * sinh_of(q)


@pytest.mark.parametrize("kind,m,n", [("distinguished", 1, 1), ("distinguished", 2, 1), ("symmetric", 1, 2)])
def test_r_matrix_degree_split(kind, m, n):
    R = r_matrix(make_grading(kind, m, n))
    lo, hi = R.degree_range("x")
    assert (lo, hi) == (-1, 1)
    rp, rm = R.coeff_at_degree("x", 1), -R.coeff_at_degree("x", -1)
    assert R == rp * x - rm * x.invert_unit()
    assert R.coeff_at_degree("x", 0).is_zero()


def test_hecke_u_gl11_entries():
    g = make_grading("distinguished", 1, 1)
    U = hecke_u(g)
    d = 2
    assert U.entry(idx(d, 1, 1), idx(d, 1, 1)).is_zero()
    assert U.entry(idx(d, 2, 2), idx(d, 2, 2)) == -q.invert_unit() - q
    assert U.entry(idx(d, 2, 2), idx(d, 2, 2)) == hecke_params().delta
    assert U.entry(idx(d, 1, 2), idx(d, 1, 2)) == -q
    assert U.entry(idx(d, 2, 1), idx(d, 2, 1)) == -q.invert_unit()
    f12 = gtensor(GradedMatrix.unit(g, 0, 1, -1), GradedMatrix.unit(g, 1, 0))
    f21 = gtensor(GradedMatrix.unit(g, 1, 0, 1), GradedMatrix.unit(g, 0, 1))
    assert U.entry(idx(d, 1, 2), idx(d, 2, 1)) == f12.entry(idx(d, 1, 2), idx(d, 2, 1))
    assert U.entry(idx(d, 2, 1), idx(d, 1, 2)) == f21.entry(idx(d, 2, 1), idx(d, 1, 2))


@pytest.mark.parametrize("kind,m,n", [("distinguished", 1, 1), ("distinguished", 2, 1), ("symmetric", 1, 2)])
def test_hecke_u_quadratic_and_constant(kind, m, n):
    g = make_grading(kind, m, n)
    U = hecke_u(g)
    assert U @ U == U * hecke_params().delta
    assert "x" not in {v for _, _, e in U.items() for v in e.variables()}


def test_non_super_limit_signs():
    g = make_grading("distinguished", 3, 0)
    U = hecke_u(g)
    for a in range(1, 4):
        for b in range(1, 4):
            if a != b:
                assert U.entry(idx(3, a, b), idx(3, b, a)) == 1


def test_boundary_e_symmetric():
    g = make_grading("symmetric", 1, 2)
    e = boundary_e(BoundarySpec("symmetric", "mixed", 1), g)
    c = var("c_1")
    expect = GradedMatrix.from_entries(
        g, 1, {(0, 0): -Q.invert_unit(), (2, 2): -Q, (0, 2): c, (2, 0): c.invert_unit()}
    )
    assert e == expect
    assert e.entry(1, 1).is_zero()
    assert e @ e == e * hecke_params().delta0


def test_boundary_e_distinguished_bosonic():
    g = make_grading("distinguished", 2, 1)
    e = boundary_e(BoundarySpec("distinguished", "bosonic", 1), g)
    c = var("c_1")
    expect = GradedMatrix.from_entries(
        g, 1, {(0, 0): -Q.invert_unit(), (1, 1): -Q, (0, 1): c, (1, 0): c.invert_unit()}
    )
    assert e == expect


@pytest.mark.parametrize("kind,m,n", [("symmetric", 2, 2), ("distinguished", 4, 0), ("distinguished", 1, 3)])
def test_boundary_e_support(kind, m, n):
    g = make_grading(kind, m, n)
    for spec in valid_specs(kind, m, n):
        e = boundary_e(spec, g)
        active = {i - 1 for pair in active_pairs(spec, g) for i in pair}
        rows = {i for i, _, _ in e.items()} | {j for _, j, _ in e.items()}
        assert rows == active
        assert len(active) == 2 * len(active_pairs(spec, g))


def test_spec_errors():
    g = make_grading("distinguished", 1, 2)
    with pytest.raises(MixedOnDistinguished):
        active_pairs(BoundarySpec("distinguished", "mixed", 1), g)
    with pytest.raises(SpecOutOfRange):
        active_pairs(BoundarySpec("distinguished", "bosonic", 1), g)
    with pytest.raises(SpecOutOfRange):
        active_pairs(BoundarySpec("distinguished", "fermionic", 3), g)
    with pytest.raises(SpecOutOfRange):
        active_pairs(BoundarySpec("distinguished", "fermionic", 1), make_grading("distinguished", 1, 1))
    with pytest.raises(SpecOutOfRange):
        active_pairs(BoundarySpec("symmetric", "mixed", 2), make_grading("symmetric", 1, 2))
    with pytest.raises(SpecOutOfRange):
        active_pairs(BoundarySpec("symmetric", "mixed", 1, {2: var("q")}), make_grading("symmetric", 1, 2))


def test_degenerate_spec_is_diagonal():
    g = make_grading("distinguished", 2, 1)
    spec = BoundarySpec("distinguished", "bosonic", 0)
    assert active_pairs(spec, g) == []
    K = k_matrix_explicit(spec, g)
    inert = cosh_of(x * x * r) - xi
    assert K == GradedMatrix.identity(g) * inert


def test_k_explicit_symmetric_entries():
    g = make_grading("symmetric", 1, 2)
    K = k_matrix_explicit(BoundarySpec("symmetric", "mixed", 1), g)
    c = var("c_1")
    x2 = x * x
    rr = (r + r.invert_unit()) * HALF
    assert K.entry(0, 0) == x2 * rr - xi
    assert K.entry(2, 2) == x2.invert_unit() * rr - xi
    assert K.entry(0, 2) == I_UNIT * c * (x2 - x2.invert_unit()) * HALF
    assert K.entry(2, 0) == I_UNIT * c.invert_unit() * (x2 - x2.invert_unit()) * HALF
    assert K.entry(1, 1) == (x2 * r + (x2 * r).invert_unit()) * HALF - xi


def test_k_explicit_structure():
    g = make_grading("symmetric", 2, 2)
    for spec in valid_specs("symmetric", 2, 2):
        K = k_matrix_explicit(spec, g)
        for _, _, v in K.items():
            lo, hi = v.degree_range("x")
            assert {d for d in range(lo, hi + 1) if not v.coeff_at_degree("x", d).is_zero()} <= {-2, 0, 2}
        at_one = K.substitute("x", Laurent.one())
        value = at_one.entry(0, 0)
        assert at_one == GradedMatrix.identity(g) * value
        at_minus = K.substitute("x", Laurent.const(-1))
        assert all(i == j for i, j, _ in at_minus.items())


def test_k_theorem_zero_element_is_scalar():
    g = make_grading("distinguished", 2, 1)
    K = k_matrix_theorem(GradedMatrix.zeros(g))
    assert K == GradedMatrix.identity(g) * K.entry(0, 0)


def test_m_matrix_examples():
    assert m_matrix(make_grading("distinguished", 1, 1)) == GradedMatrix.identity(make_grading("distinguished", 1, 1)) * q
    g20 = make_grading("distinguished", 2, 0)
    assert m_matrix(g20) == GradedMatrix.diagonal(g20, [q, q.invert_unit()])
    for _, _, v in m_matrix(make_grading("symmetric", 2, 2)).items():
        assert v.is_monomial() and v.variables() == {"q"}


def test_mixed_element_uses_both_parities():
    e = mixed_distinguished_element(1, 2)
    g = e.grading
    touched = {i for i, _, _ in e.items()}
    assert {g.parities[i] for i in touched} == {0, 1}
    with pytest.raises(SpecOutOfRange):
        mixed_distinguished_element(2, 0)


def test_valid_specs_counts():
    assert [s.L for s in valid_specs("symmetric", 1, 2)] == [1]
    assert [(s.family.value, s.L) for s in valid_specs("distinguished", 2, 2)] == [("bosonic", 1), ("fermionic", 3)]
    assert valid_specs("distinguished", 1, 1) == []
