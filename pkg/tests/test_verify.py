import pytest

from superreflect import algebra
from superreflect.algebra import BoundarySpec, make_grading
from superreflect.gmatrix import GradedMatrix, TooFewSites, permutation_op, place
from superreflect.scalar import GaussRational, Laurent, sinh_of, var
from superreflect.verify import (
    EXACT,
    NUMERIC,
    NotProportional,
    SpecMismatch,
    TransferContext,
    UnitarityUnverified,
    build_transfer,
    check_baxterization,
    check_centrality,
    check_exchange_relation,
    check_gybe,
    check_hamiltonian,
    check_hecke_a,
    check_hecke_b,
    check_k_consistency,
    check_reflection,
    check_transfer_commutativity,
    check_unitarity,
    double_row_monodromy,
    extract_boundary_charges,
    hamiltonian,
    sample_points,
    unitarity_factor,
)
import superreflect.verify as verify_mod

x, q = var("x"), var("q")
G11 = make_grading("distinguished", 1, 1)
G21 = make_grading("distinguished", 2, 1)
S12 = make_grading("symmetric", 1, 2)
SPEC_S12 = BoundarySpec("symmetric", "mixed", 1)


def test_check_result_invariants():
    res = check_gybe(G11)
    assert res.passed and res.residual_terms == 0 and res.max_abs is None
    num = check_gybe(G11, NUMERIC, points=3)
    assert num.passed and num.residual_terms is None and num.max_abs < 1e-9
    d = num.as_dict()
    assert set(d) == {"name", "mode", "passed", "residual_terms", "max_abs", "elapsed_ms", "detail"}


def test_sampling_is_seeded_and_admissible():
    a = sample_points(["q", "x", "xi"], 30, 7)
    assert a == sample_points(["x", "q", "xi"], 30, 7)
    assert a != sample_points(["q", "x", "xi"], 30, 8)
    for pt in a:
        assert 0.5 <= abs(pt["x"]) <= 2.0
        assert min(abs(pt["q"] - w) for w in (1, -1, 1j, -1j)) >= 0.2


@pytest.mark.parametrize("g", [G11, G21])
def test_gybe_examples(g):
    assert check_gybe(g).residual_terms == 0


def test_gybe_fails_with_corrupted_permutation():
    # R built as P Rcheck with one sign flipped in P
    P = permutation_op(G11)
    rows = [dict(P.row(i)) for i in range(P.dim)]
    rows[1][2] = -rows[1][2]
    bad = GradedMatrix(G11, 2, rows)
    R = bad @ algebra.r_check(G11)
    res = check_gybe(G11, R=R)
    assert not res.passed and res.residual_terms > 0


def test_baxterization():
    for g in (G11, G21):
        assert check_baxterization(g).passed


@pytest.mark.parametrize("g,sites", [(G11, 3), (S12, 3), (G11, 4)])
def test_hecke_a(g, sites):
    assert check_hecke_a(g, sites).passed


def test_hecke_a_too_few_sites():
    with pytest.raises(TooFewSites):
        check_hecke_a(G11, 2)


def test_hecke_b_symmetric():
    assert check_hecke_b(SPEC_S12, S12).passed


def test_hecke_b_distinguished_single_parity():
    g = make_grading("distinguished", 3, 0)
    assert check_hecke_b(BoundarySpec("distinguished", "bosonic", 1), g).passed
    g = make_grading("distinguished", 0, 4)
    assert check_hecke_b(BoundarySpec("distinguished", "fermionic", 2), g).passed


def test_hecke_b_distinguished_bosonic_gl22():
    # both parities present; this case does not close (see README)
    g = make_grading("distinguished", 2, 2)
    assert check_hecke_b(BoundarySpec("distinguished", "bosonic", 1), g).passed


def test_hecke_b_fails_for_mixed_distinguished_element():
    g = make_grading("distinguished", 1, 2)
    res = check_hecke_b(None, g, e=algebra.mixed_distinguished_element(1, 2))
    assert not res.passed and res.residual_terms > 0


def test_hecke_b_numeric_agrees():
    assert check_hecke_b(SPEC_S12, S12, NUMERIC, points=5).passed


def test_reflection_identity_and_explicit():
    assert check_reflection(GradedMatrix.identity(S12), S12).passed
    assert check_reflection(algebra.k_matrix_explicit(SPEC_S12, S12), S12).passed


def test_reflection_theorem_form():
    e = algebra.boundary_e(SPEC_S12, S12)
    assert check_reflection(algebra.k_matrix_theorem(e), S12).passed


def test_reflection_fails_for_generic_diagonal():
    K = GradedMatrix.diagonal(S12, [x * x + 1, x * 3, x.invert_unit() - 2])
    res = check_reflection(K, S12)
    assert not res.passed and res.residual_terms > 0


def test_unitarity_examples():
    assert check_unitarity(G11).passed
    g20 = make_grading("distinguished", 2, 0)
    rho = unitarity_factor(g20)
    # sinh(i mu + lambda) sinh(i mu - lambda)
    assert rho == sinh_of(q * x) * sinh_of(q * x.invert_unit())
    sinh_imu = sinh_of(q)
    assert rho.substitute("x", Laurent.one()) == sinh_imu * sinh_imu
    assert unitarity_factor(G11).substitute("x", Laurent.one()) == sinh_imu * sinh_imu


def test_transfer_shape_and_commutativity():
    ctx = TransferContext(G11, 1)
    t = build_transfer(ctx)
    assert t.sites == 1 and t.dim == 2
    spec = BoundarySpec("distinguished", "bosonic", 0)
    assert check_transfer_commutativity(TransferContext(G11, 1, spec)).passed


def test_transfer_numeric_symmetric_two_sites():
    res = check_transfer_commutativity(TransferContext(S12, 2, SPEC_S12), NUMERIC, points=20)
    assert res.passed and res.max_abs < 1e-9


def test_transfer_plain_trace_fails():
    ctx = TransferContext(S12, 2, SPEC_S12, supertrace_sign=False)
    assert not check_transfer_commutativity(ctx, NUMERIC, points=3).passed


def test_transfer_refuses_without_unitarity(monkeypatch):
    monkeypatch.setitem(verify_mod._UNITARITY_OK, G11, False)
    with pytest.raises(UnitarityUnverified):
        build_transfer(TransferContext(G11, 1))


def test_charges_top_degree_identity_boundary():
    ctx = TransferContext(G11, 1)
    ch, deg = extract_boundary_charges(ctx, "+")
    R = algebra.r_matrix(G11)
    prod = place(R, (0, 1), 2) @ place(R, (1, 0), 2)
    lo, hi = prod.degree_range("x")
    assert deg == hi
    assert ch == prod.coeff_at_degree("x", hi)


def test_charge_degrees_even_spread_and_k_shift():
    for ctx in (TransferContext(G11, 2), TransferContext(S12, 1, SPEC_S12)):
        lo, hi = double_row_monodromy(ctx).degree_range("x")
        assert (hi - lo) % 2 == 0
    _, plain = extract_boundary_charges(TransferContext(S12, 1), "+")
    _, with_k = extract_boundary_charges(TransferContext(S12, 1, SPEC_S12), "+")
    assert with_k - plain == 2


def test_centrality_identity_boundary():
    res = check_centrality(TransferContext(G11, 2))
    assert res.passed and res.detail["u0"] is False


def test_centrality_symmetric():
    res = check_centrality(TransferContext(S12, 2, SPEC_S12))
    assert res.passed and res.detail["u0"] is True


def test_centrality_wrong_q_fails():
    ctx = TransferContext(S12, 2, SPEC_S12)
    U0 = algebra.boundary_e(SPEC_S12, S12, algebra.Q_OF_R * var("q"))
    assert not check_centrality(ctx, U0=U0).passed


def test_centrality_spec_mismatch():
    ctx = TransferContext(S12, 2, SPEC_S12, K=GradedMatrix.identity(S12))
    with pytest.raises(SpecMismatch):
        check_centrality(ctx)


@pytest.mark.parametrize("sign", ["+", "-"])
def test_exchange_examples(sign):
    assert check_exchange_relation(TransferContext(G11, 1), sign).passed
    assert check_exchange_relation(TransferContext(S12, 1, SPEC_S12), sign).passed


def test_exchange_swapped_ordering_fails():
    res = check_exchange_relation(TransferContext(S12, 1, SPEC_S12), "+", ordering="swapped")
    assert not res.passed


def test_k_consistency():
    res = check_k_consistency(SPEC_S12, S12)
    assert res.passed and res.detail["factor"] is not None
    g = G21
    assert check_k_consistency(BoundarySpec("distinguished", "bosonic", 1), g).passed
    with pytest.raises(NotProportional):
        check_k_consistency(SPEC_S12, S12, BoundarySpec("symmetric", "mixed", 0))


def test_hamiltonian_examples():
    ctx = TransferContext(G11, 2)
    H = hamiltonian(ctx)
    assert H.sites == 2 and H.dim == 4
    assert "x" not in {v for _, _, e in H.items() for v in e.variables()}
    assert check_hamiltonian(TransferContext(S12, 2, SPEC_S12), NUMERIC, points=5).passed


def test_numeric_passes_where_exact_passes():
    k = algebra.k_matrix_explicit(SPEC_S12, S12)
    assert check_reflection(k, S12, NUMERIC, points=10, seed=3).passed
    assert check_unitarity(S12, NUMERIC, points=5).passed
    assert check_centrality(TransferContext(S12, 2, SPEC_S12), NUMERIC, points=3).passed


def test_pinned_parameters():
    spec = BoundarySpec("symmetric", "mixed", 1, {1: Laurent.const(GaussRational(2, 1))})
    assert check_reflection(algebra.k_matrix_explicit(spec, S12), S12).passed
