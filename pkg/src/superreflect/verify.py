"""Relation checkers and the integrability constructions built on them.

Every check assembles both sides of a relation from exact building blocks.
In exact mode the residual ``lhs - rhs`` must be the zero matrix over Laurent
polynomials. In numeric mode the same building blocks are evaluated at seeded
random points and the residual, scaled by the largest entry of either side
(floored at 1 so that sides which cancel to zero are not compared with their
own rounding noise), must stay below ``tolerance``.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import algebra
from .algebra import BoundarySpec, Q_OF_R
from .gmatrix import GradedMatrix, Grading, NumericMatrix, TooFewSites, block, embed, place, supertrace_aux
from .scalar import Laurent, sinh_of, var

__all__ = [
    "EXACT",
    "NUMERIC",
    "CheckResult",
    "TransferContext",
    "UnitarityUnverified",
    "NotProportional",
    "SpecMismatch",
    "sample_points",
    "check_gybe",
    "check_baxterization",
    "check_hecke_a",
    "check_hecke_b",
    "check_reflection",
    "check_unitarity",
    "unitarity_factor",
    "build_transfer",
    "double_row_monodromy",
    "check_transfer_commutativity",
    "extract_boundary_charges",
    "charge_blocks",
    "r_plus_minus",
    "check_hamiltonian",
    "check_centrality",
    "check_exchange_relation",
    "check_k_consistency",
    "hamiltonian",
]

EXACT = "exact"
NUMERIC = "numeric"
DEFAULT_TOLERANCE = 1e-9


class UnitarityUnverified(RuntimeError):
    pass


class NotProportional(ValueError):
    pass


class SpecMismatch(ValueError):
    pass


@dataclass
class CheckResult:
    name: str
    mode: str
    passed: bool
    residual_terms: int | None = None
    max_abs: float | None = None
    elapsed_ms: int = 0
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "mode": self.mode,
            "passed": self.passed,
            "residual_terms": self.residual_terms,
            "max_abs": self.max_abs,
            "elapsed_ms": self.elapsed_ms,
            "detail": self.detail or None,
        }


# --- sampling -----------------------------------------------------------------


def _unit_sample(rng: np.random.Generator) -> complex:
    return float(rng.uniform(0.5, 2.0)) * cmath.exp(1j * float(rng.uniform(-math.pi, math.pi)))


def sample_points(names: Iterable[str], points: int, seed: int) -> list[dict[str, complex]]:
    """Seeded assignments for every name; units on the annulus 0.5 <= |v| <= 2.

    ``q`` is kept at distance >= 0.2 from +-1 and +-i (the isotropic point and
    the zero of ``q + 1/q``).
    """
    rng = np.random.default_rng(seed)
    names = sorted(set(names))
    out = []
    for _ in range(points):
        pt = {}
        for name in names:
            if name == "xi":
                pt[name] = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
                continue
            v = _unit_sample(rng)
            if name == "q":
                while min(abs(v - w) for w in (1, -1, 1j, -1j)) < 0.2:
                    v = _unit_sample(rng)
            pt[name] = v
        out.append(pt)
    return out


def _names_of(mats: Iterable[GradedMatrix]) -> set[str]:
    names = set()
    for M in mats:
        for _, _, v in M.items():
            names |= v.variables()
    return names


def _run(
    name: str,
    blocks: dict[str, GradedMatrix],
    relation: Callable[[dict], list[tuple]],
    mode: str,
    *,
    points: int = 20,
    seed: int = 0,
    tolerance: float = DEFAULT_TOLERANCE,
    detail: dict | None = None,
) -> CheckResult:
    """Evaluate ``relation`` (a list of (lhs, rhs) pairs) in the chosen mode."""
    start = time.perf_counter()
    detail = dict(detail or {})
    if mode == EXACT:
        terms = 0
        for lhs, rhs in relation(blocks):
            terms += (lhs - rhs).residual_terms()
        passed = terms == 0
        return CheckResult(name, EXACT, passed, terms, None, _ms(start), detail)
    if mode != NUMERIC:
        raise ValueError(f"unknown mode {mode!r}")
    worst = 0.0
    for pt in sample_points(_names_of(blocks.values()), points, seed):
        nb = {k: v.evaluate(pt) for k, v in blocks.items()}
        for lhs, rhs in relation(nb):
            scale = max(lhs.max_abs(), rhs.max_abs(), 1.0)
            worst = max(worst, (lhs - rhs).max_abs() / scale)
    detail.setdefault("points", points)
    detail.setdefault("seed", seed)
    return CheckResult(name, NUMERIC, worst < tolerance, None, worst, _ms(start), detail)


def _ms(start: float) -> int:
    return int(round((time.perf_counter() - start) * 1000))


def _spectral(M: GradedMatrix, value: Laurent, name: str = "x") -> GradedMatrix:
    return M.substitute(name, value)


X1, X2 = var("x1"), var("x2")


# --- bulk relations -----------------------------------------------------------


def check_gybe(g: Grading, mode: str = EXACT, R: GradedMatrix | None = None, **kw) -> CheckResult:
    """Graded Yang-Baxter equation on three sites."""
    R = algebra.r_matrix(g) if R is None else R
    blocks = {
        "d": _spectral(R, X1 * X2.invert_unit()),
        "a": _spectral(R, X1),
        "b": _spectral(R, X2),
    }

    def relation(b):
        r12 = place(b["d"], (0, 1), 3)
        r13 = place(b["a"], (0, 2), 3)
        r23 = place(b["b"], (1, 2), 3)
        return [(r12 @ r13 @ r23, r23 @ r13 @ r12)]

    return _run("gybe", blocks, relation, mode, **kw)


def check_baxterization(g: Grading, mode: str = EXACT, **kw) -> CheckResult:
    """``P R(lambda) = sinh(lambda) U + sinh(lambda + i mu) I``."""
    x, q = var("x"), var("q")
    blocks = {
        "rc": algebra.r_check(g),
        "rhs": algebra.hecke_u(g) * sinh_of(x) + GradedMatrix.identity(g, 2) * sinh_of(x * q),
    }
    return _run("baxterization", blocks, lambda b: [(b["rc"], b["rhs"])], mode, **kw)


def check_hecke_a(g: Grading, sites: int = 3, mode: str = EXACT, U: GradedMatrix | None = None, **kw):
    """Relations of the A-type Hecke algebra on ``sites`` tensor factors."""
    if sites < 3:
        raise TooFewSites("the braid-like relation needs at least 3 sites")
    U = algebra.hecke_u(g) if U is None else U
    blocks = {"U": U, "delta": GradedMatrix.identity(g) * algebra.hecke_params().delta}

    def relation(b):
        gens = [embed(b["U"], i, sites) for i in range(1, sites)]
        pairs = [(Ui @ Ui, _scalar_times(b["delta"], Ui)) for Ui in gens]
        for i in range(len(gens) - 1):
            a, c = gens[i], gens[i + 1]
            pairs.append((a @ c @ a - a, c @ a @ c - c))
        for i in range(len(gens)):
            for j in range(i + 2, len(gens)):
                pairs.append((gens[i] @ gens[j], gens[j] @ gens[i]))
        return pairs

    return _run(f"hecke_a[sites={sites}]", blocks, relation, mode, **kw)


def _scalar_times(scalar_matrix, M):
    """Multiply ``M`` by the scalar stored on the diagonal of a 1-site matrix."""
    if isinstance(scalar_matrix, NumericMatrix):
        return M * scalar_matrix.array[0, 0]
    return M * scalar_matrix.entry(0, 0)


def check_hecke_b(
    spec: BoundarySpec | None,
    g: Grading,
    mode: str = EXACT,
    e: GradedMatrix | None = None,
    Q: Laurent | None = None,
    **kw,
) -> CheckResult:
    """Boundary relations of the B-type Hecke algebra for the element ``e``.

    Pass ``e`` directly (with ``spec=None``) to test a hand-built element.
    """
    Q = var("Q") if Q is None else Q
    if e is None:
        e = algebra.boundary_e(spec, g, Q)
    hp = algebra.hecke_params(Q=Q)
    ident = GradedMatrix.identity(g)
    blocks = {"e": e, "U": algebra.hecke_u(g), "d0": ident * hp.delta0, "k": ident * hp.kappa}

    def relation(b):
        e1, U = b["e"], b["U"]
        delta0, kappa = b["d0"], b["k"]
        pairs = [(e1 @ e1, _scalar_times(delta0, e1))]
        u1 = place(U, (0, 1), 2)
        u0 = place(e1, (0,), 2)
        pairs.append(
            (
                u1 @ u0 @ u1 @ u0 - _scalar_times(kappa, u1 @ u0),
                u0 @ u1 @ u0 @ u1 - _scalar_times(kappa, u0 @ u1),
            )
        )
        u0_3 = place(e1, (0,), 3)
        u2_3 = place(U, (1, 2), 3)
        pairs.append((u0_3 @ u2_3, u2_3 @ u0_3))
        return pairs

    detail = {}
    if spec is not None:
        detail["spec"] = _spec_detail(spec)
    return _run("hecke_b", blocks, relation, mode, detail=detail, **kw)


def _spec_detail(spec: BoundarySpec) -> dict:
    return {"kind": spec.kind.value, "family": spec.family.value, "L": spec.L}


def check_reflection(K: GradedMatrix, g: Grading, mode: str = EXACT, spectral: str = "x", **kw) -> CheckResult:
    """Reflection equation for a one-site K-matrix in the unit ``spectral``."""
    R = algebra.r_matrix(g)
    blocks = {
        "rd": _spectral(R, X1 * X2.invert_unit()),
        "rs": _spectral(R, X1 * X2),
        "k1": K.substitute(spectral, X1),
        "k2": K.substitute(spectral, X2),
    }

    def relation(b):
        r12d = b["rd"]
        r12s = b["rs"]
        r21d = place(b["rd"], (1, 0), 2)
        r21s = place(b["rs"], (1, 0), 2)
        k1 = place(b["k1"], (0,), 2)
        k2 = place(b["k2"], (1,), 2)
        return [(r12d @ k1 @ r21s @ k2, k2 @ r12s @ k1 @ r21d)]

    return _run("reflection", blocks, relation, mode, **kw)


def unitarity_product(g: Grading) -> GradedMatrix:
    R = algebra.r_matrix(g)
    return R @ place(R.substitute("x", var("x", -1)), (1, 0), 2)


def unitarity_factor(g: Grading) -> Laurent:
    """rho with ``R_12(lambda) R_21(-lambda) = rho I``; raises NotProportional."""
    prod = unitarity_product(g)
    rho = prod.entry(0, 0)
    if not (prod - GradedMatrix.identity(g, 2) * rho).is_zero():
        raise NotProportional("R_12(lambda) R_21(-lambda) is not a multiple of the identity")
    return rho


def check_unitarity(g: Grading, mode: str = EXACT, **kw) -> CheckResult:
    if mode == EXACT:
        start = time.perf_counter()
        prod = unitarity_product(g)
        rho = prod.entry(0, 0)
        res = prod - GradedMatrix.identity(g, 2) * rho
        terms = res.residual_terms()
        return CheckResult("unitarity", EXACT, terms == 0, terms, None, _ms(start), {"rho": str(rho)})
    blocks = {"p": unitarity_product(g)}

    def relation(b):
        p = b["p"]
        return [(p, NumericMatrix.identity(g, 2) * p.array[0, 0])]

    return _run("unitarity", blocks, relation, mode, **kw)


# --- transfer matrix ----------------------------------------------------------


@dataclass
class TransferContext:
    """Double-row transfer matrix setup on ``sites`` quantum sites.

    Site 0 is the auxiliary space. The right boundary is ``K`` (defaults to
    the explicit K of ``boundary`` or to the identity); the left boundary is
    the identity. ``supertrace_sign`` exists only for the convention
    self-check: ``False`` replaces the supertrace by the plain trace.
    """

    grading: Grading
    sites: int
    boundary: BoundarySpec | None = None
    K: GradedMatrix | None = None
    supertrace_sign: bool = True

    def __post_init__(self):
        if self.sites < 1:
            raise ValueError("need at least one quantum site")
        if self.K is None:
            if self.boundary is not None:
                self.K = algebra.k_matrix_explicit(self.boundary, self.grading)
            else:
                self.K = GradedMatrix.identity(self.grading)

    @property
    def total_sites(self) -> int:
        return self.sites + 1


_UNITARITY_OK: dict[Grading, bool] = {}


def _require_unitarity(g: Grading):
    ok = _UNITARITY_OK.get(g)
    if ok is None:
        ok = _UNITARITY_OK[g] = check_unitarity(g).passed
    if not ok:
        raise UnitarityUnverified(f"unitarity fails for grading {g.parities}")


def _double_row(ctx: TransferContext, R, K):
    N, total = ctx.sites, ctx.total_sites
    T = None
    for j in range(N, 0, -1):
        Rj = place(R, (0, j), total)
        T = Rj if T is None else T @ Rj
    That = None
    for j in range(1, N + 1):
        Rj = place(R, (j, 0), total)
        That = Rj if That is None else That @ Rj
    return T @ place(K, (0,), total) @ That


def double_row_monodromy(ctx: TransferContext) -> GradedMatrix:
    """``T K T_hat`` with ``T_hat`` realised as ``R_10 R_20 ... R_N0``.

    By unitarity this equals ``T(x) K T(-x)^{-1}`` up to the scalar
    ``rho^N``, which no check here is sensitive to.
    """
    _require_unitarity(ctx.grading)
    return _double_row(ctx, algebra.r_matrix(ctx.grading), ctx.K)


def _trace_aux(A, signed: bool):
    if signed:
        return supertrace_aux(A)
    # plain trace for the convention self-check: drop the parity weights
    even = Grading(tuple(0 for _ in A.grading.parities), tuple(range(A.grading.dim)))
    if isinstance(A, NumericMatrix):
        t = supertrace_aux(NumericMatrix(even, A.sites, A.array))
        return NumericMatrix(A.grading, t.sites, t.array)
    t = supertrace_aux(GradedMatrix(even, A.sites, [A.row(i) for i in range(A.dim)]))
    return GradedMatrix(A.grading, t.sites, [t.row(i) for i in range(t.dim)])


def _transfer(ctx: TransferContext, R, K, M):
    TT = _double_row(ctx, R, K)
    return _trace_aux(place(M, (0,), ctx.total_sites) @ TT, ctx.supertrace_sign)


def build_transfer(ctx: TransferContext) -> GradedMatrix:
    """``t(lambda) = str_0(M_0 K^{(L)}_0 TT_0(lambda))`` with ``K^{(L)} = I``."""
    _require_unitarity(ctx.grading)
    g = ctx.grading
    return _transfer(ctx, algebra.r_matrix(g), ctx.K, algebra.m_matrix(g))


def check_transfer_commutativity(ctx: TransferContext, mode: str = EXACT, **kw) -> CheckResult:
    """``[t(lambda_1), t(lambda_2)] = 0``."""
    name = f"transfer[N={ctx.sites}]"
    if mode == EXACT:
        start = time.perf_counter()
        t = build_transfer(ctx)
        t1, t2 = t.substitute("x", X1), t.substitute("x", X2)
        terms = (t1 @ t2 - t2 @ t1).residual_terms()
        return CheckResult(name, EXACT, terms == 0, terms, None, _ms(start))
    _require_unitarity(ctx.grading)
    R = algebra.r_matrix(ctx.grading)
    blocks = {
        "r1": R.substitute("x", X1),
        "r2": R.substitute("x", X2),
        "k1": ctx.K.substitute("x", X1),
        "k2": ctx.K.substitute("x", X2),
        "m": algebra.m_matrix(ctx.grading),
    }

    def relation(b):
        t1 = _transfer(ctx, b["r1"], b["k1"], b["m"])
        t2 = _transfer(ctx, b["r2"], b["k2"], b["m"])
        return [(t1 @ t2, t2 @ t1)]

    return _run(name, blocks, relation, mode, **kw)


# --- boundary charges ---------------------------------------------------------


def extract_boundary_charges(ctx: TransferContext, sign: str = "+", TT: GradedMatrix | None = None):
    """Leading coefficient of the double-row monodromy as ``x -> oo`` (``+``)
    or ``x -> 0`` (``-``), taken at the globally extremal x-degree.

    Returns ``(charges, degree)`` where ``charges`` is the (1 + N)-site matrix
    whose blocks ``charges_ab`` act on the quantum space.
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    TT = double_row_monodromy(ctx) if TT is None else TT
    lo, hi = TT.degree_range("x")
    deg = hi if sign == "+" else lo
    return TT.coeff_at_degree("x", deg), deg


def charge_blocks(charges: GradedMatrix) -> dict[tuple[int, int], GradedMatrix]:
    d = charges.grading.dim
    return {(a, b): block(charges, a, b) for a in range(d) for b in range(d)}


def check_centrality(ctx: TransferContext, mode: str = EXACT, include_u0: bool | None = None, U0=None, **kw):
    """``[U_i, TT^pm_ab] = 0`` for i = 1..N-1 and, with a boundary, ``[U_0, TT^pm_ab] = 0``.

    ``U_0`` is built from ``ctx.boundary`` with ``Q = -i r`` (the value the
    explicit K-matrix corresponds to). With ``K = I`` the boundary generator
    is trivial and excluded.
    """
    g, N = ctx.grading, ctx.sites
    if include_u0 is None:
        include_u0 = ctx.boundary is not None or U0 is not None
    if include_u0 and U0 is None:
        if ctx.boundary is None:
            raise SpecMismatch("U_0 requested but the context has no boundary spec")
        expected = algebra.k_matrix_explicit(ctx.boundary, g)
        if expected != ctx.K:
            raise SpecMismatch("K and U_0 would come from different boundary specs")
        U0 = algebra.boundary_e(ctx.boundary, g, Q_OF_R)
    start = time.perf_counter()
    TT = double_row_monodromy(ctx)
    gens = [embed(algebra.hecke_u(g), i, N) for i in range(1, N)]
    if include_u0:
        gens.append(place(U0, (0,), N))
    degrees = {}
    charge_sets = {}
    for s in ("+", "-"):
        ch, deg = extract_boundary_charges(ctx, s, TT)
        degrees[s] = deg
        charge_sets[s] = list(charge_blocks(ch).values())
    detail = {"degrees": degrees, "generators": len(gens), "u0": bool(include_u0)}
    if mode == EXACT:
        terms = 0
        for s, blocks_ in charge_sets.items():
            for B in blocks_:
                for G in gens:
                    terms += (G @ B - B @ G).residual_terms()
        return CheckResult(f"centrality[N={N}]", EXACT, terms == 0, terms, None, _ms(start), detail)
    blocks = {f"g{i}": G for i, G in enumerate(gens)}
    for s, bl in charge_sets.items():
        for j, B in enumerate(bl):
            blocks[f"c{s}{j}"] = B

    def relation(b):
        gs = [b[f"g{i}"] for i in range(len(gens))]
        out = []
        for key, B in b.items():
            if key.startswith("c"):
                for G in gs:
                    out.append((G @ B, B @ G))
        return out

    return _run(f"centrality[N={N}]", blocks, relation, mode, detail=detail, **kw)


def r_plus_minus(g: Grading) -> tuple[GradedMatrix, GradedMatrix]:
    """``R = x R^+ - x^{-1} R^-``."""
    R = algebra.r_matrix(g)
    return R.coeff_at_degree("x", 1), -R.coeff_at_degree("x", -1)


def check_exchange_relation(
    ctx: TransferContext, sign: str = "+", mode: str = EXACT, ordering: str = "reflection", **kw
) -> CheckResult:
    """Quadratic exchange relation of the leading charges ``TT^pm``.

    ``ordering="reflection"`` checks ``R12 TT1 R21 TT2 = TT2 R12 TT1 R21``, the
    leading order of the reflection equation obeyed by ``TT``.
    ``ordering="swapped"`` puts ``R21 ... R12`` on the right-hand side instead;
    that variant does not hold and is kept for diagnostics.
    """
    if ordering not in ("reflection", "swapped"):
        raise ValueError(f"unknown ordering {ordering!r}")
    g, N = ctx.grading, ctx.sites
    ch, deg = extract_boundary_charges(ctx, sign)
    rp, rm = r_plus_minus(g)
    Rs = rp if sign == "+" else rm
    total = N + 2
    quantum = tuple(range(2, total))
    blocks = {"ch": ch, "r": Rs}

    def relation(b):
        t1 = place(b["ch"], (0,) + quantum, total)
        t2 = place(b["ch"], (1,) + quantum, total)
        r12 = place(b["r"], (0, 1), total)
        r21 = place(b["r"], (1, 0), total)
        if ordering == "reflection":
            return [(r12 @ t1 @ r21 @ t2, t2 @ r12 @ t1 @ r21)]
        return [(r12 @ t1 @ r21 @ t2, t2 @ r21 @ t1 @ r12)]

    detail = {"degree": deg, "ordering": ordering}
    return _run(f"exchange{sign}[N={N}]", blocks, relation, mode, detail=detail, **kw)


# --- K-matrix forms and Hamiltonian ------------------------------------------


def check_k_consistency(spec: BoundarySpec, g: Grading, explicit_spec: BoundarySpec | None = None) -> CheckResult:
    """Theorem form ``x(lambda) I + y(lambda) e`` (at ``Q = -i r``) against the
    explicit entries: every pair of entries must be in the same ratio, and the
    ratio must be ``2 i sinh(i mu)``.
    """
    start = time.perf_counter()
    explicit_spec = spec if explicit_spec is None else explicit_spec
    theorem = algebra.k_matrix_theorem(algebra.boundary_e(spec, g, Q_OF_R), Q=Q_OF_R)
    explicit = algebra.k_matrix_explicit(explicit_spec, g)
    support_t = {(i, j) for i, j, _ in theorem.items()}
    support_e = {(i, j) for i, j, _ in explicit.items()}
    if support_t != support_e:
        raise NotProportional("theorem and explicit forms have different supports")
    # cross-multiplication against a pivot avoids dividing Laurent polynomials
    pivot = min(support_e)
    tp, ep = theorem.entry(*pivot), explicit.entry(*pivot)
    terms = 0
    for i, j in support_e:
        terms += (theorem.entry(i, j) * ep - explicit.entry(i, j) * tp).n_terms
    if terms:
        raise NotProportional(f"entries are not in a common ratio ({terms} residual terms)")
    q = var("q")
    factor = algebra.I_UNIT * (q - q.invert_unit())
    exact_factor = (theorem - explicit * factor).is_zero()
    return CheckResult(
        "k_consistency",
        EXACT,
        True,
        0,
        None,
        _ms(start),
        {"factor": str(factor) if exact_factor else None, "pivot": list(pivot)},
    )


def hamiltonian(ctx: TransferContext) -> GradedMatrix:
    """``x d/dx t(x)`` at ``x = 1`` (i.e. ``dt/dlambda`` at lambda = 0), unnormalised."""
    t = build_transfer(ctx)
    one = Laurent.one()
    return t.map(lambda v: v.euler_derivative("x").substitute("x", one))


def check_hamiltonian(ctx: TransferContext, mode: str = EXACT, **kw) -> CheckResult:
    """The Hamiltonian commutes with ``t(lambda)``."""
    t = build_transfer(ctx)
    blocks = {"h": hamiltonian(ctx), "t": t}
    return _run(f"hamiltonian[N={ctx.sites}]", blocks, lambda b: [(b["h"] @ b["t"], b["t"] @ b["h"])], mode, **kw)
