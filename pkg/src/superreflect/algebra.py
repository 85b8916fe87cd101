"""Constructors: gradings, R-matrix, Hecke generators, boundary element, K-matrices.

Conventions (all scalars are exact Laurent polynomials):

* ``x = e^lambda`` (spectral parameter), ``q = e^{i mu}``.
* ``Q`` is the boundary Hecke parameter; for the explicit K-matrix the
  boundary phase is carried by ``r`` with ``Q = -i r`` (see ``Q_OF_R``).
* ``xi`` stands for the free constant ``cosh(2 i mu zeta)``.
* Free off-diagonal parameters ``c_a`` default to unit variables ``c_1``,
  ``c_2``, ... (one per active conjugate pair, labelled by the smaller index).

Index arguments in ``BoundarySpec`` are 1-based like the matrix units
``e_ab``; ``Grading`` and matrix indices are 0-based.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .gmatrix import GradedMatrix, Grading, gtensor, permutation_op
from .scalar import GaussRational, Laurent, cosh_of, sinh_of, var

__all__ = [
    "DiagramKind",
    "Family",
    "BoundarySpec",
    "HeckeParams",
    "SpecOutOfRange",
    "MixedOnDistinguished",
    "OddNForSymmetric",
    "EmptyAlgebra",
    "Q_OF_R",
    "I_UNIT",
    "make_grading",
    "hecke_params",
    "r_matrix",
    "r_check",
    "hecke_u",
    "active_pairs",
    "boundary_element",
    "boundary_e",
    "mixed_distinguished_element",
    "k_matrix_theorem",
    "k_matrix_explicit",
    "m_matrix",
    "valid_specs",
]

I_UNIT = Laurent.const(GaussRational(0, 1))
HALF = Fraction(1, 2)


class SpecOutOfRange(ValueError):
    pass


class MixedOnDistinguished(SpecOutOfRange):
    pass


class OddNForSymmetric(ValueError):
    pass


class EmptyAlgebra(ValueError):
    pass


class DiagramKind(str, enum.Enum):
    DISTINGUISHED = "distinguished"
    SYMMETRIC = "symmetric"


class Family(str, enum.Enum):
    BOSONIC = "bosonic"
    FERMIONIC = "fermionic"
    MIXED = "mixed"


def make_grading(kind: DiagramKind | str, m: int, n: int) -> Grading:
    """Parities and conjugate-index map of gl(m|n) for the given diagram."""
    kind = DiagramKind(kind)
    if m < 0 or n < 0:
        raise ValueError("m and n must be non-negative")
    if m + n < 1:
        raise EmptyAlgebra("gl(0|0) has no basis vectors")
    size = m + n
    if kind is DiagramKind.DISTINGUISHED:
        par = [0] * m + [1] * n
        conj = [(m + 1 - a) if a <= m else (2 * m + n + 1 - a) for a in range(1, size + 1)]
    else:
        if n % 2:
            raise OddNForSymmetric(f"symmetric grading needs even n, got n={n}")
        k = n // 2
        par = [1 if k + 1 <= a <= m + k else 0 for a in range(1, size + 1)]
        conj = [2 * k + m + 1 - a for a in range(1, size + 1)]
    return Grading(tuple(par), tuple(c - 1 for c in conj))


@dataclass(frozen=True)
class HeckeParams:
    delta: Laurent
    delta0: Laurent
    kappa: Laurent


def hecke_params(q: Laurent | None = None, Q: Laurent | None = None) -> HeckeParams:
    q = var("q") if q is None else q
    Q = var("Q") if Q is None else Q
    qi, Qi = q.invert_unit(), Q.invert_unit()
    return HeckeParams(delta=-(q + qi), delta0=-(Q + Qi), kappa=q * Qi + qi * Q)


# Boundary parameter of the explicit K-matrix: Q = -i r with r = e^{i mu m_b}.
Q_OF_R = -I_UNIT * var("r")


def _units(g: Grading):
    d = g.dim
    return [[GradedMatrix.unit(g, i, j) for j in range(d)] for i in range(d)]


def _sign(v: int) -> int:
    return (v > 0) - (v < 0)


def r_matrix(g: Grading, spectral: str = "x", q: Laurent | None = None) -> GradedMatrix:
    """Two-site trigonometric R-matrix of U_q(gl(m|n)) in the unit ``spectral``."""
    x = var(spectral)
    q = var("q") if q is None else q
    e = _units(g)
    d = g.dim
    b = sinh_of(x)
    sinh_imu = sinh_of(q)
    out = GradedMatrix.zeros(g, 2)
    for i in range(d):
        a_i = sinh_of(x * q ** (1 - 2 * g.parities[i]))
        out = out + gtensor(e[i][i], e[i][i]) * a_i
        for j in range(d):
            if i == j:
                continue
            out = out + gtensor(e[i][i], e[j][j]) * b
            c_ij = sinh_imu * x ** _sign(j - i) * (-1 if g.parities[j] else 1)
            out = out + gtensor(e[i][j], e[j][i]) * c_ij
    return out


def r_check(g: Grading, spectral: str = "x") -> GradedMatrix:
    """Braid form ``P R``."""
    return permutation_op(g) @ r_matrix(g, spectral)


def hecke_u(g: Grading, q: Laurent | None = None) -> GradedMatrix:
    """Two-site generator U of the super-symmetric A-type Hecke representation."""
    q = var("q") if q is None else q
    e = _units(g)
    d = g.dim
    out = GradedMatrix.zeros(g, 2)
    for a in range(d):
        pa = g.parities[a]
        for b in range(d):
            if a == b:
                t = q ** (1 - 2 * pa) * (-1 if pa else 1) - q
            else:
                f = -1 if g.parities[b] else 1
                out = out + gtensor(e[a][b], e[b][a]) * f
                t = -(q ** (-_sign(a - b)))
            out = out + gtensor(e[a][a], e[b][b]) * t
    return out


@dataclass(frozen=True)
class BoundarySpec:
    """Which conjugate pairs carry the non-diagonal boundary element.

    ``L`` is the cutoff: active pairs are ``a = 1..L`` for symmetric and
    bosonic specs, ``a = m+1..L`` for fermionic ones. ``L = 0`` (``L = m`` for
    fermionic) is the degenerate spec with no active pair: a diagonal K.
    ``c_params`` maps the smaller index of a pair to a unit Laurent; missing
    entries default to the symbol ``c_a``.
    """

    kind: DiagramKind
    family: Family
    L: int
    c_params: Mapping[int, Laurent] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", DiagramKind(self.kind))
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "c_params", dict(self.c_params))

    def __hash__(self):
        return hash((self.kind, self.family, self.L, tuple(sorted(self.c_params.items(), key=lambda kv: kv[0]))))

    def c(self, a: int) -> Laurent:
        return self.c_params.get(a) or var(f"c_{a}")


def _mn_from_grading(g: Grading, kind: DiagramKind) -> tuple[int, int]:
    odd = sum(g.parities)
    if kind is DiagramKind.DISTINGUISHED:
        return g.dim - odd, odd
    # symmetric grading of gl(m|2k) has m odd indices
    return odd, g.dim - odd


def active_pairs(spec: BoundarySpec, g: Grading) -> list[tuple[int, int]]:
    """Validate ``spec`` against ``g`` and return the active (a, a_bar), 1-based."""
    m, n = _mn_from_grading(g, spec.kind)
    if make_grading(spec.kind, m, n) != g:
        raise SpecOutOfRange(f"grading does not match a {spec.kind.value} diagram")
    L = spec.L
    if spec.kind is DiagramKind.DISTINGUISHED:
        if spec.family is Family.MIXED:
            raise MixedOnDistinguished("mixed solutions exist only for the symmetric diagram")
        if spec.family is Family.BOSONIC:
            if not 0 <= 2 * L <= m:
                raise SpecOutOfRange(f"bosonic cutoff needs 0 <= L <= m/2 = {m / 2}, got L={L}")
            first = 1
        else:
            if n < 2:
                raise SpecOutOfRange("fermionic family needs n >= 2")
            if not m <= L or 2 * (L - m) > n:
                raise SpecOutOfRange(f"fermionic cutoff needs m <= L <= m + n/2, got L={L}")
            first = m + 1
    else:
        if not 0 <= 2 * L <= g.dim:
            raise SpecOutOfRange(f"symmetric cutoff needs 0 <= L <= (m+2k)/2 = {g.dim / 2}, got L={L}")
        first = 1
    pairs = [(a, g.conj[a - 1] + 1) for a in range(first, L + 1)]
    if spec.family is not Family.MIXED:
        want = 0 if spec.family is Family.BOSONIC else 1
        for a, _ in pairs:
            if g.parities[a - 1] != want:
                raise SpecOutOfRange(f"index {a} is not {spec.family.value}")
    for a, abar in pairs:
        if abar <= a:
            raise SpecOutOfRange(f"index {a} has no distinct partner")
    unknown = set(spec.c_params) - {a for a, _ in pairs}
    if unknown:
        raise SpecOutOfRange(f"c_params given for inactive indices {sorted(unknown)}")
    return pairs


def boundary_element(
    g: Grading,
    pairs,
    c_params: Mapping[int, Laurent] | None = None,
    Q: Laurent | None = None,
) -> GradedMatrix:
    """Unvalidated boundary element for an arbitrary list of 1-based pairs.

    ``-Q^{-1}`` at (a,a), ``-Q`` at (a_bar,a_bar), ``c_a`` at (a,a_bar) and
    ``c_a^{-1}`` at (a_bar,a). Used directly by negative tests.
    """
    Q = var("Q") if Q is None else Q
    c_params = c_params or {}
    entries = {}
    for a, abar in pairs:
        c = c_params.get(a) or var(f"c_{a}")
        i, j = a - 1, abar - 1
        entries[(i, i)] = -Q.invert_unit()
        entries[(j, j)] = -Q
        entries[(i, j)] = c
        entries[(j, i)] = c.invert_unit()
    return GradedMatrix.from_entries(g, 1, entries)


def boundary_e(spec: BoundarySpec, g: Grading, Q: Laurent | None = None) -> GradedMatrix:
    return boundary_element(g, active_pairs(spec, g), spec.c_params, Q)


def mixed_distinguished_element(m: int, n: int, Q: Laurent | None = None) -> GradedMatrix:
    """Hand-built element mixing parities on the distinguished diagram.

    With room for both, one bosonic pair ``(1, m)`` and one fermionic pair
    ``(m+1, m+n)`` are active; otherwise the single pair ``(1, m+n)`` joins a
    bosonic and a fermionic index. No valid spec produces either.
    """
    if m < 1 or n < 1:
        raise SpecOutOfRange("a mixed element needs both parities present")
    g = make_grading(DiagramKind.DISTINGUISHED, m, n)
    if m >= 2 and n >= 2:
        pairs = [(1, m), (m + 1, m + n)]
    else:
        pairs = [(1, m + n)]
    return boundary_element(g, pairs, None, Q)


def k_matrix_theorem(e: GradedMatrix, spectral: str = "x", q: Laurent | None = None, Q: Laurent | None = None):
    """``2 i sinh(i mu) (x(lambda) I + y(lambda) e)`` with ``y = i sinh 2 lambda``.

    The scalar part is ``x(lambda) = delta0 cosh(2 lambda + i mu)/(2i sinh i mu)
    + kappa cosh(2 lambda)/(2i sinh i mu) - xi``; with the opposite sign on the
    two hyperbolic terms the result does not solve the reflection equation.
    """
    x = var(spectral)
    q = var("q") if q is None else q
    hp = hecke_params(q, Q)
    x2 = x * x
    norm = I_UNIT * (q - q.invert_unit())  # 2 i sinh(i mu)
    scalar = hp.delta0 * cosh_of(x2 * q) + hp.kappa * cosh_of(x2) - norm * var("xi")
    y = norm * I_UNIT * sinh_of(x2)
    return GradedMatrix.identity(e.grading) * scalar + e * y


def k_matrix_explicit(spec: BoundarySpec, g: Grading, spectral: str = "x") -> GradedMatrix:
    """Closed-form K entries in ``x``, ``r``, ``c_a`` and ``xi``."""
    pairs = active_pairs(spec, g)
    x = var(spectral)
    r = var("r")
    xi = var("xi")
    x2 = x * x
    cosh_r = cosh_of(r)
    inert = cosh_of(x2 * r) - xi
    off = I_UNIT * sinh_of(x2)
    entries = {(a, a): inert for a in range(g.dim)}
    for a, abar in pairs:
        c = spec.c(a)
        i, j = a - 1, abar - 1
        entries[(i, i)] = x2 * cosh_r - xi
        entries[(j, j)] = x2.invert_unit() * cosh_r - xi
        entries[(i, j)] = off * c
        entries[(j, i)] = off * c.invert_unit()
    return GradedMatrix.from_entries(g, 1, entries)


def m_matrix(g: Grading, q: Laurent | None = None) -> GradedMatrix:
    """Diagonal ``M_kk = q^{N - 2k + 1} q^{-2[k] + 4 sum_{i<=k} [i]}``."""
    q = var("q") if q is None else q
    d = g.dim
    vals = []
    running = 0
    for k in range(1, d + 1):
        pk = g.parities[k - 1]
        running += pk
        vals.append(q ** (d - 2 * k + 1 - 2 * pk + 4 * running))
    return GradedMatrix.diagonal(g, vals)


def valid_specs(kind: DiagramKind | str, m: int, n: int) -> list[BoundarySpec]:
    """Every non-degenerate spec the cutoff rules admit for gl(m|n)."""
    kind = DiagramKind(kind)
    g = make_grading(kind, m, n)
    out = []
    if kind is DiagramKind.SYMMETRIC:
        for L in range(1, g.dim // 2 + 1):
            out.append(BoundarySpec(kind, Family.MIXED, L))
    else:
        for L in range(1, m // 2 + 1):
            out.append(BoundarySpec(kind, Family.BOSONIC, L))
        if n >= 2:
            for L in range(m + 1, m + n // 2 + 1):
                out.append(BoundarySpec(kind, Family.FERMIONIC, L))
    for spec in out:
        active_pairs(spec, g)
    return out
