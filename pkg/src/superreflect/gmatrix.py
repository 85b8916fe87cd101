"""Graded linear algebra over exact Laurent scalars.

Signs of the graded tensor product are baked into the Kronecker product
("sign-embedded" convention): for single-site matrices

    (A (x) B)[(i,k),(j,l)] = (-1)^{[k]([i]+[j])} A[i,j] B[k,l]

so that ordinary matrix multiplication reproduces the graded composition rule
``(A (x) B)(C (x) D) = (-1)^{deg B deg C} AC (x) BD``. For several sites the
sign generalises to ``prod_s (-1)^{[row_s] * sum_{t<s}([row_t]+[col_t])}``.

Matrix indices are 0-based; a multi-site index is the base-``N`` number whose
most significant digit is site 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .scalar import Laurent

__all__ = [
    "Grading",
    "GradedMatrix",
    "NumericMatrix",
    "GradingMismatch",
    "ShapeMismatch",
    "TooFewSites",
    "PositionOutOfRange",
    "gtensor",
    "matmul",
    "permutation_op",
    "supertrace_aux",
    "embed",
    "place",
    "commutator",
]


class GradingMismatch(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class TooFewSites(ValueError):
    pass


class PositionOutOfRange(IndexError):
    pass


@dataclass(frozen=True)
class Grading:
    """Parity of each basis vector of C^N plus the conjugate-index involution.

    Both tuples are 0-based: ``conj[a]`` is the partner of index ``a``.
    """

    parities: tuple[int, ...]
    conj: tuple[int, ...]

    def __post_init__(self):
        n = len(self.parities)
        if n == 0:
            raise ValueError("empty grading")
        if len(self.conj) != n:
            raise ValueError("conj must have one entry per index")
        if any(p not in (0, 1) for p in self.parities):
            raise ValueError("parities must be 0 or 1")
        for a, b in enumerate(self.conj):
            if not 0 <= b < n or self.conj[b] != a:
                raise ValueError("conj is not an involution")
            if self.parities[a] != self.parities[b]:
                raise ValueError("conjugate indices must share parity")

    @property
    def dim(self) -> int:
        return len(self.parities)

    @property
    def superdimension(self) -> int:
        """Number of even minus number of odd basis vectors."""
        return sum(1 - 2 * p for p in self.parities)


def _digits(index: int, d: int, sites: int) -> tuple[int, ...]:
    out = []
    for _ in range(sites):
        index, r = divmod(index, d)
        out.append(r)
    return tuple(reversed(out))


def _flat(digits: Sequence[int], d: int) -> int:
    i = 0
    for x in digits:
        i = i * d + x
    return i


def _site_sign(par: Sequence[int], rows: Sequence[int], cols: Sequence[int]) -> int:
    s = 0
    acc = 0
    for a, b in zip(rows, cols):
        s += par[a] * acc
        acc += par[a] + par[b]
    return -1 if s & 1 else 1


@lru_cache(maxsize=None)
def _placement_plan(parities: tuple[int, ...], k: int, positions: tuple[int, ...], total: int):
    """Index map embedding a ``k``-site operator at ``positions`` of ``total`` sites.

    Returns arrays ``(src, dst_row, dst_col, sign)``: the target entry
    ``(dst_row, dst_col)`` receives ``sign * A.flat[src]``. The sign combines
    un-embedding A into matrix units, the Koszul sign for reordering those
    units into site order, and re-embedding them among identity factors.
    """
    d = len(parities)
    others = [s for s in range(total) if s not in positions]
    order = sorted(range(k), key=lambda t: positions[t])
    inversions = [(t, u) for t in range(k) for u in range(t + 1, k) if positions[t] > positions[u]]
    src, rows, cols, signs = [], [], [], []
    dk = d**k
    for I in itertools.product(range(d), repeat=k):
        for J in itertools.product(range(d), repeat=k):
            sign = _site_sign(parities, I, J)
            deg = [(parities[I[t]] + parities[J[t]]) & 1 for t in range(k)]
            if sum(deg[t] * deg[u] for t, u in inversions) & 1:
                sign = -sign
            flat_src = _flat(I, d) * dk + _flat(J, d)
            for M in itertools.product(range(d), repeat=len(others)):
                r = [0] * total
                c = [0] * total
                for s, m in zip(others, M):
                    r[s] = c[s] = m
                for t in order:
                    r[positions[t]] = I[t]
                    c[positions[t]] = J[t]
                src.append(flat_src)
                rows.append(_flat(r, d))
                cols.append(_flat(c, d))
                signs.append(sign * _site_sign(parities, r, c))
    return (
        np.asarray(src, dtype=np.int64),
        np.asarray(rows, dtype=np.int64),
        np.asarray(cols, dtype=np.int64),
        np.asarray(signs, dtype=np.int8),
    )


@lru_cache(maxsize=None)
def _grouped_plan(parities, k, positions, total):
    src, rows, cols, signs = _placement_plan(parities, k, positions, total)
    grouped: dict[int, list[tuple[int, int, int]]] = {}
    for s, r, c, g in zip(src.tolist(), rows.tolist(), cols.tolist(), signs.tolist()):
        grouped.setdefault(s, []).append((r, c, g))
    return grouped


class GradedMatrix:
    """Square matrix over ``Laurent`` acting on ``sites`` tensor factors.

    Storage is row-sparse (zero entries are not stored); ``to_dense`` gives
    the full array of entries.
    """

    __slots__ = ("grading", "sites", "_rows")

    def __init__(self, grading: Grading, sites: int, rows: Sequence[Mapping[int, Laurent]]):
        if sites < 1:
            raise ValueError("sites must be >= 1")
        dim = grading.dim**sites
        if len(rows) != dim:
            raise ShapeMismatch(f"expected {dim} rows, got {len(rows)}")
        self.grading = grading
        self.sites = sites
        self._rows = tuple({j: v for j, v in row.items() if v} for row in rows)

    # construction -----------------------------------------------------------

    @classmethod
    def zeros(cls, grading: Grading, sites: int = 1) -> "GradedMatrix":
        return cls(grading, sites, [{}] * grading.dim**sites)

    @classmethod
    def identity(cls, grading: Grading, sites: int = 1) -> "GradedMatrix":
        one = Laurent.one()
        return cls(grading, sites, [{i: one} for i in range(grading.dim**sites)])

    @classmethod
    def unit(cls, grading: Grading, i: int, j: int, value=1) -> "GradedMatrix":
        """Single-site matrix unit ``e_ij`` (0-based) times ``value``."""
        rows = [{} for _ in range(grading.dim)]
        rows[i] = {j: value if isinstance(value, Laurent) else Laurent.const(value)}
        return cls(grading, 1, rows)

    @classmethod
    def from_entries(cls, grading: Grading, sites: int, entries: Mapping[tuple[int, int], Laurent]):
        rows = [{} for _ in range(grading.dim**sites)]
        for (i, j), v in entries.items():
            rows[i][j] = v if isinstance(v, Laurent) else Laurent.const(v)
        return cls(grading, sites, rows)

    @classmethod
    def diagonal(cls, grading: Grading, values: Sequence) -> "GradedMatrix":
        return cls.from_entries(grading, 1, {(i, i): v for i, v in enumerate(values)})

    # inspection -------------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self._rows)

    def entry(self, i: int, j: int) -> Laurent:
        return self._rows[i].get(j, Laurent.zero())

    __getitem__ = lambda self, ij: self.entry(*ij)  # noqa: E731

    def row(self, i: int) -> Mapping[int, Laurent]:
        return self._rows[i]

    def items(self) -> Iterable[tuple[int, int, Laurent]]:
        for i, row in enumerate(self._rows):
            for j, v in row.items():
                yield i, j, v

    def to_dense(self) -> list[list[Laurent]]:
        z = Laurent.zero()
        return [[row.get(j, z) for j in range(self.dim)] for row in self._rows]

    def is_zero(self) -> bool:
        return not any(self._rows)

    def residual_terms(self) -> int:
        """Total number of nonzero monomials over all entries."""
        return sum(v.n_terms for _, _, v in self.items())

    def nnz(self) -> int:
        return sum(len(r) for r in self._rows)

    def degree_range(self, name: str) -> tuple[int, int] | None:
        lo = hi = None
        for _, _, v in self.items():
            a, b = v.degree_range(name)
            lo = a if lo is None else min(lo, a)
            hi = b if hi is None else max(hi, b)
        return None if lo is None else (lo, hi)

    # algebra ----------------------------------------------------------------

    def _check_same(self, other: "GradedMatrix"):
        if self.grading != other.grading:
            raise GradingMismatch("operands carry different gradings")
        if self.sites != other.sites:
            raise ShapeMismatch(f"{self.sites} sites vs {other.sites} sites")

    def __matmul__(self, other: "GradedMatrix") -> "GradedMatrix":
        if not isinstance(other, GradedMatrix):
            return NotImplemented
        self._check_same(other)
        out = []
        brows = other._rows
        for row in self._rows:
            acc: dict[int, list[Laurent]] = {}
            for k, a in row.items():
                for j, b in brows[k].items():
                    acc.setdefault(j, []).append(a * b)
            out.append({j: Laurent.sum(ps) for j, ps in acc.items()})
        return GradedMatrix(self.grading, self.sites, out)

    def __add__(self, other: "GradedMatrix") -> "GradedMatrix":
        self._check_same(other)
        out = []
        for ra, rb in zip(self._rows, other._rows):
            row = dict(ra)
            for j, v in rb.items():
                row[j] = row[j] + v if j in row else v
            out.append(row)
        return GradedMatrix(self.grading, self.sites, out)

    def __neg__(self) -> "GradedMatrix":
        return self.map(lambda v: -v)

    def __sub__(self, other: "GradedMatrix") -> "GradedMatrix":
        return self + (-other)

    def __mul__(self, scalar) -> "GradedMatrix":
        s = scalar if isinstance(scalar, Laurent) else Laurent.const(scalar)
        return self.map(lambda v: v * s)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, GradedMatrix):
            return NotImplemented
        return self.grading == other.grading and self.sites == other.sites and self._rows == other._rows

    __hash__ = None

    def map(self, fn: Callable[[Laurent], Laurent]) -> "GradedMatrix":
        return GradedMatrix(self.grading, self.sites, [{j: fn(v) for j, v in r.items()} for r in self._rows])

    def substitute(self, name: str, value: Laurent) -> "GradedMatrix":
        return self.map(lambda v: v.substitute(name, value))

    def coeff_at_degree(self, name: str, d: int) -> "GradedMatrix":
        return self.map(lambda v: v.coeff_at_degree(name, d))

    def evaluate(self, assignment: Mapping[str, complex]) -> "NumericMatrix":
        arr = np.zeros((self.dim, self.dim), dtype=complex)
        for i, j, v in self.items():
            arr[i, j] = v.evaluate(assignment)
        return NumericMatrix(self.grading, self.sites, arr)

    def __repr__(self):
        return f"GradedMatrix(dim={self.dim}, sites={self.sites}, nnz={self.nnz()})"

    def __str__(self):
        lines = [repr(self)]
        for i, j, v in self.items():
            lines.append(f"  [{i},{j}] {v}")
        return "\n".join(lines)


class NumericMatrix:
    """Complex double counterpart of ``GradedMatrix`` for sampling checks."""

    __slots__ = ("grading", "sites", "array")

    def __init__(self, grading: Grading, sites: int, array: np.ndarray):
        dim = grading.dim**sites
        if array.shape != (dim, dim):
            raise ShapeMismatch(f"expected {(dim, dim)}, got {array.shape}")
        self.grading = grading
        self.sites = sites
        self.array = array

    @classmethod
    def identity(cls, grading: Grading, sites: int = 1) -> "NumericMatrix":
        return cls(grading, sites, np.eye(grading.dim**sites, dtype=complex))

    @property
    def dim(self) -> int:
        return self.array.shape[0]

    def _check_same(self, other):
        if self.grading != other.grading:
            raise GradingMismatch("operands carry different gradings")
        if self.sites != other.sites:
            raise ShapeMismatch(f"{self.sites} sites vs {other.sites} sites")

    def __matmul__(self, other):
        self._check_same(other)
        return NumericMatrix(self.grading, self.sites, self.array @ other.array)

    def __add__(self, other):
        self._check_same(other)
        return NumericMatrix(self.grading, self.sites, self.array + other.array)

    def __sub__(self, other):
        self._check_same(other)
        return NumericMatrix(self.grading, self.sites, self.array - other.array)

    def __neg__(self):
        return NumericMatrix(self.grading, self.sites, -self.array)

    def __mul__(self, scalar):
        return NumericMatrix(self.grading, self.sites, self.array * complex(scalar))

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.abs(self.array).max()) if self.array.size else 0.0

    def is_zero(self) -> bool:
        return not self.array.any()

    def __repr__(self):
        return f"NumericMatrix(dim={self.dim}, sites={self.sites})"


# --- operations ---------------------------------------------------------------


def place(A, positions: Sequence[int], total_sites: int):
    """Embed the ``A.sites``-site operator so its k-th factor acts on site
    ``positions[k]`` (0-based, any order) of ``total_sites``; identity elsewhere.

    A reversed order such as ``(1, 0)`` yields the graded flip, e.g.
    ``R_21 = P R_12 P``.
    """
    positions = tuple(positions)
    k = A.sites
    if len(positions) != k or len(set(positions)) != k:
        raise PositionOutOfRange(f"need {k} distinct positions, got {positions}")
    if any(not 0 <= p < total_sites for p in positions):
        raise PositionOutOfRange(f"positions {positions} outside 0..{total_sites - 1}")
    par = A.grading.parities
    if isinstance(A, NumericMatrix):
        src, rows, cols, signs = _placement_plan(par, k, positions, total_sites)
        dim = A.grading.dim**total_sites
        out = np.zeros((dim, dim), dtype=complex)
        out[rows, cols] = A.array.ravel()[src] * signs
        return NumericMatrix(A.grading, total_sites, out)
    plan = _grouped_plan(par, k, positions, total_sites)
    dim = A.grading.dim**total_sites
    out_rows: list[dict[int, Laurent]] = [{} for _ in range(dim)]
    adim = A.dim
    for i, j, v in A.items():
        neg = None
        for r, c, g in plan[i * adim + j]:
            if g > 0:
                out_rows[r][c] = v
            else:
                if neg is None:
                    neg = -v
                out_rows[r][c] = neg
    return GradedMatrix(A.grading, total_sites, out_rows)


def embed(A, position: int, total_sites: int):
    """Place a 1- or 2-site block on consecutive sites starting at ``position``
    (1-based, matching ``U_i`` acting on factors i, i+1)."""
    if position < 1 or position + A.sites - 1 > total_sites:
        raise PositionOutOfRange(f"block of {A.sites} sites at {position} does not fit in {total_sites}")
    return place(A, tuple(range(position - 1, position - 1 + A.sites)), total_sites)


def gtensor(A, B):
    """Sign-embedded graded Kronecker product ``A (x) B``."""
    if A.grading != B.grading:
        raise GradingMismatch("gtensor operands carry different gradings")
    total = A.sites + B.sites
    left = place(A, tuple(range(A.sites)), total)
    right = place(B, tuple(range(A.sites, total)), total)
    # B's placement carries the sign for moving it past A's identity slots;
    # the product then composes with the graded rule.
    return left @ right


def matmul(A, B):
    return A @ B


def commutator(A, B):
    if A.sites != B.sites or A.grading != B.grading:
        raise ShapeMismatch("commutator operands differ in shape")
    return A @ B - B @ A


def permutation_op(g: Grading) -> GradedMatrix:
    """Graded permutation ``P = sum_ij (-1)^{[j]} e_ij (x) e_ji``."""
    d = g.dim
    terms = []
    for i in range(d):
        for j in range(d):
            sign = -1 if g.parities[j] else 1
            terms.append(gtensor(GradedMatrix.unit(g, i, j, sign), GradedMatrix.unit(g, j, i)))
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


def supertrace_aux(A):
    """Partial supertrace over site 0: ``sum_k (-1)^{[k]} A[(k,I),(k,J)]``."""
    if A.sites < 2:
        raise TooFewSites("supertrace over the auxiliary space needs >= 2 sites")
    g = A.grading
    d = g.dim
    inner = d ** (A.sites - 1)
    if isinstance(A, NumericMatrix):
        w = np.array([-1.0 if p else 1.0 for p in g.parities])
        arr = np.einsum("k,kikj->ij", w, A.array.reshape(d, inner, d, inner))
        return NumericMatrix(g, A.sites - 1, arr)
    acc: list[dict[int, list[Laurent]]] = [{} for _ in range(inner)]
    for k in range(d):
        odd = g.parities[k]
        for I in range(inner):
            for col, v in A.row(k * inner + I).items():
                kk, J = divmod(col, inner)
                if kk == k:
                    acc[I].setdefault(J, []).append(-v if odd else v)
    rows = [{j: Laurent.sum(vs) for j, vs in row.items()} for row in acc]
    return GradedMatrix(g, A.sites - 1, rows)


def block(A, a: int, b: int):
    """Component ``A_ab`` of ``A = sum_ab e_ab (x) A_ab`` (site 0 split off)."""
    g = A.grading
    d = g.dim
    inner = d ** (A.sites - 1)
    odd = (g.parities[a] + g.parities[b]) & 1
    rest = A.sites - 1
    if isinstance(A, NumericMatrix):
        sub = A.array[a * inner:(a + 1) * inner, b * inner:(b + 1) * inner].copy()
        if odd:
            sub *= _parity_vector(g, rest)[:, None]
        return NumericMatrix(g, rest, sub)
    pv = _parity_vector(g, rest)
    rows = []
    for I in range(inner):
        row = {}
        for col, v in A.row(a * inner + I).items():
            kk, J = divmod(col, inner)
            if kk == b:
                row[J] = -v if odd and pv[I] < 0 else v
        rows.append(row)
    return GradedMatrix(g, rest, rows)


@lru_cache(maxsize=None)
def _parity_vector_cached(parities: tuple[int, ...], sites: int) -> tuple[int, ...]:
    d = len(parities)
    return tuple(-1 if sum(parities[x] for x in _digits(i, d, sites)) & 1 else 1 for i in range(d**sites))


def _parity_vector(g: Grading, sites: int) -> np.ndarray:
    return np.array(_parity_vector_cached(g.parities, sites))
