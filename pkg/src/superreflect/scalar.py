"""Exact scalars: Gaussian rationals and multivariate Laurent polynomials.

Every hyperbolic expression in the construction is written over formal unit
exponentials (``x = e^lambda``, ``q = e^{i mu}``, ...), so exact verification of
an identity reduces to checking that a Laurent polynomial is zero.

Internally a monomial is one Python int: each variable owns a 16-bit slot
holding ``exponent + 2**15``. Multiplying monomials is then a single integer
addition (minus a constant bias). The imaginary unit lives in slot 0 with
exponent in {0, 1}; ``i**2`` is folded back into the coefficient sign. Numerators
are Python ints sharing one positive denominator per polynomial.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Mapping

__all__ = [
    "GaussRational",
    "Laurent",
    "NotAUnit",
    "MissingAssignment",
    "ZeroAssignedToUnit",
    "var",
    "const",
    "sinh_of",
    "cosh_of",
    "register_variable",
    "NON_UNIT_VARIABLES",
]


class NotAUnit(ArithmeticError):
    """Raised when inverting something that is not a single unit monomial."""


class MissingAssignment(KeyError):
    pass


class ZeroAssignedToUnit(ZeroDivisionError):
    pass


class GaussRational:
    """Exact complex number ``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussRational):
            re, im = re.re, re.im + Fraction(im)
        elif isinstance(re, complex):
            raise TypeError("floats are not exact; pass re and im separately")
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, value) -> "GaussRational":
        return value if isinstance(value, GaussRational) else cls(value)

    def __add__(self, other):
        o = GaussRational.coerce(other)
        return GaussRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussRational.coerce(other))

    def __rsub__(self, other):
        return GaussRational.coerce(other) - self

    def __mul__(self, other):
        o = GaussRational.coerce(other)
        return GaussRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conjugate(self) -> "GaussRational":
        return GaussRational(self.re, -self.im)

    def __truediv__(self, other):
        o = GaussRational.coerce(other)
        norm = o.re * o.re + o.im * o.im
        if norm == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * o.conjugate()
        return GaussRational(num.re / norm, num.im / norm)

    def __rtruediv__(self, other):
        return GaussRational.coerce(other) / self

    def __eq__(self, other):
        try:
            o = GaussRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return f"GaussRational({self.re})"
        return f"GaussRational({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i"
        return f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}*i)"


# --- monomial packing -------------------------------------------------------

_WIDTH = 16
_MASK = (1 << _WIDTH) - 1
_BIAS1 = 1 << (_WIDTH - 1)
_MAX_SLOTS = 64
_BIAS = sum(_BIAS1 << (_WIDTH * s) for s in range(_MAX_SLOTS))
_MAX_EXP = _BIAS1 // 2

_IMAG_SLOT = 0
_I_TWO = _BIAS + 2  # slot-0 field after multiplying i by i
_ONE_KEY = _BIAS

_SLOTS: dict[str, int] = {}
_NAMES: list[str] = ["i"]

# xi stands for cosh(2 i mu zeta): a free constant, never inverted.
NON_UNIT_VARIABLES = frozenset({"xi"})


def register_variable(name: str) -> int:
    """Return the slot of ``name``, allocating one on first use."""
    slot = _SLOTS.get(name)
    if slot is not None:
        return slot
    if name == "i":
        raise ValueError("'i' is reserved for the imaginary unit")
    if len(_NAMES) >= _MAX_SLOTS:
        raise OverflowError("too many distinct variables")
    slot = len(_NAMES)
    _NAMES.append(name)
    _SLOTS[name] = slot
    return slot


for _name in ("x", "x1", "x2", "q", "Q", "r", "xi"):
    register_variable(_name)


def _unpack(key: int) -> dict[str, int]:
    out = {}
    s = 1
    key >>= _WIDTH
    while key:
        e = (key & _MASK) - _BIAS1
        if e:
            out[_NAMES[s]] = e
        key >>= _WIDTH
        s += 1
        if s >= len(_NAMES):
            break
    return out


def _exponent(key: int, slot: int) -> int:
    return ((key >> (_WIDTH * slot)) & _MASK) - _BIAS1


def _monomial_key(exponents: Mapping[str, int]) -> int:
    key = _BIAS
    for name, e in exponents.items():
        if not e:
            continue
        if abs(e) >= _MAX_EXP:
            raise OverflowError(f"exponent {e} of {name} out of range")
        key += e << (_WIDTH * register_variable(name))
    return key


class Laurent:
    """Multivariate Laurent polynomial with Gaussian-rational coefficients.

    Instances are immutable and kept canonical (no zero terms, reduced
    denominator), so ``==`` is structural equality.
    """

    __slots__ = ("_terms", "_den", "_hash")

    def __init__(self, terms: Mapping[int, int] | None = None, den: int = 1, *, _canonical=False):
        if _canonical:
            self._terms = terms
            self._den = den
        else:
            t = {k: v for k, v in (terms or {}).items() if v}
            self._terms, self._den = _reduce(t, den)
        self._hash = None

    # construction -----------------------------------------------------------

    @classmethod
    def zero(cls) -> "Laurent":
        return _ZERO

    @classmethod
    def one(cls) -> "Laurent":
        return _ONE

    @classmethod
    def const(cls, value) -> "Laurent":
        g = GaussRational.coerce(value)
        return cls.monomial({}, g)

    @classmethod
    def var(cls, name: str, power: int = 1) -> "Laurent":
        return cls.monomial({name: power})

    @classmethod
    def monomial(cls, exponents: Mapping[str, int], coeff=1) -> "Laurent":
        for name, e in exponents.items():
            if name in NON_UNIT_VARIABLES and e < 0:
                raise NotAUnit(f"{name} is not a unit; negative power {e} not allowed")
        g = GaussRational.coerce(coeff)
        key = _monomial_key(exponents)
        den = math.lcm(g.re.denominator, g.im.denominator)
        terms = {}
        if g.re:
            terms[key] = int(g.re * den)
        if g.im:
            terms[key + 1] = int(g.im * den)
        return cls(terms, den)

    @classmethod
    def sum(cls, items: Iterable["Laurent"]) -> "Laurent":
        """Sum many polynomials with one denominator pass."""
        items = [p for p in items if p._terms]
        if not items:
            return _ZERO
        if len(items) == 1:
            return items[0]
        den = items[0]._den
        for p in items[1:]:
            if p._den != den:
                den = math.lcm(den, p._den)
        acc: dict[int, int] = {}
        get = acc.get
        for p in items:
            f = den // p._den
            if f == 1:
                for k, v in p._terms.items():
                    acc[k] = get(k, 0) + v
            else:
                for k, v in p._terms.items():
                    acc[k] = get(k, 0) + v * f
        return cls(acc, den)

    # inspection -------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    @property
    def n_terms(self) -> int:
        """Number of distinct monomials (real and imaginary parts count once)."""
        return len({k & ~_MASK for k in self._terms})

    def terms(self) -> Iterator[tuple[dict[str, int], GaussRational]]:
        """Yield ``(exponents, coefficient)`` pairs in canonical order."""
        grouped: dict[int, list[Fraction]] = {}
        for k, v in self._terms.items():
            slot = grouped.setdefault(k & ~_MASK | (_BIAS & _MASK), [Fraction(0), Fraction(0)])
            slot[(k & _MASK) - _BIAS1] += Fraction(v, self._den)
        for k in sorted(grouped):
            re, im = grouped[k]
            yield _unpack(k), GaussRational(re, im)

    def variables(self) -> set[str]:
        out = set()
        for k in self._terms:
            out.update(_unpack(k))
        return out

    def constant_value(self) -> GaussRational:
        """Coefficient of the empty monomial."""
        re = Fraction(self._terms.get(_ONE_KEY, 0), self._den)
        im = Fraction(self._terms.get(_ONE_KEY + 1, 0), self._den)
        return GaussRational(re, im)

    def is_monomial(self) -> bool:
        return self.n_terms == 1

    def degree_range(self, name: str) -> tuple[int, int] | None:
        """(min, max) exponent of ``name`` over all terms; None for zero."""
        if not self._terms:
            return None
        slot = register_variable(name)
        degs = {_exponent(k, slot) for k in self._terms}
        return min(degs), max(degs)

    # arithmetic -------------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        return Laurent.sum((self, other))

    __radd__ = __add__

    def __neg__(self):
        return Laurent({k: -v for k, v in self._terms.items()}, self._den, _canonical=True)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        a, b = self._terms, other._terms
        if not a or not b:
            return _ZERO
        if len(a) > len(b):
            a, b = b, a
        acc: dict[int, int] = {}
        get = acc.get
        bias = _BIAS
        mask = _MASK
        itwo = _I_TWO & _MASK
        b_items = list(b.items())
        for k1, v1 in a.items():
            base = k1 - bias
            for k2, v2 in b_items:
                k = base + k2
                if k & mask == itwo:
                    k -= 2
                    acc[k] = get(k, 0) - v1 * v2
                else:
                    acc[k] = get(k, 0) + v1 * v2
        return Laurent(acc, self._den * other._den)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.invert_unit() ** (-n)
        result = _ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, value) -> "Laurent":
        return self * Laurent.const(value)

    def invert_unit(self) -> "Laurent":
        """Reciprocal of a single-term polynomial free of non-unit variables."""
        if self.n_terms != 1:
            raise NotAUnit(f"{self} is not a monomial")
        ((exps, coeff),) = list(self.terms())
        for name in exps:
            if name in NON_UNIT_VARIABLES:
                raise NotAUnit(f"{self} involves the non-unit variable {name}")
        return Laurent.monomial({n: -e for n, e in exps.items()}, GaussRational(1) / coeff)

    # structure --------------------------------------------------------------

    def coeff_at_degree(self, name: str, d: int) -> "Laurent":
        """Terms whose exponent of ``name`` is exactly ``d``, with ``name`` removed."""
        slot = register_variable(name)
        shift = _WIDTH * slot
        out = {}
        for k, v in self._terms.items():
            if ((k >> shift) & _MASK) - _BIAS1 == d:
                out[k - (d << shift)] = v
        return Laurent(out, self._den)

    def substitute(self, name: str, value: "Laurent") -> "Laurent":
        """Replace ``name`` by ``value`` (a unit monomial or, for non-negative
        powers only, any polynomial)."""
        slot = register_variable(name)
        shift = _WIDTH * slot
        by_degree: dict[int, dict[int, int]] = {}
        for k, v in self._terms.items():
            d = ((k >> shift) & _MASK) - _BIAS1
            by_degree.setdefault(d, {})[k - (d << shift)] = v
        parts = []
        for d, terms in by_degree.items():
            parts.append(Laurent(terms, self._den) * (value ** d))
        return Laurent.sum(parts)

    def euler_derivative(self, name: str) -> "Laurent":
        """Apply ``v d/dv`` in the variable ``name``."""
        slot = register_variable(name)
        shift = _WIDTH * slot
        out = {}
        for k, v in self._terms.items():
            d = ((k >> shift) & _MASK) - _BIAS1
            if d:
                out[k] = v * d
        return Laurent(out, self._den)

    def evaluate(self, assignment: Mapping[str, complex]) -> complex:
        if not self._terms:
            return 0j
        names = self.variables()
        for name in names:
            if name not in assignment:
                raise MissingAssignment(name)
            if assignment[name] == 0 and name not in NON_UNIT_VARIABLES:
                raise ZeroAssignedToUnit(name)
        values = [None] * len(_NAMES)
        for name in names:
            values[_SLOTS[name]] = complex(assignment[name])
        slots = [_SLOTS[name] for name in names]
        total = 0j
        for k, v in self._terms.items():
            term = complex(v)
            if k & 1:
                term *= 1j
            for s in slots:
                e = ((k >> (_WIDTH * s)) & _MASK) - _BIAS1
                if e:
                    term *= values[s] ** e
            total += term
        return total / self._den

    # protocol ---------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Laurent):
            try:
                other = _coerce(other)
            except TypeError:
                return NotImplemented
        return self._den == other._den and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._den, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        return f"Laurent({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for exps, c in self.terms():
            mono = "*".join(n if e == 1 else f"{n}^{e}" for n, e in sorted(exps.items()))
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _reduce(terms: dict[int, int], den: int) -> tuple[dict[int, int], int]:
    if not terms:
        return {}, 1
    if den < 0:
        terms = {k: -v for k, v in terms.items()}
        den = -den
    if den != 1:
        g = math.gcd(den, *terms.values())
        if g != 1:
            den //= g
            terms = {k: v // g for k, v in terms.items()}
    return terms, den


def _coerce(value) -> Laurent:
    if isinstance(value, Laurent):
        return value
    if isinstance(value, (int, Rational, GaussRational)):
        return Laurent.const(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact scalar")


_ZERO = Laurent({}, 1, _canonical=True)
_ONE = Laurent({_ONE_KEY: 1}, 1, _canonical=True)


def var(name: str, power: int = 1) -> Laurent:
    return Laurent.var(name, power)


def const(value) -> Laurent:
    return Laurent.const(value)


def sinh_of(unit: Laurent) -> Laurent:
    """sinh(z) for ``unit = e^z``: (u - 1/u)/2."""
    return (unit - unit.invert_unit()) * Fraction(1, 2)


def cosh_of(unit: Laurent) -> Laurent:
    """cosh(z) for ``unit = e^z``: (u + 1/u)/2."""
    return (unit + unit.invert_unit()) * Fraction(1, 2)

