"""Exact symbolic value algebra: rationals, symbolic constants, polynomials.

Every numeric value in the engine is exact. Reals are multivariate
polynomials over symbolic constants with Fraction coefficients; a concrete
real is just a constant polynomial. Integers are either concrete Python
ints or integer-valued polynomials over int-kind symbols. No floats appear
anywhere.

Polynomials are kept in canonical expanded form (a map from monomial to
nonzero coefficient), so two polynomials denote the same function iff they
compare equal. That makes equality of symbolic reals decidable by
structural comparison, which is what the solver's zero test relies on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping


class SymKind(enum.Enum):
    INT = "int"
    REAL = "real"


@dataclass(frozen=True)
class SymConst:
    """A symbolic constant, e.g. the array cell X_A[2] or the scalar N.

    `ord` is the global declaration position (input order, then flat index
    within an array input); it fixes the monomial order independent of how
    the search happens to visit states.
    """

    name: str
    index: int | None
    kind: SymKind
    ord: int

    def render(self) -> str:
        if self.index is None:
            return self.name
        return f"X_{self.name}[{self.index}]"

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"SymConst({self.render()})"


# A monomial is a tuple of SymConsts sorted by ord, with repetition for powers.
Monomial = tuple[SymConst, ...]

_ONE: Monomial = ()


def _mono_key(m: Monomial) -> tuple:
    # graded lexicographic: degree first, then symbol order
    return (len(m), tuple(s.ord for s in m))


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(sorted(a + b, key=lambda s: s.ord))


class DivisionByZero(ArithmeticError):
    """Divisor is the zero polynomial."""


class NonConstantDivisor(ArithmeticError):
    """Divisor is symbolic; quotients of polynomials are not represented."""


class MissingAssignment(KeyError):
    """A polynomial was evaluated at a point that misses one of its symbols."""


class Poly:
    """Canonical multivariate polynomial with exact rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        self.terms: dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                if c != 0:
                    self.terms[m] = Fraction(c)

    @classmethod
    def const(cls, value: Fraction | int) -> Poly:
        v = Fraction(value)
        p = cls()
        if v != 0:
            p.terms[_ONE] = v
        return p

    @classmethod
    def symbol(cls, sym: SymConst) -> Poly:
        p = cls()
        p.terms[(sym,)] = Fraction(1)
        return p

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and _ONE in self.terms)

    def const_value(self) -> Fraction:
        """Value of a constant polynomial (the zero poly evaluates to 0)."""
        if not self.is_const():
            raise ValueError(f"polynomial is not constant: {self.render()}")
        return self.terms.get(_ONE, Fraction(0))

    def symbols(self) -> set[SymConst]:
        out: set[SymConst] = set()
        for m in self.terms:
            out.update(m)
        return out

    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def __add__(self, other: Poly) -> Poly:
        res = dict(self.terms)
        for m, c in other.terms.items():
            s = res.get(m, Fraction(0)) + c
            if s == 0:
                res.pop(m, None)
            else:
                res[m] = s
        out = Poly()
        out.terms = res
        return out

    def __sub__(self, other: Poly) -> Poly:
        res = dict(self.terms)
        for m, c in other.terms.items():
            s = res.get(m, Fraction(0)) - c
            if s == 0:
                res.pop(m, None)
            else:
                res[m] = s
        out = Poly()
        out.terms = res
        return out

    def __neg__(self) -> Poly:
        out = Poly()
        out.terms = {m: -c for m, c in self.terms.items()}
        return out

    def __mul__(self, other: Poly) -> Poly:
        res: dict[Monomial, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = _mono_mul(ma, mb)
                s = res.get(m, Fraction(0)) + ca * cb
                if s == 0:
                    res.pop(m, None)
                else:
                    res[m] = s
        out = Poly()
        out.terms = res
        return out

    def scale(self, c: Fraction | int) -> Poly:
        c = Fraction(c)
        out = Poly()
        if c != 0:
            out.terms = {m: k * c for m, k in self.terms.items()}
        return out

    def div(self, divisor: Poly) -> Poly:
        """Divide by a constant polynomial.

        Raises DivisionByZero for the zero divisor and NonConstantDivisor
        when the divisor is symbolic; rational functions are deliberately
        not represented (callers escalate instead of guessing).
        """
        if divisor.is_zero():
            raise DivisionByZero()
        if not divisor.is_const():
            raise NonConstantDivisor()
        return self.scale(Fraction(1) / divisor.const_value())

    def substitute(self, assignment: Mapping[SymConst, Fraction | int]) -> Poly:
        """Replace the given symbols by constants; others stay symbolic."""
        if not assignment or not self.terms:
            return self
        res = Poly()
        for m, c in self.terms.items():
            coeff = c
            rest: list[SymConst] = []
            for s in m:
                if s in assignment:
                    coeff *= Fraction(assignment[s])
                else:
                    rest.append(s)
            if coeff == 0:
                continue
            res = res + Poly({tuple(rest): coeff})
        return res

    def eval(self, point: Mapping[SymConst, Fraction | int]) -> Fraction:
        """Exact evaluation; every symbol must be assigned."""
        total = Fraction(0)
        for m, c in self.terms.items():
            v = c
            for s in m:
                if s not in point:
                    raise MissingAssignment(s.render())
                v *= Fraction(point[s])
            total += v
        return total

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def render(self) -> str:
        """Report-style rendering: `X_A[0]*X_V[0] + 2`, `-X_A[1] + 1/2`."""
        if not self.terms:
            return "0"
        parts: list[str] = []
        for m in sorted(self.terms, key=_mono_key, reverse=True):
            c = self.terms[m]
            if m == _ONE:
                body = str(abs(c))
            else:
                mono = "*".join(s.render() for s in m)
                body = mono if abs(c) == 1 else f"{abs(c)}*{mono}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Poly({self.render()})"


def poly_arith(op: str, a: Poly, b: Poly | None = None) -> Poly:
    """Named entry point over the ring operations (neg takes one operand)."""
    if op == "add":
        assert b is not None
        return a + b
    if op == "sub":
        assert b is not None
        return a - b
    if op == "mul":
        assert b is not None
        return a * b
    if op == "neg":
        return -a
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# Runtime values


class SymValue:
    """Base for the engine's runtime scalars."""

    __slots__ = ()


@dataclass(frozen=True)
class ConcreteInt(SymValue):
    value: int

    def render(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class SymInt(SymValue):
    """An integer whose value is a non-constant polynomial over int symbols."""

    poly: Poly

    def render(self) -> str:
        return self.poly.render()


@dataclass(frozen=True)
class RealVal(SymValue):
    poly: Poly

    def render(self) -> str:
        return self.poly.render()


class UndefinedVal(SymValue):
    """The value of storage that was never written. Reading it is an error."""

    _instance: "UndefinedVal | None" = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def render(self) -> str:
        return "<undef>"


UNDEFINED = UndefinedVal()


def make_int(poly: Poly) -> SymValue:
    """Wrap an integer-valued polynomial, collapsing constants."""
    if poly.is_const():
        c = poly.const_value()
        assert c.denominator == 1, "integer poly with non-integer constant"
        return ConcreteInt(int(c))
    return SymInt(poly)


def int_poly(v: SymValue) -> Poly:
    if isinstance(v, ConcreteInt):
        return Poly.const(v.value)
    if isinstance(v, SymInt):
        return v.poly
    raise TypeError(f"not an integer value: {v!r}")
