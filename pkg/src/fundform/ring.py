"""Exact scalar arithmetic: Gaussian rationals and sparse polynomials over them.

Every coefficient in the engine lives in Q(i)[n1, n2, ...] for named
commuting generators: operator parameters such as ``nu``, spectral
variables such as ``s1`` or ``k``, box endpoints such as ``l``.  Nothing
is ever rounded; floating point only appears when a value is explicitly
evaluated at a numeric assignment.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

RatLike = Union[int, Fraction]


@dataclass(frozen=True)
class GaussianRational:
    """Exact complex number re + im*i with rational parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @staticmethod
    def coerce(value: "ScalarLike") -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return GaussianRational(Fraction(value))
        raise TypeError(f"cannot treat {type(value).__name__} as an exact scalar")

    def __add__(self, other: "ScalarLike") -> "GaussianRational":
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other: "ScalarLike") -> "GaussianRational":
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other: "ScalarLike") -> "GaussianRational":
        return GaussianRational.coerce(other) - self

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other: "ScalarLike") -> "GaussianRational":
        other = GaussianRational.coerce(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: "ScalarLike") -> "GaussianRational":
        other = GaussianRational.coerce(other)
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / norm,
            (self.im * other.re - self.re * other.im) / norm,
        )

    def __pow__(self, exponent: int) -> "GaussianRational":
        if exponent < 0:
            return (QI_ONE / self) ** (-exponent)
        result = QI_ONE
        base = self
        n = exponent
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def to_text(self) -> str:
        if self.is_zero:
            return "0"
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            if self.im == 1:
                return "i"
            if self.im == -1:
                return "-i"
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        mag = abs(self.im)
        imag = "i" if mag == 1 else f"{mag}i"
        return f"({self.re}{sign}{imag})"

    def __str__(self) -> str:
        return self.to_text()


QI_ZERO = GaussianRational()
QI_ONE = GaussianRational(Fraction(1))
QI_I = GaussianRational(Fraction(0), Fraction(1))

ScalarLike = Union[GaussianRational, int, Fraction]

# A monomial is a sorted tuple of (name, positive exponent) pairs.
Mono = tuple

_GREEK = {
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
    "iota", "kappa", "lambda", "mu", "nu", "xi", "pi", "rho", "sigma",
    "tau", "upsilon", "phi", "chi", "psi", "omega",
}


def pretty_name(name: str) -> str:
    """LaTeX form of a generator name: greek words get a backslash and a
    trailing digit run becomes a subscript (``xi3`` -> ``\\xi_{3}``)."""
    stem = name.rstrip("0123456789")
    sub = name[len(stem):]
    head = f"\\{stem}" if stem in _GREEK else stem
    return f"{head}_{{{sub}}}" if sub else head


def _normalize_mono(mono: Iterable) -> Mono:
    acc: dict[str, int] = {}
    for name, exp in mono:
        if exp < 0:
            raise ValueError(f"negative exponent for {name!r}")
        if exp:
            acc[name] = acc.get(name, 0) + exp
    return tuple(sorted(acc.items()))


class Poly:
    """Sparse multivariate polynomial over GaussianRational.

    Immutable; canonical term order makes ``==`` a true identity test.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping | Iterable = ()) -> None:
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Mono, GaussianRational] = {}
        for mono, coeff in items:
            mono = _normalize_mono(mono)
            coeff = GaussianRational.coerce(coeff)
            prev = acc.get(mono)
            coeff = coeff if prev is None else prev + coeff
            if coeff.is_zero:
                acc.pop(mono, None)
            else:
                acc[mono] = coeff
        object.__setattr__(self, "_terms", tuple(sorted(acc.items())))

    @staticmethod
    def const(value: ScalarLike) -> "Poly":
        return Poly([((), GaussianRational.coerce(value))])

    @staticmethod
    def var(name: str, exp: int = 1) -> "Poly":
        return Poly([(((name, exp),), QI_ONE)])

    @staticmethod
    def coerce(value: "PolyLike") -> "Poly":
        if isinstance(value, Poly):
            return value
        return Poly.const(GaussianRational.coerce(value))

    @property
    def terms(self) -> tuple:
        return self._terms

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and self._terms[0][0] == ())

    def constant_value(self) -> GaussianRational:
        if not self._terms:
            return QI_ZERO
        if not self.is_constant:
            raise ValueError(f"{self} is not constant")
        return self._terms[0][1]

    def variables(self) -> tuple:
        names = {name for mono, _ in self._terms for name, _ in mono}
        return tuple(sorted(names))

    def degree(self, name: str) -> int:
        degs = [dict(mono).get(name, 0) for mono, _ in self._terms]
        return max(degs, default=0)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = Poly.coerce(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(self._terms)

    def __add__(self, other: "PolyLike") -> "Poly":
        other = Poly.coerce(other)
        return Poly(list(self._terms) + list(other._terms))

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly([(mono, -coeff) for mono, coeff in self._terms])

    def __sub__(self, other: "PolyLike") -> "Poly":
        return self + (-Poly.coerce(other))

    def __rsub__(self, other: "PolyLike") -> "Poly":
        return Poly.coerce(other) - self

    def __mul__(self, other: "PolyLike") -> "Poly":
        other = Poly.coerce(other)
        acc: list = []
        for mono_a, ca in self._terms:
            for mono_b, cb in other._terms:
                acc.append((tuple(list(mono_a) + list(mono_b)), ca * cb))
        return Poly(acc)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Poly":
        if exponent < 0:
            raise ValueError("negative polynomial power")
        result = Poly.const(1)
        base = self
        n = exponent
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, value: ScalarLike) -> "Poly":
        value = GaussianRational.coerce(value)
        return Poly([(mono, coeff * value) for mono, coeff in self._terms])

    def coeffs_by_power(self, name: str) -> dict:
        """Split into { power of `name`: Poly free of `name` }."""
        out: dict[int, list] = {}
        for mono, coeff in self._terms:
            exp = 0
            rest = []
            for var, e in mono:
                if var == name:
                    exp = e
                else:
                    rest.append((var, e))
            out.setdefault(exp, []).append((tuple(rest), coeff))
        return {exp: Poly(items) for exp, items in out.items()}

    def substitute(self, assignment: Mapping) -> "Poly":
        """Replace each named generator by a Poly (or exact scalar)."""
        result = Poly()
        for mono, coeff in self._terms:
            factor = Poly.const(coeff)
            for name, exp in mono:
                if name in assignment:
                    factor = factor * Poly.coerce(assignment[name]) ** exp
                else:
                    factor = factor * Poly.var(name, exp)
            result = result + factor
        return result

    def evaluate_exact(self, assignment: Mapping) -> GaussianRational:
        total = QI_ZERO
        for mono, coeff in self._terms:
            value = coeff
            for name, exp in mono:
                value = value * GaussianRational.coerce(assignment[name]) ** exp
            total = total + value
        return total

    def evaluate(self, assignment: Mapping) -> complex:
        total = 0j
        for mono, coeff in self._terms:
            value = complex(coeff)
            for name, exp in mono:
                value *= complex(assignment[name]) ** exp
            total += value
        return total

    def proportional_to(self, other: "Poly") -> bool:
        """True when self == c * other for a nonzero exact constant c."""
        other = Poly.coerce(other)
        if self.is_zero or other.is_zero:
            return self.is_zero and other.is_zero
        if len(self._terms) != len(other._terms):
            return False
        ratio = self._terms[0][1] / other._terms[0][1]
        return self == other.scale(ratio)

    def _term_text(self, mono: Mono, coeff: GaussianRational, latex: bool) -> str:
        if latex:
            factors = [
                pretty_name(name) + (f"^{{{exp}}}" if exp > 1 else "")
                for name, exp in mono
            ]
            joiner = " "
        else:
            factors = [
                name + (f"^{exp}" if exp > 1 else "") for name, exp in mono
            ]
            joiner = "*"
        if not factors:
            return coeff.to_text()
        if coeff == QI_ONE:
            return joiner.join(factors)
        if coeff == -QI_ONE:
            return "-" + joiner.join(factors)
        return joiner.join([coeff.to_text()] + factors)

    def _render(self, latex: bool) -> str:
        if not self._terms:
            return "0"
        parts = [self._term_text(mono, coeff, latex) for mono, coeff in self._terms]
        text = parts[0]
        for part in parts[1:]:
            text += " - " + part[1:] if part.startswith("-") else " + " + part
        return text

    def to_text(self) -> str:
        return self._render(latex=False)

    def to_latex(self) -> str:
        return self._render(latex=True)

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"Poly({self.to_text()})"


PolyLike = Union[Poly, GaussianRational, int, Fraction]

P_ZERO = Poly()
P_ONE = Poly.const(1)
P_I = Poly.const(QI_I)
