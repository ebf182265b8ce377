"""Constant-coefficient linear differential operators, scalar and matrix.

A scalar operator is a finite sum  sum_alpha c_alpha d^alpha  with exact
coefficients; a matrix operator is a square grid of scalar ones acting on
named fields.  This module supplies the formal adjoint, the even/odd
(self-/skew-adjoint) split, polynomial symbols, and the bilinear pairing
``qt L q - q L^+ qt`` that the decomposition engine consumes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .algebra import BilinearExpr, BilinearTerm, MultiIndex, brace, bracket
from .ring import P_I, Poly, PolyLike, QI_I


@dataclass(frozen=True)
class ScalarPDO:
    """Scalar operator: canonical map multi-index -> exact coefficient."""

    axes: tuple
    terms: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "axes", tuple(self.axes))
        n = len(self.axes)
        acc: dict[MultiIndex, Poly] = {}
        for alpha, coeff in self.terms:
            alpha = MultiIndex(alpha)
            if len(alpha) != n:
                raise ValueError(
                    f"multi-index {tuple(alpha)} does not match {n} axes"
                )
            coeff = Poly.coerce(coeff)
            prev = acc.get(alpha)
            coeff = coeff if prev is None else prev + coeff
            if coeff.is_zero:
                acc.pop(alpha, None)
            else:
                acc[alpha] = coeff
        object.__setattr__(self, "terms", tuple(sorted(acc.items())))

    @staticmethod
    def build(axes: Sequence[str], terms: Mapping | Iterable) -> "ScalarPDO":
        items = terms.items() if isinstance(terms, Mapping) else terms
        return ScalarPDO(tuple(axes), tuple(items))

    @property
    def dimension(self) -> int:
        return len(self.axes)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def order(self) -> int:
        return max((alpha.order for alpha, _ in self.terms), default=0)

    def term_dict(self) -> dict:
        return dict(self.terms)

    def coefficient(self, alpha) -> Poly:
        return self.term_dict().get(MultiIndex(alpha), Poly())

    def axis_index(self, name: str) -> int:
        try:
            return self.axes.index(name)
        except ValueError:
            raise KeyError(f"unknown axis {name!r}; have {self.axes}") from None

    def __add__(self, other: "ScalarPDO") -> "ScalarPDO":
        if self.axes != other.axes:
            raise ValueError("operators on different axes")
        return ScalarPDO(self.axes, self.terms + other.terms)

    def __neg__(self) -> "ScalarPDO":
        return self.scale(-1)

    def __sub__(self, other: "ScalarPDO") -> "ScalarPDO":
        return self + (-other)

    def scale(self, value: PolyLike) -> "ScalarPDO":
        c = Poly.coerce(value)
        return ScalarPDO(self.axes, tuple((a, p * c) for a, p in self.terms))


@dataclass(frozen=True)
class MatrixPDO:
    """Square grid of scalar operators acting on named fields."""

    axes: tuple
    fields: tuple
    entries: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "fields", tuple(self.fields))
        m = len(self.fields)
        rows = tuple(tuple(row) for row in self.entries)
        if len(rows) != m or any(len(row) != m for row in rows):
            raise ValueError(f"operator grid is not {m}x{m}")
        for row in rows:
            for entry in row:
                if entry.axes != self.axes:
                    raise ValueError("matrix entries disagree on axes")
        object.__setattr__(self, "entries", rows)

    @property
    def dimension(self) -> int:
        return len(self.axes)

    @property
    def size(self) -> int:
        return len(self.fields)

    def entry(self, i: int, j: int) -> ScalarPDO:
        return self.entries[i][j]


Operator = ScalarPDO | MatrixPDO


def adjoint(op: Operator) -> Operator:
    """Formal adjoint: c_alpha -> (-1)^|alpha| c_alpha, transposed for grids."""
    if isinstance(op, ScalarPDO):
        return ScalarPDO(
            op.axes,
            tuple(
                (alpha, coeff if alpha.order % 2 == 0 else -coeff)
                for alpha, coeff in op.terms
            ),
        )
    m = op.size
    return MatrixPDO(
        op.axes,
        op.fields,
        tuple(
            tuple(adjoint(op.entries[j][i]) for j in range(m)) for i in range(m)
        ),
    )


def even_odd_split(op: ScalarPDO) -> tuple:
    """Split into (even-order part, odd-order part); the parts are exactly
    the self-adjoint and skew-adjoint pieces."""
    even = [(a, c) for a, c in op.terms if a.order % 2 == 0]
    odd = [(a, c) for a, c in op.terms if a.order % 2 == 1]
    return ScalarPDO(op.axes, tuple(even)), ScalarPDO(op.axes, tuple(odd))


def bilinear_rhs(op: ScalarPDO, left_field: int = 0,
                 right_field: int = 0) -> BilinearExpr:
    """qt L q - q L^+ qt, assembled as braces on odd-order terms and
    brackets on even-order ones."""
    n = op.dimension
    zero = MultiIndex.zero(n)
    total = BilinearExpr()
    for alpha, coeff in op.terms:
        pairing = brace if alpha.order % 2 else bracket
        total = total + pairing(alpha, zero, left_field, right_field, coeff)
    return total


def bilinear_rhs_direct(op: ScalarPDO, left_field: int = 0,
                        right_field: int = 0) -> BilinearExpr:
    """Term-by-term expansion of qt L q - q L^+ qt; cross-check route."""
    n = op.dimension
    zero = MultiIndex.zero(n)
    out = []
    for alpha, coeff in op.terms:
        out.append(BilinearTerm(coeff, left_field, alpha, right_field, zero))
        sign = -1 if alpha.order % 2 == 0 else 1
        out.append(
            BilinearTerm(coeff.scale(sign), left_field, zero, right_field, alpha)
        )
    return BilinearExpr(out)


def system_bilinear_rhs(op: MatrixPDO) -> BilinearExpr:
    """Sum over entries (i, j) of the scalar pairing with the trial slot
    bound to field j and the test slot to field i."""
    total = BilinearExpr()
    for i in range(op.size):
        for j in range(op.size):
            total = total + bilinear_rhs(
                op.entries[i][j], left_field=j, right_field=i
            )
    return total


def apply_symbol(op: ScalarPDO, values: Sequence[PolyLike]) -> Poly:
    """Evaluate sum_alpha c_alpha * prod_k values[k]^alpha_k."""
    if len(values) != op.dimension:
        raise ValueError("one value per axis required")
    values = [Poly.coerce(v) for v in values]
    total = Poly()
    for alpha, coeff in op.terms:
        factor = coeff
        for k, e in enumerate(alpha):
            if e:
                factor = factor * values[k] ** e
        total = total + factor
    return total


def symbol(op: ScalarPDO, names: Sequence[str], sign: int = 1) -> Poly:
    """Polynomial symbol with d_k replaced by sign * i * s_k."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    unit = P_I if sign == 1 else Poly.const(-QI_I)
    return apply_symbol(op, [unit * Poly.var(name) for name in names])
