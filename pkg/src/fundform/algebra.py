"""Bilinear differential expressions in a trial slot q and a test slot qt.

A term has the shape ``c * d^mu q_f * d^nu qt_g`` where mu, nu are
derivative multi-indices of a fixed ambient dimension and f, g are field
indices (both 0 for scalar problems).  Expressions are kept in a sorted,
merged canonical form, so ``==`` on two expressions is the engine's
ground-truth identity test: every rewrite rule is validated against it
through the product-rule derivative ``partial``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .ring import Poly, PolyLike


class MultiIndex(tuple):
    """Derivative counts per axis; an element of Z^n with entries >= 0."""

    def __new__(cls, entries: Iterable[int]) -> "MultiIndex":
        entries = tuple(int(e) for e in entries)
        if any(e < 0 for e in entries):
            raise ValueError(f"negative derivative count in {entries}")
        return super().__new__(cls, entries)

    @classmethod
    def zero(cls, n: int) -> "MultiIndex":
        return cls((0,) * n)

    @classmethod
    def unit(cls, n: int, k: int) -> "MultiIndex":
        if not 0 <= k < n:
            raise ValueError(f"axis {k} out of range for dimension {n}")
        return cls(tuple(1 if i == k else 0 for i in range(n)))

    @property
    def order(self) -> int:
        return sum(self)

    def odd_axes(self) -> tuple:
        return tuple(k for k, e in enumerate(self) if e % 2)

    def half(self) -> "MultiIndex":
        return MultiIndex(e // 2 for e in self)

    def incr(self, k: int) -> "MultiIndex":
        return MultiIndex(e + 1 if i == k else e for i, e in enumerate(self))

    def decr(self, k: int) -> "MultiIndex":
        if self[k] == 0:
            raise ValueError(f"axis {k} has no derivative to remove in {self}")
        return MultiIndex(e - 1 if i == k else e for i, e in enumerate(self))

    def __add__(self, other) -> "MultiIndex":
        self._check(other)
        return MultiIndex(a + b for a, b in zip(self, other))

    def __sub__(self, other) -> "MultiIndex":
        self._check(other)
        return MultiIndex(a - b for a, b in zip(self, other))

    def _check(self, other) -> None:
        if len(self) != len(other):
            raise ValueError(
                f"multi-index dimension mismatch: {len(self)} vs {len(other)}"
            )


@dataclass(frozen=True)
class BilinearTerm:
    """One product  coeff * d^left q_{left_field} * d^right qt_{right_field}."""

    coeff: Poly
    left_field: int
    left: MultiIndex
    right_field: int
    right: MultiIndex

    def __post_init__(self) -> None:
        if len(self.left) != len(self.right):
            raise ValueError(
                f"multi-index dimension mismatch: {len(self.left)} vs {len(self.right)}"
            )
        object.__setattr__(self, "coeff", Poly.coerce(self.coeff))
        object.__setattr__(self, "left", MultiIndex(self.left))
        object.__setattr__(self, "right", MultiIndex(self.right))

    @property
    def key(self) -> tuple:
        return (self.left_field, self.right_field, self.left, self.right)

    def scaled(self, value: PolyLike) -> "BilinearTerm":
        return BilinearTerm(
            self.coeff * Poly.coerce(value),
            self.left_field, self.left, self.right_field, self.right,
        )


def term(coeff: PolyLike, left, right, left_field: int = 0,
         right_field: int = 0) -> BilinearTerm:
    return BilinearTerm(Poly.coerce(coeff), left_field, MultiIndex(left),
                        right_field, MultiIndex(right))


class BilinearExpr:
    """Canonical finite sum of BilinearTerm, ordered by
    (left_field, right_field, left, right); no zero coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[BilinearTerm] = ()) -> None:
        acc: dict[tuple, Poly] = {}
        dim = None
        for t in terms:
            if dim is None:
                dim = len(t.left)
            elif len(t.left) != dim:
                raise ValueError("mixed ambient dimensions in one expression")
            coeff = acc.get(t.key, None)
            coeff = t.coeff if coeff is None else coeff + t.coeff
            if coeff.is_zero:
                acc.pop(t.key, None)
            else:
                acc[t.key] = coeff
        object.__setattr__(
            self,
            "_terms",
            tuple(
                BilinearTerm(coeff, key[0], key[2], key[1], key[3])
                for key, coeff in sorted(acc.items())
            ),
        )

    @property
    def terms(self) -> tuple:
        return self._terms

    @property
    def dimension(self) -> int | None:
        return len(self._terms[0].left) if self._terms else None

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __iter__(self) -> Iterator[BilinearTerm]:
        return iter(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BilinearExpr):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(self._terms)

    def _check_dim(self, other: "BilinearExpr") -> None:
        if (
            self.dimension is not None
            and other.dimension is not None
            and self.dimension != other.dimension
        ):
            raise ValueError(
                f"dimension mismatch: {self.dimension} vs {other.dimension}"
            )

    def __add__(self, other: "BilinearExpr") -> "BilinearExpr":
        self._check_dim(other)
        return BilinearExpr(list(self._terms) + list(other._terms))

    def __sub__(self, other: "BilinearExpr") -> "BilinearExpr":
        return self + (-other)

    def __neg__(self) -> "BilinearExpr":
        return BilinearExpr(t.scaled(-1) for t in self._terms)

    def scale(self, value: PolyLike) -> "BilinearExpr":
        return BilinearExpr(t.scaled(value) for t in self._terms)

    def as_dict(self) -> dict:
        return {t.key: t.coeff for t in self._terms}

    def __repr__(self) -> str:
        from .emit import bilinear_text

        return f"BilinearExpr({bilinear_text(self)})"


ZERO_EXPR = BilinearExpr()


def bracket(alpha, beta, left_field: int = 0, right_field: int = 0,
            coeff: PolyLike = 1) -> BilinearExpr:
    """Antisymmetric pairing: d^beta qt d^alpha q - d^beta q d^alpha qt."""
    alpha, beta = MultiIndex(alpha), MultiIndex(beta)
    c = Poly.coerce(coeff)
    return BilinearExpr(
        [
            BilinearTerm(c, left_field, alpha, right_field, beta),
            BilinearTerm(-c, left_field, beta, right_field, alpha),
        ]
    )


def brace(alpha, beta, left_field: int = 0, right_field: int = 0,
          coeff: PolyLike = 1) -> BilinearExpr:
    """Symmetric pairing: d^beta qt d^alpha q + d^beta q d^alpha qt."""
    alpha, beta = MultiIndex(alpha), MultiIndex(beta)
    c = Poly.coerce(coeff)
    return BilinearExpr(
        [
            BilinearTerm(c, left_field, alpha, right_field, beta),
            BilinearTerm(c, left_field, beta, right_field, alpha),
        ]
    )


def partial(expr: BilinearExpr, k: int) -> BilinearExpr:
    """Derivative along axis k by the product rule.

    This is the oracle every rewrite rule in the engine is checked
    against; it is deliberately the dumbest possible implementation.
    """
    if expr.is_zero:
        return expr
    n = expr.dimension
    if not 0 <= k < n:
        raise ValueError(f"axis {k} out of range for dimension {n}")
    out = []
    for t in expr:
        out.append(BilinearTerm(t.coeff, t.left_field, t.left.incr(k),
                                t.right_field, t.right))
        out.append(BilinearTerm(t.coeff, t.left_field, t.left,
                                t.right_field, t.right.incr(k)))
    return BilinearExpr(out)


def divergence(fluxes: Iterable[BilinearExpr]) -> BilinearExpr:
    """Sum over axes j of partial(flux_j, j)."""
    total = BilinearExpr()
    for k, flux in enumerate(fluxes):
        total = total + partial(flux, k)
    return total
