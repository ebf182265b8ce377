"""Rewrite engine: peel the bilinear pairing of an operator into an exact
divergence  sum_j d_j a_j.

Three rules do all the work:

* a reduction step moves one derivative from the trial slot to the test
  slot of a bracket/brace, emitting one flux term;
* an exchange step swaps a derivative between the two slots of a single
  product, emitting two flux terms;
* a collapse step recognises a product-rule pair and absorbs it into a
  single flux term.

Signs are never tracked by hand.  Every step asserts its defining identity
through the ``partial`` oracle, and a completed decomposition is re-checked
as a whole before it is returned, so a bookkeeping slip is a loud failure
at the step where it happens rather than a wrong answer.

Plans record the free choices (reduction order, transfer subset, exchange
pairing order); enumerating them reproduces the full family of
constructible decompositions, whose size is  prod_alpha O_alpha! sigma(alpha).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .algebra import (
    BilinearExpr,
    BilinearTerm,
    MultiIndex,
    brace,
    bracket,
    divergence,
    partial,
)
from .operators import (
    MatrixPDO,
    Operator,
    ScalarPDO,
    bilinear_rhs,
    system_bilinear_rhs,
)
from .ring import Poly, PolyLike

BRACKET = "bracket"
BRACE = "brace"

DEFAULT_PLAN_CEILING = 10 ** 6


class PlanError(ValueError):
    """A decomposition plan does not fit the operator it was given."""


class EnumerationLimit(RuntimeError):
    """Plan family too large to materialise; carries the exact count."""

    def __init__(self, count: int, ceiling: int) -> None:
        super().__init__(
            f"{count} plans exceed the enumeration ceiling of {ceiling}"
        )
        self.count = count
        self.ceiling = ceiling


class EngineError(AssertionError):
    """An internal rewrite failed its oracle check; always a bug."""


@dataclass(frozen=True)
class PairTerm:
    """A signed bracket or brace:  coeff * [alpha, beta]  or  coeff * {alpha, beta}."""

    kind: str
    coeff: Poly
    alpha: MultiIndex
    beta: MultiIndex
    left_field: int = 0
    right_field: int = 0

    def __post_init__(self) -> None:
        if self.kind not in (BRACKET, BRACE):
            raise ValueError(f"unknown pairing kind {self.kind!r}")
        object.__setattr__(self, "coeff", Poly.coerce(self.coeff))
        object.__setattr__(self, "alpha", MultiIndex(self.alpha))
        object.__setattr__(self, "beta", MultiIndex(self.beta))

    def to_expr(self) -> BilinearExpr:
        pairing = bracket if self.kind == BRACKET else brace
        return pairing(self.alpha, self.beta, self.left_field,
                       self.right_field, self.coeff)

    def products(self) -> tuple:
        """The two constituent products (first, mirror) as BilinearTerm."""
        first = BilinearTerm(self.coeff, self.left_field, self.alpha,
                             self.right_field, self.beta)
        sign = -1 if self.kind == BRACKET else 1
        mirror = BilinearTerm(self.coeff.scale(sign), self.left_field,
                              self.beta, self.right_field, self.alpha)
        return first, mirror


def reduce_step(pair: PairTerm, k: int) -> tuple:
    """One derivative moves off axis k of the trial slot:

        K(alpha, beta) = d_k K(alpha - e_k, beta) - K(alpha - e_k, beta + e_k)

    Returns (flux expression for axis k, remaining PairTerm).
    """
    if pair.alpha[k] < 1:
        raise PlanError(
            f"axis {k} has no derivative left to move in {tuple(pair.alpha)}"
        )
    flux = PairTerm(pair.kind, pair.coeff, pair.alpha.decr(k), pair.beta,
                    pair.left_field, pair.right_field)
    remainder = PairTerm(pair.kind, -pair.coeff, pair.alpha.decr(k),
                         pair.beta.incr(k), pair.left_field, pair.right_field)
    flux_expr = flux.to_expr()
    if partial(flux_expr, k) + remainder.to_expr() != pair.to_expr():
        raise EngineError(f"reduction step failed its identity on axis {k}")
    return flux_expr, remainder


def exchange_step(term: BilinearTerm, k: int, j: int) -> tuple:
    """Swap one derivative on axis k of the trial slot with one on axis j
    of the test slot.  Returns (swapped term, ((k, flux_k), (j, flux_j)))
    with signs folded in, so  term = swapped + d_k flux_k + d_j flux_j.
    """
    if term.left[k] < 1:
        raise PlanError(f"trial slot has no axis-{k} derivative in {term.key}")
    if term.right[j] < 1:
        raise PlanError(f"test slot has no axis-{j} derivative in {term.key}")
    swapped = BilinearTerm(term.coeff, term.left_field,
                           term.left.decr(k).incr(j), term.right_field,
                           term.right.decr(j).incr(k))
    flux_k = BilinearExpr([
        BilinearTerm(term.coeff, term.left_field, term.left.decr(k),
                     term.right_field, term.right)
    ])
    flux_j = BilinearExpr([
        BilinearTerm(term.coeff.scale(-1), term.left_field, term.left.decr(k),
                     term.right_field, term.right.decr(j).incr(k))
    ])
    total = BilinearExpr([swapped]) + partial(flux_k, k) + partial(flux_j, j)
    if total != BilinearExpr([term]):
        raise EngineError(f"exchange step failed its identity on axes {k},{j}")
    return swapped, ((k, flux_k), (j, flux_j))


def brace_collapse(beta, k: int, left_field: int = 0, right_field: int = 0,
                   coeff: PolyLike = 1) -> BilinearExpr:
    """Flux with  d_k flux = {beta, beta + e_k}.

    The flux is d^beta q d^beta qt, i.e. half of {beta, beta}: the doubled
    form printed in some references fails the product rule, and the oracle
    assertion here pins the factor.
    """
    beta = MultiIndex(beta)
    flux = BilinearExpr([
        BilinearTerm(Poly.coerce(coeff), left_field, beta, right_field, beta)
    ])
    target = brace(beta.incr(k), beta, left_field, right_field, coeff)
    if partial(flux, k) != target:
        raise EngineError("brace collapse failed its identity")
    return flux


def brace_collapse_pair(pair: PairTerm) -> tuple:
    """Collapse a brace of shape {beta, beta + e_k} (either orientation)
    into its axis-k flux; raises PlanError for any other shape."""
    if pair.kind != BRACE:
        raise PlanError("collapse applies to braces only")
    diff = [a - b for a, b in zip(pair.alpha, pair.beta)]
    axes = [k for k, d in enumerate(diff) if d]
    if len(axes) != 1 or abs(diff[axes[0]]) != 1:
        raise PlanError(
            f"brace ({tuple(pair.alpha)}, {tuple(pair.beta)}) does not have "
            "the collapsible shape"
        )
    k = axes[0]
    beta = pair.beta if diff[k] == 1 else pair.alpha
    return k, brace_collapse(beta, k, pair.left_field, pair.right_field,
                             pair.coeff)


def _pair_collapse(first: BilinearTerm, second: BilinearTerm) -> tuple:
    """Absorb a product-rule pair  T(c + e_r, d) + T(c, d + e_r)  into the
    flux T(c, d) on axis r.  Returns (r, flux expression)."""
    if (first.left_field, first.right_field) != (second.left_field,
                                                 second.right_field):
        raise EngineError("collapse pair mixes fields")
    if first.coeff != second.coeff:
        raise EngineError("collapse pair has mismatched coefficients")
    diff = [a - b for a, b in zip(first.left, second.left)]
    axes = [r for r, d in enumerate(diff) if d]
    if len(axes) != 1 or diff[axes[0]] != 1:
        raise EngineError("terms do not form a product-rule pair")
    r = axes[0]
    if second.right != first.right.incr(r):
        raise EngineError("terms do not form a product-rule pair")
    flux = BilinearExpr([
        BilinearTerm(first.coeff, first.left_field, second.left,
                     first.right_field, first.right)
    ])
    if partial(flux, r) != BilinearExpr([first]) + BilinearExpr([second]):
        raise EngineError("pair collapse failed its identity")
    return r, flux


# ---------------------------------------------------------------------------
# Plans


@dataclass(frozen=True)
class TermPlan:
    """Free choices for one operator term.

    path       : axis order for the reduction stage (axis k listed
                 alpha_k // 2 times);
    transfer   : the odd axes moved to the test slot before exchanging
                 (floor(#odd / 2) of them, applied in ascending order);
    exchanges  : ordered (trial-axis, test-axis) pairs, consuming each
                 transferred axis exactly once.
    """

    path: tuple = ()
    transfer: tuple = ()
    exchanges: tuple = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "path", tuple(self.path))
        object.__setattr__(self, "transfer", tuple(self.transfer))
        object.__setattr__(
            self, "exchanges", tuple(tuple(p) for p in self.exchanges)
        )


@dataclass(frozen=True)
class DecompositionPlan:
    """Per-term plans keyed by (test field, trial field, multi-index)."""

    items: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(sorted(self.items)))

    def get(self, key) -> TermPlan:
        row, col, alpha = key
        key = (row, col, MultiIndex(alpha))
        for item_key, plan in self.items:
            if item_key == key:
                return plan
        raise PlanError(f"no plan for operator term {key}")


def _validate_term_plan(alpha: MultiIndex, plan: TermPlan) -> None:
    gamma = alpha.half()
    if tuple(sorted(plan.path)) != tuple(
        k for k, g in enumerate(gamma) for _ in range(g)
    ):
        raise PlanError(
            f"path {plan.path} does not use each axis k exactly "
            f"alpha_k // 2 times for {tuple(alpha)}"
        )
    odd = alpha.odd_axes()
    m = len(odd) // 2
    transfer = plan.transfer
    if len(set(transfer)) != len(transfer) or not set(transfer) <= set(odd):
        raise PlanError(f"transfer set {transfer} is not a subset of odd axes {odd}")
    if len(transfer) != m:
        raise PlanError(f"transfer set must have {m} axes for {tuple(alpha)}")
    kept = [a for a in odd if a not in transfer]
    lefts = [k for k, _ in plan.exchanges]
    rights = [j for _, j in plan.exchanges]
    if sorted(rights) != sorted(transfer):
        raise PlanError("exchanges must consume each transferred axis exactly once")
    if len(set(lefts)) != len(lefts) or not set(lefts) <= set(kept):
        raise PlanError("exchange trial axes must be distinct kept odd axes")
    if len(odd) % 2 == 0 and sorted(lefts) != sorted(kept):
        raise PlanError("exchanges must consume every kept odd axis")


def _term_key(alpha: MultiIndex, row: int, col: int) -> tuple:
    return (row, col, alpha)


def _operator_terms(op: Operator) -> Iterator[tuple]:
    """Yield (key, alpha, coeff, trial field, test field) per scalar term."""
    if isinstance(op, ScalarPDO):
        for alpha, coeff in op.terms:
            yield _term_key(alpha, 0, 0), alpha, coeff, 0, 0
        return
    for i in range(op.size):
        for j in range(op.size):
            for alpha, coeff in op.entries[i][j].terms:
                yield _term_key(alpha, i, j), alpha, coeff, j, i


def default_term_plan(alpha) -> TermPlan:
    """Deterministic choice: ascending reduction path, lexicographically
    first transfer subset, ascending exchange pairing."""
    alpha = MultiIndex(alpha)
    gamma = alpha.half()
    path = tuple(k for k, g in enumerate(gamma) for _ in range(g))
    odd = alpha.odd_axes()
    m = len(odd) // 2
    transfer = tuple(odd[:m])
    kept = [a for a in odd if a not in transfer]
    exchanges = tuple(zip(kept[:m], transfer))
    return TermPlan(path, transfer, exchanges)


def default_plan(op: Operator) -> DecompositionPlan:
    return DecompositionPlan(
        tuple((key, default_term_plan(alpha))
              for key, alpha, _, _, _ in _operator_terms(op))
    )


def sigma_count(alpha) -> int:
    """Number of distinct reduction paths: (sum gamma)! / prod gamma_k!."""
    gamma = MultiIndex(alpha).half()
    total = math.factorial(sum(gamma))
    for g in gamma:
        total //= math.factorial(g)
    return total


def term_plan_count(alpha) -> int:
    alpha = MultiIndex(alpha)
    return math.factorial(len(alpha.odd_axes())) * sigma_count(alpha)


def count_forms(op: Operator) -> int:
    """Size of the constructible family: prod over terms of O_alpha! sigma(alpha)."""
    total = 1
    for _, alpha, _, _, _ in _operator_terms(op):
        total *= term_plan_count(alpha)
    return total


def _multiset_permutations(items: Sequence) -> Iterator[tuple]:
    counts = {}
    for item in items:
        counts[item] = counts.get(item, 0) + 1
    keys = sorted(counts)

    def rec(prefix: list, remaining: int) -> Iterator[tuple]:
        if remaining == 0:
            yield tuple(prefix)
            return
        for key in keys:
            if counts[key]:
                counts[key] -= 1
                prefix.append(key)
                yield from rec(prefix, remaining - 1)
                prefix.pop()
                counts[key] += 1

    yield from rec([], len(items))


def term_plans(alpha) -> Iterator[TermPlan]:
    """All plans for one term; exactly term_plan_count(alpha) of them."""
    alpha = MultiIndex(alpha)
    gamma = alpha.half()
    base_path = [k for k, g in enumerate(gamma) for _ in range(g)]
    odd = alpha.odd_axes()
    m = len(odd) // 2
    for path in _multiset_permutations(base_path):
        for transfer in itertools.combinations(odd, m):
            kept = [a for a in odd if a not in transfer]
            for lefts in itertools.permutations(kept, m):
                for rights in itertools.permutations(transfer):
                    yield TermPlan(path, transfer, tuple(zip(lefts, rights)))


def enumerate_plans(op: Operator,
                    ceiling: int = DEFAULT_PLAN_CEILING) -> Iterator[DecompositionPlan]:
    """All decomposition plans for the operator, in a deterministic order.

    Refuses (EnumerationLimit, carrying the exact count) when the family
    is larger than `ceiling`.
    """
    total = count_forms(op)
    if total > ceiling:
        raise EnumerationLimit(total, ceiling)
    keys = [key for key, *_ in _operator_terms(op)]
    per_term = [list(term_plans(key[2])) for key in keys]
    for combo in itertools.product(*per_term):
        yield DecompositionPlan(tuple(zip(keys, combo)))


# ---------------------------------------------------------------------------
# Decomposition


@dataclass(frozen=True)
class DivergenceDecomposition:
    """Fluxes a_1..a_n with  sum_j d_j a_j  equal to the operator pairing."""

    axes: tuple
    fluxes: tuple
    source: Operator
    plan: DecompositionPlan
    verified: bool = False

    @property
    def dimension(self) -> int:
        return len(self.axes)

    def flux(self, axis: str) -> BilinearExpr:
        return self.fluxes[self.axes.index(axis)]


def _decompose_term(alpha: MultiIndex, coeff: Poly, plan: TermPlan,
                    fluxes: list, lf: int, rf: int) -> None:
    n = len(alpha)
    if alpha.order == 0:
        return  # [0, 0] vanishes by antisymmetry
    _validate_term_plan(alpha, plan)
    kind = BRACE if alpha.order % 2 else BRACKET
    pair = PairTerm(kind, coeff, alpha, MultiIndex.zero(n), lf, rf)
    for k in plan.path:
        flux, pair = reduce_step(pair, k)
        fluxes[k] = fluxes[k] + flux
    odd = alpha.odd_axes()
    if not odd:
        if pair.alpha != pair.beta:
            raise EngineError("even-term reduction did not close on a diagonal")
        return  # [gamma, gamma] = 0
    for t in sorted(plan.transfer):
        flux, pair = reduce_step(pair, t)
        fluxes[t] = fluxes[t] + flux
    current, mirror = pair.products()
    for k, j in plan.exchanges:
        current, contributions = exchange_step(current, k, j)
        for axis, flux in contributions:
            fluxes[axis] = fluxes[axis] + flux
    if len(odd) % 2 == 0:
        if BilinearExpr([current]) + BilinearExpr([mirror]):
            raise EngineError("exchange chain failed to cancel the mirror term")
        return
    r, flux = _pair_collapse(current, mirror)
    fluxes[r] = fluxes[r] + flux


def decompose(op: Operator,
              plan: DecompositionPlan | None = None) -> DivergenceDecomposition:
    """Construct and verify a divergence decomposition of the operator's
    bilinear pairing.  Never returns an unverified result."""
    if plan is None:
        plan = default_plan(op)
    n = op.dimension
    fluxes = [BilinearExpr() for _ in range(n)]
    for key, alpha, coeff, lf, rf in _operator_terms(op):
        _decompose_term(alpha, coeff, plan.get(key), fluxes, lf, rf)
    result = DivergenceDecomposition(op.axes, tuple(fluxes), op, plan,
                                     verified=False)
    residual = verify_divergence(result, op)
    if residual:
        raise EngineError(
            "final divergence check failed; this is an engine bug"
        )
    return DivergenceDecomposition(op.axes, tuple(fluxes), op, plan,
                                   verified=True)


def decompose_system(op: MatrixPDO,
                     plan: DecompositionPlan | None = None) -> DivergenceDecomposition:
    if not isinstance(op, MatrixPDO):
        raise TypeError("decompose_system expects a matrix operator")
    return decompose(op, plan)


def verify_divergence(dec: DivergenceDecomposition,
                      op: Operator | None = None) -> BilinearExpr:
    """Residual  sum_j d_j a_j - pairing(op); empty means the identity holds."""
    if op is None:
        op = dec.source
    if op.dimension != dec.dimension:
        raise ValueError("decomposition and operator dimensions differ")
    target = (
        system_bilinear_rhs(op) if isinstance(op, MatrixPDO) else bilinear_rhs(op)
    )
    return divergence(dec.fluxes) - target


def ensure_verified(dec: DivergenceDecomposition,
                    op: Operator | None = None) -> DivergenceDecomposition:
    """Re-check a hand-built decomposition and mark it verified."""
    residual = verify_divergence(dec, op)
    if residual:
        raise ValueError("decomposition does not satisfy its divergence identity")
    return DivergenceDecomposition(dec.axes, dec.fluxes, dec.source, dec.plan,
                                   verified=True)
