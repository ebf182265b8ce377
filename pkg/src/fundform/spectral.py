"""Spectral layer: exponential substitutions and what they buy.

Substituting  qt = A * exp(sign * i * sigma . x)  into a verified form
turns each test-slot derivative into a polynomial factor, leaving fluxes
of the shape  (polynomial in sigma) * d^mu q * weight.  On the zero set
of the adjoint symbol the substituted form is closed exactly when the
operator equation holds, which is what makes boundary relations out of
it.  Boundary traces stay symbolic here: a relation is structure (face,
orientation, coefficient, weight, trace), never an evaluated integral.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import MultiIndex
from .decompose import decompose, default_plan
from .forms import FundamentalForm, assemble
from .operators import MatrixPDO, ScalarPDO, adjoint, apply_symbol, symbol
from .ring import GaussianRational, P_I, Poly, PolyLike, QI_I, QI_ONE

SpectralPoly = Poly


@dataclass(frozen=True)
class SubstitutedForm:
    """A form with the test slot bound to an exponential.

    fluxes[j] is a tuple of (coeff: Poly, field, deriv) terms; all share
    the weight exp(sum_j E_j x^j) with exponent slope E_j = sign*i*sigma_j.
    """

    axes: tuple
    sign: int
    sigma: tuple
    amplitudes: tuple
    fluxes: tuple

    @property
    def dimension(self) -> int:
        return len(self.axes)

    def exponent_slopes(self) -> tuple:
        unit = P_I if self.sign == 1 else Poly.const(-QI_I)
        return tuple(unit * s for s in self.sigma)


def _merge_spectral_terms(terms) -> tuple:
    acc: dict = {}
    for coeff, field, deriv in terms:
        key = (field, deriv)
        total = acc.get(key, Poly()) + coeff
        if total.is_zero:
            acc.pop(key, None)
        else:
            acc[key] = total
    return tuple((coeff, field, deriv) for (field, deriv), coeff in sorted(acc.items()))


def substitute_exponential(form: FundamentalForm, sigma: Sequence[PolyLike],
                           sign: int = 1,
                           amplitudes: Sequence[PolyLike] | None = None) -> SubstitutedForm:
    """Replace every test-slot derivative d^nu qt_g by
    amplitudes[g] * prod_j (sign*i*sigma_j)^nu_j times the common weight."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    n = form.dimension
    if len(sigma) != n:
        raise ValueError("one spectral value per axis required")
    sigma = tuple(Poly.coerce(s) for s in sigma)
    nfields = 1 + max(
        (max(t.left_field, t.right_field) for flux in form.fluxes for t in flux),
        default=0,
    )
    if amplitudes is None:
        amplitudes = tuple(Poly.const(1) for _ in range(nfields))
    else:
        amplitudes = tuple(Poly.coerce(a) for a in amplitudes)
    spectral_names = {name for s in sigma for name in s.variables()}
    spectral_names |= {name for a in amplitudes for name in a.variables()}
    param_names = {
        name
        for flux in form.fluxes
        for t in flux
        for name in t.coeff.variables()
    }
    clash = spectral_names & (set(form.axes) | param_names)
    if clash:
        raise ValueError(
            f"spectral names collide with axis or parameter names: {sorted(clash)}"
        )
    unit = P_I if sign == 1 else Poly.const(-QI_I)
    slopes = [unit * s for s in sigma]
    out = []
    for flux in form.fluxes:
        terms = []
        for t in flux:
            coeff = t.coeff * amplitudes[t.right_field]
            for j, e in enumerate(t.right):
                if e:
                    coeff = coeff * slopes[j] ** e
            if not coeff.is_zero:
                terms.append((coeff, t.left_field, t.left))
        out.append(_merge_spectral_terms(terms))
    return SubstitutedForm(form.axes, sign, sigma, amplitudes, tuple(out))


def spectral_exterior_derivative(sf: SubstitutedForm) -> tuple:
    """Volume coefficient of d(substituted form), divided by the weight:
    each flux differentiates both the trace and the exponential."""
    slopes = sf.exponent_slopes()
    terms = []
    for j, flux in enumerate(sf.fluxes):
        for coeff, field, deriv in flux:
            terms.append((coeff * slopes[j], field, deriv))
            terms.append((coeff, field, deriv.incr(j)))
    return _merge_spectral_terms(terms)


# ---------------------------------------------------------------------------
# Constraint varieties


@dataclass(frozen=True)
class ConstraintVariety:
    """Zero set of the adjoint symbol in the spectral variables."""

    names: tuple
    poly: Poly
    solved: tuple = ()

    def reduces_to(self, reduced: Poly) -> bool:
        """True when the constraint is a unit multiple of a power of
        `reduced` (e.g. a squared Laplacian symbol)."""
        reduced = Poly.coerce(reduced)
        if reduced.is_zero:
            return self.poly.is_zero
        power = reduced
        for _ in range(8):
            if self.poly.proportional_to(power):
                return True
            power = power * reduced
        return False


def _solved_forms(poly: Poly, names: Sequence[str]) -> tuple:
    out = []
    for name in names:
        powers = poly.coeffs_by_power(name)
        if set(powers) <= {0, 2} and 2 in powers:
            lead = powers[2]
            num = -powers.get(0, Poly())
            if lead.is_constant:
                num = num.scale(QI_ONE / lead.constant_value())
                lead = Poly.const(1)
            out.append((name, num, lead))
    return tuple(out)


def adjoint_constraint(op: ScalarPDO, names: Sequence[str],
                       sign: int = 1) -> ConstraintVariety:
    """Polynomial condition on sigma for exp(sign*i*sigma.x) to solve the
    adjoint equation, with solved forms  s_k^2 = num/den  where extractable."""
    poly = symbol(adjoint(op), names, sign)
    return ConstraintVariety(tuple(names), poly, _solved_forms(poly, names))


def reduce_mod_quadric(poly: Poly, name: str, replacement: PolyLike) -> Poly:
    """Rewrite modulo  name^2 = replacement  until degree in `name` is <= 1."""
    replacement = Poly.coerce(replacement)
    if name in replacement.variables():
        raise ValueError(
            f"replacement for {name}^2 must not itself contain {name}"
        )
    out = Poly()
    for exp, part in poly.coeffs_by_power(name).items():
        factor = replacement ** (exp // 2) * Poly.var(name) ** (exp % 2)
        out = out + part * factor
    return out


# ---------------------------------------------------------------------------
# Global relations on boxes


@dataclass(frozen=True)
class RelationTerm:
    axis: int
    end: str  # "lo" | "hi"
    sign: int  # divergence-theorem orientation: hi +1, lo -1
    coeff: Poly
    weight_exponent: Poly  # exponent of the weight at the fixed coordinate
    field: int
    deriv: MultiIndex

    def sort_key(self) -> tuple:
        return (self.axis, self.end, self.field, self.deriv)


@dataclass(frozen=True)
class GlobalRelation:
    """Structured statement that the boundary integral of the substituted
    form vanishes: one record per (face, trace) pair, traces unevaluated."""

    axes: tuple
    box: tuple  # per axis (lo: Poly, hi: Poly)
    sigma: tuple
    sign: int
    amplitudes: tuple
    terms: tuple

    def term_multiset(self) -> tuple:
        return tuple(
            (t.axis, t.end, t.sign, t.coeff, t.weight_exponent, t.field, t.deriv)
            for t in self.terms
        )


def global_relation(sf: SubstitutedForm, box: Sequence) -> GlobalRelation:
    """Boundary relation of the substituted form on a coordinate box.

    For each axis j the flux a_j is restricted to the two faces x_j = hi
    (orientation +1) and x_j = lo (orientation -1); the weight contributes
    exp(E_j * endpoint) on the fixed coordinate and stays implicit in the
    trace transforms on the running coordinates.
    """
    if len(box) != sf.dimension:
        raise ValueError("box must give one interval per axis")
    intervals = tuple((Poly.coerce(lo), Poly.coerce(hi)) for lo, hi in box)
    slopes = sf.exponent_slopes()
    acc: dict = {}
    for j, flux in enumerate(sf.fluxes):
        for end, orientation in (("hi", 1), ("lo", -1)):
            endpoint = intervals[j][1] if end == "hi" else intervals[j][0]
            weight_exponent = slopes[j] * endpoint
            for coeff, field, deriv in flux:
                key = (j, end, orientation, weight_exponent, field, deriv)
                total = acc.get(key, Poly()) + coeff
                if total.is_zero:
                    acc.pop(key, None)
                else:
                    acc[key] = total
    terms = tuple(
        RelationTerm(axis, end, orientation, coeff, weight_exponent, field, deriv)
        for (axis, end, orientation, weight_exponent, field, deriv), coeff
        in acc.items()
    )
    terms = tuple(sorted(terms, key=RelationTerm.sort_key))
    return GlobalRelation(sf.axes, intervals, sf.sigma, sf.sign,
                          sf.amplitudes, terms)


# ---------------------------------------------------------------------------
# Integral representation


@dataclass(frozen=True)
class IntegralRepresentation:
    """q(x) = -(2 pi)^(-n) int_R^n dk int_boundary e^(ik.x) eta(y, k) / D(k)
    with D the operator's symbol at ik and eta substituted at exp(-ik.y)."""

    axes: tuple
    spectral_names: tuple
    prefactor_sign: int
    two_pi_power: int
    denominator: Poly
    eta: SubstitutedForm


def integral_representation(op: ScalarPDO,
                            names: Sequence[str] | None = None) -> IntegralRepresentation:
    if isinstance(op, MatrixPDO):
        raise TypeError("integral representations are emitted for scalar operators")
    if names is None:
        names = tuple(f"k{j + 1}" for j in range(op.dimension))
    names = tuple(names)
    denominator = symbol(op, names, sign=1)
    if denominator.is_zero:
        raise ValueError("operator symbol vanishes identically; no representation")
    form = assemble(decompose(op, default_plan(op)))
    eta = substitute_exponential(form, [Poly.var(n) for n in names], sign=-1)
    return IntegralRepresentation(op.axes, names, -1, -op.dimension,
                                  denominator, eta)


# ---------------------------------------------------------------------------
# Rational parameterizations


def _as_rational_function(value) -> tuple:
    if isinstance(value, tuple):
        num, den = value
        return Poly.coerce(num), Poly.coerce(den)
    return Poly.coerce(value), Poly.const(1)


def check_parameterization(constraint: ConstraintVariety | Poly,
                           substitution: Mapping,
                           var: str = "lam",
                           samples: int = 20) -> tuple:
    """Evaluate the cleared constraint at exact rational samples of the
    parameter, with substituted variables given as rational functions
    (num, den) of `var`.  Returns (True, None) on success or
    (False, witness sample) at the first nonzero value."""
    poly = constraint.poly if isinstance(constraint, ConstraintVariety) else constraint
    subs = {name: _as_rational_function(value)
            for name, value in substitution.items()}
    missing = set(poly.variables()) - set(subs)
    if missing:
        raise ValueError(f"substitution misses constraint variables {sorted(missing)}")
    good = 0
    for t in itertools.count(1):
        if t > 10 * samples + 10:
            raise ValueError("could not find enough samples avoiding poles")
        lam = GaussianRational(Fraction(t))
        values = {}
        pole = False
        for name, (num, den) in subs.items():
            den_value = den.evaluate_exact({var: lam})
            if den_value.is_zero:
                pole = True
                break
            values[name] = num.evaluate_exact({var: lam}) / den_value
        if pole:
            continue
        if not poly.evaluate_exact(values).is_zero:
            return False, Fraction(t)
        good += 1
        if good >= samples:
            return True, None


# ---------------------------------------------------------------------------
# Isotropic spinor construction for the incompressible system


@dataclass(frozen=True)
class SpinorTriple:
    """Isotropic 3-vector built from a 2-spinor:
    k = (xi1^2 - xi2^2, i(xi1^2 + xi2^2), -2 xi1 xi2), so k.k = 0 identically."""

    xi1: Poly
    xi2: Poly
    k: tuple

    def isotropy(self) -> Poly:
        return sum((c * c for c in self.k), Poly())


def spinor_isotropic(xi1: PolyLike | None = None,
                     xi2: PolyLike | None = None) -> SpinorTriple:
    xi1 = Poly.var("xi1") if xi1 is None else Poly.coerce(xi1)
    xi2 = Poly.var("xi2") if xi2 is None else Poly.coerce(xi2)
    k = (
        xi1 * xi1 - xi2 * xi2,
        P_I * (xi1 * xi1 + xi2 * xi2),
        Poly.const(-2) * xi1 * xi2,
    )
    return SpinorTriple(xi1, xi2, k)


def stokes_adjoint_residual(triple: SpinorTriple,
                            xi3: PolyLike | None = None) -> tuple:
    """Rows of L^+ applied to (k, xi3) exp(-i k.x + i xi3 t); all rows are
    identically zero because k.k = 0 holds as a polynomial identity."""
    from .catalog import stokes_operator

    xi3 = Poly.var("xi3") if xi3 is None else Poly.coerce(xi3)
    op = adjoint(stokes_operator())
    minus_i = Poly.const(-QI_I)
    slopes = [minus_i * triple.k[0], minus_i * triple.k[1], minus_i * triple.k[2],
              P_I * xi3]
    amplitudes = [triple.k[0], triple.k[1], triple.k[2], xi3]
    rows = []
    for i in range(op.size):
        row = Poly()
        for j in range(op.size):
            row = row + apply_symbol(op.entries[i][j], slopes) * amplitudes[j]
        rows.append(row)
    return tuple(rows)


def verify_stokes_adjoint(triple: SpinorTriple,
                          xi3: PolyLike | None = None) -> bool:
    return all(row.is_zero for row in stokes_adjoint_residual(triple, xi3))


def amplitudes_pairwise_independent(amplitudes: Sequence[Poly]) -> bool:
    """Pairwise non-proportionality of the test-slot amplitudes; the
    computable piece of the linear-independence requirement for systems."""
    amps = [Poly.coerce(a) for a in amplitudes]
    for a, b in itertools.combinations(amps, 2):
        if a.proportional_to(b):
            return False
    return True
