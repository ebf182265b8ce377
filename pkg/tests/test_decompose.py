import random

import pytest

from conftest import random_operator
from fundform.algebra import (
    BilinearExpr,
    BilinearTerm,
    MultiIndex,
    brace,
    bracket,
    divergence,
    partial,
    term,
)
from fundform.decompose import (
    BRACE,
    BRACKET,
    DecompositionPlan,
    EnumerationLimit,
    PairTerm,
    PlanError,
    TermPlan,
    brace_collapse,
    brace_collapse_pair,
    count_forms,
    decompose,
    decompose_system,
    default_term_plan,
    ensure_verified,
    enumerate_plans,
    exchange_step,
    reduce_step,
    sigma_count,
    term_plan_count,
    term_plans,
    verify_divergence,
    DivergenceDecomposition,
)
from fundform.operators import MatrixPDO, ScalarPDO
from fundform.parser import parse_operator
from fundform.ring import Poly
from fundform.catalog import (
    biharmonic_operator,
    heat_operator,
    stokes_operator,
    triple_product_operator,
    wave_operator,
)


def expr_dict(expr):
    return {(t.left_field, t.right_field, tuple(t.left), tuple(t.right)): t.coeff
            for t in expr}


# ---------------------------------------------------------------------------
# Individual rewrite rules


def test_reduce_step_triple_product_first_move():
    # [(2,2,2), 0] -> d_x [(1,2,2), 0] - [(1,2,2), (1,0,0)]
    pair = PairTerm(BRACKET, Poly.const(1), (2, 2, 2), (0, 0, 0))
    flux, remainder = reduce_step(pair, 0)
    assert flux == bracket((1, 2, 2), (0, 0, 0))
    assert remainder == PairTerm(BRACKET, Poly.const(-1), (1, 2, 2), (1, 0, 0))


def test_reduce_step_reaches_vanishing_diagonal():
    pair = PairTerm(BRACKET, Poly.const(1), (2, 0), (0, 0))
    flux, remainder = reduce_step(pair, 0)
    assert remainder.alpha == remainder.beta
    assert remainder.to_expr().is_zero


def test_reduce_step_brace_variant():
    pair = PairTerm(BRACE, Poly.const(1), (2, 0), (0, 0))
    flux, remainder = reduce_step(pair, 0)
    assert flux == brace((1, 0), (0, 0))
    assert remainder == PairTerm(BRACE, Poly.const(-1), (1, 0), (1, 0))
    # oracle: d_x {(1,0),(0,0)} - {(1,0),(1,0)} = {(2,0),(0,0)}
    assert partial(flux, 0) + remainder.to_expr() == pair.to_expr()


def test_reduce_step_requires_available_axis():
    with pytest.raises(PlanError):
        reduce_step(PairTerm(BRACKET, Poly.const(1), (0, 2), (0, 0)), 0)


def test_reduce_step_identity_randomized():
    rng = random.Random(41)
    for _ in range(40):
        n = rng.randint(1, 4)
        alpha = MultiIndex([rng.randint(0, 3) for _ in range(n)])
        beta = MultiIndex([rng.randint(0, 2) for _ in range(n)])
        axes_available = [k for k in range(n) if alpha[k] > 0]
        if not axes_available:
            continue
        k = rng.choice(axes_available)
        kind = rng.choice((BRACKET, BRACE))
        pair = PairTerm(kind, Poly.const(rng.randint(1, 5)), alpha, beta)
        flux, remainder = reduce_step(pair, k)
        assert partial(flux, k) + remainder.to_expr() == pair.to_expr()


def test_exchange_step_smallest_case():
    # q_x qt_y = q_y qt_x + d_x(q qt_y) - d_y(q qt_x)
    start = BilinearTerm(Poly.const(1), 0, MultiIndex((1, 0)), 0, MultiIndex((0, 1)))
    swapped, contributions = exchange_step(start, 0, 1)
    assert swapped == BilinearTerm(Poly.const(1), 0, MultiIndex((0, 1)), 0,
                                   MultiIndex((1, 0)))
    (k, flux_k), (j, flux_j) = contributions
    assert (k, j) == (0, 1)
    assert expr_dict(flux_k) == {(0, 0, (0, 0), (0, 1)): Poly.const(1)}
    assert expr_dict(flux_j) == {(0, 0, (0, 0), (1, 0)): Poly.const(-1)}


def test_exchange_step_same_axis_degenerate():
    start = BilinearTerm(Poly.const(1), 0, MultiIndex((1,)), 0, MultiIndex((1,)))
    swapped, contributions = exchange_step(start, 0, 0)
    assert swapped == start
    total = sum((flux for _, flux in contributions), BilinearExpr())
    assert total.is_zero


def test_exchange_step_precondition():
    start = BilinearTerm(Poly.const(1), 0, MultiIndex((1, 0)), 0, MultiIndex((0, 1)))
    with pytest.raises(PlanError):
        exchange_step(start, 1, 1)
    with pytest.raises(PlanError):
        exchange_step(start, 0, 0)


def test_exchange_step_identity_randomized():
    rng = random.Random(43)
    for _ in range(40):
        n = rng.randint(2, 4)
        left = MultiIndex([rng.randint(0, 2) for _ in range(n)])
        right = MultiIndex([rng.randint(0, 2) for _ in range(n)])
        ks = [k for k in range(n) if left[k] > 0]
        js = [j for j in range(n) if right[j] > 0]
        if not ks or not js:
            continue
        k, j = rng.choice(ks), rng.choice(js)
        start = BilinearTerm(Poly.const(rng.randint(1, 4)), 0, left, 0, right)
        swapped, contributions = exchange_step(start, k, j)
        total = BilinearExpr([swapped])
        for axis, flux in contributions:
            total = total + partial(flux, axis)
        assert total == BilinearExpr([start])


def test_brace_collapse_zero_base():
    flux = brace_collapse((0, 0), 1)
    assert expr_dict(flux) == {(0, 0, (0, 0), (0, 0)): Poly.const(1)}
    assert partial(flux, 1) == brace((0, 1), (0, 0))


def test_brace_collapse_shifted_base():
    # {e1, e1+e2} = d_y(q_x qt_x)
    flux = brace_collapse((1, 0), 1)
    assert expr_dict(flux) == {(0, 0, (1, 0), (1, 0)): Poly.const(1)}
    assert partial(flux, 1) == brace((1, 1), (1, 0))


def test_brace_collapse_pair_mirror_orientation():
    k, flux = brace_collapse_pair(
        PairTerm(BRACE, Poly.const(1), (1, 1), (1, 0))
    )
    assert k == 1
    mirrored_k, mirrored = brace_collapse_pair(
        PairTerm(BRACE, Poly.const(1), (1, 0), (1, 1))
    )
    assert (k, flux) == (mirrored_k, mirrored)


def test_brace_collapse_pair_shape_errors():
    with pytest.raises(PlanError):
        brace_collapse_pair(PairTerm(BRACE, Poly.const(1), (2, 0), (0, 0)))
    with pytest.raises(PlanError):
        brace_collapse_pair(PairTerm(BRACKET, Poly.const(1), (1, 0), (0, 0)))


# ---------------------------------------------------------------------------
# Plans


def test_default_plan_examples():
    assert default_term_plan((2, 0)) == TermPlan(path=(0,))
    assert default_term_plan((2, 2, 2)) == TermPlan(path=(0, 1, 2))
    assert default_term_plan((1, 1)) == TermPlan(
        path=(), transfer=(0,), exchanges=((1, 0),)
    )


def test_plan_validation_errors():
    op = parse_operator("axes x,y; Dx^2*Dy^2")
    key = (0, 0, MultiIndex((2, 2)))
    bad_path = DecompositionPlan(((key, TermPlan(path=(0, 0))),))
    with pytest.raises(PlanError):
        decompose(op, bad_path)
    odd_op = parse_operator("axes x,y; Dx*Dy")
    odd_key = (0, 0, MultiIndex((1, 1)))
    with pytest.raises(PlanError):
        decompose(odd_op, DecompositionPlan(
            ((odd_key, TermPlan(transfer=(0, 1), exchanges=())),)
        ))
    with pytest.raises(PlanError):
        decompose(odd_op, DecompositionPlan(
            ((odd_key, TermPlan(transfer=(0,), exchanges=())),)
        ))
    with pytest.raises(PlanError):
        decompose(odd_op, DecompositionPlan(
            ((odd_key, TermPlan(transfer=(0,), exchanges=((0, 0),))),)
        ))
    with pytest.raises(PlanError):
        decompose(op, DecompositionPlan(()))  # missing term plan


# ---------------------------------------------------------------------------
# Whole decompositions against frozen fixtures


def test_wave_decomposition_fixture():
    dec = decompose(wave_operator())
    a_x, a_t = dec.fluxes
    assert a_t == bracket((0, 1), (0, 0))          # qt q_t - q qt_t
    assert a_x == -bracket((1, 0), (0, 0))         # -(qt q_x - q qt_x)
    assert dec.verified


def test_heat_decomposition_fixture():
    dec = decompose(heat_operator())
    a_x, a_t = dec.fluxes
    assert expr_dict(a_t) == {(0, 0, (0, 0), (0, 0)): Poly.const(1)}  # q qt
    assert a_x == -bracket((1, 0), (0, 0))
    assert dec.verified


def test_triple_product_default_plan_matches_display():
    dec = decompose(triple_product_operator())
    zero = (0, 0, 0)
    a_x, a_y, a_z = dec.fluxes
    assert a_x == bracket((1, 2, 2), zero) + bracket((1, 2, 0), zero)
    assert a_y == -(bracket((1, 1, 2), (1, 0, 0)) + bracket((1, 1, 0), (1, 0, 0)))
    assert a_z == bracket((1, 1, 1), (1, 1, 0)) + bracket((0, 0, 1), zero)


def test_pure_odd_term_decomposes():
    op = parse_operator("axes x,y,z; Dx*Dy*Dz")
    dec = decompose(op)
    assert verify_divergence(dec).is_zero
    # default plan: transfer {x}, exchange (y, x), collapse on z
    assert expr_dict(dec.fluxes[0])[(0, 0, (0, 1, 1), (0, 0, 0))] == Poly.const(1)


def test_verify_divergence_negative_control():
    dec = decompose(wave_operator())
    corrupted = DivergenceDecomposition(
        dec.axes,
        (dec.fluxes[0] + BilinearExpr([term(1, (0, 0), (0, 0))]), dec.fluxes[1]),
        dec.source,
        dec.plan,
    )
    residual = verify_divergence(corrupted)
    # the residual is exactly d_x(q qt)
    assert residual == partial(BilinearExpr([term(1, (0, 0), (0, 0))]), 0)


def test_ensure_verified_rejects_bad_fluxes():
    dec = decompose(wave_operator())
    broken = DivergenceDecomposition(
        dec.axes, (dec.fluxes[1], dec.fluxes[0]), dec.source, dec.plan
    )
    with pytest.raises(ValueError):
        ensure_verified(broken)
    assert ensure_verified(
        DivergenceDecomposition(dec.axes, dec.fluxes, dec.source, dec.plan)
    ).verified


def test_decomposition_linearity():
    left = parse_operator("axes x,t; Dt^2")
    right = parse_operator("axes x,t; -Dx^2")
    combined = parse_operator("axes x,t; Dt^2 - Dx^2")
    dl, dr, dc = decompose(left), decompose(right), decompose(combined)
    for a, b, c in zip(dl.fluxes, dr.fluxes, dc.fluxes):
        assert a + b == c


def test_random_operators_decompose_and_verify():
    rng = random.Random(47)
    for _ in range(40):
        op = random_operator(rng, with_params=rng.random() < 0.3)
        dec = decompose(op)
        assert dec.verified
        assert verify_divergence(dec).is_zero


# ---------------------------------------------------------------------------
# Counting and enumeration


def test_sigma_count_values():
    assert sigma_count((2, 2, 4)) == 12
    assert sigma_count((2, 2, 5, 6)) == 420
    assert sigma_count((0, 0)) == 1
    assert sigma_count((1, 1)) == 1


def test_count_forms_values():
    assert count_forms(wave_operator()) == 1
    assert count_forms(triple_product_operator()) == 12
    assert count_forms(biharmonic_operator()) == 8


def test_count_forms_system_multiplies_entries():
    heat = heat_operator()
    zero = ScalarPDO.build(heat.axes, {})
    grid = MatrixPDO(heat.axes, ("a", "b"), ((heat, zero), (zero, heat)))
    assert count_forms(grid) == count_forms(heat) ** 2


def test_term_plans_match_count():
    for alpha in [(2, 0), (1, 1), (1, 1, 1), (3, 1), (2, 1, 1, 1), (2, 2, 4)]:
        plans = list(term_plans(alpha))
        assert len(plans) == term_plan_count(alpha)
        assert len(set(plans)) == len(plans)


def test_enumerate_plans_cardinality_and_validity():
    op = triple_product_operator()
    plans = list(enumerate_plans(op))
    assert len(plans) == count_forms(op) == 12
    assert len(set(plans)) == 12
    for plan in plans:
        assert decompose(op, plan).verified


def test_enumerate_plans_every_plan_verifies_small_random():
    rng = random.Random(53)
    seen = 0
    while seen < 6:
        op = random_operator(rng, max_dim=3, max_order=4, max_terms=2)
        if count_forms(op) > 24:
            continue
        seen += 1
        plans = list(enumerate_plans(op))
        assert len(plans) == count_forms(op)
        for plan in plans:
            assert decompose(op, plan).verified


def test_enumeration_ceiling():
    op = triple_product_operator()
    with pytest.raises(EnumerationLimit) as err:
        list(enumerate_plans(op, ceiling=5))
    assert err.value.count == 12
    assert err.value.ceiling == 5


# ---------------------------------------------------------------------------
# Systems


def test_block_diagonal_system_decouples():
    heat = heat_operator()
    zero = ScalarPDO.build(heat.axes, {})
    grid = MatrixPDO(heat.axes, ("a", "b"), ((heat, zero), (zero, heat)))
    dec = decompose_system(grid)
    scalar = decompose(heat)
    for axis in range(2):
        parts = expr_dict(dec.fluxes[axis])
        for (lf, rf, left, right), coeff in expr_dict(scalar.fluxes[axis]).items():
            assert parts[(lf, rf, left, right)] == coeff        # field a copy
            assert parts[(lf + 1, rf + 1, left, right)] == coeff  # field b copy
        assert len(parts) == 2 * len(expr_dict(scalar.fluxes[axis]))


def test_coupled_system_gains_mixed_field_flux():
    heat = heat_operator()
    zero = ScalarPDO.build(heat.axes, {})
    coupling = parse_operator("axes x,t; Dx")
    grid = MatrixPDO(heat.axes, ("a", "b"),
                     ((heat, coupling), (zero, heat)))
    dec = decompose_system(grid)
    assert verify_divergence(dec).is_zero
    # the d_x coupling of field b into row a contributes the flux  q_b qt_a
    assert expr_dict(dec.fluxes[0])[(1, 0, (0, 0), (0, 0))] == Poly.const(1)


def test_decompose_system_requires_matrix():
    with pytest.raises(TypeError):
        decompose_system(wave_operator())


def _stokes_flux_fixture():
    nu = Poly.var("nu")
    one = Poly.const(1)
    e = {axis: MultiIndex.unit(4, axis) for axis in range(3)}
    zero = MultiIndex.zero(4)
    rho = {(m, m, tuple(zero), tuple(zero)): one for m in range(3)}
    js = []
    for axis in range(3):
        flux = {
            (3, axis, tuple(zero), tuple(zero)): one,   # p * (test field axis)
            (axis, 3, tuple(zero), tuple(zero)): one,   # (trial field axis) * p~
        }
        for m in range(3):
            flux[(m, m, tuple(zero), tuple(e[axis]))] = nu
            flux[(m, m, tuple(e[axis]), tuple(zero))] = -nu
        js.append(flux)
    return js + [rho]


def test_stokes_decomposition_matches_density_and_fluxes():
    dec = decompose_system(stokes_operator())
    expected = _stokes_flux_fixture()
    for flux, fixture in zip(dec.fluxes, expected):
        assert expr_dict(flux) == fixture
    assert verify_divergence(dec, stokes_operator()).is_zero


def test_divergence_of_stokes_fluxes_is_system_pairing():
    from fundform.operators import system_bilinear_rhs

    dec = decompose_system(stokes_operator())
    assert divergence(dec.fluxes) == system_bilinear_rhs(stokes_operator())
