import random

import pytest

from conftest import random_operator
from fundform.algebra import bracket
from fundform.operators import (
    MatrixPDO,
    ScalarPDO,
    adjoint,
    apply_symbol,
    bilinear_rhs,
    bilinear_rhs_direct,
    even_odd_split,
    symbol,
    system_bilinear_rhs,
)
from fundform.parser import (
    OperatorSyntaxError,
    format_operator,
    parse_matrix_operator,
    parse_operator,
    parse_scalar_operator,
)
from fundform.ring import Poly, QI_I
from fundform.catalog import STOKES_JSON, stokes_operator, wave_operator


def terms_of(op):
    return {tuple(alpha): coeff for alpha, coeff in op.terms}


def test_parse_wave():
    op = parse_operator("axes x,t; Dt^2 - Dx^2")
    assert op.axes == ("x", "t")
    assert terms_of(op) == {(0, 2): Poly.const(1), (2, 0): Poly.const(-1)}


def test_parse_monomial_products():
    op = parse_operator("axes x,y,z; Dx^2*Dy^2*Dz^2 + Dx^2*Dy^2 + Dz^2")
    assert terms_of(op) == {
        (2, 2, 2): Poly.const(1),
        (2, 2, 0): Poly.const(1),
        (0, 0, 2): Poly.const(1),
    }


def test_parse_symbolic_parameter():
    op = parse_operator("params nu; axes x,y,z,t; Dt - nu*(Dx^2+Dy^2+Dz^2)")
    nu = Poly.var("nu")
    assert terms_of(op) == {
        (0, 0, 0, 1): Poly.const(1),
        (2, 0, 0, 0): -nu,
        (0, 2, 0, 0): -nu,
        (0, 0, 2, 0): -nu,
    }


def test_parse_rational_and_imaginary_coefficients():
    op = parse_operator("axes x; 3/2*Dx - i*Dx^3 + (1-2*i)*Dx^2")
    assert terms_of(op)[(1,)] == Poly.const(Poly.const(3).constant_value() / 2)
    assert terms_of(op)[(3,)] == Poly.const(-QI_I)
    assert terms_of(op)[(2,)].constant_value().to_text() == "(1-2i)"


def test_parse_cancellation_and_zero():
    assert parse_operator("axes x; Dx - Dx").is_zero
    assert parse_operator("axes x; 0").is_zero


def test_parse_errors_carry_positions():
    with pytest.raises(OperatorSyntaxError) as err:
        parse_operator("axes x,t; Dt^2 - Dq^2")
    assert "unknown axis 'q'" in str(err.value)
    assert "column" in str(err.value)
    with pytest.raises(OperatorSyntaxError):
        parse_operator("axes x; mu*Dx")
    with pytest.raises(OperatorSyntaxError):
        parse_operator("axes x; Dx +")
    with pytest.raises(OperatorSyntaxError):
        parse_operator("axes x; Dx^0")
    with pytest.raises(OperatorSyntaxError):
        parse_operator("Dx^2")
    with pytest.raises(OperatorSyntaxError):
        parse_operator("axes x; (Dx")
    with pytest.raises(OperatorSyntaxError):
        parse_operator("axes x; Dx) ")


def test_parse_matrix_requires_square():
    bad = {"axes": ["x"], "fields": ["a", "b"], "entries": [["Dx", "0"]]}
    with pytest.raises(ValueError):
        parse_matrix_operator(bad)


def test_parse_matrix_stokes():
    op = parse_matrix_operator(STOKES_JSON)
    assert op.size == 4
    assert op.fields == ("u1", "u2", "u3", "p")
    assert terms_of(op.entry(0, 3)) == {(1, 0, 0, 0): Poly.const(1)}
    assert terms_of(op.entry(0, 0))[(0, 0, 0, 1)] == Poly.const(1)
    assert terms_of(op.entry(0, 0))[(2, 0, 0, 0)] == -Poly.var("nu")


def test_format_parse_roundtrip_fixed():
    texts = [
        "axes x,t; Dt^2 - Dx^2",
        "params nu; axes x,y,z,t; Dt - nu*(Dx^2+Dy^2+Dz^2)",
        "axes x; 3/2*Dx - i*Dx^3",
        "axes x,y; 2",
    ]
    for text in texts:
        op = parse_operator(text)
        assert parse_operator(format_operator(op)) == op


def test_format_parse_roundtrip_randomized():
    rng = random.Random(31)
    for _ in range(40):
        op = random_operator(rng, with_params=rng.random() < 0.5)
        assert parse_operator(format_operator(op)) == op


def test_format_parse_roundtrip_matrix():
    op = stokes_operator()
    assert parse_operator(format_operator(op)) == op


def test_adjoint_examples():
    wave = wave_operator()
    assert adjoint(wave) == wave
    ddx = parse_operator("axes x; Dx")
    assert adjoint(ddx) == parse_operator("axes x; -Dx")


def test_adjoint_stokes_displayed_form():
    adj = adjoint(stokes_operator())
    # diagonal: -d_t - nu*Laplacian; borders: -d_x, -d_y, -d_z
    expected_diag = parse_scalar_operator(
        "params nu; axes x,y,z,t; -Dt - nu*(Dx^2+Dy^2+Dz^2)"
    )
    for m in range(3):
        assert adj.entry(m, m).terms == expected_diag.terms
    assert terms_of(adj.entry(0, 3)) == {(1, 0, 0, 0): Poly.const(-1)}
    assert terms_of(adj.entry(3, 0)) == {(1, 0, 0, 0): Poly.const(-1)}


def test_adjoint_involution_randomized():
    rng = random.Random(13)
    for _ in range(40):
        op = random_operator(rng, with_params=True)
        assert adjoint(adjoint(op)) == op


def test_even_odd_split_examples():
    wave = wave_operator()
    even, odd = even_odd_split(wave)
    assert even == wave and odd.is_zero
    heat = parse_operator("axes x,t; Dt - Dx^2")
    even, odd = even_odd_split(heat)
    assert even == parse_operator("axes x,t; -Dx^2")
    assert odd == parse_operator("axes x,t; Dt")
    airy = parse_operator("axes x,t; Dt + Dx^3")
    even, odd = even_odd_split(airy)
    assert even.is_zero and odd == airy


def test_even_odd_split_adjointness_randomized():
    rng = random.Random(17)
    for _ in range(30):
        op = random_operator(rng)
        even, odd = even_odd_split(op)
        assert even + odd == op
        assert adjoint(even) == even
        assert adjoint(odd) == -odd


def test_bilinear_rhs_wave():
    wave = wave_operator()
    expected = bracket((0, 2), (0, 0)) - bracket((2, 0), (0, 0))
    assert bilinear_rhs(wave) == expected


def test_bilinear_rhs_zero_order_vanishes():
    helmholtz = parse_operator("axes x,y; Dx^2 + Dy^2 + 5")
    laplace = parse_operator("axes x,y; Dx^2 + Dy^2")
    assert bilinear_rhs(helmholtz) == bilinear_rhs(laplace)


def test_bilinear_rhs_bracket_sum():
    op = parse_operator("axes x,y,z; Dx^2*Dy^2*Dz^2 + Dx^2*Dy^2 + Dz^2")
    zero = (0, 0, 0)
    expected = (
        bracket((2, 2, 2), zero) + bracket((2, 2, 0), zero)
        + bracket((0, 0, 2), zero)
    )
    assert bilinear_rhs(op) == expected


def test_bilinear_rhs_matches_direct_expansion_randomized():
    rng = random.Random(19)
    for _ in range(60):
        op = random_operator(rng, with_params=True)
        assert bilinear_rhs(op) == bilinear_rhs_direct(op)


def test_system_bilinear_rhs_single_field_reduces():
    op = parse_operator("axes x,t; Dt - Dx^2")
    grid = MatrixPDO(op.axes, ("q",), ((op,),))
    assert system_bilinear_rhs(grid) == bilinear_rhs(op)


def test_system_bilinear_rhs_block_diagonal():
    heat = parse_operator("axes x,t; Dt - Dx^2")
    zero = ScalarPDO.build(heat.axes, {})
    grid = MatrixPDO(heat.axes, ("a", "b"), ((heat, zero), (zero, heat)))
    expected = bilinear_rhs(heat, 0, 0) + bilinear_rhs(heat, 1, 1)
    assert system_bilinear_rhs(grid) == expected


def test_symbol_wave():
    wave = wave_operator()
    # (i s_t)^2 - (i s_x)^2 = s_x^2 - s_t^2
    sx, st = Poly.var("sx"), Poly.var("st")
    assert symbol(wave, ("sx", "st")) == sx * sx - st * st


def test_symbol_triple_product():
    op = parse_operator("axes x,y,z; Dx^2*Dy^2*Dz^2 + Dx^2*Dy^2 + Dz^2")
    s1, s2, s3 = (Poly.var(n) for n in ("s1", "s2", "s3"))
    expected = -(s1 ** 2 * s2 ** 2 * s3 ** 2) + s1 ** 2 * s2 ** 2 - s3 ** 2
    assert symbol(op, ("s1", "s2", "s3")) == expected


def test_symbol_adjoint_sign_flip_randomized():
    rng = random.Random(37)
    names = ("s1", "s2", "s3", "s4")
    for _ in range(30):
        op = random_operator(rng)
        used = names[: op.dimension]
        assert symbol(adjoint(op), used, sign=1) == symbol(op, used, sign=-1)


def test_apply_symbol_arity_check():
    with pytest.raises(ValueError):
        apply_symbol(wave_operator(), [Poly.var("a")])
