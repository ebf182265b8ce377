import cmath
import random

import pytest

from fundform.catalog import CATALOG_TAGS, builtin_solutions
from fundform.decompose import decompose, enumerate_plans
from fundform.manufactured import (
    ManufacturedSolution,
    SolutionSyntaxError,
    parse_solution,
)
from fundform.verify import (
    QuadratureSpec,
    adjoint_point_residual,
    boundary_residual,
    case_substituted_form,
    convergence_residuals,
    interior_residual,
    run_catalog_case,
)


# ---------------------------------------------------------------------------
# Expression trees


def test_parse_solution_evaluates():
    expr = parse_solution("(x-t)^3 + (x+t)^2", ("x", "t"))
    assert expr.evaluate({"x": 2.0, "t": 0.5}) == pytest.approx(
        (2.0 - 0.5) ** 3 + (2.0 + 0.5) ** 2
    )
    trig = parse_solution("exp(2*x)*sin(y) + 3i*cos(y)", ("x", "y"))
    x, y = 0.3, 1.1
    assert trig.evaluate({"x": x, "y": y}) == pytest.approx(
        cmath.exp(2 * x) * cmath.sin(y) + 3j * cmath.cos(y)
    )


def test_parse_solution_rejects_garbage():
    with pytest.raises(SolutionSyntaxError):
        parse_solution("x +", ("x",))
    with pytest.raises(SolutionSyntaxError):
        parse_solution("q^2", ("x",))
    with pytest.raises(SolutionSyntaxError):
        parse_solution("sin x", ("x",))
    with pytest.raises(SolutionSyntaxError):
        parse_solution("exp(x", ("x",))


def test_symbolic_derivative_against_finite_differences():
    axes = ("x", "y")
    samples = [
        "(x-y)^3 + (x+y)^2",
        "exp(x)*sin(2*y)",
        "x^2*cos(x+y) + 5",
        "exp(1i*x + y)",
    ]
    rng = random.Random(79)
    h = 1e-5
    for text in samples:
        expr = parse_solution(text, axes)
        for axis in axes:
            sym = expr.diff(axis)
            for _ in range(5):
                point = {"x": rng.uniform(0.2, 1.0), "y": rng.uniform(0.2, 1.0)}
                up = dict(point)
                down = dict(point)
                up[axis] += h
                down[axis] -= h
                fd = (expr.evaluate(up) - expr.evaluate(down)) / (2 * h)
                assert sym.evaluate(point) == pytest.approx(fd, rel=1e-6, abs=1e-6)


def test_trace_orders_match_mixed_partials():
    sol = ManufacturedSolution.scalar(("x", "y"), "x^3*y^2")
    assert sol.trace(0, (2, 1)).evaluate({"x": 2.0, "y": 3.0}) == pytest.approx(
        6 * 2.0 * 2 * 3.0
    )


# ---------------------------------------------------------------------------
# Catalog solutions


def test_catalog_solutions_satisfy_their_equations():
    for tag in CATALOG_TAGS:
        case = builtin_solutions(tag)[0]
        residual = interior_residual(case.operator, case.solution, case.box,
                                     params=case.params)
        assert residual <= 1e-10, tag


def test_catalog_spectral_points_sit_on_the_variety():
    for tag in CATALOG_TAGS:
        case = builtin_solutions(tag)[0]
        residual = adjoint_point_residual(case.operator, case.sigma, case.sign,
                                          case.amplitudes, case.params)
        assert residual <= 1e-12, tag


def test_unknown_catalog_tag():
    with pytest.raises(KeyError):
        builtin_solutions("plate")


# ---------------------------------------------------------------------------
# Boundary residuals


def test_boundary_residuals_all_catalog_cases():
    for tag in CATALOG_TAGS:
        report = run_catalog_case(tag, nodes=20)
        assert report["passed"], (tag, report["relative"])
        assert report["relative"] <= 1e-8


def test_zero_solution_gives_exactly_zero():
    case = builtin_solutions("wave")[0]
    zero = ManufacturedSolution.scalar(("x", "t"), "0")
    sf, assignment = case_substituted_form(case)
    report = boundary_residual(sf, zero, case.box, QuadratureSpec(8), assignment)
    assert report.residual == 0
    assert report.scale == 0


def test_wrong_solution_detected():
    report = run_catalog_case(
        "wave", nodes=20,
        solution=ManufacturedSolution.scalar(("x", "t"), "x^4"),
    )
    assert not report["passed"]
    assert report["relative"] >= 1e-2


def test_residual_converges_with_quadrature_order():
    for tag in CATALOG_TAGS:
        case = builtin_solutions(tag)[0]
        sf, assignment = case_substituted_form(case)
        reports = convergence_residuals(sf, case.solution, case.box,
                                        (5, 10, 20), assignment)
        floor = 1e-12 * max(reports[-1].scale, 1.0)
        assert reports[-1].relative <= 1e-8, tag
        assert abs(reports[-1].residual) <= abs(reports[0].residual) + floor
        assert abs(reports[-1].residual) <= abs(reports[1].residual) + floor


def test_residual_plan_invariant():
    # two different plans of the biharmonic family must agree to quadrature
    # accuracy on the same relation data
    case = builtin_solutions("biharmonic")[0]
    plans = []
    for plan in enumerate_plans(case.operator):
        plans.append(plan)
        if len(plans) == 2:
            break
    reports = []
    for plan in plans:
        dec = decompose(case.operator, plan)
        sf, assignment = case_substituted_form(case, dec)
        reports.append(
            boundary_residual(sf, case.solution, case.box, QuadratureSpec(20),
                              assignment)
        )
    assert reports[0].relative <= 1e-8
    assert reports[1].relative <= 1e-8
    assert abs(reports[0].residual - reports[1].residual) <= 1e-8 * max(
        reports[0].scale, 1.0
    )


def test_degenerate_box_rejected():
    case = builtin_solutions("wave")[0]
    sf, assignment = case_substituted_form(case)
    with pytest.raises(ValueError):
        boundary_residual(sf, case.solution, ((0.0, 0.0), (0.0, 1.0)),
                          QuadratureSpec(4), assignment)


def test_quadrature_spec_validated():
    with pytest.raises(ValueError):
        QuadratureSpec(0)


def test_axis_mismatch_rejected():
    case = builtin_solutions("wave")[0]
    sf, assignment = case_substituted_form(case)
    wrong = ManufacturedSolution.scalar(("x", "y"), "x")
    with pytest.raises(ValueError):
        boundary_residual(sf, wrong, case.box, QuadratureSpec(4), assignment)
