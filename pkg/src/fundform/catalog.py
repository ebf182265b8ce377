"""Built-in operators and verified trial solutions used by the CLI and
the test rig.

Spectral points are chosen exactly on the relevant constraint variety
(Gaussian-rational points where one exists), so the numeric harness only
sees floating error from quadrature, never from the data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .manufactured import ManufacturedSolution
from .operators import MatrixPDO, Operator, ScalarPDO
from .parser import parse_matrix_operator, parse_scalar_operator

WAVE_TEXT = "axes x,t; Dt^2 - Dx^2"
HEAT_TEXT = "axes x,t; Dt - Dx^2"
BIHARMONIC_TEXT = (
    "axes x,y,z; Dx^4 + Dy^4 + Dz^4 + 2*Dx^2*Dy^2 + 2*Dy^2*Dz^2 + 2*Dz^2*Dx^2"
)
TRIPLE_PRODUCT_TEXT = "axes x,y,z; Dx^2*Dy^2*Dz^2 + Dx^2*Dy^2 + Dz^2"

STOKES_JSON = {
    "axes": ["x", "y", "z", "t"],
    "params": ["nu"],
    "fields": ["u1", "u2", "u3", "p"],
    "entries": [
        ["Dt - nu*(Dx^2+Dy^2+Dz^2)", "0", "0", "Dx"],
        ["0", "Dt - nu*(Dx^2+Dy^2+Dz^2)", "0", "Dy"],
        ["0", "0", "Dt - nu*(Dx^2+Dy^2+Dz^2)", "Dz"],
        ["Dx", "Dy", "Dz", "0"],
    ],
}


def wave_operator() -> ScalarPDO:
    return parse_scalar_operator(WAVE_TEXT)


def heat_operator() -> ScalarPDO:
    return parse_scalar_operator(HEAT_TEXT)


def biharmonic_operator() -> ScalarPDO:
    return parse_scalar_operator(BIHARMONIC_TEXT)


def triple_product_operator() -> ScalarPDO:
    """Sixth-order three-axis operator whose constraint variety has a
    rational parameterization; the standard twelve-plan example."""
    return parse_scalar_operator(TRIPLE_PRODUCT_TEXT)


def stokes_operator() -> MatrixPDO:
    """Unsteady incompressible system on (x, y, z, t): three momentum rows
    with symbolic viscosity nu and one divergence row."""
    return parse_matrix_operator(STOKES_JSON)


@dataclass(frozen=True)
class CatalogCase:
    """One ready-to-run verification case: operator, exact-on-variety
    spectral data, a trial solution, and parameter values."""

    tag: str
    operator: Operator
    solution: ManufacturedSolution
    sigma: tuple  # per-axis spectral values (complex)
    sign: int
    amplitudes: tuple | None  # per-field test-slot amplitudes (complex)
    params: Mapping
    box: tuple


def _spinor_numeric(xi1: complex, xi2: complex) -> tuple:
    return (
        xi1 * xi1 - xi2 * xi2,
        1j * (xi1 * xi1 + xi2 * xi2),
        -2 * xi1 * xi2,
    )


def builtin_solutions(tag: str) -> list:
    """Verified trial solutions (with spectral data) for a catalog tag."""
    unit = (0.0, 1.0)
    if tag == "wave":
        solution = ManufacturedSolution.scalar(
            ("x", "t"), "(x-t)^3 + (x+t)^2"
        )
        return [CatalogCase("wave", wave_operator(), solution,
                            (1.0, -1.0), 1, None, {}, (unit, unit))]
    if tag == "heat":
        solution = ManufacturedSolution.scalar(("x", "t"), "exp(x+t)")
        return [CatalogCase("heat", heat_operator(), solution,
                            (1.0, -1j), 1, None, {}, (unit, unit))]
    if tag == "biharmonic":
        solution = ManufacturedSolution.scalar(
            ("x", "y", "z"), "x^3 - 3*x*y^2 + z"
        )
        return [CatalogCase("biharmonic", biharmonic_operator(), solution,
                            (3.0, 4.0, 5j), 1, None, {},
                            (unit, unit, unit))]
    if tag == "stokes":
        solution = ManufacturedSolution.system(
            ("x", "y", "z", "t"),
            ["exp(-1*t)*sin(y)", "0", "0", "0"],
        )
        xi1, xi2, xi3 = 1.0 + 0j, 2.0 + 0j, 1.0 + 0j
        k = _spinor_numeric(xi1, xi2)
        # weight exp(-i k.x + i xi3 t) realised as sigma with sign -1
        sigma = (k[0], k[1], k[2], -xi3)
        amplitudes = (k[0], k[1], k[2], xi3)
        return [CatalogCase("stokes", stokes_operator(), solution,
                            sigma, -1, amplitudes, {"nu": 1.0},
                            (unit, unit, unit, unit))]
    raise KeyError(f"unknown catalog tag {tag!r}; "
                   "have wave, heat, biharmonic, stokes")


CATALOG_TAGS = ("wave", "heat", "biharmonic", "stokes")
