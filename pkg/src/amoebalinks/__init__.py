"""Amoebas, coamoebas, tropical curves and torus links of plane curves."""

from .poly import (
    LatticeMatrix,
    LatticeSegment,
    LaurentPolynomial,
    NewtonPolygon,
    apply_matrix,
    evaluate,
    format_polynomial,
    integer_length,
    newton_polygon,
    parse_polynomial,
    partial_derivative,
)

__version__ = "0.1.0"
