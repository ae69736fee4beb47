"""Rational points of bounded height on analytic arcs in projective space."""

from ratarc.rational import (
    ProjectivePoint,
    enumerate_rationals,
    height,
    height_bound,
    normalize,
)

__all__ = [
    "ProjectivePoint",
    "enumerate_rationals",
    "height",
    "height_bound",
    "normalize",
]

__version__ = "0.1.0"
