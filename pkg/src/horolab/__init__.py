"""Numerical laboratory for horocycle-flow equidistribution on
infinite-volume hyperbolic surfaces.

Modules
-------
hypgeom      exact upper half-plane geometry: distances, Busemann
             functions, Hopf coordinates, geodesic and horocycle flows
schottky     Schottky groups, ping-pong reduction, boundary coding
density      Patterson-Sullivan densities and critical-exponent solvers
measures     Bowen-Margulis / Burger-Roblin quadratures, horocycle
             conditionals, flow boxes and transverse decompositions
dynamics     horocycle averaging operators and convergence probes
experiments  the registered experiment suites
cli          command-line entry point (`horolab <experiment> ...`)
"""

__version__ = "0.1.0"

from .errors import (
    AmbiguousBoundary,
    ConfigError,
    EmptySupport,
    HorolabError,
    InsufficientDepth,
    LeakyBox,
    NonTerminating,
    ZeroDenominator,
)
from .hypgeom import (
    BoundaryPoint,
    GroupElement,
    HopfCoord,
    HPoint,
    INF,
    ORIGIN,
    busemann,
    dist,
    geodesic_flow,
    horocycle_step,
)
from .schottky import SchottkyData, preset
from .density import AtomicBoundaryMeasure, build_ps_measure, estimate_delta
from .measures import FlowBox, QuadratureMeasure, bm_quadrature, br_quadrature
from .dynamics import (TestFunction, m_average, mean_value, ratio_average,
                       standard_suite)

__all__ = [
    "__version__",
    "AmbiguousBoundary",
    "AtomicBoundaryMeasure",
    "BoundaryPoint",
    "ConfigError",
    "EmptySupport",
    "FlowBox",
    "GroupElement",
    "HopfCoord",
    "HPoint",
    "HorolabError",
    "INF",
    "InsufficientDepth",
    "LeakyBox",
    "NonTerminating",
    "ORIGIN",
    "QuadratureMeasure",
    "SchottkyData",
    "TestFunction",
    "ZeroDenominator",
    "bm_quadrature",
    "br_quadrature",
    "build_ps_measure",
    "busemann",
    "dist",
    "estimate_delta",
    "geodesic_flow",
    "horocycle_step",
    "m_average",
    "mean_value",
    "preset",
    "ratio_average",
    "standard_suite",
]
