"""Classical and maximal-path tail dependence of bivariate copulas."""

from maxtail.copulas import (
    EvcMixture,
    Gaussian,
    Independence,
    MarshallOlkin,
    NelsenEx33,
    PickandsParams,
    cdf,
    parse_spec,
)
from maxtail.indices import GridSpec, IndexReport, index_report
from maxtail.maxdep import SectionMax, SolverOptions, maximize_section, trace_max_path

__all__ = [
    "EvcMixture",
    "Gaussian",
    "GridSpec",
    "Independence",
    "IndexReport",
    "MarshallOlkin",
    "NelsenEx33",
    "PickandsParams",
    "SectionMax",
    "SolverOptions",
    "cdf",
    "index_report",
    "maximize_section",
    "parse_spec",
    "trace_max_path",
]

__version__ = "0.1.0"
