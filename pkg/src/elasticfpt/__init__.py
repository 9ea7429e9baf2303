"""Passage-time moments of 1-D diffusions with an elastic threshold,
plus the Poisson dead-time counter distribution and Monte Carlo oracles."""

from .diffusion import DiffusionSpec, ElasticThreshold
from .models import (
    FellerParams,
    OUParams,
    WienerParams,
    feller_spec,
    ou_spec,
    wiener_spec,
)
from .moments import (
    MomentSummary,
    fet_moment,
    fet_moment_via_relation,
    fpt_moment,
    fpt_variance,
    refractory_moment,
    refractory_variance,
    summary,
)
from .deadtime import CounterParams, CountDistribution, output_distribution, output_pmf
from .montecarlo import SampleStats, simulate_counter, simulate_fet_elastic, simulate_fpt
from .tables import compare_table, compute_table, format_paper

__version__ = "0.1.0"

__all__ = [
    "CountDistribution",
    "CounterParams",
    "DiffusionSpec",
    "ElasticThreshold",
    "FellerParams",
    "MomentSummary",
    "OUParams",
    "SampleStats",
    "WienerParams",
    "compare_table",
    "compute_table",
    "feller_spec",
    "fet_moment",
    "fet_moment_via_relation",
    "format_paper",
    "fpt_moment",
    "fpt_variance",
    "ou_spec",
    "output_distribution",
    "output_pmf",
    "refractory_moment",
    "refractory_variance",
    "simulate_counter",
    "simulate_fet_elastic",
    "simulate_fpt",
    "summary",
    "wiener_spec",
]
