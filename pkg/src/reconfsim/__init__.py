"""Explicit-state models of clustered write-back cache machines.

Workloads run either on a sequentially consistent reference machine or on an
implementation machine whose cores are grouped into clusters sharing a cache.
The package explores both, checks trace conformance, race freedom and reduct
coherence, and compares executions under a simple latency cost model.
"""

from .analysis import (check_conformance, is_coherent, is_consistent, is_drf,
                       observable_language, reduct, view)
from .clustering import Clustering, parse_clustering, refines
from .cost import CostParams, action_cost, amortised_compare, breakeven_report, trace_cost
from .implementation import ReconfEvent, explore_impl
from .reference import detect_races, explore_ref
from .workload import Workload, load_workload, parse_workload

__version__ = "0.1.0"

__all__ = [
    "Clustering", "CostParams", "ReconfEvent", "Workload",
    "action_cost", "amortised_compare", "breakeven_report", "check_conformance",
    "detect_races", "explore_impl", "explore_ref", "is_coherent", "is_consistent",
    "is_drf", "load_workload", "observable_language", "parse_clustering",
    "parse_workload", "reduct", "refines", "trace_cost", "view",
]
