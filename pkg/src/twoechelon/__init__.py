"""Two-echelon waterborne location-routing: model, solver and tooling."""

from .alns import AlnsResult, SearchParams, alns_run, local_search
from .construct import assign_jacks, cluster, initial_k, spc_construct
from .fileio import (ParseError, parse_legacy, parse_native,
                     parse_solution, write_native, write_report,
                     write_solution)
from .firstech import BnpStats, branch_and_price, solve_first_echelon
from .generator import GeneratorSpec, generate
from .model import (DemandPoint, InfeasibleInstance, Instance, JackAssignment,
                    LevClass, LevRoute, Solution, TpSite, VesselClass,
                    VesselRoute, VesselVisit, check_instance, cost_breakdown,
                    schedule_solution, total_cost, validate)

__version__ = "0.1.0"

__all__ = [
    "AlnsResult", "SearchParams", "alns_run", "local_search",
    "assign_jacks", "cluster", "initial_k", "spc_construct",
    "BnpStats", "branch_and_price", "solve_first_echelon",
    "ParseError", "parse_legacy", "parse_native", "parse_solution",
    "write_native", "write_report", "write_solution",
    "GeneratorSpec", "generate",
    "DemandPoint", "InfeasibleInstance", "Instance", "JackAssignment",
    "LevClass", "LevRoute", "Solution", "TpSite", "VesselClass",
    "VesselRoute", "VesselVisit", "check_instance", "cost_breakdown",
    "schedule_solution", "total_cost", "validate", "__version__",
]
