"""Routing-aware analytical placement for photonic integrated circuits."""

from .benchgen import ButterflySpec, ClementsSpec, gen_butterfly, gen_clements
from .legalize import LegalizeResult, Legalizer, legalize, verify_legal
from .metrics import LossModel, MetricsReport, evaluate, predict_bends, spacing_violations
from .netlist import Design, NetlistError, dump_design, load_design, parse_design, write_placement
from .placer import GlobalPlacer, PlacementResult, RunConfig, run_global

__version__ = "0.1.0"

__all__ = [
    "ButterflySpec", "ClementsSpec", "Design", "GlobalPlacer", "LegalizeResult", "Legalizer", "LossModel",
    "MetricsReport", "NetlistError", "PlacementResult", "RunConfig", "dump_design", "evaluate", "gen_butterfly",
    "gen_clements", "legalize", "load_design", "parse_design", "predict_bends", "run_global",
    "spacing_violations", "verify_legal", "write_placement",
]
