"""Fibonacci WRT invariants of mapping tori and their one-clean-qubit estimation."""
from .category import PHI, f_symbol, fusion_allowed, s_symbol, twist_phase
from .dqc1 import GateCircuit, absolute_trace_reduction, exact_p0, run_wrt_estimation, sample_estimate
from .encoding import encoded_word_trace, thresholds
from .qudits import plan, trace_discrepancy
from .representation import GeneratorId, MCGWord, evaluate_word, generator_matrix, wrt_invariant
from .spine import labeling_count, standard_spine

__version__ = "0.1.0"

__all__ = [
    "PHI",
    "GateCircuit",
    "GeneratorId",
    "MCGWord",
    "absolute_trace_reduction",
    "encoded_word_trace",
    "evaluate_word",
    "exact_p0",
    "f_symbol",
    "fusion_allowed",
    "generator_matrix",
    "labeling_count",
    "plan",
    "run_wrt_estimation",
    "s_symbol",
    "sample_estimate",
    "standard_spine",
    "thresholds",
    "trace_discrepancy",
    "twist_phase",
    "wrt_invariant",
]
