"""Conditionally-additive-noise causal direction inference."""

__version__ = "0.1.0"

from .graph import CausalGraph, GraphError
from .indep_tests import (IndepTestConfig, Verdict, cv_independence_test, hsic_perm_test,
                          nrr_independence_test, run_test)
from .inference import (CriterionConfig, Decision, InferenceError, infer_potential_cause,
                        pattern_table, replay_decision)
from .oracle import TriState, cv_can_structural, nrr_can_structural, structural_cells
from .patterns import PatternRow, decision_from_cells
from .scm import preset, sample

__all__ = [
    "CausalGraph", "GraphError", "IndepTestConfig", "Verdict", "cv_independence_test",
    "hsic_perm_test", "nrr_independence_test", "run_test", "CriterionConfig", "Decision",
    "InferenceError", "infer_potential_cause", "pattern_table", "replay_decision", "TriState",
    "cv_can_structural", "nrr_can_structural", "structural_cells", "PatternRow",
    "decision_from_cells", "preset", "sample",
]
