"""Multiple contrast tests for binary dose-finding data with zero-responder arms."""

from binmcp.comparators import chisq_trend_test, exact_catt, fisher_exact
from binmcp.contrasts import ContrastMatrix, WeightingScheme, contrast_set, optimal_contrast
from binmcp.design import (CandidateModel, CandidateSet, DoseDesign, any_arm_zero_probability,
                           candidate_means, case_study_design, default_candidates, make_shape,
                           zero_count_probability)
from binmcp.mcptest import MCPResult, mcp_analyze
from binmcp.mvn import MvnAccuracy, mvn_max_tail
from binmcp.regression import AllZero, BinomialCounts, FitResult, choose_fit, fit_firth
from binmcp.simulation import Scenario, SimulationReport, power_table, run_scenario

__all__ = [
    "AllZero", "BinomialCounts", "CandidateModel", "CandidateSet", "ContrastMatrix",
    "DoseDesign", "FitResult", "MCPResult", "MvnAccuracy", "Scenario", "SimulationReport",
    "WeightingScheme", "any_arm_zero_probability", "candidate_means", "case_study_design",
    "chisq_trend_test", "choose_fit", "contrast_set", "default_candidates", "exact_catt",
    "fisher_exact", "fit_firth", "make_shape", "mcp_analyze", "mvn_max_tail",
    "optimal_contrast", "power_table", "run_scenario", "zero_count_probability",
]
