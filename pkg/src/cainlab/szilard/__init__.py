"""Szilard-engine scenarios: classical (C1, C2) and quantum (Q1, Q2) nets."""
from .classical import (
    C1Params,
    C2Params,
    build_c1,
    build_c2,
    random_c1_params,
    random_c2_params,
    table_c1,
    table_c2,
)
from .quantum import (
    IsometryError,
    Q1Params,
    Q2Params,
    QuantumStates,
    build_q1,
    build_q2,
    embed_c1,
    embed_c2,
    random_q1_params,
    random_q2_params,
    rho2_by_contraction,
    rho3_unreduced,
    table_q1,
    table_q2,
)
from .reversal import c1_chain, c1_reversed_closed_form, c1_time_reversal_crosscheck
from .table import COLUMNS, LEGS, LegTable, WorkReport, work_report

__all__ = [
    "C1Params", "C2Params", "Q1Params", "Q2Params", "QuantumStates", "IsometryError",
    "build_c1", "build_c2", "build_q1", "build_q2",
    "table_c1", "table_c2", "table_q1", "table_q2",
    "random_c1_params", "random_c2_params", "random_q1_params", "random_q2_params",
    "embed_c1", "embed_c2", "rho2_by_contraction", "rho3_unreduced",
    "c1_chain", "c1_reversed_closed_form", "c1_time_reversal_crosscheck",
    "LegTable", "WorkReport", "work_report", "LEGS", "COLUMNS",
]
