"""Benchmark harness: case catalog, run loop, norms, output and CLI."""

from .cases import CaseSpec, case_catalog, get_case
from .io import FieldData, read_eoc, read_output, write_eoc, write_output
from .norms import ErrorReport, EocTable, divergence_diagnostic, eoc, l1_error
from .runner import RunResult, ap_errors, run_case, self_convergence

__all__ = [
    "CaseSpec",
    "ErrorReport",
    "EocTable",
    "FieldData",
    "RunResult",
    "ap_errors",
    "case_catalog",
    "divergence_diagnostic",
    "eoc",
    "get_case",
    "l1_error",
    "read_eoc",
    "read_output",
    "run_case",
    "self_convergence",
    "write_eoc",
    "write_output",
]
