"""ringsat: a multi-threaded CDCL SAT solver that shares clause memory
between solver threads and writes one cooperative DRAT proof."""

from .formula import InputFormula, ParseError, parse_dimacs
from .ruler import Options, SolveResult, solve_file, solve_formula, SAT, UNSAT, UNKNOWN

__version__ = "0.1.0"

__all__ = [
    "InputFormula", "ParseError", "parse_dimacs",
    "Options", "SolveResult", "solve_file", "solve_formula",
    "SAT", "UNSAT", "UNKNOWN", "__version__",
]
