"""DIMACS CNF parsing and the literal encoding used everywhere else.

A variable v (1-based) has two literal codes: 2*v for the positive literal
and 2*v + 1 for the negative one.  Negation is one XOR, the variable is one
shift, and arrays indexed by literal code need no offset juggling.
"""

from typing import Iterable, List, Optional, Sequence, Tuple


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)


def encode_lit(dimacs_int: int, num_vars: Optional[int] = None) -> int:
    """Map a signed DIMACS literal to its code (2*v, or 2*v+1 when negated)."""
    if dimacs_int == 0:
        raise ValueError("literal 0 is the clause terminator, not a literal")
    v = abs(dimacs_int)
    if num_vars is not None and v > num_vars:
        raise ValueError("literal %d exceeds declared %d variables" % (dimacs_int, num_vars))
    return 2 * v + (1 if dimacs_int < 0 else 0)


def decode_lit(code: int) -> int:
    """Inverse of encode_lit."""
    if code < 2:
        raise ValueError("invalid literal code %d" % code)
    v = code >> 1
    return -v if code & 1 else v


def neg(code: int) -> int:
    return code ^ 1


def lit_var(code: int) -> int:
    return code >> 1


def decode_clause(codes: Iterable[int]) -> List[int]:
    return [decode_lit(c) for c in codes]


def encode_clause(dimacs_ints: Iterable[int], num_vars: Optional[int] = None) -> List[int]:
    return [encode_lit(d, num_vars) for d in dimacs_ints]


class InputFormula:
    """A parsed, normalized CNF: tautologies dropped, duplicate literals removed.

    `clauses` holds tuples of literal codes.  `had_empty_clause` is set when the
    input contains an empty clause, which makes the formula trivially
    inconsistent before any search starts.
    """

    def __init__(self, num_vars: int, clauses: Sequence[Tuple[int, ...]],
                 had_empty_clause: bool = False):
        self.num_vars = num_vars
        self.clauses = list(clauses)
        self.had_empty_clause = had_empty_clause

    def __repr__(self):
        return "InputFormula(vars=%d, clauses=%d%s)" % (
            self.num_vars, len(self.clauses),
            ", inconsistent" if self.had_empty_clause else "")

    def dimacs_clauses(self) -> List[List[int]]:
        return [decode_clause(c) for c in self.clauses]


def normalize_clause(codes: Iterable[int]) -> Optional[Tuple[int, ...]]:
    """Remove duplicate literals; return None for tautologies.

    Literal order of first occurrence is kept so that proofs and watch-list
    setup stay reproducible.
    """
    seen = set()
    out = []
    for c in codes:
        if c in seen:
            continue
        if c ^ 1 in seen:
            return None
        seen.add(c)
        out.append(c)
    return tuple(out)


def parse_dimacs(data) -> InputFormula:
    """Parse DIMACS CNF from bytes, str, or a file-like object.

    The header's clause count is advisory (mismatch tolerated), the variable
    count is strict: any literal outside 1..num_vars is an error.  A lone '%'
    token ends the input (benchmark archives commonly pad files that way).
    """
    if hasattr(data, "read"):
        data = data.read()
    if isinstance(data, bytes):
        data = data.decode("ascii", errors="replace")

    num_vars = None
    declared_clauses = None
    clauses: List[Tuple[int, ...]] = []
    had_empty = False
    current: List[int] = []

    for lineno, line in enumerate(data.split("\n"), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c"):
            continue
        if stripped.startswith("%"):
            break
        if stripped.startswith("p"):
            if num_vars is not None:
                raise ParseError("duplicate header", lineno)
            fields = stripped.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise ParseError("malformed header %r" % stripped, lineno)
            try:
                num_vars = int(fields[2])
                declared_clauses = int(fields[3])
            except ValueError:
                raise ParseError("non-integer header counts %r" % stripped, lineno)
            if num_vars < 0 or declared_clauses < 0:
                raise ParseError("negative header counts", lineno)
            continue
        if num_vars is None:
            raise ParseError("clause data before 'p cnf' header", lineno)
        for tok in stripped.split():
            if tok == "%":
                break
            try:
                val = int(tok)
            except ValueError:
                raise ParseError("non-integer token %r" % tok, lineno)
            if val == 0:
                norm = normalize_clause(current)
                current = []
                if norm is None:
                    continue
                if not norm:
                    had_empty = True
                clauses.append(norm)
            else:
                if abs(val) > num_vars:
                    raise ParseError(
                        "literal %d exceeds declared %d variables" % (val, num_vars),
                        lineno)
                current.append(encode_lit(val))

    if num_vars is None:
        raise ParseError("missing 'p cnf' header")
    if current:
        raise ParseError("unterminated clause (missing trailing 0)")
    if declared_clauses is not None and declared_clauses != len(clauses):
        # Advisory only; normalization legitimately changes the count.
        pass
    # Tautologies were dropped above; everything left is non-tautological.
    clauses = [c for c in clauses if c]
    formula = InputFormula(num_vars, clauses, had_empty)
    return formula


def to_dimacs(formula: InputFormula) -> str:
    lines = ["p cnf %d %d" % (formula.num_vars,
                              len(formula.clauses) + (1 if formula.had_empty_clause else 0))]
    if formula.had_empty_clause:
        lines.append("0")
    for clause in formula.clauses:
        lines.append(" ".join(str(d) for d in decode_clause(clause)) + " 0")
    return "\n".join(lines) + "\n"
