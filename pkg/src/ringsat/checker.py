"""Forward DRUP/DRAT checker with multiset clause semantics.

This is the in-repo oracle for every proof the solver emits.  It is written
against the proof file format only and shares no propagation code with the
solver: clauses here are deduplicated by sorted literal content with
occurrence counts ("the clause is kept as many times as it was added"), and
deleting one copy removes one count.  Unit propagation runs over one watch
structure per unique content, so fake-copy proofs with heavy duplication
check at the same speed as shared ones.

Deleting a unit clause adjusts its count but never retracts the root-level
assignment (the usual forward-checker treatment of reused units).
"""

from typing import Dict, Iterable, List, Optional, Tuple

from .formula import encode_lit, parse_dimacs
from .proof import parse_proof

VERIFIED = "Verified"
ADD_FAILED = "AddFailed"
NO_EMPTY_CLAUSE = "NoEmptyClause"


class CheckResult:
    def __init__(self, verdict: str, failed_line: Optional[int] = None,
                 adds: int = 0, deletes: int = 0, rat_steps: int = 0):
        self.verdict = verdict
        self.failed_line = failed_line
        self.adds = adds
        self.deletes = deletes
        self.rat_steps = rat_steps

    @property
    def ok(self) -> bool:
        return self.verdict == VERIFIED

    def __repr__(self):
        if self.verdict == ADD_FAILED:
            return "CheckResult(AddFailed at proof step %s)" % self.failed_line
        return "CheckResult(%s)" % self.verdict


class _WClause:
    __slots__ = ("lits", "w0", "w1", "dead")

    def __init__(self, lits: Tuple[int, ...]):
        self.lits = lits
        self.w0 = lits[0]
        self.w1 = lits[1]
        self.dead = False


class ClauseDB:
    """Multiset of clauses keyed by sorted literal content, with a two-watch
    propagation structure per unique content."""

    def __init__(self, num_vars: int = 0):
        self.counts: Dict[Tuple[int, ...], int] = {}
        self.clauses: Dict[Tuple[int, ...], _WClause] = {}
        self.num_vars = 0
        self.values: List[int] = [0, 0]
        self.watches: List[List[_WClause]] = [[], []]
        self.trail: List[int] = []
        self.qhead = 0
        self.root_conflict = False
        self._ensure_var(num_vars)

    def _ensure_var(self, v: int):
        if v <= self.num_vars:
            return
        grow = 2 * (v - self.num_vars)
        self.values.extend([0] * grow)
        for _ in range(grow):
            self.watches.append([])
        self.num_vars = v

    @staticmethod
    def key_of(codes: Iterable[int]) -> Tuple[int, ...]:
        return tuple(sorted(set(codes)))

    def _assign_root(self, lit: int):
        self.values[lit] = 1
        self.values[lit ^ 1] = -1
        self.trail.append(lit)

    # -- insertion / deletion ------------------------------------------------

    def add_clause(self, codes: Iterable[int]) -> None:
        """Insert one copy; attaches watches on the first copy and performs
        root-level propagation for units."""
        key = self.key_of(codes)
        if key:
            self._ensure_var(key[-1] >> 1)
        prev = self.counts.get(key, 0)
        self.counts[key] = prev + 1
        if prev > 0:
            return
        if not key:
            self.root_conflict = True
            return
        if self._is_tautology(key):
            return  # counted, but irrelevant for propagation
        if len(key) == 1:
            lit = key[0]
            if self.values[lit] < 0:
                self.root_conflict = True
            elif self.values[lit] == 0:
                self._assign_root(lit)
                if self._propagate() is not None:
                    self.root_conflict = True
            return
        clause = _WClause(key)
        self.clauses[key] = clause
        self._attach(clause)

    @staticmethod
    def _is_tautology(key: Tuple[int, ...]) -> bool:
        s = set(key)
        return any((l ^ 1) in s for l in key)

    def _attach(self, clause: _WClause):
        values = self.values
        nonfalse = [l for l in clause.lits if values[l] >= 0]
        if not nonfalse:
            self.root_conflict = True
            nonfalse = list(clause.lits[:2])
        elif len(nonfalse) == 1:
            other = next(l for l in clause.lits if l != nonfalse[0])
            nonfalse.append(other)
            if values[nonfalse[0]] == 0:
                self._assign_root(nonfalse[0])
                if self._propagate() is not None:
                    self.root_conflict = True
        clause.w0 = nonfalse[0]
        clause.w1 = nonfalse[1]
        self.watches[clause.w0].append(clause)
        self.watches[clause.w1].append(clause)

    def delete_clause(self, codes: Iterable[int]) -> None:
        """Remove one copy; never drops a count below zero and never undoes a
        root assignment made by a unit."""
        key = self.key_of(codes)
        count = self.counts.get(key, 0)
        if count <= 0:
            return
        self.counts[key] = count - 1
        if count == 1:
            clause = self.clauses.pop(key, None)
            if clause is not None:
                clause.dead = True  # watch lists compact lazily

    # -- propagation ----------------------------------------------------------

    def _propagate(self) -> Optional[_WClause]:
        values = self.values
        trail = self.trail
        watches = self.watches
        while self.qhead < len(trail):
            t = trail[self.qhead]
            self.qhead += 1
            f = t ^ 1
            wl = watches[f]
            i = 0
            j = 0
            n = len(wl)
            while i < n:
                c = wl[i]
                if c.dead:
                    i += 1
                    continue
                other = c.w1 if c.w0 == f else c.w0
                if values[other] > 0:
                    wl[j] = c
                    j += 1
                    i += 1
                    continue
                moved = False
                for r in c.lits:
                    if r != other and r != f and values[r] >= 0:
                        c.w0 = other
                        c.w1 = r
                        watches[r].append(c)
                        moved = True
                        break
                if moved:
                    i += 1
                    continue
                if values[other] < 0:
                    while i < n:
                        if not wl[i].dead:
                            wl[j] = wl[i]
                            j += 1
                        i += 1
                    del wl[j:]
                    return c
                values[other] = 1
                values[other ^ 1] = -1
                trail.append(other)
                wl[j] = c
                j += 1
                i += 1
            del wl[j:]
        return None

    # -- redundancy checks ----------------------------------------------------------

    def rup_check(self, codes: Iterable[int]) -> bool:
        """True iff asserting the negation of every literal and propagating
        to fixpoint yields a conflict."""
        if self.root_conflict:
            return True
        key = self.key_of(codes)
        if key:
            self._ensure_var(key[-1] >> 1)
        values = self.values
        mark = len(self.trail)
        conflict = False
        for lit in key:
            if values[lit] > 0:
                conflict = True
                break
            if values[lit] == 0:
                neg = lit ^ 1
                values[neg] = 1
                values[lit] = -1
                self.trail.append(neg)
        if not conflict:
            conflict = self._propagate() is not None
        for lit in self.trail[mark:]:
            values[lit] = 0
            values[lit ^ 1] = 0
        del self.trail[mark:]
        self.qhead = mark
        return conflict

    def rat_check(self, codes: Iterable[int]) -> bool:
        """Resolution check on the first literal; robustness fallback only,
        solver output never needs it."""
        key = tuple(codes)
        if not key:
            return False
        pivot = key[0]
        rest = set(key)
        for other_key, clause in list(self.clauses.items()):
            if clause.dead or (pivot ^ 1) not in other_key:
                continue
            resolvent = rest | {l for l in other_key if l != (pivot ^ 1)}
            if any((l ^ 1) in resolvent for l in resolvent):
                continue
            if not self.rup_check(tuple(resolvent)):
                return False
        # unit copies of the negated pivot also resolve
        if self.counts.get((pivot ^ 1,), 0) > 0:
            if not self.rup_check(tuple(rest - {pivot})):
                return False
        return True


def check_records(cnf_clauses: Iterable[Iterable[int]],
                  records: Iterable[Tuple[str, Tuple[int, ...]]],
                  num_vars: int = 0) -> CheckResult:
    """Check a proof given clauses and records in literal-code form."""
    db = ClauseDB(num_vars)
    for clause in cnf_clauses:
        db.add_clause(clause)
    adds = deletes = rat_steps = 0
    for step, (kind, dimacs_lits) in enumerate(records, start=1):
        codes = tuple(encode_lit(d) for d in dimacs_lits)
        if kind == "d":
            deletes += 1
            db.delete_clause(codes)
            continue
        adds += 1
        if not db.rup_check(codes):
            if codes and db.rat_check(codes):
                rat_steps += 1
            else:
                return CheckResult(ADD_FAILED, step, adds, deletes, rat_steps)
        if not codes:
            return CheckResult(VERIFIED, None, adds, deletes, rat_steps)
        db.add_clause(codes)
    return CheckResult(NO_EMPTY_CLAUSE, None, adds, deletes, rat_steps)


def check_proof(cnf_path, proof_path, binary: bool = False) -> CheckResult:
    """Verdict for a DIMACS file against a DRAT/DRUP proof file."""
    with open(cnf_path, "rb") as handle:
        formula = parse_dimacs(handle)
    cnf = list(formula.clauses)
    if formula.had_empty_clause:
        cnf.append(())
    return check_records(cnf, parse_proof(proof_path, binary=binary),
                         formula.num_vars)
