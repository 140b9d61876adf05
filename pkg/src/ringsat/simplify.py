"""Sequential formula simplification and model reconstruction.

The Simplifier owns all irredundant clauses while it runs (initial
preprocessing, or an uncloning round with every ring parked).  It applies, to
fixpoint under bounded effort: root-level unit propagation, subsumption,
self-subsuming strengthening, and bounded variable elimination.  Clauses are
never shortened in place: a strengthened clause is traced as a fresh addition
before the old one is deleted, so the proof stays inside the DRUP fragment
(every addition is a resolvent or a subset implied by unit propagation).

Eliminated clauses go onto the reconstruction stack with their witness
literal; replaying the stack in reverse extends any model of the simplified
formula to the original one.
"""

from typing import List, Optional, Tuple

from .clauses import Clause, ClauseStore
from .exchange import UnitTrail
from .proof import ProofBuffer

STATUS_OK = "ok"
STATUS_UNSAT = "unsat"

ELIMINATE_OCC_LIMIT = 1200      # skip variables with too many resolvent pairs
SUBSUME_CLAUSE_LIMIT = 1000     # skip absurdly long clauses
SUBSUME_OCC_LIMIT = 10000


class ReconstructionStack:
    """Eliminated clauses with witness literals, replayed in reverse."""

    def __init__(self):
        self.entries: List[Tuple[int, Tuple[int, ...]]] = []

    def push(self, witness: int, lits: Tuple[int, ...]):
        self.entries.append((witness, lits))

    def __len__(self):
        return len(self.entries)

    def extend_model(self, truth: bytearray):
        """truth[v] is 1/0 per variable; flips witnesses of falsified entries."""
        for witness, lits in reversed(self.entries):
            satisfied = False
            for lit in lits:
                if truth[lit >> 1] == (lit & 1 ^ 1):
                    satisfied = True
                    break
            if not satisfied:
                truth[witness >> 1] = (witness & 1) ^ 1


class _Rec:
    __slots__ = ("lits", "obj", "alive", "key")

    def __init__(self, lits: Tuple[int, ...], obj: Optional[Clause]):
        self.lits = lits
        self.obj = obj
        self.alive = True
        self.key = frozenset(lits)


class Simplifier:
    def __init__(self, store: ClauseStore, proof: ProofBuffer, units: UnitTrail,
                 eliminated: bytearray, stack: ReconstructionStack,
                 allocate_objects: bool = False):
        self.store = store
        self.proof = proof
        self.units = units
        self.eliminated = eliminated
        self.stack = stack
        # During inprocessing new large clauses become shared Clause objects
        # right away; during preprocessing they stay plain tuples until cloning.
        self.allocate_objects = allocate_objects
        self.records: List[_Rec] = []
        self.unsat = False

    # -- record plumbing -----------------------------------------------------

    def _fixed_sign(self, lit: int) -> int:
        """1 if lit is true at root, -1 if false, 0 if free."""
        v = self.units.fixed_value[lit >> 1]
        if v == 0:
            return 0
        true_code_is_neg = v == 2
        return 1 if (lit & 1) == (1 if true_code_is_neg else 0) else -1

    def _kill(self, rec: _Rec):
        rec.alive = False
        if rec.obj is not None:
            self.store.release(rec.obj, self.proof)
        else:
            self.proof.trace_delete(rec.lits)

    def _new_record(self, lits: Tuple[int, ...], traced_by_alloc: bool = False) -> Optional[_Rec]:
        """Trace and register a derived clause; handles unit/empty degenerations.

        Returns the new record, or None when the clause collapsed to a unit or
        the empty clause (callers only need surviving records).
        """
        if not lits:
            self.proof.trace_add(())
            self.unsat = True
            return None
        if len(lits) == 1:
            if self._publish(lits[0]) == "clash":
                self.unsat = True
            return None
        obj = None
        if len(lits) >= 3 and self.allocate_objects:
            obj = self.store.allocate(lits, 0, False, self.proof)
        else:
            self.proof.trace_add(lits)
        rec = _Rec(lits, obj)
        self.records.append(rec)
        return rec

    def _publish(self, lit: int) -> str:
        return self.units.publish(lit, self.proof)

    # -- passes ---------------------------------------------------------------

    def _propagate_fixed(self) -> bool:
        """Remove satisfied clauses and strip false literals, to fixpoint."""
        changed = False
        again = True
        while again and not self.unsat:
            again = False
            for rec in self.records:
                if not rec.alive:
                    continue
                sat = False
                stripped = None
                for lit in rec.lits:
                    s = self._fixed_sign(lit)
                    if s > 0:
                        sat = True
                        break
                    if s < 0:
                        stripped = True
                if sat:
                    self._kill(rec)
                    changed = True
                    continue
                if stripped:
                    new_lits = tuple(l for l in rec.lits if self._fixed_sign(l) == 0)
                    self._new_record(new_lits)
                    self._kill(rec)
                    changed = True
                    again = True  # new units may have been published
                    if self.unsat:
                        return changed
        return changed

    def _build_occs(self):
        occs = {}
        for idx, rec in enumerate(self.records):
            if not rec.alive:
                continue
            for lit in rec.lits:
                occs.setdefault(lit, []).append(idx)
        return occs

    def _subsume(self) -> bool:
        """Forward subsumption and self-subsuming strengthening, one sweep."""
        changed = False
        occs = self._build_occs()
        order = sorted((i for i, r in enumerate(self.records) if r.alive),
                       key=lambda i: (len(self.records[i].lits), i))
        for i in order:
            rec = self.records[i]
            if not rec.alive or len(rec.lits) > SUBSUME_CLAUSE_LIMIT:
                continue
            key = rec.key
            # subsumption: kill proper supersets of rec
            probe = min(rec.lits, key=lambda l: len(occs.get(l, ())))
            cands = occs.get(probe, ())
            if len(cands) <= SUBSUME_OCC_LIMIT:
                for j in cands:
                    other = self.records[j]
                    if other is rec or not other.alive:
                        continue
                    if len(other.lits) >= len(rec.lits) and key <= other.key:
                        self._kill(other)
                        changed = True
            # self-subsuming strengthening: rec = (alpha, l), other = (alpha', ~l)
            for lit in rec.lits:
                rest = key - {lit}
                for j in occs.get(lit ^ 1, ()):
                    other = self.records[j]
                    if not other.alive or len(other.lits) < len(rec.lits):
                        continue
                    if rest <= (other.key - {lit ^ 1}):
                        new_lits = tuple(l for l in other.lits if l != (lit ^ 1))
                        new_rec = self._new_record(new_lits)
                        self._kill(other)
                        changed = True
                        if self.unsat:
                            return changed
                        if new_rec is not None:
                            for l in new_rec.lits:
                                occs.setdefault(l, []).append(len(self.records) - 1)
        return changed

    def _eliminate(self) -> bool:
        """Bounded variable elimination: replace all clauses of a variable by
        their non-tautological resolvents when that does not grow the count."""
        changed = False
        occs = self._build_occs()
        fixed = self.units.fixed_value
        num_vars = len(fixed) - 1
        for v in range(1, num_vars + 1):
            if self.unsat:
                return changed
            if self.eliminated[v] or fixed[v]:
                continue
            pos = [i for i in occs.get(2 * v, ()) if self.records[i].alive]
            neg = [i for i in occs.get(2 * v + 1, ()) if self.records[i].alive]
            if not pos and not neg:
                continue
            if len(pos) * len(neg) > ELIMINATE_OCC_LIMIT:
                continue
            resolvents = []
            too_many = False
            limit = len(pos) + len(neg)
            for i in pos:
                ci = self.records[i].key
                for j in neg:
                    cj = self.records[j].key
                    res = (ci | cj) - {2 * v, 2 * v + 1}
                    if any((l ^ 1) in res for l in res):
                        continue
                    resolvents.append(tuple(sorted(res)))
                    if len(resolvents) > limit:
                        too_many = True
                        break
                if too_many:
                    break
            if too_many:
                continue
            # commit: witnesses first, then resolvent additions, then deletions
            for i in pos:
                self.stack.push(2 * v, self.records[i].lits)
            for j in neg:
                self.stack.push(2 * v + 1, self.records[j].lits)
            for res in resolvents:
                rec = self._new_record(res)
                if self.unsat:
                    return True
                if rec is not None:
                    idx = len(self.records) - 1
                    for l in rec.lits:
                        occs.setdefault(l, []).append(idx)
            for i in pos:
                if self.records[i].alive:
                    self._kill(self.records[i])
            for j in neg:
                if self.records[j].alive:
                    self._kill(self.records[j])
            self.eliminated[v] = 1
            changed = True
        return changed

    # -- driver -----------------------------------------------------------------

    def simplify(self, records: List[Tuple[Tuple[int, ...], Optional[Clause]]],
                 rounds: int = 10) -> str:
        """Run all passes to fixpoint (bounded); returns STATUS_OK or STATUS_UNSAT.

        Surviving clauses are available as .result_records() afterwards.
        """
        self.records = []
        self.unsat = False
        for lits, obj in records:
            if not lits:
                self.proof.trace_add(())
                self.unsat = True
            elif len(lits) == 1:
                # pre-existing unit clause: fold into the root assignment
                if self._publish_ingest(lits[0], obj) == "clash":
                    self.unsat = True
            else:
                self.records.append(_Rec(tuple(lits), obj))
            if self.unsat:
                return STATUS_UNSAT
        for _ in range(rounds):
            changed = self._propagate_fixed()
            if self.unsat:
                return STATUS_UNSAT
            changed |= self._subsume()
            if self.unsat:
                return STATUS_UNSAT
            changed |= self._propagate_fixed()
            if self.unsat:
                return STATUS_UNSAT
            changed |= self._eliminate()
            if self.unsat:
                return STATUS_UNSAT
            if not changed:
                break
        return STATUS_OK

    def _publish_ingest(self, lit: int, obj: Optional[Clause]) -> str:
        # Unit clauses handed in as records come from the original formula
        # (units are otherwise published the moment they are derived).
        result = self.units.publish(lit, self.proof, original=obj is None)
        if obj is not None:
            self.store.release(obj, self.proof)
        return result

    def result_records(self) -> List[Tuple[Tuple[int, ...], Optional[Clause]]]:
        return [(rec.lits, rec.obj) for rec in self.records if rec.alive]
