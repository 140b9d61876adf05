"""Clause and unit exchange between rings, plus global solve coordination.

Pools: every exporter keeps, for each other ring, four slots indexed by glue
class.  An export overwrites the slot (dropping whatever was there), an
import empties it with an exchange; both are single atomic swaps, so there is
no queue to maintain and stale clauses silently age out.  A slot holding a
stored clause owns one reference-count unit; packed binaries carry none.

The unit trail is a global append-only list of root-level literals.  A
per-variable published mask deduplicates concurrent derivations, and the
publication lock also orders the proof flush before the literal becomes
visible, which keeps the shared proof forward-checkable.

CPython note: the swap/test-and-set contracts are implemented with small
locks (per pool and one for publication); peeking at a slot is a plain read.
"""

import threading
from typing import List, Optional, Tuple, Union

from .clauses import Clause, ClauseStore, NUM_CLASSES, classify
from .proof import ProofBuffer

# try_import outcomes
NO_IMPORT = "no_import"
IMPORTED_UNITS = "imported_units"
IMPORTED_CLAUSE = "imported_clause"
BECAME_INCONSISTENT = "became_inconsistent"

VERDICT_SAT = "SAT"
VERDICT_UNSAT = "UNSAT"

_PACK_MASK = (1 << 31) - 1


def pack_binary(a: int, b: int) -> int:
    """Two literal codes in one 64-bit word (31 bits each)."""
    assert a <= _PACK_MASK and b <= _PACK_MASK
    return (a << 31) | b


def unpack_binary(word: int) -> Tuple[int, int]:
    return word >> 31, word & _PACK_MASK


class GlobalFlags:
    """Termination, inconsistency, and the winner claim."""

    def __init__(self):
        self._lock = threading.Lock()
        self.terminate = False
        self.inconsistent = False
        self.winner: Optional[int] = None
        self.verdict: Optional[str] = None
        self.winner_model: Optional[list] = None

    def request_stop(self):
        self.terminate = True

    def set_inconsistent(self):
        self.inconsistent = True
        self.terminate = True

    def claim_winner(self, ring_id: int, verdict: str, model=None) -> bool:
        """First claim wins; losers discard their result."""
        with self._lock:
            if self.winner is not None:
                return False
            self.winner = ring_id
            self.verdict = verdict
            self.winner_model = model
        if verdict == VERDICT_UNSAT:
            self.inconsistent = True
        self.terminate = True
        return True


class UnitTrail:
    """Root-level literals shared by all rings, deduplicated per variable."""

    def __init__(self, num_vars: int):
        self.lits: List[int] = []
        self._lock = threading.Lock()
        # 0 = unpublished, else the published literal code for the variable
        self.published = [0] * (num_vars + 1)
        # Authoritative root-level truth, used by simplifier and reconstruction.
        self.fixed_value = bytearray(num_vars + 1)  # 0 unknown, 1 true, 2 false

    def publish(self, lit: int, proof: ProofBuffer, original: bool = False) -> str:
        """Returns 'new', 'dup', or 'clash'.

        The proof line for a new unit is flushed while the lock is held, so
        the unit is in the file before any ring can observe it on the trail.
        """
        var = lit >> 1
        with self._lock:
            prev = self.published[var]
            if prev == lit:
                return "dup"
            if prev != 0:
                # Complementary root facts: formula inconsistent.
                if not original:
                    proof.trace_add((lit,))
                proof.trace_add(())
                return "clash"
            self.published[var] = lit
            self.fixed_value[var] = 2 if lit & 1 else 1
            if not original:
                proof.trace_add((lit,))
                proof.flush()
            self.lits.append(lit)
            return "new"

    def snapshot_len(self) -> int:
        return len(self.lits)

    def is_false_at_root(self, lit: int) -> bool:
        v = self.fixed_value[lit >> 1]
        if v == 0:
            return False
        return (v == 1) == bool(lit & 1)


class _Pool:
    """Slots from one exporter to one importer, one per glue class."""

    __slots__ = ("slots", "_lock")

    def __init__(self):
        self.slots: List[Optional[Union[int, Clause]]] = [None] * NUM_CLASSES
        self._lock = threading.Lock()

    def put(self, idx: int, payload) -> Optional[Union[int, Clause]]:
        with self._lock:
            old = self.slots[idx]
            self.slots[idx] = payload
        return old

    def take(self, idx: int) -> Optional[Union[int, Clause]]:
        with self._lock:
            old = self.slots[idx]
            self.slots[idx] = None
        return old


class InprocessingSync:
    """Rendezvous for uncloning rounds: ring 0 requests, everyone checks in,
    the simplifier runs on ring 0's thread, then everybody resumes.

    Terminated rings count as checked in (their exit sweep released the same
    references a check-in would), so a winner racing a round never deadlocks
    the others.
    """

    def __init__(self, n_rings: int, flags: GlobalFlags):
        self.n_rings = n_rings
        self.flags = flags
        self._cv = threading.Condition()
        self.requested_epoch = 0
        self.done_epoch = 0
        self.checked_in = 0
        self.exited = 0

    def request(self) -> int:
        with self._cv:
            self.requested_epoch += 1
            self.checked_in = 0
            self._cv.notify_all()
            return self.requested_epoch

    def pending_for(self, done_before: int) -> bool:
        return self.requested_epoch > done_before

    def check_in_and_wait(self, epoch: int):
        """Non-coordinating rings: report in, then sleep until the round ends."""
        with self._cv:
            self.checked_in += 1
            self._cv.notify_all()
            while self.done_epoch < epoch and not self.flags.terminate:
                self._cv.wait(timeout=0.2)

    def await_all_checked_in(self) -> bool:
        """Ring 0: wait for the other active rings; False if terminated early."""
        with self._cv:
            while True:
                if self.flags.terminate:
                    return False
                if self.checked_in + self.exited >= self.n_rings - 1:
                    return True
                self._cv.wait(timeout=0.2)

    def finish_round(self, epoch: int):
        with self._cv:
            self.done_epoch = epoch
            self._cv.notify_all()

    def note_exit(self):
        with self._cv:
            self.exited += 1
            self._cv.notify_all()


class Exchange:
    """Everything rings share: pools, unit trail, flags, elimination marks."""

    def __init__(self, n_rings: int, num_vars: int, store: ClauseStore,
                 enabled: bool = True):
        self.n_rings = n_rings
        self.store = store
        self.enabled = enabled
        self.flags = GlobalFlags()
        self.units = UnitTrail(num_vars)
        self.sync = InprocessingSync(n_rings, self.flags)
        self.eliminated = bytearray(num_vars + 1)
        # pools[exporter][importer]; the diagonal is never used
        self.pools = [[_Pool() for _ in range(n_rings)] for _ in range(n_rings)]

    # -- export ------------------------------------------------------------

    def export_clause(self, ring, lits, glue: int, clause: Optional[Clause]):
        """Offer a freshly learned clause to every other ring.

        The exporter's proof buffer is flushed first: the addition must be in
        the file before any other thread can build on the clause.
        """
        if not self.enabled or self.n_rings == 1:
            return
        slot = classify(len(lits), glue)
        if slot is None:
            return
        ring.proof.flush()
        me = ring.index
        pools = self.pools[me]
        if clause is None:
            payload = pack_binary(lits[0], lits[1])
            for other in range(self.n_rings):
                if other == me:
                    continue
                old = pools[other].put(slot, payload)
                if isinstance(old, Clause):
                    self.store.release(old, ring.proof)
        else:
            for other in range(self.n_rings):
                if other == me:
                    continue
                self.store.acquire(clause)
                old = pools[other].put(slot, clause)
                if isinstance(old, Clause):
                    self.store.release(old, ring.proof)
        ring.stats.exports += 1

    # -- units ---------------------------------------------------------------

    def publish_unit(self, ring, lit: int) -> str:
        result = self.units.publish(lit, ring.proof)
        if result == "clash":
            self.flags.set_inconsistent()
            self.flags.claim_winner(ring.index, VERDICT_UNSAT)
        return result

    def _import_units(self, ring):
        units = self.units
        n = units.snapshot_len()
        if n <= ring.units_seen:
            return False, None
        pending = []
        values = ring.values
        levels = ring.levels
        for i in range(ring.units_seen, n):
            u = units.lits[i]
            if values[u] == 1 and levels[u >> 1] == 0:
                continue
            pending.append(u)
        ring.units_seen = n
        if not pending:
            return False, None
        if ring.current_level() > 0:
            ring.backjump(0)
        for u in pending:
            v = ring.values[u]
            if v == -1:
                # Both polarities forced at root level: unsatisfiable.
                ring.proof.trace_add(())
                self.flags.set_inconsistent()
                self.flags.claim_winner(ring.index, VERDICT_UNSAT)
                return True, BECAME_INCONSISTENT
            if v == 0:
                ring.assign_unit(u)
        ring.stats.unit_imports += len(pending)
        return True, None

    # -- import --------------------------------------------------------------

    def try_import(self, ring):
        """At most one clause per decision, units first.

        Returns (outcome, conflict) where conflict is a repaired-but-falsified
        import the caller must run conflict analysis on.
        """
        had_units, incons = self._import_units(ring)
        if incons is not None:
            return BECAME_INCONSISTENT, None
        if had_units:
            return IMPORTED_UNITS, None
        if not self.enabled or self.n_rings == 1:
            return NO_IMPORT, None
        me = ring.index
        exporter = ring.rng.randrange(self.n_rings - 1)
        if exporter >= me:
            exporter += 1
        pool = self.pools[exporter][me]
        slots = pool.slots
        for idx in range(NUM_CLASSES):
            if slots[idx] is None:  # lock-free emptiness fast path
                continue
            payload = pool.take(idx)
            if payload is None:
                continue
            outcome, conflict = ring.integrate_import(payload)
            if outcome == IMPORTED_CLAUSE:
                ring.stats.imports += 1
            return outcome, conflict
        return NO_IMPORT, None

    # -- termination -----------------------------------------------------------

    def raise_termination(self, ring_index: int, verdict: str, model=None) -> bool:
        return self.flags.claim_winner(ring_index, verdict, model)

    # -- cleanup -----------------------------------------------------------------

    def drain_pools(self, proof: ProofBuffer):
        """Release every clause still parked in a slot (end of solve)."""
        for row in self.pools:
            for pool in row:
                for idx in range(NUM_CLASSES):
                    old = pool.take(idx)
                    if isinstance(old, Clause):
                        self.store.release(old, proof)
