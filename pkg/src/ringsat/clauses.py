"""Shared immutable clauses with atomic reference counting.

A stored Clause (3 or more literals) is allocated exactly once; its literal
tuple is never written again, so any thread may read it without locking.
Rings, pool slots, and the simplifier all hold counted references; the single
observer of the count reaching zero reclaims the clause and writes its
deletion line.  Binary clauses are virtual (they live only in watch lists)
and never get a Clause object.

CPython has no public atomic integers, so read-modify-write on counters goes
through a small striped lock table, same trick as a lock-based Atomic class.
"""

import sys
import threading
from typing import Callable, List, Optional, Tuple

from .proof import ProofBuffer, MODE_SHARED

# Export slot classes, ordered by import priority (lowest glue first).
CLASS_BINARY = 0
CLASS_GLUE1 = 1
CLASS_GLUE2 = 2
CLASS_TIER2 = 3
NUM_CLASSES = 4


def classify(size: int, glue: int) -> Optional[int]:
    """Slot class for an exportable learned clause, or None (kept private)."""
    if size == 2:
        return CLASS_BINARY
    if glue == 1:
        return CLASS_GLUE1
    if glue == 2:
        return CLASS_GLUE2
    if glue <= 6:
        return CLASS_TIER2
    return None


class Clause:
    __slots__ = ("id", "lits", "glue", "redundant", "_refs")

    def __init__(self, cid: int, lits: Tuple[int, ...], glue: int, redundant: bool):
        self.id = cid
        self.lits = lits
        self.glue = glue
        self.redundant = redundant
        self._refs = 1

    def __repr__(self):
        return "Clause(id=%d, len=%d, glue=%d, refs=%d%s)" % (
            self.id, len(self.lits), self.glue, self._refs,
            ", red" if self.redundant else "")

    @property
    def refcount(self) -> int:
        return self._refs


_N_STRIPES = 64


class ClauseStore:
    """Allocation, sharing, and reclamation of stored clauses for one solve."""

    def __init__(self, on_event: Optional[Callable] = None):
        self._id_lock = threading.Lock()
        self._next_id = 1
        self._stripes = [threading.Lock() for _ in range(_N_STRIPES)]
        self._acct_lock = threading.Lock()
        self.live_clauses = 0
        self.literal_bytes = 0
        self.peak_literal_bytes = 0
        self.allocated_total = 0
        self.freed_total = 0
        # Test instrumentation: called as on_event(kind, clause, traced) with
        # kind in {"alloc", "free"}; never used by the solver itself.
        self.on_event = on_event

    def _fresh_id(self) -> int:
        with self._id_lock:
            cid = self._next_id
            self._next_id += 1
        return cid

    def allocate(self, lits, glue: int, redundant: bool, proof: ProofBuffer,
                 trace: bool = True) -> Clause:
        """New clause with refcount 1; its addition hits the proof before the
        caller can publish the reference anywhere.

        trace=False is for wrapping clauses whose content is already part of
        the premise set or the proof (initial cloning); everything derived
        during solving is traced here."""
        lits = tuple(lits)
        assert len(lits) >= 3, "binary clauses are virtual, units are assignments"
        clause = Clause(self._fresh_id(), lits, glue, redundant)
        nbytes = sys.getsizeof(lits)
        with self._acct_lock:
            self.live_clauses += 1
            self.allocated_total += 1
            self.literal_bytes += nbytes
            if self.literal_bytes > self.peak_literal_bytes:
                self.peak_literal_bytes = self.literal_bytes
        if trace:
            proof.trace_add(lits)
        if self.on_event is not None:
            self.on_event("alloc", clause, trace)
        return clause

    def acquire(self, clause: Clause):
        lock = self._stripes[clause.id & (_N_STRIPES - 1)]
        with lock:
            assert clause._refs >= 1, "acquire on a dead clause"
            clause._refs += 1

    def release(self, clause: Clause, proof: ProofBuffer):
        """Drop one reference; the zero-crossing emits the deletion (shared
        mode) and reclaims the accounting, on exactly one thread."""
        lock = self._stripes[clause.id & (_N_STRIPES - 1)]
        with lock:
            assert clause._refs >= 1, "release without a reference"
            clause._refs -= 1
            dead = clause._refs == 0
        if dead:
            if proof.mode == MODE_SHARED:
                proof.trace_delete(clause.lits)
            nbytes = sys.getsizeof(clause.lits)
            with self._acct_lock:
                self.live_clauses -= 1
                self.freed_total += 1
                self.literal_bytes -= nbytes
            if self.on_event is not None:
                self.on_event("free", clause, proof.mode == MODE_SHARED)
