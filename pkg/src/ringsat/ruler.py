"""Solve orchestration: preprocess, clone rings into threads, coordinate
uncloning rounds, reconstruct the model, and verify it before reporting.

The main thread (the ruler) parses and simplifies sequentially, allocates the
shared clauses once, clones them into every ring as fresh watcher lists over
the same literal tuples, and then mostly sleeps until a winner raises the
termination flag or a limit expires.  Inprocessing rounds run on ring 0's
thread while the other rings are parked at the rendezvous.
"""

import os
import threading
import time
from typing import Dict, List, Optional, Tuple

from .clauses import Clause, ClauseStore
from .exchange import Exchange, VERDICT_SAT, VERDICT_UNSAT
from .formula import InputFormula, decode_lit, parse_dimacs
from .proof import (NULL_BUFFER, MODE_FAKECOPY, MODE_OFF, MODE_SHARED,
                    ProofWriter, open_proof)
from .ring import Ring, RingConfig
from .simplify import (ReconstructionStack, Simplifier, STATUS_OK,
                       STATUS_UNSAT)

SAT = "SAT"
UNSAT = "UNSAT"
UNKNOWN = "UNKNOWN"

INPROCESS_FIRST_INTERVAL = 10000


class Options:
    """Solver knobs; defaults match the command line."""

    def __init__(self, threads: Optional[int] = None, proof_path=None,
                 proof_binary: bool = False, proof_mode: str = MODE_SHARED,
                 seed: int = 0, time_limit: Optional[float] = None,
                 conflict_limit: Optional[int] = None, inprocessing: bool = True,
                 preprocessing: bool = True, exchange: bool = True,
                 verbosity: int = 1):
        self.threads = threads if threads is not None else (os.cpu_count() or 1)
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        self.proof_path = proof_path
        self.proof_binary = proof_binary
        self.proof_mode = proof_mode if proof_path is not None else MODE_OFF
        if proof_mode == MODE_FAKECOPY and proof_path is None:
            raise ValueError("fake-copy proof mode requires a proof path")
        # Fake-copy traces model per-thread clause copies; sequential
        # inprocessing deduplicates shared clauses and is incompatible with
        # that accounting, so it is disabled for such runs.
        if self.proof_mode == MODE_FAKECOPY:
            inprocessing = False
        self.seed = seed
        self.time_limit = time_limit
        self.conflict_limit = conflict_limit
        self.inprocessing = inprocessing
        self.preprocessing = preprocessing
        self.exchange = exchange
        self.verbosity = verbosity


class SolveResult:
    def __init__(self, verdict: str, model: Optional[List[int]] = None,
                 stats: Optional[Dict] = None):
        self.verdict = verdict
        self.model = model  # DIMACS literals, one per original variable
        self.stats = stats or {}

    def __repr__(self):
        return "SolveResult(%s)" % self.verdict

    @property
    def exit_code(self) -> int:
        if self.verdict == SAT:
            return 10
        if self.verdict == UNSAT:
            return 20
        return 0


class Ruler:
    def __init__(self, formula: InputFormula, options: Options,
                 proof_writer: Optional[ProofWriter] = None):
        self.formula = formula
        self.options = options
        self.store = ClauseStore()
        self.n_rings = options.threads
        self.exchange = Exchange(self.n_rings, formula.num_vars, self.store,
                                 enabled=options.exchange)
        if proof_writer is not None:
            self.proof_writer = proof_writer
            self._owns_writer = False
        else:
            self.proof_writer = open_proof(options.proof_path, options.proof_binary,
                                           options.proof_mode)
            self._owns_writer = True
        self.proof = (self.proof_writer.buffer() if self.proof_writer
                      else NULL_BUFFER)
        self.stack = ReconstructionStack()
        self.shared_bin: List[List[int]] = [[] for _ in range(2 * formula.num_vars + 2)]
        self.rings: List[Ring] = []
        self.canonical: List[Tuple[Tuple[int, ...], Optional[Clause]]] = []
        self._inproc_interval = INPROCESS_FIRST_INTERVAL
        self._inproc_next = INPROCESS_FIRST_INTERVAL
        self.inprocessing_rounds = 0
        self._thread_error: Optional[BaseException] = None
        self._error_lock = threading.Lock()
        self.wall_time = 0.0
        self.bytes_after_clone = 0
        self.watcher_entries_after_clone = 0

    # -- preprocessing -------------------------------------------------------

    def prepare(self) -> Optional[str]:
        """Ingest and simplify the input; returns an early verdict or None."""
        if self.formula.had_empty_clause:
            self.proof.trace_add(())
            return UNSAT
        records = [(lits, None) for lits in self.formula.clauses]
        simp = Simplifier(self.store, self.proof, self.exchange.units,
                          self.exchange.eliminated, self.stack,
                          allocate_objects=False)
        if self.options.preprocessing:
            status = simp.simplify(records)
        else:
            status = simp.simplify(records, rounds=0)
        if status == STATUS_UNSAT:
            return UNSAT
        # Everything derived so far must be in the file before any ring can
        # build on the cloned clauses.
        self.proof.flush()
        self.canonical = simp.result_records()
        if not self.canonical:
            return SAT  # fully satisfied by root assignments and eliminations
        return None

    # -- cloning ----------------------------------------------------------------

    def clone_rings(self):
        """Ring 0 takes ownership of all clauses; the others acquire shared
        references and fresh watcher lists over the same literal tuples."""
        num_vars = self.formula.num_vars
        self.shared_bin = [[] for _ in range(2 * num_vars + 2)]
        large: List[Clause] = []
        for lits, obj in self.canonical:
            if len(lits) == 2:
                a, b = lits
                self.shared_bin[a].append(b)
                self.shared_bin[b].append(a)
            else:
                if obj is None:
                    # content is already a premise or a traced preprocessing
                    # product, so wrapping it is not a new proof addition
                    obj = self.store.allocate(lits, 0, False, self.proof,
                                              trace=False)
                large.append(obj)
        self.canonical = None  # ownership handed to ring 0 below

        fixed_lits = self._fixed_literals()
        units_mark = self.exchange.units.snapshot_len()
        self.rings = []
        for index in range(self.n_rings):
            cfg = RingConfig.for_index(index, self.options.seed)
            buf = (self.proof_writer.buffer() if self.proof_writer else NULL_BUFFER)
            ring = Ring(index, num_vars, self.store, self.exchange, buf, cfg,
                        self.shared_bin, ruler=self)
            ring.conflict_limit = self.options.conflict_limit
            for clause in large:
                ring.attach_clause(clause, acquire=index != 0)
            ring.assign_fixed_units(fixed_lits)
            ring.units_seen = units_mark
            ring.refresh_active_vars()
            self.rings.append(ring)

        self.bytes_after_clone = self.store.literal_bytes
        self.watcher_entries_after_clone = sum(
            sum(len(wl) for wl in ring.watches) for ring in self.rings)

    def _fixed_literals(self) -> List[int]:
        fixed = self.exchange.units.fixed_value
        out = []
        for v in range(1, self.formula.num_vars + 1):
            if fixed[v] == 1:
                out.append(2 * v)
            elif fixed[v] == 2:
                out.append(2 * v + 1)
        return out

    # -- inprocessing -----------------------------------------------------------

    def wants_inprocessing(self, ring: Ring) -> bool:
        return (self.options.inprocessing and ring.index == 0
                and ring.stats.conflicts >= self._inproc_next
                and not self.exchange.flags.terminate)

    def run_inprocessing_round(self, ring0: Ring):
        """Executed on ring 0's thread: collect every irredundant clause,
        simplify sequentially, and hand the result back to all rings."""
        sync = self.exchange.sync
        epoch = sync.request()
        collected = ring0.prepare_for_uncloning(release_refs=False)
        ring0.sync_done_epoch = epoch
        if not sync.await_all_checked_in():
            for clause in collected:
                self.store.release(clause, ring0.proof)
            sync.finish_round(epoch)
            return
        records = [(c.lits, c) for c in collected]
        seen_pairs = set()
        for a in range(2, 2 * self.formula.num_vars + 2):
            for b in self.shared_bin[a]:
                if a < b:
                    seen_pairs.add((a, b))
        for a, b in sorted(seen_pairs):
            records.append(((a, b), None))

        simp = Simplifier(self.store, self.proof, self.exchange.units,
                          self.exchange.eliminated, self.stack,
                          allocate_objects=True)
        status = simp.simplify(records)
        self.inprocessing_rounds += 1
        ring0.stats.simplifications += 1
        if status == STATUS_UNSAT:
            self.proof.flush()
            self.exchange.flags.set_inconsistent()
            self.exchange.raise_termination(ring0.index, VERDICT_UNSAT)
            for lits, obj in simp.result_records():
                if obj is not None:
                    self.store.release(obj, self.proof)
            sync.finish_round(epoch)
            return
        self.canonical = simp.result_records()
        self._rebuild_shared_binaries()
        self.proof.flush()
        self.reclone_ring(ring0)
        self._inproc_interval *= 2
        self._inproc_next = ring0.stats.conflicts + self._inproc_interval
        sync.finish_round(epoch)

    def _rebuild_shared_binaries(self):
        shared = [[] for _ in range(2 * self.formula.num_vars + 2)]
        for lits, obj in self.canonical:
            if len(lits) == 2:
                a, b = lits
                shared[a].append(b)
                shared[b].append(a)
        self.shared_bin = shared

    def reclone_ring(self, ring: Ring):
        """Re-attach the simplified clause set after an uncloning round."""
        ring.shared_bin = self.shared_bin
        for lits, obj in self.canonical:
            if obj is not None:
                ring.attach_clause(obj, acquire=ring.index != 0)
        elim = self.exchange.eliminated
        values = ring.values
        levels = ring.levels
        fakecopy = ring.proof.mode == MODE_FAKECOPY
        for lit in range(2, 2 * self.formula.num_vars + 2):
            wl = ring.watches[lit]
            j = 0
            for w in wl:
                if not w.clause.redundant:
                    wl[j] = w
                    j += 1
                    continue
                drop = False
                for x in w.clause.lits:
                    if elim[x >> 1] or (values[x] > 0 and levels[x >> 1] == 0):
                        drop = True
                        break
                if drop:
                    if w.lit0 == lit:
                        if fakecopy:
                            ring.proof.trace_delete(w.clause.lits)
                        self.store.release(w.clause, ring.proof)
                else:
                    wl[j] = w
                    j += 1
            del wl[j:]
            lb = ring.local_bin[lit]
            if lb and (elim[lit >> 1] or any(elim[p >> 1] for p in lb)):
                lb[:] = [p for p in lb if not elim[p >> 1]]
                if elim[lit >> 1]:
                    lb.clear()
        ring.refresh_active_vars()

    # -- solving ------------------------------------------------------------------

    def solve(self) -> SolveResult:
        start = time.monotonic()
        verdict = self.prepare()
        if verdict is not None:
            result = self._finish_early(verdict)
            self.wall_time = time.monotonic() - start
            self._close()
            result.stats = self._collect_stats()
            return result

        self.clone_rings()
        threads = []
        for ring in self.rings:
            t = threading.Thread(target=self._ring_thread, args=(ring,),
                                 name="ring-%d" % ring.index, daemon=True)
            threads.append(t)
        for t in threads:
            t.start()

        deadline = (time.monotonic() + self.options.time_limit
                    if self.options.time_limit else None)
        flags = self.exchange.flags
        while True:
            alive = [t for t in threads if t.is_alive()]
            if not alive:
                break
            if deadline is not None and time.monotonic() >= deadline:
                flags.request_stop()
            alive[0].join(timeout=0.05)
        for t in threads:
            t.join()

        if self._thread_error is not None:
            self._close()
            raise self._thread_error

        self.exchange.drain_pools(self.proof)
        result = self._final_result()
        self.wall_time = time.monotonic() - start
        self._close()
        result.stats = self._collect_stats()
        return result

    def _ring_thread(self, ring: Ring):
        try:
            ring.cdcl_loop()
        except BaseException as exc:  # surface in the main thread
            with self._error_lock:
                if self._thread_error is None:
                    self._thread_error = exc
            self.exchange.flags.request_stop()
        finally:
            try:
                ring.release_all_watchers()
            finally:
                self.exchange.sync.note_exit()

    def _finish_early(self, verdict: str) -> SolveResult:
        if verdict == UNSAT:
            return SolveResult(UNSAT)
        return SolveResult(SAT, self._reconstruct_from(None))

    def _final_result(self) -> SolveResult:
        flags = self.exchange.flags
        if flags.verdict == VERDICT_SAT:
            model = self._reconstruct_from(flags.winner_model)
            return SolveResult(SAT, model)
        if flags.verdict == VERDICT_UNSAT or flags.inconsistent:
            return SolveResult(UNSAT)
        return SolveResult(UNKNOWN)

    # -- reconstruction ------------------------------------------------------------

    def _reconstruct_from(self, winner_values: Optional[List[int]]) -> List[int]:
        """Extend a ring assignment over eliminated and fixed variables and
        check it against the original clauses before anyone sees it."""
        n = self.formula.num_vars
        truth = bytearray(n + 1)
        if winner_values is not None:
            for v in range(1, n + 1):
                truth[v] = 1 if winner_values[2 * v] == 1 else 0
        fixed = self.exchange.units.fixed_value
        for v in range(1, n + 1):
            if fixed[v] == 1:
                truth[v] = 1
            elif fixed[v] == 2:
                truth[v] = 0
        self.stack.extend_model(truth)
        model = [v if truth[v] else -v for v in range(1, n + 1)]
        self._verify_model(truth)
        return model

    def _verify_model(self, truth: bytearray):
        for lits in self.formula.clauses:
            for lit in lits:
                if truth[lit >> 1] == ((lit & 1) ^ 1):
                    break
            else:
                raise RuntimeError(
                    "internal error: reconstructed model falsifies clause %s"
                    % [decode_lit(l) for l in lits])

    # -- bookkeeping -------------------------------------------------------------------

    def _collect_stats(self) -> Dict:
        agg = {"conflicts": 0, "decisions": 0, "propagations": 0, "restarts": 0,
               "reductions": 0, "imports": 0, "unit_imports": 0, "exports": 0,
               "learned": 0, "simplifications": 0}
        for ring in self.rings:
            for key, val in ring.stats.as_dict().items():
                agg[key] += val
        agg["rings"] = len(self.rings)
        agg["inprocessing_rounds"] = self.inprocessing_rounds
        agg["eliminated_vars"] = sum(self.exchange.eliminated)
        agg["live_clauses"] = self.store.live_clauses
        agg["allocated_clauses"] = self.store.allocated_total
        agg["peak_literal_bytes"] = self.store.peak_literal_bytes
        agg["literal_bytes_after_clone"] = self.bytes_after_clone
        agg["wall_time"] = self.wall_time
        return agg

    def _close(self):
        if self._owns_writer and self.proof_writer is not None:
            self.proof_writer.close()


def solve_formula(formula: InputFormula, options: Optional[Options] = None,
                  proof_writer: Optional[ProofWriter] = None) -> SolveResult:
    ruler = Ruler(formula, options or Options(), proof_writer)
    return ruler.solve()


def solve_file(path, options: Optional[Options] = None) -> SolveResult:
    with open(path, "rb") as handle:
        formula = parse_dimacs(handle)
    return solve_formula(formula, options)
