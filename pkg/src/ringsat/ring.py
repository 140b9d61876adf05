"""One CDCL solver instance (a ring): trail, watched-literal propagation,
first-UIP analysis, restarts, database reduction, and the solve loop.

Shared clause literals are immutable tuples; everything per-ring lives here.
The watched pair sits in the ring-local Watcher (it doubles as the blocking
literal cache), never in the clause, so rings watching different literals of
the same clause never write to shared memory.  Irredundant binary clauses use
one flat watch-list structure shared read-only by all rings; learned and
imported binaries go to ring-local lists.

Value arrays are indexed by literal code: values[lit] is 1 when the literal
is true, -1 when false, 0 when unassigned.
"""

import random
from heapq import heappop, heappush, heapify
from typing import List, Optional, Tuple, Union

from .clauses import Clause, ClauseStore, classify
from .exchange import (Exchange, BECAME_INCONSISTENT, IMPORTED_CLAUSE,
                       NO_IMPORT, VERDICT_SAT, VERDICT_UNSAT, unpack_binary)
from .proof import ProofBuffer, MODE_FAKECOPY

MODE_STABLE = "stable"
MODE_FOCUSED = "focused"
MODE_ALTERNATING = "alternating"

_MODE_TABLE = (MODE_ALTERNATING, MODE_STABLE, MODE_FOCUSED)
_BUMP_TABLE = (False, False, True, True)

RESULT_SAT = "SAT"
RESULT_UNSAT = "UNSAT"
RESULT_INTERRUPTED = "interrupted"

_BIG = 1 << 60

ACTIVITY_DECAY = 0.95
ACTIVITY_RESCALE = 1e100
FOCUSED_MARGIN = 1.25
FOCUSED_FAST_WINDOW = 32
FOCUSED_SLOW_WINDOW = 4096
STABLE_BASE_INTERVAL = 1024
MODE_SWITCH_BASE = 1000
REDUCE_BASE = 2000
MIN_FOCUSED_GAP = 8


class RingConfig:
    """Portfolio axes, assigned by ring index modulo 12."""

    __slots__ = ("mode", "initial_phase", "reason_bumping", "seed")

    def __init__(self, mode: str, initial_phase: int, reason_bumping: bool, seed: int):
        self.mode = mode
        self.initial_phase = initial_phase
        self.reason_bumping = reason_bumping
        self.seed = seed

    @classmethod
    def for_index(cls, index: int, base_seed: int) -> "RingConfig":
        i = index % 12
        seed = (base_seed * 0x9E3779B97F4A7C15 + (index + 1) * 0xBF58476D1CE4E5B9) & ((1 << 64) - 1)
        return cls(_MODE_TABLE[i % 3], i % 2, _BUMP_TABLE[i % 4], seed)


class Ema:
    """Exponential moving average with bias-corrected reads."""

    __slots__ = ("alpha", "raw", "_decay")

    def __init__(self, window: int):
        self.alpha = 1.0 / window
        self.raw = 0.0
        self._decay = 1.0  # (1 - alpha)^updates

    def update(self, x: float):
        self.raw += self.alpha * (x - self.raw)
        self._decay *= 1.0 - self.alpha

    @property
    def value(self) -> float:
        denom = 1.0 - self._decay
        if denom <= 0.0:
            return 0.0
        return self.raw / denom


class Watcher:
    """Ring-local handle on a shared clause: the watched/blocking pair."""

    __slots__ = ("clause", "lit0", "lit1", "used")

    def __init__(self, clause: Clause, lit0: int, lit1: int, used: int = 0):
        self.clause = clause
        self.lit0 = lit0
        self.lit1 = lit1
        self.used = used


class Stats:
    __slots__ = ("conflicts", "decisions", "propagations", "restarts",
                 "reductions", "imports", "unit_imports", "exports",
                 "learned", "simplifications")

    def __init__(self):
        for name in self.__slots__:
            setattr(self, name, 0)

    def as_dict(self):
        return {name: getattr(self, name) for name in self.__slots__}


class Ring:
    def __init__(self, index: int, num_vars: int, store: ClauseStore,
                 exchange: Exchange, proof: ProofBuffer, config: RingConfig,
                 shared_bin: List[List[int]], ruler=None):
        self.index = index
        self.num_vars = num_vars
        self.store = store
        self.exchange = exchange
        self.proof = proof
        self.config = config
        self.ruler = ruler
        self.rng = random.Random(config.seed)
        self.stats = Stats()

        n2 = 2 * num_vars + 2
        self.values = [0] * n2
        self.levels = [0] * (num_vars + 1)
        self.reasons: List[Union[None, int, Watcher]] = [None] * (num_vars + 1)
        # saved[v] is the sign bit of the literal to decide next: phase 1 in
        # the portfolio table means "assign true", which is sign bit 0.
        self.saved = bytearray([config.initial_phase ^ 1] * (num_vars + 1))
        self.trail: List[int] = []
        self.trail_lim: List[int] = []
        self.qhead = 0
        self.watches: List[List[Watcher]] = [[] for _ in range(n2)]
        self.shared_bin = shared_bin
        self.local_bin: List[List[int]] = [[] for _ in range(n2)]

        self.activity = [0.0] * (num_vars + 1)
        self.act_inc = 1.0
        self.heap = [(0.0, v) for v in range(1, num_vars + 1)]
        self.seen = bytearray(num_vars + 1)

        self.units_seen = 0
        self.published_idx = 0
        self.active_vars = num_vars

        # restarts
        self.restart_mode = (MODE_STABLE if config.mode in (MODE_STABLE, MODE_ALTERNATING)
                             else MODE_FOCUSED)
        self.ema_fast = Ema(FOCUSED_FAST_WINDOW)
        self.ema_slow = Ema(FOCUSED_SLOW_WINDOW)
        self.conflicts_since_restart = 0
        self.luby_u = 1
        self.luby_v = 1
        self.mode_budget = MODE_SWITCH_BASE
        self.mode_conflicts = 0

        # reductions
        self.reduce_epoch = 1
        self.reduce_k = 1
        self.reduce_at = REDUCE_BASE

        self.conflict_limit: Optional[int] = None
        self.sync_done_epoch = 0

    # -- basic state -------------------------------------------------------

    def current_level(self) -> int:
        return len(self.trail_lim)

    def value(self, lit: int) -> int:
        return self.values[lit]

    def assign(self, lit: int, reason):
        values = self.values
        values[lit] = 1
        values[lit ^ 1] = -1
        v = lit >> 1
        self.levels[v] = len(self.trail_lim)
        self.reasons[v] = reason
        self.trail.append(lit)

    def assign_unit(self, lit: int):
        assert not self.trail_lim, "unit assignment above level 0"
        self.assign(lit, 0)

    def backjump(self, level: int):
        if len(self.trail_lim) <= level:
            return
        values = self.values
        saved = self.saved
        heap = self.heap
        activity = self.activity
        keep = self.trail_lim[level]
        for i in range(len(self.trail) - 1, keep - 1, -1):
            lit = self.trail[i]
            values[lit] = 0
            values[lit ^ 1] = 0
            v = lit >> 1
            saved[v] = lit & 1
            heappush(heap, (-activity[v], v))
        del self.trail[keep:]
        del self.trail_lim[level:]
        self.qhead = keep

    # -- propagation ---------------------------------------------------------

    def propagate(self):
        """Propagate everything pending; returns a conflict (Watcher for a
        stored clause, literal pair for a binary) or None.  Only the watcher
        pair moves; shared literal arrays are read, never written."""
        values = self.values
        trail = self.trail
        levels = self.levels
        reasons = self.reasons
        watches = self.watches
        shared_bin = self.shared_bin
        local_bin = self.local_bin
        trail_lim = self.trail_lim
        epoch = self.reduce_epoch
        props = 0
        conflict = None

        while self.qhead < len(trail):
            t = trail[self.qhead]
            self.qhead += 1
            props += 1
            f = t ^ 1
            lvl = len(trail_lim)

            for blist in (shared_bin[f], local_bin[f]):
                for p in blist:
                    vp = values[p]
                    if vp > 0:
                        continue
                    if vp < 0:
                        conflict = (p, f)
                        break
                    values[p] = 1
                    values[p ^ 1] = -1
                    v = p >> 1
                    levels[v] = lvl
                    reasons[v] = f
                    trail.append(p)
                if conflict is not None:
                    break
            if conflict is not None:
                break

            wl = watches[f]
            i = 0
            j = 0
            n_w = len(wl)
            while i < n_w:
                w = wl[i]
                other = w.lit1 if w.lit0 == f else w.lit0
                if values[other] > 0:
                    wl[j] = w
                    j += 1
                    i += 1
                    continue
                lits = w.clause.lits
                moved = False
                for r in lits:
                    if r != other and r != f and values[r] >= 0:
                        w.lit0 = other
                        w.lit1 = r
                        watches[r].append(w)
                        moved = True
                        break
                if moved:
                    i += 1
                    continue
                if values[other] < 0:
                    conflict = w
                    w.used = epoch
                    while i < n_w:
                        wl[j] = wl[i]
                        j += 1
                        i += 1
                    break
                # unit under this assignment: propagate `other`
                values[other] = 1
                values[other ^ 1] = -1
                v = other >> 1
                levels[v] = lvl
                reasons[v] = w
                trail.append(other)
                w.used = epoch
                wl[j] = w
                j += 1
                i += 1
            if j != i:
                del wl[j:]
            if conflict is not None:
                break

        self.stats.propagations += props
        return conflict

    # -- conflict analysis -----------------------------------------------------

    def _bump(self, v: int):
        act = self.activity[v] + self.act_inc
        self.activity[v] = act
        if act > ACTIVITY_RESCALE:
            self._rescale()
        else:
            heappush(self.heap, (-act, v))

    def _rescale(self):
        activity = self.activity
        for v in range(1, self.num_vars + 1):
            activity[v] *= 1e-100
        self.act_inc *= 1e-100
        self.heap = [(-activity[v], v) for v in range(1, self.num_vars + 1)]
        heapify(self.heap)

    def _conflict_lits(self, conflict) -> Tuple[int, ...]:
        if isinstance(conflict, Watcher):
            return conflict.clause.lits
        return conflict

    def analyze(self, conflict):
        """First-UIP learning; returns (learned literals, glue, backjump level).

        learned[0] is the asserting literal, learned[1] (when present) a
        literal from the backjump level, so the pair can be watched directly.
        """
        values = self.values
        levels = self.levels
        reasons = self.reasons
        trail = self.trail
        seen = self.seen
        lvl = len(self.trail_lim)
        epoch = self.reduce_epoch

        learned = [0]
        cleared = []
        path = 0
        idx = len(trail) - 1
        lits = self._conflict_lits(conflict)
        skip = 0
        t = 0

        while True:
            for q in lits:
                if q == skip:
                    continue
                v = q >> 1
                if seen[v]:
                    continue
                lq = levels[v]
                if lq == 0:
                    continue
                seen[v] = 1
                cleared.append(v)
                self._bump(v)
                if lq >= lvl:
                    path += 1
                else:
                    learned.append(q)
            while True:
                t = trail[idx]
                idx -= 1
                if seen[t >> 1]:
                    break
            path -= 1
            if path == 0:
                break
            r = reasons[t >> 1]
            if isinstance(r, Watcher):
                r.used = epoch
                lits = r.clause.lits
                skip = t
            else:
                # binary reason: the false partner literal
                lits = (r,)
                skip = 0

        learned[0] = t ^ 1

        if len(learned) > 2 or (len(learned) == 2 and reasons[learned[1] >> 1] is not None):
            learned = self._minimize(learned)

        # place a maximum-level literal at position 1 and find the jump level
        bj = 0
        if len(learned) > 1:
            best = 1
            best_level = levels[learned[1] >> 1]
            for k in range(2, len(learned)):
                lk = levels[learned[k] >> 1]
                if lk > best_level:
                    best_level = lk
                    best = k
            learned[1], learned[best] = learned[best], learned[1]
            bj = best_level

        glue = len({levels[q >> 1] for q in learned})

        if self.config.reason_bumping:
            for q in learned[1:]:
                r = reasons[q >> 1]
                if isinstance(r, Watcher):
                    for x in r.clause.lits:
                        self._bump_if_unseen(x >> 1, seen)
                elif isinstance(r, int) and r >= 2:
                    self._bump_if_unseen(r >> 1, seen)

        for v in cleared:
            seen[v] = 0
        self.act_inc /= ACTIVITY_DECAY

        return learned, glue, bj

    def _bump_if_unseen(self, v: int, seen):
        if not seen[v] and self.levels[v] > 0:
            self._bump(v)

    def _antecedents(self, q: int):
        """False literals justifying the (true) negation of q, or None for a
        decision."""
        r = self.reasons[q >> 1]
        if isinstance(r, Watcher):
            tlit = q ^ 1
            return tuple(x for x in r.clause.lits if x != tlit)
        if isinstance(r, int) and r >= 2:
            return (r,)
        return None

    def _minimize(self, learned: List[int]) -> List[int]:
        """Drop clause literals whose reasons resolve away inside the clause
        (recursive minimization, iterative form)."""
        levels = self.levels
        mask = 0
        for q in learned[1:]:
            mask |= 1 << (levels[q >> 1] & 63)
        memo = {}
        out = [learned[0]]
        for q in learned[1:]:
            if self.reasons[q >> 1] is None or not self._redundant(q, mask, memo):
                out.append(q)
        return out

    def _redundant(self, root: int, mask: int, memo) -> bool:
        levels = self.levels
        reasons = self.reasons
        seen = self.seen
        frames = [(root, iter(self._antecedents(root)))]
        while frames:
            q, it = frames[-1]
            descended = False
            for x in it:
                u = x >> 1
                if levels[u] == 0 or seen[u] or memo.get(u) is True:
                    continue
                if (memo.get(u) is False or reasons[u] is None
                        or not (mask >> (levels[u] & 63)) & 1):
                    for fq, _ in frames:
                        memo[fq >> 1] = False
                    return False
                frames.append((x, iter(self._antecedents(x))))
                descended = True
                break
            if not descended:
                memo[q >> 1] = True
                frames.pop()
        return True

    # -- learning ----------------------------------------------------------------

    def install_learned(self, learned: List[int], glue: int):
        """Trace, attach, assert, and export a freshly learned clause.
        Caller has already backjumped to the asserting level."""
        self.stats.learned += 1
        uip = learned[0]
        size = len(learned)
        if size == 1:
            self.exchange.publish_unit(self, uip)
            if self.values[uip] == 0:
                self.assign_unit(uip)
            return
        if size == 2:
            self.proof.trace_add(learned)
            a, b = learned
            self.local_bin[a].append(b)
            self.local_bin[b].append(a)
            self.assign(uip, b)
            self.exchange.export_clause(self, learned, glue, None)
            return
        clause = self.store.allocate(learned, glue, True, self.proof)
        w = Watcher(clause, learned[0], learned[1], self.reduce_epoch)
        self.watches[learned[0]].append(w)
        self.watches[learned[1]].append(w)
        self.assign(uip, w)
        if classify(size, glue) is not None:
            self.exchange.export_clause(self, clause.lits, glue, clause)

    def handle_conflict(self, conflict) -> Optional[str]:
        """Returns a final verdict when the conflict proves unsatisfiability,
        else None after learning and backjumping."""
        self.stats.conflicts += 1
        # A conflict can sit entirely below the current decision level (e.g.
        # one assembled from imported root units); analysis runs at the level
        # of its highest literal.
        top = 0
        for q in self._conflict_lits(conflict):
            lq = self.levels[q >> 1]
            if lq > top:
                top = lq
        if top == 0:
            self.proof.trace_add(())
            self.exchange.flags.set_inconsistent()
            self.exchange.raise_termination(self.index, VERDICT_UNSAT)
            return RESULT_UNSAT
        if top < len(self.trail_lim):
            self.backjump(top)
        learned, glue, bj = self.analyze(conflict)
        self.conflicts_since_restart += 1
        self.mode_conflicts += 1
        self.ema_fast.update(glue)
        self.ema_slow.update(glue)
        self.backjump(bj)
        self.install_learned(learned, glue)
        return None

    # -- restarts -------------------------------------------------------------

    def should_restart(self) -> bool:
        if self.config.mode == MODE_ALTERNATING and self.mode_conflicts >= self.mode_budget:
            self.restart_mode = (MODE_FOCUSED if self.restart_mode == MODE_STABLE
                                 else MODE_STABLE)
            self.mode_budget *= 2
            self.mode_conflicts = 0
            return True
        if self.restart_mode == MODE_FOCUSED:
            if self.conflicts_since_restart < MIN_FOCUSED_GAP:
                return False
            return self.ema_fast.value > FOCUSED_MARGIN * self.ema_slow.value
        interval = STABLE_BASE_INTERVAL * self.luby_v
        if self.conflicts_since_restart >= interval:
            if (self.luby_u & -self.luby_u) == self.luby_v:
                self.luby_u += 1
                self.luby_v = 1
            else:
                self.luby_v *= 2
            return True
        return False

    def restart(self):
        self.conflicts_since_restart = 0
        if self.trail_lim:
            self.stats.restarts += 1
            self.backjump(0)

    # -- database reduction ----------------------------------------------------

    def reduce(self):
        """Drop stale tier2 watchers and root-satisfied clauses.

        The proof buffer is flushed first so a deletion emitted by whichever
        ring releases last cannot overtake one of our still-buffered lemmas.
        """
        self.stats.reductions += 1
        self.proof.flush()
        values = self.values
        levels = self.levels
        epoch = self.reduce_epoch
        fakecopy = self.proof.mode == MODE_FAKECOPY

        protected = set()
        for lit in self.trail:
            r = self.reasons[lit >> 1]
            if isinstance(r, Watcher):
                protected.add(id(r))

        def root_satisfied(lits) -> bool:
            for x in lits:
                if values[x] > 0 and levels[x >> 1] == 0:
                    return True
            return False

        def dropping(w: Watcher) -> bool:
            if id(w) in protected:
                return False
            if root_satisfied(w.clause.lits):
                return True
            if not w.clause.redundant:
                return False
            if w.clause.glue <= 2:
                return False
            return w.used < epoch

        for lit in range(2, 2 * self.num_vars + 2):
            wl = self.watches[lit]
            j = 0
            for w in wl:
                if dropping(w):
                    if w.lit0 == lit:  # canonical visit releases once
                        if fakecopy:
                            self.proof.trace_delete(w.clause.lits)
                        self.store.release(w.clause, self.proof)
                else:
                    wl[j] = w
                    j += 1
            del wl[j:]

        self.reduce_epoch += 1
        self.reduce_k += 1
        self.reduce_at = int(REDUCE_BASE * self.reduce_k ** 1.2)

    # -- imports ------------------------------------------------------------------

    def _watch_rank(self, lit: int) -> int:
        if self.values[lit] >= 0:
            return _BIG
        return self.levels[lit >> 1]

    def _has_eliminated(self, lits) -> bool:
        elim = self.exchange.eliminated
        for x in lits:
            if elim[x >> 1]:
                return True
        return False

    def _root_filtered(self, lits) -> frozenset:
        values = self.values
        levels = self.levels
        return frozenset(x for x in lits
                         if not (values[x] < 0 and levels[x >> 1] == 0))

    def _binary_known(self, a: int, b: int) -> bool:
        sb = self.shared_bin[a]
        lb = self.local_bin[a]
        return b in sb or b in lb

    def integrate_import(self, payload) -> Tuple[str, Optional[object]]:
        """Adopt one clause taken from a pool slot: subsumption check, watch
        selection, and trail repair.  Returns (outcome, conflict)."""
        values = self.values
        levels = self.levels
        if isinstance(payload, int):
            a, b = unpack_binary(payload)
            if self._has_eliminated((a, b)):
                return NO_IMPORT, None
            if self._binary_known(a, b):
                return NO_IMPORT, None
            if self.proof.mode == MODE_FAKECOPY:
                self.proof.trace_import((a, b))
            self.local_bin[a].append(b)
            self.local_bin[b].append(a)
            if self._watch_rank(a) < self._watch_rank(b):
                a, b = b, a
            # now a has the higher rank (more alive) of the two
            if values[a] < 0:
                self.backjump(levels[a >> 1])
                return IMPORTED_CLAUSE, (a, b)
            if values[b] < 0:
                lb = levels[b >> 1]
                if not (values[a] > 0 and levels[a >> 1] <= lb):
                    self.backjump(lb)
                    self.assign(a, b)
            return IMPORTED_CLAUSE, None

        clause = payload
        lits = clause.lits
        if self._has_eliminated(lits):
            self.store.release(clause, self.proof)
            return NO_IMPORT, None

        # pick the two most-alive literals to watch
        w0 = w1 = -1
        r0 = r1 = -1
        for x in lits:
            rx = self._watch_rank(x)
            if rx > r0:
                w1, r1 = w0, r0
                w0, r0 = x, rx
            elif rx > r1:
                w1, r1 = x, rx

        # forward subsumption approximation over the shorter watch list
        mine = self._root_filtered(lits)
        if len(mine) == 2:
            pa, pb = sorted(mine)
            if self._binary_known(pa, pb):
                self.store.release(clause, self.proof)
                return NO_IMPORT, None
        probe = w0 if len(self.watches[w0]) <= len(self.watches[w1]) else w1
        for cand in self.watches[probe]:
            c = cand.clause
            if c is clause or self._root_filtered(c.lits) == mine:
                self.store.release(clause, self.proof)
                return NO_IMPORT, None

        if self.proof.mode == MODE_FAKECOPY:
            self.proof.trace_import(lits)
        w = Watcher(clause, w0, w1, self.reduce_epoch)
        self.watches[w0].append(w)
        self.watches[w1].append(w)
        if values[w0] < 0:
            # falsified: back up to where it became a conflict
            self.backjump(levels[w0 >> 1])
            return IMPORTED_CLAUSE, w
        if values[w1] < 0:
            lvl1 = levels[w1 >> 1]
            if not (values[w0] > 0 and levels[w0 >> 1] <= lvl1):
                # should have propagated at lvl1: repair
                self.backjump(lvl1)
                self.assign(w0, w)
        return IMPORTED_CLAUSE, None

    # -- decisions --------------------------------------------------------------

    def decide(self) -> bool:
        """Assign one decision literal; False when no variable is left."""
        values = self.values
        elim = self.exchange.eliminated
        heap = self.heap
        while heap:
            _, v = heappop(heap)
            if values[2 * v] == 0 and not elim[v]:
                self.trail_lim.append(len(self.trail))
                self.assign(2 * v + self.saved[v], None)
                self.stats.decisions += 1
                return True
        return False

    def all_assigned(self) -> bool:
        return len(self.trail) >= self.active_vars

    def refresh_active_vars(self):
        elim = self.exchange.eliminated
        self.active_vars = self.num_vars - sum(elim)

    # -- publication -------------------------------------------------------------

    def publish_root_assignments(self) -> bool:
        """Push new level-0 literals to the unit trail; True on inconsistency."""
        trail = self.trail
        end = len(trail) if not self.trail_lim else self.trail_lim[0]
        while self.published_idx < end:
            lit = trail[self.published_idx]
            self.published_idx += 1
            if self.exchange.publish_unit(self, lit) == "clash":
                return True
        return False

    # -- initial attachment -------------------------------------------------------

    def attach_clause(self, clause: Clause, acquire: bool):
        if acquire:
            self.store.acquire(clause)
        lits = clause.lits
        w = Watcher(clause, lits[0], lits[1], self.reduce_epoch)
        self.watches[lits[0]].append(w)
        self.watches[lits[1]].append(w)

    def assign_fixed_units(self, fixed_lits):
        for lit in fixed_lits:
            if self.values[lit] == 0:
                self.assign_unit(lit)
        self.published_idx = len(self.trail)

    # -- shutdown --------------------------------------------------------------------

    def release_all_watchers(self):
        """Exit sweep: give up every stored-clause reference this ring holds."""
        self.proof.flush()
        for lit in range(2, 2 * self.num_vars + 2):
            wl = self.watches[lit]
            for w in wl:
                if w.lit0 == lit:
                    self.store.release(w.clause, self.proof)
            wl.clear()

    # -- main loop ----------------------------------------------------------------------

    def cdcl_loop(self) -> str:
        """Propagate / analyze / backjump / decide until someone wins."""
        flags = self.exchange.flags
        sync = self.exchange.sync
        while True:
            conflict = self.propagate()
            if conflict is not None:
                verdict = self.handle_conflict(conflict)
                if verdict is not None:
                    return verdict
                continue

            if flags.terminate:
                return RESULT_INTERRUPTED
            if self.conflict_limit is not None and self.stats.conflicts >= self.conflict_limit:
                return RESULT_INTERRUPTED

            if not self.trail_lim and self.publish_root_assignments():
                return RESULT_UNSAT

            if sync.pending_for(self.sync_done_epoch):
                self._participate_in_simplification()
                continue
            if self.ruler is not None and self.index == 0 and self.ruler.wants_inprocessing(self):
                self.ruler.run_inprocessing_round(self)
                continue

            if self.stats.conflicts >= self.reduce_at:
                self.reduce()

            if self.should_restart():
                self.restart()

            outcome, conflict = self.exchange.try_import(self)
            if outcome == BECAME_INCONSISTENT:
                return RESULT_UNSAT
            if conflict is not None:
                verdict = self.handle_conflict(conflict)
                if verdict is not None:
                    return verdict
                continue
            if self.qhead < len(self.trail):
                # imported units or a repaired import assigned literals that
                # must be propagated before the next decision
                continue

            if self.all_assigned():
                model = list(self.values)
                if self.exchange.raise_termination(self.index, VERDICT_SAT, model):
                    return RESULT_SAT
                return RESULT_INTERRUPTED

            if not self.decide():
                # heap exhausted but trail shorter than expected: stale count
                self.refresh_active_vars()
                if self.all_assigned():
                    model = list(self.values)
                    if self.exchange.raise_termination(self.index, VERDICT_SAT, model):
                        return RESULT_SAT
                return RESULT_INTERRUPTED

    def _participate_in_simplification(self):
        """Check in for an uncloning round and wait for the simplifier."""
        epoch = self.exchange.sync.requested_epoch
        self.prepare_for_uncloning(release_refs=True)
        self.exchange.sync.check_in_and_wait(epoch)
        self.sync_done_epoch = epoch
        if not self.exchange.flags.terminate and self.ruler is not None:
            self.ruler.reclone_ring(self)

    def prepare_for_uncloning(self, release_refs: bool):
        """Backtrack to the root, publish pending units, flush the proof, and
        hand back (or drop) all irredundant large-clause references.
        Redundant watchers stay put."""
        self.backjump(0)
        self.publish_root_assignments()
        self.exchange._import_units(self)
        self.proof.flush()
        # Root facts need no reason clauses; clearing them lets every
        # irredundant reference go without invalidating the trail.
        for lit in self.trail:
            self.reasons[lit >> 1] = 0
        collected = []
        for lit in range(2, 2 * self.num_vars + 2):
            wl = self.watches[lit]
            j = 0
            for w in wl:
                if w.clause.redundant:
                    wl[j] = w
                    j += 1
                    continue
                if w.lit0 == lit:
                    if release_refs:
                        self.store.release(w.clause, self.proof)
                    else:
                        collected.append(w.clause)
            del wl[j:]
        return collected
