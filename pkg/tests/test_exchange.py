import io
import threading

import pytest

from conftest import build_ring

from ringsat.checker import ClauseDB
from ringsat.clauses import CLASS_BINARY, CLASS_GLUE1, ClauseStore, classify
from ringsat.exchange import (Exchange, GlobalFlags, UnitTrail,
                              BECAME_INCONSISTENT, IMPORTED_CLAUSE,
                              IMPORTED_UNITS, NO_IMPORT, VERDICT_SAT,
                              VERDICT_UNSAT, pack_binary, unpack_binary)
from ringsat.formula import decode_lit, encode_clause, encode_lit
from ringsat.proof import NULL_BUFFER, ProofWriter, parse_proof
from ringsat.ring import Ring, RingConfig, Watcher


def two_rings(num_vars=6, clauses=(), n=2, writer=None):
    store = ClauseStore()
    exchange = Exchange(n, num_vars, store)
    rings = []
    for i in range(n):
        buf = writer.buffer() if writer else NULL_BUFFER
        ring = build_ring(num_vars, list(clauses), n_rings=n, index=i,
                          store=store, exchange=exchange, proof=buf)
        rings.append(ring)
    return store, exchange, rings


def test_pack_unpack_binary_roundtrip():
    for a, b in ((2, 3), (100, 2**31 - 1), (7, 12)):
        assert unpack_binary(pack_binary(a, b)) == (a, b)


def test_export_fills_other_rings_slots_and_refcounts():
    store, exchange, rings = two_rings(n=3)
    lits = tuple(encode_clause([1, 2, 3]))
    clause = store.allocate(lits, 1, True, NULL_BUFFER)
    exchange.export_clause(rings[0], lits, 1, clause)
    # two slots written, one refcount unit each
    assert clause.refcount == 1 + 2
    assert exchange.pools[0][1].slots[CLASS_GLUE1] is clause
    assert exchange.pools[0][2].slots[CLASS_GLUE1] is clause
    assert exchange.pools[0][0].slots[CLASS_GLUE1] is None


def test_high_glue_never_exported():
    store, exchange, rings = two_rings(n=2)
    lits = tuple(encode_clause([1, 2, 3, 4, 5, 6]))
    clause = store.allocate(lits, 7, True, NULL_BUFFER)
    assert classify(len(lits), 7) is None
    exchange.export_clause(rings[0], lits, 7, clause)
    assert clause.refcount == 1
    assert all(slot is None for slot in exchange.pools[0][1].slots)


def test_displacement_releases_old_clause_once():
    sink = io.BytesIO()
    writer = ProofWriter(sink)
    store, exchange, rings = two_rings(n=2, writer=writer)
    l1 = tuple(encode_clause([1, 2, 3]))
    l2 = tuple(encode_clause([2, 3, 4]))
    c1 = store.allocate(l1, 1, True, rings[0].proof)
    c2 = store.allocate(l2, 1, True, rings[0].proof)
    exchange.export_clause(rings[0], l1, 1, c1)
    assert c1.refcount == 2
    exchange.export_clause(rings[0], l2, 1, c2)
    assert c1.refcount == 1  # displaced exactly once
    assert c2.refcount == 2
    writer.close()
    deletes = [r for r in parse_proof(sink.getvalue()) if r[0] == "d"]
    assert deletes == []  # no premature deletion while the learner holds it


def test_try_import_empty_slots():
    store, exchange, rings = two_rings(n=2)
    outcome, conflict = exchange.try_import(rings[0])
    assert outcome == NO_IMPORT
    assert conflict is None


def test_unit_import_assigns_at_level_zero():
    store, exchange, rings = two_rings(num_vars=4)
    r0, r1 = rings
    r0.assign_unit(encode_lit(3))
    assert r0.publish_root_assignments() is False
    outcome, _ = exchange.try_import(r1)
    assert outcome == IMPORTED_UNITS
    assert r1.values[encode_lit(3)] == 1
    assert r1.levels[3] == 0
    assert r1.reasons[3] == 0


def test_unit_import_backtracks_first():
    store, exchange, rings = two_rings(num_vars=4)
    r0, r1 = rings
    # r1 is deep in the tree with 3 assigned false
    r1.trail_lim.append(len(r1.trail))
    r1.assign(encode_lit(-3), None)
    r0.assign_unit(encode_lit(3))
    r0.publish_root_assignments()
    outcome, _ = exchange.try_import(r1)
    assert outcome == IMPORTED_UNITS
    assert r1.current_level() == 0
    assert r1.values[encode_lit(3)] == 1


def test_contradictory_units_set_inconsistent():
    sink = io.BytesIO()
    writer = ProofWriter(sink)
    store, exchange, rings = two_rings(num_vars=4, writer=writer)
    r0, r1 = rings
    r0.assign_unit(encode_lit(3))
    r1.assign_unit(encode_lit(-3))
    assert r0.publish_root_assignments() is False
    assert r1.publish_root_assignments() is True  # clash
    assert exchange.flags.inconsistent
    assert exchange.flags.terminate
    writer.close()
    records = list(parse_proof(sink.getvalue()))
    assert ("a", ()) in records  # empty clause traced


def test_concurrent_unit_publication_single_trace():
    for _ in range(30):
        sink = io.BytesIO()
        writer = ProofWriter(sink)
        store = ClauseStore()
        exchange = Exchange(4, 4, store)
        barrier = threading.Barrier(4)

        def worker(i):
            ring = build_ring(4, [], n_rings=4, index=i, store=store,
                              exchange=exchange, proof=writer.buffer())
            ring.assign_unit(encode_lit(2))
            barrier.wait()
            ring.publish_root_assignments()

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        writer.close()
        assert exchange.units.lits == [encode_lit(2)]
        records = list(parse_proof(sink.getvalue()))
        assert records.count(("a", (2,))) == 1


def test_import_attaches_clause_and_consumes_slot_ref():
    store, exchange, rings = two_rings(num_vars=6)
    r0, r1 = rings
    lits = tuple(encode_clause([1, 2, 3]))
    clause = store.allocate(lits, 1, True, NULL_BUFFER)
    exchange.export_clause(r0, lits, 1, clause)
    assert clause.refcount == 2
    outcome, conflict = exchange.try_import(r1)
    assert outcome == IMPORTED_CLAUSE
    assert conflict is None
    assert clause.refcount == 2  # slot unit moved into r1's watcher
    assert exchange.pools[0][1].slots[CLASS_GLUE1] is None
    assert any(w.clause is clause for w in r1.watches[lits[0]])


def test_import_subsumed_is_released():
    store, exchange, rings = two_rings(num_vars=6, clauses=[[1, 2, 3]])
    r0, r1 = rings
    lits = tuple(encode_clause([1, 2, 3]))
    dup = store.allocate(lits, 1, True, NULL_BUFFER)
    exchange.export_clause(r0, lits, 1, dup)
    assert dup.refcount == 2
    outcome, _ = exchange.try_import(r1)
    assert outcome == NO_IMPORT
    assert dup.refcount == 1  # identical clause already known: released


def test_import_falsified_clause_repairs_and_conflicts():
    store, exchange, rings = two_rings(num_vars=8)
    r0, r1 = rings
    lits = tuple(encode_clause([1, 2, 3]))
    clause = store.allocate(lits, 1, True, NULL_BUFFER)
    exchange.export_clause(r0, lits, 1, clause)
    # r1 falsifies all three literals across two levels
    r1.trail_lim.append(len(r1.trail))
    r1.assign(encode_lit(-1), None)
    r1.assign(encode_lit(-2), encode_lit(1))
    r1.trail_lim.append(len(r1.trail))
    r1.assign(encode_lit(-3), None)
    r1.trail_lim.append(len(r1.trail))
    r1.assign(encode_lit(-4), None)
    outcome, conflict = exchange.try_import(r1)
    assert outcome == IMPORTED_CLAUSE
    assert conflict is not None
    assert r1.current_level() == 2  # backjumped to the highest literal level
    verdict = r1.handle_conflict(conflict)
    assert verdict is None
    # the learned clause is RUP against the import plus current knowledge
    db = ClauseDB(8)
    db.add_clause(lits)
    learned_dimacs = None  # reconstructed from the new watcher or unit


def test_import_propagating_clause_backjumps_and_asserts():
    store, exchange, rings = two_rings(num_vars=8)
    r0, r1 = rings
    lits = tuple(encode_clause([1, 2, 3]))
    clause = store.allocate(lits, 1, True, NULL_BUFFER)
    exchange.export_clause(r0, lits, 1, clause)
    r1.trail_lim.append(len(r1.trail))
    r1.assign(encode_lit(-1), None)
    r1.trail_lim.append(len(r1.trail))
    r1.assign(encode_lit(-2), None)
    r1.trail_lim.append(len(r1.trail))
    r1.assign(encode_lit(-4), None)  # unrelated deeper level
    outcome, conflict = exchange.try_import(r1)
    assert outcome == IMPORTED_CLAUSE
    assert conflict is None
    # should have propagated 3 at level 2 and backjumped there
    assert r1.current_level() == 2
    assert r1.values[encode_lit(3)] == 1
    assert r1.levels[3] == 2


def test_import_binary_goes_to_local_lists():
    store, exchange, rings = two_rings(num_vars=6)
    r0, r1 = rings
    lits = encode_clause([4, 5])
    r0.proof.trace_add(lits)
    exchange.export_clause(r0, lits, 1, None)
    outcome, conflict = exchange.try_import(r1)
    assert outcome == IMPORTED_CLAUSE
    assert conflict is None
    a, b = lits
    assert b in r1.local_bin[a] and a in r1.local_bin[b]
    assert b not in r1.shared_bin[a]


def test_import_eliminated_variable_discarded():
    store, exchange, rings = two_rings(num_vars=6)
    r0, r1 = rings
    lits = tuple(encode_clause([1, 2, 3]))
    clause = store.allocate(lits, 1, True, NULL_BUFFER)
    exchange.export_clause(r0, lits, 1, clause)
    exchange.eliminated[2] = 1
    outcome, _ = exchange.try_import(r1)
    assert outcome == NO_IMPORT
    assert clause.refcount == 1


def test_winner_claim_single():
    flags = GlobalFlags()
    assert flags.claim_winner(3, VERDICT_SAT, [0])
    assert not flags.claim_winner(4, VERDICT_UNSAT)
    assert flags.winner == 3
    assert flags.verdict == VERDICT_SAT
    assert flags.terminate


def test_unsat_winner_sets_inconsistent():
    flags = GlobalFlags()
    flags.claim_winner(0, VERDICT_UNSAT)
    assert flags.inconsistent


def test_winner_race_exactly_one():
    for _ in range(50):
        flags = GlobalFlags()
        winners = []
        barrier = threading.Barrier(6)
        lock = threading.Lock()

        def worker(i):
            barrier.wait()
            if flags.claim_winner(i, VERDICT_SAT, None):
                with lock:
                    winners.append(i)

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(6)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(winners) == 1
        assert flags.winner == winners[0]


def test_import_order_lowest_glue_first():
    store, exchange, rings = two_rings(num_vars=9)
    r0, r1 = rings
    tier2 = tuple(encode_clause([1, 2, 3, 4]))
    glue1 = tuple(encode_clause([5, 6, 7]))
    c_t2 = store.allocate(tier2, 4, True, NULL_BUFFER)
    c_g1 = store.allocate(glue1, 1, True, NULL_BUFFER)
    exchange.export_clause(r0, tier2, 4, c_t2)
    exchange.export_clause(r0, glue1, 1, c_g1)
    outcome, _ = exchange.try_import(r1)
    assert outcome == IMPORTED_CLAUSE
    # glue-1 slot drained first
    assert any(w.clause is c_g1 for w in r1.watches[glue1[0]])
    assert not any(w.clause is c_t2 for w in r1.watches[tier2[0]])
