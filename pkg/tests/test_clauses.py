import io
import threading

import pytest

from ringsat.clauses import (CLASS_BINARY, CLASS_GLUE1, CLASS_GLUE2,
                             CLASS_TIER2, ClauseStore, classify)
from ringsat.proof import NULL_BUFFER, ProofWriter, parse_proof


def shared_writer():
    sink = io.BytesIO()
    return ProofWriter(sink, binary=False, mode="shared"), sink


def test_classify_table():
    assert classify(2, 1) == CLASS_BINARY
    assert classify(2, 2) == CLASS_BINARY
    assert classify(5, 1) == CLASS_GLUE1
    assert classify(3, 2) == CLASS_GLUE2
    assert classify(5, 4) == CLASS_TIER2
    assert classify(4, 3) == CLASS_TIER2
    assert classify(10, 6) == CLASS_TIER2
    assert classify(9, 7) is None
    assert classify(40, 12) is None


def test_allocate_traces_addition():
    writer, sink = shared_writer()
    store = ClauseStore()
    buf = writer.buffer()
    clause = store.allocate((2, 4, 6), 2, True, buf)
    assert clause.refcount == 1
    assert clause.lits == (2, 4, 6)
    writer.close()
    assert sink.getvalue() == b"1 2 3 0\n"


def test_ids_monotonic():
    store = ClauseStore()
    a = store.allocate((2, 4, 6), 1, True, NULL_BUFFER)
    b = store.allocate((2, 4, 8), 1, True, NULL_BUFFER)
    assert b.id > a.id


def test_allocate_release_matching_proof_lines():
    writer, sink = shared_writer()
    store = ClauseStore()
    buf = writer.buffer()
    clause = store.allocate((2, 5, 9), 3, True, buf)
    store.release(clause, buf)
    writer.close()
    records = list(parse_proof(sink.getvalue()))
    assert records == [("a", (1, -2, -4)), ("d", (1, -2, -4))]


def test_acquire_release_net_zero():
    store = ClauseStore()
    clause = store.allocate((2, 4, 6), 1, True, NULL_BUFFER)
    store.acquire(clause)
    assert clause.refcount == 2
    store.release(clause, NULL_BUFFER)
    assert clause.refcount == 1
    assert store.live_clauses == 1


def test_release_to_zero_frees_and_traces_once():
    writer, sink = shared_writer()
    store = ClauseStore()
    buf = writer.buffer()
    clause = store.allocate((2, 4, 6), 1, True, buf)
    store.acquire(clause)
    store.release(clause, buf)
    assert b"d" not in sink.getvalue()  # refcount 2 -> 1: no deletion
    store.release(clause, buf)
    writer.close()
    deletes = [r for r in parse_proof(sink.getvalue()) if r[0] == "d"]
    assert len(deletes) == 1
    assert store.live_clauses == 0


def test_concurrent_acquires_exact_count():
    store = ClauseStore()
    clause = store.allocate((2, 4, 6), 1, True, NULL_BUFFER)
    n_threads = 8
    per_thread = 200
    barrier = threading.Barrier(n_threads)

    def worker():
        barrier.wait()
        for _ in range(per_thread):
            store.acquire(clause)

    threads = [threading.Thread(target=worker) for _ in range(n_threads)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert clause.refcount == 1 + n_threads * per_thread


def test_racing_releases_single_deletion():
    for _ in range(50):
        writer, sink = shared_writer()
        store = ClauseStore()
        n_threads = 4
        buf_main = writer.buffer()
        clause = store.allocate((2, 4, 6), 1, True, buf_main)
        for _ in range(n_threads - 1):
            store.acquire(clause)
        barrier = threading.Barrier(n_threads)

        def worker():
            buf = writer.buffer()
            barrier.wait()
            store.release(clause, buf)
            buf.flush()

        threads = [threading.Thread(target=worker) for _ in range(n_threads)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        writer.close()
        deletes = [r for r in parse_proof(sink.getvalue()) if r[0] == "d"]
        assert len(deletes) == 1
        assert store.live_clauses == 0


def test_literal_bytes_accounting():
    store = ClauseStore()
    a = store.allocate((2, 4, 6), 1, True, NULL_BUFFER)
    assert store.literal_bytes > 0
    before = store.literal_bytes
    b = store.allocate((2, 4, 8, 10), 1, True, NULL_BUFFER)
    assert store.literal_bytes > before
    store.release(a, NULL_BUFFER)
    store.release(b, NULL_BUFFER)
    assert store.literal_bytes == 0
    assert store.peak_literal_bytes > 0
