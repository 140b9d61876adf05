"""Cooperative single-file DRAT/DRUP trace shared by all solver threads.

Every thread owns a ProofBuffer that accumulates complete proof lines and
flushes them to the shared writer in one locked call, so the file is always a
concatenation of whole lines no matter how threads interleave.

Two flush points are load-bearing for proof validity, not just performance:

  * a buffer is flushed before its owner publishes a clause or unit to other
    threads, so any line another thread later derives from it lands behind it
    in the file;
  * a buffer is flushed before its owner releases clause references in bulk
    (database reduction, barrier entry, shutdown), so a deletion emitted by
    whichever thread observes the final release can never overtake a line
    that still needed the clause.

Modes: "shared" writes each clause once and deletes it once when its global
reference count hits zero; "fakecopy" additionally re-adds a clause whenever
a thread imports it and deletes per thread-local drop, mimicking the traces
of solvers that copy clauses around; "off" disables tracing.
"""

import threading
from typing import Iterator, List, Optional, Tuple

from .formula import decode_lit

MODE_SHARED = "shared"
MODE_FAKECOPY = "fakecopy"
MODE_OFF = "off"

FLUSH_LIMIT = 64 * 1024


def _binary_record(tag: bytes, codes) -> bytes:
    out = bytearray(tag)
    for c in codes:
        # literal codes are already 2*var + sign, the binary DRAT mapping
        u = c
        while u >= 0x80:
            out.append((u & 0x7F) | 0x80)
            u >>= 7
        out.append(u)
    out.append(0)
    return bytes(out)


class ProofWriter:
    """Owns the output file and the lock serializing whole-buffer writes."""

    def __init__(self, path_or_file, binary: bool = False, mode: str = MODE_SHARED):
        if mode not in (MODE_SHARED, MODE_FAKECOPY):
            raise ValueError("unsupported proof mode %r" % mode)
        self.binary = binary
        self.mode = mode
        self._lock = threading.Lock()
        self._buffers: List["ProofBuffer"] = []
        self.complete = False
        self.closed = False
        if hasattr(path_or_file, "write"):
            self._file = path_or_file
            self._owns_file = False
        else:
            self._file = open(path_or_file, "wb")
            self._owns_file = True

    def buffer(self) -> "ProofBuffer":
        buf = ProofBuffer(self)
        with self._lock:
            self._buffers.append(buf)
        return buf

    def write_chunk(self, chunk: bytes):
        if not chunk:
            return
        with self._lock:
            if self.closed:
                raise RuntimeError("proof file already closed")
            self._file.write(chunk)

    def close(self):
        if self.closed:
            return
        for buf in list(self._buffers):
            buf.flush()
        with self._lock:
            self.closed = True
            self._file.flush()
            if self._owns_file:
                self._file.close()


class ProofBuffer:
    """Thread-local staging area for complete proof lines.

    With no writer attached every call is a no-op, which is how proof mode
    "off" is implemented without branching at call sites.
    """

    __slots__ = ("writer", "_data", "mode", "binary")

    def __init__(self, writer: Optional[ProofWriter]):
        self.writer = writer
        self.mode = writer.mode if writer else MODE_OFF
        self.binary = writer.binary if writer else False
        self._data = bytearray()

    def _emit(self, tag_ascii: bytes, tag_bin: bytes, codes):
        if self.binary:
            self._data += _binary_record(tag_bin, codes)
        else:
            if tag_ascii:
                self._data += tag_ascii
            for c in codes:
                self._data += str(decode_lit(c)).encode()
                self._data += b" "
            self._data += b"0\n"
        if len(self._data) >= FLUSH_LIMIT:
            self.flush()

    def trace_add(self, codes):
        """One addition line; flush before the clause escapes this thread."""
        if self.writer is None:
            return
        self._emit(b"", b"a", codes)
        if not codes:
            self.writer.complete = True
            self.flush()

    def trace_delete(self, codes):
        if self.writer is None:
            return
        self._emit(b"d ", b"d", codes)

    def trace_import(self, codes):
        """Fake-copy duplicate addition; a program bug if called in shared mode."""
        if self.writer is None:
            return
        assert self.mode == MODE_FAKECOPY, "trace_import is fake-copy only"
        self._emit(b"", b"a", codes)

    def flush(self):
        if self.writer is None or not self._data:
            return
        chunk = bytes(self._data)
        del self._data[:]
        self.writer.write_chunk(chunk)


NULL_BUFFER = ProofBuffer(None)


def open_proof(path, binary: bool = False, mode: str = MODE_SHARED) -> Optional[ProofWriter]:
    """Open a proof file for writing; returns None for mode 'off' or no path."""
    if mode == MODE_OFF or path is None:
        return None
    return ProofWriter(path, binary=binary, mode=mode)


def parse_proof(data, binary: bool = False) -> Iterator[Tuple[str, Tuple[int, ...]]]:
    """Yield ('a'|'d', dimacs literal tuple) records from a proof file or bytes."""
    if hasattr(data, "read"):
        data = data.read()
    elif isinstance(data, str):
        with open(data, "rb") as handle:
            data = handle.read()
    if binary:
        yield from _parse_binary(data)
    else:
        yield from _parse_ascii(data)


def _parse_ascii(data: bytes) -> Iterator[Tuple[str, Tuple[int, ...]]]:
    for raw in data.split(b"\n"):
        line = raw.strip()
        if not line or line.startswith(b"c"):
            continue
        kind = "a"
        if line.startswith(b"d"):
            kind = "d"
            line = line[1:]
        lits = [int(tok) for tok in line.split()]
        if not lits or lits[-1] != 0:
            raise ValueError("proof line without 0 terminator: %r" % raw)
        yield kind, tuple(lits[:-1])


def _parse_binary(data: bytes) -> Iterator[Tuple[str, Tuple[int, ...]]]:
    pos = 0
    n = len(data)
    while pos < n:
        tag = data[pos]
        pos += 1
        if tag == 0x61:
            kind = "a"
        elif tag == 0x64:
            kind = "d"
        else:
            raise ValueError("bad binary proof tag 0x%02x at offset %d" % (tag, pos - 1))
        lits = []
        while True:
            if pos >= n:
                raise ValueError("truncated binary proof record")
            u = 0
            shift = 0
            while True:
                b = data[pos]
                pos += 1
                u |= (b & 0x7F) << shift
                if b < 0x80:
                    break
                shift += 7
            if u == 0:
                break
            lits.append(decode_lit(u))
        yield kind, tuple(lits)
