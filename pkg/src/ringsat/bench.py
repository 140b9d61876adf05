"""Benchmark harness: run a corpus across thread counts, seeds, and proof
modes, recording solve and proof-check metrics as CSV rows."""

import csv
import os
import tempfile
import time
from typing import Dict, Iterable, List, Optional, Sequence

from .checker import check_proof
from .proof import MODE_OFF, MODE_SHARED, parse_proof
from .ruler import Options, solve_file

CSV_COLUMNS = ["instance", "threads", "seed", "mode", "verdict", "wall_ms",
               "proof_bytes", "adds", "deletes", "check_ms"]


def proof_line_counts(path, binary: bool = False):
    adds = deletes = 0
    for kind, _ in parse_proof(path, binary=binary):
        if kind == "a":
            adds += 1
        else:
            deletes += 1
    return adds, deletes


def run_one(path, threads: int, seed: int, mode: str,
            time_limit: Optional[float] = None, check: bool = True,
            keep_proof: Optional[str] = None, inprocessing: bool = True) -> Dict:
    """One solve (plus proof check for unsatisfiable verdicts)."""
    row = {"instance": os.path.basename(str(path)), "threads": threads,
           "seed": seed, "mode": mode, "verdict": "UNKNOWN", "wall_ms": 0,
           "proof_bytes": 0, "adds": 0, "deletes": 0, "check_ms": 0}
    proof_path = None
    tmp = None
    if mode != MODE_OFF:
        if keep_proof:
            proof_path = keep_proof
        else:
            fd, proof_path = tempfile.mkstemp(suffix=".drat")
            os.close(fd)
            tmp = proof_path
    try:
        opts = Options(threads=threads, seed=seed, proof_path=proof_path,
                       proof_mode=mode if proof_path else MODE_OFF,
                       time_limit=time_limit, inprocessing=inprocessing)
        t0 = time.monotonic()
        result = solve_file(path, opts)
        row["wall_ms"] = int(1000 * (time.monotonic() - t0))
        row["verdict"] = result.verdict
        if proof_path and os.path.exists(proof_path):
            row["proof_bytes"] = os.path.getsize(proof_path)
            adds, deletes = proof_line_counts(proof_path)
            row["adds"] = adds
            row["deletes"] = deletes
            if check and result.verdict == "UNSAT":
                t1 = time.monotonic()
                verdict = check_proof(path, proof_path)
                row["check_ms"] = int(1000 * (time.monotonic() - t1))
                if not verdict.ok:
                    row["verdict"] = "PROOF_REJECTED"
    finally:
        if tmp and os.path.exists(tmp):
            os.unlink(tmp)
    return row


def run_bench(instances: Sequence, thread_list: Iterable[int],
              seeds: Iterable[int], modes: Iterable[str],
              time_limit: Optional[float] = None, check: bool = True) -> List[Dict]:
    rows = []
    for path in instances:
        for threads in thread_list:
            for seed in seeds:
                for mode in modes:
                    rows.append(run_one(path, threads, seed, mode,
                                        time_limit=time_limit, check=check))
    return rows


def write_csv(rows: List[Dict], out):
    writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS)
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in CSV_COLUMNS})


def discover_instances(corpus_dir) -> List[str]:
    names = sorted(os.listdir(corpus_dir))
    return [os.path.join(corpus_dir, n) for n in names
            if n.endswith(".cnf") or n.endswith(".dimacs")]
