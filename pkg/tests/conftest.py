"""Shared test helpers: instance generators, independent oracles, and small
builders for solver internals."""

import random

import pytest

from ringsat.clauses import ClauseStore
from ringsat.exchange import Exchange
from ringsat.formula import encode_clause, parse_dimacs
from ringsat.proof import NULL_BUFFER
from ringsat.ring import Ring, RingConfig


# -- instance generators -------------------------------------------------------

def random_ksat(num_vars, num_clauses, seed, k=3):
    """Uniform random k-SAT clause list in DIMACS integers."""
    rng = random.Random(seed)
    clauses = []
    for _ in range(num_clauses):
        vs = rng.sample(range(1, num_vars + 1), k)
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return clauses


def php_clauses(pigeons, holes):
    """Pigeonhole principle: pigeons into fewer holes, unsatisfiable when
    pigeons > holes."""
    def var(i, j):
        return (i - 1) * holes + j
    clauses = [[var(i, j) for j in range(1, holes + 1)]
               for i in range(1, pigeons + 1)]
    for j in range(1, holes + 1):
        for i1 in range(1, pigeons + 1):
            for i2 in range(i1 + 1, pigeons + 1):
                clauses.append([-var(i1, j), -var(i2, j)])
    return pigeons * holes, clauses


def dimacs_text(num_vars, clauses):
    lines = ["p cnf %d %d" % (num_vars, len(clauses))]
    for c in clauses:
        lines.append(" ".join(str(x) for x in c) + " 0")
    return "\n".join(lines) + "\n"


def formula_of(num_vars, clauses):
    return parse_dimacs(dimacs_text(num_vars, clauses))


# -- independent oracles ----------------------------------------------------------

def model_satisfies(clauses, model_lits):
    """Direct evaluation of DIMACS clauses under a model given as a list of
    signed integers (the solver's output format)."""
    true_set = set(model_lits)
    for clause in clauses:
        if not any(lit in true_set for lit in clause):
            return False
    return True


def propagate_oracle(clauses, assumed):
    """Naive O(n*m) unit-propagation fixpoint.

    clauses and assumed are DIMACS integers; returns (conflict, assigned set).
    When conflict is True the assigned set is meaningless.
    """
    assigned = {}
    for lit in assumed:
        v = abs(lit)
        want = lit > 0
        if assigned.get(v, want) != want:
            return True, set()
        assigned[v] = want

    def lit_value(lit):
        val = assigned.get(abs(lit))
        if val is None:
            return None
        return val == (lit > 0)

    changed = True
    while changed:
        changed = False
        for clause in clauses:
            unassigned = None
            n_unassigned = 0
            satisfied = False
            for lit in clause:
                val = lit_value(lit)
                if val is True:
                    satisfied = True
                    break
                if val is None:
                    unassigned = lit
                    n_unassigned += 1
            if satisfied:
                continue
            if n_unassigned == 0:
                return True, set()
            if n_unassigned == 1:
                assigned[abs(unassigned)] = unassigned > 0
                changed = True
    out = {v if val else -v for v, val in assigned.items()}
    return False, out


# -- solver-internal builders -------------------------------------------------------

def build_ring(num_vars, clauses, n_rings=1, index=0, seed=0, store=None,
               exchange=None, proof=NULL_BUFFER, mode="focused"):
    """A Ring wired to a fresh store/exchange with the given DIMACS clauses
    attached (no preprocessing, no ruler)."""
    store = store or ClauseStore()
    exchange = exchange or Exchange(n_rings, num_vars, store)
    shared_bin = [[] for _ in range(2 * num_vars + 2)]
    cfg = RingConfig(mode, 1, False, seed)
    ring = Ring(index, num_vars, store, exchange, proof, cfg, shared_bin)
    for clause in clauses:
        codes = encode_clause(clause, num_vars)
        if len(codes) == 1:
            ring.assign_unit(codes[0])
        elif len(codes) == 2:
            a, b = codes
            shared_bin[a].append(b)
            shared_bin[b].append(a)
        else:
            obj = store.allocate(codes, 0, False, proof, trace=False)
            ring.attach_clause(obj, acquire=False)
    ring.published_idx = len(ring.trail)
    return ring


@pytest.fixture
def tmp_cnf(tmp_path):
    def _write(num_vars, clauses, name="instance.cnf"):
        path = tmp_path / name
        path.write_text(dimacs_text(num_vars, clauses))
        return str(path)
    return _write
