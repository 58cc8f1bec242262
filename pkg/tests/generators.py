"""Seeded random problem generators shared by the test modules.

Networks are combinational circuits: every gate's output is a distinct
variable driven by strictly earlier variables, so the structure is
acyclic and every generated network is satisfiable before observations.
"""

import random
from itertools import product

from dyncsp import GateDecl, NetworkSpec, ObservationDecl, VariableDecl

from oracles import BOOL, gate_rows

GATE_ARITY = {"and": 2, "or": 2, "not": 1, "xor": 2, "nand": 2, "nor": 2}


def random_network(seed, max_vars=8, max_gates=6, kinds=None):
    rng = random.Random(seed)
    kinds = list(kinds or GATE_ARITY)
    n_vars = rng.randint(3, max_vars)
    names = [f"V{i}" for i in range(1, n_vars + 1)]
    variables = tuple(VariableDecl(name, BOOL) for name in names)
    gates = []
    driven = set()
    for g in range(rng.randint(1, max_gates)):
        kind = rng.choice(kinds)
        arity = GATE_ARITY[kind]
        candidates = [i for i in range(arity, n_vars) if names[i] not in driven]
        if not candidates:
            break
        out = rng.choice(candidates)
        inputs = rng.sample(range(out), arity)
        driven.add(names[out])
        gates.append(
            GateDecl(
                f"G{g + 1}",
                kind,
                tuple(names[i] for i in inputs),
                names[out],
            )
        )
    return NetworkSpec(variables=variables, gates=tuple(gates))


def random_observations(seed, spec, max_count=None):
    rng = random.Random(seed)
    names = [v.name for v in spec.variables]
    limit = len(names) if max_count is None else min(max_count, len(names))
    count = rng.randint(0, limit)
    chosen = rng.sample(names, count)
    return tuple(
        ObservationDecl(f"M{i + 1}", var, rng.choice(BOOL))
        for i, var in enumerate(chosen)
    )


def random_table(seed, max_arity=4):
    """A random non-empty boolean relation as (scope, rows)."""
    rng = random.Random(seed)
    arity = rng.randint(1, max_arity)
    scope = tuple(f"V{i}" for i in range(1, arity + 1))
    universe = list(product(BOOL, repeat=arity))
    count = rng.randint(1, len(universe))
    rows = frozenset(rng.sample(universe, count))
    return scope, rows


def random_sequence(seed, spec, length=12):
    """A valid dynamic op sequence over ``spec`` with relax/restore pairs.

    Returns steps among ("assert", oid, var, value), ("retract", oid),
    ("relax", cid), ("restore", cid). After a relax the next step often
    restores the same constraint, so round trips are exercised.
    """
    rng = random.Random(seed)
    names = [v.name for v in spec.variables]
    cids = [g.id for g in spec.gates]
    active_obs = []
    relaxed = []
    steps = []
    next_obs = 1
    pending_restore = None
    while len(steps) < length:
        if pending_restore is not None:
            steps.append(("restore", pending_restore))
            relaxed.remove(pending_restore)
            pending_restore = None
            continue
        ops = ["assert"]
        if active_obs:
            ops.append("retract")
        if [c for c in cids if c not in relaxed]:
            ops.append("relax")
        if relaxed:
            ops.append("restore")
        op = rng.choice(ops)
        if op == "assert":
            oid = f"S{next_obs}"
            next_obs += 1
            steps.append(("assert", oid, rng.choice(names), rng.choice(BOOL)))
            active_obs.append(oid)
        elif op == "retract":
            oid = rng.choice(active_obs)
            active_obs.remove(oid)
            steps.append(("retract", oid))
        elif op == "relax":
            cid = rng.choice([c for c in cids if c not in relaxed])
            relaxed.append(cid)
            steps.append(("relax", cid))
            if rng.random() < 0.5:
                pending_restore = cid
        else:
            cid = rng.choice(relaxed)
            relaxed.remove(cid)
            steps.append(("restore", cid))
    return steps


def oracle_structures(spec):
    """(domains, constraints_by_id) for the oracle, no package involvement."""
    domains = {v.name: v.domain for v in spec.variables}
    constraints = {}
    for g in spec.gates:
        scope = (*g.inputs, g.output)
        constraints[g.id] = (scope, gate_rows(g.kind, len(g.inputs)))
    for t in spec.tables:
        constraints[t.id] = (t.scope, set(t.tuples))
    return domains, constraints
