"""Diagnosis of inconsistent networks by relaxing constraints.

A diagnosis is a minimal set of relaxable constraints whose removal
makes the network consistent with all active observations. The search
walks the tree of conflict sets depth first: every conflict must lose at
least one member, so branching on the relaxable constraints of the
current conflict reaches every minimal diagnosis within the cardinality
bound. Each probe reuses the incremental relax/restore machinery; the
network is snapshotted first and rolled back afterwards, so diagnosis is
observationally pure.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import ConstraintId, Network
from .dynamics import relax, restore
from .engine import CONFLICT, ConflictSet, propagate


@dataclass(frozen=True)
class Diagnosis:
    constraints: frozenset[ConstraintId]
    cardinality: int


def check_consistent(network: Network) -> tuple[bool, ConflictSet | None]:
    """Propagate and report whether the network reached a fixpoint."""
    outcome = propagate(network)
    if outcome.status == CONFLICT:
        return False, outcome.conflict[1]
    return True, None


def diagnose(network: Network, max_cardinality: int) -> list[Diagnosis]:
    """All minimal diagnoses of cardinality up to ``max_cardinality``.

    A consistent network has the single empty diagnosis. Results are
    sorted by cardinality, then by constraint ids.
    """
    if max_cardinality < 1:
        raise ValueError("max_cardinality must be at least 1")
    snapshot = network.snapshot()
    found: list[frozenset[ConstraintId]] = []
    visited: set[frozenset[ConstraintId]] = set()

    def explore(relaxed: frozenset[ConstraintId]) -> None:
        if relaxed in visited:
            return
        visited.add(relaxed)
        if any(d <= relaxed for d in found):
            return
        consistent, conflict = check_consistent(network)
        if consistent:
            found.append(relaxed)
            return
        if len(relaxed) >= max_cardinality:
            return
        candidates = sorted(
            cid
            for cid in conflict.constraints
            if network.constraints[cid].relaxable and cid not in relaxed
        )
        for cid in candidates:
            relax(network, cid)
            explore(relaxed | {cid})
            restore(network, cid)

    try:
        consistent, _ = check_consistent(network)
        if consistent:
            return [Diagnosis(frozenset(), 0)]
        explore(frozenset())
    finally:
        network.rollback(snapshot)
    minimal = [s for s in found if not any(o < s for o in found)]
    minimal.sort(key=lambda s: (len(s), sorted(s)))
    return [Diagnosis(s, len(s)) for s in minimal]
