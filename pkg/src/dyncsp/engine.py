"""Forward chaining of compiled rules with a justification trace.

Every rule application is recorded as a firing that remembers which
justifications held its conditions and which masks it created, so any
narrowing can later be undone or explained. Propagation stops at the
first variable that loses its last value and reports the conflict as the
set of constraints and observations reachable through the justification
graph of that variable.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .core import (
    ACTIVE,
    Cause,
    ChangeRecord,
    ConditionLiteral,
    ConstraintId,
    Firing,
    FiringId,
    Network,
    Observation,
    ObservationId,
    PropagationRule,
    Value,
    VariableId,
    apply_observation_masks,
    cause_key,
    restrict,
)

FIXPOINT = "fixpoint"
CONFLICT = "conflict"


@dataclass(frozen=True)
class ConflictSet:
    """Constraints and observations that jointly support an empty domain."""

    constraints: frozenset[ConstraintId]
    observations: frozenset[ObservationId]


@dataclass
class PropagationOutcome:
    """What one propagation pass did."""

    status: str
    fired: list[FiringId] = field(default_factory=list)
    changed: list[tuple[VariableId, Value]] = field(default_factory=list)
    conflict: tuple[VariableId, ConflictSet] | None = None


def condition_holds(network: Network, lit: ConditionLiteral) -> bool:
    dom = network.domain(lit.variable)
    return dom.visible_count() == 1 and dom.is_visible(lit.value)


def _would_shrink(network: Network, rule: PropagationRule) -> bool:
    for var, vals in rule.conclusions:
        allowed = set(vals)
        if any(v not in allowed for v in network.domain(var).visible()):
            return True
    return False


def rule_applicable(network: Network, rule: PropagationRule) -> bool:
    """True iff firing the rule right now would be legal and useful."""
    if not network.constraints[rule.owner].active:
        return False
    if rule.id in network.active_firing:
        return False
    if not all(condition_holds(network, lit) for lit in rule.conditions):
        return False
    return _would_shrink(network, rule)


def _serialize_supports(
    supports: tuple[tuple[ConditionLiteral, frozenset[Cause]], ...]
) -> tuple:
    return tuple(
        (lit.variable, lit.value, tuple(sorted(causes, key=cause_key)))
        for lit, causes in supports
    )


def fire_rule(network: Network, rule: PropagationRule) -> ChangeRecord:
    """Apply one rule, recording the firing and its justifications.

    A call whose conclusions would not remove anything visible is a
    no-op: it returns an empty record and leaves no trace. A firing that
    does shrink something claims a justification on every value its
    conclusions exclude, even values another cause already hides, so its
    exclusions stay in force if that other cause is later released.
    """
    if rule.id in network.active_firing:
        raise ValueError(f"rule {rule.id!r} already has an active firing")
    for lit in rule.conditions:
        if not condition_holds(network, lit):
            raise ValueError(f"condition {lit.variable}={lit.value} of {rule.id!r} does not hold")
    if not _would_shrink(network, rule):
        return ChangeRecord()
    supports = []
    for lit in rule.conditions:
        causes: set[Cause] = set()
        for ctr in network.domain(lit.variable).mask.values():
            causes.update(ctr)
        supports.append((lit, frozenset(causes)))
    fid = network.next_firing_id
    network.next_firing_id += 1
    record = ChangeRecord()
    for var, vals in rule.conclusions:
        record.merge(restrict(network, var, vals, fid, claim_masked=True))
    firing = Firing(
        id=fid,
        rule=rule.id,
        supports=tuple(supports),
        effects=tuple(record.masked) + tuple(record.claimed),
        status=ACTIVE,
    )
    network.firings[fid] = firing
    network.active_firing[rule.id] = fid
    for lit in rule.conditions:
        network.watchers.setdefault(lit.variable, set()).add(fid)
    network.events.append(
        ("fire", fid, rule.id, _serialize_supports(firing.supports), firing.effects)
    )
    return record


def extract_conflict(network: Network, variable: VariableId) -> ConflictSet:
    """Constraints and observations behind the emptiness of ``variable``.

    Walks the current justifications of the masks on ``variable`` and,
    through each firing, of the masks holding that firing's conditions.
    """
    dom = network.domain(variable)
    if dom.visible_count() != 0:
        raise ValueError(f"variable {variable!r} is not empty")
    constraints: set[ConstraintId] = set()
    observations: set[ObservationId] = set()
    seen: set[FiringId] = set()
    stack: list[Cause] = []
    for value in dom.declared:
        stack.extend(dom.mask.get(value, ()))
    while stack:
        cause = stack.pop()
        if isinstance(cause, str):
            observations.add(cause)
            continue
        if cause in seen:
            continue
        seen.add(cause)
        firing = network.firings[cause]
        rule = network.rule(firing.rule)
        constraints.add(rule.owner)
        for lit in rule.conditions:
            cdom = network.domain(lit.variable)
            for value in cdom.declared:
                if value == lit.value:
                    continue
                ctr = cdom.mask.get(value)
                if ctr:
                    stack.extend(ctr)
    return ConflictSet(frozenset(constraints), frozenset(observations))


def _conflict_outcome(
    network: Network,
    variable: VariableId,
    fired: list[FiringId],
    changed: list[tuple[VariableId, Value]],
) -> PropagationOutcome:
    return PropagationOutcome(
        CONFLICT, fired, changed, (variable, extract_conflict(network, variable))
    )


def propagate(network: Network) -> PropagationOutcome:
    """Fire applicable rules to a fixpoint or to the first new empty domain.

    While some variable is already empty the network is frozen: the pass
    fires nothing and reports the standing conflict. Rules are taken in
    (constraint id, rule index) order, so runs are reproducible; a
    network built with an rng draws the next rule at random instead.
    """
    standing = network.first_empty()
    if standing is not None:
        return _conflict_outcome(network, standing, [], [])
    if network.rng is not None:
        return _propagate_shuffled(network)
    heap: list[tuple[ConstraintId, int]] = []
    queued: set[tuple[ConstraintId, int]] = set()

    def push(entry: tuple[ConstraintId, int]) -> None:
        if entry not in queued:
            queued.add(entry)
            heapq.heappush(heap, entry)

    for cid, constraint in network.constraints.items():
        if constraint.active:
            for rule in network.rules[cid]:
                push((cid, rule.index))
    fired: list[FiringId] = []
    changed: list[tuple[VariableId, Value]] = []
    exhausted: set[ConstraintId] = set()
    while heap:
        cid, index = heapq.heappop(heap)
        queued.discard((cid, index))
        if not network.constraints[cid].active or cid in exhausted:
            continue
        rule = network.rules[cid][index - 1]
        if not rule_applicable(network, rule):
            continue
        record = fire_rule(network, rule)
        fired.append(network.active_firing[rule.id])
        changed.extend(record.masked)
        if network.short_circuit:
            exhausted.add(cid)
        if record.emptied is not None:
            return _conflict_outcome(network, record.emptied, fired, changed)
        for var, _ in record.masked:
            for entry in network.rule_watch.get(var, ()):
                push(entry)
    return PropagationOutcome(FIXPOINT, fired, changed, None)


def _propagate_shuffled(network: Network) -> PropagationOutcome:
    fired: list[FiringId] = []
    changed: list[tuple[VariableId, Value]] = []
    exhausted: set[ConstraintId] = set()
    while True:
        candidates = []
        for cid in sorted(network.constraints):
            if not network.constraints[cid].active or cid in exhausted:
                continue
            for rule in network.rules[cid]:
                if rule_applicable(network, rule):
                    candidates.append(rule)
        if not candidates:
            return PropagationOutcome(FIXPOINT, fired, changed, None)
        rule = network.rng.choice(candidates)
        record = fire_rule(network, rule)
        fired.append(network.active_firing[rule.id])
        changed.extend(record.masked)
        if network.short_circuit:
            exhausted.add(rule.owner)
        if record.emptied is not None:
            return _conflict_outcome(network, record.emptied, fired, changed)


def assert_observation(network: Network, observation: Observation) -> PropagationOutcome:
    """Register an observation, pin its variable, and propagate.

    A pin that contradicts the current domain is itself the conflict; it
    is reported, not raised, and names every justification involved.
    """
    if observation.id in network.observations:
        raise ValueError(f"observation id {observation.id!r} already used")
    network.observations[observation.id] = observation
    network.events.append(
        ("observe", observation.id, observation.variable, observation.value)
    )
    record = apply_observation_masks(network, observation)
    standing = network.first_empty()
    if standing is not None:
        return _conflict_outcome(network, standing, [], list(record.masked))
    outcome = propagate(network)
    outcome.changed = list(record.masked) + outcome.changed
    return outcome
