"""Core vocabulary for dynamic constraint networks.

A network owns variables with immutable declared domains, extensional
constraints with their compiled propagation rules, observations, and a
firing trace. Runtime narrowing never deletes a value: it masks the value
under one or more justifications (firing ids or observation ids), so every
removal is reversible and attributable. Every mutation appends to an event
log; replaying the log against a fresh structural copy reproduces the
state exactly.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

Value = str
VariableId = str
ConstraintId = str
RuleId = str
ObservationId = str
FiringId = int

# A justification is either a firing id (int) or an observation id (str).
Cause = int | str

BOOL_DOMAIN: tuple[Value, Value] = ("false", "true")

ACTIVE = "active"
CANCELLED = "cancelled"


def cause_key(cause: Cause) -> tuple[bool, Cause]:
    """Sort key that keeps mixed firing/observation causes orderable."""
    return (isinstance(cause, str), cause)


class ConditionLiteral(NamedTuple):
    """An instantiation test: holds iff the visible domain is exactly {value}."""

    variable: VariableId
    value: Value


@dataclass
class FiniteDomain:
    """Declared values of one variable plus the masks hiding some of them.

    A value is visible iff it has no entry in ``mask``. The declared tuple
    never changes; all narrowing happens through masks, each counted per
    justification so independent causes can hide the same value.
    """

    variable: VariableId
    declared: tuple[Value, ...]
    mask: dict[Value, Counter] = field(default_factory=dict)

    def visible(self) -> tuple[Value, ...]:
        return tuple(v for v in self.declared if v not in self.mask)

    def is_visible(self, value: Value) -> bool:
        return value not in self.mask

    def visible_count(self) -> int:
        return len(self.declared) - len(self.mask)


@dataclass
class ExtensionalConstraint:
    """An n-ary relation listed by its allowed tuples."""

    id: ConstraintId
    label: str
    scope: tuple[VariableId, ...]
    allowed: frozenset[tuple[Value, ...]]
    active: bool = True
    relaxable: bool = True


@dataclass(frozen=True)
class PropagationRule:
    """A ground rule compiled from one constraint.

    When every condition variable is instantiated to its condition value,
    each conclusion variable may keep only the listed values. ``index`` is
    the 1-based position in the owner's canonical rule order.
    """

    id: RuleId
    owner: ConstraintId
    index: int
    conditions: tuple[ConditionLiteral, ...]
    conclusions: tuple[tuple[VariableId, tuple[Value, ...]], ...]


@dataclass(frozen=True)
class RuleSet:
    """The canonically ordered rules compiled for one constraint."""

    owner: ConstraintId
    rules: tuple[PropagationRule, ...]


@dataclass
class Observation:
    """A measured instantiation of one variable."""

    id: ObservationId
    variable: VariableId
    value: Value
    active: bool = True


@dataclass
class Firing:
    """The trace record of one rule application.

    ``supports`` snapshots, per condition literal, the justifications that
    held the instantiation at firing time. ``effects`` lists every
    (variable, value) exclusion this firing justifies, including values
    that were already hidden by another cause when it fired; cancelling
    the firing releases them all.
    """

    id: FiringId
    rule: RuleId
    supports: tuple[tuple[ConditionLiteral, frozenset[Cause]], ...]
    effects: tuple[tuple[VariableId, Value], ...]
    status: str = ACTIVE


@dataclass
class ChangeRecord:
    """Accumulated effects of one mutating operation."""

    masked: list[tuple[VariableId, Value]] = field(default_factory=list)
    claimed: list[tuple[VariableId, Value]] = field(default_factory=list)
    released: list[tuple[VariableId, Value]] = field(default_factory=list)
    cancelled: list[FiringId] = field(default_factory=list)
    emptied: VariableId | None = None

    def merge(self, other: "ChangeRecord") -> "ChangeRecord":
        self.masked.extend(other.masked)
        self.claimed.extend(other.claimed)
        self.released.extend(other.released)
        self.cancelled.extend(other.cancelled)
        if self.emptied is None:
            self.emptied = other.emptied
        return self

    def __bool__(self) -> bool:
        return bool(self.masked or self.released or self.cancelled)


@dataclass
class _Snapshot:
    masks: dict
    firing_status: dict
    active_firing: dict
    watchers: dict
    empty_order: list
    observation_ids: set
    observation_active: dict
    constraint_active: dict
    event_count: int
    next_firing_id: int


class Network:
    """A constraint network under single-writer mutation.

    ``short_circuit`` makes one propagation pass fire at most one rule per
    constraint; ``rng`` switches rule selection to a randomized order (a
    test mode for exercising confluence).
    """

    def __init__(self, *, short_circuit: bool = False, rng=None):
        self.domains: dict[VariableId, FiniteDomain] = {}
        self.constraints: dict[ConstraintId, ExtensionalConstraint] = {}
        self.rules: dict[ConstraintId, tuple[PropagationRule, ...]] = {}
        self.rule_index: dict[RuleId, PropagationRule] = {}
        self.rule_watch: dict[VariableId, list[tuple[ConstraintId, int]]] = {}
        self.observations: dict[ObservationId, Observation] = {}
        self.firings: dict[FiringId, Firing] = {}
        self.active_firing: dict[RuleId, FiringId] = {}
        self.watchers: dict[VariableId, set[FiringId]] = {}
        self.empty_order: list[VariableId] = []
        self.events: list[tuple] = []
        self.next_firing_id: FiringId = 1
        self.short_circuit = short_circuit
        self.rng = rng

    def add_variable(self, name: VariableId, declared: Iterable[Value] = BOOL_DOMAIN) -> FiniteDomain:
        if name in self.domains:
            raise ValueError(f"variable {name!r} already declared")
        values = tuple(declared)
        if not values:
            raise ValueError(f"variable {name!r} needs a non-empty domain")
        if len(set(values)) != len(values):
            raise ValueError(f"variable {name!r} has duplicate domain values")
        dom = FiniteDomain(name, values)
        self.domains[name] = dom
        return dom

    def add_constraint(self, constraint: ExtensionalConstraint, ruleset: RuleSet) -> None:
        cid = constraint.id
        if cid in self.constraints:
            raise ValueError(f"constraint {cid!r} already declared")
        if ruleset.owner != cid:
            raise ValueError(f"rule set for {ruleset.owner!r} attached to {cid!r}")
        scope = constraint.scope
        if len(set(scope)) != len(scope):
            raise ValueError(f"constraint {cid!r} repeats a scope variable")
        for var in scope:
            if var not in self.domains:
                raise ValueError(f"constraint {cid!r} uses undeclared variable {var!r}")
        if not constraint.allowed:
            raise ValueError(f"constraint {cid!r} allows no tuples")
        for tup in constraint.allowed:
            if len(tup) != len(scope):
                raise ValueError(f"constraint {cid!r} has a tuple of wrong arity: {tup!r}")
            for var, value in zip(scope, tup):
                if value not in self.domains[var].declared:
                    raise ValueError(
                        f"constraint {cid!r} tuple value {value!r} is outside the domain of {var!r}"
                    )
        self.constraints[cid] = constraint
        self.rules[cid] = ruleset.rules
        for rule in ruleset.rules:
            if rule.id in self.rule_index:
                raise ValueError(f"rule id {rule.id!r} already registered")
            self.rule_index[rule.id] = rule
            for lit in rule.conditions:
                self.rule_watch.setdefault(lit.variable, []).append((cid, rule.index))

    def domain(self, variable: VariableId) -> FiniteDomain:
        dom = self.domains.get(variable)
        if dom is None:
            raise ValueError(f"unknown variable {variable!r}")
        return dom

    def constraint(self, constraint_id: ConstraintId) -> ExtensionalConstraint:
        constraint = self.constraints.get(constraint_id)
        if constraint is None:
            raise ValueError(f"unknown constraint {constraint_id!r}")
        return constraint

    def rule(self, rule_id: RuleId) -> PropagationRule:
        rule = self.rule_index.get(rule_id)
        if rule is None:
            raise ValueError(f"unknown rule {rule_id!r}")
        return rule

    def first_empty(self) -> VariableId | None:
        return self.empty_order[0] if self.empty_order else None

    def visible_state(self) -> dict[VariableId, tuple[Value, ...]]:
        return {name: dom.visible() for name, dom in self.domains.items()}

    def snapshot(self) -> _Snapshot:
        """Capture everything mutable so a later rollback is exact."""
        return _Snapshot(
            masks={
                name: {value: ctr.copy() for value, ctr in dom.mask.items()}
                for name, dom in self.domains.items()
            },
            firing_status={fid: f.status for fid, f in self.firings.items()},
            active_firing=dict(self.active_firing),
            watchers={var: set(fids) for var, fids in self.watchers.items()},
            empty_order=list(self.empty_order),
            observation_ids=set(self.observations),
            observation_active={oid: obs.active for oid, obs in self.observations.items()},
            constraint_active={cid: c.active for cid, c in self.constraints.items()},
            event_count=len(self.events),
            next_firing_id=self.next_firing_id,
        )

    def rollback(self, snap: _Snapshot) -> None:
        """Restore the state captured by :meth:`snapshot`."""
        for name, dom in self.domains.items():
            dom.mask = {value: ctr.copy() for value, ctr in snap.masks[name].items()}
        for fid in [f for f in self.firings if f >= snap.next_firing_id]:
            del self.firings[fid]
        for fid, status in snap.firing_status.items():
            self.firings[fid].status = status
        self.active_firing = dict(snap.active_firing)
        self.watchers = {var: set(fids) for var, fids in snap.watchers.items()}
        self.empty_order = list(snap.empty_order)
        for oid in [o for o in self.observations if o not in snap.observation_ids]:
            del self.observations[oid]
        for oid, flag in snap.observation_active.items():
            self.observations[oid].active = flag
        for cid, flag in snap.constraint_active.items():
            self.constraints[cid].active = flag
        del self.events[snap.event_count:]
        self.next_firing_id = snap.next_firing_id


def mask_value(network: Network, variable: VariableId, value: Value, cause: Cause) -> bool:
    """Add one justification hiding ``value``; True if it was visible before."""
    dom = network.domain(variable)
    if value not in dom.declared:
        raise ValueError(f"value {value!r} is outside the domain of {variable!r}")
    newly = value not in dom.mask
    dom.mask.setdefault(value, Counter())[cause] += 1
    network.events.append(("mask", variable, value, cause))
    if newly and dom.visible_count() == 0:
        network.empty_order.append(variable)
        network.events.append(("conflict", variable))
    return newly


def release(network: Network, variable: VariableId, value: Value, cause: Cause) -> bool:
    """Remove one justification added by ``cause``; True if the value became visible."""
    dom = network.domain(variable)
    ctr = dom.mask.get(value)
    if ctr is None or ctr[cause] <= 0:
        raise ValueError(f"no mask on {variable}={value} is justified by {cause!r}")
    network.events.append(("release", variable, value, cause))
    ctr[cause] -= 1
    if ctr[cause] == 0:
        del ctr[cause]
    if ctr:
        return False
    del dom.mask[value]
    if dom.visible_count() == 1 and variable in network.empty_order:
        network.empty_order.remove(variable)
    return True


def restrict(
    network: Network,
    variable: VariableId,
    allowed: Iterable[Value],
    cause: Cause,
    *,
    claim_masked: bool = False,
) -> ChangeRecord:
    """Mask every visible value of ``variable`` outside ``allowed``.

    Returns the masks added; ``emptied`` is set when the visible domain
    became empty (a signal for the caller, never an exception). A call
    that changes nothing produces an empty record and no event.

    With ``claim_masked`` the cause is also added to excluded values that
    are already hidden (reported in ``claimed``), so the exclusion
    survives the release of whichever cause hid them first.
    """
    dom = network.domain(variable)
    keep = frozenset(allowed)
    for value in keep:
        if value not in dom.declared:
            raise ValueError(f"value {value!r} is outside the domain of {variable!r}")
    record = ChangeRecord()
    for value in dom.declared:
        if value in keep:
            continue
        if dom.is_visible(value):
            mask_value(network, variable, value, cause)
            record.masked.append((variable, value))
        elif claim_masked:
            mask_value(network, variable, value, cause)
            record.claimed.append((variable, value))
    if record.masked and dom.visible_count() == 0:
        record.emptied = variable
    return record


def is_instantiated(network: Network, variable: VariableId, value: Value) -> bool:
    dom = network.domain(variable)
    return dom.visible_count() == 1 and dom.is_visible(value)


def visible_values(network: Network, variable: VariableId) -> tuple[Value, ...]:
    return network.domain(variable).visible()


def apply_observation_masks(network: Network, observation: Observation) -> ChangeRecord:
    """Pin a variable: mask every declared value other than the observed one.

    Masks are added even to values other causes already hide, so the pin
    stays in force if those causes are later cancelled.
    """
    dom = network.domain(observation.variable)
    if observation.value not in dom.declared:
        raise ValueError(
            f"value {observation.value!r} is outside the domain of {observation.variable!r}"
        )
    record = ChangeRecord()
    for value in dom.declared:
        if value != observation.value:
            if mask_value(network, observation.variable, value, observation.id):
                record.masked.append((observation.variable, value))
    if record.masked and dom.visible_count() == 0:
        record.emptied = observation.variable
    return record


def release_observation_masks(network: Network, observation: Observation) -> ChangeRecord:
    """Remove the justifications added by :func:`apply_observation_masks`."""
    dom = network.domain(observation.variable)
    record = ChangeRecord()
    for value in dom.declared:
        if value != observation.value:
            if release(network, observation.variable, value, observation.id):
                record.released.append((observation.variable, value))
    return record
