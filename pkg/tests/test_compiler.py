from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyncsp import (
    ConditionLiteral,
    ExtensionalConstraint,
    PropagationRule,
    closure,
    dump_rules,
    format_rule,
    gate_table,
    generate,
    projection,
    verify_rules,
)

from generators import random_table
from oracles import BOOL, brute_projection

DECL3 = {"V1": BOOL, "V2": BOOL, "V3": BOOL}

AND_DUMP = """\
R1: IF V1=false THEN V3 in {false}
R2: IF V2=false THEN V3 in {false}
R3: IF V3=true THEN V1 in {true}; V2 in {true}
R4: IF V1=true AND V2=true THEN V3 in {true}
R5: IF V1=true AND V3=false THEN V2 in {false}
R6: IF V2=true AND V3=false THEN V1 in {false}"""

OR_DUMP = """\
R1: IF V1=true THEN V3 in {true}
R2: IF V2=true THEN V3 in {true}
R3: IF V3=false THEN V1 in {false}; V2 in {false}
R4: IF V1=false AND V2=false THEN V3 in {false}
R5: IF V1=false AND V3=true THEN V2 in {true}
R6: IF V2=false AND V3=true THEN V1 in {true}"""


def and_constraint():
    return ExtensionalConstraint("C_and", "and", ("V1", "V2", "V3"), gate_table("and", 2))


def or_constraint():
    return ExtensionalConstraint("C_or", "or", ("V1", "V2", "V3"), gate_table("or", 2))


def table_constraint(cid, scope, rows):
    return ExtensionalConstraint(cid, cid, scope, frozenset(rows))


def test_and_gate_rules_are_the_canonical_six():
    rules = generate(and_constraint(), DECL3).rules
    assert dump_rules(rules) == AND_DUMP
    assert [r.id for r in rules] == [f"C_and.R{i}" for i in range(1, 7)]
    assert [r.index for r in rules] == list(range(1, 7))


def test_or_gate_rules_are_the_canonical_six():
    rules = generate(or_constraint(), DECL3).rules
    assert dump_rules(rules) == OR_DUMP


def test_gate_rule_counts():
    decl2 = {"V1": BOOL, "V3": BOOL}
    c_not = ExtensionalConstraint("C_not", "not", ("V1", "V3"), gate_table("not", 1))
    assert len(generate(c_not, decl2).rules) == 4
    c_xor = ExtensionalConstraint("C_xor", "xor", ("V1", "V2", "V3"), gate_table("xor", 2))
    xor_rules = generate(c_xor, DECL3).rules
    assert len(xor_rules) == 12
    assert all(len(r.conditions) == 2 for r in xor_rules)


def test_universal_constraint_compiles_to_no_rules():
    c = table_constraint("U", ("V1", "V2"), set(product(BOOL, repeat=2)))
    assert generate(c, {"V1": BOOL, "V2": BOOL}).rules == ()


def test_forced_column_yields_unconditional_rule():
    c = table_constraint("F", ("A", "B"), {("false", "true"), ("true", "true")})
    rules = generate(c, {"A": BOOL, "B": BOOL}).rules
    assert len(rules) == 1
    assert rules[0].conditions == ()
    assert format_rule(rules[0]) == "R1: ALWAYS B in {true}"
    result = closure(rules, {}, {"A": BOOL, "B": BOOL})
    assert result["B"] == frozenset({"true"})
    assert verify_rules(rules, c, {"A": BOOL, "B": BOOL}).passed


def test_projection_matches_brute_force():
    c = or_constraint()
    for assignment in ({}, {"V1": "true"}, {"V3": "false"}, {"V1": "false", "V2": "false"}):
        for target in ("V1", "V2", "V3"):
            if target in assignment:
                continue
            expected = brute_projection(c.scope, c.allowed, assignment, target)
            assert projection(c, assignment, target) == expected


def test_projection_rejects_bad_targets():
    c = or_constraint()
    with pytest.raises(ValueError):
        projection(c, {"V1": "true"}, "V1")
    with pytest.raises(ValueError):
        projection(c, {}, "Z")
    with pytest.raises(ValueError):
        projection(c, {"Z": "true"}, "V1")


def test_closure_drives_forbidden_assignment_empty():
    rules = generate(and_constraint(), DECL3).rules
    result = closure(rules, {"V1": "false", "V2": "false", "V3": "true"}, DECL3)
    assert any(not values for values in result.values())


def test_verify_passes_for_all_generated_gates():
    for kind, arity in (("and", 2), ("or", 2), ("xor", 2), ("nand", 2), ("nor", 2), ("not", 1)):
        scope = tuple(f"V{i}" for i in range(1, arity + 2))
        decl = {v: BOOL for v in scope}
        c = ExtensionalConstraint(f"C_{kind}", kind, scope, gate_table(kind, arity))
        report = verify_rules(generate(c, decl).rules, c, decl)
        assert report.passed, (kind, report)


def test_deleting_a_rule_breaks_exactness_with_frozen_witness():
    rules = list(generate(and_constraint(), DECL3).rules)
    pruned = [r for r in rules if r.index != 5]
    report = verify_rules(pruned, and_constraint(), DECL3)
    assert not report.cr1.passed
    assert report.cr1.witness["start"] == {"V1": "true", "V3": "false"}
    assert report.cr1.witness["variable"] == "V2"
    assert report.cr1.witness["expected"] == ["false"]
    assert report.cr1.witness["actual"] == ["false", "true"]


def test_unsound_rule_fails_soundness_with_support_witness():
    rules = list(generate(and_constraint(), DECL3).rules)
    bogus = PropagationRule(
        id="C_and.X1",
        owner="C_and",
        index=len(rules) + 1,
        conditions=(ConditionLiteral("V1", "true"),),
        conclusions=(("V3", ("false",)),),
    )
    report = verify_rules(rules + [bogus], and_constraint(), DECL3)
    assert not report.cr2.passed
    assert report.cr2.witness["start"] == {"V1": "true"}
    assert report.cr2.witness["tuple"] == ["true", "true", "true"]
    # attribution names the proximate remover: the bogus rule pins V3=false,
    # after which the sound R5 is the one that strips the supported V2=true
    assert report.cr2.witness["variable"] == "V2"
    assert report.cr2.witness["rule"] == "C_and.R5"


def test_duplicated_rule_fails_irredundancy():
    rules = list(generate(and_constraint(), DECL3).rules)
    duplicate = PropagationRule(
        id="C_and.X1",
        owner="C_and",
        index=len(rules) + 1,
        conditions=rules[0].conditions,
        conclusions=rules[0].conclusions,
    )
    report = verify_rules(rules + [duplicate], and_constraint(), DECL3)
    assert not report.cr4.passed
    assert report.cr4.witness["rule"] in ("C_and.R1", "C_and.X1")


def test_order_dependent_rule_set_fails_confluence():
    # racing pair: emptying B first disables the rule that would prune C
    c = table_constraint("C", ("A", "B", "C"), {("true", "true", "true")})
    decl = {"A": BOOL, "B": BOOL, "C": BOOL}
    racing = [
        PropagationRule(
            "C.R1", "C", 1,
            (ConditionLiteral("A", "true"),),
            (("B", ("false",)),),
        ),
        PropagationRule(
            "C.R2", "C", 2,
            (ConditionLiteral("B", "true"),),
            (("C", ("false",)),),
        ),
    ]
    report = verify_rules(racing, c, decl)
    assert not report.cr3.passed
    assert report.cr3.witness["order"]


@settings(deadline=None, max_examples=40)
@given(st.integers(0, 10**6))
def test_generate_is_deterministic_and_verified(seed):
    scope, rows = random_table(seed)
    decl = {v: BOOL for v in scope}
    c = table_constraint("T", scope, rows)
    first = generate(c, decl).rules
    second = generate(c, decl).rules
    assert first == second
    assert verify_rules(first, c, decl).passed


def test_rule_dump_round_trips_values_in_declared_order():
    decl = {"A": ("red", "green", "blue"), "B": ("red", "green", "blue")}
    c = table_constraint(
        "T",
        ("A", "B"),
        {("red", "green"), ("red", "blue"), ("green", "red")},
    )
    rules = generate(c, decl).rules
    assert verify_rules(rules, c, decl).passed
    text = dump_rules(rules)
    # multi-value conclusions list values in declared domain order
    assert "in {green,blue}" in text or "in {red,green}" in text or "in {red,blue}" in text
