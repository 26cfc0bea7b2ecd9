"""Data model, objective evaluation, and selection validation."""

from __future__ import annotations

import dataclasses
import random

import pytest

from spedac import (
    ArcRecord,
    ConflictRecord,
    Instance,
    InvariantError,
    MalformedPathError,
    PathSolution,
    SelectionViolation,
    conflict_penalty_term,
    evaluate,
    generate_random,
    incidence_from_path,
    objective_from_incidence,
    validate_selection,
    RandomConfig,
)
from spedac.solvers import enumerate_simple_paths


# --- penalty term ---------------------------------------------------------

def test_penalty_term_truth_table():
    assert conflict_penalty_term(1, 1, 10) == 10
    assert conflict_penalty_term(0, 0, 10) == 10
    assert conflict_penalty_term(1, 0, 10) == 0
    assert conflict_penalty_term(0, 1, 10) == 0


def test_penalty_term_matches_xor_form():
    rng = random.Random(20240811)
    for _ in range(200):
        p = rng.randint(1, 200)
        for x_a in (0, 1):
            for x_b in (0, 1):
                assert conflict_penalty_term(x_a, x_b, p) == p * (1 - (x_a ^ x_b))


# --- evaluation -----------------------------------------------------------

def test_evaluate_optimum_path(golden):
    sol = evaluate(golden, (0, 1, 3, 4, 6))
    assert sol.arc_cost == 7
    assert sol.penalty_cost == 0
    assert sol.objective == 7
    assert sol.violated_conflicts == frozenset()
    assert sol.arc_indices == (0, 2, 7, 10)


def test_evaluate_path_with_all_conflicts_violated(golden):
    # 0,2,1,4,6 leaves pairs 0 and 1 untouched (both-absent) and uses
    # both arcs of pair 2: every conflict is violated.
    sol = evaluate(golden, (0, 2, 1, 4, 6))
    assert sol.arc_cost == 5
    assert sol.penalty_cost == 30
    assert sol.objective == 35
    assert sol.violated_conflicts == frozenset({0, 1, 2})


def test_evaluate_cheapest_path_pays_one_penalty(golden):
    sol = evaluate(golden, (0, 2, 1, 3, 6))
    assert sol.arc_cost == 5
    assert sol.violated_conflicts == frozenset({2})
    assert sol.objective == 15


def test_evaluate_rejects_malformed_paths(golden):
    with pytest.raises(MalformedPathError, match="source"):
        evaluate(golden, (1, 3, 4, 6))
    with pytest.raises(MalformedPathError, match="sink"):
        evaluate(golden, (0, 1, 3, 4))
    with pytest.raises(MalformedPathError, match="revisits"):
        evaluate(golden, (0, 1, 3, 4, 3, 6))
    with pytest.raises(MalformedPathError, match="no arc"):
        evaluate(golden, (0, 3, 6))
    with pytest.raises(MalformedPathError, match="two vertices"):
        evaluate(golden, (0,))


def test_path_solution_objective_is_sum():
    sol = PathSolution(
        vertices=(0, 1),
        arc_indices=(0,),
        arc_cost=4,
        penalty_cost=11,
        violated_conflicts=frozenset({0}),
    )
    assert sol.objective == 15


# --- incidence form -------------------------------------------------------

def test_incidence_of_optimum(golden):
    vec = incidence_from_path(golden, evaluate(golden, (0, 1, 3, 4, 6)))
    assert sum(vec.arc_flags) == 4
    assert vec.penalty_flags == (0, 0, 0)
    assert objective_from_incidence(golden, vec) == 7


def test_incidence_activation_flags_follow_and(golden):
    vec = incidence_from_path(golden, evaluate(golden, (0, 2, 1, 4, 6)))
    assert vec.penalty_flags == (0, 0, 1)
    assert objective_from_incidence(golden, vec) == 35


def test_incidence_objective_matches_evaluate_everywhere(golden):
    instances = [golden]
    for seed in range(6):
        instances.append(
            generate_random(
                RandomConfig(n=8, d=0.3, r=0.05, penalty_range=(1, 20), seed=seed)
            )
        )
    for instance in instances:
        for verts in enumerate_simple_paths(instance):
            sol = evaluate(instance, verts)
            vec = incidence_from_path(instance, sol)
            assert objective_from_incidence(instance, vec) == sol.objective


def test_incidence_objective_validates_lengths(golden):
    vec = incidence_from_path(golden, evaluate(golden, (0, 1, 3, 4, 6)))
    bad = dataclasses.replace(vec, arc_flags=vec.arc_flags[:-1])
    with pytest.raises(ValueError):
        objective_from_incidence(golden, bad)


# --- selection validation -------------------------------------------------

def _flags_for(instance, arc_ids):
    flags = [0] * len(instance.arcs)
    for idx in arc_ids:
        flags[idx] = 1
    return flags


def test_validate_selection_accepts_path(golden):
    result = validate_selection(golden, _flags_for(golden, (0, 2, 7, 10)))
    assert isinstance(result, PathSolution)
    assert result.objective == 7
    assert result.vertices == (0, 1, 3, 4, 6)


def test_validate_selection_all_zero_is_source_imbalance(golden):
    result = validate_selection(golden, [0] * len(golden.arcs))
    assert isinstance(result, SelectionViolation)
    assert result.kind == "flow_imbalance"
    assert result.vertex == golden.source


def test_validate_selection_imbalance_names_vertex(golden):
    # A lone mid-graph arc leaves its endpoints unbalanced.
    result = validate_selection(golden, _flags_for(golden, (7,)))
    assert isinstance(result, SelectionViolation)
    assert result.kind == "flow_imbalance"


def test_validate_selection_reports_disjoint_cycle():
    base = [
        ArcRecord(0, 1, 1),
        ArcRecord(1, 4, 1),
        ArcRecord(2, 3, 1),
        ArcRecord(3, 5, 1),
        ArcRecord(5, 2, 1),
    ]
    instance = Instance(
        vertex_count=6, arcs=tuple(base), conflicts=(), source=0, sink=4
    )
    result = validate_selection(instance, [1, 1, 1, 1, 1])
    assert isinstance(result, SelectionViolation)
    assert result.kind == "cycle"
    assert result.cycle == frozenset({2, 3, 5})
    assert len(result.cycle) == 3


def test_validate_selection_cycle_through_path_vertex(golden):
    # Path plus a cycle sharing vertex 1 is flow-balanced but no path.
    arcs = golden.arcs + (ArcRecord(4, 1, 1),)
    instance = Instance(
        vertex_count=7, arcs=arcs, conflicts=(), source=0, sink=6
    )
    # 0->1 (0), 1->3 (2), 3->6 (9) is the path; 1->4 (3), 4->1 (12) the cycle.
    result = validate_selection(instance, _flags_for(instance, (0, 2, 9, 3, 12)))
    assert isinstance(result, SelectionViolation)
    assert result.kind == "cycle"
    assert result.cycle == frozenset({1, 4})


def test_validate_selection_roundtrip_on_enumerated_paths(golden):
    for verts in enumerate_simple_paths(golden):
        sol = evaluate(golden, verts)
        result = validate_selection(golden, _flags_for(golden, sol.arc_indices))
        assert isinstance(result, PathSolution)
        assert result == sol


def test_validate_selection_checks_flag_count(golden):
    with pytest.raises(ValueError):
        validate_selection(golden, [0, 1])


# --- structural invariants ------------------------------------------------

def test_arc_record_invariants():
    with pytest.raises(InvariantError, match="self-loop"):
        ArcRecord(2, 2, 1)
    with pytest.raises(InvariantError, match="non-negative"):
        ArcRecord(0, 1, -1)
    with pytest.raises(InvariantError, match="integer"):
        ArcRecord(0, 1, 1.5)


def test_conflict_record_invariants():
    with pytest.raises(InvariantError, match="itself"):
        ConflictRecord(3, 3, 5)
    with pytest.raises(InvariantError, match="positive"):
        ConflictRecord(0, 1, 0)
    assert ConflictRecord(4, 1, 2).pair == (1, 4)


def test_instance_rejects_duplicate_arc():
    with pytest.raises(InvariantError, match="duplicate arc"):
        Instance(
            vertex_count=3,
            arcs=(ArcRecord(0, 1, 1), ArcRecord(0, 1, 2)),
            conflicts=(),
            source=0,
            sink=2,
        )


def test_instance_rejects_bad_terminals_and_endpoints():
    with pytest.raises(InvariantError, match="source and sink"):
        Instance(2, (ArcRecord(0, 1, 1),), (), 0, 0)
    with pytest.raises(InvariantError, match="out of range"):
        Instance(2, (ArcRecord(0, 1, 1),), (), 0, 5)
    with pytest.raises(InvariantError, match="endpoint out of range"):
        Instance(2, (ArcRecord(0, 7, 1),), (), 0, 1)
    with pytest.raises(InvariantError, match="at least 2"):
        Instance(1, (), (), 0, 0)


def test_instance_rejects_bad_conflicts():
    arcs = (ArcRecord(0, 1, 1), ArcRecord(1, 2, 1))
    with pytest.raises(InvariantError, match="arc index out of range"):
        Instance(3, arcs, (ConflictRecord(0, 5, 1),), 0, 2)
    with pytest.raises(InvariantError, match="duplicate conflict"):
        Instance(
            3,
            arcs,
            (ConflictRecord(0, 1, 1), ConflictRecord(1, 0, 2)),
            0,
            2,
        )


def test_core_types_are_immutable(golden):
    with pytest.raises(dataclasses.FrozenInstanceError):
        golden.source = 3
    with pytest.raises(dataclasses.FrozenInstanceError):
        golden.arcs[0].weight = 9


def test_adjacency_tables(golden):
    assert golden.outgoing[0] == (0, 1)
    assert golden.incoming[6] == (9, 10, 11)
    assert golden.conflicts_of_arc[0] == (0,)
    assert golden.conflicts_of_arc[9] == (0,)
    assert golden.conflicts_of_arc[1] == ()
    assert golden.arc_index[(3, 4)] == 7
