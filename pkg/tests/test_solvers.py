"""Dijkstra, exhaustive oracle, branch-and-bound, local search, gap."""

from __future__ import annotations

import math

import pytest

from spedac import (
    ArcRecord,
    GapUndefinedError,
    GuardExceededError,
    Instance,
    RandomConfig,
    SolveStatus,
    branch_and_bound,
    brute_force,
    dijkstra,
    enumerate_simple_paths,
    evaluate,
    generate_random,
    k_shortest_paths,
    local_search,
    optimality_gap,
    shortest_path_vertices,
)

INFINITY = math.inf


def _sweep_instances(counts=(6, 8, 10), densities=(0.2, 0.4), seeds=range(4)):
    out = []
    for n in counts:
        for d in densities:
            m = round(d * n * (n - 1))
            r = 24 / (m * (m - 1))  # lands a handful of conflicts
            for seed in seeds:
                out.append(
                    generate_random(
                        RandomConfig(
                            n=n, d=d, r=r, penalty_range=(1, 20), seed=seed
                        )
                    )
                )
    return out


# --- dijkstra -------------------------------------------------------------

def test_dijkstra_forward_distances(golden):
    dist, pred = dijkstra(golden)
    assert dist[golden.source] == 0
    assert dist[golden.sink] == 5
    assert pred[golden.source] is None
    # The predecessor chain reconstructs a distance-5 route.
    verts = shortest_path_vertices(golden)
    assert evaluate(golden, verts).arc_cost == 5


def test_dijkstra_from_sink(golden):
    dist, pred = dijkstra(golden, from_sink=True)
    assert dist[golden.sink] == 0
    assert dist[golden.source] == 5
    assert dist[4] == 1
    assert dist[3] == 2
    # pred points along an arc leaving the vertex toward the sink.
    arc = golden.arcs[pred[3]]
    assert arc.tail == 3


def test_dijkstra_marks_unreachable_with_infinity():
    instance = Instance(
        vertex_count=4,
        arcs=(ArcRecord(0, 1, 1), ArcRecord(1, 3, 1), ArcRecord(2, 3, 1)),
        conflicts=(),
        source=0,
        sink=3,
    )
    dist, _ = dijkstra(instance)
    assert dist[2] == INFINITY
    assert dist[3] == 2


# --- path enumeration and the exhaustive oracle ---------------------------

def test_enumeration_matches_permutation_oracle(golden, permutation_enumerator):
    ours = set(enumerate_simple_paths(golden))
    assert ours == permutation_enumerator(golden)
    assert len(ours) == 12


def test_enumeration_matches_oracle_on_random_instances(permutation_enumerator):
    for instance in _sweep_instances(counts=(6, 8), seeds=range(3)):
        assert set(enumerate_simple_paths(instance)) == permutation_enumerator(instance)


def test_brute_force_golden(golden):
    report = brute_force(golden)
    assert report.status is SolveStatus.OPTIMAL
    assert report.lower_bound == report.upper_bound == 7
    assert report.incumbent.vertices == (0, 1, 3, 4, 6)
    assert report.nodes_explored == 12


def test_brute_force_guard(golden):
    with pytest.raises(GuardExceededError):
        brute_force(golden, max_paths=5)


def test_brute_force_infeasible():
    instance = Instance(
        vertex_count=3, arcs=(ArcRecord(1, 0, 1),), conflicts=(), source=0, sink=2
    )
    report = brute_force(instance)
    assert report.status is SolveStatus.INFEASIBLE
    assert report.incumbent is None
    assert report.upper_bound == INFINITY


# --- branch and bound -----------------------------------------------------

def test_branch_and_bound_golden(golden):
    report = branch_and_bound(golden)
    assert report.status is SolveStatus.OPTIMAL
    assert report.lower_bound == report.upper_bound == 7
    assert report.incumbent.vertices == (0, 1, 3, 4, 6)
    assert report.incumbent.violated_conflicts == frozenset()


def test_branch_and_bound_matches_brute_force_sweep():
    for instance in _sweep_instances():
        exact = brute_force(instance)
        bb = branch_and_bound(instance)
        assert bb.status is SolveStatus.OPTIMAL
        assert bb.upper_bound == exact.upper_bound
        assert bb.lower_bound == bb.upper_bound
        assert evaluate(instance, bb.incumbent.vertices) == bb.incumbent


def test_branch_and_bound_reduces_to_dijkstra_without_conflicts():
    for n, d, seed in [(10, 0.3, 1), (15, 0.2, 2), (20, 0.25, 3), (12, 0.4, 4)]:
        instance = generate_random(RandomConfig(n=n, d=d, r=0.0, seed=seed))
        assert not instance.conflicts
        dist, _ = dijkstra(instance)
        report = branch_and_bound(instance)
        assert report.status is SolveStatus.OPTIMAL
        assert report.upper_bound == dist[instance.sink]


def test_branch_and_bound_infeasible():
    instance = Instance(
        vertex_count=3, arcs=(ArcRecord(1, 0, 1),), conflicts=(), source=0, sink=2
    )
    report = branch_and_bound(instance)
    assert report.status is SolveStatus.INFEASIBLE
    assert report.incumbent is None
    assert report.lower_bound == report.upper_bound == INFINITY


def test_branch_and_bound_is_deterministic(golden):
    first = branch_and_bound(golden)
    second = branch_and_bound(golden)
    assert first.incumbent == second.incumbent
    assert (first.lower_bound, first.upper_bound) == (
        second.lower_bound,
        second.upper_bound,
    )
    assert first.nodes_explored == second.nodes_explored


def test_branch_and_bound_bounds_are_admissible():
    # Every node bound must lower-bound the best completion of its
    # partial path, established here against the exhaustive oracle.
    for instance in _sweep_instances(counts=(6, 8), seeds=range(2)):
        completions: dict[tuple[int, ...], int] = {}
        for verts in enumerate_simple_paths(instance):
            objective = evaluate(instance, verts).objective
            for i in range(1, len(verts) + 1):
                prefix = verts[:i]
                best = completions.get(prefix)
                if best is None or objective < best:
                    completions[prefix] = objective
        seen = []

        def check(prefix, bound):
            seen.append(prefix)
            if prefix in completions:
                assert bound <= completions[prefix]

        branch_and_bound(instance, on_node=check)
        assert seen, "instrumentation hook never fired"


def test_branch_and_bound_incumbents_improve_strictly(golden):
    objectives = []
    branch_and_bound(golden, on_incumbent=lambda sol: objectives.append(sol.objective))
    assert objectives, "no incumbent was ever installed"
    assert objectives == sorted(objectives, reverse=True)
    assert len(set(objectives)) == len(objectives)
    assert objectives[-1] == 7


def test_branch_and_bound_timeout_keeps_valid_bounds():
    instance = generate_random(
        RandomConfig(n=16, d=0.3, r=0.01, penalty_range=(25, 125), seed=1)
    )
    full = branch_and_bound(instance)
    assert full.status is SolveStatus.OPTIMAL
    assert full.nodes_explored > 2048, "instance too small to exercise a timeout"
    cut = branch_and_bound(instance, time_limit=0.0)
    assert cut.status is SolveStatus.TIME_LIMIT
    assert cut.lower_bound <= cut.upper_bound
    assert cut.lower_bound <= full.upper_bound
    if cut.incumbent is not None:
        assert cut.upper_bound == cut.incumbent.objective
        assert cut.upper_bound >= full.upper_bound


# --- local search ---------------------------------------------------------

def test_local_search_golden(golden):
    report = local_search(golden, seed=0)
    assert report.status is SolveStatus.FEASIBLE
    assert report.lower_bound == 5
    assert report.upper_bound == 7
    assert report.incumbent.vertices == (0, 1, 3, 4, 6)


def test_local_search_without_conflicts_matches_dijkstra():
    for seed in range(3):
        instance = generate_random(RandomConfig(n=15, d=0.3, r=0.0, seed=seed))
        dist, _ = dijkstra(instance)
        report = local_search(instance, seed=seed)
        assert report.upper_bound == dist[instance.sink]


def test_local_search_bounds_and_dominance():
    for instance in _sweep_instances(counts=(8, 10), seeds=range(3)):
        exact = brute_force(instance)
        seed_objective = evaluate(instance, shortest_path_vertices(instance)).objective
        report = local_search(instance, seed=1)
        assert report.status is SolveStatus.FEASIBLE
        assert report.lower_bound <= exact.upper_bound
        assert exact.upper_bound <= report.upper_bound <= seed_objective


def test_local_search_is_deterministic(golden):
    instance = generate_random(
        RandomConfig(n=20, d=0.3, r=0.003, penalty_range=(25, 125), seed=5)
    )
    first = local_search(instance, seed=9)
    second = local_search(instance, seed=9)
    assert first.incumbent == second.incumbent
    assert first.nodes_explored == second.nodes_explored


def test_local_search_infeasible():
    instance = Instance(
        vertex_count=3, arcs=(ArcRecord(1, 0, 1),), conflicts=(), source=0, sink=2
    )
    report = local_search(instance)
    assert report.status is SolveStatus.INFEASIBLE
    assert report.incumbent is None


# --- k shortest paths -----------------------------------------------------

def test_k_shortest_paths_covers_everything(golden):
    ranked = k_shortest_paths(golden, 50)
    assert len(ranked) == 12
    costs = [cost for cost, _ in ranked]
    assert costs == sorted(costs)
    assert costs[:3] == [5, 5, 6]
    assert {verts for _, verts in ranked} == set(enumerate_simple_paths(golden))
    for cost, verts in ranked:
        assert evaluate(golden, verts).arc_cost == cost


def test_k_shortest_paths_prefix():
    instance = generate_random(RandomConfig(n=10, d=0.4, r=0.0, seed=2))
    all_costs = sorted(
        evaluate(instance, verts).arc_cost
        for verts in enumerate_simple_paths(instance)
    )
    top = k_shortest_paths(instance, 4)
    assert [cost for cost, _ in top] == all_costs[: len(top)]


# --- optimality gap -------------------------------------------------------

def test_optimality_gap_values():
    assert optimality_gap(7, 7) == 0.0
    assert optimality_gap(0, 0) == 0.0
    assert optimality_gap(99, 100) == pytest.approx(1.0)
    assert optimality_gap(50, 100) == pytest.approx(50.0)
    assert optimality_gap(70658.9, 70658.9) == 0.0


def test_optimality_gap_errors():
    with pytest.raises(GapUndefinedError):
        optimality_gap(3, INFINITY)
    with pytest.raises(ValueError):
        optimality_gap(8, 7)
    with pytest.raises(GapUndefinedError):
        optimality_gap(-2, 0)
