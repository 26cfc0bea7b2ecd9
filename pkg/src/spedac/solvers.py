"""Solvers: Dijkstra baseline, exhaustive oracle, branch-and-bound, local search.

All solvers consume the immutable Instance from spedac.core and return a
SolveReport.  Bounds and objectives are exact integers; +infinity is the
sentinel for "no value" (unreachable sink, no incumbent).
"""

from __future__ import annotations

import heapq
import math
import random
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, Optional, Sequence

from .core import Instance, PathSolution, evaluate

INFINITY = math.inf


class GuardExceededError(RuntimeError):
    """The enumeration guard of the exhaustive solver tripped."""


class GapUndefinedError(ValueError):
    """The optimality gap is undefined for the given bounds."""


class SolveStatus(Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    TIME_LIMIT = "TimeLimit"


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solver run.

    lower_bound <= upper_bound always holds; upper_bound is +infinity
    exactly when there is no incumbent, and status OPTIMAL certifies
    lower_bound == upper_bound.
    """

    status: SolveStatus
    lower_bound: float
    upper_bound: float
    incumbent: Optional[PathSolution]
    seconds_to_best: float
    seconds_total: float
    nodes_explored: int


def dijkstra(
    instance: Instance, from_sink: bool = False
) -> tuple[list[float], list[Optional[int]]]:
    """Conflict-blind single-source shortest arc-cost distances.

    With from_sink=False: distances from the source, pred[v] is the arc
    index entering v on a shortest route (None at the source or when
    unreachable).  With from_sink=True the graph is traversed backwards:
    distances measure v -> sink, and pred[v] is the arc leaving v toward
    the sink.  Unreachable vertices carry +infinity.
    """
    n = instance.vertex_count
    arcs = instance.arcs
    start = instance.sink if from_sink else instance.source
    dist: list[float] = [INFINITY] * n
    pred: list[Optional[int]] = [None] * n
    dist[start] = 0
    heap: list[tuple[float, int]] = [(0, start)]
    neighbours = instance.incoming if from_sink else instance.outgoing
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for a in neighbours[u]:
            v = arcs[a].tail if from_sink else arcs[a].head
            nd = d + arcs[a].weight
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = a
                heapq.heappush(heap, (nd, v))
    return dist, pred


def shortest_path_vertices(instance: Instance) -> Optional[tuple[int, ...]]:
    """Vertices of a conflict-blind shortest source-sink path, or None."""
    dist, pred = dijkstra(instance)
    if dist[instance.sink] == INFINITY:
        return None
    verts = [instance.sink]
    while verts[-1] != instance.source:
        arc = instance.arcs[pred[verts[-1]]]
        verts.append(arc.tail)
    verts.reverse()
    return tuple(verts)


def enumerate_simple_paths(instance: Instance) -> Iterator[tuple[int, ...]]:
    """Yield every simple source-sink path, arcs explored in index order."""
    arcs = instance.arcs
    outgoing = instance.outgoing
    sink = instance.sink
    path = [instance.source]
    on_path = [False] * instance.vertex_count
    on_path[instance.source] = True

    def extend(u: int) -> Iterator[tuple[int, ...]]:
        if u == sink:
            yield tuple(path)
            return
        for a in outgoing[u]:
            v = arcs[a].head
            if on_path[v]:
                continue
            on_path[v] = True
            path.append(v)
            yield from extend(v)
            path.pop()
            on_path[v] = False

    yield from extend(instance.source)


def brute_force(
    instance: Instance,
    max_paths: int = 1_000_000,
    time_limit: Optional[float] = None,
) -> SolveReport:
    """Exhaustive oracle: evaluate every simple source-sink path.

    Raises GuardExceededError once more than max_paths paths have been
    enumerated or the optional time guard trips.  Among equal-objective
    optima the first path in enumeration order is kept.
    """
    start = time.perf_counter()
    deadline = None if time_limit is None else start + time_limit
    best: Optional[PathSolution] = None
    best_at = 0.0
    count = 0
    for verts in enumerate_simple_paths(instance):
        count += 1
        if count > max_paths:
            raise GuardExceededError(
                f"more than {max_paths} simple paths enumerated"
            )
        if deadline is not None and count % 4096 == 0 and time.perf_counter() > deadline:
            raise GuardExceededError(
                f"time guard of {time_limit} s exceeded after {count} paths"
            )
        sol = evaluate(instance, verts)
        if best is None or sol.objective < best.objective:
            best = sol
            best_at = time.perf_counter() - start
    total = time.perf_counter() - start
    if best is None:
        return SolveReport(
            status=SolveStatus.INFEASIBLE,
            lower_bound=INFINITY,
            upper_bound=INFINITY,
            incumbent=None,
            seconds_to_best=0.0,
            seconds_total=total,
            nodes_explored=count,
        )
    return SolveReport(
        status=SolveStatus.OPTIMAL,
        lower_bound=best.objective,
        upper_bound=best.objective,
        incumbent=best,
        seconds_to_best=best_at,
        seconds_total=total,
        nodes_explored=count,
    )


def branch_and_bound(
    instance: Instance,
    time_limit: Optional[float] = None,
    on_node: Optional[Callable[[tuple[int, ...], float], None]] = None,
    on_incumbent: Optional[Callable[[PathSolution], None]] = None,
) -> SolveReport:
    """Depth-first branch-and-bound over simple path extensions.

    The bound at a node is the partial arc cost, plus the penalties of
    conflicts whose two arcs are both decided (an arc is decided-in when
    it lies on the partial path, decided-out when its tail is a
    non-endpoint path vertex or it was branched away), plus the
    conflict-blind distance from the current vertex to the sink.  Nodes
    are pruned when the bound reaches the incumbent.  Children are tried
    by ascending arc weight plus distance-to-sink of the head, ties by
    arc index, which makes the search deterministic.

    The wall clock is consulted every 1024 nodes.  On a timeout the
    report carries the incumbent and a lower bound no larger than any
    open node's bound; the two hooks exist for instrumentation in tests.
    """
    start = time.perf_counter()
    deadline = None if time_limit is None else start + time_limit
    dist_sink, _ = dijkstra(instance, from_sink=True)
    source, sink = instance.source, instance.sink
    n = instance.vertex_count
    arcs = instance.arcs
    conflicts = instance.conflicts
    conf_of = instance.conflicts_of_arc

    if dist_sink[source] == INFINITY:
        return SolveReport(
            status=SolveStatus.INFEASIBLE,
            lower_bound=INFINITY,
            upper_bound=INFINITY,
            incumbent=None,
            seconds_to_best=0.0,
            seconds_total=time.perf_counter() - start,
            nodes_explored=0,
        )

    order: list[tuple[int, ...]] = []
    for v in range(n):
        ranked = sorted(
            instance.outgoing[v],
            key=lambda i: (arcs[i].weight + dist_sink[arcs[i].head], i),
        )
        order.append(tuple(ranked))

    status = [0] * len(arcs)  # 0 undecided, 1 on path, 2 excluded
    committed = 0  # penalty sum over decided conflict pairs
    on_path = [False] * n
    on_path[source] = True
    path = [source]

    best: Optional[PathSolution] = None
    ub: float = INFINITY
    best_at = 0.0
    nodes = 0
    open_lb: float = INFINITY  # min bound over subtrees abandoned at timeout
    timed_out = False

    def decide(a: int, st: int) -> int:
        # Marks arc a and charges every conflict this decision completes.
        nonlocal committed
        status[a] = st
        delta = 0
        for k in conf_of[a]:
            c = conflicts[k]
            other = c.arc_b if c.arc_a == a else c.arc_a
            if status[other] and status[other] == st:
                delta += c.penalty
        committed += delta
        return delta

    def undo(decisions: list[tuple[int, int]]) -> None:
        nonlocal committed
        for a, delta in reversed(decisions):
            committed -= delta
            status[a] = 0

    def visit(u: int, g: int) -> None:
        nonlocal nodes, best, ub, best_at, timed_out, open_lb
        nodes += 1
        if deadline is not None and nodes % 1024 == 0 and time.perf_counter() > deadline:
            timed_out = True
        bound = g + committed + dist_sink[u]
        if on_node is not None:
            on_node(tuple(path), bound)
        if timed_out:
            open_lb = min(open_lb, bound)
            return
        if u == sink:
            sol = evaluate(instance, path)
            if sol.objective < ub:
                best, ub = sol, sol.objective
                best_at = time.perf_counter() - start
                if on_incumbent is not None:
                    on_incumbent(sol)
            return
        for a in order[u]:
            v = arcs[a].head
            if on_path[v]:
                continue
            decisions = [(a, decide(a, 1))]
            for b in order[u]:
                if b != a and status[b] == 0:
                    decisions.append((b, decide(b, 2)))
            child_bound = g + arcs[a].weight + committed + dist_sink[v]
            if child_bound >= ub:
                undo(decisions)
                continue
            on_path[v] = True
            path.append(v)
            visit(v, g + arcs[a].weight)
            path.pop()
            on_path[v] = False
            undo(decisions)
            if timed_out:
                open_lb = min(open_lb, bound)
                return

    visit(source, 0)
    total = time.perf_counter() - start
    if best is None:
        # dist_sink[source] is finite, so only a timeout can land here.
        return SolveReport(
            status=SolveStatus.TIME_LIMIT,
            lower_bound=open_lb,
            upper_bound=INFINITY,
            incumbent=None,
            seconds_to_best=0.0,
            seconds_total=total,
            nodes_explored=nodes,
        )
    if timed_out:
        return SolveReport(
            status=SolveStatus.TIME_LIMIT,
            lower_bound=min(open_lb, ub),
            upper_bound=ub,
            incumbent=best,
            seconds_to_best=best_at,
            seconds_total=total,
            nodes_explored=nodes,
        )
    return SolveReport(
        status=SolveStatus.OPTIMAL,
        lower_bound=ub,
        upper_bound=ub,
        incumbent=best,
        seconds_to_best=best_at,
        seconds_total=total,
        nodes_explored=nodes,
    )


def _masked_shortest_path(
    instance: Instance,
    origin: int,
    target: int,
    banned_vertices: frozenset[int] | set[int] = frozenset(),
    banned_arcs: frozenset[int] | set[int] = frozenset(),
) -> Optional[tuple[int, tuple[int, ...]]]:
    """Cheapest arc-cost path origin -> target avoiding banned items."""
    arcs = instance.arcs
    dist: dict[int, int] = {origin: 0}
    pred: dict[int, int] = {}
    heap: list[tuple[int, int]] = [(0, origin)]
    while heap:
        d, u = heapq.heappop(heap)
        if u == target:
            break
        if d > dist.get(u, INFINITY):
            continue
        for a in instance.outgoing[u]:
            if a in banned_arcs:
                continue
            v = arcs[a].head
            if v in banned_vertices:
                continue
            nd = d + arcs[a].weight
            if nd < dist.get(v, INFINITY):
                dist[v] = nd
                pred[v] = a
                heapq.heappush(heap, (nd, v))
    if target not in dist:
        return None
    verts = [target]
    while verts[-1] != origin:
        verts.append(arcs[pred[verts[-1]]].tail)
    verts.reverse()
    return dist[target], tuple(verts)


def k_shortest_paths(instance: Instance, k: int) -> list[tuple[int, tuple[int, ...]]]:
    """Up to k cheapest simple source-sink paths by arc cost (Yen).

    Conflicts are ignored here; the caller re-evaluates candidates under
    the full objective.  Deterministic: candidate ties break on the
    vertex tuple.
    """
    first = _masked_shortest_path(instance, instance.source, instance.sink)
    if first is None:
        return []
    found: list[tuple[int, tuple[int, ...]]] = [first]
    seen = {first[1]}
    candidates: list[tuple[int, tuple[int, ...]]] = []
    lookup = instance.arc_index
    while len(found) < k:
        _, prev = found[-1]
        root_cost = 0
        for i in range(len(prev) - 1):
            spur = prev[i]
            root = prev[: i + 1]
            banned_arcs = {
                lookup[(p[i], p[i + 1])]
                for _, p in found
                if len(p) > i + 1 and p[: i + 1] == root
            }
            banned_vertices = set(root[:-1])
            spur_part = _masked_shortest_path(
                instance, spur, instance.sink, banned_vertices, banned_arcs
            )
            if spur_part is not None:
                total = root_cost + spur_part[0]
                full = root[:-1] + spur_part[1]
                if full not in seen:
                    seen.add(full)
                    heapq.heappush(candidates, (total, full))
            root_cost += instance.arcs[lookup[(prev[i], prev[i + 1])]].weight
        if not candidates:
            break
        found.append(heapq.heappop(candidates))
    return found


def local_search(
    instance: Instance,
    time_limit: Optional[float] = None,
    seed: int = 0,
    pool_size: int = 50,
    detour_radius: Optional[int] = None,
    restarts: int = 8,
) -> SolveReport:
    """Heuristic: shortest-path seed, candidate pool, detour descent.

    Starts from the conflict-blind shortest path, evaluates a pool of
    cheap paths (k-shortest by arc cost), then repeatedly applies the
    best single-detour move (replace one subpath by the cheapest
    alternative subpath) while it strictly improves the objective.
    Seeded perturbation restarts escape local optima.  The reported
    lower bound is the conflict-blind shortest distance; the status is
    always FEASIBLE when the sink is reachable since no optimality is
    proven.  The schedule is iteration-bounded, so results with a fixed
    seed do not depend on the clock unless the time limit trips.
    """
    start = time.perf_counter()
    deadline = None if time_limit is None else start + time_limit

    def out_of_time() -> bool:
        return deadline is not None and time.perf_counter() > deadline

    dist, _ = dijkstra(instance)
    if dist[instance.sink] == INFINITY:
        return SolveReport(
            status=SolveStatus.INFEASIBLE,
            lower_bound=INFINITY,
            upper_bound=INFINITY,
            incumbent=None,
            seconds_to_best=0.0,
            seconds_total=time.perf_counter() - start,
            nodes_explored=0,
        )
    lb = dist[instance.sink]

    evaluated = 0
    best: Optional[PathSolution] = None
    best_at = 0.0

    def consider(sol: PathSolution) -> None:
        nonlocal best, best_at
        if best is None or sol.objective < best.objective:
            best = sol
            best_at = time.perf_counter() - start

    def assess(verts: Sequence[int]) -> PathSolution:
        nonlocal evaluated
        evaluated += 1
        return evaluate(instance, verts)

    def best_detour(sol: PathSolution) -> Optional[PathSolution]:
        # Best strict improvement over every (i, j) subpath replacement.
        p = sol.vertices
        winner: Optional[PathSolution] = None
        for i in range(len(p) - 1):
            limit = len(p) if detour_radius is None else min(len(p), i + detour_radius + 1)
            for j in range(i + 1, limit):
                banned = (set(p[:i]) | set(p[j + 1:]))
                alt = _masked_shortest_path(instance, p[i], p[j], banned)
                if alt is None or alt[1] == p[i: j + 1]:
                    continue
                cand = assess(p[:i] + alt[1] + p[j + 1:])
                if cand.objective < sol.objective and (
                    winner is None or cand.objective < winner.objective
                ):
                    winner = cand
            if out_of_time():
                return winner
        return winner

    def descend(sol: PathSolution) -> PathSolution:
        while not out_of_time():
            move = best_detour(sol)
            if move is None:
                break
            sol = move
        return sol

    def perturbed(sol: PathSolution, rng: random.Random) -> Optional[PathSolution]:
        # Forces the path through a random off-path vertex between two
        # random positions; used to escape local optima.
        p = sol.vertices
        for _ in range(8):
            i = rng.randrange(0, len(p) - 1)
            j = rng.randrange(i + 1, len(p))
            w = rng.randrange(0, instance.vertex_count)
            if w in p:
                continue
            first = _masked_shortest_path(
                instance, p[i], w, (set(p[:i]) | set(p[j:])) - {p[i]}
            )
            if first is None:
                continue
            second = _masked_shortest_path(
                instance,
                w,
                p[j],
                (set(p[: i + 1]) | set(p[j + 1:]) | set(first[1])) - {w, p[j]},
            )
            if second is None:
                continue
            return assess(p[:i] + first[1] + second[1][1:] + p[j + 1:])
        return None

    consider(assess(shortest_path_vertices(instance)))
    for _, verts in k_shortest_paths(instance, pool_size):
        if out_of_time():
            break
        consider(assess(verts))
    consider(descend(best))
    rng = random.Random(f"{seed}/local-search")
    for _ in range(restarts):
        if out_of_time():
            break
        kicked = perturbed(best, rng)
        if kicked is None:
            continue
        consider(descend(kicked))

    return SolveReport(
        status=SolveStatus.FEASIBLE,
        lower_bound=lb,
        upper_bound=best.objective,
        incumbent=best,
        seconds_to_best=best_at,
        seconds_total=time.perf_counter() - start,
        nodes_explored=evaluated,
    )


def optimality_gap(lower_bound: float, upper_bound: float) -> float:
    """Percent gap 100 * (ub - lb) / ub; zero when the bounds meet.

    Raises GapUndefinedError on the +infinity sentinel (no incumbent) or
    a non-positive upper bound with slack, and ValueError when
    lower_bound exceeds upper_bound.
    """
    if upper_bound == INFINITY:
        raise GapUndefinedError("gap undefined without an incumbent")
    if lower_bound > upper_bound:
        raise ValueError(
            f"lower bound {lower_bound} exceeds upper bound {upper_bound}"
        )
    if lower_bound == upper_bound:
        return 0.0
    if upper_bound > 0:
        return 100.0 * (upper_bound - lower_bound) / upper_bound
    raise GapUndefinedError(
        f"gap undefined for non-positive upper bound {upper_bound}"
    )
