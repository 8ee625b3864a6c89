"""Maximum cost-ratio directed cycle of a dual-weighted graph.

The cost ratio of a closed walk is q/w when w > 0, exactly 1 when
q = w = 0, and +inf otherwise; the maximum over directed cycles is the
competitive ratio of the policy the graph encodes.

The production solver runs an exact parametric search: maintain a
candidate ratio lam and look for a cycle with q - lam*w > 0 via
negative-cycle detection on integer-scaled weights lam*w - q, raising
lam to the found cycle's exact ratio until no improving cycle exists.
A brute-force enumeration of all simple cycles serves as the independent
oracle on small graphs.

Edge costs must be non-negative; edges with w = +inf are ignored (an
adversary never plays them) and a cycle through a q = +inf edge makes
the verdict infinite.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .debruijn import DualGraph, build_graph_det, build_graph_rand, induced_input
from .errors import EmptyGraph, GraphTooLarge
from .exact import POS_INF, Cost, cost_sum
from .policies import RandomizedPolicy

BRUTE_FORCE_VERTEX_GUARD = 14
_TIGHT_SEARCH_CAP = 200_000


@dataclass(frozen=True)
class CycleReport:
    vertices: tuple  # v0, v1, ..., v0 (closed; interior non-repeating)
    edge_ids: tuple
    q: Cost
    w: Cost
    ratio: Cost  # q/w, or exactly 1 for the q = w = 0 case, or +inf
    induced: tuple  # per-edge new-input symbols


@dataclass(frozen=True)
class RatioVerdict:
    best: CycleReport
    classification: str  # "finite" | "infinite"
    iterations: int = 0  # improving steps the parametric search took


def _cycle_ratio(q: Cost, w: Cost) -> Cost:
    if w.is_finite and w.as_fraction() > 0 and q.is_finite:
        return Cost(q.as_fraction() / w.as_fraction())
    if q == Cost(0) and w == Cost(0):
        return Cost(1)
    return POS_INF


def _make_report(graph: DualGraph, edge_ids) -> CycleReport:
    edges = [graph.edges[k] for k in edge_ids]
    q = cost_sum(e.q for e in edges)
    w = cost_sum(e.w for e in edges)
    vertices = tuple([e.src for e in edges] + [edges[-1].dst])
    return CycleReport(
        vertices=vertices,
        edge_ids=tuple(edge_ids),
        q=q,
        w=w,
        ratio=_cycle_ratio(q, w),
        induced=induced_input(graph, edge_ids),
    )


def walk_ratio(graph: DualGraph, edge_ids) -> Cost:
    """Cost ratio of an arbitrary closed walk (used by property tests)."""
    q = cost_sum(graph.edges[k].q for k in edge_ids)
    w = cost_sum(graph.edges[k].w for k in edge_ids)
    return _cycle_ratio(q, w)


# -- shared preparation -------------------------------------------------------


def _prepare(graph: DualGraph):
    """Validate costs, drop unusable edges, scale to integers.

    Returns (edges, scale) where edges is a list of
    (edge_id, src, dst, w_int, q_int) and an infinite-q edge is flagged
    with q_int = None.
    """
    if graph.n_vertices == 0:
        raise EmptyGraph("graph has no vertices")
    usable = []
    denoms = [1]
    for k, e in enumerate(graph.edges):
        if e.w == POS_INF:
            continue  # the adversary never pays +inf
        if not e.w.is_finite or e.w.as_fraction() < 0:
            raise ValueError(f"edge {k}: adversary cost {e.w} must be >= 0")
        if e.q.is_finite:
            if e.q.as_fraction() < 0:
                raise ValueError(f"edge {k}: algorithm cost {e.q} must be >= 0")
            denoms.append(e.q.as_fraction().denominator)
        elif e.q != POS_INF:
            raise ValueError(f"edge {k}: algorithm cost {e.q} unsupported")
        denoms.append(e.w.as_fraction().denominator)
        usable.append(k)
    scale = lcm(*denoms)
    edges = []
    for k in usable:
        e = graph.edges[k]
        w_int = int(e.w.as_fraction() * scale)
        q_int = int(e.q.as_fraction() * scale) if e.q.is_finite else None
        edges.append((k, e.src, e.dst, w_int, q_int))
    return edges, scale


def _negative_cycle(n, arcs):
    """Bellman-Ford negative-cycle detection with predecessor extraction.

    arcs: list of (edge_id, src, dst, weight_int). All distances start at
    zero (virtual super-source), so any negative cycle is found. Returns
    the cycle as an edge-id list or None.
    """
    dist = [0] * n
    pred = [None] * n
    seed = None
    for round_no in range(n):
        changed = False
        for arc in arcs:
            _, src, dst, wt = arc
            nd = dist[src] + wt
            if nd < dist[dst]:
                dist[dst] = nd
                pred[dst] = arc
                changed = True
                if round_no == n - 1:
                    seed = dst
        if not changed:
            return None
    if seed is None:
        return None
    # walk n predecessor steps to land inside a predecessor cycle
    v = seed
    for _ in range(n):
        v = pred[v][1]
    cycle = []
    start = v
    while True:
        arc = pred[v]
        cycle.append(arc[0])
        v = arc[1]
        if v == start:
            break
    cycle.reverse()
    return cycle


def _simple_cycles(n_vertices, out_arcs, visit_cap=None):
    """Yield simple directed cycles as edge-id lists, in a canonical order.

    out_arcs[v] lists (edge_id, dst) in deterministic order. Cycles are
    rooted at their smallest vertex; roots ascend, and within a root the
    search is depth-first in arc order.
    """
    steps = 0
    for root in range(n_vertices):
        stack = [(root, iter(out_arcs[root]))]
        on_path = {root}
        edge_path = []
        while stack:
            v, arcs = stack[-1]
            advanced = False
            for edge_id, dst in arcs:
                steps += 1
                if visit_cap is not None and steps > visit_cap:
                    return
                if dst == root:
                    yield edge_path + [edge_id]
                    continue
                if dst < root or dst in on_path:
                    continue
                edge_path.append(edge_id)
                on_path.add(dst)
                stack.append((dst, iter(out_arcs[dst])))
                advanced = True
                break
            if not advanced:
                stack.pop()
                if edge_path:
                    edge_path.pop()
                on_path.discard(v)


def _out_arcs(n, arcs):
    out = [[] for _ in range(n)]
    for arc in arcs:
        out[arc[1]].append((arc[0], arc[2]))
    return out


def core_max_ratio(n, edges, abort_above=None, abort_on_tie=False):
    """Parametric search over integer-scaled arcs (id, src, dst, w, q).

    Returns (kind, ratio, witness_edge_ids, iterations) with kind one of
    "infinite", "finite", or "aborted". When abort_above is given the
    search stops as soon as the running lower bound lam exceeds it
    (or ties it, with abort_on_tie), reporting kind "aborted": the true
    ratio is then >= lam and the candidate cannot beat the incumbent.
    """
    # stage 1: a zero-w cycle with positive q means an unbounded ratio
    zero_w = [(k, s, d, -q) for k, s, d, w, q in edges if w == 0]
    cycle = _negative_cycle(n, zero_w)
    if cycle is not None:
        return "infinite", None, cycle, 0

    # stage 2: raise lam through the finite set of cycle ratios
    by_id = {k: (w, q) for k, s, d, w, q in edges}
    lam = Fraction(0)
    witness = None
    iterations = 0
    while True:
        a, b = lam.numerator, lam.denominator
        arcs = [(k, s, d, a * w - b * q) for k, s, d, w, q in edges]
        cycle = _negative_cycle(n, arcs)
        if cycle is None:
            break
        w_sum = sum(by_id[k][0] for k in cycle)
        q_sum = sum(by_id[k][1] for k in cycle)
        lam = Fraction(q_sum, w_sum)
        witness = cycle
        iterations += 1
        if abort_above is not None and (
            lam > abort_above or (abort_on_tie and lam == abort_above)
        ):
            return "aborted", lam, witness, iterations

    # a cycle consisting only of zero-cost edges pins the ratio at 1
    zero_zero = _any_cycle(n, [(k, s, d) for k, s, d, w, q in edges if w == 0 and q == 0])

    if witness is None and zero_zero is None:
        # all cycles have q = 0 and w > 0: ratio 0
        flat = _negative_cycle(n, [(k, s, d, -w) for k, s, d, w, q in edges])
        if flat is None:
            raise EmptyGraph("graph has no directed cycle")
        return "finite", Fraction(0), flat, iterations
    if witness is None or lam < 1:
        if zero_zero is not None:
            return "finite", Fraction(1), zero_zero, iterations
    return "finite", lam, witness, iterations


def max_ratio_cycle(graph: DualGraph) -> RatioVerdict:
    """Exact maximum-ratio cycle via parametric search; see module docstring."""
    edges, _scale = _prepare(graph)
    n = graph.n_vertices

    # infinite algorithm cost on any cycle settles the verdict immediately
    finite_edges = [e for e in edges if e[4] is not None]
    for k, src, dst, _w, q in edges:
        if q is None:
            path = _bfs_path(n, finite_edges, dst, src)
            if path is not None:
                return RatioVerdict(_make_report(graph, path + [k]), "infinite", 0)
    edges = finite_edges

    kind, lam, witness, iterations = core_max_ratio(n, edges)
    if kind == "infinite":
        return RatioVerdict(_make_report(graph, witness), "infinite", 0)
    if lam > 0 and any(w > 0 for _k, _s, _d, w, _q in edges):
        # prefer the canonical first witness among all max-ratio cycles
        tight = _canonical_tight_cycle(n, edges, lam)
        if tight is not None:
            witness = tight
    return RatioVerdict(_make_report(graph, witness), "finite", iterations)


def _bfs_path(n, edges, start, goal):
    """Shortest edge-id path start -> goal (None if unreachable); start == goal
    gives the empty path."""
    if start == goal:
        return []
    out = _out_arcs(n, [(k, s, d, 0) for k, s, d, w, q in edges])
    seen = {start: None}
    frontier = [start]
    while frontier:
        nxt = []
        for v in frontier:
            for edge_id, dst in out[v]:
                if dst not in seen:
                    seen[dst] = (v, edge_id)
                    if dst == goal:
                        path = []
                        cur = dst
                        while seen[cur] is not None:
                            prev, eid = seen[cur]
                            path.append(eid)
                            cur = prev
                        path.reverse()
                        return path
                    nxt.append(dst)
        frontier = nxt
    return None


def _any_cycle(n, arcs3):
    """First cycle (canonical order) in the subgraph given by (id, src, dst)."""
    out = [[] for _ in range(n)]
    for k, s, d in arcs3:
        out[s].append((k, d))
    for cycle in _simple_cycles(n, out, visit_cap=_TIGHT_SEARCH_CAP):
        return cycle
    return None


def _canonical_tight_cycle(n, edges, lam):
    """First simple cycle achieving ratio exactly lam, in canonical order.

    With shortest-path potentials for weights lam*w - q every edge has
    non-negative reduced weight, and a cycle has ratio lam exactly when
    all its edges are reduced-weight zero and its w is positive.
    """
    a, b = lam.numerator, lam.denominator
    dist = [0] * n
    for _ in range(n):
        changed = False
        for k, s, d, w, q in edges:
            nd = dist[s] + a * w - b * q
            if nd < dist[d]:
                dist[d] = nd
                changed = True
        if not changed:
            break
    tight = [
        (k, s, d, w, q)
        for k, s, d, w, q in edges
        if dist[s] + a * w - b * q - dist[d] == 0
    ]
    out = [[] for _ in range(n)]
    weight = {}
    for k, s, d, w, q in tight:
        out[s].append((k, d))
        weight[k] = w
    for cycle in _simple_cycles(n, out, visit_cap=_TIGHT_SEARCH_CAP):
        if sum(weight[k] for k in cycle) > 0:
            return cycle
    return None


def brute_force_max_ratio(graph: DualGraph) -> RatioVerdict:
    """Independent oracle: enumerate every simple directed cycle."""
    if graph.n_vertices > BRUTE_FORCE_VERTEX_GUARD:
        raise GraphTooLarge(
            f"{graph.n_vertices} vertices exceed the brute-force guard "
            f"{BRUTE_FORCE_VERTEX_GUARD}"
        )
    edges, _scale = _prepare(graph)
    out = [[] for _ in range(graph.n_vertices)]
    for k, s, d, w, q in edges:
        out[s].append((k, d))
    best = None  # (ratio Cost, edge_ids)
    for cycle in _simple_cycles(graph.n_vertices, out):
        report_q = cost_sum(graph.edges[k].q for k in cycle)
        report_w = cost_sum(graph.edges[k].w for k in cycle)
        ratio = _cycle_ratio(report_q, report_w)
        if best is None or ratio > best[0]:
            best = (ratio, cycle)
    if best is None:
        raise EmptyGraph("graph has no directed cycle")
    report = _make_report(graph, best[1])
    classification = "infinite" if report.ratio == POS_INF else "finite"
    return RatioVerdict(report, classification, 0)


def evaluate_policy(problem, policy, horizon=None) -> RatioVerdict:
    """Competitive ratio of a policy: build its dual graph, solve for the
    maximum-ratio cycle."""
    if isinstance(policy, RandomizedPolicy):
        graph = build_graph_rand(problem, policy, horizon)
    else:
        graph = build_graph_det(problem, policy, horizon)
    return max_ratio_cycle(graph)
