"""Dual-weighted transition graphs for competitive analysis.

For a sum-aggregation problem and a table policy with horizon T, vertices
pair a recent-input window with the adversary's recent outputs; every
edge consumes one new input and one adversary output choice and carries
two costs: w (paid by the adversary's outputs) and q (paid by the
policy). Closed walks then correspond to repeatable input patterns, and
the worst cycle cost ratio q/w is the policy's competitive ratio.

Two constructions are used:

- For r=1 problems whose cost splits into a serving part (new input vs
  new output) plus a switching part (old output vs new output), vertices
  carry exactly the policy's T-input window. The switching part of each
  step is charged one edge early, which telescopes over any cycle.
- Otherwise vertices carry T+r inputs, enough to recompute the policy's
  outputs across a whole cost window, and every edge charges its true
  step cost.

Randomized (behavioral) policies reuse the first construction with
expected serving and switching costs; the adversary still plays concrete
outputs, so the graph structure is unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .errors import (
    GraphTooLarge,
    NotAWalk,
    UnsupportedAggregation,
    UnsupportedProblem,
    ValidationError,
)
from .exact import Cost
from .policies import DeterministicPolicy, RandomizedPolicy, decode_window, window_index
from .problems import LocalProblem

VERTEX_GUARD = 2**22


@dataclass(frozen=True)
class DualEdge:
    src: int
    dst: int
    x: int  # input symbol index consumed by the edge
    b: int  # adversary output symbol index appended by the edge
    w: Cost
    q: Cost


@dataclass(frozen=True)
class DualGraph:
    problem: LocalProblem
    horizon: int  # policy horizon T
    win_len: int  # input symbols per vertex (T, or T+r in the general form)
    n_vertices: int
    edges: tuple
    out_edges: tuple  # vertex -> tuple of edge indices, deterministic order

    @property
    def n_inputs(self):
        return len(self.problem.input_alphabet)

    @property
    def n_outputs(self):
        return len(self.problem.output_alphabet)

    def vertex_parts(self, v):
        """Decode a vertex id into (input window codes, adversary output codes)."""
        r = self.problem.horizon_r
        adv_size = self.n_outputs**r
        win_code, adv_code = divmod(v, adv_size)
        win = decode_window(win_code, self.n_inputs, self.win_len)
        adv = decode_window(adv_code, self.n_outputs, r)
        return win, adv

    def vertex_label(self, v):
        win, adv = self.vertex_parts(v)
        xs = "".join(self.problem.input_alphabet.symbols[i] for i in win)
        ys = "".join(self.problem.output_alphabet.symbols[i] for i in adv)
        return f"{xs}|{ys}" if ys else xs

    def dump(self) -> str:
        """Debug/oracle text form with exact rationals."""
        lines = [
            f"# dual graph: problem={self.problem.name} T={self.horizon} "
            f"vertices={self.n_vertices} edges={len(self.edges)}"
        ]
        for v in range(self.n_vertices):
            lines.append(f"vertex {v} {self.vertex_label(v)}")
        for k, e in enumerate(self.edges):
            x = self.problem.input_alphabet.symbols[e.x]
            b = self.problem.output_alphabet.symbols[e.b]
            lines.append(
                f"edge {k} {e.src} -> {e.dst} input={x} adversary={b} w={e.w} q={e.q}"
            )
        return "\n".join(lines)


def _check_sum(problem):
    if problem.aggregation != "sum":
        raise UnsupportedAggregation(
            "cycle analysis is defined for sum aggregation only"
        )


def serve_switch_split(problem: LocalProblem):
    """Split an r=1 cost table into serve(x_prev, x, y) + switch(y_prev, y).

    Returns (serve, switch) lookup dicts over symbol indices, or None when
    the table does not decompose (or touches an infinity).
    """
    if problem.horizon_r != 1:
        return None
    xs = problem.input_alphabet.symbols
    ys = problem.output_alphabet.symbols
    serve = {}
    for a, b, d in product(range(len(xs)), range(len(xs)), range(len(ys))):
        cost = problem.lookup_cost((xs[a], xs[b]), (ys[d], ys[d]))
        if not cost.is_finite:
            return None
        serve[a, b, d] = cost.as_fraction()
    switch = {}
    a0 = b0 = 0
    for c, d in product(range(len(ys)), repeat=2):
        cost = problem.lookup_cost((xs[a0], xs[b0]), (ys[c], ys[d]))
        if not cost.is_finite:
            return None
        switch[c, d] = cost.as_fraction() - serve[a0, b0, d]
    for a, b in product(range(len(xs)), repeat=2):
        for c, d in product(range(len(ys)), repeat=2):
            cost = problem.lookup_cost((xs[a], xs[b]), (ys[c], ys[d]))
            if not cost.is_finite:
                return None
            if cost.as_fraction() != serve[a, b, d] + switch[c, d]:
                return None
    return serve, switch


@dataclass(frozen=True)
class GraphSkeleton:
    """Policy-independent part of a dual graph for an r=1 serve/switch problem.

    Per edge: source vertex, target vertex, source window code, target
    window code, consumed input, appended adversary output, and w. The
    policy only contributes q = serve(x at A(src window)) +
    switch(A(src window) -> A(target window)).
    """

    problem: LocalProblem
    horizon: int
    n_vertices: int
    edge_struct: tuple  # (src, dst, src_win, dst_win, x, b) per edge
    w_costs: tuple  # Fraction per edge
    serve: dict
    switch: dict


def build_skeleton(problem: LocalProblem, horizon: int) -> GraphSkeleton:
    _check_sum(problem)
    split = serve_switch_split(problem)
    if split is None:
        raise UnsupportedProblem(
            f"problem {problem.name!r} does not split into serve + switch costs"
        )
    serve, switch = split
    xs = problem.input_alphabet.symbols
    ys = problem.output_alphabet.symbols
    nx, ny = len(xs), len(ys)
    n_windows = nx**horizon
    if n_windows * ny > VERTEX_GUARD:
        raise GraphTooLarge(f"{n_windows * ny} vertices exceed guard {VERTEX_GUARD}")
    edge_struct = []
    w_costs = []
    base_drop = nx ** (horizon - 1)
    for win in range(n_windows):
        newest = _newest_symbol(win, nx)
        succ_base = (win % base_drop) * nx
        for b in range(ny):
            src = win * ny + b
            for x in range(nx):
                dst_win = succ_base + x
                for b2 in range(ny):
                    w = problem.lookup_cost((xs[newest], xs[x]), (ys[b], ys[b2]))
                    edge_struct.append((src, dst_win * ny + b2, win, dst_win, x, b2))
                    w_costs.append(w.as_fraction())
    return GraphSkeleton(
        problem=problem,
        horizon=horizon,
        n_vertices=n_windows * ny,
        edge_struct=tuple(edge_struct),
        w_costs=tuple(w_costs),
        serve=serve,
        switch=switch,
    )


def _newest_symbol(win_code, base):
    return win_code % base


_skeleton_cache = {}


def cached_skeleton(problem, horizon):
    key = (id(problem), horizon)
    skel = _skeleton_cache.get(key)
    if skel is None or skel.problem is not problem:
        skel = build_skeleton(problem, horizon)
        _skeleton_cache[key] = skel
    return skel


def _check_policy_alphabets(problem, policy):
    if (
        policy.input_alphabet.symbols != problem.input_alphabet.symbols
        or policy.output_alphabet.symbols != problem.output_alphabet.symbols
    ):
        raise ValidationError("policy and problem alphabets differ")


def build_graph_det(problem: LocalProblem, policy: DeterministicPolicy, horizon=None):
    """Dual graph of a deterministic table policy."""
    _check_sum(problem)
    if horizon is None:
        horizon = policy.horizon
    if horizon != policy.horizon:
        raise ValidationError("horizon argument disagrees with the policy table")
    _check_policy_alphabets(problem, policy)
    if problem.horizon_r == 1 and serve_switch_split(problem) is not None:
        skel = cached_skeleton(problem, horizon)
        table = policy.table
        edges = []
        for k, (src, dst, src_win, dst_win, x, b2) in enumerate(skel.edge_struct):
            ya = table[src_win]
            yb = table[dst_win]
            q = skel.serve[_newest_symbol(src_win, len(problem.input_alphabet)), x, ya] + skel.switch[ya, yb]
            edges.append(DualEdge(src, dst, x, b2, Cost(skel.w_costs[k]), Cost(q)))
        return _finish_graph(problem, horizon, horizon, skel.n_vertices, edges)
    return _build_graph_general(problem, policy, horizon)


def build_graph_rand(problem: LocalProblem, policy: RandomizedPolicy, horizon=None):
    """Dual graph of a behavioral randomized policy (expected algorithm costs)."""
    _check_sum(problem)
    if horizon is None:
        horizon = policy.horizon
    if horizon != policy.horizon:
        raise ValidationError("horizon argument disagrees with the policy table")
    _check_policy_alphabets(problem, policy)
    if problem.horizon_r != 1:
        raise UnsupportedProblem("randomized graphs require r = 1")
    if len(problem.output_alphabet) != 2:
        raise UnsupportedProblem("randomized graphs require a binary output alphabet")
    skel = cached_skeleton(problem, horizon)  # raises UnsupportedProblem if no split
    table = policy.table
    nx = len(problem.input_alphabet)
    edges = []
    for k, (src, dst, src_win, dst_win, x, b2) in enumerate(skel.edge_struct):
        p = table[src_win]  # P(output "1") on the source window
        p2 = table[dst_win]
        a = _newest_symbol(src_win, nx)
        q_serve = (1 - p) * skel.serve[a, x, 0] + p * skel.serve[a, x, 1]
        q_switch = p * (1 - p2) * skel.switch[1, 0] + (1 - p) * p2 * skel.switch[0, 1]
        edges.append(DualEdge(src, dst, x, b2, Cost(skel.w_costs[k]), Cost(q_serve + q_switch)))
    return _finish_graph(problem, horizon, horizon, skel.n_vertices, edges)


def _build_graph_general(problem, policy, horizon):
    """Conservative construction: vertices carry T+r inputs and r adversary
    outputs, so every edge charges the true step cost of both parties."""
    r = problem.horizon_r
    xs = problem.input_alphabet.symbols
    ys = problem.output_alphabet.symbols
    nx, ny = len(xs), len(ys)
    win_len = horizon + r
    n_windows = nx**win_len
    adv_size = ny**r
    if n_windows * adv_size > VERTEX_GUARD:
        raise GraphTooLarge(
            f"{n_windows * adv_size} vertices exceed guard {VERTEX_GUARD}"
        )
    edges = []
    for win in range(n_windows):
        win_syms = decode_window(win, nx, win_len)
        for adv in range(adv_size):
            adv_syms = decode_window(adv, ny, r)
            src = win * adv_size + adv
            for x in range(nx):
                ext = win_syms + (x,)  # inputs x_{i-T-r+1} .. x_{i+1}
                x_window = tuple(xs[i] for i in ext[-(r + 1) :])
                # policy outputs at steps i+1-r .. i+1
                y_alg = tuple(
                    ys[policy.table[window_index(ext[j : j + horizon], nx)]]
                    for j in range(r + 1)
                )
                q = problem.lookup_cost(x_window, y_alg)
                dst_win = window_index(ext[1:], nx)
                for b2 in range(ny):
                    y_adv = tuple(ys[i] for i in adv_syms) + (ys[b2],)
                    w = problem.lookup_cost(x_window, y_adv)
                    dst = dst_win * adv_size + ((adv * ny + b2) % adv_size if r else 0)
                    edges.append(DualEdge(src, dst, x, b2, w, q))
    return _finish_graph(problem, horizon, win_len, n_windows * adv_size, edges)


def _finish_graph(problem, horizon, win_len, n_vertices, edges):
    out = [[] for _ in range(n_vertices)]
    for k, e in enumerate(edges):
        out[e.src].append(k)
    return DualGraph(
        problem=problem,
        horizon=horizon,
        win_len=win_len,
        n_vertices=n_vertices,
        edges=tuple(edges),
        out_edges=tuple(tuple(ids) for ids in out),
    )


def induced_input(graph: DualGraph, cycle_edges):
    """Per-edge new-input symbols of a closed walk, oldest first."""
    if not cycle_edges:
        raise NotAWalk("empty edge sequence")
    edges = [graph.edges[k] if isinstance(k, int) else k for k in cycle_edges]
    for e, nxt in zip(edges, edges[1:] + edges[:1]):
        if e.dst != nxt.src:
            raise NotAWalk(f"edge into {e.dst} followed by edge from {nxt.src}")
    symbols = graph.problem.input_alphabet.symbols
    return tuple(symbols[e.x] for e in edges)


def adversary_outputs(graph: DualGraph, cycle_edges):
    """Per-edge adversary output symbols of a closed walk."""
    edges = [graph.edges[k] if isinstance(k, int) else k for k in cycle_edges]
    symbols = graph.problem.output_alphabet.symbols
    return tuple(symbols[e.b] for e in edges)
