import random
from fractions import Fraction

import pytest

from conftest import make_graph, random_dual_graph
from tlsynth.debruijn import adversary_outputs, build_graph_det
from tlsynth.errors import EmptyGraph, GraphTooLarge
from tlsynth.exact import POS_INF, Cost
from tlsynth.policies import DeterministicPolicy, run_policy
from tlsynth.problems import Alphabet, offline_opt
from tlsynth.ratiocycle import (
    _simple_cycles,
    brute_force_max_ratio,
    evaluate_policy,
    max_ratio_cycle,
    walk_ratio,
)

BIN = Alphabet(("0", "1"))


# -- small fixed graphs --------------------------------------------------------


def test_single_self_loop(migration_problem):
    graph = make_graph(migration_problem, 1, [(0, 0, 1, 3)])
    verdict = max_ratio_cycle(graph)
    assert verdict.classification == "finite"
    assert verdict.best.ratio == Cost(3)


def test_two_cycle_ratio(migration_problem):
    graph = make_graph(migration_problem, 2, [(0, 1, 1, 1), (1, 0, 1, 4)])
    verdict = max_ratio_cycle(graph)
    assert verdict.best.ratio == Cost(Fraction(5, 2))
    assert brute_force_max_ratio(graph).best.ratio == Cost(Fraction(5, 2))


def test_zero_w_positive_q_is_infinite(migration_problem):
    graph = make_graph(migration_problem, 1, [(0, 0, 0, 1)])
    verdict = max_ratio_cycle(graph)
    assert verdict.classification == "infinite"
    assert verdict.best.ratio == POS_INF
    assert brute_force_max_ratio(graph).classification == "infinite"


def test_all_zero_cycles_rate_one(migration_problem):
    graph = make_graph(migration_problem, 2, [(0, 1, 0, 0), (1, 0, 0, 0)])
    verdict = max_ratio_cycle(graph)
    assert verdict.classification == "finite"
    assert verdict.best.ratio == Cost(1)
    assert verdict.best.q == Cost(0) and verdict.best.w == Cost(0)


def test_zero_zero_cycle_beats_small_ratio(migration_problem):
    graph = make_graph(
        migration_problem, 2, [(0, 0, 2, 1), (0, 1, 0, 0), (1, 0, 0, 0)]
    )
    assert max_ratio_cycle(graph).best.ratio == Cost(1)
    assert brute_force_max_ratio(graph).best.ratio == Cost(1)


def test_all_q_zero_gives_ratio_zero(migration_problem):
    graph = make_graph(migration_problem, 1, [(0, 0, 3, 0)])
    assert max_ratio_cycle(graph).best.ratio == Cost(0)
    assert brute_force_max_ratio(graph).best.ratio == Cost(0)


def test_infinite_w_edges_are_ignored(migration_problem):
    graph = make_graph(
        migration_problem, 1, [(0, 0, POS_INF, Cost(100)), (0, 0, 1, 2)]
    )
    assert max_ratio_cycle(graph).best.ratio == Cost(2)
    assert brute_force_max_ratio(graph).best.ratio == Cost(2)


def test_infinite_q_cycle_is_infinite(migration_problem):
    graph = make_graph(migration_problem, 2, [(0, 1, 1, POS_INF), (1, 0, 1, 1)])
    verdict = max_ratio_cycle(graph)
    assert verdict.classification == "infinite"
    assert brute_force_max_ratio(graph).classification == "infinite"


def test_negative_costs_rejected(migration_problem):
    graph = make_graph(migration_problem, 1, [(0, 0, 1, -1)])
    with pytest.raises(ValueError):
        max_ratio_cycle(graph)


def test_empty_graph(migration_problem):
    graph = make_graph(migration_problem, 0, [])
    with pytest.raises(EmptyGraph):
        max_ratio_cycle(graph)


def test_brute_force_guard(migration_problem):
    quads = [(v, (v + 1) % 15, 1, 1) for v in range(15)]
    graph = make_graph(migration_problem, 15, quads)
    with pytest.raises(GraphTooLarge):
        brute_force_max_ratio(graph)


# -- oracle equivalence ---------------------------------------------------------


def test_oracle_equivalence_sample(migration_problem):
    rng = random.Random(99)
    for _ in range(120):
        graph = random_dual_graph(migration_problem, rng)
        fast = max_ratio_cycle(graph)
        slow = brute_force_max_ratio(graph)
        assert fast.classification == slow.classification
        assert fast.best.ratio == slow.best.ratio


def test_witness_validity(migration_problem):
    rng = random.Random(5)
    for _ in range(60):
        graph = random_dual_graph(migration_problem, rng)
        verdict = max_ratio_cycle(graph)
        report = verdict.best
        q = sum((graph.edges[k].q for k in report.edge_ids), Cost(0))
        w = sum((graph.edges[k].w for k in report.edge_ids), Cost(0))
        assert q == report.q and w == report.w
        assert walk_ratio(graph, report.edge_ids) == report.ratio
        # closed and interior non-repeating
        assert report.vertices[0] == report.vertices[-1]
        interior = report.vertices[:-1]
        assert len(set(interior)) == len(interior)


def test_termination_iteration_bound(migration_problem):
    rng = random.Random(31)
    for _ in range(40):
        graph = random_dual_graph(migration_problem, rng, max_vertices=8)
        out = [[] for _ in range(graph.n_vertices)]
        for k, e in enumerate(graph.edges):
            out[e.src].append((k, e.dst))
        n_cycles = sum(1 for _ in _simple_cycles(graph.n_vertices, out))
        verdict = max_ratio_cycle(graph)
        assert verdict.iterations <= n_cycles


# -- walk decomposition ----------------------------------------------------------


def test_walk_decomposition_dominance(migration_problem):
    rng = random.Random(13)
    for _ in range(80):
        graph = random_dual_graph(migration_problem, rng, max_vertices=8)
        start = rng.randrange(graph.n_vertices)
        v, walk = start, []
        for _ in range(60):
            k = rng.choice(graph.out_edges[v])
            walk.append(k)
            v = graph.edges[k].dst
            if v == start and len(walk) >= 2:
                break
        if v != start:
            continue
        total = walk_ratio(graph, walk)
        pieces = sorted(rng.sample(range(1, len(walk)), min(2, len(walk) - 1)))
        parts = []
        prev = 0
        for cut in pieces + [len(walk)]:
            parts.append(walk[prev:cut])
            prev = cut
        assert max(walk_ratio(graph, part) for part in parts) >= total


# -- evaluate_policy --------------------------------------------------------------


def test_always_zero_policy_is_infinite(migration_problem):
    policy = DeterministicPolicy(1, BIN, BIN, (0, 0))
    verdict = evaluate_policy(migration_problem, policy)
    assert verdict.classification == "infinite"


def test_follow_the_request_ratio_four(migration_problem):
    policy = DeterministicPolicy.from_entries(1, BIN, BIN, {"0": "0", "1": "1"})
    verdict = evaluate_policy(migration_problem, policy)
    assert verdict.classification == "finite"
    assert verdict.best.ratio == Cost(4)


@pytest.mark.parametrize("alpha,expected", [("1", 5), ("2", 7), ("1/2", 4)])
def test_or_candidate_pays_three_plus_two_alpha(alpha, expected):
    from tlsynth.problems import bundled_problem

    problem = bundled_problem("file-migration", {"alpha": alpha})
    policy = DeterministicPolicy.from_entries(
        2, BIN, BIN, {"00": "0", "01": "1", "10": "1", "11": "1"}
    )
    graph = build_graph_det(problem, policy)
    verdict = max_ratio_cycle(graph)
    assert verdict.best.ratio == Cost(Fraction(expected))
    assert verdict.best.w == Cost(1)
    assert brute_force_max_ratio(graph).best.ratio == verdict.best.ratio
    # the witness pattern has two quiet steps and one remote request
    assert sorted(verdict.best.induced) == ["0", "0", "1"]
    assert set(adversary_outputs(graph, verdict.best.edge_ids)) == {"0"}


def test_empirical_consistency_of_witness(migration_problem):
    policy = DeterministicPolicy.from_entries(
        2, BIN, BIN, {"00": "0", "01": "1", "10": "1", "11": "1"}
    )
    verdict = evaluate_policy(migration_problem, policy)
    ratio = verdict.best.ratio.as_fraction()
    reps = 60
    seq = verdict.best.induced * reps
    alg = migration_problem.evaluate(seq, run_policy(policy, seq)).total.as_fraction()
    opt, _ = offline_opt(migration_problem, seq)
    bound = (2 + 1) * Fraction(2)  # (T + r) * max rule cost at alpha 1
    assert alg >= ratio * (opt.as_fraction() - bound) - bound
