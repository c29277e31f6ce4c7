import numpy as np
import pytest

from hamperm.contraction import NotHamiltonian
from hamperm.decomposition import replay
from hamperm.errors import InputError
from hamperm.generators import d_k_in_k_out, planted
from hamperm.graph import Graph, complete_graph
from hamperm.solver import (
    ENV_DEPTH,
    ENV_FANOUT,
    Candidate,
    SolveConfig,
    _Search,
    probe_segment_potdtc,
    solve,
    solve_portfolio,
    solver_rng,
)
from hamperm.tour import Potdtc, build_tour, is_admissible, score
from hamperm.verify import verify


def conserved(trace):
    """Pseudo count after each move equals the count before minus its SCORE."""
    prev = None
    for ev in trace:
        if ev.score is None:
            prev = ev.pseudo
            continue
        if ev.pseudo != prev - ev.score:
            return False
        prev = ev.pseudo
    return True


@pytest.mark.parametrize("algo", ["g", "g-no-r", "g-heuristic"])
def test_worked_graph_solved(worked25, algo):
    g, _ = worked25
    res = solve(g, SolveConfig(algorithm=algo, seed=1))
    assert res.found and verify(g, res.tour.order)
    assert conserved(res.trace)


def test_known_answer_verifies(worked25):
    g, circuit = worked25
    assert verify(g, circuit.order)


@pytest.mark.parametrize("algo", ["g", "g-no-r", "g-heuristic"])
def test_contracted_fixture_solved(chains25_contracted, algo):
    res = solve(chains25_contracted, SolveConfig(algorithm=algo, seed=0))
    assert res.found and verify(chains25_contracted, res.tour.order)


def test_solve_with_contraction_returns_original_ids(chains25):
    res = solve(chains25, SolveConfig(seed=0, contract=True))
    assert res.found and res.tour.n == 25 and verify(chains25, res.tour.order)


def test_structural_failures():
    with pytest.raises(NotHamiltonian) as err:
        solve(Graph(4, [(1, 2), (1, 3), (1, 4)]))
    assert err.value.vertex == 2
    two_triangles = Graph(6, [(1, 2), (2, 3), (3, 1), (4, 5), (5, 6), (6, 4)])
    with pytest.raises(NotHamiltonian, match="connected"):
        solve(two_triangles)
    with pytest.raises(InputError):
        solve(complete_graph(5), SolveConfig(algorithm="d"))
    with pytest.raises(InputError):
        solve(complete_graph(5, directed=True), SolveConfig(algorithm="g"))
    with pytest.raises(InputError):
        SolveConfig(algorithm="x")


def test_rank_prefers_degree_two_pseudo_vertex(worked25):
    g, _ = worked25
    search = _Search(g, SolveConfig(algorithm="g-no-r"), solver_rng(0), str)
    search.reset(build_tour(range(1, 26)))
    rival, winner = Potdtc(3, 13, 5, 17), Potdtc(3, 13, 5, 15)
    cands = [Candidate(m, score(search.t, g, m), 3) for m in (rival, winner)]
    assert [c.score for c in cands] == [3, 3]
    assert search.rank(cands)[0].move == winner


def test_rank_prefers_higher_score(worked25):
    g, _ = worked25
    search = _Search(g, SolveConfig(), solver_rng(0), str)
    search.reset(build_tour(range(1, 26)))
    moves = [Potdtc(3, 13, 5, 15), Potdtc(3, 13, 5, 17)]
    cands = [Candidate(m, s, 3) for m, s in zip(moves, (1, 2))]
    assert search.rank(cands)[0].move == moves[1]


# segment probe ------------------------------------------------------------------

ID10 = build_tour(range(1, 11))
# one pseudo-arc (10, 1); (10 4) alone would split 1..4 off, (2 7) rejoins it
PROBE = Graph(10, [(i, i + 1) for i in range(1, 10)] + [(4, 1), (10, 5), (2, 8), (7, 3)])


def test_probe_finds_crossing_pair():
    m = probe_segment_potdtc(ID10, PROBE, 10, 4, 3, np.random.default_rng(0))
    assert m == Potdtc(10, 4, 2, 7)
    assert is_admissible(ID10, m) and score(ID10, PROBE, m) == 1


def test_probe_empty_segment():
    assert probe_segment_potdtc(ID10, PROBE, 10, 1, 3, np.random.default_rng(0)) is None


def test_probe_determinism():
    g = complete_graph(30)
    t = build_tour(range(1, 31))
    first = probe_segment_potdtc(t, g, 30, 12, 4, np.random.default_rng(7))
    assert first == probe_segment_potdtc(t, g, 30, 12, 4, np.random.default_rng(7))


# runs ---------------------------------------------------------------------------


def test_determinism():
    g, _ = planted(40, 60, 3)
    a = solve(g, SolveConfig(seed=9, contract=True))
    b = solve(g, SolveConfig(seed=9, contract=True))
    assert a.trace == b.trace and a.tour == b.tour


def test_greedy_never_increases_pseudo_count():
    for seed in range(5):
        g, _ = planted(50, 100, seed)
        res = solve(g, SolveConfig(seed=seed))
        assert all(ev.score is None or ev.score >= 0 for ev in res.trace)
        assert conserved(res.trace)


def test_backtracking_replay_cancels_reverted_moves():
    hits = 0
    for seed in range(10):
        d = d_k_in_k_out(30, 3, seed)
        res = solve(d, SolveConfig(algorithm="d", seed=seed))
        assert conserved(res.trace)
        assert replay(res.start_tour, res.net_moves) == res.work_tour
        hits += res.found
    assert hits >= 5


def test_no_r_on_uncontracted_planted():
    g, _ = planted(40, 40, 11)
    res = solve(g, SolveConfig(algorithm="g-no-r", seed=2))
    assert conserved(res.trace)
    assert replay(res.start_tour, res.net_moves) == res.work_tour
    if res.found:
        assert verify(g, res.tour.order)


def test_exhausted_budget_reports_diagnostics():
    g, _ = planted(60, 60, 1)
    res = solve(g, SolveConfig(seed=0, phase_budget=1))
    assert not res.found and res.outcome == "budget_exhausted"
    assert sum(res.diagnostics.counts.values()) == res.diagnostics.failed_iterations


def test_complement_start():
    g, _ = planted(30, 30, 5)
    res = solve(g, SolveConfig(seed=1, start="complement"))
    assert not any(g.has_arc(u, v) for u, v in res.start_tour.arcs())


def test_full_trace_and_trace_off():
    g, _ = planted(30, 30, 2)
    assert solve(g, SolveConfig(seed=1, trace=False)).trace == []
    full = solve(g, SolveConfig(seed=1, full_trace=True))
    assert full.trace[0].move == "start"


def test_portfolio_lowest_seed_wins(worked25):
    g, _ = worked25
    cfg = SolveConfig(seed=5)
    wins = [s for s in range(5, 9) if solve(g, SolveConfig(seed=s)).found]
    res = solve_portfolio(g, cfg, 4)
    assert res.found and res.seed == wins[0]
    assert solve_portfolio(g, cfg, 4).trace == res.trace


def test_env_overrides(monkeypatch):
    monkeypatch.setenv(ENV_FANOUT, "7")
    monkeypatch.setenv(ENV_DEPTH, "11")
    assert SolveConfig().limits(100)[:2] == (7, 11)
    assert SolveConfig(fanout=4).limits(100)[0] == 4
    monkeypatch.setenv(ENV_FANOUT, "zero")
    with pytest.raises(InputError):
        SolveConfig().limits(100)


def test_default_limits():
    fanout, depth, budget = SolveConfig().limits(100)
    assert (fanout, depth, budget) == (5, 25, 922)
    assert SolveConfig(budget_mult=2).limits(100)[2] == 1844
    assert SolveConfig().limits(5)[0] == 3
