""" Tests for the semigroup game, the finite-delay decision and strategy synthesis"""

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, reject, settings
from hypothesis import strategies as st

from delaygame import solve_fixed_delay
from dpa_strategies import dpas
from machine import StrategyMachine, delayed_map_machine
from monoid import build_profile_automaton
from paritygame import PLAYER_I, PLAYER_O
from sggame import (
    arena_size_bound_holds,
    build_semigroup_game,
    decide_finite_delay,
    synthesize_constant_delay_strategy,
    verify_synthesized,
)
from utils import BudgetError, PreconditionError, StrategyError

COPY = {"0": "0", "1": "1"}
COMPLEMENT = {"0": "1", "1": "0"}

###################################################################################################
# Semigroup game and decision
###################################################################################################


def test_semigroup_game_of_copy(copy_dpa):
    game = build_semigroup_game(copy_dpa)
    G = game.arena
    assert game.infinite == [2]
    assert G.labels[0] == ("init",)
    assert G.successors[0] == (G.vertex(("init2", 2)),)
    answer = G.vertex(("answer", 0, 2, 2))
    assert G.owner[answer] == PLAYER_O
    picks = {G.labels[w] for w in G.successors[answer]}
    assert picks == {("pick", 0, 2, 2), ("pick", 1, 2, 1), ("pick", 1, 2, 2)}
    assert G.colors[G.vertex(("pick", 1, 2, 1))] == 1
    assert arena_size_bound_holds(game)


def test_every_vertex_can_move(ex33_dpa):
    game = build_semigroup_game(ex33_dpa)
    G = game.arena
    for v in range(G.vertex_count):
        assert G.successors[v]
        if G.labels[v][0] == "pick":
            assert len(G.successors[v]) == len(game.infinite)


def test_decide_copy(copy_dpa):
    verdict = decide_finite_delay(copy_dpa)
    assert verdict.winner == PLAYER_O
    assert (verdict.n_prime, verdict.d_prime, verdict.bound) == (3, 1, 5)
    assert verdict.report_lines()[:7] == [
        "WINNER=O",
        "NPRIME=3",
        "DPRIME=1",
        "BOUND=5",
        "MONOID=3",
        "PROFILES=3",
        "WORSTCASE=2*2^256-1",
    ]


def test_decide_infinitely_many_ones(infones_dpa):
    verdict = decide_finite_delay(infones_dpa)
    assert verdict.winner == PLAYER_I
    assert verdict.bound is None
    assert "BOUND=-" in verdict.report_lines()


def test_report_names_the_nprime_reading(copy_dpa):
    lines = decide_finite_delay(copy_dpa).report_lines()
    assert lines[-1].startswith("# NPRIME is the largest minimal automaton size")
    assert "PROFILES counts reachable profiles" in lines[-1]


def test_decide_reuses_profiles_and_respects_budget(ex33_dpa):
    P = build_profile_automaton(ex33_dpa)
    verdict = decide_finite_delay(ex33_dpa, profiles=P)
    assert verdict.game.profiles is P
    with pytest.raises(BudgetError):
        decide_finite_delay(ex33_dpa, profiles=P, max_vertices=10)


@pytest.mark.parametrize("name, least", [("ex33", 3), ("shift1", 1), ("shift3", 3)])
def test_decide_bound_covers_least_delay(request, name, least):
    verdict = decide_finite_delay(request.getfixturevalue(f"{name}_dpa"))
    assert verdict.winner == PLAYER_O
    assert verdict.bound >= least
    assert verdict.d_prime < verdict.n_prime


def small_profiles(A, nprime_cap, max_states=64):
    """The profile automaton of A, rejecting examples past the budgets."""
    try:
        P = build_profile_automaton(A, max_states=max_states)
    except BudgetError:
        reject()
    assume(P.n_prime <= nprime_cap)
    return P


FILTERED = [HealthCheck.filter_too_much, HealthCheck.too_slow]


@settings(max_examples=40, deadline=None, suppress_health_check=FILTERED)
@given(A=dpas(max_states=3, max_colors=3))
def test_decision_agrees_with_oracle(A):
    verdict = decide_finite_delay(A, profiles=small_profiles(A, 4))
    d = 2 * verdict.n_prime - 1
    if verdict.winner == PLAYER_O:
        assert solve_fixed_delay(A, d).winner == PLAYER_O
    else:
        assert all(solve_fixed_delay(A, e).winner == PLAYER_I for e in range(d + 1))


###################################################################################################
# Synthesis and verification
###################################################################################################


def test_synthesize_copy(copy_dpa):
    S = synthesize_constant_delay_strategy(copy_dpa)
    assert S.delay == 5
    S.check_contract()
    assert verify_synthesized(copy_dpa, S, 5)


def test_synthesize_with_longer_blocks(copy_dpa):
    S = synthesize_constant_delay_strategy(copy_dpa, block_length=4)
    assert S.delay == 7
    assert verify_synthesized(copy_dpa, S, 7)


def test_synthesize_rejects_short_blocks(copy_dpa):
    with pytest.raises(PreconditionError):
        synthesize_constant_delay_strategy(copy_dpa, block_length=1)


def test_synthesize_lost_game(infones_dpa):
    assert synthesize_constant_delay_strategy(infones_dpa) is None


def test_synthesize_shift(shift1_dpa):
    S = synthesize_constant_delay_strategy(shift1_dpa)
    assert verify_synthesized(shift1_dpa, S, S.delay)


@pytest.mark.slow
def test_synthesize_delay_three_example(ex33_dpa):
    verdict = decide_finite_delay(ex33_dpa)
    S = synthesize_constant_delay_strategy(ex33_dpa, verdict)
    assert S.delay == verdict.bound
    assert verify_synthesized(ex33_dpa, S, S.delay)


def test_synthesized_machine_emission_count(copy_dpa):
    S = synthesize_constant_delay_strategy(copy_dpa)
    rng = np.random.default_rng(7)
    word = [str(a) for a in rng.integers(0, 2, size=3 * S.delay)]
    emitted = S.run(word)
    assert sum(e is not None for e in emitted) == 2 * S.delay


def test_verify_hand_written_machines(copy_dpa):
    copy = delayed_map_machine(copy_dpa.inputs, copy_dpa.outputs, COPY, 0)
    assert verify_synthesized(copy_dpa, copy, 0)
    complement = delayed_map_machine(copy_dpa.inputs, copy_dpa.outputs, COMPLEMENT, 0)
    assert not verify_synthesized(copy_dpa, complement, 0)
    lagging = delayed_map_machine(copy_dpa.inputs, copy_dpa.outputs, COPY, 2)
    assert verify_synthesized(copy_dpa, lagging, 2)


def test_verify_checks_preconditions(copy_dpa):
    copy = delayed_map_machine(copy_dpa.inputs, copy_dpa.outputs, COPY, 1)
    with pytest.raises(PreconditionError):
        verify_synthesized(copy_dpa, copy, 0)
    other = delayed_map_machine(("a", "b"), copy_dpa.outputs, {"a": "0", "b": "1"}, 0)
    with pytest.raises(PreconditionError):
        verify_synthesized(copy_dpa, other, 0)
    waiting = StrategyMachine(0, copy_dpa.inputs, copy_dpa.outputs, [[0, 0]], [[-1, -1]])
    with pytest.raises(StrategyError):
        verify_synthesized(copy_dpa, waiting, 0)


@settings(max_examples=25, deadline=None, suppress_health_check=FILTERED)
@given(A=dpas(max_states=3, max_colors=3), seed=st.integers(0, 2**16))
def test_synthesized_machines_verify(A, seed):
    verdict = decide_finite_delay(A, profiles=small_profiles(A, 3))
    if verdict.winner != PLAYER_O:
        return
    S = synthesize_constant_delay_strategy(A, verdict)
    S.check_contract()
    assert verify_synthesized(A, S, S.delay)
    rng = np.random.default_rng(seed)
    word = [A.inputs[i] for i in rng.integers(0, len(A.inputs), size=3 * S.delay)]
    assert sum(e is not None for e in S.run(word)) == 2 * S.delay
