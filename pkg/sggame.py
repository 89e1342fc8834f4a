"""
The delay-independent semigroup game: Player I picks ≈-classes (profiles) of input
blocks one block ahead, Player O answers each pending block with a color matrix from its
profile. O wins it iff O wins the delay game with some finite delay, and then a constant
delay 2n'-1 suffices; a winning O-strategy is turned into a StrategyMachine by buffering
input blocks of length n'.
"""
from dataclasses import dataclass
import logging
from typing import Optional

from automata import ParityAutomaton
from machine import StrategyMachine
from monoid import (
    NPRIME_NOTE,
    ProfileAutomaton,
    build_profile_automaton,
    enumerate_monoid,
    find_matching_output,
    worst_case_bound_text,
)
from paritygame import (
    PLAYER_I,
    PLAYER_NAMES,
    PLAYER_O,
    ArenaBuilder,
    ParityGameArena,
    Solution,
    solve,
    verify_positional_strategy,
)
from utils import PreconditionError, StrategyError, ceil_log2_exceeds

logger = logging.getLogger(__name__)


@dataclass
class SemigroupGame:
    """
    Attributes
    ----------
    arena : ParityGameArena
        Labels are ("init",), ("init2", P0), ("answer", q, P_pending, P_next) and
        ("pick", q, P_pending, color), profiles given by their index in `profiles`

    profiles : ProfileAutomaton

    infinite : list
        Indices of the infinite-language profiles offered to Player I
    """

    automaton: ParityAutomaton
    profiles: ProfileAutomaton
    arena: ParityGameArena
    infinite: list

    @property
    def initial(self):
        return 0


def build_semigroup_game(A: ParityAutomaton, profiles=None, max_vertices=None):
    if profiles is None:
        profiles = build_profile_automaton(A)
    infinite = [
        s for s in range(1, profiles.state_count) if not profiles.language_finite[s]
    ]
    assert infinite, "some profile has an infinite language"
    states = profiles.states

    def expand(label):
        kind = label[0]
        if kind == "init":
            return PLAYER_I, 0, [("init2", P0) for P0 in infinite]
        if kind == "init2":
            return PLAYER_I, 0, [("answer", A.initial, label[1], P1) for P1 in infinite]
        if kind == "answer":
            _, q, pending, nxt = label
            return PLAYER_O, 0, [
                ("pick", M.targets[q], nxt, M.colors[q]) for M in states[pending]
            ]
        _, q, pending, _color = label
        return PLAYER_I, label[3], [("answer", q, pending, P) for P in infinite]

    G = ArenaBuilder(max_vertices, "semigroup game").explore(("init",), expand)
    logger.debug("semigroup game: %d vertices, %d infinite profiles", G.vertex_count, len(infinite))
    return SemigroupGame(A, profiles, G, infinite)


def arena_size_bound_holds(game: SemigroupGame) -> bool:
    """
    Checks the vertex count against profiles² · n · (m+1) + opening vertices and against
    2^(2(mn)^n) · mn (m the number of colors).
    """
    A = game.automaton
    vc = game.arena.vertex_count
    k = game.profiles.state_count
    shape = k * k * A.n * (A.m + 1) + 1 + len(game.infinite)
    mn = len(A.color_set) * A.n
    return vc <= shape and not ceil_log2_exceeds(-(-vc // mn), 2 * mn**A.n)


@dataclass
class DelayVerdict:
    winner: int
    n_prime: int
    d_prime: int
    profile_count: int
    monoid_size: int
    worst_case: str
    game: SemigroupGame
    solution: Solution

    @property
    def bound(self) -> Optional[int]:
        return 2 * self.n_prime - 1 if self.winner == PLAYER_O else None

    def report_lines(self):
        lines = [
            f"WINNER={PLAYER_NAMES[self.winner]}",
            f"NPRIME={self.n_prime}",
            f"DPRIME={self.d_prime}",
            f"BOUND={self.bound if self.bound is not None else '-'}",
            f"MONOID={self.monoid_size}",
            f"PROFILES={self.profile_count}",
            f"WORSTCASE={self.worst_case}",
        ]
        if self.winner == PLAYER_O:
            lines.append(
                f"# O wins with finite delay (constant delay {self.bound} suffices); "
                "equivalently a continuous operator solves the specification"
            )
        else:
            lines.append(
                "# I wins for every delay function; no continuous operator solves "
                "the specification"
            )
        lines.append(NPRIME_NOTE)
        return lines


def decide_finite_delay(A: ParityAutomaton, profiles=None, max_vertices=None) -> DelayVerdict:
    """Solves the semigroup game; `profiles` reuses an already built ProfileAutomaton."""
    game = build_semigroup_game(A, profiles, max_vertices)
    solution = solve(game.arena)
    verdict = DelayVerdict(
        winner=solution.winner(game.initial),
        n_prime=game.profiles.n_prime,
        d_prime=game.profiles.d_prime,
        profile_count=game.profiles.state_count,
        monoid_size=len(enumerate_monoid(A)),
        worst_case=worst_case_bound_text(A),
        game=game,
        solution=solution,
    )
    logger.debug("decided %r: %s", A, verdict.report_lines()[0])
    return verdict


def synthesize_constant_delay_strategy(
    A: ParityAutomaton, verdict=None, block_length=None, max_states=None
) -> Optional[StrategyMachine]:
    """
    Builds a StrategyMachine with delay 2N-1 (N = n' unless `block_length` is given),
    or returns None when Player I wins the semigroup game.

    Inputs are cut into blocks of length N. When block i+1 is complete, the positional
    O-strategy at ("answer", q_i, [u_i], [u_{i+1}]) commits a matrix M for u_i; a
    realizing output word v is emitted one letter per input from then on. Machine states
    are (q_i, u_i or None, partial block, remaining letters of the previous v).
    """
    verdict = verdict or decide_finite_delay(A)
    if verdict.winner != PLAYER_O:
        return None
    game, strategy = verdict.game, verdict.solution.strategy_O
    G, profiles = game.arena, game.profiles
    N = block_length or profiles.n_prime
    if N <= profiles.d_prime:
        raise PreconditionError(
            f"block length {N} must exceed d'={profiles.d_prime} so blocks lie in infinite classes"
        )
    cache = {}

    def profile_index(block):
        s = 0
        for a in block:
            s = int(profiles.delta[s, a])
        return s

    def commit(q, block, nxt):
        key = (q, block, profile_index(nxt))
        if key not in cache:
            v = G.vertex(("answer", q, profile_index(block), key[2]))
            if v not in strategy:
                raise StrategyError(f"no O-choice at {G.labels[v]!r}")
            _, q2, _, k = G.labels[strategy[v]]
            P = profiles.states[profile_index(block)]
            M = next(M for M in P if M.targets[q] == q2 and M.colors[q] == k)
            out = find_matching_output(A, [A.inputs[a] for a in block], M)
            assert out is not None, "committed matrix must be realizable"
            cache[key] = (q2, tuple(A.outputs.index(b) for b in out))
        return cache[key]

    def react(label, ia):
        q, pending, buf, queue = label
        buf = buf + (ia,)
        if len(buf) < N:
            if queue:
                return (q, pending, buf, queue[1:]), queue[0]
            return (q, pending, buf, queue), None
        if pending is None:
            return (q, buf, (), ()), None
        assert not queue, "previous block must be fully emitted"
        q2, out = commit(q, pending, buf)
        return (q2, buf, (), out[1:]), out[0]

    S = StrategyMachine.explore(
        2 * N - 1, A.inputs, A.outputs, (A.initial, None, (), ()), react, max_states
    )
    logger.debug("synthesized %r with block length %d", S, N)
    return S


def verify_synthesized(A: ParityAutomaton, S: StrategyMachine, d, max_vertices=None) -> bool:
    """
    Checks that S wins the constant-delay-d game: the product of the game with S is an
    arena where only Player I chooses, and every reachable cycle must be even.
    """
    if S.delay != d:
        raise PreconditionError(f"machine delay {S.delay} differs from {d}")
    if S.inputs != A.inputs or S.outputs != A.outputs:
        raise PreconditionError("machine and automaton alphabets differ")
    colors = [int(c) for c in A.colors]

    def expand(label):
        q, s, pending = label
        color = colors[q] if len(pending) == d else 0
        succ = []
        for ia in range(len(A.inputs)):
            s2, e = int(S.next_state[s, ia]), int(S.emission[s, ia])
            buf = pending + (ia,)
            if len(pending) < d:
                if e >= 0:
                    raise StrategyError(f"machine state {s} outputs before {d} inputs")
                succ.append((q, s2, buf))
            else:
                if e < 0:
                    raise StrategyError(f"machine state {s} waits after {d} inputs")
                succ.append((int(A.delta[q, buf[0], e]), s2, buf[1:]))
        return PLAYER_I, color, succ

    G = ArenaBuilder(max_vertices, "verification product").explore(
        (A.initial, S.initial, ()), expand
    )
    logger.debug("verification product: %d vertices", G.vertex_count)
    return verify_positional_strategy(G, PLAYER_O, {}, 0)
