"""
Delay games with a fixed delay function: delay-function arithmetic, the explicit
fixed-delay parity arena used as a brute-force oracle, and a play simulator.

In round i Player I appends f(i) input letters to a buffer of pending inputs, then
Player O answers the oldest pending input with one output letter.
"""
from dataclasses import dataclass, field
import logging
from typing import Optional, Tuple

from tqdm import tqdm

from automata import ParityAutomaton
from machine import StrategyMachine
from paritygame import (
    PLAYER_I,
    PLAYER_NAMES,
    PLAYER_O,
    ArenaBuilder,
    lasso_winner,
    solve,
)
from utils import BudgetError, ParseError, PreconditionError, StrategyError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DelaySpec:
    """
    Delay function f with f(i) = head[i] for i < len(head) and f(i) = tail afterwards

    Attributes
    ----------
    head : tuple
        Leading values f(0), ..., f(k-1)

    tail : int
        Value repeated forever
    """

    head: Tuple[int, ...] = ()
    tail: int = 1

    def __post_init__(self):
        object.__setattr__(self, "head", tuple(int(x) for x in self.head))
        if any(x < 1 for x in self.head) or self.tail < 1:
            raise PreconditionError(f"delay function values must be positive: {self}")

    @classmethod
    def const(cls, d):
        if d < 0:
            raise PreconditionError("delay must be nonnegative")
        return cls((d + 1,), 1)

    @classmethod
    def parse(cls, text):
        """Reads `4,1,1:1` (head values, colon, tail); a bare integer d means const_d."""
        text = text.strip()
        try:
            if ":" not in text:
                return cls.const(int(text))
            head, tail = text.split(":")
            head = tuple(int(x) for x in head.split(",") if x.strip())
            return cls(head, int(tail))
        except ValueError:
            raise ParseError(f"invalid delay function {text!r}")

    def __str__(self):
        return ",".join(str(x) for x in self.head) + f":{self.tail}"

    def value(self, i):
        return self.head[i] if i < len(self.head) else self.tail

    def prefix_sum(self, N):
        """f(0) + ... + f(N), in closed form for huge N."""
        if N < 0:
            return 0
        k = min(N + 1, len(self.head))
        return sum(self.head[:k]) + (N + 1 - k) * self.tail

    def lookahead(self, i):
        """h(i) = f(0) + ... + f(i) - 1: inputs beyond the answered one after round i."""
        return self.prefix_sum(i) - 1

    @property
    def is_bounded(self):
        return self.tail == 1

    @property
    def constant_delay(self):
        """d if f is const_d (up to trailing ones in the head), else None."""
        if not self.is_bounded or not self.head or any(x != 1 for x in self.head[1:]):
            return None
        return self.head[0] - 1

    def dominates(self, other):
        """True iff h_self(i) >= h_other(i) for every round i."""
        if self.tail < other.tail:
            return False
        horizon = max(len(self.head), len(other.head)) + 1
        return all(self.lookahead(i) >= other.lookahead(i) for i in range(horizon))


def f_prime(f: DelaySpec) -> DelaySpec:
    """f'(0) = f(0) + f(1), f'(i) = f(i+1)."""
    return DelaySpec((f.value(0) + f.value(1),) + f.head[2:], f.tail)


def f_double_prime(f: DelaySpec, k: int, max_bits: Optional[int] = None):
    """
    First k values of f''(0) = f(0), f''(i+1) = sum_{j=0}^{2(f''(0)+...+f''(i))} f(j).
    """
    if k < 1:
        raise PreconditionError("k must be at least 1")
    values = [f.value(0)]
    total = values[0]
    while len(values) < k:
        nxt = f.prefix_sum(2 * total)
        if max_bits is not None and nxt.bit_length() > max_bits:
            raise BudgetError(f"f'' value {len(values)} (bits)", nxt.bit_length(), max_bits)
        values.append(nxt)
        total += nxt
    return values


def buffer_bound(f: DelaySpec) -> int:
    """Maximal number of pending inputs in the arena of a bounded delay function."""
    if not f.is_bounded:
        raise PreconditionError(f"delay function {f} has unbounded tail")
    return sum(f.head) - len(f.head) + 1


def arena_size_estimate(A: ParityAutomaton, f: DelaySpec) -> int:
    """Upper estimate of the fixed-delay arena's vertex count."""
    D = buffer_bound(f)
    k = len(A.inputs)
    buffers = sum(k**l for l in range(D + 1))
    return 2 * A.n * buffers * (len(f.head) + 1)


def _round_size(f, r):
    return f.head[r] if r < len(f.head) else 1


def build_delay_arena(A: ParityAutomaton, f: DelaySpec, max_vertices=None):
    """
    Explicit arena of the delay game with bounded f. Labels:

    - ("I", q, buffer, r, k): Player I appends one of the k letters still due in round
      r (rounds beyond the head share r = len(head))
    - ("O", q, buffer, r): Player O answers buffer[0]

    A vertex entered by an O-move has color c(q'), every other vertex color 0. The
    initial vertex is colored like an O-entered one.
    """
    if not f.is_bounded:
        raise PreconditionError(f"delay function {f} has unbounded tail; no finite arena")
    H = len(f.head)
    colors = [int(c) for c in A.colors]
    n_in, n_out = len(A.inputs), len(A.outputs)

    def expand(label):
        if label[0] == "I":
            _, q, buf, r, k = label
            color = colors[q] if k == _round_size(f, r) else 0
            if k > 1:
                succ = [("I", q, buf + (a,), r, k - 1) for a in range(n_in)]
            else:
                succ = [("O", q, buf + (a,), r) for a in range(n_in)]
            return PLAYER_I, color, succ
        _, q, buf, r = label
        r2 = min(r + 1, H)
        succ = [
            ("I", int(A.delta[q, buf[0], b]), buf[1:], r2, _round_size(f, r2))
            for b in range(n_out)
        ]
        return PLAYER_O, 0, succ

    estimate = arena_size_estimate(A, f)
    initial = ("I", A.initial, (), 0, _round_size(f, 0))
    try:
        G = ArenaBuilder(max_vertices, f"delay arena for f={f}").explore(initial, expand)
    except BudgetError:
        raise BudgetError(f"delay arena for f={f}", estimate, max_vertices)
    logger.debug("delay arena for f=%s: %d vertices", f, G.vertex_count)
    return G


@dataclass
class FixedDelayResult:
    """
    Attributes
    ----------
    winner : int
        PLAYER_O or PLAYER_I, from the initial vertex

    strategy : dict
        For O: (q, buffer symbols, round) -> output symbol; for I:
        (q, buffer symbols, round, letters due) -> input symbol. Restricted to the
        winner's region.
    """

    automaton: ParityAutomaton
    delay: DelaySpec
    arena: object
    solution: object
    winner: int
    strategy: dict = field(default_factory=dict)


def solve_fixed_delay(A: ParityAutomaton, d, max_vertices=None) -> FixedDelayResult:
    """Oracle: solves the explicit game with constant delay d (or a bounded DelaySpec)."""
    f = d if isinstance(d, DelaySpec) else DelaySpec.const(d)
    G = build_delay_arena(A, f, max_vertices)
    solution = solve(G)
    winner = solution.winner(0)
    strategy = {}
    for v, w in solution.strategy(winner).items():
        label, succ = G.labels[v], G.labels[w]
        q, buf = label[1], tuple(A.inputs[a] for a in label[2])
        if winner == PLAYER_O:
            b = next(
                b for b in range(len(A.outputs)) if A.delta[q, label[2][0], b] == succ[1]
            )
            strategy[(q, buf, label[3])] = A.outputs[b]
        else:
            strategy[(q, buf, label[3], label[4])] = A.inputs[succ[2][-1]]
    logger.debug("oracle f=%s: winner %s", f, PLAYER_NAMES[winner])
    return FixedDelayResult(A, f, G, solution, winner, strategy)


def minimal_winning_delay(A: ParityAutomaton, d_max, max_vertices=None, progress=False):
    """
    Sweeps the oracle over d = 0..d_max.

    Returns
    -------
    d : int or None
        Least d where O wins, None if I wins up to d_max

    winners : list
        Winner per swept delay
    """
    winners = []
    for d in tqdm(range(d_max + 1), desc="oracle sweep", disable=not progress, leave=False):
        winners.append(solve_fixed_delay(A, d, max_vertices).winner)
        if winners[-1] == PLAYER_O:
            return d, winners
    return None, winners


def oracle_machine(result: FixedDelayResult) -> StrategyMachine:
    """The oracle's winning O-strategy for a constant delay, as a StrategyMachine."""
    d = result.delay.constant_delay
    if result.winner != PLAYER_O or d is None:
        raise PreconditionError("only O-wins of constant-delay games yield machines")
    A, G, strategy = result.automaton, result.arena, result.solution.strategy_O

    def react(label, ia):
        q, buf, r = label
        buf = buf + (ia,)
        if len(buf) <= d:
            return (q, buf, r), None
        v = G.vertex(("O", q, buf, r))
        if v not in strategy:
            raise StrategyError(f"oracle strategy undefined at {G.labels[v]!r}")
        _, q2, rest, r2, _ = G.labels[strategy[v]]
        b = next(b for b in range(len(A.outputs)) if A.delta[q, buf[0], b] == q2)
        return (q2, rest, r2), b

    return StrategyMachine.explore(d, A.inputs, A.outputs, (A.initial, (), 0), react)


class InputStrategy:
    """
    Finite-state Player I: `choose` yields the next input letter, `observe` receives
    each output letter O plays. Memories must be hashable.
    """

    finite_state = True

    def initial(self):
        return None

    def choose(self, memory):
        raise NotImplementedError

    def observe(self, memory, output):
        return memory


class WordInput(InputStrategy):
    """Plays a fixed word cyclically."""

    def __init__(self, word):
        self.word = list(word)
        if not self.word:
            raise PreconditionError("input word must be nonempty")

    def initial(self):
        return 0

    def choose(self, memory):
        return (memory + 1) % len(self.word), self.word[memory]


class ArenaInput(InputStrategy):
    """
    Player I following an oracle's I-strategy. The current (state, pending buffer) is
    looked up, falling back to ever shorter buffer suffixes, so the strategy can be
    replayed under another delay; unmatched positions play `fallback`.
    """

    def __init__(self, result: FixedDelayResult, fallback=None):
        self.A = result.automaton
        self.fallback = fallback if fallback is not None else self.A.inputs[0]
        self.table = {}
        if result.winner == PLAYER_I:
            for (q, buf, _r, _k), a in sorted(result.strategy.items()):
                self.table.setdefault((q, buf), a)

    def initial(self):
        return (self.A.initial, ())

    def choose(self, memory):
        q, buf = memory
        letter = self.fallback
        for start in range(len(buf) + 1):
            if (q, buf[start:]) in self.table:
                letter = self.table[(q, buf[start:])]
                break
        return (q, buf + (letter,)), letter

    def observe(self, memory, output):
        q, buf = memory
        return (self.A.step(q, buf[0], output), buf[1:])


@dataclass
class PlayResult:
    """
    Attributes
    ----------
    trace : list
        Interleaved moves ("I", a) and ("O", b)

    colors : list
        Color of the state entered by each O-move

    verdict : int or None
        Winner of the lasso when a joint configuration repeated

    loop_start : int or None
        Round at which the repeated configuration first occurred
    """

    trace: list
    colors: list
    verdict: Optional[int] = None
    loop_start: Optional[int] = None


def simulate_play(A: ParityAutomaton, f: DelaySpec, strat_I, strat_O, max_rounds=1000):
    """
    Plays strat_I (an InputStrategy) against strat_O (a StrategyMachine, whose
    emissions are queued and taken one per round) for at most max_rounds rounds.
    """
    q = A.initial
    m_I, m_O = strat_I.initial(), strat_O.initial
    pending_in, pending_out = (), ()
    trace, colors = [], []
    seen = {}
    finite = strat_I.finite_state and f.is_bounded
    for i in range(max_rounds):
        if finite:
            config = (min(i, len(f.head)), m_I, m_O, q, pending_in, pending_out)
            if config in seen:
                j = seen[config]
                verdict = lasso_winner(colors[:j], colors[j:])
                return PlayResult(trace, colors, verdict, j)
            seen[config] = i
        for _ in range(f.value(i)):
            m_I, a = strat_I.choose(m_I)
            pending_in += (a,)
            trace.append(("I", a))
            m_O, e = strat_O.step(m_O, a)
            if e is not None:
                pending_out += (e,)
        if not pending_out:
            raise StrategyError(
                f"Player O has no output ready in round {i} (machine delay "
                f"{strat_O.delay} exceeds the lookahead {f.lookahead(i)})"
            )
        b, pending_out = pending_out[0], pending_out[1:]
        a, pending_in = pending_in[0], pending_in[1:]
        q = A.step(q, a, b)
        colors.append(int(A.colors[q]))
        trace.append(("O", b))
        m_I = strat_I.observe(m_I, b)
    return PlayResult(trace, colors)
