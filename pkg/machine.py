"""
Finite-state strategy transducers for Player O with a constant delay: every input letter
yields either an output letter or the wait symbol.
"""
from collections import deque
import logging

import numpy as np

from automata import Alphabet, parse_alphabet
from utils import (
    BudgetError,
    ParseError,
    PreconditionError,
    StrategyError,
    TotalityError,
    check_end,
    parse_header,
    parse_int,
    parse_state,
    parse_state_header,
    require_keys,
    text_lines,
)

logger = logging.getLogger(__name__)

WAIT = None
WAIT_TOKEN = "-"


class StrategyMachine:
    """
    Attributes
    ----------
    delay : int
        Number of leading inputs answered with wait

    inputs, outputs : Alphabet

    next_state : np.ndarray
        Int array (states, |inputs|)

    emission : np.ndarray
        Int array (states, |inputs|); an output index, or -1 for wait

    labels : list or None
        Optional description of each state (not serialized)
    """

    def __init__(self, delay, inputs, outputs, next_state, emission, initial=0, labels=None):
        if delay < 0:
            raise PreconditionError("delay must be nonnegative")
        self.delay = int(delay)
        self.inputs = inputs if isinstance(inputs, Alphabet) else Alphabet(inputs)
        self.outputs = outputs if isinstance(outputs, Alphabet) else Alphabet(outputs)
        if WAIT_TOKEN in self.outputs:
            raise PreconditionError(f"{WAIT_TOKEN!r} is reserved for wait")
        self.next_state = np.array(next_state, dtype=np.int64).reshape(-1, len(self.inputs))
        self.emission = np.array(emission, dtype=np.int64).reshape(-1, len(self.inputs))
        k = self.next_state.shape[0]
        if k < 1 or self.emission.shape != self.next_state.shape:
            raise PreconditionError("transition and emission tables must match")
        if self.next_state.min() < 0 or self.next_state.max() >= k:
            raise PreconditionError("machine transition target out of range")
        if self.emission.min() < -1 or self.emission.max() >= len(self.outputs):
            raise PreconditionError("emission out of range")
        if not 0 <= initial < k:
            raise PreconditionError("initial state out of range")
        self.next_state.setflags(write=False)
        self.emission.setflags(write=False)
        self.initial = int(initial)
        self.labels = labels

    @property
    def state_count(self):
        return self.next_state.shape[0]

    def step(self, s, a):
        """Reads input symbol a in state s; returns (next state, output symbol or WAIT)."""
        ia = self.inputs.index(a)
        e = int(self.emission[s, ia])
        return int(self.next_state[s, ia]), (WAIT if e < 0 else self.outputs[e])

    def run(self, word):
        s = self.initial
        emitted = []
        for a in word:
            s, e = self.step(s, a)
            emitted.append(e)
        return emitted

    def check_contract(self):
        """
        Raises StrategyError unless every input stream gets wait for exactly the first
        `delay` inputs and an output letter afterwards.
        """
        start = (self.initial, 0)
        seen = {start}
        queue = deque([start])
        while queue:
            s, count = queue.popleft()
            for ia in range(len(self.inputs)):
                waits = self.emission[s, ia] < 0
                if waits != (count < self.delay):
                    what = "wait" if waits else "output"
                    raise StrategyError(
                        f"state {s} emits {what} on input {self.inputs[ia]} after "
                        f"{count} inputs with delay {self.delay}"
                    )
                nxt = (int(self.next_state[s, ia]), min(count + 1, self.delay))
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)

    @classmethod
    def explore(cls, delay, inputs, outputs, initial, react, budget=None):
        """
        Builds the reachable machine from an initial label; `react(label, ia)` returns
        (next label, output index or None).
        """
        index = {initial: 0}
        labels = [initial]
        next_state, emission = [], []
        queue = deque([initial])
        while queue:
            label = queue.popleft()
            row_next, row_emit = [], []
            for ia in range(len(inputs)):
                nxt, e = react(label, ia)
                if nxt not in index:
                    if budget is not None and len(labels) >= budget:
                        raise BudgetError("strategy machine", len(labels) + 1, budget)
                    index[nxt] = len(labels)
                    labels.append(nxt)
                    queue.append(nxt)
                row_next.append(index[nxt])
                row_emit.append(-1 if e is None else e)
            next_state.append(row_next)
            emission.append(row_emit)
        logger.debug("explored machine with %d states", len(labels))
        return cls(delay, inputs, outputs, next_state, emission, 0, labels)

    def __repr__(self):
        return f"StrategyMachine(delay={self.delay}, states={self.state_count})"


def delayed_map_machine(inputs, outputs, mapping, delay):
    """Machine answering b_i = mapping[a_i] with the given delay."""
    inputs = inputs if isinstance(inputs, Alphabet) else Alphabet(inputs)
    outputs = outputs if isinstance(outputs, Alphabet) else Alphabet(outputs)
    image = [outputs.index(mapping[a]) for a in inputs]

    def react(pending, ia):
        pending = pending + (ia,)
        if len(pending) <= delay:
            return pending, None
        return pending[1:], image[pending[0]]

    return StrategyMachine.explore(delay, inputs, outputs, (), react)


def parse_strategy(text) -> StrategyMachine:
    lines = text_lines(text)
    header, current = parse_header(
        lines, "strategy", {"delay", "in", "out", "states", "init"}
    )
    last = current[0] if current else 1
    require_keys(header, ["delay", "in", "out", "states", "init"], last)
    lineno, tokens = header["delay"]
    if len(tokens) != 1:
        raise ParseError("'delay:' takes one value", lineno)
    delay = parse_int(tokens[0], lineno, "delay")
    if delay < 0:
        raise ParseError("delay must be nonnegative", lineno)
    inputs, outputs = parse_alphabet(header, "in"), parse_alphabet(header, "out")
    if WAIT_TOKEN in outputs:
        raise ParseError(f"{WAIT_TOKEN!r} is reserved for wait", header["out"][0])
    k, init = parse_state_header(header)

    next_state = np.full((k, len(inputs)), -1, dtype=np.int64)
    emission = np.full((k, len(inputs)), -1, dtype=np.int64)
    end = None
    while current is not None:
        lineno, tokens = current
        last = lineno
        if tokens == ["end"]:
            end = lineno
            break
        if len(tokens) != 6 or tokens[2] != "->" or tokens[4] != "/":
            raise ParseError("expected '<src> <in> -> <dst> / <out or ->'", lineno)
        src = parse_state(tokens[0], k, lineno)
        if tokens[1] not in inputs:
            raise ParseError(f"unknown input symbol {tokens[1]!r}", lineno)
        ia = inputs.index(tokens[1])
        if next_state[src, ia] >= 0:
            raise ParseError(f"duplicate transition for ({src}, {tokens[1]})", lineno)
        next_state[src, ia] = parse_state(tokens[3], k, lineno)
        if tokens[5] != WAIT_TOKEN:
            if tokens[5] not in outputs:
                raise ParseError(f"unknown output symbol {tokens[5]!r}", lineno)
            emission[src, ia] = outputs.index(tokens[5])
        current = next(lines, None)
    check_end(lines, end, last)
    missing = np.argwhere(next_state < 0)
    if len(missing):
        s, ia = (int(x) for x in missing[0])
        raise TotalityError(f"missing transition for ({s}, {inputs[ia]})", end)
    return StrategyMachine(delay, inputs, outputs, next_state, emission, init)


def serialize_strategy(S: StrategyMachine) -> str:
    out = [
        "strategy",
        f"delay: {S.delay}",
        "in: " + " ".join(S.inputs),
        "out: " + " ".join(S.outputs),
        f"states: {S.state_count}",
        f"init: {S.initial}",
    ]
    for s in range(S.state_count):
        for ia, a in enumerate(S.inputs):
            e = int(S.emission[s, ia])
            token = WAIT_TOKEN if e < 0 else S.outputs[e]
            out.append(f"{s} {a} -> {int(S.next_state[s, ia])} / {token}")
    out.append("end")
    return "\n".join(out) + "\n"
