"""
Classes to represent finite automata over finite words (DFA) and deterministic parity
automata over paired input/output letters (DPA), with their text formats
"""
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from utils import (
    ParseError,
    PreconditionError,
    SymbolError,
    TotalityError,
    check_end,
    parse_header,
    parse_int,
    parse_state,
    parse_state_header,
    require_keys,
    text_lines,
)

# (input symbol, output symbol)
Pair = Tuple[str, str]


@dataclass(frozen=True)
class Alphabet:
    """
    Ordered set of printable tokens

    Attributes
    ----------
    symbols : tuple
        The tokens, in declaration order; a symbol's position is its index everywhere
        in the numeric tables
    """

    symbols: Tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        symbols = tuple(self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if not symbols:
            raise PreconditionError("alphabet must be nonempty")
        if len(set(symbols)) != len(symbols):
            raise PreconditionError(f"alphabet symbols must be distinct: {symbols}")
        for s in symbols:
            if not s or any(ch.isspace() for ch in s) or "#" in s:
                raise PreconditionError(f"invalid symbol {s!r}")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, i):
        return self.symbols[i]

    def __contains__(self, s):
        return s in self._index

    def index(self, s):
        try:
            return self._index[s]
        except KeyError:
            raise SymbolError(f"unknown symbol {s!r} (alphabet: {' '.join(self.symbols)})")


def pair_token(a, b):
    return f"{a}/{b}"


class ParityAutomaton:
    """
    Deterministic max-parity automaton reading pairs (input letter, output letter)

    Attributes
    ----------
    inputs, outputs : Alphabet
        Input and output alphabets

    delta : np.ndarray
        Read-only int array of shape (n, |inputs|, |outputs|); delta[q, a, b] is the
        successor state

    colors : np.ndarray
        Read-only int array of shape (n,)

    initial : int
        Initial state q0
    """

    def __init__(self, inputs, outputs, delta, colors, initial=0):
        self.inputs = inputs if isinstance(inputs, Alphabet) else Alphabet(inputs)
        self.outputs = outputs if isinstance(outputs, Alphabet) else Alphabet(outputs)
        if len(self.inputs) < 2 or len(self.outputs) < 2:
            raise PreconditionError("input and output alphabets need at least two symbols")
        delta = np.array(delta, dtype=np.int64)
        colors = np.array(colors, dtype=np.int64)
        n = len(colors)
        if n < 1:
            raise PreconditionError("automaton needs at least one state")
        if delta.shape != (n, len(self.inputs), len(self.outputs)):
            raise PreconditionError(
                f"transition table has shape {delta.shape}, expected "
                f"{(n, len(self.inputs), len(self.outputs))}"
            )
        if delta.min() < 0 or delta.max() >= n:
            raise PreconditionError("transition target out of range")
        if colors.min() < 0:
            raise PreconditionError("colors must be nonnegative")
        if not 0 <= initial < n:
            raise PreconditionError(f"initial state {initial} out of range 0..{n - 1}")
        delta.setflags(write=False)
        colors.setflags(write=False)
        self.delta = delta
        self.colors = colors
        self.initial = int(initial)

    @property
    def n(self):
        return len(self.colors)

    @property
    def m(self):
        """Color bound: the maximal color used."""
        return int(self.colors.max())

    @property
    def color_set(self):
        return frozenset(int(c) for c in self.colors)

    def step(self, q, a, b):
        """One transition on symbols a (input) and b (output)."""
        return int(self.delta[q, self.inputs.index(a), self.outputs.index(b)])

    def letters(self):
        """All (input index, output index) pairs in canonical order."""
        return [(i, j) for i in range(len(self.inputs)) for j in range(len(self.outputs))]

    def paired_alphabet(self):
        return Alphabet(tuple(pair_token(a, b) for a in self.inputs for b in self.outputs))

    def __eq__(self, other):
        if not isinstance(other, ParityAutomaton):
            return NotImplemented
        return (
            self.inputs == other.inputs
            and self.outputs == other.outputs
            and self.initial == other.initial
            and np.array_equal(self.delta, other.delta)
            and np.array_equal(self.colors, other.colors)
        )

    def __repr__(self):
        return (
            f"ParityAutomaton(n={self.n}, m={self.m}, in={' '.join(self.inputs)}, "
            f"out={' '.join(self.outputs)})"
        )


class FiniteAutomaton:
    """
    Complete deterministic finite automaton

    Attributes
    ----------
    alphabet : Alphabet

    delta : np.ndarray
        Read-only int array of shape (n, |alphabet|)

    initial : int

    finals : frozenset
    """

    def __init__(self, alphabet, delta, finals, initial=0):
        self.alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet)
        delta = np.array(delta, dtype=np.int64).reshape(-1, len(self.alphabet))
        n = delta.shape[0]
        if n < 1:
            raise PreconditionError("automaton needs at least one state")
        if delta.min() < 0 or delta.max() >= n:
            raise PreconditionError("transition target out of range")
        if not 0 <= initial < n:
            raise PreconditionError(f"initial state {initial} out of range 0..{n - 1}")
        finals = frozenset(int(f) for f in finals)
        if any(not 0 <= f < n for f in finals):
            raise PreconditionError("final state out of range")
        delta.setflags(write=False)
        self.delta = delta
        self.initial = int(initial)
        self.finals = finals

    @property
    def state_count(self):
        return self.delta.shape[0]

    def run(self, word):
        q = self.initial
        for s in word:
            q = int(self.delta[q, self.alphabet.index(s)])
        return q

    def accepts(self, word):
        return self.run(word) in self.finals

    def graph(self):
        g = nx.DiGraph()
        g.add_nodes_from(range(self.state_count))
        for q in range(self.state_count):
            for a in range(len(self.alphabet)):
                g.add_edge(q, int(self.delta[q, a]))
        return g

    def __repr__(self):
        return f"FiniteAutomaton(states={self.state_count}, finals={sorted(self.finals)})"


@dataclass(frozen=True)
class Lasso:
    """Ultimately periodic word prefix·cycle^ω over (input, output) pairs."""

    prefix: Tuple[Pair, ...]
    cycle: Tuple[Pair, ...]

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(tuple(p) for p in self.prefix))
        object.__setattr__(self, "cycle", tuple(tuple(p) for p in self.cycle))
        if len(self.cycle) < 1:
            raise PreconditionError("lasso cycle must be nonempty")


def run_prefix(A: ParityAutomaton, w: Sequence[Pair]):
    """
    Runs A on a finite word of pairs.

    Returns
    -------
    states : list
        The |w|+1 visited states, starting at q0

    max_color : int or None
        Maximal color over the states at positions 1..|w|; None on the empty word
    """
    states = [A.initial]
    max_color = None
    for a, b in w:
        q = A.step(states[-1], a, b)
        states.append(q)
        c = int(A.colors[q])
        max_color = c if max_color is None else max(max_color, c)
    return states, max_color


def accepts_lasso(A: ParityAutomaton, lasso: Lasso) -> bool:
    states, _ = run_prefix(A, lasso.prefix)
    q = states[-1]
    cycle = [(A.inputs.index(a), A.outputs.index(b)) for a, b in lasso.cycle]
    seen = {}
    colors = []
    pos = 0
    while (q, pos) not in seen:
        seen[(q, pos)] = len(colors)
        a, b = cycle[pos]
        q = int(A.delta[q, a, b])
        colors.append(int(A.colors[q]))
        pos = (pos + 1) % len(cycle)
    return max(colors[seen[(q, pos)]:]) % 2 == 0


def language_infinite(F: FiniteAutomaton) -> bool:
    g = F.graph()
    useful = _useful_states(F, g)
    return not nx.is_directed_acyclic_graph(g.subgraph(useful))


def _useful_states(F, g=None):
    """States reachable from the initial state and co-reachable to a final state."""
    g = g if g is not None else F.graph()
    reachable = nx.descendants(g, F.initial) | {F.initial}
    coreachable = set(F.finals)
    for f in F.finals:
        coreachable |= nx.ancestors(g, f)
    return reachable & coreachable


def length_witness(F: FiniteAutomaton, i: int):
    """
    Returns an accepted word u with i <= |u| <= i + state_count(F).

    A length-i path through useful states is built layer by layer, then completed with a
    shortest path to a final state.
    """
    if i < 0:
        raise PreconditionError("length must be nonnegative")
    if not language_infinite(F):
        raise PreconditionError("length_witness needs an infinite language")
    useful = _useful_states(F)
    k = len(F.alphabet)
    # parents[j][q] = (state at layer j-1, symbol index)
    parents = [{F.initial: None}]
    for _ in range(i):
        layer = {}
        for q in parents[-1]:
            for a in range(k):
                r = int(F.delta[q, a])
                if r in useful and r not in layer:
                    layer[r] = (q, a)
        assert layer, "infinite language must admit useful paths of every length"
        parents.append(layer)
    q = min(parents[-1])
    word = []
    for j in range(i, 0, -1):
        q, a = parents[j][q]
        word.append(a)
    word.reverse()
    q = min(parents[-1])
    word += _shortest_path_to_final(F, q)
    return [F.alphabet[a] for a in word]


def _shortest_path_to_final(F, start):
    back = {start: None}
    queue = deque([start])
    while queue:
        q = queue.popleft()
        if q in F.finals:
            path = []
            while back[q] is not None:
                q, a = back[q]
                path.append(a)
            return path[::-1]
        for a in range(len(F.alphabet)):
            r = int(F.delta[q, a])
            if r not in back:
                back[r] = (q, a)
                queue.append(r)
    raise PreconditionError(f"no final state reachable from {start}")


def partition_count(delta, accepting) -> int:
    """
    Number of Myhill-Nerode classes of a complete DFA table whose states are all
    reachable, by Moore partition refinement.

    Parameters
    ----------
    delta : np.ndarray
        Int array (states, |alphabet|)

    accepting : np.ndarray
        Bool array (states,)
    """
    blocks = np.asarray(accepting, dtype=np.int64)
    count = len(np.unique(blocks))
    while True:
        signatures = np.column_stack([blocks, blocks[delta]])
        _, blocks = np.unique(signatures, axis=0, return_inverse=True)
        blocks = blocks.reshape(-1)
        new_count = int(blocks.max()) + 1
        if new_count == count:
            return count
        count = new_count


def minimal_size(F: FiniteAutomaton) -> int:
    """
    Number of states of the minimal complete DFA for L(F), by Moore partition refinement
    on the reachable part.
    """
    reachable = np.array(sorted(nx.descendants(F.graph(), F.initial) | {F.initial}))
    relabel = np.full(F.state_count, -1, dtype=np.int64)
    relabel[reachable] = np.arange(len(reachable))
    delta = relabel[F.delta[reachable]]
    return partition_count(delta, [int(q) in F.finals for q in reachable])


def parse_alphabet(header, key):
    """The Alphabet declared on header line `key:`."""
    lineno, tokens = header[key]
    try:
        return Alphabet(tuple(tokens))
    except PreconditionError as e:
        raise ParseError(str(e), lineno)


def parse_dpa(text) -> ParityAutomaton:
    """
    Parses the DPA text format.

    Raises
    ------
    ParseError
        On syntax errors, with the line number

    TotalityError
        When a (state, input, output) triple has no transition
    """
    lines = text_lines(text)
    header, current = parse_header(lines, "dpa", {"in", "out", "states", "init", "colors"})
    last = current[0] if current else 1
    require_keys(header, ["in", "out", "states", "init", "colors"], last)
    inputs, outputs = parse_alphabet(header, "in"), parse_alphabet(header, "out")
    for key, alphabet in (("in", inputs), ("out", outputs)):
        if any("/" in s for s in alphabet):
            raise ParseError("symbols may not contain '/'", header[key][0])
        if len(alphabet) < 2:
            raise ParseError("alphabets need at least two symbols", header[key][0])
    n, init = parse_state_header(header)
    lineno, tokens = header["colors"]
    if len(tokens) != n:
        raise ParseError(f"expected {n} colors, got {len(tokens)}", lineno)
    colors = [parse_int(t, lineno, "color") for t in tokens]
    if min(colors) < 0:
        raise ParseError("colors must be nonnegative", lineno)

    delta = np.full((n, len(inputs), len(outputs)), -1, dtype=np.int64)
    end = None
    while current is not None:
        lineno, tokens = current
        last = lineno
        if tokens == ["end"]:
            end = lineno
            break
        if len(tokens) != 3 or tokens[1].count("/") != 1:
            raise ParseError("expected '<src> <in>/<out> <dst>'", lineno)
        src = parse_state(tokens[0], n, lineno)
        a, b = tokens[1].split("/")
        dst = parse_state(tokens[2], n, lineno)
        if a not in inputs or b not in outputs:
            raise ParseError(f"unknown symbol in {tokens[1]!r}", lineno)
        ia, ib = inputs.index(a), outputs.index(b)
        if delta[src, ia, ib] >= 0:
            raise ParseError(f"duplicate transition for ({src}, {a}, {b})", lineno)
        delta[src, ia, ib] = dst
        current = next(lines, None)
    check_end(lines, end, last)
    missing = np.argwhere(delta < 0)
    if len(missing):
        q, ia, ib = (int(x) for x in missing[0])
        raise TotalityError(
            f"missing transition for ({q}, {inputs[ia]}, {outputs[ib]})", end
        )
    return ParityAutomaton(inputs, outputs, delta, colors, init)


def serialize_dpa(A: ParityAutomaton, comment: Optional[str] = None) -> str:
    out = []
    if comment:
        out += [f"# {line}" for line in comment.splitlines()]
    out += [
        "dpa",
        "in: " + " ".join(A.inputs),
        "out: " + " ".join(A.outputs),
        f"states: {A.n}",
        f"init: {A.initial}",
        "colors: " + " ".join(str(int(c)) for c in A.colors),
    ]
    for q in range(A.n):
        for ia, a in enumerate(A.inputs):
            for ib, b in enumerate(A.outputs):
                out.append(f"{q} {a}/{b} {int(A.delta[q, ia, ib])}")
    out.append("end")
    return "\n".join(out) + "\n"


def parse_dfa(text) -> FiniteAutomaton:
    lines = text_lines(text)
    header, current = parse_header(lines, "dfa", {"sigma", "states", "init", "finals"})
    last = current[0] if current else 1
    require_keys(header, ["sigma", "states", "init", "finals"], last)
    sigma = parse_alphabet(header, "sigma")
    n, init = parse_state_header(header)
    lineno, tokens = header["finals"]
    finals = [parse_state(t, n, lineno) for t in tokens]

    delta = np.full((n, len(sigma)), -1, dtype=np.int64)
    end = None
    while current is not None:
        lineno, tokens = current
        last = lineno
        if tokens == ["end"]:
            end = lineno
            break
        if len(tokens) != 3:
            raise ParseError("expected '<src> <sym> <dst>'", lineno)
        src = parse_state(tokens[0], n, lineno)
        if tokens[1] not in sigma:
            raise ParseError(f"unknown symbol {tokens[1]!r}", lineno)
        a = sigma.index(tokens[1])
        if delta[src, a] >= 0:
            raise ParseError(f"duplicate transition for ({src}, {tokens[1]})", lineno)
        delta[src, a] = parse_state(tokens[2], n, lineno)
        current = next(lines, None)
    check_end(lines, end, last)
    missing = np.argwhere(delta < 0)
    if len(missing):
        q, a = (int(x) for x in missing[0])
        raise TotalityError(f"missing transition for ({q}, {sigma[a]})", end)
    return FiniteAutomaton(sigma, delta, finals, init)


def serialize_dfa(F: FiniteAutomaton) -> str:
    out = [
        "dfa",
        "sigma: " + " ".join(F.alphabet),
        f"states: {F.state_count}",
        f"init: {F.initial}",
        "finals: " + " ".join(str(f) for f in sorted(F.finals)),
    ]
    for q in range(F.state_count):
        for ia, a in enumerate(F.alphabet):
            out.append(f"{q} {a} {int(F.delta[q, ia])}")
    out.append("end")
    return "\n".join(out) + "\n"
