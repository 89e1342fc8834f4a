"""
Color matrices over the max semiring S = {⊥} ∪ colors, the transition monoid of a
parity automaton, and the profile automaton whose states are the ≈-classes of input
blocks.

A ColorMatrix of a deterministic automaton has exactly one non-⊥ entry per row, so it is
stored functionally: row p reaches targets[p] with maximal color colors[p]. Colors are
counted on the states entered, never on the source state.
"""
from collections import deque
from dataclasses import dataclass
from functools import cached_property
import itertools
import logging
from typing import Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from automata import FiniteAutomaton, ParityAutomaton, partition_count
from utils import BudgetError, PreconditionError, ceil_log2_exceeds

logger = logging.getLogger(__name__)

BOTTOM = -1


@dataclass(frozen=True, order=True)
class ColorMatrix:
    """
    Attributes
    ----------
    targets : tuple
        targets[p] is the unique column q with a non-⊥ entry in row p

    colors : tuple
        colors[p] is the entry (p, targets[p])
    """

    targets: Tuple[int, ...]
    colors: Tuple[int, ...]

    def __post_init__(self):
        assert len(self.targets) == len(self.colors), "ragged color matrix"

    @property
    def dimension(self):
        return len(self.targets)

    def entry(self, p, q) -> Optional[int]:
        """Entry (p, q), None standing for ⊥."""
        return self.colors[p] if self.targets[p] == q else None

    def to_array(self):
        """Dense form with ⊥ encoded as -1."""
        arr = np.full((self.dimension, self.dimension), BOTTOM, dtype=np.int64)
        arr[np.arange(self.dimension), list(self.targets)] = self.colors
        return arr

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise PreconditionError(f"expected a square matrix, got shape {arr.shape}")
        targets, colors = [], []
        for p, row in enumerate(arr):
            cols = np.flatnonzero(row != BOTTOM)
            if len(cols) != 1:
                raise PreconditionError(f"row {p} must have exactly one non-⊥ entry")
            targets.append(int(cols[0]))
            colors.append(int(row[cols[0]]))
        return cls(tuple(targets), tuple(colors))

    def __matmul__(self, other):
        return matrix_mul(self, other)

    def __str__(self):
        return " ".join(f"{p}->{q}:{c}" for p, (q, c) in enumerate(zip(self.targets, self.colors)))


def semiring_product(X, Y):
    """
    Product of dense matrices over S (⊥ = -1): sum is max, x·y is max(x, y) if both are
    colors and ⊥ otherwise.
    """
    X, Y = np.asarray(X), np.asarray(Y)
    both = (X[:, :, None] >= 0) & (Y[None, :, :] >= 0)
    prod = np.where(both, np.maximum(X[:, :, None], Y[None, :, :]), BOTTOM)
    return prod.max(axis=1)


def matrix_mul(M: ColorMatrix, N: ColorMatrix) -> ColorMatrix:
    if M.dimension != N.dimension:
        raise PreconditionError(
            f"dimension mismatch: {M.dimension} vs {N.dimension}"
        )
    return ColorMatrix(
        tuple(N.targets[q] for q in M.targets),
        tuple(max(c, N.colors[q]) for q, c in zip(M.targets, M.colors)),
    )


def _letter_matrix(A, ia, ib):
    targets = tuple(int(q) for q in A.delta[:, ia, ib])
    return ColorMatrix(targets, tuple(int(A.colors[q]) for q in targets))


def letter_matrix(A: ParityAutomaton, a, b) -> ColorMatrix:
    return _letter_matrix(A, A.inputs.index(a), A.outputs.index(b))


def letter_matrices(A):
    """
    Returns
    -------
    dict
        input index -> list of letter matrices, one per output index
    """
    return {
        ia: [_letter_matrix(A, ia, ib) for ib in range(len(A.outputs))]
        for ia in range(len(A.inputs))
    }


def word_matrix(A: ParityAutomaton, u: Sequence[str], v: Sequence[str]) -> ColorMatrix:
    if len(u) != len(v):
        raise PreconditionError(f"length mismatch: |u|={len(u)}, |v|={len(v)}")
    if not u:
        raise PreconditionError("the empty block has no matrix")
    result = letter_matrix(A, u[0], v[0])
    for a, b in zip(u[1:], v[1:]):
        result = matrix_mul(result, letter_matrix(A, a, b))
    return result


def direct_matrix(A: ParityAutomaton, u, v) -> ColorMatrix:
    """μ(u/v) by running A from every state, without any matrix product."""
    if len(u) != len(v) or not u:
        raise PreconditionError("blocks must be nonempty and of equal length")
    letters = [(A.inputs.index(a), A.outputs.index(b)) for a, b in zip(u, v)]
    targets, colors = [], []
    for p in range(A.n):
        q, c = p, BOTTOM
        for ia, ib in letters:
            q = int(A.delta[q, ia, ib])
            c = max(c, int(A.colors[q]))
        targets.append(q)
        colors.append(c)
    return ColorMatrix(tuple(targets), tuple(colors))


def enumerate_monoid(A: ParityAutomaton) -> frozenset:
    """Closure of the letter matrices under products: the ∼-classes of nonempty blocks."""
    generators = sorted({M for row in letter_matrices(A).values() for M in row})
    seen = set(generators)
    queue = deque(generators)
    while queue:
        M = queue.popleft()
        for L in generators:
            N = matrix_mul(M, L)
            if N not in seen:
                seen.add(N)
                queue.append(N)
    logger.debug("monoid of %r has %d elements", A, len(seen))
    return frozenset(seen)


def _check_state(A, q):
    if not 0 <= q < A.n:
        raise PreconditionError(f"state {q} out of range 0..{A.n - 1}")


def tracking_automaton(A: ParityAutomaton, p: int, q: int, k: int) -> FiniteAutomaton:
    """
    DFA over the paired alphabet accepting the blocks u/v that lead from p to q with
    maximal color k. States are (color so far, state) pairs, None meaning no color yet.
    """
    _check_state(A, p)
    _check_state(A, q)
    if k not in A.color_set:
        raise PreconditionError(f"color {k} is not used by the automaton")
    letters = A.letters()
    ids = {(None, p): 0}
    rows = []
    queue = deque([(None, p)])
    while queue:
        c, s = queue.popleft()
        row = []
        for ia, ib in letters:
            t = int(A.delta[s, ia, ib])
            nxt = (int(A.colors[t]) if c is None else max(c, int(A.colors[t])), t)
            if nxt not in ids:
                ids[nxt] = len(ids)
                queue.append(nxt)
            row.append(ids[nxt])
        rows.append(row)
    finals = {ids[(k, q)]} if (k, q) in ids else set()
    return FiniteAutomaton(A.paired_alphabet(), rows, finals, 0)


def class_automaton(A: ParityAutomaton, M: ColorMatrix) -> FiniteAutomaton:
    """DFA over the paired alphabet accepting exactly the blocks u/v with μ(u/v) = M."""
    if M not in enumerate_monoid(A):
        raise PreconditionError(f"matrix {M} is not realized by any block")
    letters = [_letter_matrix(A, ia, ib) for ia, ib in A.letters()]
    ids = {None: 0}
    rows = []
    queue = deque([None])
    while queue:
        N = queue.popleft()
        row = []
        for L in letters:
            nxt = L if N is None else matrix_mul(N, L)
            if nxt not in ids:
                ids[nxt] = len(ids)
                queue.append(nxt)
            row.append(ids[nxt])
        rows.append(row)
    return FiniteAutomaton(A.paired_alphabet(), rows, {ids[M]}, 0)


@dataclass(frozen=True, order=True)
class Profile:
    """The set { μ(u/v) : |v| = |u| } of an input block u, kept sorted."""

    matrices: Tuple[ColorMatrix, ...]

    @classmethod
    def of(cls, matrices):
        matrices = tuple(sorted(set(matrices)))
        if not matrices:
            raise PreconditionError("a profile is nonempty")
        assert len({M.dimension for M in matrices}) == 1, "mixed dimensions in profile"
        return cls(matrices)

    def __len__(self):
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    def __contains__(self, M):
        return M in self.matrices


INIT = None
NPRIME_NOTE = (
    "# NPRIME is the largest minimal automaton size among profile classes; "
    "PROFILES counts reachable profiles"
)


class ProfileAutomaton:
    """
    Deterministic automaton over input letters whose states are profiles; state 0 is the
    init pseudo-state standing for the empty block.

    Attributes
    ----------
    alphabet : Alphabet
        The input alphabet

    states : list
        states[0] is INIT, every other entry a Profile

    delta : np.ndarray
        Int array of shape (state_count, |alphabet|)

    language_finite : list
        Per state, whether finitely many input words reach it

    d_prime : int
        Length of a longest word reaching a finite-language state

    class_sizes : list
        Per state, the number of states of the minimal DFA recognizing its class

    n_prime : int
        Largest class size; the block length used for strategy transfer
    """

    def __init__(self, alphabet, states, delta):
        self.alphabet = alphabet
        self.states = states
        self.index = {P: i for i, P in enumerate(states)}
        self.delta = np.array(delta, dtype=np.int64)
        self.delta.setflags(write=False)
        self._analyse()

    @property
    def state_count(self):
        return len(self.states)

    def graph(self):
        g = nx.DiGraph()
        g.add_nodes_from(range(self.state_count))
        for s in range(self.state_count):
            for t in self.delta[s]:
                g.add_edge(s, int(t))
        return g

    def _analyse(self):
        g = self.graph()
        cyclic = set()
        for scc in nx.strongly_connected_components(g):
            v = next(iter(scc))
            if len(scc) > 1 or g.has_edge(v, v):
                cyclic |= scc
        infinite = set(cyclic)
        for c in cyclic:
            infinite |= nx.descendants(g, c)
        self.language_finite = [s not in infinite for s in range(self.state_count)]

        finite = g.subgraph([s for s in range(self.state_count) if self.language_finite[s]])
        depth = {0: 0}
        for s in nx.topological_sort(finite):
            for t in finite.successors(s):
                depth[t] = max(depth.get(t, 0), depth[s] + 1)
        self.d_prime = max(depth.values())

    @cached_property
    def class_sizes(self):
        """
        Minimal DFA size per class. Every state is reachable from init, so for class s
        only the states that can reach s need refining; the rest merge into one sink.
        """
        k, width = self.delta.shape
        preds = [[] for _ in range(k)]
        for s in range(k):
            for t in self.delta[s]:
                preds[int(t)].append(s)
        sizes = []
        for s in range(k):
            alive = np.zeros(k, dtype=bool)
            alive[s] = True
            stack = [s]
            while stack:
                for p in preds[stack.pop()]:
                    if not alive[p]:
                        alive[p] = True
                        stack.append(p)
            idx = np.flatnonzero(alive)
            relabel = np.full(k, len(idx), dtype=np.int64)
            relabel[idx] = np.arange(len(idx))
            delta = relabel[self.delta[idx]]
            accepting = idx == s
            if len(idx) < k:
                delta = np.vstack([delta, np.full((1, width), len(idx), dtype=np.int64)])
                accepting = np.append(accepting, False)
            sizes.append(partition_count(delta, accepting))
        return sizes

    @cached_property
    def n_prime(self):
        n_prime = max(self.class_sizes)
        assert self.d_prime < n_prime, "finite classes cannot be longer than n'"
        return n_prime

    def state_of(self, u):
        s = 0
        for a in u:
            s = int(self.delta[s, self.alphabet.index(a)])
        return s

    def profile_of(self, u):
        return self.states[self.state_of(u)]

    @property
    def infinite_profiles(self):
        return [
            P for s, P in enumerate(self.states) if s != 0 and not self.language_finite[s]
        ]

    def __repr__(self):
        return f"ProfileAutomaton(states={self.state_count}, d_prime={self.d_prime})"


def build_profile_automaton(A: ParityAutomaton, max_states=None) -> ProfileAutomaton:
    """Subset construction over letter matrices; raises BudgetError past `max_states`."""
    letters = letter_matrices(A)
    states = [INIT]
    index = {INIT: 0}
    rows = []
    queue = deque([INIT])
    while queue:
        P = queue.popleft()
        row = []
        for ia in range(len(A.inputs)):
            if P is INIT:
                nxt = Profile.of(letters[ia])
            else:
                nxt = Profile.of(matrix_mul(M, L) for M in P for L in letters[ia])
            if nxt not in index:
                if max_states is not None and len(states) >= max_states:
                    raise BudgetError("profile automaton", len(states) + 1, max_states)
                index[nxt] = len(states)
                states.append(nxt)
                queue.append(nxt)
            row.append(index[nxt])
        rows.append(row)
    profiles = ProfileAutomaton(A.inputs, states, rows)
    logger.debug("built %r", profiles)
    return profiles


def profile_of(P: ProfileAutomaton, u):
    return P.profile_of(u)


def brute_force_profile(A: ParityAutomaton, u) -> Profile:
    return Profile.of(
        direct_matrix(A, u, v) for v in itertools.product(A.outputs, repeat=len(u))
    )


def find_matching_output(A: ParityAutomaton, u, M: ColorMatrix):
    """
    Returns an output word v with |v| = |u| and μ(u/v) = M, or None.

    Forward pass over the sets of partial products reachable on prefixes of u, keeping one
    back pointer per matrix, then backtracking from M.
    """
    if not u:
        raise PreconditionError("find_matching_output needs a nonempty block")
    letters = letter_matrices(A)
    word = [A.inputs.index(a) for a in u]
    layers = [{L: (None, ib) for ib, L in reversed(list(enumerate(letters[word[0]])))}]
    for ia in word[1:]:
        layer = {}
        for N in layers[-1]:
            for ib, L in enumerate(letters[ia]):
                layer.setdefault(matrix_mul(N, L), (N, ib))
        layers.append(layer)
    if M not in layers[-1]:
        return None
    v = []
    for layer in reversed(layers):
        M, ib = layer[M]
        v.append(A.outputs[ib])
    return v[::-1]


def monoid_bound(A: ParityAutomaton) -> int:
    """(n(m+1))^n: number of functional matrices over n states and colors 0..m."""
    return (A.n * (A.m + 1)) ** A.n


def nprime_bound_holds(n_prime, A: ParityAutomaton) -> bool:
    """n' <= 2^((n(m+1))^n) + 1, without materializing the power."""
    return not ceil_log2_exceeds(n_prime - 1, monoid_bound(A))


def worst_case_bound_text(A: ParityAutomaton) -> str:
    """2·2^((mn)^(2n)) − 1 with m the number of colors, exponent evaluated."""
    m = len(A.color_set)
    return f"2*2^{(m * A.n) ** (2 * A.n)}-1"
