"""
Finite two-player max-parity games: arenas, Zielonka's algorithm with positional
strategy extraction, and strategy verification by cycle analysis.

Players are numbered by the parity they win with: Player O wins plays whose maximal
color seen infinitely often is even, Player I when it is odd.
"""
from collections import deque
from dataclasses import dataclass, field
import logging

import networkx as nx

from utils import BudgetError, PreconditionError, StrategyError

logger = logging.getLogger(__name__)

PLAYER_O = 0
PLAYER_I = 1
PLAYER_NAMES = {PLAYER_O: "O", PLAYER_I: "I"}


class ParityGameArena:
    """
    Attributes
    ----------
    owner : tuple
        owner[v] is PLAYER_O or PLAYER_I

    successors : tuple
        successors[v] is a nonempty tuple of successor vertices

    colors : tuple
        Nonnegative colors

    labels : tuple or None
        Opaque annotations used by game builders to decode strategies
    """

    def __init__(self, owner, successors, colors, labels=None):
        self.owner = tuple(int(o) for o in owner)
        self.successors = tuple(tuple(int(w) for w in s) for s in successors)
        self.colors = tuple(int(c) for c in colors)
        n = len(self.owner)
        if not (len(self.successors) == len(self.colors) == n):
            raise PreconditionError("owner, successors and colors must have equal length")
        for v, succ in enumerate(self.successors):
            if not succ:
                raise PreconditionError(f"vertex {v} has no successor")
            if any(not 0 <= w < n for w in succ):
                raise PreconditionError(f"vertex {v} has a successor out of range")
        if any(o not in PLAYER_NAMES for o in self.owner):
            raise PreconditionError("owners must be PLAYER_O or PLAYER_I")
        if n and min(self.colors) < 0:
            raise PreconditionError("colors must be nonnegative")
        self.labels = tuple(labels) if labels is not None else None
        self._predecessors = None
        self._label_index = None

    @property
    def vertex_count(self):
        return len(self.owner)

    @property
    def max_color(self):
        return max(self.colors, default=0)

    @property
    def predecessors(self):
        if self._predecessors is None:
            preds = [[] for _ in range(self.vertex_count)]
            for v, succ in enumerate(self.successors):
                for w in succ:
                    preds[w].append(v)
            self._predecessors = preds
        return self._predecessors

    def vertex(self, label):
        """Vertex carrying a label."""
        if self._label_index is None:
            self._label_index = {lab: v for v, lab in enumerate(self.labels or ())}
        return self._label_index[label]

    def label(self, v):
        return self.labels[v] if self.labels is not None else v

    def __repr__(self):
        return f"ParityGameArena(vertices={self.vertex_count}, max_color={self.max_color})"


class ArenaBuilder:
    """
    Explores an arena breadth-first from an initial label. `expand(label)` returns
    (owner, color, successor labels).
    """

    def __init__(self, budget=None, what="arena"):
        self.budget = budget
        self.what = what
        self.index = {}
        self.labels = []

    def explore(self, initial, expand):
        owners, colors, successors = [], [], []
        self.index = {initial: 0}
        self.labels = [initial]
        queue = deque([initial])
        while queue:
            label = queue.popleft()
            owner, color, succ_labels = expand(label)
            succ = []
            for lab in succ_labels:
                if lab not in self.index:
                    if self.budget is not None and len(self.labels) >= self.budget:
                        raise BudgetError(self.what, len(self.labels) + len(queue) + 1, self.budget)
                    self.index[lab] = len(self.labels)
                    self.labels.append(lab)
                    queue.append(lab)
                succ.append(self.index[lab])
            owners.append(owner)
            colors.append(color)
            successors.append(succ)
        return ParityGameArena(owners, successors, colors, self.labels)


@dataclass
class Solution:
    win_region_O: frozenset
    win_region_I: frozenset
    strategy_O: dict = field(default_factory=dict)
    strategy_I: dict = field(default_factory=dict)

    def region(self, player):
        return self.win_region_O if player == PLAYER_O else self.win_region_I

    def strategy(self, player):
        return self.strategy_O if player == PLAYER_O else self.strategy_I

    def winner(self, v):
        return PLAYER_O if v in self.win_region_O else PLAYER_I


def attractor(G: ParityGameArena, vertices, target, player):
    """
    Vertices of the subgame `vertices` from which `player` forces a visit to `target`.

    Returns
    -------
    attr : set

    strategy : dict
        For player-owned vertices of attr outside target, a successor one step closer
    """
    attr = set(target)
    strategy = {}
    remaining = {}
    queue = deque(attr)
    while queue:
        v = queue.popleft()
        for u in G.predecessors[v]:
            if u in attr or u not in vertices:
                continue
            if G.owner[u] == player:
                attr.add(u)
                strategy[u] = v
                queue.append(u)
            else:
                if u not in remaining:
                    remaining[u] = sum(1 for w in G.successors[u] if w in vertices)
                remaining[u] -= 1
                if remaining[u] == 0:
                    attr.add(u)
                    queue.append(u)
    return attr, strategy


def _zielonka(G, vertices):
    regions = {PLAYER_O: set(), PLAYER_I: set()}
    strategies = {PLAYER_O: {}, PLAYER_I: {}}
    V = set(vertices)
    while V:
        d = max(G.colors[v] for v in V)
        p = d % 2
        opp = 1 - p
        top = {v for v in V if G.colors[v] == d}
        A, attr_strategy = attractor(G, V, top, p)
        sub_regions, sub_strategies = _zielonka(G, V - A)
        if not sub_regions[opp]:
            regions[p] |= V
            strategies[p].update(sub_strategies[p])
            strategies[p].update(attr_strategy)
            for v in top:
                if G.owner[v] == p:
                    strategies[p][v] = next(w for w in G.successors[v] if w in V)
            break
        B, opp_strategy = attractor(G, V, sub_regions[opp], opp)
        regions[opp] |= B
        strategies[opp].update(sub_strategies[opp])
        strategies[opp].update(opp_strategy)
        V -= B
    return regions, strategies


def solve(G: ParityGameArena) -> Solution:
    """
    Solves the game with Zielonka's recursive algorithm. The recursion on the second
    subgame is unrolled into a loop, so the depth is bounded by the number of colors.
    """
    regions, strategies = _zielonka(G, range(G.vertex_count))
    logger.debug(
        "solved %r: |W_O|=%d |W_I|=%d", G, len(regions[PLAYER_O]), len(regions[PLAYER_I])
    )
    return Solution(
        frozenset(regions[PLAYER_O]),
        frozenset(regions[PLAYER_I]),
        strategies[PLAYER_O],
        strategies[PLAYER_I],
    )


def all_cycles_win(nodes, successors, color, player):
    """
    True iff every cycle of the graph induced on `nodes` has a maximal color of the
    player's parity. Strongly connected components are peeled by descending color.

    Parameters
    ----------
    nodes : iterable of hashable vertices

    successors : mapping vertex -> iterable of vertices

    color : mapping vertex -> int
    """
    pending = [set(nodes)]
    while pending:
        S = pending.pop()
        g = nx.DiGraph()
        g.add_nodes_from(S)
        g.add_edges_from((v, w) for v in S for w in successors[v] if w in S)
        for scc in nx.strongly_connected_components(g):
            if len(scc) == 1:
                v = next(iter(scc))
                if not g.has_edge(v, v):
                    continue
            d = max(color[v] for v in scc)
            if d % 2 != player:
                return False
            rest = {v for v in scc if color[v] != d}
            if rest:
                pending.append(rest)
    return True


def verify_positional_strategy(G: ParityGameArena, player, strategy, start) -> bool:
    """
    Checks that `strategy` wins for `player` from `start` (a vertex or an iterable of
    vertices): every cycle reachable in the graph where the player's edges are
    restricted to the strategy has the player's parity.
    """
    starts = [start] if isinstance(start, int) else list(start)

    def moves(v):
        if G.owner[v] != player:
            return G.successors[v]
        if v not in strategy:
            raise StrategyError(f"no strategy choice at reachable vertex {G.label(v)!r}")
        w = strategy[v]
        if w not in G.successors[v]:
            raise StrategyError(f"strategy moves from {v} to non-successor {w}")
        return (w,)

    restricted = {}
    queue = deque(starts)
    while queue:
        v = queue.popleft()
        if v in restricted:
            continue
        restricted[v] = moves(v)
        queue.extend(w for w in restricted[v] if w not in restricted)
    return all_cycles_win(restricted, restricted, G.colors, player)


def lasso_winner(prefix_colors, cycle_colors):
    cycle_colors = list(cycle_colors)
    if not cycle_colors:
        raise PreconditionError("lasso cycle must be nonempty")
    return PLAYER_O if max(cycle_colors) % 2 == 0 else PLAYER_I


def dump_arena(G: ParityGameArena) -> str:
    return "\n".join(
        f"{v} {PLAYER_NAMES[G.owner[v]]} {G.colors[v]} "
        + ",".join(str(w) for w in G.successors[v])
        for v in range(G.vertex_count)
    ) + "\n"
