"""
Interactive play: a human types Player I's letters, a StrategyMachine answers for
Player O.
"""
from dataclasses import dataclass, field

from paritygame import PLAYER_NAMES, lasso_winner
from utils import PreconditionError, SymbolError, bcolors


@dataclass
class PlaySession:
    """
    Attributes
    ----------
    configs : list
        Joint configuration (DPA state, machine state, pending inputs) before the first
        and after every input letter

    colors : list
        Per input letter, the color entered by O's answer, or None while O waits
    """

    automaton: object
    machine: object
    configs: list = field(default_factory=list)
    colors: list = field(default_factory=list)
    inputs: list = field(default_factory=list)
    emissions: list = field(default_factory=list)
    max_history: int = 40

    def __post_init__(self):
        if self.machine.inputs != self.automaton.inputs:
            raise PreconditionError("machine and automaton input alphabets differ")
        self.configs = [(self.automaton.initial, self.machine.initial, ())]

    @property
    def state(self):
        return self.configs[-1][0]

    @property
    def pending(self):
        return self.configs[-1][2]

    def feed(self, a):
        """Plays input letter a; returns O's emission (None for wait)."""
        if a not in self.automaton.inputs:
            raise SymbolError(
                f"unknown input letter {a!r}; use one of {' '.join(self.automaton.inputs)}"
            )
        q, s, pending = self.configs[-1]
        s, e = self.machine.step(s, a)
        pending = pending + (a,)
        color = None
        if e is not None:
            q = self.automaton.step(q, pending[0], e)
            pending = pending[1:]
            color = int(self.automaton.colors[q])
        self.configs.append((q, s, pending))
        self.colors.append(color)
        self.inputs.append(a)
        self.emissions.append(e)
        return e

    def declare_loop(self, k):
        """Adjudicates the last k steps as the cycle of a lasso."""
        steps = len(self.colors)
        if not 1 <= k <= steps:
            raise PreconditionError(f"loop length must be between 1 and {steps}")
        if self.configs[-1] != self.configs[-1 - k]:
            raise PreconditionError(
                f"configuration now {self.configs[-1]} differs from {k} steps ago "
                f"{self.configs[-1 - k]}"
            )
        cycle = [c for c in self.colors[-k:] if c is not None]
        if not cycle:
            raise PreconditionError("Player O made no move inside the declared loop")
        prefix = [c for c in self.colors[:-k] if c is not None]
        return lasso_winner(prefix, cycle)

    def render(self):
        out = self.emissions[-1] if self.emissions else None
        history = " ".join("." if c is None else str(c) for c in self.colors[-self.max_history :])
        return [
            f"  inputs : {''.join(self.inputs[-self.max_history :])}",
            f"  outputs: {''.join(e for e in self.emissions if e is not None)[-self.max_history :]}",
            f"  O      : {'wait' if out is None else out}",
            f"  pending: {' '.join(self.pending) or '-'}",
            f"  state  : {self.state} (color {int(self.automaton.colors[self.state])})",
            f"  colors : {history or '-'}",
        ]


HELP = "type an input letter, ':loop k' to close a cycle of the last k steps, ':quit'"


def repl(session: PlaySession, read=input, write=print):
    """Runs the terminal loop; returns the adjudicated winner or None."""
    write(HELP)
    while True:
        try:
            line = read("I> ").strip()
        except EOFError:
            return None
        if not line:
            continue
        if line == ":quit":
            return None
        if line.startswith(":loop"):
            try:
                k = int(line.split()[1])
            except (IndexError, ValueError):
                write(bcolors.paint("usage: :loop k", bcolors.WARNING))
                continue
            try:
                winner = session.declare_loop(k)
            except PreconditionError as e:
                write(bcolors.paint(f"invalid loop: {e}", bcolors.WARNING))
                continue
            color = bcolors.OKGREEN if PLAYER_NAMES[winner] == "O" else bcolors.FAIL
            write(bcolors.paint(f"verdict: {PLAYER_NAMES[winner]} wins", color))
            return winner
        for token in line.split():
            try:
                session.feed(token)
            except SymbolError as e:
                write(bcolors.paint(str(e), bcolors.WARNING))
                break
        for row in session.render():
            write(row)
