"""
Random parity automata and the cross-validation harness that checks the semigroup-game
decision, the monoid construction and synthesis against the fixed-delay oracle
"""
from dataclasses import dataclass, field
import itertools
import logging
import multiprocessing as mp

import numpy as np
import pandas as pd
from tqdm import tqdm

import monoid
from automata import ParityAutomaton, serialize_dpa
from delaygame import solve_fixed_delay
from paritygame import PLAYER_I, PLAYER_O
from sggame import decide_finite_delay, synthesize_constant_delay_strategy, verify_synthesized
from utils import BudgetError

logger = logging.getLogger(__name__)

PROPERTIES = [
    "monotonicity",
    "soundness_O",
    "soundness_I",
    "homomorphism",
    "profiles",
    "synthesis",
]


def random_dpa(rng, states, colors, inputs=2, outputs=2) -> ParityAutomaton:
    """Uniformly random total DPA; colors are drawn from 0..colors-1."""
    delta = rng.integers(0, states, size=(states, inputs, outputs))
    coloring = rng.integers(0, colors, size=states)
    return ParityAutomaton(
        tuple(str(i) for i in range(inputs)),
        tuple(str(i) for i in range(outputs)),
        delta,
        coloring,
        0,
    )


@dataclass
class CaseOutcome:
    index: int
    dpa: str
    results: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def failed(self):
        return [p for p, r in self.results.items() if r == "fail"]


class _Oracle:
    """Memoized fixed-delay winners; None when the arena exceeds the budget."""

    def __init__(self, A, max_vertices):
        self.A = A
        self.max_vertices = max_vertices
        self.winners = {}

    def __call__(self, d):
        if d not in self.winners:
            try:
                self.winners[d] = solve_fixed_delay(self.A, d, self.max_vertices).winner
            except BudgetError:
                self.winners[d] = None
        return self.winners[d]


def _random_word(rng, alphabet, length):
    return [alphabet[i] for i in rng.integers(0, len(alphabet), size=length)]


def check_case(index, seed, params) -> CaseOutcome:
    rng = np.random.default_rng(seed)
    A = random_dpa(
        rng,
        int(rng.integers(1, params["max_states"] + 1)),
        int(rng.integers(1, params["max_colors"] + 1)),
    )
    outcome = CaseOutcome(index, serialize_dpa(A, comment=f"xcheck case {index}"))
    oracle = _Oracle(A, params["max_vertices"])

    def record(prop, check):
        try:
            result = check()
        except Exception as e:  # any crash is a failed property
            logger.debug("case %d %s raised %r", index, prop, e)
            outcome.notes.append(f"{prop}: {type(e).__name__}: {e}")
            result = False
        outcome.results[prop] = "skip" if result is None else ("pass" if result else "fail")

    def monotonicity():
        winners = [oracle(d) for d in range(params["max_delay"] + 1)]
        if None in winners:
            return None
        first_o = winners.index(PLAYER_O) if PLAYER_O in winners else len(winners)
        return all(w == PLAYER_O for w in winners[first_o:])

    record("monotonicity", monotonicity)
    profile_automaton, verdict, crashed = None, None, None
    try:
        profile_automaton = monoid.build_profile_automaton(A, max_states=params["max_profiles"])
        if profile_automaton.n_prime <= params["nprime_cap"]:
            verdict = decide_finite_delay(
                A, profiles=profile_automaton, max_vertices=params["max_vertices"]
            )
    except BudgetError as e:
        outcome.notes.append(f"skipped decision: {e}")
    except Exception as e:
        crashed = f"{type(e).__name__}: {e}"
        outcome.notes.append(f"decision: {crashed}")

    def decided():
        if crashed:
            raise RuntimeError(f"semigroup game could not be decided ({crashed})")
        return verdict

    def soundness_O():
        verdict = decided()
        if verdict is None or verdict.winner != PLAYER_O:
            return None
        w = oracle(2 * verdict.n_prime - 1)
        return None if w is None else w == PLAYER_O

    def soundness_I():
        verdict = decided()
        if verdict is None or verdict.winner != PLAYER_I:
            return None
        winners = [oracle(d) for d in range(2 * verdict.n_prime)]
        if None in winners:
            return None
        return all(w == PLAYER_I for w in winners)

    record("soundness_O", soundness_O)
    record("soundness_I", soundness_I)

    def homomorphism():
        for _ in range(params["splits"]):
            length = int(rng.integers(2, 9))
            u = _random_word(rng, A.inputs, length)
            v = _random_word(rng, A.outputs, length)
            k = int(rng.integers(1, length))
            direct = monoid.direct_matrix(A, u, v)
            product = monoid.matrix_mul(
                monoid.word_matrix(A, u[:k], v[:k]), monoid.word_matrix(A, u[k:], v[k:])
            )
            if product != direct or monoid.word_matrix(A, u, v) != direct:
                outcome.notes.append(f"homomorphism: u={''.join(u)} v={''.join(v)} split={k}")
                return False
        return True

    record("homomorphism", homomorphism)

    def profiles():
        P = profile_automaton
        if P is None:
            decided()
            return None
        if A.n > 3:
            return None
        for length in range(1, params["profile_len"] + 1):
            for u in itertools.product(A.inputs, repeat=length):
                if P.profile_of(u) != monoid.brute_force_profile(A, u):
                    outcome.notes.append(f"profiles: mismatch on u={''.join(u)}")
                    return False
        return True

    record("profiles", profiles)

    def synthesis():
        verdict = decided()
        if verdict is None or verdict.winner != PLAYER_O:
            return None
        d = 2 * verdict.n_prime - 1
        if d > params["synth_delay_cap"]:
            return None
        S = synthesize_constant_delay_strategy(A, verdict)
        S.check_contract()
        return verify_synthesized(A, S, d, params["max_vertices"])

    record("synthesis", synthesis)
    return outcome


def _check_case_star(job):
    return check_case(*job)


def run_xcheck(params, seed=0, workers=1, progress=True):
    """
    Runs `params["count"]` cases with per-case seeds spawned from `seed`.

    Returns
    -------
    summary : pd.DataFrame
        One row per property with passed / failed / skipped counts

    outcomes : list of CaseOutcome, in case order
    """
    seeds = np.random.SeedSequence(seed).spawn(params["count"]) if params["count"] else []
    jobs = [(i, s, params) for i, s in enumerate(seeds)]
    bar = dict(total=len(jobs), desc="xcheck", disable=not progress)
    if workers > 1 and jobs:
        with mp.Pool(workers) as pool:
            outcomes = list(tqdm(pool.imap(_check_case_star, jobs), **bar))
    else:
        outcomes = [check_case(*job) for job in tqdm(jobs, **bar)]
    rows = []
    for prop in PROPERTIES:
        results = [o.results.get(prop, "skip") for o in outcomes]
        rows.append(
            {
                "property": prop,
                "passed": results.count("pass"),
                "failed": results.count("fail"),
                "skipped": results.count("skip"),
            }
        )
    summary = pd.DataFrame(rows, columns=["property", "passed", "failed", "skipped"])
    return summary, outcomes


def first_failure(outcomes):
    return next((o for o in outcomes if o.failed), None)
