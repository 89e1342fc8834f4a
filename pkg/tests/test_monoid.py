""" Tests for color matrices, the transition monoid and the profile automaton"""

import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, given, reject, settings
from hypothesis import strategies as st

from automata import FiniteAutomaton, ParityAutomaton, minimal_size, pair_token
from dpa_strategies import blocks, dpas
from fuzz import random_dpa
from monoid import (
    BOTTOM,
    ColorMatrix,
    Profile,
    brute_force_profile,
    build_profile_automaton,
    class_automaton,
    direct_matrix,
    enumerate_monoid,
    find_matching_output,
    letter_matrix,
    matrix_mul,
    monoid_bound,
    nprime_bound_holds,
    semiring_product,
    tracking_automaton,
    word_matrix,
    worst_case_bound_text,
)
from utils import BudgetError, PreconditionError

# Matrices of the copy automaton: state 0 loops with color 2, state 1 is the sink (color 1)
A_STAR = ColorMatrix((0, 1), (2, 1))
B_STAR = ColorMatrix((1, 1), (1, 1))
C_STAR = ColorMatrix((1, 1), (2, 1))


def paired(u, v):
    return [pair_token(a, b) for a, b in zip(u, v)]


###################################################################################################
# Matrices
###################################################################################################


def test_letter_matrices_of_copy(copy_dpa):
    assert letter_matrix(copy_dpa, "0", "0") == A_STAR
    assert letter_matrix(copy_dpa, "0", "1") == B_STAR
    assert letter_matrix(copy_dpa, "1", "1") == A_STAR
    dense = B_STAR.to_array()
    assert dense.tolist() == [[BOTTOM, 1], [BOTTOM, 1]]
    assert B_STAR.entry(0, 0) is None and B_STAR.entry(0, 1) == 1


def test_matrix_mul_examples():
    assert matrix_mul(A_STAR, A_STAR) == A_STAR
    assert matrix_mul(A_STAR, B_STAR) == C_STAR
    assert A_STAR @ B_STAR == C_STAR


def test_matrix_mul_dimension_mismatch():
    with pytest.raises(PreconditionError):
        matrix_mul(A_STAR, ColorMatrix((0,), (0,)))


def test_dense_and_functional_products_agree():
    for M, N in itertools.product([A_STAR, B_STAR, C_STAR], repeat=2):
        dense = semiring_product(M.to_array(), N.to_array())
        assert ColorMatrix.from_array(dense) == matrix_mul(M, N)


def test_from_array_needs_one_entry_per_row():
    with pytest.raises(PreconditionError):
        ColorMatrix.from_array(np.array([[1, 2], [BOTTOM, 0]]))
    with pytest.raises(PreconditionError):
        ColorMatrix.from_array(np.array([[BOTTOM, BOTTOM], [BOTTOM, 0]]))


def test_word_matrix_examples(copy_dpa):
    assert word_matrix(copy_dpa, "01", "01") == A_STAR
    assert word_matrix(copy_dpa, "01", "00") == C_STAR
    assert word_matrix(copy_dpa, "1", "0") == letter_matrix(copy_dpa, "1", "0")


def test_word_matrix_rejects_bad_blocks(copy_dpa):
    with pytest.raises(PreconditionError):
        word_matrix(copy_dpa, "01", "0")
    with pytest.raises(PreconditionError):
        word_matrix(copy_dpa, "", "")


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_word_matrix_is_a_homomorphism(data):
    A = data.draw(dpas())
    u, v = data.draw(blocks(A, min_size=2, max_size=8))
    k = data.draw(st.integers(1, len(u) - 1))
    whole = word_matrix(A, u, v)
    assert whole == matrix_mul(word_matrix(A, u[:k], v[:k]), word_matrix(A, u[k:], v[k:]))
    assert whole == direct_matrix(A, u, v)


def test_word_matrix_homomorphism_on_seeded_splits():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 1000:
        A = random_dpa(rng, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
        for _ in range(10):
            length = int(rng.integers(2, 9))
            u = [A.inputs[i] for i in rng.integers(0, 2, size=length)]
            v = [A.outputs[i] for i in rng.integers(0, 2, size=length)]
            k = int(rng.integers(1, length))
            whole = direct_matrix(A, u, v)
            assert word_matrix(A, u, v) == whole
            halves = word_matrix(A, u[:k], v[:k]), word_matrix(A, u[k:], v[k:])
            assert matrix_mul(*halves) == whole
            checked += 1


###################################################################################################
# Monoid
###################################################################################################


def test_monoid_of_copy(copy_dpa):
    assert enumerate_monoid(copy_dpa) == {A_STAR, B_STAR, C_STAR}


def test_monoid_of_single_state():
    A = ParityAutomaton(("0", "1"), ("0", "1"), np.zeros((1, 2, 2), dtype=int), [3])
    assert enumerate_monoid(A) == {ColorMatrix((0,), (3,))}


@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_monoid_is_associative_and_bounded(data):
    A = data.draw(dpas(max_states=3))
    elements = sorted(enumerate_monoid(A))
    assert len(elements) <= monoid_bound(A)
    M, N, L = (data.draw(st.sampled_from(elements)) for _ in range(3))
    assert matrix_mul(matrix_mul(M, N), L) == matrix_mul(M, matrix_mul(N, L))


@settings(max_examples=30, deadline=None)
@given(A=dpas(max_states=3, max_colors=3))
def test_monoid_equals_realized_block_matrices(A):
    monoid = enumerate_monoid(A)
    letters = list(itertools.product(A.inputs, A.outputs))
    # one representative block per matrix and length, extended letter by letter
    layer = {direct_matrix(A, [a], [b]): ([a], [b]) for a, b in letters}
    realized = set(layer)
    seen = {frozenset(layer)}
    for _ in range(len(monoid) + 1):
        nxt = {}
        for u, v in layer.values():
            for a, b in letters:
                nxt.setdefault(direct_matrix(A, u + [a], v + [b]), (u + [a], v + [b]))
        layer = nxt
        realized |= set(layer)
        if frozenset(layer) in seen:
            break
        seen.add(frozenset(layer))
    assert realized == monoid


###################################################################################################
# Tracking and class automata
###################################################################################################


def test_tracking_automaton_examples(copy_dpa):
    T = tracking_automaton(copy_dpa, 0, 0, 2)
    assert T.accepts(["0/0"]) and not T.accepts(["0/1"])
    T = tracking_automaton(copy_dpa, 0, 1, 1)
    assert T.accepts(["0/1"]) and not T.accepts(["0/0"])


def test_tracking_automaton_rejects_unused_color(copy_dpa):
    with pytest.raises(PreconditionError):
        tracking_automaton(copy_dpa, 0, 0, 5)
    with pytest.raises(PreconditionError):
        tracking_automaton(copy_dpa, 2, 0, 1)


def test_class_automaton_examples(copy_dpa):
    F = class_automaton(copy_dpa, A_STAR)
    assert F.accepts(["0/0"]) and F.accepts(["0/0", "1/1"])
    assert not F.accepts(["0/1"])
    assert class_automaton(copy_dpa, C_STAR).accepts(["0/0", "1/0"])


def test_class_automaton_needs_realized_matrix(copy_dpa):
    with pytest.raises(PreconditionError):
        class_automaton(copy_dpa, ColorMatrix((0, 0), (2, 2)))


@settings(max_examples=15, deadline=None)
@given(A=dpas(max_states=3, max_colors=3))
def test_class_and_tracking_automata_agree_with_word_matrix(A):
    monoid = sorted(enumerate_monoid(A))
    classes = {M: class_automaton(A, M) for M in monoid}
    tracking = {
        (p, q, k): tracking_automaton(A, p, q, k)
        for p in range(A.n)
        for q in range(A.n)
        for k in A.color_set
    }
    for length in range(1, 4):
        for u in itertools.product(A.inputs, repeat=length):
            for v in itertools.product(A.outputs, repeat=length):
                M = word_matrix(A, u, v)
                w = paired(u, v)
                assert all(F.accepts(w) == (N == M) for N, F in classes.items())
                for (p, q, k), T in tracking.items():
                    assert T.accepts(w) == (M.entry(p, q) == k)


###################################################################################################
# Profiles
###################################################################################################


def test_profile_automaton_of_copy(copy_dpa):
    P = build_profile_automaton(copy_dpa)
    P1 = Profile.of([A_STAR, B_STAR])
    P2 = Profile.of([A_STAR, B_STAR, C_STAR])
    assert P.states == [None, P1, P2]
    assert P.delta.tolist() == [[1, 1], [2, 2], [2, 2]]
    assert P.language_finite == [True, True, False]
    assert P.d_prime == 1
    assert P.n_prime == 3
    assert P.infinite_profiles == [P2]
    assert P.profile_of("0110") == P2


def test_profile_requires_matrices():
    with pytest.raises(PreconditionError):
        Profile.of([])
    assert len(Profile.of([A_STAR, A_STAR, B_STAR])) == 2


@settings(max_examples=10, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(A=dpas(max_states=3, max_colors=3))
def test_profile_automaton_matches_brute_force(A):
    try:
        P = build_profile_automaton(A, max_states=64)
    except BudgetError:
        reject()
    assert P.d_prime < P.n_prime
    assert P.state_count - 1 <= 2 ** len(enumerate_monoid(A))
    assert nprime_bound_holds(P.n_prime, A)
    for length in range(1, 7):
        for u in itertools.product(A.inputs, repeat=length):
            assert P.profile_of(u) == brute_force_profile(A, u)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(50))
def test_profiles_of_seeded_automata_up_to_length_eight(seed):
    rng = np.random.default_rng(seed)
    A = random_dpa(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
    P = build_profile_automaton(A)
    for length in range(1, 9):
        for u in itertools.product(A.inputs, repeat=length):
            assert P.profile_of(u) == brute_force_profile(A, u)


def test_profile_automaton_budget(copy_dpa):
    assert build_profile_automaton(copy_dpa, max_states=3).state_count == 3
    with pytest.raises(BudgetError):
        build_profile_automaton(copy_dpa, max_states=2)


def test_class_sizes_are_computed_on_demand(ex33_dpa):
    P = build_profile_automaton(ex33_dpa)
    assert "class_sizes" not in P.__dict__ and "n_prime" not in P.__dict__
    assert "ProfileAutomaton" in repr(P)
    assert "class_sizes" not in P.__dict__
    assert P.n_prime == max(P.class_sizes)


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(A=dpas(max_states=3, max_colors=3))
def test_class_sizes_match_minimized_class_automata(A):
    try:
        P = build_profile_automaton(A, max_states=40)
    except BudgetError:
        reject()
    for s in range(P.state_count):
        F = FiniteAutomaton(P.alphabet, P.delta, {s}, 0)
        assert P.class_sizes[s] == minimal_size(F)


def test_find_matching_output_examples(copy_dpa):
    assert find_matching_output(copy_dpa, "01", A_STAR) == ["0", "1"]
    v = find_matching_output(copy_dpa, "01", B_STAR)
    assert "".join(v) in {"10", "11"}
    assert find_matching_output(copy_dpa, "0", C_STAR) is None


@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_find_matching_output_exactly_on_profile(data):
    A = data.draw(dpas(max_states=3))
    u, _ = data.draw(blocks(A, max_size=5))
    profile = brute_force_profile(A, u)
    for M in enumerate_monoid(A):
        v = find_matching_output(A, u, M)
        if M in profile:
            assert v is not None and len(v) == len(u)
            assert word_matrix(A, u, v) == M
        else:
            assert v is None


def test_bound_helpers(copy_dpa):
    assert monoid_bound(copy_dpa) == 36
    assert worst_case_bound_text(copy_dpa) == "2*2^256-1"
    assert nprime_bound_holds(3, copy_dpa)
