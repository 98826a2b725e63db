import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcms.dsl import format_matrix, parse_matrix
from gcms.errors import ParseError, PreconditionError
from gcms.matrix import (
    Root,
    ce1,
    ce2,
    ce3,
    classify,
    column_limit_points,
    finite_explicit,
    full_shift,
    infinite_emitters,
    is_irreducible_restricted,
    lazy_renewal,
    n_renewal,
    pair_renewal,
    prime_renewal,
    renewal,
)
from oracles import literal_table, sieve_primes

SIZE = 200

BUILTINS = [
    ("renewal", renewal(), {}),
    ("lazy-renewal", lazy_renewal(), {}),
    ("pair-renewal", pair_renewal(), {}),
    ("prime-renewal", prime_renewal(), {}),
    ("n-renewal", n_renewal(2), {"N": 2}),
    ("n-renewal", n_renewal(3), {"N": 3}),
    ("n-renewal", n_renewal(4), {"N": 4}),
    ("full", full_shift(), {}),
    ("ce1", ce1(), {}),
    ("ce2", ce2(), {}),
    ("ce3", ce3(), {}),
]


@pytest.mark.parametrize("name,A,kw", BUILTINS, ids=[str(b[1]) for b in BUILTINS])
def test_entries_match_literal_table(name, A, kw):
    table = literal_table(name, SIZE, **kw)
    got = np.array([[A.entry(i, j) for j in range(1, SIZE + 1)] for i in range(1, SIZE + 1)], dtype=np.int8)
    mismatch = np.argwhere(got != table[1:, 1:])
    assert mismatch.size == 0, f"first mismatch at {tuple(mismatch[0] + 1)}"


@pytest.mark.parametrize(
    "A,i,j,expected",
    [(renewal(), 1, 7, 1), (renewal(), 3, 7, 0), (pair_renewal(), 2, 8, 1)],
)
def test_entry_examples(A, i, j, expected):
    assert A.entry(i, j) == expected


def test_entry_rejects_nonpositive_symbols():
    with pytest.raises(PreconditionError):
        renewal().entry(0, 3)


def test_limit_points_examples():
    assert column_limit_points(renewal(), 50) == [Root.of(1)]
    assert column_limit_points(pair_renewal(), 50) == [Root.of(1), Root.of(1, 2)]
    expected = [Root.of(1)] + [Root.of(1, p) for p in sieve_primes(50)]
    assert column_limit_points(prime_renewal(), 50) == expected


@pytest.mark.parametrize("A", [renewal(), pair_renewal(), prime_renewal(), n_renewal(3), ce1(), ce3(), lazy_renewal()], ids=str)
def test_limit_points_are_realized_by_columns(A):
    depth = 20
    hits = {}
    for j in range(depth + 1, 10_000):
        col = frozenset(i for i in range(1, depth + 1) if A.entry(i, j))
        hits.setdefault(col, []).append(j)
    for R in column_limit_points(A, depth):
        assert len(hits.get(R.symbols, [])) >= 2, f"{R} is not a recurring truncated column"


@pytest.mark.parametrize(
    "A,expected",
    [(renewal(), (1,)), (pair_renewal(), (1, 2)), (n_renewal(4), (1, 2, 3, 4))],
    ids=["renewal", "pair", "n4"],
)
def test_infinite_emitters(A, expected):
    assert infinite_emitters(A, 64) == expected


@pytest.mark.parametrize(
    "alphabet,expected",
    [((1, 2, 3), True), ((2, 3), False), ((1,), True), ((1, 2, 3, 4, 5, 6), True)],
)
def test_irreducible_restriction(alphabet, expected):
    assert is_irreducible_restricted(renewal(), alphabet) is expected


@given(st.integers(1, 40))
def test_single_self_loop_is_irreducible(i):
    assert is_irreducible_restricted(lazy_renewal(), [i])


def test_classify_examples():
    r = classify(renewal())
    assert r.single_empty_word is True and r.periodic_renewal is True
    lz = classify(lazy_renewal())
    assert lz.single_empty_word is True and lz.periodic_renewal is False
    fs = classify(full_shift())
    assert fs.single_empty_word is False and fs.column_finite is False and fs.compact_X_A is True
    assert classify(ce2()).compact_X_A is False


def test_renewal_block_is_one_by_one():
    b = classify(renewal()).block
    assert b.M == ((1,),) and b.period == 1 and b.last_emitter == 1 and b.start >= 2


@pytest.mark.parametrize("A", [renewal(), pair_renewal(), n_renewal(2), n_renewal(3), n_renewal(4)], ids=str)
def test_declared_block_matches_entries(A):
    b = classify(A).block
    m = b.period
    for k in range(1, b.last_emitter + 1):
        for p in range(m):
            for s in range(0, SIZE // m):
                assert A.entry(k, b.start + p + s * m) == b.M[k - 1][p]


@settings(max_examples=60)
@given(st.integers(1, 6).flatmap(lambda n: st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_finite_matrices_round_trip(rows):
    A = finite_explicit(rows)
    assert parse_matrix(format_matrix(A)) == A


@pytest.mark.parametrize(
    "text",
    ["rules:\nA(1,n)=1\nA(n+1,n)=1", "rules:\nA(1,n)=1\nA(n+1,n)=1\nA(2,2n)=1", "rules:\nA(1,n)=1\nA(3n+2,n)=1"],
)
def test_rule_lists_round_trip(text):
    A = parse_matrix(text)
    assert parse_matrix(format_matrix(A)) == A


@pytest.mark.parametrize("name", ["renewal", "lazy-renewal", "pair-renewal", "prime-renewal", "n-renewal(3)", "full", "ce1", "ce2", "ce3"])
def test_builtins_round_trip(name):
    A = parse_matrix(f"builtin: {name}")
    assert format_matrix(A) == f"builtin: {name}"


def test_rule_list_renewal_agrees_with_builtin():
    A = parse_matrix("rules:\nA(1,n)=1\nA(n+1,n)=1")
    R = renewal()
    assert all(A.entry(i, j) == R.entry(i, j) for i in range(1, 60) for j in range(1, 60))
    assert column_limit_points(A, 32) == [Root.of(1)]


def test_rule_list_pair_renewal_is_detected():
    A = parse_matrix("rules:\nA(1,n)=1\nA(n+1,n)=1\nA(2,2n)=1")
    assert column_limit_points(A, 50) == [Root.of(1), Root.of(1, 2)]
    rep = classify(A, 32)
    assert rep.periodic_renewal is True and rep.block.M == ((1, 1), (0, 1))


@pytest.mark.parametrize(
    "text,line,column",
    [
        ("rules:\nA(1,n)=1\nA(n+1 n)=1", 3, 8),
        ("finite:\n012\n110\n011", 2, 3),
        ("builtin: nope", 1, 10),
        ("finite:\n01\n1", 3, 1),
    ],
)
def test_parse_errors_carry_position(text, line, column):
    with pytest.raises(ParseError) as info:
        parse_matrix(text)
    assert (info.value.line, info.value.column) == (line, column)
