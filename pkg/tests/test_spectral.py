import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcms.errors import NonNormalForm, NotExtendableError, UnsupportedTerm
from gcms.matrix import Root, full_shift, lazy_renewal, n_renewal, pair_renewal, renewal
from gcms.spectral import (
    GAElement,
    MeanCycleGraph,
    NoCycle,
    brute_force_radius,
    choose_finite_alphabet,
    ga_element_from_json,
    gelfand,
    max_mean_cycle,
    nonzero_term,
    normal_form,
    spectral_radius,
)
from oracles import exhaustive_max_mean, oracle_radius, random_renewal_weight

A = renewal()


@pytest.mark.parametrize(
    "gamma,F,nonzero,words",
    [((2,), (1,), True, ((2,),)), ((1,), (4,), True, ((1, 3),)), ((), (3, 5), False, ()), ((3, 2), (1,), True, ((3, 2),))],
)
def test_renewal_normal_forms(gamma, F, nonzero, words):
    ok, nf = nonzero_term(A, gamma, F)
    assert ok is nonzero and nf.words == words and not nf.identity


def test_identity_term():
    ok, nf = nonzero_term(A, (), (1,))
    assert ok and nf.identity


def test_inadmissible_term_is_rejected():
    with pytest.raises(NonNormalForm):
        normal_form(GAElement.build(0, [(1, (2, 4), ())]), A)


def test_gelfand_examples():
    f = gelfand(GAElement.build(0, [(2, (1,), ()), (3, (2,), ())]), A, [1, 2])
    assert f.depth == 1 and f.table == {(1,): 2, (2,): 3}
    f = gelfand(GAElement.build(1), A, [1, 2])
    assert set(f.table.values()) == {1} and set(f.empty_word_values.values()) == {1}
    f = gelfand(GAElement.build(1, [(1, (1,), ())]), A, [1, 2, 3])
    assert f.table == {(1,): 2, (2,): 1, (3,): 1}
    assert f.empty_word_values == {Root.of(1): 1}


@pytest.mark.parametrize(
    "terms,expected",
    [([(1, (2,), ())], (1, 2)), ([(1, (1, 3), ())], (1, 2, 3)), ([], (1,))],
)
def test_choose_finite_alphabet(terms, expected):
    assert choose_finite_alphabet(GAElement.build(0, terms), A) == expected


def test_cycle_mean_examples():
    g = MeanCycleGraph.from_edges(1, [(0, 0, math.log(2))])
    assert max_mean_cycle(g).value == pytest.approx(math.log(2), rel=1e-15)
    g = MeanCycleGraph.from_edges(2, [(0, 1, math.log(2)), (1, 0, math.log(3))])
    assert max_mean_cycle(g).value == pytest.approx(math.log(math.sqrt(6)), rel=1e-15)
    assert isinstance(max_mean_cycle(MeanCycleGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])), NoCycle)


def test_minus_infinity_edges_are_dropped():
    g = MeanCycleGraph.from_edges(2, [(0, 0, -math.inf), (0, 1, 1.0), (1, 0, 2.0)])
    assert all(w != -math.inf for _, _, w in g.edges)
    assert max_mean_cycle(g).value == 1.5
    only_bad = MeanCycleGraph.from_edges(2, [(0, 0, -math.inf), (1, 1, -math.inf), (0, 1, 3.0)])
    assert isinstance(max_mean_cycle(only_bad), NoCycle)


def _random_graph(rng, n):
    edges = []
    for u in range(n):
        for v in range(n):
            r = rng.random()
            if r < 0.3:
                edges.append((u, v, float(rng.integers(-20, 21)) / float(rng.integers(1, 7))))
            elif r < 0.35:
                edges.append((u, v, -math.inf))
    return edges


def test_cycle_means_match_exhaustive_search():
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        edges = _random_graph(rng, n)
        res = max_mean_cycle(MeanCycleGraph.from_edges(n, edges))
        expected = exhaustive_max_mean(n, edges)
        if expected is None:
            assert isinstance(res, NoCycle)
            continue
        assert res.value == pytest.approx(expected, rel=1e-12, abs=1e-12)
        w = {(u, v): x for u, v, x in edges if x != -math.inf}
        cyc = res.cycle
        assert all((a, b) in w for a, b in zip(cyc, cyc[1:] + cyc[:1]))


@pytest.mark.parametrize(
    "terms,expected",
    [([(1, (1,), ())], 1.0), ([(1, (2,), ())], 0.0), ([(2, (1,), ()), (3, (2,), ())], math.sqrt(6))],
)
def test_radius_examples(terms, expected):
    a = GAElement.build(0, terms)
    assert spectral_radius(a, A).radius == expected
    assert brute_force_radius(a, A, 8) == expected


@pytest.mark.parametrize("lam,expected", [(1, 1.0), (5, 5.0), (-3j, 3.0)])
def test_brute_force_scalar_examples(lam, expected):
    assert brute_force_radius(GAElement.build(lam), A, 6) == expected


def test_radius_certificate_names_the_cycle():
    res = spectral_radius(GAElement.build(0, [(2, (1,), ()), (3, (2,), ())]), A)
    assert res.branch == "sigma" and sorted(res.certificate["cycle"]) == ["1", "2"]


def test_empty_word_branch_wins():
    res = spectral_radius(GAElement.build(-3, [(1, (1,), ())]), A)
    assert res.branch == "empty" and res.radius == 3.0


def test_not_extendable_matrix_is_rejected():
    with pytest.raises(NotExtendableError):
        spectral_radius(GAElement.build(1), full_shift())


def test_infinite_common_range_is_rejected():
    with pytest.raises(UnsupportedTerm):
        spectral_radius(GAElement.build(0, [(1, (), (2,))]), pair_renewal())


@pytest.mark.parametrize("M", [lazy_renewal(), pair_renewal(), n_renewal(3)], ids=str)
def test_other_extendable_families_agree_with_brute_force(M):
    rng = np.random.default_rng(99)
    for _ in range(15):
        terms = []
        for _ in range(int(rng.integers(1, 4))):
            g = [int(rng.integers(1, 5))]
            if rng.random() < 0.5:
                nxt = [k for k in range(1, 6) if M.entry(g[-1], k)]
                g.append(int(rng.choice(nxt)))
            terms.append((int(rng.integers(-3, 4)), tuple(g), ()))
        a = GAElement.build(int(rng.integers(-3, 4)), terms)
        L = normal_form(a, M).depth
        assert spectral_radius(a, M).radius == pytest.approx(brute_force_radius(a, M, 2 * L + 4), rel=1e-12, abs=1e-15)


CORPUS = [random_renewal_weight(np.random.default_rng(seed)) for seed in range(100)]


@pytest.mark.parametrize("lambda0,terms", CORPUS)
def test_random_corpus_matches_both_oracles(lambda0, terms):
    a = GAElement.build(lambda0, terms)
    L = normal_form(a, A).depth
    r = spectral_radius(a, A).radius
    assert r == pytest.approx(brute_force_radius(a, A, 2 * L + 4), rel=1e-12, abs=1e-15)
    assert r == pytest.approx(oracle_radius(lambda0, terms, max(2 * L + 4, 8), range(1, 7)), rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("lambda0,terms", CORPUS[:40])
def test_enlarging_the_alphabet_keeps_the_radius(lambda0, terms):
    a = GAElement.build(lambda0, terms)
    base = choose_finite_alphabet(a, A)
    r = spectral_radius(a, A).radius
    for extra in (1, 3):
        bigger = tuple(range(1, max(base) + extra + 1))
        assert spectral_radius(a, A, alphabet=bigger).radius == pytest.approx(r, rel=1e-12, abs=1e-15)


@settings(max_examples=20, deadline=None)
@given(
    st.integers(0, 99),
    st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False),
)
def test_homogeneity(idx, c):
    a = GAElement.build(*CORPUS[idx])
    assert spectral_radius(a.scaled(c), A).radius == pytest.approx(abs(c) * spectral_radius(a, A).radius, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize(
    "left,right",
    [
        ([(1, (2,), (1,))], [(1, (2,), ())]),
        ([(2, (1,), (4,))], [(2, (1, 3), ())]),
        ([(1, (), (1,))], []),
    ],
)
def test_rewritten_terms_give_the_same_tables(left, right):
    lam_left = 0
    lam_right = 1 if not right else 0
    a, b = GAElement.build(lam_left, left), GAElement.build(lam_right, right)
    alph = (1, 2, 3, 4)
    fa, fb = gelfand(a, A, alph), gelfand(b, A, alph)
    assert fa.depth == fb.depth and fa.table == fb.table
    assert fa.empty_word_values == fb.empty_word_values
    assert spectral_radius(a, A).radius == spectral_radius(b, A).radius


def test_weight_json_round_trip():
    a = GAElement.build(1j, [(2 - 1j, (1,), (3,)), (-1, (), (1, 2))])
    assert ga_element_from_json(a.to_json()) == a
