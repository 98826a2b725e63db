import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcms.conformal import Constant, measure_of_cylinder, normalize
from gcms.convergence import (
    atom_mass_vanishes,
    auto_betas,
    completed_word,
    converge_report,
    limit_measure_on_cylinder,
    lipschitz_bound,
    mu_beta_on_cylinder,
    renewal_cylinders,
)
from gcms.errors import BetaBelowCritical, PreconditionError
from gcms.matrix import Root, renewal

LOG2 = math.log(2.0)
LN4 = math.log(4.0)


def test_completed_word():
    assert completed_word((1, 3)) == (1, 3, 2, 1)
    assert completed_word((2, 1)) == (2, 1)
    assert completed_word(()) == ()


def test_mu_beta_examples():
    assert mu_beta_on_cylinder(LN4, (2, 1)) == pytest.approx(1 / 16, rel=1e-15)
    assert mu_beta_on_cylinder(math.inf, (1,)) == 0.0
    assert mu_beta_on_cylinder(LOG2 + 1e-6, (1, 2, 1)) == pytest.approx(1 / 8, abs=1e-5)
    with pytest.raises(BetaBelowCritical):
        mu_beta_on_cylinder(LOG2, (1,))
    with pytest.raises(PreconditionError):
        mu_beta_on_cylinder(1.0, (2, 4))


@pytest.mark.parametrize("alpha,expected", [((1, 1, 1), 1 / 8), ((), 1.0), ((1,), 0.5), ((3,), 1 / 8)])
def test_limit_measure(alpha, expected):
    assert limit_measure_on_cylinder(alpha) == expected


def test_atom_examples():
    rows, decreasing = atom_mass_vanishes((1,), [LN4, 1.0, LOG2 + 0.01])
    assert rows[0].weight == pytest.approx(1 / 6, rel=1e-14)
    assert rows[-1].weight < 0.02 and decreasing
    rows, _ = atom_mass_vanishes((), [math.inf])
    assert rows[0].weight == 1.0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.floats(LOG2 + 1e-3, 2.0))
def test_atomic_measure_agrees_with_closed_form(n, beta):
    mu = normalize(renewal(), Constant(1.0), beta, Root.of(1))
    for alpha in renewal_cylinders([n]):
        lo, hi = measure_of_cylinder(mu, alpha)
        closed = mu_beta_on_cylinder(beta, alpha)
        assert lo - 1e-15 <= closed <= hi + 1e-15


def test_report_example_is_monotone():
    rep = converge_report(renewal_cylinders(range(1, 5)), [1.0, 0.8, 0.72, 0.70])
    assert rep.monotone
    assert all(s == "atomic" for s in rep.sources)


def test_empty_cylinder_has_no_gap():
    rep = converge_report([()], [1.0, 0.8])
    assert all(g <= 1e-12 for g in rep.max_gap)


def test_far_beta_gap_is_exact():
    rep = converge_report([(1, 1)], [5.0], atomic=False)
    assert rep.max_gap[0] == abs(math.exp(-10.0) - 0.25)


def test_gap_respects_first_order_bound():
    cyl = renewal_cylinders(range(1, 5))
    for beta in auto_betas(0.3, 8):
        rep = converge_report(cyl, [beta], atomic=False)
        # |e^{-n b} - 2^{-n}| <= n (b - log 2) 2^{-n} by the mean value theorem
        assert rep.max_gap[0] <= lipschitz_bound(cyl, beta)


def test_betas_must_decrease_above_log2():
    with pytest.raises(PreconditionError):
        converge_report([(1,)], [0.8, 0.9])
    with pytest.raises(BetaBelowCritical):
        converge_report([(1,)], [0.8, LOG2])


def test_auto_betas():
    b = auto_betas(0.3, 8)
    assert len(b) == 8 and b[0] == pytest.approx(LOG2 + 0.3) and all(x > LOG2 for x in b)
    assert all(x > y for x, y in zip(b, b[1:]))


def test_renewal_cylinders_end_in_one():
    cyl = renewal_cylinders([3])
    assert len(cyl) == 4 and all(w[-1] == 1 for w in cyl)
