import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmspectra.degseq import (DegreeSequence, ParityError, condition_report,
                              degree_moment_diagnostic, load_degrees,
                              make_regular, make_two_valued, save_degrees)


def test_make_regular_basic():
    ds = make_regular(4, 3)
    assert ds.degrees.tolist() == [3, 3, 3, 3]
    assert ds.total == 12


def test_make_regular_minimal():
    ds = make_regular(2, 1)
    assert ds.degrees.tolist() == [1, 1]
    assert ds.total == 2


def test_make_regular_parity_error():
    with pytest.raises(ParityError):
        make_regular(3, 3)


def test_zero_degrees_rejected():
    with pytest.raises(ValueError):
        DegreeSequence([0, 2])


def test_two_valued_no_randomness_when_equal():
    ds = make_two_valued(2, 1, 1, rng_seed=7)
    assert ds.degrees.tolist() == [1, 1]


def test_two_valued_counts_concentrate():
    # each count within 4*sqrt(n)/2 of n/2 in >= 99 of 100 seeds
    n, band = 10_000, 4 * math.sqrt(10_000) / 2
    hits = 0
    for seed in range(100):
        ds = make_two_valued(n, 100, 500, seed)
        c1 = int(np.count_nonzero(ds.degrees == 100))
        if abs(c1 - n / 2) <= band:
            hits += 1
    assert hits >= 99


def test_two_valued_paper_regime():
    ds = make_two_valued(10_000, 10, 200, 3)
    assert ds.total / ds.n == pytest.approx(105, abs=3)


def test_two_valued_fixup_recorded():
    # degrees 1/2 give odd totals about half the time; the fixup must keep
    # the metadata honest and the total even
    saw_fixup = False
    for seed in range(20):
        ds = make_two_valued(5, 1, 2, seed)
        assert ds.total % 2 == 0
        if ds.metadata["fixup_vertex"] is not None:
            saw_fixup = True
    assert saw_fixup


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 40), d1=st.integers(1, 9), d2=st.integers(1, 9),
       seed=st.integers(0, 2**32 - 1))
def test_two_valued_parity_always_even(n, d1, d2, seed):
    assert make_two_valued(n, d1, d2, seed).total % 2 == 0


def test_condition_report_regular():
    ds = make_regular(10_000, 100)
    rep = condition_report(ds, C=1.0, epsilon=0.01)
    assert rep.threshold == pytest.approx(10.0)
    assert rep.min_degree == 100
    assert rep.satisfies_strict
    assert rep.fraction_below == 0.0
    assert rep.epsilon_bound_holds


def test_condition_report_two_valued_half_below():
    ds = make_two_valued(10_000, 10, 200, 3)
    rep = condition_report(ds, C=1.0, epsilon=0.6)
    assert rep.threshold == pytest.approx(10.25, abs=0.1)
    assert rep.threshold > 10
    assert rep.fraction_below == pytest.approx(0.5, abs=0.03)


def test_condition_report_zero_C():
    ds = make_two_valued(100, 3, 7, 0)
    rep = condition_report(ds, C=0.0, epsilon=0.1)
    assert rep.threshold == 0.0
    assert rep.fraction_below == 0.0


@settings(max_examples=30, deadline=None)
@given(degs=st.lists(st.integers(1, 20), min_size=2, max_size=30),
       c1=st.floats(0, 5), c2=st.floats(0, 5))
def test_condition_report_monotone_in_C(degs, c1, c2):
    if sum(degs) % 2:
        degs.append(1)
    ds = DegreeSequence(degs)
    lo, hi = sorted([c1, c2])
    assert (condition_report(ds, lo, 0.1).fraction_below
            <= condition_report(ds, hi, 0.1).fraction_below)


def test_degree_moment_regular_closed_form():
    # regular graphs: ratio(m) = (sqrt(D/n)/d)^m = d^(-m/2)
    for n, d in [(100, 4), (50, 9)]:
        ds = make_regular(n, d)
        for m in range(1, 5):
            direct = sum(float(x) ** (-m) for x in ds.degrees) \
                / (n * (n / ds.total) ** (m / 2))
            assert degree_moment_diagnostic(ds, m) == pytest.approx(direct, rel=1e-12)
            assert degree_moment_diagnostic(ds, m) == pytest.approx(
                (math.sqrt(ds.total / n) / d) ** m, rel=1e-12)
    assert degree_moment_diagnostic(make_regular(100, 4), 1) == pytest.approx(0.5)


def test_degree_moment_single_vertex():
    ds = DegreeSequence([2])
    # sum d^-2 = 0.25, denominator 1 * (1/2)^1 = 0.5
    assert degree_moment_diagnostic(ds, 2) == pytest.approx(0.5)


def test_degree_moment_m_zero_is_one():
    ds = make_two_valued(200, 3, 9, 1)
    assert degree_moment_diagnostic(ds, 0) == pytest.approx(1.0)


def test_degree_moment_flags_low_degrees():
    # a constant fraction of vertices far below sqrt(D/n) dominates the sum
    # and keeps the m=2 ratio large; the all-heavy version decays like 1/d
    n = 400
    mixed = DegreeSequence([400] * (n // 2) + [4] * (n // 2))
    assert degree_moment_diagnostic(mixed, 2) > 1.0
    assert degree_moment_diagnostic(make_regular(n, 400), 2) < 0.01


def test_serialization_round_trip(tmp_path):
    ds = make_two_valued(50, 2, 5, 11)
    path = tmp_path / "degrees.txt"
    save_degrees(ds, path)
    back = load_degrees(path)
    assert np.array_equal(back.degrees, ds.degrees)
    assert back.metadata == ds.metadata
