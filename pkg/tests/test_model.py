import json
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from distinct_sums.errors import InputError
from distinct_sums.model import (FamilySpec, Sequence, as_fraction, binary_entropy, f_entropy,
                                 family_size, index_set, precision_bits, shannon_entropy,
                                 subset_sum)
from oracles import family_count


def test_sequence_round_trip_big_ints():
    seq = Sequence(2, ((1, 2 ** 100), (3, 0)), 2 ** 100)
    back = Sequence.loads(seq.dumps())
    assert back == seq
    assert json.loads(seq.dumps())["elements"][0][1] == str(2 ** 100)


@given(st.lists(st.integers(0, 10 ** 30), min_size=1, max_size=12))
def test_scalar_round_trip(values):
    seq = Sequence.from_ints(values, max(values))
    assert Sequence.loads(seq.dumps()) == seq
    assert seq.values == tuple(values)


@pytest.mark.parametrize("bad", [
    '{"k": 1, "elements": [["-1"]]}',
    '{"k": 1, "elements": [["1.5"]]}',
    '{"k": 2, "elements": [["1"]]}',
    '{"k": 1, "elements": []}',
    '{"k": 1, "n": 3, "elements": [["1"]]}',
    '{"elements": [["1"]]}',
    '{"k": 1, "elements": [["7"]], "bound": "3"}',
    '[1, 2]',
    '{not json',
])
def test_malformed_sequences(bad):
    with pytest.raises(InputError):
        Sequence.loads(bad)


def test_rejects_bool_and_negative():
    with pytest.raises(InputError):
        Sequence.from_ints([True])
    with pytest.raises(InputError):
        Sequence.from_ints([-2])


def test_tight_bound_and_views():
    seq = Sequence.tight(2, [(1, 5), (4, 2)])
    assert seq.declared_bound == 5 and seq.n == 2
    with pytest.raises(InputError):
        seq.values


def test_as_fraction_reads_decimals_exactly():
    assert as_fraction(0.3) == Fraction(3, 10)
    assert as_fraction("0.24") == Fraction(6, 25)
    assert as_fraction("1/3") == Fraction(1, 3)
    assert as_fraction(mpmath.mpf(0.5)) == Fraction(1, 2)
    for bad in ("x", float("nan"), None, True):
        with pytest.raises(InputError):
            as_fraction(bad)


@pytest.mark.parametrize("lam,n,m", [(Fraction(1, 4), 10, 2), (1, 7, 7), (Fraction(1, 3), 9, 3),
                                     (Fraction(1, 10), 9, 0)])
def test_family_max_size(lam, n, m):
    assert FamilySpec(lam, n).max_size() == m


@given(st.integers(1, 30), st.fractions(min_value=Fraction(1, 50), max_value=1))
def test_family_size_matches_sum(n, lam):
    assert family_size(FamilySpec(lam, n)) == family_count(n, lam)


def test_family_rejects_lambda():
    for lam in (0, Fraction(3, 2), -1):
        with pytest.raises(InputError):
            FamilySpec(lam, 5)


def test_index_set_and_subset_sum():
    seq = Sequence(2, ((1, 2), (3, 4), (5, 6)))
    assert subset_sum(seq, [3, 1]) == (6, 8)
    assert subset_sum(seq, []) == (0, 0)
    assert index_set([3, 1]) == (1, 3)
    for bad in ([1, 1], [0], [4]):
        with pytest.raises(InputError):
            index_set(bad, 3)


def test_entropies():
    assert f_entropy(Fraction(1, 4)) == mpmath.mpf(1.5)
    assert abs(f_entropy(Fraction(1, 3)) - mpmath.log(3, 2)) < 1e-15
    assert binary_entropy(Fraction(1, 2)) == 1
    assert binary_entropy(0) == 0 and binary_entropy(1) == 0
    want = -(0.6 * math.log2(0.3) + 0.4 * math.log2(0.4))
    assert abs(f_entropy(Fraction(3, 10)) - want) < 1e-12
    assert shannon_entropy([Fraction(1, 4)] * 4) == 2
    for bad in (0, Fraction(2, 5)):
        with pytest.raises(InputError):
            f_entropy(bad)
    with pytest.raises(InputError):
        binary_entropy(Fraction(3, 2))


@given(st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(1, 3)))
def test_f_matches_three_way_entropy(lam):
    assert abs(f_entropy(lam) - shannon_entropy([lam, lam, 1 - 2 * lam])) < 1e-15


def test_precision_env(monkeypatch):
    monkeypatch.setenv("DSL_PRECISION_BITS", "128")
    assert precision_bits() == 128
    monkeypatch.setenv("DSL_PRECISION_BITS", "lots")
    with pytest.raises(InputError):
        precision_bits()
    monkeypatch.delenv("DSL_PRECISION_BITS")
    assert precision_bits() == 64
