from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import sre_greedy
from stellar.errors import CorruptionError, ParameterError, UsageError
from stellar.sre import (SreList, sre_append, sre_compress, sre_decode, sre_expand_in_place,
                         sre_iterate, sre_size)

ascending = st.sets(st.integers(0, 200), max_size=40).map(sorted)


def test_run_anchors():
    assert list(sre_compress([1, 2, 3, 4]).entries) == [-1, 3]
    assert list(sre_compress([40, 41, 42, 43, 44]).entries) == [-40, 4]


def test_twenty_cells_in_four_runs_take_eight_entries():
    cells = list(range(10, 15)) + list(range(30, 35)) + list(range(50, 55)) + list(range(70, 75))
    lst = sre_compress(cells)
    assert lst.num_entries == 8
    assert lst.size() == 20
    assert list(lst) == cells


def test_zero_is_kept_as_literal():
    assert list(sre_compress([0, 1, 2, 3]).entries) == [0, -1, 2]
    assert list(sre_compress([0]).entries) == [0]
    assert list(sre_compress([0, 1]).entries) == [0, 1]


def test_short_runs_stay_literal():
    assert list(sre_compress([5, 6]).entries) == [5, 6]
    assert list(sre_compress([5, 6, 7]).entries) == [-5, 2]


def test_empty_list():
    lst = sre_compress([])
    assert lst.num_entries == 0 and lst.size() == 0
    assert sre_decode(lst).size == 0
    assert list(sre_iterate(lst)) == []


def test_exhaustive_small_universe():
    for r in range(0, 9):
        for sub in combinations(range(12), r):
            lst = sre_compress(sub)
            assert list(lst.entries) == sre_greedy(sub)
            assert lst.decode().tolist() == list(sub)
            assert lst.size() == len(sub)
            folded = SreList()
            for x in sub:
                folded.append(x)
            assert folded == lst


@given(ascending)
def test_round_trip_and_size(vals):
    lst = sre_compress(vals)
    assert list(lst) == vals
    assert lst.decode().tolist() == vals
    assert sre_size(lst) == len(vals)
    assert list(lst.entries) == sre_greedy(vals)


@given(ascending)
def test_append_fold_matches_compress(vals):
    lst = SreList()
    for x in vals:
        sre_append(lst, x)
    assert lst == sre_compress(vals)


@given(ascending, st.data())
def test_expand_in_place_keeps_the_set(vals, data):
    lst = sre_compress(vals)
    heads = [i for i, e in enumerate(lst.entries) if e < 0]
    if not heads:
        return
    pos = data.draw(st.sampled_from(heads))
    before = lst.size()
    sre_expand_in_place(lst, pos)
    assert sorted(lst) == vals
    assert lst.size() == before
    assert all(e >= 0 for e in lst.entries[pos:pos + 2])


def test_expand_rejects_non_header():
    lst = sre_compress([1, 5, 9])
    with pytest.raises(UsageError):
        sre_expand_in_place(lst, 0)


def test_bad_inputs():
    with pytest.raises(ParameterError):
        sre_compress([3, 2])
    with pytest.raises(ParameterError):
        sre_compress([-1, 2])
    with pytest.raises(ParameterError):
        sre_append(SreList(), -3)


def test_corrupt_run_header_detected():
    bad = SreList([4, -7])
    with pytest.raises(CorruptionError):
        sre_size(bad)
    with pytest.raises(CorruptionError):
        sre_decode(bad)
    with pytest.raises(CorruptionError):
        list(sre_iterate(bad))


def test_literal_list_is_uncompressed():
    lst = SreList.literal([1, 2, 3, 4])
    assert lst.num_entries == 4 and lst.size() == 4


@settings(max_examples=50)
@given(ascending)
def test_numpy_and_array_construction_agree(vals):
    assert SreList(np.asarray(sre_greedy(vals), dtype=np.int64)) == sre_compress(vals)
