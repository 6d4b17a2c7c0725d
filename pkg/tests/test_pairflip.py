from itertools import product

import pytest

from semichain.core import neighbor_words
from semichain.models import pairflip as pf


def test_reduced_string_cancels_pairs():
    assert pf.reduced_string(pf.MODEL.parse("112")) == (1,)
    assert pf.reduced_string(pf.MODEL.parse("1221")) == ()
    assert pf.reduced_string(pf.MODEL.parse("121")) == (0, 1, 0)


def test_sector_label_shared_under_flips():
    a = pf.MODEL.sector_label(tuple(pf.MODEL.parse("113")))
    b = pf.MODEL.sector_label(tuple(pf.MODEL.parse("223")))
    assert a == b


def test_frozen_words():
    assert pf.is_frozen(pf.MODEL.parse("121"))
    assert not pf.is_frozen(pf.MODEL.parse("112"))


def test_label_complete_at_small_length():
    # the (length, irreducible string) label matches move connectivity
    # exactly, exhaustively at L = 6
    from semichain import oracle

    part = oracle.enumerate_sectors(pf.MODEL, 6)
    for words in part.by_evaluator.values():
        comps = [c for c in part.by_moves.values() if c & words]
        merged = set().union(*comps)
        assert merged == words


def test_labels_conserved_by_moves():
    for L in (4, 5):
        for w in product(range(3), repeat=L):
            ref = pf.MODEL.sector_label(w)
            for v in neighbor_words(w, pf.PRESENTATION):
                assert pf.MODEL.sector_label(v) == ref
