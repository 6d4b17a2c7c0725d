import numpy as np
import pytest

from semichain.models import bs, itbs
from semichain.models.base import EvaluatorUnavailable, TooLong
from semichain.rng import SplitMix64

# frozen from the bounded-closure build (cap-stable at 7 vs 8)
ITBS_CLASS_COUNT = 167
ITBS_IDENTITY_CLASS_SIZE = 19


@pytest.fixture(scope="module")
def classes():
    return itbs.window_classes()


def test_class_count(classes):
    groups = {}
    for w, c in classes.items():
        groups.setdefault(c, []).append(w)
    assert len(groups) == ITBS_CLASS_COUNT
    assert len(groups[classes[(0, 0, 0)]]) == ITBS_IDENTITY_CLASS_SIZE


@pytest.mark.parametrize(
    "u,v,equal",
    [
        ("cCe", "eee", True),
        ("bce", "cbb", True),
        ("abe", "bae", False),
        ("Bce", "cBB", True),
        ("Cbc", "bbe", True),
        ("ace", "cae", False),
        ("abe", "baa", True),
    ],
)
def test_window_equalities(u, v, equal):
    assert itbs.itbs_window_equal(itbs.MODEL.parse(u), itbs.MODEL.parse(v)) is equal


def test_equality_is_an_equivalence(classes):
    gen = SplitMix64(3).numpy_generator()
    windows = [tuple(gen.integers(0, 7, size=3).tolist()) for _ in range(60)]
    for u in windows[:20]:
        assert itbs.itbs_window_equal(u, u)
    for u, v, w in zip(windows[0::3], windows[1::3], windows[2::3]):
        if itbs.itbs_window_equal(u, v) and itbs.itbs_window_equal(v, w):
            assert itbs.itbs_window_equal(u, w)
        assert itbs.itbs_window_equal(u, v) == itbs.itbs_window_equal(v, u)


def test_agrees_with_bs_on_c_free_windows(classes):
    # the two-generator subgroup embeds, so c-free windows partition identically
    c_free = [w for w in classes if all(s < 5 for s in w)]
    for u in c_free[::7]:
        for v in c_free[::11]:
            closure_equal = classes[u] == classes[v]
            matrix_equal = bs.evaluate(u) == bs.evaluate(v)
            assert closure_equal == matrix_equal, (u, v)


def test_closure_machinery_reproduces_bs_exactly():
    # run the same bounded closure on the two-generator alphabet and compare
    # against the exact matrix partition of all 125 windows
    rules = itbs._index_rules(bs.PENTAGON, bs.ALPHABET)
    part = itbs.bounded_window_partition(5, bs.ALPHABET.inverse_of, rules, cap=8)
    windows = list(part)
    for u in windows[::3]:
        for v in windows[::5]:
            assert (part[u] == part[v]) == (bs.evaluate(u) == bs.evaluate(v)), (u, v)


def test_cap_stability_guard():
    itbs._partition_cache.clear()
    part = itbs.window_classes(cap=itbs.DEFAULT_CLOSURE_CAP, check_stability=True)
    assert len(part) == 343


def test_window_conserves_c_charge(classes):
    groups = {}
    for w, c in classes.items():
        groups.setdefault(c, []).append(w)
    for members in groups.values():
        charges = {itbs.n_c(w) for w in members}
        assert len(charges) == 1


def test_full_word_labels_unavailable():
    with pytest.raises(EvaluatorUnavailable):
        itbs.MODEL.sector_label(tuple(itbs.MODEL.parse("abcab")))


def test_w_huge_core_structure():
    core = itbs.w_huge_core(1)
    assert itbs.MODEL.format(core) == "ACBcACbcaCBcaCbc"
    assert len(core) == 16
    for n in (1, 2, 3):
        w = itbs.w_huge_core(n)
        assert len(w) == 8 * n + 8
        assert itbs.n_c(w) == 0
        assert itbs.n_abs_c(w) == 8 * n
        nb = sum({3: 1, 4: -1}.get(s, 0) for s in w)
        assert nb == 0


def test_w_huge_padding():
    rng = SplitMix64(4)
    cells = itbs.make_w_huge(2, 30, rng)
    assert len(cells) == 30
    assert itbs.n_abs_c(cells) == 16
    with pytest.raises(TooLong):
        itbs.make_w_huge(2, 20, SplitMix64(0))


def test_n_abs_c_examples():
    assert itbs.n_abs_c(itbs.MODEL.parse("cCe")) == 2
    assert itbs.n_abs_c(itbs.MODEL.parse("eee")) == 0
