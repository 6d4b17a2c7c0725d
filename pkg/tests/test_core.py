import json

import numpy as np
import pytest

from semichain import core
from semichain.models import bs, itbs, motzkin, pairflip


def test_parse_bs_encoding():
    cells = core.parse_word("a B a b", bs.ALPHABET)
    assert [bs.ALPHABET.symbols[c] for c in cells] == ["a", "B", "a", "b"]


def test_parse_identity_word():
    cells = core.parse_word("e e e", bs.ALPHABET)
    assert list(cells) == [0, 0, 0]


def test_parse_motzkin_encoding():
    cells = core.parse_word("( * )", motzkin.STAR_ALPHABET)
    assert list(cells) == [motzkin.OP, motzkin.ST, motzkin.CL]


def test_parse_unknown_symbol_position():
    with pytest.raises(core.UnknownSymbol) as err:
        core.parse_word("aXa", bs.ALPHABET)
    assert err.value.position == 1


def test_parse_empty_word():
    with pytest.raises(core.EmptyWord):
        core.parse_word("   ", bs.ALPHABET)


def test_format_round_trip():
    for model in (bs.MODEL, itbs.MODEL, motzkin.STAR_MODEL, motzkin.CHIRAL_MODEL, pairflip.MODEL):
        text = "".join(model.alphabet.symbols)
        assert model.format(model.parse(text)) == text


def _relation_index(presentation, lhs_text, rhs_text, alphabet):
    lhs = tuple(alphabet.index(s) for s in lhs_text)
    rhs = tuple(alphabet.index(s) for s in rhs_text)
    for i, rel in enumerate(presentation.relations):
        if rel.lhs == lhs and rel.rhs == rhs:
            return i
    raise AssertionError(f"relation {lhs_text}<->{rhs_text} not found")


def test_apply_relation_at_forward():
    idx = _relation_index(bs.PRESENTATION, "abe", "baa", bs.ALPHABET)
    out = core.apply_relation_at(bs.MODEL.parse("abe"), bs.PRESENTATION, idx, 0)
    assert bs.MODEL.format(out) == "baa"


def test_apply_relation_no_match():
    idx = _relation_index(bs.PRESENTATION, "abe", "baa", bs.ALPHABET)
    assert core.apply_relation_at(bs.MODEL.parse("eee"), bs.PRESENTATION, idx, 0) is None


def test_apply_relation_preserves_length_and_inverts():
    idx = _relation_index(bs.PRESENTATION, "abe", "baa", bs.ALPHABET)
    start = bs.MODEL.parse("eabee")
    fwd = core.apply_relation_at(start, bs.PRESENTATION, idx, 1)
    assert fwd is not None and len(fwd) == len(start)
    back = core.apply_relation_at(fwd, bs.PRESENTATION, idx, 1, direction="backward")
    assert np.array_equal(back, start)


def test_oriented_relation_rejected_backward():
    alphabet = core.Alphabet(("0", "x", "y"), identity=0)
    pres = core.build_presentation(alphabet, [("xy", "yx", True, True)])
    cells = core.parse_word("yx", alphabet)
    with pytest.raises(core.OrientedRelationReversed):
        core.apply_relation_at(cells, pres, 0, 0, direction="backward")


def test_pad_relation_generates_all_insertions():
    rels = core.pad_relation((1, 3), (3, 1, 1), 0)
    padded = {r.lhs for r in rels}
    assert padded == {(0, 1, 3), (1, 0, 3), (1, 3, 0)}
    assert all(r.rhs == (3, 1, 1) for r in rels)


def test_neighbors_free_expansion_of_identity():
    found = {bs.MODEL.format(w) for w in core.neighbor_words((0, 0), bs.PRESENTATION)}
    assert found == {"aA", "Aa", "bB", "Bb"}


def test_neighbors_frozen_pairflip_word():
    word = tuple(pairflip.MODEL.parse("121"))
    assert core.neighbor_words(word, pairflip.PRESENTATION) == set()


def test_neighbors_free_reduction():
    word = tuple(bs.MODEL.parse("aAe"))
    assert tuple(bs.MODEL.parse("eee")) in core.neighbor_words(word, bs.PRESENTATION)


@pytest.mark.parametrize("model", [bs.MODEL, motzkin.STAR_MODEL, pairflip.MODEL])
def test_neighbors_symmetric_for_unoriented(model):
    # y in N(x) iff x in N(y), spot-checked on random words
    from semichain.rng import SplitMix64

    gen = SplitMix64(11).numpy_generator()
    for _ in range(40):
        x = tuple(gen.integers(0, model.alphabet.size, size=6).tolist())
        for y in core.neighbor_words(x, model.presentation):
            assert x in core.neighbor_words(y, model.presentation)


def test_custom_presentation_loader(tmp_path):
    spec = {
        "symbols": ["e", "g", "G"],
        "identity": "e",
        "inverses": {"g": "G"},
        "locality": 3,
        "relations": [{"lhs": ["g", "g"], "rhs": ["G", "G"]}],
    }
    path = tmp_path / "custom.json"
    path.write_text(json.dumps(spec))
    pres = core.load_presentation(path)
    assert pres.alphabet.symbols == ("e", "g", "G")
    # auto-generated trivial relations are present
    word = tuple(core.parse_word("ee", pres.alphabet))
    assert tuple(core.parse_word("gG", pres.alphabet)) in core.neighbor_words(word, pres)
    # the declared relation applies
    word = tuple(core.parse_word("gg", pres.alphabet))
    assert tuple(core.parse_word("GG", pres.alphabet)) in core.neighbor_words(word, pres)


def test_alphabet_validation():
    with pytest.raises(core.CoreError):
        core.Alphabet(("a", "a"))
    with pytest.raises(core.CoreError):
        core.Alphabet(("a", "b"), inverse_of=(1, 0, 0))
    with pytest.raises(core.CoreError):
        core.Alphabet(("e", "a", "A"), identity=0, inverse_of=(1, 0, 2))
