import re

import pytest

from backend.block_data import BlockData
from backend.degeneration_poset import (hasse, leq, minimality_check, minimality_report, oracle_invariants,
                                        representative_pairs, saturated_chain, to_dot)
from backend.errors import PreconditionError
from backend.link_patterns import Eolp, from_multiplicities, to_multiplicities
from backend.orbit_classify import rank_profile
from backend.quiver_reps import Decomposition, invariant_vector


def test_two_orbits_in_one_block(pattern):
    data = BlockData.of([2])
    poset = hasse(data)
    loop, dots = pattern("U11", data), pattern("V1^2", data)
    assert poset.covers == [(poset.index(loop), poset.index(dots))]
    assert saturated_chain([loop, dots], data, poset)


def test_blocks_two_one_form_a_chain(pattern, blocks21):
    poset = hasse(blocks21)
    chain = [pattern(text, blocks21) for text in ("U21 + V1", "U11 + V2", "U12 + V1", "V1^2 + V2")]
    assert [poset.dims[poset.index(e)] for e in chain] == [4, 3, 2, 0]
    assert len(poset.covers) == 3
    assert saturated_chain(chain, blocks21, poset)
    assert poset.minimum == poset.index(chain[0])
    assert poset.maximum == poset.index(chain[-1])


def test_loop_degenerates_to_upper_arrow(pattern, blocks21):
    assert leq(pattern("U11 + V2", blocks21), pattern("U12 + V1", blocks21), blocks21)
    assert not leq(pattern("U12 + V1", blocks21), pattern("U11 + V2", blocks21), blocks21)


@pytest.mark.parametrize("blocks, chain", [
    ((1, 2), ["U21 + V2", "U22 + V1", "U12 + V2"]),
    ((2, 2), ["U21^2", "U21 + U12", "U11 + U22", "U12^2"]),
])
def test_saturated_chains(pattern, blocks, chain):
    data = BlockData.of(blocks)
    assert saturated_chain([pattern(text, data) for text in chain], data)


def test_non_saturated_chain(pattern, blocks21):
    chain = [pattern("U21 + V1", blocks21), pattern("U12 + V1", blocks21)]
    assert not saturated_chain(chain, blocks21)


def test_dot_output(blocks21):
    dot = to_dot(hasse(blocks21))
    assert dot.startswith("digraph orbits {")
    assert dot.count("[label=") == 4
    assert len(re.findall(r"^  n\d+ -> n\d+;$", dot, re.M)) == 3
    graph = hasse(blocks21).graph()
    assert graph.number_of_edges() == 3
    assert all(f"{attrs['label']} (dim {attrs['dim']})" in dot for _, attrs in graph.nodes(data=True))


@pytest.mark.parametrize("blocks", [(1, 1, 1), (1, 1, 1, 1)])
def test_borel_covers_drop_dimension_by_one(blocks):
    poset = hasse(BlockData.of(blocks))
    assert all(poset.dims[j] == poset.dims[i] - 1 for i, j in poset.covers)


@pytest.mark.parametrize("blocks", [(1, 1), (2, 1), (1, 2), (1, 1, 1), (2, 2), (1, 2, 1), (3, 1), (2, 1, 1)])
def test_poset_laws_and_unique_maximum(blocks):
    data = BlockData.of(blocks)
    poset = hasse(data)
    size = len(poset.elements)
    rel = poset.relation
    for i in range(size):
        assert rel[i][i]
        for j in range(size):
            if i != j and rel[i][j]:
                assert not rel[j][i]
            for k in range(size):
                if rel[i][j] and rel[j][k]:
                    assert rel[i][k]
    assert poset.maximum == poset.index(Eolp.all_dots(data))
    assert poset.hom_order is not data.is_borel


@pytest.mark.parametrize("blocks", [(2, 1), (1, 1, 1), (1, 2, 1), (2, 2)])
def test_three_orders_agree(blocks):
    data = BlockData.of(blocks)
    for e, N in representative_pairs(data):
        vector = invariant_vector(to_multiplicities(e), data.p)
        profile = rank_profile(N, data)
        assert oracle_invariants(N, data) == (vector.a, vector.b) == (profile.a, profile.b)


def test_covers_strictly_increase_invariants():
    data = BlockData.of([1, 2, 1])
    poset = hasse(data)
    for i, j in poset.covers:
        low = invariant_vector(to_multiplicities(poset.elements[i]), data.p)
        high = invariant_vector(to_multiplicities(poset.elements[j]), data.p)
        assert low.a + low.b != high.a + high.b
        assert all(x <= y for x, y in zip(low.a + low.b, high.a + high.b))


def test_minimality_through_loop(blocks21):
    D, Dp, W = Decomposition.parse("U21"), Decomposition.parse("U12"), Decomposition.parse("V1")
    assert not minimality_check(D, Dp, W, blocks21)
    report = minimality_report(D, Dp, W, blocks21)
    assert report.hom_difference_criterion is False
    assert "hom-difference" not in report.disagreements


def test_minimality_of_a_single_swap():
    data = BlockData.of([1, 1])
    report = minimality_report(Decomposition.parse("U21"), Decomposition.parse("U12"), Decomposition(), data)
    assert report.is_cover
    assert report.interior_criterion is True


def test_minimality_preconditions(blocks21):
    with pytest.raises(PreconditionError):
        minimality_check(Decomposition.parse("U12"), Decomposition.parse("U21"), Decomposition.parse("V1"), blocks21)
    with pytest.raises(PreconditionError):
        minimality_check(Decomposition.parse("U21"), Decomposition.parse("U12"), Decomposition.parse("V2"), blocks21)


def test_leq_rejects_foreign_pattern(pattern, blocks21):
    other = Eolp.all_dots(BlockData.of([1, 2]))
    with pytest.raises(PreconditionError):
        leq(other, pattern("U21 + V1", blocks21), blocks21)


def test_poset_json(blocks21):
    payload = hasse(blocks21).to_json()
    assert len(payload["elements"]) == 4
    assert payload["hom_order"] is True
    assert sorted(payload["dims"]) == [0, 2, 3, 4]


def test_minimality_fails_across_an_intermediate_orbit(borel3):
    D, Dp, W = Decomposition.parse("U31"), Decomposition.parse("U13"), Decomposition.parse("V2")
    assert not minimality_check(D, Dp, W, borel3)
    poset = hasse(borel3)
    assert not poset.is_cover(from_multiplicities(D + W, borel3), from_multiplicities(Dp + W, borel3))


def test_minimality_holds_for_adjacent_swap(borel3):
    assert minimality_check(Decomposition.parse("U21"), Decomposition.parse("U12"), Decomposition.parse("V3"), borel3)


@pytest.mark.parametrize("blocks, low, first, middle, fourth, top", [
    ((2, 1, 1), "U21 + U31", "U31 + U12", ("U11 + U32", "U13 + U21"), "U11 + U23", "U12 + U13"),
    ((1, 2, 1), "U22 + U31", "U21 + U32", ("U12 + U32", "U21 + U23"), "U22 + U13", "U12 + U23"),
    ((1, 1, 2), "U31 + U32", "U31 + U23", ("U21 + U33", "U32 + U13"), "U12 + U33", "U23 + U13"),
])
def test_dot_free_patterns_on_three_vertices(pattern, blocks, low, first, middle, fourth, top):
    data = BlockData.of(blocks)
    poset = hasse(data)
    ids = {text: poset.index(pattern(text, data)) for text in (low, first, *middle, fourth, top)}
    dot_free = {i for i, e in enumerate(poset.elements) if sum(e.dots) == 0}
    assert dot_free == set(ids.values())
    left, right = middle
    expected = {(low, first), (first, left), (first, right), (left, fourth), (right, fourth), (fourth, top)}
    restricted = {(i, j) for i, j in poset.covers if i in dot_free and j in dot_free}
    assert restricted == {(ids[a], ids[b]) for a, b in expected}
    assert not poset.relation[ids[left]][ids[right]]
    assert not poset.relation[ids[right]][ids[left]]


@pytest.mark.slow
def test_borel_five_poset_laws_and_cover_drops():
    data = BlockData.borel(5)
    poset = hasse(data)
    size = len(poset.elements)
    rel = poset.relation
    for i in range(size):
        for j in range(size):
            if i != j and rel[i][j]:
                assert not rel[j][i]
                assert all(rel[i][k] for k in range(size) if rel[j][k])
    assert poset.maximum == poset.index(Eolp.all_dots(data))
    assert all(poset.dims[j] == poset.dims[i] - 1 for i, j in poset.covers)
