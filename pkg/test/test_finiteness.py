from itertools import combinations

import pytest

from backend.block_data import BlockData
from backend.errors import PreconditionError, ShapeError
from backend.exact_linalg import (SampleKind, conjugate, det, in_pattern, is_zero, make_rng, mat_pow, nilpotency_degree,
                                  sample, to_matrix)
from backend.finiteness import Answer, FiniteReason, WitnessKind, are_conjugate, is_finite, witness_family
from backend.link_patterns import enumerate_patterns
from backend.orbit_classify import representative_matrix


def _compositions(n):
    for k in range(n):
        for cuts in combinations(range(1, n), k):
            edges = (0,) + cuts + (n,)
            yield tuple(edges[i + 1] - edges[i] for i in range(len(edges) - 1))


def _expected_finite(blocks, x):
    p = len(blocks)
    return x <= 2 or p == 1 or (p == 2 and (x == 3 or min(blocks) == 1))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_verdict_table(n):
    for blocks in _compositions(n):
        for x in range(1, n + 1):
            verdict = is_finite(BlockData.of(blocks), x)
            assert verdict.finite is _expected_finite(blocks, x), (blocks, x)
            if verdict.finite:
                assert verdict.witness is None
            else:
                assert verdict.witness.kind is (WitnessKind.D if len(blocks) >= 3 else WitnessKind.E)


def test_verdict_examples():
    assert is_finite(BlockData.of([1, 1, 1]), 2).reason is FiniteReason.X_LE_2
    assert is_finite(BlockData.of([2, 3]), 3).reason is FiniteReason.MAXIMAL_X3
    assert is_finite(BlockData.of([1, 4]), 5).reason is FiniteReason.MAXIMAL_WITH_LINE
    assert is_finite(BlockData.of([4]), 4).reason is FiniteReason.SINGLE_BLOCK_JORDAN
    verdict = is_finite(BlockData.of([1, 1, 1]), 3)
    assert verdict.to_json() == {"finite": False, "reason": "infinite_with_witness", "witness": "D",
                                 "parameters": {"n": 3, "x": 3, "blocks": [1, 1, 1]}}


def test_verdict_rejects_bad_nilpotency():
    with pytest.raises(PreconditionError):
        is_finite(BlockData.of([1, 1]), 3)
    with pytest.raises(PreconditionError):
        is_finite(BlockData.of([1, 1]), 0)


def test_witness_d_matrix():
    N = witness_family("D", 3, 3, 2)
    assert N == to_matrix([[0, 0, 0], [1, 0, 0], [2, 1, 0]])
    assert nilpotency_degree(witness_family("D", 5, 3, 1)) == 3


def test_witness_d_embedded():
    data = BlockData.of([1, 2, 1])
    N = witness_family(WitnessKind.D, 4, 3, 5, data)
    assert N[1, 0] == 1 and N[3, 0] == 5 and N[3, 1] == 1
    assert sum(1 for entry in N if entry != 0) == 3


def test_witness_e_degree_and_placement():
    N = witness_family("E", 4, 4, 3)
    assert nilpotency_degree(N) == 4
    shifted = witness_family("E", 5, 4, 3, BlockData.of([3, 2]))
    assert all(entry == 0 for entry in shifted.row(0))
    assert shifted[1:, 1:] == N


def test_witness_f_degree():
    N = witness_family("F", 4, 4, "1/2")
    assert not is_zero(mat_pow(N, 2))
    assert is_zero(mat_pow(N, 4))


def test_d_parameters_are_pairwise_separated():
    data = BlockData.borel(3)
    members = [witness_family("D", 3, 3, lam) for lam in (1, 2, -1, 3, "1/2")]
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            assert are_conjugate(members[i], members[j], data).answer is Answer.NO


def test_unembedded_d_on_borel_four():
    data = BlockData.borel(4)
    result = are_conjugate(witness_family("D", 4, 3, 1), witness_family("D", 4, 3, 2), data)
    assert result.answer is Answer.NO


def test_embedded_d_is_separated():
    data = BlockData.of([1, 2, 1])
    result = are_conjugate(witness_family("D", 4, 3, 1, data), witness_family("D", 4, 3, 2, data), data)
    assert result.answer is Answer.NO


def test_e_is_separated():
    data = BlockData.of([2, 2])
    result = are_conjugate(witness_family("E", 4, 4, 1, data), witness_family("E", 4, 4, 2, data), data)
    assert result.answer is Answer.NO


def test_f_members_are_conjugate():
    data = BlockData.of([1, 3])
    N, Np = witness_family("F", 4, 4, 1, data), witness_family("F", 4, 4, 2, data)
    result = are_conjugate(N, Np, data)
    assert result.answer is Answer.YES
    assert in_pattern(result.g, data)
    assert det(result.g) != 0
    assert conjugate(result.g, N) == Np


def test_matrix_is_conjugate_to_itself():
    data = BlockData.borel(3)
    N = witness_family("D", 3, 3, 1)
    result = are_conjugate(N, N, data)
    assert result.answer is Answer.YES
    assert result.to_json()["answer"] == "yes"


def test_rank_table_separates_transposes():
    result = are_conjugate(to_matrix([[0, 1], [0, 0]]), to_matrix([[0, 0], [1, 0]]), BlockData.borel(2))
    assert result.answer is Answer.NO
    assert result.certificate["method"] == "rank_table"


@pytest.mark.parametrize("blocks", [(2, 1), (1, 1, 1), (1, 2)])
def test_square_zero_conjugacy_matches_patterns(blocks):
    data = BlockData.of(blocks)
    patterns = enumerate_patterns(data)
    for e in patterns:
        for f in patterns:
            N, Np = representative_matrix(e, data), representative_matrix(f, data)
            result = are_conjugate(N, Np, data, seed=3)
            assert (result.answer is Answer.YES) is (e == f)
            if result.answer is Answer.YES:
                assert in_pattern(result.g, data)
                assert conjugate(result.g, N) == Np


def test_witness_errors():
    with pytest.raises(PreconditionError):
        witness_family("D", 3, 3, 0)
    with pytest.raises(PreconditionError):
        witness_family("Q", 3, 3, 1)
    with pytest.raises(ShapeError):
        witness_family("D", 4, 3, 1, BlockData.of([1, 1, 1]))
    with pytest.raises(PreconditionError):
        witness_family("E", 4, 3, 1)
    with pytest.raises(PreconditionError):
        witness_family("D", 3, 4, 1)
    with pytest.raises(PreconditionError):
        witness_family("D", 4, 3, 1, BlockData.of([2, 2]))


def test_conjugacy_shape_mismatch():
    with pytest.raises(ShapeError):
        are_conjugate(to_matrix([[0, 0], [1, 0]]), to_matrix([[0, 0], [1, 0]]), BlockData.borel(3))


def _assert_parabolic_conjugates_found(blocks, pairs, seed):
    data = BlockData.of(blocks)
    rng = make_rng(seed)
    for _ in range(pairs):
        N = sample(SampleKind.NILPOTENT, data, x=2, seed=rng)
        h = sample(SampleKind.PARABOLIC, data, seed=rng)
        Np = conjugate(h, N)
        result = are_conjugate(N, Np, data, seed=rng)
        assert result.answer is Answer.YES
        assert in_pattern(result.g, data)
        assert det(result.g) != 0
        assert conjugate(result.g, N) == Np


@pytest.mark.parametrize("blocks", [(1, 2), (2, 1), (1, 1, 1), (2, 2)])
def test_square_zero_conjugates_are_found(blocks):
    _assert_parabolic_conjugates_found(blocks, 8, seed=sum(blocks))


@pytest.mark.slow
def test_square_zero_conjugates_are_found_at_scale():
    for k, blocks in enumerate([(1, 2), (2, 1), (1, 1, 1), (2, 2), (1, 2, 1)]):
        _assert_parabolic_conjugates_found(blocks, 40, seed=100 + k)


@pytest.mark.slow
def test_e_parameters_are_pairwise_separated():
    data = BlockData.of([2, 2])
    members = [witness_family("E", 4, 4, lam, data) for lam in (1, 2, -1, 3, "1/2")]
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            assert are_conjugate(members[i], members[j], data).answer is Answer.NO
