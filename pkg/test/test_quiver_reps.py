import pytest

from backend.block_data import BlockData
from backend.errors import DimensionVectorError, IndexConstraintError, NotNilpotentError, ShapeError
from backend.exact_linalg import SampleKind, identity, make_rng, sample, to_matrix, zero_matrix
from backend.link_patterns import enumerate_patterns, to_multiplicities
from backend.orbit_classify import classify, representative_matrix
from backend.quiver_reps import (Decomposition, Label, QuiverRep, build_indecomposable, decomposition_rep,
                                 dimension_vector, direct_sum, hom_dim_formula, hom_dim_oracle, hom_label,
                                 invariant_vector, is_indecomposable_shape_ok, labels_for, orbit_dimension,
                                 orbit_dimension_from_matrix, stabilizer_dimension)


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_hom_oracle_matches_formula(p):
    reps = {label: build_indecomposable(label, p) for label in labels_for(p)}
    for X in labels_for(p):
        for Y in labels_for(p):
            assert hom_dim_oracle(reps[X], reps[Y]) == hom_label(X, Y), (X, Y)


def test_indecomposables_have_injective_chain_maps():
    for label in labels_for(3):
        assert is_indecomposable_shape_ok(build_indecomposable(label, 3))


def test_endomorphisms_of_indecomposables():
    assert hom_label(Label.U(1, 1), Label.U(1, 1)) == 2
    assert hom_label(Label.V(2), Label.V(2)) == 1
    assert hom_label(Label.U(2, 1), Label.U(1, 2)) == 1


@pytest.mark.parametrize("text, a, b", [
    ("U11", (1, 1), (2, 2, 2, 2)),
    ("U21", (0, 1), (0, 1, 1, 2)),
    ("U12", (1, 1), (1, 2, 1, 2)),
    ("U22", (0, 1), (0, 1, 0, 2)),
    ("V1", (1, 1), (1, 1, 1, 1)),
    ("V2", (0, 1), (0, 1, 0, 1)),
    ("V1 + V2", (1, 2), (1, 2, 1, 2)),
])
def test_invariant_vectors(text, a, b):
    vector = invariant_vector(Decomposition.parse(text), 2)
    assert vector.a == a
    assert vector.b == b


def test_hom_formula_is_additive():
    X = Decomposition.parse("U21 + V1")
    Y = Decomposition.parse("U12 + V2^2")
    split = sum(hom_dim_formula(Decomposition.of(x), Y) for x in X.labels())
    assert hom_dim_formula(X, Y) == split
    assert hom_dim_oracle(decomposition_rep(X, 2), decomposition_rep(Y, 2)) == hom_dim_formula(X, Y)


@pytest.mark.parametrize("text, p, dims", [
    ("U21", 2, (1, 2)),
    ("U12", 2, (1, 2)),
    ("U11", 2, (2, 2)),
    ("V2", 3, (0, 1, 1)),
    ("U31 + V2", 3, (1, 2, 3)),
])
def test_dimension_vector(text, p, dims):
    assert dimension_vector(Decomposition.parse(text), p) == dims


def test_parse_forms():
    assert Decomposition.parse("U(2,1) + V(1)^2") == Decomposition.parse("U21+V1+V1")
    assert Decomposition.parse("0") == Decomposition()
    with pytest.raises(IndexConstraintError):
        Decomposition.parse("W12")
    with pytest.raises(IndexConstraintError):
        Decomposition.parse("U123")


def test_direct_sum_dims():
    M = direct_sum(build_indecomposable(Label.U(2, 1), 2), build_indecomposable(Label.V(1), 2))
    assert M.dims == (2, 3)
    assert M.is_injective


def test_rep_validation():
    with pytest.raises(ShapeError):
        QuiverRep([1, 2], [], zero_matrix(2, 2))
    with pytest.raises(NotNilpotentError):
        QuiverRep([1], [], identity(1))
    with pytest.raises(ShapeError):
        QuiverRep([1, 2], [to_matrix([[1]])], zero_matrix(2, 2))


@pytest.mark.parametrize("blocks", [(1, 1), (2, 1), (1, 2), (1, 1, 1), (2, 2), (1, 2, 1)])
def test_orbit_dimension_matches_stabilizer(blocks):
    data = BlockData.of(blocks)
    for e in enumerate_patterns(data):
        N = representative_matrix(e, data)
        assert orbit_dimension_from_matrix(N, data) == orbit_dimension(to_multiplicities(e), data)


def test_orbit_dimension_on_random_matrices():
    for seed, blocks in enumerate([(1, 2), (2, 1, 1), (1, 1, 1, 1), (3, 2), (2, 2, 2)]):
        data = BlockData.of(blocks)
        N = sample(SampleKind.NILPOTENT, data, x=2, seed=seed)
        expected = orbit_dimension(to_multiplicities(classify(N, data)), data)
        assert data.dim_p - stabilizer_dimension(N, data) == expected


def test_zero_orbit_has_dimension_zero():
    data = BlockData.of([2, 1])
    assert orbit_dimension(Decomposition.parse("V1^2 + V2"), data) == 0


def test_orbit_dimension_rejects_wrong_type():
    with pytest.raises(DimensionVectorError):
        orbit_dimension(Decomposition.parse("V1"), BlockData.of([2, 1]))


@pytest.mark.slow
def test_orbit_dimension_on_many_random_matrices(random_blocks):
    rng = make_rng(2024)
    for _ in range(200):
        data = random_blocks(rng)
        N = sample(SampleKind.NILPOTENT, data, x=min(2, data.n), seed=rng)
        expected = orbit_dimension(to_multiplicities(classify(N, data)), data)
        assert data.dim_p - stabilizer_dimension(N, data) == expected
