"""
Classification of 2-nilpotent matrices into P-orbits.

For N with N^2 = 0 let r(k,l) be the rank of N restricted to rows d_k+1..n and
columns 1..d_l. P stabilizes every F_k and every quotient K^n / F_k, so the
table is a P-invariant. With c(k,l) = r(0,l) - r(k,l), the number of arrows
with source <= l and target <= k, inclusion-exclusion recovers every p_{i,j}.
"""
from typing import Dict, List, Tuple

from pydantic import BaseModel, ConfigDict
from sympy import ImmutableMatrix, zeros

from backend.block_data import BlockData
from backend.errors import InvalidPatternError, NotNilpotentError, ShapeError
from backend.exact_linalg import RatMatrix, is_zero, mat_pow, rank
from backend.link_patterns import Eolp, validate
from backend.logger import get_logger

logger = get_logger(__name__)


class RankProfile(BaseModel):
    """Rank table r(k,l), 0 <= k,l <= p, with the derived a and b invariants."""
    model_config = ConfigDict(frozen=True)

    p: int
    table: Tuple[Tuple[int, ...], ...]
    a: Tuple[int, ...]
    b: Tuple[int, ...]

    def r(self, k: int, l: int) -> int:
        return self.table[k][l]


def _check_shape(N: RatMatrix, blocks: BlockData) -> None:
    if N.shape != (blocks.n, blocks.n):
        raise ShapeError(f"matrix is {N.shape[0]}x{N.shape[1]}, block data needs {blocks.n}x{blocks.n}")


def rank_table(N: RatMatrix, blocks: BlockData) -> Tuple[Tuple[int, ...], ...]:
    """r(k,l) for any square N of the right size; no nilpotency requirement."""
    _check_shape(N, blocks)
    p = blocks.p
    return tuple(
        tuple(rank(ImmutableMatrix(N[blocks.d(k):, :blocks.d(l)])) for l in range(p + 1))
        for k in range(p + 1)
    )


def rank_table_powers(N: RatMatrix, blocks: BlockData) -> Tuple[Tuple[Tuple[int, ...], ...], ...]:
    """Rank tables of N, N^2, ..., N^n; P-invariant for every nilpotency degree."""
    return tuple(rank_table(mat_pow(N, m), blocks) for m in range(1, blocks.n + 1))


def rank_profile(N: RatMatrix, blocks: BlockData) -> RankProfile:
    _check_shape(N, blocks)
    if not is_zero(mat_pow(N, 2)):
        raise NotNilpotentError("rank profiles classify 2-nilpotent matrices only (N^2 != 0)")
    table = rank_table(N, blocks)
    p = blocks.p
    a = tuple(blocks.d(k) - table[0][k] for k in range(1, p + 1))
    b = tuple(blocks.d(l) - table[k][l] for k in range(1, p + 1) for l in range(1, p + 1))
    return RankProfile(p=p, table=table, a=a, b=b)


def classify(N: RatMatrix, blocks: BlockData) -> Eolp:
    """The Eolp labelling the P-orbit of a 2-nilpotent N."""
    profile = rank_profile(N, blocks)
    p = blocks.p

    def c(k: int, l: int) -> int:
        return profile.r(0, l) - profile.r(k, l)

    table = [[c(i, j) - c(i - 1, j) - c(i, j - 1) + c(i - 1, j - 1) for j in range(1, p + 1)]
             for i in range(1, p + 1)]
    loads = [sum(table[i][j] + table[j][i] for j in range(p)) for i in range(p)]
    dots = tuple(b - load for b, load in zip(blocks.blocks, loads))
    e = Eolp(arrows=tuple(tuple(row) for row in table), dots=dots)
    if not validate(e, blocks):
        raise InvalidPatternError(f"rank profile of N produced an invalid pattern {e.describe()}")
    logger.debug("classified matrix as %s", e.describe())
    return e


def representative_matrix(e: Eolp, blocks: BlockData) -> RatMatrix:
    """
    A 0/1 matrix in the orbit of ``e``.

    Each arrow j -> i takes a fresh basis index s in block j and a fresh basis
    index t in block i and sets N[t, s] = 1. Loops draw both indices from the
    same block; dots keep their indices unused.
    """
    if not validate(e, blocks):
        raise InvalidPatternError(f"pattern {e.describe()} is invalid for blocks {blocks.blocks}")
    cursor: Dict[int, int] = {k: blocks.d(k - 1) + 1 for k in range(1, blocks.p + 1)}

    def take(block: int) -> int:
        index = cursor[block]
        cursor[block] += 1
        return index

    N = zeros(blocks.n, blocks.n)
    for i in range(1, blocks.p + 1):
        for j in range(1, blocks.p + 1):
            for _ in range(e.arrow(i, j)):
                source = take(j)
                target = take(i)
                N[target - 1, source - 1] = 1
    return ImmutableMatrix(N)

