"""
Generic normal forms for the P-, B- and U-actions on the nilpotent cone.

A nilpotent N is P-generic when it is regular and, for k = 1..p-1, the first
d_k columns of N^{n-d_k} are linearly independent (F_k meets ker N^{n-d_k}
trivially). Both conditions are P-invariant. On this locus N is P-conjugate
to a unique H that is strictly lower triangular with unit subdiagonal and has
the structured zeros checked by ``satisfies_shape``.

Construction: pick a cyclic vector c, so im N^m is spanned by N^m c, ..., N^{n-1} c.
The first block of the basis solves a small triangular system inside F_1;
every later vector is N of its predecessor projected onto F_k along
im N^{d_k}. The result is a basis w with span(w_{m+1}, ..., w_n) = im N^m.
"""
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict
from sympy import ImmutableMatrix, Matrix, eye

from backend.block_data import BlockData
from backend.errors import NotGenericError, NotNilpotentError, ShapeError
from backend.exact_linalg import (RatMatrix, corner_submatrix, det, in_pattern, inverse, is_zero, mat_pow,
                                  matrix_to_json, nilpotency_degree, nullspace, rank)
from backend.logger import get_logger

logger = get_logger(__name__)


class GenericNormalForm(BaseModel):
    """H = g N g^-1 with g in P."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    H: RatMatrix
    g: RatMatrix
    blocks: BlockData

    def to_json(self) -> Dict:
        zeros, ones = shape_positions(self.blocks)
        return {
            "H": matrix_to_json(self.H),
            "g": matrix_to_json(self.g),
            "blocks": list(self.blocks.blocks),
            "certificate": {"zeros": [list(z) for z in zeros], "ones": [list(o) for o in ones]},
        }


class UNormalForm(BaseModel):
    """H = u N u^-1 with u upper unitriangular and H in H_U."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    H: RatMatrix
    u: RatMatrix

    def to_json(self) -> Dict:
        return {"H": matrix_to_json(self.H), "u": matrix_to_json(self.u)}


def _require_nilpotent(N: RatMatrix, blocks: BlockData) -> None:
    if N.shape != (blocks.n, blocks.n):
        raise ShapeError(f"matrix is {N.shape[0]}x{N.shape[1]}, block data needs {blocks.n}x{blocks.n}")
    if nilpotency_degree(N) is None:
        raise NotNilpotentError("normal forms are defined on the nilpotent cone only")


# ==================== GENERICITY ====================
def is_regular(N: RatMatrix) -> bool:
    return N.rows <= 1 or not is_zero(mat_pow(N, N.rows - 1))


def column_failures(N: RatMatrix, blocks: BlockData) -> List[int]:
    """Flag indices k where the first d_k columns of N^{n-d_k} are dependent."""
    n = blocks.n
    failures = []
    for k in range(1, blocks.p):
        dk = blocks.d(k)
        if rank(ImmutableMatrix(mat_pow(N, n - dk)[:, :dk])) != dk:
            failures.append(k)
    return failures


def column_condition(N: RatMatrix, blocks: BlockData) -> bool:
    _require_nilpotent(N, blocks)
    return not column_failures(N, blocks)


def corner_minors(N: RatMatrix, blocks: BlockData) -> List:
    """det((N^{n-d_k})_{(d_k,d_k)}) for k = 1..p-1."""
    _require_nilpotent(N, blocks)
    n = blocks.n
    return [det(corner_submatrix(mat_pow(N, n - blocks.d(k)), blocks.d(k), blocks.d(k))) for k in range(1, blocks.p)]


def minor_condition(N: RatMatrix, blocks: BlockData) -> bool:
    return all(m != 0 for m in corner_minors(N, blocks))


def is_generic(N: RatMatrix, blocks: BlockData) -> bool:
    """Regular with independent flag columns; for Borel blocks equivalent to all corner minors nonzero."""
    _require_nilpotent(N, blocks)
    return is_regular(N) and not column_failures(N, blocks)


# ==================== SHAPE ====================
def shape_positions(blocks: BlockData) -> Tuple[List[Tuple[int, int]], List[Tuple[int, int]]]:
    """(zero positions, one positions), 1-based, prescribed for a normal form."""
    n = blocks.n
    d1 = blocks.d(1)
    zeros: List[Tuple[int, int]] = []
    ones: List[Tuple[int, int]] = []
    for x in range(1, n + 1):
        zeros.extend((row, x) for row in range(1, x + 1))
        if x == n:
            continue
        ones.append((x + 1, x))
        if x < d1:
            last = min(d1 + 1, n)
        else:
            last = blocks.d(blocks.block_of(x + 1))
        zeros.extend((row, x) for row in range(x + 2, last + 1))
    return zeros, ones


def satisfies_shape(H: RatMatrix, blocks: BlockData) -> bool:
    if H.shape != (blocks.n, blocks.n):
        return False
    zeros, ones = shape_positions(blocks)
    return all(H[i - 1, j - 1] == 0 for i, j in zeros) and all(H[i - 1, j - 1] == 1 for i, j in ones)


def shape_certificate(H: RatMatrix, blocks: BlockData) -> Dict:
    zeros, ones = shape_positions(blocks)
    return {
        "ok": satisfies_shape(H, blocks),
        "zeros": [list(z) for z in zeros],
        "ones": [list(o) for o in ones],
    }


# ==================== CONSTRUCTION ====================
def _cyclic_vector(N: RatMatrix) -> RatMatrix:
    n = N.rows
    top = mat_pow(N, n - 1)
    for j in range(n):
        if any(top[i, j] != 0 for i in range(n)):
            return ImmutableMatrix(eye(n)[:, j])
    raise NotGenericError("matrix is not regular nilpotent")


def _splitting_inverse(N: RatMatrix, c: RatMatrix, dk: int) -> RatMatrix:
    """Inverse of [e_1..e_dk, N^dk c, ..., N^{n-1} c]."""
    n = N.rows
    columns = [eye(n)[:, j] for j in range(dk)] + [mat_pow(N, m) * c for m in range(dk, n)]
    return inverse(ImmutableMatrix(Matrix.hstack(*columns)))


def _project(N: RatMatrix, c: RatMatrix, dk: int, v: RatMatrix, cache: Dict[int, RatMatrix]) -> RatMatrix:
    """Component of v in F_k along im N^{d_k}."""
    if dk not in cache:
        cache[dk] = _splitting_inverse(N, c, dk)
    z = cache[dk] * v
    out = Matrix.zeros(N.rows, 1)
    for i in range(dk):
        out[i, 0] = z[i, 0]
    return ImmutableMatrix(out)


def _first_block(N: RatMatrix, c: RatMatrix, d1: int, cache: Dict[int, RatMatrix]) -> List[RatMatrix]:
    n = N.rows
    if d1 not in cache:
        cache[d1] = _splitting_inverse(N, c, d1)
    E1 = ImmutableMatrix(eye(n)[:, :d1])
    T = cache[d1] * N * E1
    A = ImmutableMatrix(T[:d1, :])
    f = ImmutableMatrix(T[d1, :])
    if d1 == 1:
        y = ImmutableMatrix([[1]])
    else:
        constraints = ImmutableMatrix(Matrix.vstack(*[f * mat_pow(A, m) for m in range(d1 - 1)]))
        candidates = nullspace(constraints)
        if len(candidates) != 1:
            raise NotGenericError(f"first flag block admits {len(candidates)} independent start vectors")
        y = candidates[0]
    ws = []
    for _ in range(d1):
        ws.append(ImmutableMatrix(E1 * y))
        y = A * y
    return ws


def _adapted_basis(N: RatMatrix, blocks: BlockData) -> RatMatrix:
    n = N.rows
    c = _cyclic_vector(N)
    if blocks.p == 1:
        ws = [c]
        while len(ws) < n:
            ws.append(ImmutableMatrix(N * ws[-1]))
        return ImmutableMatrix(Matrix.hstack(*ws))
    cache: Dict[int, RatMatrix] = {}
    d1 = blocks.d(1)
    ws = _first_block(N, c, d1, cache)
    for x in range(d1, n):
        k = blocks.block_of(x + 1)
        image = ImmutableMatrix(N * ws[-1])
        ws.append(image if k == blocks.p else _project(N, c, blocks.d(k), image, cache))
    return ImmutableMatrix(Matrix.hstack(*ws))


def normal_form(N: RatMatrix, blocks: BlockData) -> GenericNormalForm:
    """
    The generic P-normal form of N.

    Args:
        N (RatMatrix): A nilpotent n x n matrix.
        blocks (BlockData): Block sizes of P.

    Returns:
        GenericNormalForm: H and the witness g in P with g N g^-1 = H.
    """
    _require_nilpotent(N, blocks)
    if not is_regular(N):
        raise NotGenericError("matrix is not regular nilpotent")
    failures = column_failures(N, blocks)
    if failures:
        raise NotGenericError(f"flag columns dependent at k = {failures}")
    W = _adapted_basis(N, blocks)
    if det(W) == 0:
        raise NotGenericError("adapted basis is singular")
    g = inverse(W)
    H = ImmutableMatrix(g * N * W)
    if not in_pattern(g, blocks) or not satisfies_shape(H, blocks):
        raise NotGenericError("constructed form violates the normal-form shape")
    logger.debug("normal form for blocks %s computed", blocks.blocks)
    return GenericNormalForm(H=H, g=g, blocks=blocks)


def u_normal_form(N: RatMatrix) -> UNormalForm:
    """
    The U-normal form: rescale the Borel basis to unit diagonal.

    The subdiagonal of H is no longer normalized; it carries the values of
    the unipotent invariants.
    """
    n = N.rows
    blocks = BlockData.borel(n)
    form = normal_form(N, blocks)
    W = inverse(form.g)
    scale = [W[x, x] for x in range(n)]
    Wu = ImmutableMatrix(Matrix(n, n, lambda i, j: W[i, j] / scale[j]))
    u = inverse(Wu)
    H = ImmutableMatrix(u * N * Wu)
    return UNormalForm(H=H, u=u)


def in_hu(H: RatMatrix) -> bool:
    """Strictly lower triangular with nonzero subdiagonal."""
    n = H.rows
    strictly_lower = all(H[i, j] == 0 for i in range(n) for j in range(n) if i <= j)
    return strictly_lower and all(H[i + 1, i] != 0 for i in range(n - 1))


def is_unipotent(u: RatMatrix) -> bool:
    n = u.rows
    return all(u[i, j] == (1 if i == j else 0) for i in range(n) for j in range(n) if i >= j)
